#pragma once

#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace hz {

// INI-style experiment configuration; keys are addressed as "section.key".
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text);

  bool has(const std::string& key) const;
  // Required values throw if missing or malformed.
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  // Comma-separated list of numbers.
  std::vector<double> numbers(const std::string& key) const;

 private:
  boost::property_tree::ptree tree_;
};

}  // namespace hz
