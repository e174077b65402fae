#include "hz/config.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>

namespace hz {

namespace {

template <class T>
T convert(const std::string& key, const std::string& raw) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(raw));
  } catch (const boost::bad_lexical_cast&) {
    throw std::invalid_argument("config: malformed value for " + key + ": '" + raw + "'");
  }
}

}  // namespace

Config Config::load(const std::string& path) {
  Config c;
  try {
    boost::property_tree::ini_parser::read_ini(path, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::runtime_error("config: " + std::string(e.what()));
  }
  return c;
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::runtime_error("config: " + std::string(e.what()));
  }
  return c;
}

bool Config::has(const std::string& key) const { return static_cast<bool>(tree_.get_optional<std::string>(key)); }

std::string Config::text(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) throw std::invalid_argument("config: missing required key " + key);
  return boost::trim_copy(*v);
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double Config::number(const std::string& key) const { return convert<double>(key, text(key)); }

double Config::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

// Parsed as a double so that 1e5 is accepted.
long Config::integer(const std::string& key) const {
  const double v = convert<double>(key, text(key));
  if (v != std::floor(v)) throw std::invalid_argument("config: expected an integer for " + key);
  return static_cast<long>(v);
}

long Config::integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = boost::to_lower_copy(text(key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: malformed boolean for " + key);
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<std::string> parts;
  const std::string raw = text(key);
  boost::split(parts, raw, boost::is_any_of(","));
  std::vector<double> out;
  for (const auto& p : parts)
    if (!boost::trim_copy(p).empty()) out.push_back(convert<double>(key, p));
  return out;
}

}  // namespace hz
