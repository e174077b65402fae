#include <doctest.h>

#include <filesystem>

#include "hz/config.hpp"

using namespace hz;

TEST_CASE("parse values") {
  const auto c = Config::parse(
      "; comment\n[model]\nepsilon = 0.25\nnu = 1\nname = opening\n[run]\nx = -0.5, 0, 0.5\nreplicates = 10000\n"
      "fd = false\n");
  CHECK(c.has("model.epsilon"));
  CHECK_FALSE(c.has("model.gamma"));
  CHECK(c.number("model.epsilon") == 0.25);
  CHECK(c.number("model.gamma", 0.3) == 0.3);
  CHECK(c.integer("run.replicates") == 10000);
  CHECK(c.integer("run.missing", 7) == 7);
  CHECK(c.text("model.name") == "opening");
  CHECK(c.text("model.other", "x") == "x");
  CHECK_FALSE(c.flag("run.fd", true));
  CHECK(c.flag("run.heatmaps", true));
  CHECK(c.numbers("run.x") == std::vector<double>{-0.5, 0.0, 0.5});
}

TEST_CASE("errors") {
  const auto c = Config::parse("[a]\nb = hello\nn = 3.5\nflag = maybe\n");
  CHECK_THROWS(c.number("a.missing"));
  CHECK_THROWS(c.text("a.missing"));
  CHECK_THROWS(c.number("a.b"));
  CHECK_THROWS(c.integer("a.n"));
  CHECK_THROWS(c.flag("a.flag", false));
  CHECK_THROWS(Config::load("/nonexistent/file.ini"));
}

TEST_CASE("shipped configs load") {
  int count = 0;
  for (const auto& e : std::filesystem::directory_iterator(HZ_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(Config::load(e.path().string()));
    ++count;
  }
  CHECK(count >= 6);
}
