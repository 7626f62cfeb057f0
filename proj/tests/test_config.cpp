#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "kolmonet/config.hpp"

using namespace kolmonet;

namespace {

Config parse(const std::string& text) {
  std::istringstream is(text);
  return Config::from_stream(is, "test");
}

}  // namespace

TEST_CASE("from_stream parses assignments, comments, and blank lines") {
  const Config cfg = parse(
      "# leading comment\n"
      "\n"
      "d = 3\n"
      "  epsilon =  0.05  # trailing comment\n"
      "payoff = basket_call\n"
      "eps_list = 0.2, 0.1,0.05\n");
  CHECK(cfg.has("d"));
  CHECK(cfg.get_int("d") == 3);
  CHECK(cfg.get_real("epsilon") == 0.05);
  CHECK(cfg.get_string("payoff") == "basket_call");
  CHECK(cfg.get_list("eps_list") == std::vector<double>{0.2, 0.1, 0.05});
  CHECK_FALSE(cfg.has("seed"));
  const auto keys = cfg.keys();
  CHECK(keys == std::vector<std::string>{"d", "eps_list", "epsilon", "payoff"});
}

TEST_CASE("from_stream reports malformed lines with their source position") {
  CHECK_THROWS_WITH_AS(parse("a = 1\nb = 2\nnot an assignment\n"),
                       doctest::Contains("test:3"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse("a = 1\na = 2\n"), doctest::Contains("duplicate key 'a'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse("2bad = 1\n"), doctest::Contains("not a valid key"),
                       std::invalid_argument);
}

TEST_CASE("typed getters convert and name the offending key") {
  const Config cfg = parse(
      "n = 42\n"
      "x = 1.5\n"
      "neg = -7\n"
      "flag = yes\n"
      "off = 0\n"
      "word = hello\n"
      "mixed = 1, two, 3\n");
  CHECK(cfg.get_int("n") == 42);
  CHECK(cfg.get_uint("n") == 42u);
  CHECK(cfg.get_real("n") == 42.0);
  CHECK(cfg.get_real("x") == 1.5);
  CHECK(cfg.get_int("neg") == -7);
  CHECK(cfg.get_bool("flag", false));
  CHECK_FALSE(cfg.get_bool("off", true));
  CHECK(cfg.get_bool("absent", true));
  CHECK_FALSE(cfg.get_bool("absent", false));

  CHECK_THROWS_WITH_AS(cfg.get_real("word"), doctest::Contains("key 'word'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_int("x"), doctest::Contains("must be an integer"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_uint("neg"),
                       doctest::Contains("must be a nonnegative integer"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_bool("word", true), doctest::Contains("boolean"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_list("mixed"),
                       doctest::Contains("non-numeric list entry 'two'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_string("missing"),
                       doctest::Contains("missing required key 'missing'"),
                       std::invalid_argument);
}

TEST_CASE("fallback getters only engage when the key is absent") {
  const Config cfg = parse("n = 5\n");
  CHECK(cfg.get_int("n", 9) == 5);
  CHECK(cfg.get_int("m", 9) == 9);
  CHECK(cfg.get_real("m", 2.5) == 2.5);
  CHECK(cfg.get_uint("m", 7u) == 7u);
  CHECK(cfg.get_string("m", "dflt") == "dflt");
  CHECK(cfg.get_list("m", {1.0, 2.0}) == std::vector<double>{1.0, 2.0});
  // a present but malformed key still fails through the fallback getter
  const Config bad = parse("n = abc\n");
  CHECK_THROWS_AS(bad.get_int("n", 9), std::invalid_argument);
}

TEST_CASE("set overrides stream values and validates the key") {
  Config cfg = parse("n = 5\n");
  cfg.set("n", "6");
  CHECK(cfg.get_int("n") == 6);
  cfg.set("fresh", "0.25");
  CHECK(cfg.get_real("fresh") == 0.25);
  CHECK_THROWS_AS(cfg.set("bad key", "1"), std::invalid_argument);
}

TEST_CASE("from_file rejects missing files") {
  CHECK_THROWS_AS(Config::from_file("/nonexistent/kolmonet.cfg"), std::runtime_error);
}

TEST_CASE("error positions use the recorded line for stream keys") {
  const Config cfg = parse("a = 1\nb = oops\n");
  CHECK_THROWS_WITH_AS(cfg.get_real("b"), doctest::Contains("test:2"),
                       std::invalid_argument);
}
