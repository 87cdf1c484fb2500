#include "doctest.h"

#include <fstream>

#include "probisim/partition.hpp"
#include "probisim/pts.hpp"

using namespace probisim;
using namespace probisim::pts;

namespace {

std::string read_file(const std::string& rel) {
  std::ifstream in(std::string(PROBISIM_SOURCE_DIR) + "/" + rel);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

RegularPresentation load_model(const std::string& name) {
  return parse_model(read_file("models/" + name + ".model"));
}

} // namespace

TEST_CASE("random walk validates with the published weights") {
  RegularPresentation p = load_model("random_walk");
  CHECK(p.weight == 4);
  CHECK(p.bound == 2);
  CHECK_FALSE(p.length_preserving);
  ValidationReport r = validate(p);
  CAPTURE(r.to_text());
  REQUIRE(r.valid);
  CHECK(r.live_weight.at("loop") == 4);
  CHECK(r.live_weight.at("move") == 4);
  CHECK_THROWS_AS((void)slice(p, 3), Error); // not length-preserving
}

TEST_CASE("corrupting the loop weight is rejected with a witness") {
  std::string text = read_file("models/random_walk.model");
  auto pos = text.find("z = 100");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 7, "z = 11 ");
  RegularPresentation p = parse_model(text);
  ValidationReport r = validate(p);
  REQUIRE_FALSE(r.valid);
  CHECK(r.action == "loop");
  CHECK(r.reason.find("sum") != std::string::npos);
  REQUIRE_FALSE(r.witness.empty());
}

TEST_CASE("ppda validates with weight 10 and bound 3") {
  RegularPresentation p = load_model("ppda");
  CHECK(p.weight == 10);
  CHECK(p.bound == 3);
  ValidationReport r = validate(p);
  CAPTURE(r.to_text());
  REQUIRE(r.valid);
  CHECK(r.live_weight.at("a") == 10);
}

TEST_CASE("trace distribution masses are exact and sum to one") {
  // two-state coin: s -toss-> {a (1), b (3)}; a, b dead.
  FinitePts f;
  f.base = automata::Alphabet({"a", "b", "s"});
  f.weight = 4;
  f.actions = {"toss"};
  f.configs = {f.base.parse_word("a"), f.base.parse_word("b"), f.base.parse_word("s")};
  f.rows = {{{}, {}, {{0, 1}, {1, 3}}}};
  TraceDistribution d = trace_distribution(f, f.base.parse_word("s"), 5);
  CHECK(d.unterminated.is_zero());
  Rational total(0);
  for (auto& [t, pr] : d.traces) total = total + pr;
  CHECK(total == Rational(1));
  CHECK(d.traces.at({0}) == Rational(1));
  TraceDistribution d2 = trace_distribution(f, f.base.parse_word("s"), 5);
  CHECK(total_variation(d, d2).is_zero());
  CHECK_THROWS_AS((void)trace_distribution(f, f.base.parse_word("ss"), 2), Error);
}
