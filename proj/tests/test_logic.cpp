#include "doctest.h"

#include <fstream>

#include "probisim/compiler.hpp"
#include "probisim/formula.hpp"
#include "probisim/ws1s.hpp"
#include "tarski_oracle.hpp"

using namespace probisim;
using namespace probisim::logic;
using automata::ConvWord;
using automata::TapedAlphabet;
using automata::Word;

namespace {

Alphabet bin() { return Alphabet({"0", "1"}); }

std::vector<std::string> words_upto(std::size_t max) {
  std::vector<std::string> out{""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char c : {'0', '1'}) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

bool rel_member(const CompiledRelation& c, const std::vector<std::string>& assignment,
                const Alphabet& base) {
  if (c.is_constant()) return *c.constant;
  std::vector<Word> ws;
  for (const std::string& s : assignment) ws.push_back(base.parse_word(s));
  TapedAlphabet ta(base, static_cast<int>(ws.size()));
  return c.automaton.accepts(automata::convolve(ta, ws));
}

} // namespace

TEST_CASE("parse_formula on the grammar examples") {
  FormulaPtr f = parse_formula("E x . last_1(x) & x in lang(ones)");
  REQUIRE(f->kind() == NodeKind::Exists);
  REQUIRE(f->children()[0]->kind() == NodeKind::And);
  CHECK(f->children()[0]->children()[0]->kind() == NodeKind::Last);
  CHECK(f->children()[0]->children()[1]->kind() == NodeKind::InLang);
  CHECK(f->children()[0]->children()[1]->name() == "ones");

  FormulaPtr g = parse_formula("A x, y . eqlen(x,y) => (x <=p y => x = y)");
  REQUIRE(g->kind() == NodeKind::Forall);
  CHECK(g->quantified() == std::vector<std::string>{"x", "y"});
  CHECK(g->children()[0]->kind() == NodeKind::Implies);

  try {
    parse_formula("E x (");
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(std::string(e.what()).find("offset 4") != std::string::npos);
  }

  // precedence: ! > & > | > => (right) > <=>
  FormulaPtr h = parse_formula("!last_0(x) & last_1(x) | x = x => x = x <=> x = x");
  CHECK(h->kind() == NodeKind::Iff);
  CHECK(h->children()[0]->kind() == NodeKind::Implies);
  CHECK(h->children()[0]->children()[0]->kind() == NodeKind::Or);

  // printing round-trips through the parser to the same hash-consed node
  FormulaPtr p = parse_formula("A x . (E y . succp(x, y) & last_1(y)) => !(x = \"01\")");
  CHECK(parse_formula(p->to_string()) == p);
}

TEST_CASE("compile matches the worked examples") {
  Environment env(bin());
  Compiler comp(env);
  auto all4 = words_upto(4);

  CompiledRelation refl = comp.compile(parse_formula("x <=p x"));
  for (const auto& w : all4) CHECK(rel_member(refl, {w}, env.base()));

  CompiledRelation ident = comp.compile(parse_formula("x <=p y & eqlen(x,y)"));
  for (const auto& a : all4)
    for (const auto& b : all4)
      CHECK(rel_member(ident, {a, b}, env.base()) == (a == b));

  // E y . y <=p x & last_1(y): words containing the symbol 1, checked
  // against the direct semantics for all words of length <= 6.
  CompiledRelation has1 = comp.compile(parse_formula("E y . y <=p x & last_1(y)"));
  for (const auto& w : words_upto(6)) {
    bool expect = w.find('1') != std::string::npos;
    CHECK(rel_member(has1, {w}, env.base()) == expect);
  }
}

TEST_CASE("decide_sentence on the worked sentences") {
  Environment env(bin());
  Compiler comp(env);
  CHECK(comp.decide(parse_formula("A x, y . eqlen(x,y) => (x <=p y => x = y)")));
  CHECK_FALSE(comp.decide(parse_formula("E x . !(x <=p x)")));
  CHECK(comp.decide(parse_formula("A x . E y . x <=p y & !(y <=p x)")));
}

TEST_CASE("addition built-in is exact on canonical numerals") {
  Environment env(bin());
  Compiler comp(env);
  CompiledRelation add = comp.compile(parse_formula("add(x, z, y)"));
  REQUIRE(add.free_vars == std::vector<std::string>{"x", "z", "y"});
  TapedAlphabet t3(env.base(), 3);

  auto accepts_sum = [&](std::uint64_t x, std::uint64_t z, std::uint64_t y) {
    std::vector<Word> ws{numeral_word(x, env.base()), numeral_word(z, env.base()),
                         numeral_word(y, env.base())};
    return add.automaton.accepts(automata::convolve(t3, ws));
  };
  // the spec's worked examples
  CHECK(accepts_sum(5, 1, 6));
  CHECK_FALSE(accepts_sum(5, 1, 7));
  CHECK(accepts_sum(0, 0, 0));
  // exhaustive against integer arithmetic
  for (std::uint64_t x = 0; x <= 128; ++x)
    for (std::uint64_t z = 0; z <= 128; ++z)
      for (std::uint64_t y : {x + z, x + z + 1, (x + z == 0 ? 1 : x + z - 1)})
        CHECK(accepts_sum(x, z, y) == (x + z == y));

  // non-canonical encodings are rejected outright
  Word bad = {1, 0}; // internal "10": trailing zero
  CHECK_FALSE(add.automaton.accepts(
      automata::convolve(t3, std::vector<Word>{bad, numeral_word(0, env.base()),
                                               numeral_word(1, env.base())})));

  // numeral canonicity: every tape of add stays within the numeral domain
  RelationAutomaton dom = builtin_numeral_domain(env.base());
  for (int tape = 0; tape < 3; ++tape) {
    RelationAutomaton proj = add.automaton;
    for (int t = 2; t >= 0; --t)
      if (t != tape) proj = automata::project_tape(proj, t);
    CHECK(automata::is_subset(proj, dom).holds);
  }

  // surface reading is most-significant-first: numeral_domain as language
  CompiledRelation nd = comp.compile(parse_formula("x in lang(numerals)"));
  CHECK(rel_member(nd, {"0"}, env.base()));
  CHECK(rel_member(nd, {"1"}, env.base()));
  CHECK(rel_member(nd, {"01"}, env.base()));  // internal LSB word for 2
  CHECK_FALSE(rel_member(nd, {"10"}, env.base())); // trailing zero internally
  CHECK_FALSE(rel_member(nd, {""}, env.base()));
}

TEST_CASE("Not and Exists agree with their language semantics") {
  Environment env(bin());
  Compiler comp(env);
  FormulaPtr base = parse_formula("x <=p y & last_1(x)");
  CompiledRelation pos = comp.compile(base);
  CompiledRelation neg = comp.compile(f_not(base));
  TapedAlphabet t2(env.base(), 2);
  RelationAutomaton valid = automata::validity_automaton(t2);
  CHECK(automata::equal_language(
      neg.automaton, automata::intersect(valid, automata::complement(pos.automaton))));

  // Exists equals brute-force projection (witness lengths <= 6).
  CompiledRelation ex = comp.compile(f_exists({"y"}, base));
  for (const auto& x : words_upto(4)) {
    bool expect = false;
    for (const auto& y : words_upto(6))
      if (rel_member(pos, {x, y}, env.base())) expect = true;
    CHECK(rel_member(ex, {x}, env.base()) == expect);
  }
}

TEST_CASE("unbound and arity errors") {
  Environment env(bin());
  Compiler comp(env);
  CHECK_THROWS_AS((void)comp.compile(parse_formula("x in lang(nope)")), Error);
  CHECK_THROWS_AS((void)comp.compile(parse_formula("numerals(x, y)")), Error);
}

// ---------------------------------------------------------------------------

namespace {

struct FuzzGen {
  std::uint64_t s;
  std::uint32_t next(std::uint32_t bound) {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<std::uint32_t>((s >> 33) % bound);
  }
  Term term(int maxvar) {
    std::uint32_t r = next(10);
    if (r < 7) {
      static const char* names[] = {"x", "y", "z"};
      return var(names[next(static_cast<std::uint32_t>(maxvar))]);
    }
    if (r < 9) {
      std::string w;
      std::uint32_t len = next(3);
      for (std::uint32_t i = 0; i < len; ++i) w += next(2) ? '1' : '0';
      return str_lit(w);
    }
    static const char* nums[] = {"0", "1", "10", "101"};
    return num_lit(nums[next(4)]);
  }
  FormulaPtr atom(int maxvar) {
    switch (next(7)) {
      case 0:
        return f_prefix(term(maxvar), term(maxvar));
      case 1:
        return f_succp(term(maxvar), term(maxvar));
      case 2:
        return f_eqlen(term(maxvar), term(maxvar));
      case 3:
        return f_eq(term(maxvar), term(maxvar));
      case 4:
        return f_last(next(2) ? "1" : "0", term(maxvar));
      case 5:
        return f_add(term(maxvar), term(maxvar), term(maxvar));
      default:
        return next(2) ? f_true() : f_false();
    }
  }
  FormulaPtr gen(int depth, int maxvar, int qbudget) {
    if (depth == 0) return atom(maxvar);
    switch (next(qbudget > 0 ? 7 : 5)) {
      case 0:
        return atom(maxvar);
      case 1:
        return f_not(gen(depth - 1, maxvar, qbudget));
      case 2:
        return f_and(gen(depth - 1, maxvar, qbudget), gen(depth - 1, maxvar, qbudget));
      case 3:
        return f_or(gen(depth - 1, maxvar, qbudget), gen(depth - 1, maxvar, qbudget));
      case 4:
        return f_implies(gen(depth - 1, maxvar, qbudget), gen(depth - 1, maxvar, qbudget));
      default: {
        static const char* names[] = {"x", "y", "z"};
        std::string v = names[next(3)];
        FormulaPtr body = gen(depth - 1, maxvar, qbudget - 1);
        return next(2) ? f_exists({v}, body) : f_forall({v}, body);
      }
    }
  }
};

} // namespace

TEST_CASE("soundness fuzz: compiled automata match brute-force evaluation") {
  // The acceptance suite runs the full 200-formula version; this keeps the
  // unit run quick.
  const int kFormulas = 60;
  Environment env(bin());
  tarski::Universe uni(6); // assignments <= 4, quantifier depth <= 2
  tarski::Evaluator oracle(uni);
  auto small = words_upto(4);
  FuzzGen g{20240817};
  int checked = 0;
  for (int i = 0; i < kFormulas; ++i) {
    FormulaPtr f = g.gen(3, 3, 2);
    Compiler comp(env);
    CompiledRelation c = comp.compile(f);
    tarski::Table t = oracle.eval(f);
    const auto& vars = f->free_vars();
    REQUIRE(t.vars == vars);
    // compare on every assignment of words of length <= 4
    std::vector<std::size_t> idx(vars.size(), 0);
    std::size_t total = 1;
    for (std::size_t v = 0; v < vars.size(); ++v) total *= small.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      std::vector<std::string> assignment(vars.size());
      for (std::size_t v = vars.size(); v-- > 0;) {
        assignment[v] = small[rest % small.size()];
        rest /= small.size();
      }
      std::size_t oflat = 0;
      for (std::size_t v = 0; v < vars.size(); ++v)
        oflat = oflat * uni.words.size() +
                static_cast<std::size_t>(uni.index(assignment[v]));
      bool expect = t.sat[oflat] != 0;
      bool got = rel_member(c, assignment, env.base());
      if (expect != got) {
        CAPTURE(f->to_string());
        CAPTURE(assignment);
        REQUIRE(expect == got);
      }
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("ws1s export matches the committed goldens") {
  Environment env(bin());
  auto golden = [&](const std::string& name) {
    std::ifstream in(std::string(PROBISIM_SOURCE_DIR) + "/tests/golden/" + name);
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return text;
  };
  CHECK(export_ws1s(parse_formula("x <=p y"), env) == golden("ws1s_prefix.txt"));
  CHECK(export_ws1s(parse_formula("eqlen(x, y)"), env) == golden("ws1s_eqlen.txt"));
  CHECK(export_ws1s(parse_formula("last_1(x)"), env) == golden("ws1s_last1.txt"));

  CHECK_THROWS_AS((void)export_ws1s(parse_formula("x in lang(numerals)"), env), Error);
  Environment big(Alphabet({"a", "b", "c"}));
  CHECK_THROWS_AS((void)export_ws1s(parse_formula("x = y"), big), Error);
}
