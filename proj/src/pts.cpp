#include "probisim/pts.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <sstream>

#include "json.hpp"

namespace probisim::pts {

using automata::ConvWord;
using automata::TapedAlphabet;
using logic::Compiler;
using logic::CompilerOptions;
using logic::Environment;
using logic::f_and;
using logic::f_eq;
using logic::f_eqlen;
using logic::f_exists;
using logic::f_not;
using logic::f_or;
using logic::f_rel_app;
using logic::f_in_lang;
using logic::f_add;
using logic::FormulaPtr;
using logic::num_lit;
using logic::Term;
using logic::var;

// --- FinitePts ----------------------------------------------------------------

int FinitePts::index_of(const Word& w) const {
  auto it = std::lower_bound(configs.begin(), configs.end(), w);
  if (it == configs.end() || *it != w) return -1;
  return static_cast<int>(it - configs.begin());
}

bool FinitePts::dead(int state) const {
  for (const auto& action_rows : rows)
    if (!action_rows[static_cast<std::size_t>(state)].empty()) return false;
  return true;
}

std::vector<int> FinitePts::available_actions(int state) const {
  std::vector<int> out;
  for (std::size_t a = 0; a < rows.size(); ++a)
    if (!rows[a][static_cast<std::size_t>(state)].empty()) out.push_back(static_cast<int>(a));
  return out;
}

// --- validation ---------------------------------------------------------------

namespace {

std::string surface_numeral(std::uint64_t v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.insert(s.begin(), static_cast<char>('0' + (v & 1)));
    v >>= 1;
  }
  return s;
}

std::vector<std::string> decode_witness(const RelationAutomaton& aut, const ConvWord& w) {
  std::vector<std::string> out;
  auto words = automata::deconvolve(aut.taped_alphabet(), w);
  for (const Word& word : words)
    out.push_back(aut.taped_alphabet().base().format_word(word));
  return out;
}

// delta_a(x,u) has a nonzero weight
FormulaPtr nz(const std::string& d, const std::string& x, const std::string& u) {
  return f_exists({"zv"}, f_and(f_rel_app(d, {var(x), var(u), var("zv")}),
                                f_not(f_eq(var("zv"), num_lit("0")))));
}

FormulaPtr all_distinct(const std::vector<std::string>& vs) {
  std::vector<FormulaPtr> cs;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j)
      cs.push_back(f_not(f_eq(var(vs[i]), var(vs[j]))));
  return f_and(std::move(cs));
}

// x has at least k distinct nonzero successors.
FormulaPtr at_least_successors(const std::string& d, const std::string& x, int k) {
  std::vector<std::string> qs;
  for (int i = 0; i < k; ++i) qs.push_back("q" + std::to_string(i + 1));
  std::vector<FormulaPtr> cs;
  for (const std::string& q : qs) cs.push_back(nz(d, x, q));
  cs.push_back(all_distinct(qs));
  return f_exists(std::move(qs), f_and(std::move(cs)));
}

// Exactly the listed configurations are the nonzero successors of x. The
// completeness half is a one-word property ("at most n successors"), which
// keeps the complement narrow.
FormulaPtr exact_successors(const std::string& d, const std::string& x,
                            const std::vector<std::string>& us) {
  std::vector<FormulaPtr> cs;
  for (const std::string& u : us) cs.push_back(nz(d, x, u));
  cs.push_back(all_distinct(us));
  cs.push_back(f_not(at_least_successors(d, x, static_cast<int>(us.size()) + 1)));
  return f_and(std::move(cs));
}

// Out-weight sum as a chain of links; each link hides its weight variable
// behind its own quantifier so it compiles small before the links join.
void weight_chain_parts(const std::string& d, const std::string& x,
                        const std::vector<std::string>& us, const Term& total,
                        std::vector<std::string>& vars, std::vector<FormulaPtr>& cs) {
  if (us.empty()) {
    cs.push_back(f_eq(total, num_lit("0")));
    return;
  }
  if (us.size() == 1) {
    cs.push_back(f_rel_app(d, {var(x), var(us[0]), total}));
    return;
  }
  std::string prev = "cz1";
  vars.push_back(prev);
  cs.push_back(f_rel_app(d, {var(x), var(us[0]), var(prev)}));
  for (std::size_t j = 1; j < us.size(); ++j) {
    bool last = j + 1 == us.size();
    Term out = last ? total : var("cz" + std::to_string(j + 1));
    if (!last) vars.push_back(out.text);
    std::string wj = "cw" + std::to_string(j);
    cs.push_back(f_exists({wj}, f_and(f_rel_app(d, {var(x), var(us[j]), var(wj)}),
                                      f_add(var(prev), var(wj), out))));
    if (!last) prev = out.text;
  }
}

} // namespace

ValidationReport validate(const RegularPresentation& p, const CompilerOptions& opts) {
  ValidationReport rep;
  rep.checked_bound = p.bound;
  Environment env(p.base);
  env.bind("S", p.domain);
  Compiler comp(env, opts);

  auto fails_with = [&](const FormulaPtr& violation, const std::string& action,
                        const std::string& reason) -> bool {
    logic::CompiledRelation c = comp.compile(violation);
    if (c.is_constant()) {
      if (!*c.constant) return false;
      rep.valid = false;
      rep.reason = reason;
      rep.action = action;
      return true;
    }
    auto w = automata::shortest_member(c.automaton);
    if (!w) return false;
    rep.valid = false;
    rep.reason = reason;
    rep.action = action;
    rep.witness = decode_witness(c.automaton, *w);
    return true;
  };

  std::string wlit = surface_numeral(p.weight);
  for (const std::string& a : p.actions) {
    comp.bind("D", p.delta.at(a));
    // (1) support: delta stays inside S x S x numerals
    FormulaPtr d_xyz = f_rel_app("D", {var("x"), var("y"), var("z")});
    FormulaPtr bad_support = f_and(
        d_xyz, f_not(f_and({f_rel_app("S", {var("x")}), f_rel_app("S", {var("y")}),
                            f_in_lang(var("z"), "numerals")})));
    if (fails_with(bad_support, a, "relation leaves S x S x numerals")) return rep;
    // (2) totality over S x S
    FormulaPtr bad_total =
        f_and({f_rel_app("S", {var("x")}), f_rel_app("S", {var("y")}),
               f_not(f_exists({"z"}, d_xyz))});
    if (fails_with(bad_total, a, "weight function not total on S x S")) return rep;
    // (3) functionality
    FormulaPtr bad_fun = f_and({d_xyz, f_rel_app("D", {var("x"), var("y"), var("z2")}),
                                f_not(f_eq(var("z"), var("z2")))});
    if (fails_with(bad_fun, a, "weight function not single-valued")) return rep;
    // (4) branching bound: no N+1 distinct nonzero successors
    {
      FormulaPtr bad = f_and(f_rel_app("S", {var("x")}),
                             at_least_successors("D", "x", p.bound + 1));
      if (fails_with(bad, a, "more than " + std::to_string(p.bound) + " successors"))
        return rep;
    }
    // (5) live out-weights sum to the declared weight
    {
      std::vector<FormulaPtr> sums;
      for (int n = 1; n <= p.bound; ++n) {
        std::vector<std::string> us;
        for (int i = 0; i < n; ++i) us.push_back("u" + std::to_string(i + 1));
        std::vector<std::string> vars = us;
        std::vector<FormulaPtr> cs{exact_successors("D", "x", us)};
        weight_chain_parts("D", "x", us, num_lit(wlit), vars, cs);
        sums.push_back(f_exists(std::move(vars), f_and(std::move(cs))));
      }
      FormulaPtr live = f_exists({"uu"}, nz("D", "x", "uu"));
      FormulaPtr bad_sum =
          f_and({f_rel_app("S", {var("x")}), live, f_not(f_or(std::move(sums)))});
      if (fails_with(bad_sum, a, "live out-weights do not sum to the declared weight"))
        return rep;
    }
    // (6) length preservation
    if (p.length_preserving) {
      FormulaPtr bad_len = f_and({d_xyz, f_not(f_eq(var("z"), num_lit("0"))),
                                  f_not(f_eqlen(var("x"), var("y")))});
      if (fails_with(bad_len, a, "nonzero transition changes the length")) return rep;
      rep.length_preserving_checked = true;
    }
    // inferred live weight: decode one live state's out-weights
    {
      FormulaPtr live_x = f_and(f_rel_app("S", {var("x")}),
                                f_exists({"uu"}, nz("D", "x", "uu")));
      logic::CompiledRelation c = comp.compile(live_x);
      if (!c.is_constant()) {
        if (auto w = automata::shortest_member(c.automaton)) {
          Word x = automata::deconvolve(c.automaton.taped_alphabet(), *w)[0];
          // restrict delta to this x and read off the nonzero successors
          TapedAlphabet t3(p.base, 3);
          TapedAlphabet t1(p.base, 1);
          RelationAutomaton spell = automata::cylindrify(
              RelationAutomaton::single_word(t1, automata::convolve(t1, std::vector<Word>{x})),
              {0}, t3, opts.budget);
          RelationAutomaton not_zero = automata::complement(RelationAutomaton::single_word(
              t1, automata::convolve(t1, std::vector<Word>{logic::numeral_word(0, p.base)})));
          RelationAutomaton nzrow = automata::intersect_aligned(
              automata::intersect(p.delta.at(a), spell), {0, 1, 2}, not_zero, {2}, t3);
          RelationAutomaton restricted = automata::project_tape(nzrow, 0);
          std::uint64_t total = 0;
          int seen = 0;
          automata::enumerate_language(
              restricted, x.size() + surface_numeral(p.weight).size() + 4,
              [&](const ConvWord& cw) {
                auto words = automata::deconvolve(restricted.taped_alphabet(), cw);
                if (auto v = logic::numeral_value(words[1], p.base)) total += *v;
                return ++seen < 64;
              });
          rep.live_weight[a] = total;
        }
      }
    }
  }
  return rep;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  if (valid) {
    out << "valid";
    for (auto& [a, w] : live_weight) out << "\n  action " << a << ": live weight sum " << w;
    out << "\n  bound checked: " << checked_bound;
    if (length_preserving_checked) out << "\n  length-preserving: yes";
  } else {
    out << "invalid: " << reason;
    if (!action.empty()) out << " (action " << action << ")";
    for (const std::string& w : witness) out << "\n  witness: \"" << w << "\"";
  }
  return out.str();
}

std::string ValidationReport::to_json() const {
  nlohmann::json j;
  j["valid"] = valid;
  if (!valid) {
    j["reason"] = reason;
    j["action"] = action;
    j["witness"] = witness;
  } else {
    j["live_weight"] = live_weight;
    j["checked_bound"] = checked_bound;
  }
  return j.dump(2);
}

// --- slice ---------------------------------------------------------------------

FinitePts slice(const RegularPresentation& p, std::size_t n, const SliceOptions& so) {
  if (!p.length_preserving)
    fail(ErrorCode::NotLengthPreserving,
         "slice: presentation is not length-preserving");
  FinitePts f;
  f.base = p.base;
  f.weight = p.weight;
  f.actions = p.actions;
  TapedAlphabet t1(p.base, 1);
  automata::enumerate_language(p.domain, n, [&](const ConvWord& w) {
    if (w.size() == n) {
      f.configs.push_back(automata::deconvolve(t1, w)[0]);
      if (f.configs.size() > so.max_configs)
        fail(ErrorCode::SliceBudget, "slice exceeds the configuration cap");
    }
    return true;
  });
  // enumerate_language is lексicographic within a length, so configs are
  // already in lex order.
  std::size_t zmax = surface_numeral(p.weight).size() + 1;
  RelationAutomaton not_zero = automata::complement(automata::RelationAutomaton::single_word(
      t1, automata::convolve(t1, std::vector<Word>{logic::numeral_word(0, p.base)})));
  for (const std::string& a : p.actions) {
    std::vector<std::vector<std::pair<int, std::uint64_t>>> row(f.configs.size());
    TapedAlphabet t3(p.base, 3);
    RelationAutomaton nzgraph =
        automata::intersect_aligned(p.delta.at(a), {0, 1, 2}, not_zero, {2}, t3);
    automata::enumerate_language(nzgraph, std::max(n, zmax), [&](const ConvWord& cw) {
      auto words = automata::deconvolve(t3, cw);
      if (words[0].size() != n || words[1].size() != n) return true;
      int from = f.index_of(words[0]);
      int to = f.index_of(words[1]);
      if (from < 0 || to < 0) return true; // outside the domain slice
      auto v = logic::numeral_value(words[2], p.base);
      if (v && *v > 0) row[static_cast<std::size_t>(from)].emplace_back(to, *v);
      return true;
    });
    for (auto& r : row) std::sort(r.begin(), r.end());
    f.rows.push_back(std::move(row));
  }
  return f;
}

// --- disjoint union -------------------------------------------------------------

RegularPresentation disjoint_union(const RegularPresentation& p,
                                   const RegularPresentation& q) {
  if (p.base != q.base)
    fail(ErrorCode::AlphabetMismatch, "disjoint_union: different base alphabets");
  if (p.weight != q.weight)
    fail(ErrorCode::WeightMismatch,
         "disjoint_union: weights differ (" + std::to_string(p.weight) + " vs " +
             std::to_string(q.weight) + "); rescale first");
  RelationAutomaton overlap = automata::intersect(p.domain, q.domain);
  if (auto w = automata::shortest_member(overlap)) {
    auto words = automata::deconvolve(overlap.taped_alphabet(), *w);
    fail(ErrorCode::DomainsOverlap,
         "disjoint_union: domains overlap at \"" + p.base.format_word(words[0]) + "\"");
  }

  RegularPresentation u;
  u.name = p.name + "+" + q.name;
  u.base = p.base;
  u.weight = p.weight;
  u.bound = std::max(p.bound, q.bound);
  u.length_preserving = p.length_preserving && q.length_preserving;
  u.domain = automata::determinize_minimize(automata::unite(p.domain, q.domain));
  u.actions = p.actions;
  for (const std::string& a : q.actions)
    if (std::find(u.actions.begin(), u.actions.end(), a) == u.actions.end())
      u.actions.push_back(a);

  Environment env(p.base);
  env.bind("Sp", p.domain);
  env.bind("Sq", q.domain);
  env.bind("S", u.domain);
  Compiler comp(env, {});
  for (const std::string& a : u.actions) {
    bool in_p = p.delta.count(a) > 0, in_q = q.delta.count(a) > 0;
    TapedAlphabet t3(p.base, 3);
    comp.bind("Dp", in_p ? p.delta.at(a) : RelationAutomaton::empty(t3));
    comp.bind("Dq", in_q ? q.delta.at(a) : RelationAutomaton::empty(t3));
    FormulaPtr zero = f_eq(var("z"), num_lit("0"));
    FormulaPtr both_p = f_and(f_rel_app("Sp", {var("x")}), f_rel_app("Sp", {var("y")}));
    FormulaPtr both_q = f_and(f_rel_app("Sq", {var("x")}), f_rel_app("Sq", {var("y")}));
    FormulaPtr fa = f_or(
        {f_and(both_p, in_p ? f_rel_app("Dp", {var("x"), var("y"), var("z")})
                            : zero),
         f_and(both_q, in_q ? f_rel_app("Dq", {var("x"), var("y"), var("z")})
                            : zero),
         f_and({f_rel_app("S", {var("x")}), f_rel_app("S", {var("y")}),
                f_not(both_p), f_not(both_q), zero})});
    logic::CompiledRelation c = comp.compile(fa);
    // reorder to (x, y, z)
    RelationAutomaton aut = c.automaton;
    u.delta.emplace(a, automata::trim(aut));
  }
  u.env = std::make_shared<Environment>(p.base);
  auto merge_env = [&](const std::shared_ptr<Environment>& src) {
    if (!src) return;
    for (auto& [name, aut] : src->bindings())
      if (name != "numerals" && !u.env->has(name)) u.env->bind(name, aut);
  };
  merge_env(p.env);
  merge_env(q.env);
  u.env->bind("domain", u.domain);
  for (auto& [a, d] : u.delta) u.env->bind("act_" + a, d);
  return u;
}

// --- trace distributions ---------------------------------------------------------

TraceDistribution trace_distribution(const FinitePts& f, const Word& start,
                                     std::size_t depth) {
  int s0 = f.index_of(start);
  if (s0 < 0) fail(ErrorCode::StartUnknown, "trace_distribution: unknown start config");
  TraceDistribution out;
  out.unterminated = Rational(0);
  std::map<std::pair<std::vector<int>, int>, Rational> level;
  level[{{}, s0}] = Rational(1);
  for (std::size_t d = 0; d < depth && !level.empty(); ++d) {
    std::map<std::pair<std::vector<int>, int>, Rational> next;
    for (auto& [key, prob] : level) {
      const auto& [trace, state] = key;
      std::vector<int> avail = f.available_actions(state);
      if (avail.empty()) {
        auto [it, fresh] = out.traces.emplace(trace, prob);
        if (!fresh) it->second = it->second + prob;
        continue;
      }
      Rational pick = Rational(1, static_cast<long long>(avail.size()));
      for (int a : avail) {
        std::vector<int> t2 = trace;
        t2.push_back(a);
        for (auto& [to, wgt] : f.rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(state)]) {
          Rational pr = prob * pick *
                        Rational(static_cast<long long>(wgt),
                                 static_cast<long long>(f.weight));
          auto [it, fresh] = next.emplace(std::make_pair(t2, to), pr);
          if (!fresh) it->second = it->second + pr;
        }
      }
    }
    level = std::move(next);
  }
  for (auto& [key, prob] : level) {
    const auto& [trace, state] = key;
    if (f.available_actions(state).empty()) {
      auto [it, fresh] = out.traces.emplace(trace, prob);
      if (!fresh) it->second = it->second + prob;
    } else {
      out.unterminated = out.unterminated + prob;
    }
  }
  return out;
}

Rational total_variation(const TraceDistribution& a, const TraceDistribution& b) {
  Rational sum(0);
  auto ia = a.traces.begin();
  auto ib = b.traces.begin();
  while (ia != a.traces.end() || ib != b.traces.end()) {
    if (ib == b.traces.end() || (ia != a.traces.end() && ia->first < ib->first)) {
      sum = sum + ia->second.abs();
      ++ia;
    } else if (ia == a.traces.end() || ib->first < ia->first) {
      sum = sum + ib->second.abs();
      ++ib;
    } else {
      sum = sum + (ia->second - ib->second).abs();
      ++ia;
      ++ib;
    }
  }
  return sum * Rational(1, 2);
}

// --- model files ------------------------------------------------------------------

namespace {

struct BlockParser {
  const std::string& text;
  std::size_t i = 0;

  explicit BlockParser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (i < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) {
        ++i;
      } else if (text[i] == '#') {
        while (i < text.size() && text[i] != '\n') ++i;
      } else {
        break;
      }
    }
  }
  bool eat(const std::string& tok) {
    skip_ws();
    if (text.compare(i, tok.size(), tok) == 0) {
      i += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok) {
    if (!eat(tok))
      fail(ErrorCode::SyntaxError, "model file: expected '" + tok + "' at offset " +
                                       std::to_string(i));
  }
  std::string ident() {
    skip_ws();
    std::size_t j = i;
    while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                               text[j] == '_' || text[j] == '\''))
      ++j;
    if (j == i)
      fail(ErrorCode::SyntaxError, "model file: expected identifier at offset " +
                                       std::to_string(i));
    std::string s = text.substr(i, j - i);
    i = j;
    return s;
  }
  // everything up to the next top-level ';' (strings respected)
  std::string until_semicolon() {
    skip_ws();
    std::size_t start = i;
    bool in_str = false;
    while (i < text.size()) {
      char c = text[i];
      if (in_str) {
        if (c == '"') in_str = false;
      } else if (c == '"') {
        in_str = true;
      } else if (c == ';') {
        break;
      }
      ++i;
    }
    if (i >= text.size())
      fail(ErrorCode::SyntaxError, "model file: missing ';' after offset " +
                                       std::to_string(start));
    std::string s = text.substr(start, i - start);
    ++i; // the ';'
    return s;
  }
};

// Compile a declaration formula and shape it to the given parameter list.
RelationAutomaton compile_params(Compiler& comp, const FormulaPtr& f,
                                 const std::vector<std::string>& params,
                                 const std::string& what) {
  for (const std::string& v : f->free_vars())
    if (std::find(params.begin(), params.end(), v) == params.end())
      fail(ErrorCode::UnboundName,
           what + ": free variable '" + v + "' is not a parameter");
  logic::CompiledRelation c = comp.compile(f);
  TapedAlphabet ta(comp.env().base(), static_cast<int>(params.size()));
  if (c.is_constant()) {
    return *c.constant ? RelationAutomaton::universe(ta) : RelationAutomaton::empty(ta);
  }
  if (c.free_vars == params) return c.automaton;
  std::vector<int> map;
  for (const std::string& v : c.free_vars) {
    auto it = std::find(params.begin(), params.end(), v);
    map.push_back(static_cast<int>(it - params.begin()));
  }
  return automata::cylindrify(c.automaton, map, ta, comp.options().budget);
}

} // namespace

RegularPresentation parse_model(const std::string& text, const CompilerOptions& opts) {
  BlockParser bp(text);
  bp.expect("model");
  RegularPresentation p;
  p.name = bp.ident();
  bp.expect("{");

  std::optional<Compiler> comp;
  bool have_domain = false;
  std::vector<std::pair<std::string, RelationAutomaton>> decls;

  while (true) {
    bp.skip_ws();
    if (bp.eat("}")) break;
    std::string kw = bp.ident();
    if (kw == "alphabet") {
      bp.expect("=");
      bp.expect("[");
      std::vector<std::string> syms;
      while (true) {
        syms.push_back(bp.ident());
        if (bp.eat(",")) continue;
        break;
      }
      bp.expect("]");
      bp.expect(";");
      p.base = Alphabet(std::move(syms));
      comp.emplace(Environment(p.base), opts);
    } else if (kw == "weight") {
      bp.expect("=");
      std::string digits;
      bp.skip_ws();
      while (bp.i < text.size() && (text[bp.i] == '0' || text[bp.i] == '1'))
        digits.push_back(text[bp.i++]);
      bp.expect(";");
      if (digits.empty()) fail(ErrorCode::SyntaxError, "model: bad weight numeral");
      p.weight = 0;
      for (char c : digits) p.weight = (p.weight << 1) | (c == '1' ? 1u : 0u);
    } else if (kw == "bound") {
      bp.expect("=");
      bp.skip_ws();
      std::size_t j = bp.i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      p.bound = std::stoi(text.substr(bp.i, j - bp.i));
      bp.i = j;
      bp.expect(";");
    } else if (kw == "length_preserving") {
      bp.expect("=");
      if (bp.eat("true"))
        p.length_preserving = true;
      else if (bp.eat("false"))
        p.length_preserving = false;
      else
        fail(ErrorCode::SyntaxError, "model: length_preserving needs true/false");
      bp.expect(";");
    } else if (kw == "lang" || kw == "rel") {
      if (!comp) fail(ErrorCode::SyntaxError, "model: declare the alphabet first");
      std::string name = bp.ident();
      std::vector<std::string> params;
      if (kw == "rel") {
        bp.expect("(");
        while (true) {
          params.push_back(bp.ident());
          if (bp.eat(",")) continue;
          break;
        }
        bp.expect(")");
      } else {
        params = {"x"};
      }
      bp.expect("=");
      FormulaPtr f = logic::parse_formula(bp.until_semicolon());
      if (kw == "lang" && f->free_vars().size() == 1) params = {f->free_vars()[0]};
      if (std::getenv("PROBISIM_TRACE")) {
        fprintf(stderr, "[model] compiling %s %s\n", kw.c_str(), name.c_str());
      }
      RelationAutomaton aut = compile_params(*comp, f, params, kw + " " + name);
      if (std::getenv("PROBISIM_TRACE"))
        fprintf(stderr, "[model]   -> states=%u trans=%zu\n", aut.num_states(),
                aut.transition_count());
      comp->bind(name, aut);
      decls.emplace_back(name, std::move(aut));
    } else if (kw == "domain") {
      if (!comp) fail(ErrorCode::SyntaxError, "model: declare the alphabet first");
      bp.expect("=");
      FormulaPtr f = logic::parse_formula(bp.until_semicolon());
      std::vector<std::string> fv = f->free_vars();
      if (fv.size() != 1)
        fail(ErrorCode::SyntaxError, "model: domain needs exactly one free variable");
      p.domain = automata::trim(compile_params(*comp, f, fv, "domain"));
      comp->bind("domain", p.domain);
      have_domain = true;
    } else if (kw == "action") {
      if (!comp) fail(ErrorCode::SyntaxError, "model: declare the alphabet first");
      std::string name = bp.ident();
      bp.expect("=");
      FormulaPtr f = logic::parse_formula(bp.until_semicolon());
      if (std::getenv("PROBISIM_TRACE"))
        fprintf(stderr, "[model] compiling action %s\n", name.c_str());
      RelationAutomaton d = compile_params(*comp, f, {"x", "y", "z"}, "action " + name);
      p.actions.push_back(name);
      p.delta.emplace(name, automata::trim(d));
    } else {
      fail(ErrorCode::SyntaxError, "model: unknown declaration '" + kw + "'");
    }
  }
  if (!comp) fail(ErrorCode::SyntaxError, "model: missing alphabet");
  if (!have_domain) fail(ErrorCode::SyntaxError, "model: missing domain");
  if (p.actions.empty()) fail(ErrorCode::SyntaxError, "model: no actions");
  p.env = std::make_shared<Environment>(p.base);
  for (auto& [name, aut] : decls) p.env->bind(name, aut);
  p.env->bind("domain", p.domain);
  for (auto& [a, d] : p.delta) p.env->bind("act_" + a, d);
  return p;
}

RelationAutomaton parse_relation_file(const std::string& text,
                                      const RegularPresentation& model, int tapes,
                                      const CompilerOptions& opts) {
  BlockParser bp(text);
  bp.expect("relation");
  bp.expect("{");
  Compiler comp(model.env ? *model.env : Environment(model.base), opts);
  std::optional<FormulaPtr> main;
  while (true) {
    bp.skip_ws();
    if (bp.eat("}")) break;
    std::string kw = bp.ident();
    if (kw == "lang" || kw == "rel") {
      std::string name = bp.ident();
      std::vector<std::string> params;
      if (kw == "rel") {
        bp.expect("(");
        while (true) {
          params.push_back(bp.ident());
          if (bp.eat(",")) continue;
          break;
        }
        bp.expect(")");
      }
      bp.expect("=");
      FormulaPtr f = logic::parse_formula(bp.until_semicolon());
      if (kw == "lang") params = f->free_vars();
      comp.bind(name, compile_params(comp, f, params, kw + " " + name));
    } else if (kw == "formula") {
      bp.expect("=");
      main = logic::parse_formula(bp.until_semicolon());
    } else {
      fail(ErrorCode::SyntaxError, "relation file: unknown declaration '" + kw + "'");
    }
  }
  if (!main) fail(ErrorCode::SyntaxError, "relation file: missing formula");
  std::vector<std::string> params;
  if (tapes == 1)
    params = {"x"};
  else if (tapes == 2)
    params = {"x", "y"};
  else
    fail(ErrorCode::BadInput, "relation file: unsupported arity");
  return automata::trim(compile_params(comp, *main, params, "formula"));
}

} // namespace probisim::pts
