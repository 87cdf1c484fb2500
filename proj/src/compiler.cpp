#include "probisim/compiler.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <cstdio>

namespace probisim::logic {

using automata::ConvWord;
using automata::State;
using automata::Symbol;
using automata::Transition;

Environment::Environment(Alphabet base) : base_(std::move(base)) {
  if (base_.contains("0") && base_.contains("1"))
    bindings_.emplace("numerals", builtin_numeral_domain(base_));
}

void Environment::bind(const std::string& name, RelationAutomaton a) {
  if (a.taped_alphabet().base() != base_)
    fail(ErrorCode::AlphabetMismatch, "binding '" + name + "' uses a different alphabet");
  bindings_.insert_or_assign(name, std::move(a));
}

const RelationAutomaton& Environment::lookup(const std::string& name) const {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) fail(ErrorCode::UnboundName, "unbound name: " + name);
  return it->second;
}

// --- builtins ----------------------------------------------------------------

RelationAutomaton builtin_prefix(const Alphabet& base) {
  TapedAlphabet t2(base, 2);
  std::vector<Transition> trans;
  for (int a = 0; a < base.size(); ++a) {
    trans.push_back({0, t2.encode(std::vector<int>{a, a}), 0});
    trans.push_back({0, t2.encode(std::vector<int>{t2.pad(), a}), 1});
    trans.push_back({1, t2.encode(std::vector<int>{t2.pad(), a}), 1});
  }
  return RelationAutomaton::make_sparse(t2, 2, {0}, {true, true}, std::move(trans));
}

RelationAutomaton builtin_succ_prefix(const Alphabet& base) {
  TapedAlphabet t2(base, 2);
  std::vector<Transition> trans;
  for (int a = 0; a < base.size(); ++a) {
    trans.push_back({0, t2.encode(std::vector<int>{a, a}), 0});
    trans.push_back({0, t2.encode(std::vector<int>{t2.pad(), a}), 1});
  }
  return RelationAutomaton::make_sparse(t2, 2, {0}, {false, true}, std::move(trans));
}

RelationAutomaton builtin_eqlen(const Alphabet& base) {
  TapedAlphabet t2(base, 2);
  std::vector<Transition> trans;
  for (int a = 0; a < base.size(); ++a)
    for (int b = 0; b < base.size(); ++b)
      trans.push_back({0, t2.encode(std::vector<int>{a, b}), 0});
  return RelationAutomaton::make_sparse(t2, 1, {0}, {true}, std::move(trans));
}

RelationAutomaton builtin_eq(const Alphabet& base) {
  TapedAlphabet t2(base, 2);
  std::vector<Transition> trans;
  for (int a = 0; a < base.size(); ++a)
    trans.push_back({0, t2.encode(std::vector<int>{a, a}), 0});
  return RelationAutomaton::make_sparse(t2, 1, {0}, {true}, std::move(trans));
}

RelationAutomaton builtin_last(const Alphabet& base, int symbol) {
  TapedAlphabet t1(base, 1);
  std::vector<Transition> trans;
  for (int a = 0; a < base.size(); ++a) {
    trans.push_back({0, t1.encode(std::vector<int>{a}), 0});
    if (a == symbol) trans.push_back({0, t1.encode(std::vector<int>{a}), 1});
  }
  return RelationAutomaton::make_sparse(t1, 2, {0}, {false, true}, std::move(trans));
}

RelationAutomaton builtin_numeral_domain(const Alphabet& base) {
  int d0 = base.index_of("0"), d1 = base.index_of("1");
  if (d0 < 0 || d1 < 0)
    fail(ErrorCode::MissingDigits, "numerals need digits 0 and 1 in the alphabet");
  TapedAlphabet t1(base, 1);
  // Internal numerals are least-significant-bit first: "0" or anything
  // ending in 1. States: A start, Z just "0", C last digit 0, B last digit 1.
  enum { A = 0, Z = 1, C = 2, B = 3 };
  Symbol s0 = t1.encode(std::vector<int>{d0});
  Symbol s1 = t1.encode(std::vector<int>{d1});
  std::vector<Transition> trans{{A, s0, Z}, {A, s1, B}, {Z, s0, C}, {Z, s1, B},
                                {C, s0, C}, {C, s1, B}, {B, s0, C}, {B, s1, B}};
  return RelationAutomaton::make_sparse(t1, 4, {A}, {false, true, false, true},
                                        std::move(trans));
}

RelationAutomaton builtin_add(const Alphabet& base) {
  int d0 = base.index_of("0"), d1 = base.index_of("1");
  if (d0 < 0 || d1 < 0)
    fail(ErrorCode::MissingDigits, "add needs digits 0 and 1 in the alphabet");
  TapedAlphabet t3(base, 3);
  int P = t3.pad();
  // Carry machine on (x, z, y) read least-significant-bit first; pads count
  // as zero digits, and y may not pad while a nonzero bit is pending.
  std::vector<Transition> trans;
  for (int carry = 0; carry <= 1; ++carry)
    for (int xa : {d0, d1, P})
      for (int zb : {d0, d1, P})
        for (int yc : {d0, d1, P}) {
          if (xa == P && zb == P && yc == P) continue;
          int s = (xa == d1) + (zb == d1) + carry;
          int bit = s & 1, carry2 = s >> 1;
          if (yc == P && bit == 1) continue;
          if (yc != P && (yc == d1) != (bit == 1)) continue;
          trans.push_back({static_cast<State>(carry),
                           t3.encode(std::vector<int>{xa, zb, yc}),
                           static_cast<State>(carry2)});
        }
  RelationAutomaton raw =
      RelationAutomaton::make_sparse(t3, 2, {0}, {true, false}, std::move(trans));
  RelationAutomaton canon = builtin_numeral_domain(base);
  RelationAutomaton out = raw;
  for (int tape = 0; tape < 3; ++tape)
    out = automata::intersect_aligned(out, {0, 1, 2}, canon, {tape}, t3);
  return automata::determinize_minimize(automata::normalize_validity(out));
}

RelationAutomaton builtin_relation(const std::string& name, const Alphabet& base) {
  if (name == "prefix") return builtin_prefix(base);
  if (name == "succp") return builtin_succ_prefix(base);
  if (name == "eqlen") return builtin_eqlen(base);
  if (name == "eq") return builtin_eq(base);
  if (name == "add") return builtin_add(base);
  if (name == "numerals") return builtin_numeral_domain(base);
  if (name.rfind("last_", 0) == 0) {
    int s = base.index_of(name.substr(5));
    if (s < 0) fail(ErrorCode::UnboundName, "unknown symbol in " + name);
    return builtin_last(base, s);
  }
  fail(ErrorCode::UnboundName, "unknown builtin: " + name);
}

// --- numerals ----------------------------------------------------------------

Word numeral_word(std::uint64_t value, const Alphabet& base) {
  int d0 = base.index_of("0"), d1 = base.index_of("1");
  if (d0 < 0 || d1 < 0) fail(ErrorCode::MissingDigits, "alphabet lacks digits");
  if (value == 0) return {d0};
  Word w;
  while (value) {
    w.push_back((value & 1) ? d1 : d0);
    value >>= 1;
  }
  return w;
}

std::optional<std::uint64_t> numeral_value(const Word& w, const Alphabet& base) {
  int d0 = base.index_of("0"), d1 = base.index_of("1");
  if (w.empty() || w.size() > 64) return std::nullopt;
  if (w.size() == 1 && w[0] == d0) return 0;
  if (w.back() != d1) return std::nullopt; // trailing zeros: not canonical
  std::uint64_t v = 0;
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] != d0 && w[i] != d1) return std::nullopt;
    v = (v << 1) | (w[i] == d1 ? 1u : 0u);
  }
  return v;
}

Word parse_surface_numeral(const std::string& digits, const Alphabet& base) {
  int d0 = base.index_of("0"), d1 = base.index_of("1");
  if (d0 < 0 || d1 < 0) fail(ErrorCode::MissingDigits, "alphabet lacks digits");
  if (digits.empty()) fail(ErrorCode::BadInput, "empty numeral");
  if (digits.size() > 1 && digits[0] == '0')
    fail(ErrorCode::BadInput, "numeral has a leading zero: " + digits);
  Word w;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (*it != '0' && *it != '1') fail(ErrorCode::BadInput, "numeral must be binary");
    w.push_back(*it == '1' ? d1 : d0);
  }
  return w;
}

// --- compiler ----------------------------------------------------------------

namespace {

// Permutes tapes of a sparse automaton: new_of[i] is the new position of
// tape i.
RelationAutomaton permute_tapes(const RelationAutomaton& a0, const std::vector<int>& new_of,
                                const Budget& bud) {
  RelationAutomaton a = automata::materialize(a0, bud);
  const TapedAlphabet& ta = a.taped_alphabet();
  bool identity = true;
  for (int i = 0; i < ta.tapes(); ++i)
    if (new_of[static_cast<std::size_t>(i)] != i) identity = false;
  if (identity) return a;
  std::vector<Transition> trans;
  trans.reserve(a.transitions().size());
  std::vector<int> comp(static_cast<std::size_t>(ta.tapes()));
  std::vector<int> comp2(static_cast<std::size_t>(ta.tapes()));
  for (const Transition& t : a.transitions()) {
    ta.decode(t.sym, comp);
    for (int i = 0; i < ta.tapes(); ++i)
      comp2[static_cast<std::size_t>(new_of[static_cast<std::size_t>(i)])] =
          comp[static_cast<std::size_t>(i)];
    trans.push_back({t.from, ta.encode(comp2), t.to});
  }
  return RelationAutomaton::make_sparse(ta, a.num_states(), a.initial_states(), a.finals(),
                                        std::move(trans));
}

std::vector<std::string> merge_vars(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  for (const std::string& v : b)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

std::vector<int> tape_map(const std::vector<std::string>& from,
                          const std::vector<std::string>& to) {
  std::vector<int> m;
  for (const std::string& v : from) {
    auto it = std::find(to.begin(), to.end(), v);
    assert(it != to.end());
    m.push_back(static_cast<int>(it - to.begin()));
  }
  return m;
}

} // namespace

Compiler::Compiler(Environment env, CompilerOptions opts)
    : env_(std::move(env)), opts_(opts) {}

void Compiler::bind(const std::string& name, RelationAutomaton a) {
  env_.bind(name, std::move(a));
  for (auto it = memo_.begin(); it != memo_.end();) {
    const auto& names = it->first->env_names();
    if (std::binary_search(names.begin(), names.end(), name)) {
      keepalive_.erase(it->first);
      it = memo_.erase(it);
    } else {
      ++it;
    }
  }
}

Compiler::CR Compiler::reduce(CR c) {
  if (c.constant) return c;
  if (c.aut.deterministic_complete()) return c;
  if (c.aut.tapes() <= opts_.minimize_tapes && c.aut.num_states() <= opts_.minimize_states) {
    try {
      Budget local{opts_.minimize_states * 40 + 4096, 8'000'000};
      CR out = c;
      out.aut = automata::determinize_minimize(c.aut, local);
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ResourceExceeded) throw;
    }
  }
  return c;
}

Compiler::CR Compiler::join(CR a, CR b) {
  if (a.constant) return *a.constant ? std::move(b) : std::move(a);
  if (b.constant) return *b.constant ? std::move(a) : std::move(b);
  std::vector<std::string> vars = merge_vars(a.vars, b.vars);
  TapedAlphabet ta(env_.base(), static_cast<int>(vars.size()));
  CR out;
  out.vars = vars;
  out.aut = automata::intersect_aligned(a.aut, tape_map(a.vars, vars), b.aut,
                                        tape_map(b.vars, vars), ta, opts_.budget);
  return out;
}

Compiler::CR Compiler::disjoin(std::vector<CR> xs) {
  std::vector<CR> live;
  for (CR& c : xs) {
    if (c.constant) {
      if (*c.constant) return c; // true absorbs
      continue;
    }
    live.push_back(std::move(c));
  }
  if (live.empty()) {
    CR f;
    f.constant = false;
    return f;
  }
  std::vector<std::string> vars;
  for (const CR& c : live) vars = merge_vars(vars, c.vars);
  TapedAlphabet ta(env_.base(), static_cast<int>(vars.size()));
  CR out;
  out.vars = vars;
  bool first = true;
  for (CR& c : live) {
    RelationAutomaton lifted =
        c.vars == vars
            ? std::move(c.aut)
            : automata::cylindrify(c.aut, tape_map(c.vars, vars), ta, opts_.budget);
    if (first) {
      out.aut = std::move(lifted);
      first = false;
    } else {
      out.aut = automata::unite(out.aut, lifted, opts_.budget);
    }
  }
  return reduce(std::move(out));
}

Compiler::CR Compiler::negate(CR c) {
  if (c.constant) {
    c.constant = !*c.constant;
    return c;
  }
  c.aut = automata::complement(c.aut, opts_.budget);
  return c;
}

Compiler::CR Compiler::project_out(CR c, const std::vector<std::string>& vars) {
  if (c.constant) return c;
  std::vector<std::string> doomed;
  for (const std::string& v : vars)
    if (std::find(c.vars.begin(), c.vars.end(), v) != c.vars.end()) doomed.push_back(v);
  if (doomed.empty()) return c;
  if (doomed.size() == c.vars.size()) {
    CR out;
    out.constant = !automata::is_empty(c.aut);
    return out;
  }
  for (const std::string& v : doomed) {
    auto it = std::find(c.vars.begin(), c.vars.end(), v);
    int tape = static_cast<int>(it - c.vars.begin());
    c.aut = automata::project_tape(c.aut, tape, opts_.budget);
    c.vars.erase(it);
  }
  return reduce(std::move(c));
}

Compiler::CR Compiler::reorder(CR c, const std::vector<std::string>& target_vars) {
  // Aligns the result to the node's free-variable list: reorders tapes and
  // reinstates variables that only occurred in constant-valued subformulas
  // (they range freely).
  if (c.constant) return c;
  if (c.vars == target_vars) return c;
  if (c.vars.size() == target_vars.size()) {
    c.aut = permute_tapes(c.aut, tape_map(c.vars, target_vars), opts_.budget);
  } else {
    TapedAlphabet ta(env_.base(), static_cast<int>(target_vars.size()));
    c.aut = automata::cylindrify(c.aut, tape_map(c.vars, target_vars), ta, opts_.budget);
  }
  c.vars = target_vars;
  return c;
}

Word Compiler::literal_word(const Term& t) const {
  if (t.kind == Term::Kind::StrLit) return env_.base().parse_word(t.text);
  return parse_surface_numeral(t.text, env_.base());
}

Compiler::CR Compiler::apply_terms(RelationAutomaton base_aut, const std::vector<Term>& args,
                                   const std::string& what) {
  if (static_cast<std::size_t>(base_aut.tapes()) != args.size())
    fail(ErrorCode::ArityMismatch,
         what + ": expected " + std::to_string(base_aut.tapes()) + " arguments, got " +
             std::to_string(args.size()));
  int k = base_aut.tapes();
  TapedAlphabet ta(env_.base(), k);
  RelationAutomaton aut = std::move(base_aut);
  // Pin literal arguments.
  for (int i = 0; i < k; ++i) {
    if (args[static_cast<std::size_t>(i)].kind == Term::Kind::Var) continue;
    Word w = literal_word(args[static_cast<std::size_t>(i)]);
    TapedAlphabet t1(env_.base(), 1);
    RelationAutomaton spell = automata::cylindrify(
        RelationAutomaton::single_word(t1, automata::convolve(t1, std::vector<Word>{w})),
        {i}, ta, opts_.budget);
    aut = automata::intersect(aut, spell, opts_.budget);
  }
  // Identify repeated variables.
  std::vector<int> keep;        // tapes to keep, in order
  std::vector<std::string> vs;  // variable per kept tape
  for (int i = 0; i < k; ++i) {
    const Term& t = args[static_cast<std::size_t>(i)];
    if (t.kind != Term::Kind::Var) continue;
    auto it = std::find(vs.begin(), vs.end(), t.text);
    if (it == vs.end()) {
      keep.push_back(i);
      vs.push_back(t.text);
    } else {
      int first = keep[static_cast<std::size_t>(it - vs.begin())];
      RelationAutomaton eq = automata::cylindrify(builtin_eq(env_.base()), {first, i}, ta,
                                                  opts_.budget);
      aut = automata::intersect(aut, eq, opts_.budget);
    }
  }
  // Project away pinned / duplicate tapes, highest index first.
  for (int i = k; i-- > 0;) {
    if (std::find(keep.begin(), keep.end(), i) != keep.end()) continue;
    if (aut.tapes() == 1) {
      CR out;
      out.constant = !automata::is_empty(aut);
      return out;
    }
    aut = automata::project_tape(aut, i, opts_.budget);
  }
  CR out;
  out.vars = std::move(vs);
  out.aut = std::move(aut);
  return reduce(std::move(out));
}

Compiler::CR Compiler::compile_atom(const Formula& f) {
  const Alphabet& base = env_.base();
  switch (f.kind()) {
    case NodeKind::Prefix:
      return apply_terms(builtin_prefix(base), f.terms(), "<=p");
    case NodeKind::SuccP:
      return apply_terms(builtin_succ_prefix(base), f.terms(), "succp");
    case NodeKind::EqLen:
      return apply_terms(builtin_eqlen(base), f.terms(), "eqlen");
    case NodeKind::Eq:
      return apply_terms(builtin_eq(base), f.terms(), "=");
    case NodeKind::Last: {
      int s = base.index_of(f.name());
      if (s < 0) fail(ErrorCode::UnboundName, "last_: unknown symbol " + f.name());
      return apply_terms(builtin_last(base, s), f.terms(), "last_" + f.name());
    }
    case NodeKind::Add:
      return apply_terms(builtin_add(base), f.terms(), "add");
    case NodeKind::InLang:
      return apply_terms(env_.lookup(f.name()), f.terms(), "lang " + f.name());
    case NodeKind::RelApp:
      return apply_terms(env_.lookup(f.name()), f.terms(), f.name());
    default:
      fail(ErrorCode::Internal, "compile_atom: not an atom");
  }
}

Compiler::CR Compiler::exists_over_and(const std::vector<FormulaPtr>& conjuncts,
                                       const std::vector<std::string>& bound) {
  std::vector<CR> parts;
  for (const FormulaPtr& c : conjuncts) {
    CR r = compile_node(c);
    if (r.constant && !*r.constant) return r;
    if (r.constant) continue;
    parts.push_back(std::move(r));
  }
  if (parts.empty()) {
    CR t;
    t.constant = true;
    return t;
  }
  auto count_var = [&](const std::string& v) {
    int n = 0;
    for (const CR& p : parts)
      if (std::find(p.vars.begin(), p.vars.end(), v) != p.vars.end()) ++n;
    return n;
  };
  auto sweep = [&](CR& p) {
    // project bound vars no other part mentions
    std::vector<std::string> local;
    for (const std::string& v : bound)
      if (count_var(v) == 1 &&
          std::find(p.vars.begin(), p.vars.end(), v) != p.vars.end())
        local.push_back(v);
    if (!local.empty()) p = project_out(std::move(p), local);
  };
  for (CR& p : parts) sweep(p);
  while (parts.size() > 1) {
    // Join order: a complete-deterministic operand whose tapes sit inside
    // the other's is a cheap lookup, so those pairs go first; then
    // sparse-sparse joins with the most shared variables; joins needing a
    // dense operand expanded come last.
    std::size_t bi = 0, bj = 1;
    std::tuple<int, unsigned long long, long, long> best{9, ~0ull, 0, 0};
    auto weight_of = [](const CR& c) -> unsigned long long {
      if (!c.aut.deterministic_complete())
        return std::max<unsigned long long>(1, c.aut.transition_count());
      // expanding a complete automaton costs about alphabet x states
      return std::max<unsigned long long>(
          1, c.aut.taped_alphabet().num_symbols() * c.aut.num_states());
    };
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (std::size_t j = i + 1; j < parts.size(); ++j) {
        const CR& a = parts[i];
        const CR& b = parts[j];
        long shared = 0;
        bool a_in_b = true, b_in_a = true;
        for (const std::string& v : a.vars) {
          if (std::find(b.vars.begin(), b.vars.end(), v) != b.vars.end())
            ++shared;
          else
            a_in_b = false;
        }
        if (shared != static_cast<long>(b.vars.size())) b_in_a = false;
        bool a_dense = a.aut.deterministic_complete();
        bool b_dense = b.aut.deterministic_complete();
        bool lookup = (b_dense && b_in_a && !a_dense) || (a_dense && a_in_b && !b_dense);
        // crude cost estimate: lookup joins cost the driver, joins on shared
        // variables are discounted per shared tape, cross joins pay in full
        unsigned long long wa = weight_of(a), wb = weight_of(b);
        unsigned long long est;
        if (lookup) {
          est = a_dense ? wb : wa;
        } else {
          est = wa > (~0ull) / std::max<unsigned long long>(1, wb) ? ~0ull : wa * wb;
          for (long s = 0; s < shared; ++s) est /= 8;
        }
        // A join after which a quantified variable occurs nowhere else lets
        // the sweep project it right away, keeping intermediate widths low.
        long kills = 0;
        for (const std::string& v : bound) {
          bool in_pair = false, elsewhere = false;
          for (std::size_t k = 0; k < parts.size(); ++k) {
            bool here = std::find(parts[k].vars.begin(), parts[k].vars.end(), v) !=
                        parts[k].vars.end();
            if (!here) continue;
            if (k == i || k == j)
              in_pair = true;
            else
              elsewhere = true;
          }
          if (in_pair && !elsewhere) ++kills;
        }
        // joins without shared variables only when nothing else is left
        std::tuple<int, unsigned long long, long, long> score{shared > 0 ? 0 : 1, est,
                                                              -kills, -shared};
        if (score < best) {
          bi = i;
          bj = j;
          best = score;
        }
      }
    if (std::getenv("PROBISIM_JOINS")) {
      auto vs = [](const std::vector<std::string>& v) {
        std::string s;
        for (auto& x : v) s += x + ",";
        return s;
      };
      fprintf(stderr, "[join] A(%s|%u st,%zu tr,d%d) x B(%s|%u st,%zu tr,d%d)\n",
              vs(parts[bi].vars).c_str(), parts[bi].aut.num_states(),
              parts[bi].aut.transition_count(), (int)parts[bi].aut.deterministic_complete(),
              vs(parts[bj].vars).c_str(), parts[bj].aut.num_states(),
              parts[bj].aut.transition_count(), (int)parts[bj].aut.deterministic_complete());
    }
    CR merged = join(std::move(parts[bi]), std::move(parts[bj]));
    if (std::getenv("PROBISIM_JOINS") && !merged.constant)
      fprintf(stderr, "[join]   -> %u st %zu tr\n", merged.aut.num_states(),
              merged.aut.transition_count());
    parts.erase(parts.begin() + static_cast<long>(bj));
    parts[bi] = std::move(merged);
    if (parts[bi].constant && !*parts[bi].constant) return std::move(parts[bi]);
    sweep(parts[bi]);
  }
  return project_out(std::move(parts[0]), bound);
}

namespace {

// One negation-pushing step; complements then only ever apply to
// quantifier-free or already-projected subresults.
FormulaPtr push_not(const FormulaPtr& f) {
  switch (f->kind()) {
    case NodeKind::True:
      return f_false();
    case NodeKind::False:
      return f_true();
    case NodeKind::Not:
      return f->children()[0];
    case NodeKind::And: {
      std::vector<FormulaPtr> xs;
      for (const FormulaPtr& c : f->children()) xs.push_back(f_not(c));
      return f_or(std::move(xs));
    }
    case NodeKind::Or: {
      std::vector<FormulaPtr> xs;
      for (const FormulaPtr& c : f->children()) xs.push_back(f_not(c));
      return f_and(std::move(xs));
    }
    case NodeKind::Implies:
      return f_and(f->children()[0], f_not(f->children()[1]));
    case NodeKind::Iff:
      return f_or(f_and(f->children()[0], f_not(f->children()[1])),
                  f_and(f->children()[1], f_not(f->children()[0])));
    case NodeKind::Exists:
      return f_forall(f->quantified(), f_not(f->children()[0]));
    case NodeKind::Forall:
      return f_exists(f->quantified(), f_not(f->children()[0]));
    default:
      return nullptr; // atom: complement directly
  }
}

} // namespace

Compiler::CR Compiler::compile_node(const FormulaPtr& fp) {
  auto it = memo_.find(fp.get());
  if (it != memo_.end()) return it->second;
  const Formula& f = *fp;
  CR out;
  switch (f.kind()) {
    case NodeKind::True:
      out.constant = true;
      break;
    case NodeKind::False:
      out.constant = false;
      break;
    case NodeKind::Not: {
      FormulaPtr pushed = push_not(f.children()[0]);
      if (pushed)
        out = compile_node(pushed);
      else
        out = negate(compile_node(f.children()[0]));
      break;
    }
    case NodeKind::And: {
      out = exists_over_and(f.children(), {});
      break;
    }
    case NodeKind::Or: {
      std::vector<CR> xs;
      for (const FormulaPtr& c : f.children()) xs.push_back(compile_node(c));
      out = disjoin(std::move(xs));
      break;
    }
    case NodeKind::Implies:
      out = compile_node(f_or(f_not(f.children()[0]), f.children()[1]));
      break;
    case NodeKind::Iff: {
      FormulaPtr a = f.children()[0], b = f.children()[1];
      out = compile_node(f_and(f_or(f_not(a), b), f_or(f_not(b), a)));
      break;
    }
    case NodeKind::Exists: {
      const FormulaPtr& body = f.children()[0];
      if (body->kind() == NodeKind::And)
        out = exists_over_and(body->children(), f.quantified());
      else
        out = project_out(compile_node(body), f.quantified());
      break;
    }
    case NodeKind::Forall: {
      // Quantifier elimination: compile the dual Exists and complement the
      // projected (narrow) result.
      out = negate(compile_node(f_exists(f.quantified(), f_not(f.children()[0]))));
      break;
    }
    default:
      out = compile_atom(f);
      break;
  }
  if (!out.constant) out = reorder(std::move(out), f.free_vars());
  memo_.emplace(fp.get(), out);
  keepalive_.emplace(fp.get(), fp);
  return out;
}

CompiledRelation Compiler::compile(const FormulaPtr& f) {
  CR r = compile_node(f);
  CompiledRelation out;
  out.formula = f;
  out.free_vars = f->free_vars();
  if (r.constant) {
    out.constant = r.constant;
    // A constant over free variables still denotes a relation; lift it so
    // the automaton field is usable whenever variables are present.
    if (!out.free_vars.empty()) {
      TapedAlphabet ta(env_.base(), static_cast<int>(out.free_vars.size()));
      out.automaton = *r.constant
                          ? automata::RelationAutomaton::universe(ta)
                          : automata::RelationAutomaton::empty(ta);
      out.constant.reset();
    }
    return out;
  }
  out.automaton = std::move(r.aut);
  return out;
}

bool Compiler::decide(const FormulaPtr& f) {
  if (!f->free_vars().empty())
    fail(ErrorCode::BadInput, "decide: formula has free variables");
  CR r = compile_node(f);
  if (!r.constant) fail(ErrorCode::Internal, "sentence compiled to an automaton");
  return *r.constant;
}

CompiledRelation compile(const FormulaPtr& f, const Environment& env, CompilerOptions opts) {
  Compiler c(env, opts);
  return c.compile(f);
}

bool decide_sentence(const FormulaPtr& f, const Environment& env, CompilerOptions opts) {
  Compiler c(env, opts);
  return c.decide(f);
}

} // namespace probisim::logic
