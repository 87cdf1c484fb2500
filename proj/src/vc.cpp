#include "probisim/vc.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace probisim::vc {

using logic::Compiler;
using logic::CompiledRelation;
using logic::f_and;
using logic::f_eq;
using logic::f_exists;
using logic::f_not;
using logic::f_or;
using logic::f_rel_app;
using logic::f_add;
using logic::FormulaPtr;
using logic::num_lit;
using logic::Term;
using logic::var;
using automata::ConvWord;
using automata::Word;

unsigned long long bell_number(int n) {
  // Bell triangle
  std::vector<std::vector<unsigned long long>> t{{1}};
  for (int i = 1; i <= n; ++i) {
    std::vector<unsigned long long> row{t.back().back()};
    for (unsigned long long v : t.back()) row.push_back(row.back() + v);
    t.push_back(std::move(row));
  }
  return t[static_cast<std::size_t>(n)][0];
}

namespace {

std::vector<std::string> decode_witness(const RelationAutomaton& aut, const ConvWord& w) {
  std::vector<std::string> out;
  for (const Word& word : automata::deconvolve(aut.taped_alphabet(), w))
    out.push_back(aut.taped_alphabet().base().format_word(word));
  return out;
}

FormulaPtr nz(const std::string& d, const std::string& x, const std::string& u) {
  return f_exists({"zz"}, f_and(f_rel_app(d, {var(x), var(u), var("zz")}),
                                f_not(f_eq(var("zz"), num_lit("0")))));
}

FormulaPtr at_least(const std::string& d, const std::string& x, int k) {
  std::vector<std::string> os;
  for (int i = 0; i < k; ++i) os.push_back("o" + std::to_string(i + 1));
  std::vector<FormulaPtr> cs;
  for (const std::string& o : os) cs.push_back(nz(d, x, o));
  for (std::size_t i = 0; i < os.size(); ++i)
    for (std::size_t j = i + 1; j < os.size(); ++j)
      cs.push_back(f_not(f_eq(var(os[i]), var(os[j]))));
  return f_exists(std::move(os), f_and(std::move(cs)));
}

// s cannot move anywhere through this action
FormulaPtr dead(const std::string& d, const std::string& s) {
  return f_not(at_least(d, s, 1));
}

// Block sums as a chain of links: z_1 = delta(s, slot_1),
// z_j = z_{j-1} + delta(s, slot_j), z_r = total. Each link hides its weight
// variable behind its own quantifier so it compiles to a small constrained
// relation before the links are joined.
void weight_chain_parts(const std::string& d, const std::string& s,
                        const std::vector<std::string>& slots, const Term& total,
                        const std::string& prefix, std::vector<std::string>& vars,
                        std::vector<FormulaPtr>& cs) {
  if (slots.empty()) {
    cs.push_back(f_eq(total, num_lit("0")));
    return;
  }
  if (slots.size() == 1) {
    cs.push_back(f_rel_app(d, {var(s), var(slots[0]), total}));
    return;
  }
  std::string prev = prefix + "z1";
  vars.push_back(prev);
  cs.push_back(f_rel_app(d, {var(s), var(slots[0]), var(prev)}));
  for (std::size_t j = 1; j < slots.size(); ++j) {
    bool last = j + 1 == slots.size();
    Term out = last ? total : var(prefix + "z" + std::to_string(j + 1));
    if (!last) vars.push_back(out.text);
    std::string wj = prefix + "w" + std::to_string(j);
    cs.push_back(f_exists({wj}, f_and(f_rel_app(d, {var(s), var(slots[j]), var(wj)}),
                                      f_add(var(prev), var(wj), out))));
    if (!last) prev = out.text;
  }
}

// All set partitions of {0..k-1} as restricted growth strings.
std::vector<std::vector<int>> set_partitions(int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> rgs(static_cast<std::size_t>(k), 0);
  std::function<void(int, int)> rec = [&](int i, int maxv) {
    if (i == k) {
      out.push_back(rgs);
      return;
    }
    for (int v = 0; v <= maxv + 1; ++v) {
      rgs[static_cast<std::size_t>(i)] = v;
      rec(i + 1, std::max(maxv, v));
    }
  };
  rec(0, -1);
  return out;
}

FormulaPtr live(const std::string& d, const std::string& s) {
  return f_exists({"oo"}, nz(d, s, "oo"));
}

struct Phi2 {
  FormulaPtr formula;
  bool satisfiable_shape; // false when some block misses one side
};

Phi2 build_phi2(const std::string& d, const std::string& rel_name, int n, int m,
                const std::vector<int>& partition) {
  std::vector<std::string> slots;
  for (int i = 0; i < n; ++i) slots.push_back("u" + std::to_string(i + 1));
  for (int j = 0; j < m; ++j) slots.push_back("v" + std::to_string(j + 1));
  // The successor-tuple core is one shared subformula: it does not mention
  // the relation, so its compilation survives across partitions and across
  // candidate relations.
  std::vector<FormulaPtr> core;
  for (int i = 0; i < n; ++i) core.push_back(nz(d, "p", slots[static_cast<std::size_t>(i)]));
  for (int j = 0; j < m; ++j) core.push_back(nz(d, "q", slots[static_cast<std::size_t>(n + j)]));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      core.push_back(f_not(f_eq(var(slots[static_cast<std::size_t>(i)]),
                                var(slots[static_cast<std::size_t>(j)]))));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      core.push_back(f_not(f_eq(var(slots[static_cast<std::size_t>(n + i)]),
                                var(slots[static_cast<std::size_t>(n + j)]))));
  core.push_back(f_not(at_least(d, "p", n + 1)));
  core.push_back(f_not(at_least(d, "q", m + 1)));
  std::vector<FormulaPtr> cs{f_and(std::move(core))};
  // the labelling pattern must coincide with R
  int k = n + m;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      FormulaPtr r = f_rel_app(rel_name, {var(slots[static_cast<std::size_t>(i)]),
                                          var(slots[static_cast<std::size_t>(j)])});
      cs.push_back(partition[static_cast<std::size_t>(i)] ==
                           partition[static_cast<std::size_t>(j)]
                       ? r
                       : f_not(r));
    }
  // equal block masses via chained additions sharing the block total
  int blocks = *std::max_element(partition.begin(), partition.end()) + 1;
  bool shape_ok = true;
  std::vector<std::string> all_vars = slots;
  for (int b = 0; b < blocks; ++b) {
    std::vector<std::string> pu, qv;
    for (int i = 0; i < n; ++i)
      if (partition[static_cast<std::size_t>(i)] == b)
        pu.push_back(slots[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j)
      if (partition[static_cast<std::size_t>(n + j)] == b)
        qv.push_back(slots[static_cast<std::size_t>(n + j)]);
    if (pu.empty() || qv.empty()) shape_ok = false;
    std::string total = "t" + std::to_string(b);
    all_vars.push_back(total);
    weight_chain_parts(d, "p", pu, var(total), "p" + std::to_string(b), all_vars, cs);
    weight_chain_parts(d, "q", qv, var(total), "q" + std::to_string(b), all_vars, cs);
  }
  return {f_exists(std::move(all_vars), f_and(std::move(cs))), shape_ok};
}

} // namespace

VcInfo build_vc(const pts::RegularPresentation& p, const std::string& rel_name) {
  VcInfo info;
  for (const std::string& a : p.actions) {
    ActionVc av;
    av.action = a;
    std::string d = "D_" + a;
    FormulaPtr both_dead = f_and(dead(d, "p"), dead(d, "q"));
    av.both_dead = both_dead;
    av.both_live = f_and(live(d, "p"), live(d, "q"));
    std::vector<FormulaPtr> full{both_dead};
    std::vector<FormulaPtr> checked{both_dead};
    av.variants = (p.bound + 1) * (p.bound + 1);
    for (int n = 0; n <= p.bound; ++n)
      for (int m = 0; m <= p.bound; ++m) {
        if (n == 0 || m == 0) {
          // dead-on-one-side variants collapse into the both-dead disjunct
          av.partitions_per_nm[{n, m}] = n + m == 0 ? 1 : bell_number(n + m);
          continue;
        }
        av.partitions_per_nm[{n, m}] = bell_number(n + m);
        for (const auto& partition : set_partitions(n + m)) {
          Phi2 phi = build_phi2(d, rel_name, n, m, partition);
          full.push_back(phi.formula);
          if (phi.satisfiable_shape) {
            checked.push_back(phi.formula);
            av.disjuncts.push_back(phi.formula);
          }
        }
      }
    av.formula = f_or(std::move(full));
    av.checked_form = f_or(std::move(checked));
    info.actions.push_back(std::move(av));
  }
  return info;
}

std::optional<EquivalenceIssue> check_equivalence_relation(
    const RelationAutomaton& r, const RelationAutomaton& domain,
    const logic::CompilerOptions& opts) {
  logic::Environment env(domain.taped_alphabet().base());
  env.bind("S", domain);
  env.bind("R", r);
  Compiler comp(env, opts);
  auto probe = [&](const char* kind, const FormulaPtr& violation)
      -> std::optional<EquivalenceIssue> {
    CompiledRelation c = comp.compile(violation);
    if (c.is_constant()) {
      if (!*c.constant) return std::nullopt;
      return EquivalenceIssue{kind, {}};
    }
    auto w = automata::shortest_member(c.automaton);
    if (!w) return std::nullopt;
    return EquivalenceIssue{kind, decode_witness(c.automaton, *w)};
  };
  FormulaPtr S_s = f_rel_app("S", {var("s")});
  FormulaPtr S_t = f_rel_app("S", {var("t")});
  FormulaPtr S_r = f_rel_app("S", {var("r")});
  if (auto i = probe("refl", f_and(S_s, f_not(f_rel_app("R", {var("s"), var("s")})))))
    return i;
  if (auto i = probe("sym", f_and({S_s, S_t, f_rel_app("R", {var("s"), var("t")}),
                                   f_not(f_rel_app("R", {var("t"), var("s")}))})))
    return i;
  if (auto i = probe("trans",
                     f_and({S_s, S_t, S_r, f_rel_app("R", {var("s"), var("t")}),
                            f_rel_app("R", {var("t"), var("r")}),
                            f_not(f_rel_app("R", {var("s"), var("r")}))})))
    return i;
  return std::nullopt;
}

Verifier::Verifier(const pts::RegularPresentation& p, logic::CompilerOptions opts)
    : p_(p), comp_(logic::Environment(p.base), opts), vc_(build_vc(p)) {
  comp_.bind("S", p_.domain);
  for (const auto& [a, d] : p_.delta) comp_.bind("D_" + a, d);
}

VerifyOutcome Verifier::verify(const Candidate& c) {
  VerifyOutcome out;
  try {
    comp_.bind("R", c.relation);
    // (1) equivalence relation on the domain
    FormulaPtr S_s = f_rel_app("S", {var("s")});
    FormulaPtr S_t = f_rel_app("S", {var("t")});
    FormulaPtr S_r = f_rel_app("S", {var("r")});
    struct Check {
      const char* kind;
      FormulaPtr violation;
    };
    Check eq_checks[] = {
        {"refl", f_and(S_s, f_not(f_rel_app("R", {var("s"), var("s")})))},
        {"sym", f_and({S_s, S_t, f_rel_app("R", {var("s"), var("t")}),
                       f_not(f_rel_app("R", {var("t"), var("s")}))})},
        {"trans", f_and({S_s, S_t, S_r, f_rel_app("R", {var("s"), var("t")}),
                         f_rel_app("R", {var("t"), var("r")}),
                         f_not(f_rel_app("R", {var("s"), var("r")}))})},
    };
    for (const Check& ch : eq_checks) {
      CompiledRelation v = comp_.compile(ch.violation);
      if (v.is_constant()) {
        if (!*v.constant) continue;
        out.kind = VerifyOutcome::Kind::NotEquivalence;
        out.detail = ch.kind;
        return out;
      }
      if (auto w = automata::shortest_member(v.automaton)) {
        out.kind = VerifyOutcome::Kind::NotEquivalence;
        out.detail = ch.kind;
        out.witness = decode_witness(v.automaton, *w);
        return out;
      }
    }
    // (2) seed containment
    if (c.seed) {
      automata::SubsetResult sub =
          automata::is_subset(*c.seed, c.relation, comp_.options().budget);
      if (!sub.holds) {
        out.kind = VerifyOutcome::Kind::SeedNotContained;
        out.witness = decode_witness(*c.seed, *sub.witness);
        return out;
      }
    }
    // (3) one action at a time. Incremental form of
    // R & S^2 & !((dead&dead) | (live&live & \/ phi2)): pairs with exactly
    // one dead side violate outright; otherwise the compiled partition
    // disjuncts are subtracted until the residue dies.
    for (const ActionVc& av : vc_.actions) {
      const automata::Budget& bud = comp_.options().budget;
      CompiledRelation base = comp_.compile(
          f_and({f_rel_app("S", {var("p")}), f_rel_app("S", {var("q")}),
                 f_rel_app("R", {var("p"), var("q")}), f_not(av.both_dead)}));
      if (base.is_constant() && !*base.constant) continue;
      CompiledRelation lives = comp_.compile(av.both_live);
      RelationAutomaton half_dead =
          automata::intersect(base.automaton, automata::complement(lives.automaton, bud), bud);
      if (auto w = automata::shortest_member(half_dead)) {
        out.kind = VerifyOutcome::Kind::NotBisim;
        out.detail = av.action;
        out.witness = decode_witness(half_dead, *w);
        return out;
      }
      RelationAutomaton residue =
          automata::intersect(base.automaton, lives.automaton, bud);
      bool done = false;
      for (const FormulaPtr& phi : av.disjuncts) {
        if (automata::is_empty(residue)) {
          done = true;
          break;
        }
        CompiledRelation c = comp_.compile(phi);
        residue = automata::intersect(residue, automata::complement(c.automaton, bud), bud);
      }
      if (!done) {
        if (auto w = automata::shortest_member(residue)) {
          out.kind = VerifyOutcome::Kind::NotBisim;
          out.detail = av.action;
          out.witness = decode_witness(residue, *w);
          return out;
        }
      }
    }
    out.kind = VerifyOutcome::Kind::Verified;
    return out;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ResourceExceeded) throw;
    out.kind = VerifyOutcome::Kind::ResourceExceeded;
    out.detail = e.what();
    out.witness.clear();
    return out;
  }
}

VerifyOutcome verify(const pts::RegularPresentation& p, const Candidate& c,
                     const logic::CompilerOptions& opts) {
  Verifier v(p, opts);
  return v.verify(c);
}

RelationAutomaton identity_relation(const pts::RegularPresentation& p) {
  automata::TapedAlphabet t2(p.base, 2);
  RelationAutomaton eq = logic::builtin_eq(p.base);
  RelationAutomaton dom2 = automata::cylindrify(p.domain, {0}, t2);
  return automata::determinize_minimize(automata::intersect(eq, dom2));
}

std::string VerifyOutcome::to_text() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Verified:
      os << "Verified";
      break;
    case Kind::NotEquivalence:
      os << "NotEquivalence(" << detail << ")";
      break;
    case Kind::SeedNotContained:
      os << "SeedNotContained";
      break;
    case Kind::NotBisim:
      os << "NotBisim(" << detail << ")";
      break;
    case Kind::ResourceExceeded:
      os << "ResourceExceeded: " << detail;
      break;
  }
  for (const std::string& w : witness) os << "\n  witness: \"" << w << "\"";
  return os.str();
}

std::string VerifyOutcome::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::Verified:
      j["outcome"] = "verified";
      break;
    case Kind::NotEquivalence:
      j["outcome"] = "not_equivalence";
      j["kind"] = detail;
      break;
    case Kind::SeedNotContained:
      j["outcome"] = "seed_not_contained";
      break;
    case Kind::NotBisim:
      j["outcome"] = "not_bisim";
      j["action"] = detail;
      break;
    case Kind::ResourceExceeded:
      j["outcome"] = "resource_exceeded";
      j["note"] = detail;
      break;
  }
  if (!witness.empty()) j["witness"] = witness;
  return j.dump(2);
}

} // namespace probisim::vc
