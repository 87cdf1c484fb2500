#ifndef PROBISIM_VC_HPP
#define PROBISIM_VC_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "probisim/pts.hpp"

namespace probisim::vc {

using automata::RelationAutomaton;

// A candidate probabilistic bisimulation: the relation R (2 tapes over the
// presentation's alphabet) and an optional regular seed E that R must
// contain.
struct Candidate {
  RelationAutomaton relation;
  std::optional<RelationAutomaton> seed;
};

struct VerifyOutcome {
  enum class Kind { Verified, NotEquivalence, SeedNotContained, NotBisim, ResourceExceeded };
  Kind kind = Kind::Verified;
  // NotEquivalence: refl | sym | trans; NotBisim: the action name.
  std::string detail;
  std::vector<std::string> witness; // decoded per-tape words, minimal length
  bool verified() const { return kind == Kind::Verified; }
  std::string to_text() const;
  std::string to_json() const;
};

// The per-action symbolic condition: dead-on-both or a disjunction over
// exact successor counts (n, m) and set partitions of the n+m successor
// slots, with block sums expressed by chained additions.
struct ActionVc {
  std::string action;
  logic::FormulaPtr formula;       // full disjunction, for inspection
  logic::FormulaPtr checked_form;  // equivalent form with unsatisfiable
                                   // one-sided partitions dropped
  // checked_form split for incremental checking: dead-on-both, both-alive,
  // then the partition disjuncts in check order
  logic::FormulaPtr both_dead;
  logic::FormulaPtr both_live;
  std::vector<logic::FormulaPtr> disjuncts;
  int variants = 0;                // (N+1)^2 successor-count variants
  std::map<std::pair<int, int>, unsigned long long> partitions_per_nm;
};

struct VcInfo {
  std::vector<ActionVc> actions;
};

unsigned long long bell_number(int n);

// Builds the verification condition against relation name `rel_name`.
VcInfo build_vc(const pts::RegularPresentation& p, const std::string& rel_name = "R");

struct EquivalenceIssue {
  std::string kind; // refl | sym | trans
  std::vector<std::string> witness;
};

// F_eq: reflexivity on the domain, symmetry, transitivity; first failure
// with a minimal witness.
std::optional<EquivalenceIssue> check_equivalence_relation(
    const RelationAutomaton& r, const RelationAutomaton& domain,
    const logic::CompilerOptions& opts = {});

// Checks candidates against one presentation; the compiler session persists
// so relation-independent subformulas stay compiled across calls.
class Verifier {
public:
  explicit Verifier(const pts::RegularPresentation& p, logic::CompilerOptions opts = {});

  const VcInfo& info() const { return vc_; }
  const pts::RegularPresentation& presentation() const { return p_; }

  // Check order: equivalence relation (domain-relativized), seed
  // containment, then one action at a time in declaration order.
  VerifyOutcome verify(const Candidate& c);

private:
  pts::RegularPresentation p_;
  logic::Compiler comp_;
  VcInfo vc_;
};

VerifyOutcome verify(const pts::RegularPresentation& p, const Candidate& c,
                     const logic::CompilerOptions& opts = {});

// R = identity restricted to the domain; always a probabilistic bisimulation.
RelationAutomaton identity_relation(const pts::RegularPresentation& p);

} // namespace probisim::vc

#endif
