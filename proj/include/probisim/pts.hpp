#ifndef PROBISIM_PTS_HPP
#define PROBISIM_PTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "probisim/compiler.hpp"
#include "probisim/rational.hpp"

namespace probisim::pts {

using automata::Alphabet;
using automata::RelationAutomaton;
using automata::Word;

// A regular PTS presentation: a domain language and one ternary weight
// relation delta_a(x, y, z) per action, with declared branching bound and
// common weight. The environment keeps the model's named helper relations so
// user-supplied relation files can refer to them.
struct RegularPresentation {
  std::string name;
  Alphabet base;
  RelationAutomaton domain; // 1 tape
  std::vector<std::string> actions;
  std::map<std::string, RelationAutomaton> delta; // 3 tapes each
  std::uint64_t weight = 1;
  int bound = 1;
  bool length_preserving = false;
  std::shared_ptr<logic::Environment> env;
};

struct ValidationReport {
  bool valid = true;
  std::string reason;                      // first failure, empty when valid
  std::string action;                      // action of the failure, if any
  std::vector<std::string> witness;        // decoded witness words
  std::map<std::string, std::uint64_t> live_weight; // inferred per action
  int checked_bound = 0;
  bool length_preserving_checked = false;
  std::string to_text() const;
  std::string to_json() const;
};

// Explicit finite PTS: configurations of one length, sparse integer rows.
struct FinitePts {
  Alphabet base;
  std::vector<Word> configs; // lexicographic order
  std::vector<std::string> actions;
  // rows[action][state] = sorted (target state, weight) with weight > 0
  std::vector<std::vector<std::vector<std::pair<int, std::uint64_t>>>> rows;
  std::uint64_t weight = 1;

  int index_of(const Word& w) const;
  bool dead(int state) const; // no action applicable
  std::vector<int> available_actions(int state) const;
};

struct SliceOptions {
  std::size_t max_configs = 2'000'000;
};

// Decidable presentation validity per the common-weight PTS contract:
// support, totality and functionality of every delta_a over S x S, branching
// bound, per-action live weight sums equal to the declared weight, and (when
// flagged) length preservation. Stops at the first failure with a
// minimal-length witness.
ValidationReport validate(const RegularPresentation& p,
                          const logic::CompilerOptions& opts = {});

FinitePts slice(const RegularPresentation& p, std::size_t n, const SliceOptions& so = {});

RegularPresentation disjoint_union(const RegularPresentation& p,
                                   const RegularPresentation& q);

// Exact trace distribution under the uniform external adversary: available
// actions are chosen uniformly, successors with probability weight/w; traces
// ending in a dead state are maximal. Mass still alive at the depth limit is
// reported separately.
struct TraceDistribution {
  std::map<std::vector<int>, Rational> traces; // action-id sequences
  Rational unterminated;
};

TraceDistribution trace_distribution(const FinitePts& f, const Word& start,
                                     std::size_t depth);
Rational total_variation(const TraceDistribution& a, const TraceDistribution& b);

// --- model files -------------------------------------------------------------

// Parses the model text format:
//   model <name> {
//     alphabet = [s1, s2, ...];
//     weight = <binary numeral>;  bound = <int>;  length_preserving = <bool>;
//     lang <name> = <formula>;  rel <name>(v, ...) = <formula>;
//     domain = <formula over x>;  action <name> = <formula over (x,y,z)>;
//   }
// Declarations may use everything declared before them.
RegularPresentation parse_model(const std::string& text,
                                const logic::CompilerOptions& opts = {});

// Relation files: `relation { [lang/rel decls;] formula = <phi>; }`,
// compiled in the model's environment; `tapes` fixes the expected arity.
RelationAutomaton parse_relation_file(const std::string& text,
                                      const RegularPresentation& model, int tapes,
                                      const logic::CompilerOptions& opts = {});

} // namespace probisim::pts

#endif
