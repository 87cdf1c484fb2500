#ifndef PROBISIM_AUTOMATON_HPP
#define PROBISIM_AUTOMATON_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "probisim/alphabet.hpp"

namespace probisim::automata {

struct Transition {
  State from;
  Symbol sym;
  State to;
  friend bool operator==(const Transition&, const Transition&) = default;
  friend auto operator<=>(const Transition&, const Transition&) = default;
};

// State/transition caps for the symbolic pipeline. Exceeding a cap raises
// Error(ResourceExceeded); callers surface it as a distinct outcome, never
// as a verdict.
struct Budget {
  std::size_t max_states = 2'000'000;
  std::size_t max_transitions = 40'000'000;
  void check_states(std::size_t n) const;
  void check_transitions(std::size_t n) const;
};

const Budget& default_budget();

// Finite automaton over a k-tape padded product alphabet. Values are
// immutable after construction; operations are pure functions.
//
// Two storage forms:
//  - sparse: plain NFA, sorted transition list (absent = reject);
//  - dense: complete DFA given by columns for the symbols that occur
//    somewhere in the source automaton plus one default target per pad
//    pattern, so completeness never materializes the full tuple alphabet.
class RelationAutomaton {
public:
  RelationAutomaton() = default;

  static RelationAutomaton make_sparse(TapedAlphabet ta, State num_states,
                                       std::vector<State> initial,
                                       std::vector<bool> finals,
                                       std::vector<Transition> transitions);
  static RelationAutomaton make_dense(TapedAlphabet ta, State num_states,
                                      State initial, std::vector<bool> finals,
                                      std::vector<Symbol> occ,
                                      std::vector<State> table,
                                      std::vector<State> pattern_default);
  // Canonical empty-language automaton.
  static RelationAutomaton empty(TapedAlphabet ta);
  // Accepts every valid convolution (including the empty word).
  static RelationAutomaton universe(TapedAlphabet ta);
  // Accepts exactly the given word.
  static RelationAutomaton single_word(TapedAlphabet ta, const ConvWord& w);

  const TapedAlphabet& taped_alphabet() const { return ta_; }
  int tapes() const { return ta_.tapes(); }
  State num_states() const { return num_states_; }
  bool deterministic_complete() const { return dense_; }

  // Sparse accessors (valid when !deterministic_complete()).
  const std::vector<State>& initial_states() const { return initial_; }
  const std::vector<bool>& finals() const { return finals_; }
  const std::vector<Transition>& transitions() const { return trans_; }
  std::span<const Transition> row(State s) const;

  // Dense accessors (valid when deterministic_complete()).
  State dense_initial() const { return dense_initial_; }
  const std::vector<Symbol>& occ() const { return occ_; }
  State dense_step(State s, Symbol a) const;
  State pattern_default(State s, std::uint32_t pattern) const {
    return pattern_default_[s * ta_.num_pad_patterns() + pattern];
  }

  bool accepts(const ConvWord& w) const;
  std::size_t transition_count() const {
    return dense_ ? occ_.size() * num_states_ : trans_.size();
  }

private:
  TapedAlphabet ta_;
  State num_states_ = 0;
  std::vector<bool> finals_;
  bool dense_ = false;
  // sparse
  std::vector<State> initial_;
  std::vector<Transition> trans_;
  std::vector<std::size_t> row_begin_;
  // dense
  State dense_initial_ = 0;
  std::vector<Symbol> occ_;
  std::vector<State> table_;
  std::vector<State> pattern_default_;
};

// --- kernel operations -----------------------------------------------------

// Restriction to reachable and co-reachable states; output sparse. Dense
// inputs keep their default structure only where it stays live.
RelationAutomaton trim(const RelationAutomaton& a, const Budget& b = default_budget());

// Expand a dense automaton's default transitions into explicit ones.
RelationAutomaton materialize(const RelationAutomaton& a, const Budget& b = default_budget());

// Intersection with the pad-discipline language: on every tape, once ⊥
// appears it persists. Every public relation-valued result passes through
// this.
RelationAutomaton normalize_validity(const RelationAutomaton& a,
                                     const Budget& b = default_budget());
// Explicit validity acceptor (2^k - 1 states), mainly for tests.
RelationAutomaton validity_automaton(const TapedAlphabet& ta);

RelationAutomaton determinize(const RelationAutomaton& a, const Budget& b = default_budget());

// Complete deterministic minimal acceptor with canonical state numbering
// (breadth-first from the initial state, exploring symbols in tuple order),
// so equal languages yield structurally identical results.
RelationAutomaton determinize_minimize(const RelationAutomaton& a,
                                       const Budget& b = default_budget());

// ValidConvolutions(k) minus L(a).
RelationAutomaton complement(const RelationAutomaton& a, const Budget& b = default_budget());

enum class ProductMode { Intersect, Union };
RelationAutomaton product(const RelationAutomaton& a, const RelationAutomaton& b,
                          ProductMode mode, const Budget& bud = default_budget());
RelationAutomaton intersect(const RelationAutomaton& a, const RelationAutomaton& b,
                            const Budget& bud = default_budget());
RelationAutomaton unite(const RelationAutomaton& a, const RelationAutomaton& b,
                        const Budget& bud = default_budget());

// Intersection of relations living on subsets of a common tape set.
// tape_map_X[i] is the result tape carrying tape i of X; the maps must be
// injective and jointly cover all result tapes. Each operand is implicitly
// extended with trailing all-pad letters so shorter convolutions align.
RelationAutomaton intersect_aligned(const RelationAutomaton& a,
                                    const std::vector<int>& tape_map_a,
                                    const RelationAutomaton& b,
                                    const std::vector<int>& tape_map_b,
                                    const TapedAlphabet& result_ta,
                                    const Budget& bud = default_budget());

// Inserts fresh unconstrained tapes: tape_map[i] is the result tape of input
// tape i; remaining result tapes range freely (transition-level expansion).
RelationAutomaton cylindrify(const RelationAutomaton& a, const std::vector<int>& tape_map,
                             const TapedAlphabet& result_ta,
                             const Budget& bud = default_budget());

// Existential projection: drops the given tape and renormalizes. Requires
// k >= 2 (a 1-tape automaton projects to a truth value; use is_empty).
RelationAutomaton project_tape(const RelationAutomaton& a, int tape,
                               const Budget& bud = default_budget());

bool is_empty(const RelationAutomaton& a);

// Length-minimal member, ties broken lexicographically by tuple order.
std::optional<ConvWord> shortest_member(const RelationAutomaton& a);

struct SubsetResult {
  bool holds;
  std::optional<ConvWord> witness; // shortest member of a \ b when !holds
};
SubsetResult is_subset(const RelationAutomaton& a, const RelationAutomaton& b,
                       const Budget& bud = default_budget());

bool equal_language(const RelationAutomaton& a, const RelationAutomaton& b,
                    const Budget& bud = default_budget());

// Structural identity (same numbering, transitions, finality).
bool structurally_equal(const RelationAutomaton& a, const RelationAutomaton& b);

// Calls fn for every accepted word of length <= max_len, in length-major
// lexicographic order; stops early if fn returns false.
void enumerate_language(const RelationAutomaton& a, std::size_t max_len,
                        const std::function<bool(const ConvWord&)>& fn);

} // namespace probisim::automata

#endif
