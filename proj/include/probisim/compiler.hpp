#ifndef PROBISIM_COMPILER_HPP
#define PROBISIM_COMPILER_HPP

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "probisim/automaton.hpp"
#include "probisim/formula.hpp"

namespace probisim::logic {

using automata::Alphabet;
using automata::Budget;
using automata::RelationAutomaton;
using automata::TapedAlphabet;
using automata::Word;

// Named relation and language bindings, all over one base alphabet. When the
// base contains digits 0 and 1, the language name `numerals` is pre-bound to
// the canonical numeral domain.
class Environment {
public:
  explicit Environment(Alphabet base);

  const Alphabet& base() const { return base_; }
  void bind(const std::string& name, RelationAutomaton a);
  bool has(const std::string& name) const { return bindings_.count(name) > 0; }
  const RelationAutomaton& lookup(const std::string& name) const;
  const std::map<std::string, RelationAutomaton>& bindings() const { return bindings_; }

private:
  Alphabet base_;
  std::map<std::string, RelationAutomaton> bindings_;
};

// Result of compiling a formula: an automaton with one tape per free
// variable (tape j is free_vars[j], ordered by first occurrence), or a truth
// value when the formula is a sentence.
struct CompiledRelation {
  FormulaPtr formula;
  std::vector<std::string> free_vars;
  std::optional<bool> constant;
  RelationAutomaton automaton;

  bool is_constant() const { return constant.has_value(); }
};

struct CompilerOptions {
  Budget budget{};
  // Sparse intermediate results at most this large (states / tapes) are
  // eagerly minimized; larger ones are only trimmed.
  std::size_t minimize_states = 3000;
  int minimize_tapes = 3;
};

// Formula-to-automaton compiler over one environment. Subformula results are
// memoized by structural identity; rebinding a name drops exactly the memo
// entries that mention it.
class Compiler {
public:
  explicit Compiler(Environment env, CompilerOptions opts = {});

  const Environment& env() const { return env_; }
  const CompilerOptions& options() const { return opts_; }
  void bind(const std::string& name, RelationAutomaton a);

  CompiledRelation compile(const FormulaPtr& f);
  bool decide(const FormulaPtr& f);

private:
  struct CR {
    std::vector<std::string> vars;
    std::optional<bool> constant;
    RelationAutomaton aut;
  };

  CR compile_node(const FormulaPtr& f);
  CR compile_atom(const Formula& f);
  CR apply_terms(RelationAutomaton base_aut, const std::vector<Term>& args,
                 const std::string& what);
  CR reduce(CR c);
  CR join(CR a, CR b);
  CR disjoin(std::vector<CR> xs);
  CR negate(CR c);
  CR project_out(CR c, const std::vector<std::string>& vars);
  CR exists_over_and(const std::vector<FormulaPtr>& conjuncts,
                     const std::vector<std::string>& bound);
  CR reorder(CR c, const std::vector<std::string>& target_vars);
  Word literal_word(const Term& t) const;

  Environment env_;
  CompilerOptions opts_;
  std::unordered_map<const Formula*, CR> memo_;
  std::unordered_map<const Formula*, FormulaPtr> keepalive_;
};

// One-shot helpers matching the specification surface.
CompiledRelation compile(const FormulaPtr& f, const Environment& env,
                         CompilerOptions opts = {});
bool decide_sentence(const FormulaPtr& f, const Environment& env, CompilerOptions opts = {});

// Standard automata over the universal structure. `name` is one of:
// prefix, succp, eqlen, eq, last_<sym>, add, numerals.
RelationAutomaton builtin_relation(const std::string& name, const Alphabet& base);

RelationAutomaton builtin_prefix(const Alphabet& base);
RelationAutomaton builtin_succ_prefix(const Alphabet& base);
RelationAutomaton builtin_eqlen(const Alphabet& base);
RelationAutomaton builtin_eq(const Alphabet& base);
RelationAutomaton builtin_last(const Alphabet& base, int symbol);
RelationAutomaton builtin_add(const Alphabet& base);
RelationAutomaton builtin_numeral_domain(const Alphabet& base);

// Canonical numerals are stored least-significant-bit first on tapes; the
// surface syntax is most-significant-bit first. These convert between
// machine integers and the internal tape words.
Word numeral_word(std::uint64_t value, const Alphabet& base);
std::optional<std::uint64_t> numeral_value(const Word& w, const Alphabet& base);
// Surface digits (MSB first, no leading zeros except "0") -> internal word.
Word parse_surface_numeral(const std::string& digits, const Alphabet& base);

} // namespace probisim::logic

#endif
