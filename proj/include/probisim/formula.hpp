#ifndef PROBISIM_FORMULA_HPP
#define PROBISIM_FORMULA_HPP

#include <memory>
#include <string>
#include <vector>

#include "probisim/base.hpp"

namespace probisim::logic {

struct Term {
  enum class Kind { Var, StrLit, NumLit };
  Kind kind;
  // Var: variable name; StrLit: raw literal text (tokenized against the
  // alphabet at compile time); NumLit: binary digits, most significant first.
  std::string text;
  friend bool operator==(const Term&, const Term&) = default;
};

Term var(std::string name);
Term str_lit(std::string text);
Term num_lit(std::string digits);

enum class NodeKind {
  True,
  False,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Exists,
  Forall,
  Prefix, // x <=p y
  SuccP,  // y = x . a for some letter a
  EqLen,
  Last, // name_ = letter
  Eq,
  InLang, // name_ = language name
  Add,    // add(x, z, y): y = x + z on canonical numerals
  RelApp, // name_ = relation name
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable hash-consed AST node: structurally equal formulas are pointer
// equal, which the compiler memo relies on.
class Formula {
public:
  NodeKind kind() const { return kind_; }
  const std::vector<FormulaPtr>& children() const { return children_; }
  const std::vector<std::string>& quantified() const { return vars_; }
  const std::vector<Term>& terms() const { return terms_; }
  const std::string& name() const { return name_; }

  // Free variables in first-occurrence order.
  const std::vector<std::string>& free_vars() const { return free_vars_; }
  // Environment names referenced anywhere below this node (sorted).
  const std::vector<std::string>& env_names() const { return env_names_; }

  std::size_t hash() const { return hash_; }
  std::string to_string() const;

private:
  friend class Factory;
  NodeKind kind_ = NodeKind::True;
  std::vector<FormulaPtr> children_;
  std::vector<std::string> vars_;
  std::vector<Term> terms_;
  std::string name_;
  std::vector<std::string> free_vars_;
  std::vector<std::string> env_names_;
  std::size_t hash_ = 0;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(std::vector<FormulaPtr> xs);
FormulaPtr f_or(std::vector<FormulaPtr> xs);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b);
FormulaPtr f_exists(std::vector<std::string> vars, FormulaPtr body);
FormulaPtr f_forall(std::vector<std::string> vars, FormulaPtr body);
FormulaPtr f_prefix(Term x, Term y);
FormulaPtr f_succp(Term x, Term y);
FormulaPtr f_eqlen(Term x, Term y);
FormulaPtr f_last(std::string symbol, Term x);
FormulaPtr f_eq(Term x, Term y);
FormulaPtr f_in_lang(Term x, std::string lang);
FormulaPtr f_add(Term x, Term z, Term y);
FormulaPtr f_rel_app(std::string name, std::vector<Term> args);

// Parses the formula surface grammar:
//   phi  ::= "true" | "false" | "!" phi | phi ("&"|"|"|"=>"|"<=>") phi
//          | ("E"|"A") var{,var} "." phi | "(" phi ")" | atom
//   atom ::= t "=" t | t "<=p" t | "succp(" t "," t ")" | "eqlen(" t "," t ")"
//          | "last_" sym "(" t ")" | t "in" "lang(" name ")"
//          | "add(" t "," t "," t ")" | name "(" t {"," t} ")"
//   t    ::= var | quoted-string | numeral
// Precedence: ! > & > | > => (right-assoc) > <=>. Numeral literals are bare
// binary strings read most-significant-bit first.
FormulaPtr parse_formula(const std::string& text);

} // namespace probisim::logic

#endif
