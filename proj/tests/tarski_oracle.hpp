// Test-only brute-force evaluator for formulas over the universal structure
// on the binary alphabet: every quantifier ranges over all words up to a
// fixed length, and satisfying-assignment sets are computed bottom-up as
// dense tables. Independent of the automaton compilation path.
#ifndef PROBISIM_TESTS_TARSKI_ORACLE_HPP
#define PROBISIM_TESTS_TARSKI_ORACLE_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "probisim/compiler.hpp"
#include "probisim/formula.hpp"

namespace tarski {

using probisim::logic::Formula;
using probisim::logic::FormulaPtr;
using probisim::logic::NodeKind;
using probisim::logic::Term;

struct Universe {
  std::vector<std::string> words; // all binary words, length-major lex
  explicit Universe(std::size_t max_len) {
    words.push_back("");
    std::size_t begin = 0;
    for (std::size_t len = 1; len <= max_len; ++len) {
      std::size_t end = words.size();
      for (std::size_t i = begin; i < end; ++i)
        for (char c : {'0', '1'}) words.push_back(words[i] + c);
      begin = end;
    }
  }
  int index(const std::string& w) const {
    auto it = std::find(words.begin(), words.end(), w);
    return it == words.end() ? -1 : static_cast<int>(it - words.begin());
  }
};

struct Table {
  std::vector<std::string> vars;
  std::vector<char> sat; // size |U|^vars
};

class Evaluator {
public:
  explicit Evaluator(const Universe& u) : u_(u) {}

  Table eval(const FormulaPtr& f) { return eval_node(*f); }

  bool holds_atom(NodeKind k, const std::string& a, const std::string& b,
                  const std::string& c, const std::string& name) const {
    switch (k) {
      case NodeKind::Prefix:
        return b.rfind(a, 0) == 0;
      case NodeKind::SuccP:
        return b.size() == a.size() + 1 && b.rfind(a, 0) == 0;
      case NodeKind::EqLen:
        return a.size() == b.size();
      case NodeKind::Eq:
        return a == b;
      case NodeKind::Last:
        return !a.empty() && a.substr(a.size() - 1) == name;
      case NodeKind::Add: {
        // canonical numerals, least-significant bit first on tapes
        auto value = [](const std::string& w) -> long long {
          if (w.empty()) return -1;
          if (w == "0") return 0;
          if (w.back() != '1') return -1;
          long long v = 0;
          for (std::size_t i = w.size(); i-- > 0;) v = v * 2 + (w[i] - '0');
          return v;
        };
        long long x = value(a), z = value(b), y = value(c);
        return x >= 0 && z >= 0 && y >= 0 && x + z == y;
      }
      default:
        return false;
    }
  }

private:
  const Universe& u_;

  std::size_t n() const { return u_.words.size(); }

  Table constant(bool v) {
    Table t;
    t.sat.assign(1, v ? 1 : 0);
    return t;
  }

  // Map a term to either a variable (index into vars) or a fixed word.
  struct Slot {
    int var = -1;
    std::string word;
  };

  Slot slot_of(const Term& t, const std::vector<std::string>& vars) const {
    Slot s;
    if (t.kind == Term::Kind::Var) {
      auto it = std::find(vars.begin(), vars.end(), t.text);
      s.var = static_cast<int>(it - vars.begin());
      return s;
    }
    if (t.kind == Term::Kind::StrLit) {
      s.word = t.text;
      return s;
    }
    // surface numeral, most significant first -> internal LSB-first word
    std::string w(t.text.rbegin(), t.text.rend());
    s.word = w;
    return s;
  }

  Table eval_atom(const Formula& f) {
    Table t;
    t.vars = f.free_vars();
    std::size_t size = 1;
    for (std::size_t i = 0; i < t.vars.size(); ++i) size *= n();
    t.sat.assign(size, 0);
    std::vector<Slot> slots;
    for (const Term& tm : f.terms()) slots.push_back(slot_of(tm, t.vars));
    std::vector<std::size_t> idx(t.vars.size(), 0);
    for (std::size_t flat = 0; flat < size; ++flat) {
      std::size_t rest = flat;
      for (std::size_t i = t.vars.size(); i-- > 0;) {
        idx[i] = rest % n();
        rest /= n();
      }
      auto word_of = [&](int which) -> const std::string& {
        static const std::string empty;
        if (which >= static_cast<int>(slots.size())) return empty;
        const Slot& s = slots[static_cast<std::size_t>(which)];
        if (s.var >= 0) return u_.words[idx[static_cast<std::size_t>(s.var)]];
        return s.word;
      };
      const std::string& a = word_of(0);
      const std::string& b = word_of(1);
      const std::string& c = word_of(2);
      if (holds_atom(f.kind(), a, b, c, f.name())) t.sat[flat] = 1;
    }
    return t;
  }

  // Expand a table to a superset variable list.
  Table expand(const Table& t, const std::vector<std::string>& vars) {
    if (t.vars == vars) return t;
    Table out;
    out.vars = vars;
    std::size_t size = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) size *= n();
    out.sat.assign(size, 0);
    std::vector<int> pos; // position of t.vars[i] in vars
    for (const std::string& v : t.vars)
      pos.push_back(static_cast<int>(std::find(vars.begin(), vars.end(), v) - vars.begin()));
    std::vector<std::size_t> idx(vars.size(), 0);
    for (std::size_t flat = 0; flat < size; ++flat) {
      std::size_t rest = flat;
      for (std::size_t i = vars.size(); i-- > 0;) {
        idx[i] = rest % n();
        rest /= n();
      }
      std::size_t tflat = 0;
      for (std::size_t i = 0; i < t.vars.size(); ++i)
        tflat = tflat * n() + idx[static_cast<std::size_t>(pos[i])];
      out.sat[flat] = t.sat[tflat];
    }
    return out;
  }

  Table eval_node(const Formula& f) {
    switch (f.kind()) {
      case NodeKind::True:
        return constant(true);
      case NodeKind::False:
        return constant(false);
      case NodeKind::Not: {
        Table t = eval_node(*f.children()[0]);
        for (auto& b : t.sat) b = !b;
        return t;
      }
      case NodeKind::And:
      case NodeKind::Or: {
        std::vector<std::string> vars = f.free_vars();
        Table acc;
        bool first = true;
        for (const auto& c : f.children()) {
          Table t = expand(eval_node(*c), vars);
          if (first) {
            acc = std::move(t);
            first = false;
            continue;
          }
          for (std::size_t i = 0; i < acc.sat.size(); ++i)
            acc.sat[i] = f.kind() == NodeKind::And ? (acc.sat[i] && t.sat[i])
                                                   : (acc.sat[i] || t.sat[i]);
        }
        if (first) return constant(f.kind() == NodeKind::And);
        return acc;
      }
      case NodeKind::Implies: {
        Table a = eval_node(*f.children()[0]);
        Table b = eval_node(*f.children()[1]);
        std::vector<std::string> vars = f.free_vars();
        a = expand(a, vars);
        b = expand(b, vars);
        for (std::size_t i = 0; i < a.sat.size(); ++i) a.sat[i] = !a.sat[i] || b.sat[i];
        return a;
      }
      case NodeKind::Iff: {
        Table a = eval_node(*f.children()[0]);
        Table b = eval_node(*f.children()[1]);
        std::vector<std::string> vars = f.free_vars();
        a = expand(a, vars);
        b = expand(b, vars);
        for (std::size_t i = 0; i < a.sat.size(); ++i)
          a.sat[i] = (a.sat[i] != 0) == (b.sat[i] != 0);
        return a;
      }
      case NodeKind::Exists:
      case NodeKind::Forall: {
        Table body = eval_node(*f.children()[0]);
        bool ex = f.kind() == NodeKind::Exists;
        for (const std::string& v : f.quantified()) {
          auto it = std::find(body.vars.begin(), body.vars.end(), v);
          if (it == body.vars.end()) continue;
          std::size_t pos = static_cast<std::size_t>(it - body.vars.begin());
          std::vector<std::string> vars2 = body.vars;
          vars2.erase(vars2.begin() + static_cast<long>(pos));
          Table out;
          out.vars = vars2;
          std::size_t size2 = 1;
          for (std::size_t i = 0; i < vars2.size(); ++i) size2 *= n();
          out.sat.assign(size2, ex ? 0 : 1);
          std::vector<std::size_t> idx(body.vars.size(), 0);
          std::size_t size = body.sat.size();
          for (std::size_t flat = 0; flat < size; ++flat) {
            std::size_t rest = flat;
            for (std::size_t i = body.vars.size(); i-- > 0;) {
              idx[i] = rest % n();
              rest /= n();
            }
            std::size_t oflat = 0;
            for (std::size_t i = 0; i < body.vars.size(); ++i)
              if (i != pos) oflat = oflat * n() + idx[i];
            if (ex) {
              if (body.sat[flat]) out.sat[oflat] = 1;
            } else {
              if (!body.sat[flat]) out.sat[oflat] = 0;
            }
          }
          body = std::move(out);
        }
        return body;
      }
      default:
        return eval_atom(f);
    }
  }
};

} // namespace tarski

#endif
