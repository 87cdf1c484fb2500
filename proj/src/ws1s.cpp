#include "probisim/ws1s.hpp"

#include <sstream>

namespace probisim::logic {

namespace {

void render(const Formula& f, std::ostringstream& out);

std::string set_var(const std::string& v) { return "X_" + v; }

// A literal word w denotes the set whose characteristic string is w.1.
std::string literal_set(const Word& w) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] == 1) {
      if (!first) out << ',';
      out << i;
      first = false;
    }
  if (!first) out << ',';
  out << w.size() << '}';
  return out.str();
}

std::string term_set(const Term& t, const Alphabet& base) {
  switch (t.kind) {
    case Term::Kind::Var:
      return set_var(t.text);
    case Term::Kind::StrLit:
      return literal_set(base.parse_word(t.text));
    case Term::Kind::NumLit:
      return literal_set(parse_surface_numeral(t.text, base));
  }
  return "";
}

const Alphabet* g_base = nullptr;

void render_binary(const Formula& f, std::ostringstream& out, const char* op) {
  out << '(';
  render(*f.children()[0], out);
  out << ' ' << op << ' ';
  render(*f.children()[1], out);
  out << ')';
}

void render(const Formula& f, std::ostringstream& out) {
  const Alphabet& base = *g_base;
  switch (f.kind()) {
    case NodeKind::True:
      out << "true";
      break;
    case NodeKind::False:
      out << "false";
      break;
    case NodeKind::Not:
      out << "~(";
      render(*f.children()[0], out);
      out << ')';
      break;
    case NodeKind::And:
    case NodeKind::Or: {
      const char* op = f.kind() == NodeKind::And ? "&" : "|";
      out << '(';
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        if (i) out << ' ' << op << ' ';
        render(*f.children()[i], out);
      }
      out << ')';
      break;
    }
    case NodeKind::Implies:
      render_binary(f, out, "=>");
      break;
    case NodeKind::Iff:
      render_binary(f, out, "<=>");
      break;
    case NodeKind::Exists:
    case NodeKind::Forall: {
      bool ex = f.kind() == NodeKind::Exists;
      out << '(';
      for (const std::string& v : f.quantified())
        out << (ex ? "ex2 " : "all2 ") << set_var(v) << ": ";
      // every string maps to a nonempty set
      out << '(';
      for (std::size_t i = 0; i < f.quantified().size(); ++i) {
        if (i) out << " & ";
        out << "nonempty(" << set_var(f.quantified()[i]) << ')';
      }
      out << (ex ? " & " : " => ");
      render(*f.children()[0], out);
      out << "))";
      break;
    }
    case NodeKind::Prefix:
      out << "Pref(" << term_set(f.terms()[0], base) << ", " << term_set(f.terms()[1], base)
          << ')';
      break;
    case NodeKind::SuccP:
      out << "Succp(" << term_set(f.terms()[0], base) << ", "
          << term_set(f.terms()[1], base) << ')';
      break;
    case NodeKind::EqLen:
      out << "EqL(" << term_set(f.terms()[0], base) << ", " << term_set(f.terms()[1], base)
          << ')';
      break;
    case NodeKind::Last: {
      if (f.name() != "0" && f.name() != "1")
        fail(ErrorCode::UnsupportedAlphabet, "export_ws1s: last_" + f.name());
      out << "L_" << f.name() << '(' << term_set(f.terms()[0], base) << ')';
      break;
    }
    case NodeKind::Eq:
      out << '(' << term_set(f.terms()[0], base) << " = " << term_set(f.terms()[1], base)
          << ')';
      break;
    case NodeKind::InLang:
    case NodeKind::RelApp:
      fail(ErrorCode::UnsupportedAtom,
           "export_ws1s: named relation '" + f.name() + "' has no exported definition");
    case NodeKind::Add:
      fail(ErrorCode::UnsupportedAtom, "export_ws1s: add has no exported definition");
  }
}

} // namespace

std::string export_ws1s(const FormulaPtr& f, const Environment& env) {
  if (!(env.base().size() == 2 && env.base().index_of("0") == 0 &&
        env.base().index_of("1") == 1))
    fail(ErrorCode::UnsupportedAlphabet,
         "export_ws1s: needs the binary alphabet [0, 1] (block-encode first)");
  std::ostringstream out;
  out << "ws1s;\n";
  out << "# interpretation: a word w is the finite set whose characteristic\n";
  out << "# string is w.1 (indices start at 0)\n";
  out << "pred m(var1 x, var2 X) = x in X & (all1 y: y in X => y <= x);\n";
  out << "pred nonempty(var2 X) = ex1 x: x in X;\n";
  out << "pred Pref(var2 X, var2 Y) = ex1 x: ex1 y: m(x,X) & m(y,Y) & x <= y & (all1 z: z < x => (z in X <=> z in Y));\n";
  out << "pred EqL(var2 X, var2 Y) = ex1 x: ex1 y: m(x,X) & m(y,Y) & x = y;\n";
  out << "pred L_1(var2 X) = ex1 x: m(x,X) & x >= 1 & (x-1) in X;\n";
  out << "pred L_0(var2 X) = ex1 x: m(x,X) & x >= 1 & ~((x-1) in X);\n";
  out << "pred Succp(var2 X, var2 Y) = Pref(X,Y) & (ex1 x: ex1 y: m(x,X) & m(y,Y) & y = x+1);\n";
  g_base = &env.base();
  std::ostringstream body;
  render(*f, body);
  g_base = nullptr;
  for (const std::string& v : f->free_vars()) out << "var2 " << set_var(v) << ";\n";
  for (const std::string& v : f->free_vars())
    out << "assert nonempty(" << set_var(v) << ");\n";
  out << body.str() << ";\n";
  return out.str();
}

} // namespace probisim::logic
