#include "probisim/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace probisim::logic {

Term var(std::string name) { return {Term::Kind::Var, std::move(name)}; }
Term str_lit(std::string text) { return {Term::Kind::StrLit, std::move(text)}; }
Term num_lit(std::string digits) { return {Term::Kind::NumLit, std::move(digits)}; }

namespace {

void merge_first_occurrence(std::vector<std::string>& into,
                            const std::vector<std::string>& more) {
  for (const std::string& v : more)
    if (std::find(into.begin(), into.end(), v) == into.end()) into.push_back(v);
}

void merge_sorted_names(std::vector<std::string>& into, const std::vector<std::string>& more) {
  for (const std::string& n : more)
    if (!std::binary_search(into.begin(), into.end(), n)) {
      into.insert(std::upper_bound(into.begin(), into.end(), n), n);
    }
}

std::size_t hash_mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

} // namespace

class Factory {
public:
  static Factory& instance() {
    static Factory f;
    return f;
  }

  FormulaPtr intern(NodeKind kind, std::vector<FormulaPtr> children,
                    std::vector<std::string> vars, std::vector<Term> terms,
                    std::string name) {
    auto node = std::make_shared<Formula>();
    auto* f = const_cast<Formula*>(node.get());
    f->kind_ = kind;
    f->children_ = std::move(children);
    f->vars_ = std::move(vars);
    f->terms_ = std::move(terms);
    f->name_ = std::move(name);

    std::size_t h = static_cast<std::size_t>(kind) * 1000003;
    for (const auto& c : f->children_) h = hash_mix(h, c->hash());
    for (const auto& v : f->vars_) h = hash_mix(h, std::hash<std::string>{}(v));
    for (const auto& t : f->terms_)
      h = hash_mix(h, std::hash<std::string>{}(t.text) * 3 + static_cast<std::size_t>(t.kind));
    h = hash_mix(h, std::hash<std::string>{}(f->name_));
    f->hash_ = h;

    // free variables, first occurrence order
    switch (kind) {
      case NodeKind::Exists:
      case NodeKind::Forall: {
        std::vector<std::string> fv = f->children_[0]->free_vars();
        for (const std::string& b : f->vars_)
          fv.erase(std::remove(fv.begin(), fv.end(), b), fv.end());
        f->free_vars_ = std::move(fv);
        break;
      }
      default: {
        for (const Term& t : f->terms_)
          if (t.kind == Term::Kind::Var)
            merge_first_occurrence(f->free_vars_, {t.text});
        for (const auto& c : f->children_) merge_first_occurrence(f->free_vars_, c->free_vars());
        break;
      }
    }
    if (kind == NodeKind::InLang || kind == NodeKind::RelApp)
      f->env_names_.push_back(f->name_);
    for (const auto& c : f->children_) merge_sorted_names(f->env_names_, c->env_names());

    std::lock_guard<std::mutex> lock(mu_);
    auto it = table_.find(node);
    if (it != table_.end()) return *it;
    table_.insert(node);
    return node;
  }

private:
  struct Hash {
    std::size_t operator()(const FormulaPtr& f) const { return f->hash(); }
  };
  struct Eq {
    bool operator()(const FormulaPtr& a, const FormulaPtr& b) const {
      return a->kind() == b->kind() && a->children() == b->children() &&
             a->quantified() == b->quantified() && a->terms() == b->terms() &&
             a->name() == b->name();
    }
  };
  std::mutex mu_;
  std::unordered_set<FormulaPtr, Hash, Eq> table_;
};

namespace {

FormulaPtr mk(NodeKind kind, std::vector<FormulaPtr> children = {},
              std::vector<std::string> vars = {}, std::vector<Term> terms = {},
              std::string name = {}) {
  return Factory::instance().intern(kind, std::move(children), std::move(vars),
                                    std::move(terms), std::move(name));
}

} // namespace

FormulaPtr f_true() { return mk(NodeKind::True); }
FormulaPtr f_false() { return mk(NodeKind::False); }
FormulaPtr f_not(FormulaPtr a) {
  if (a->kind() == NodeKind::Not) return a->children()[0];
  if (a->kind() == NodeKind::True) return f_false();
  if (a->kind() == NodeKind::False) return f_true();
  return mk(NodeKind::Not, {std::move(a)});
}

FormulaPtr f_and(std::vector<FormulaPtr> xs) {
  if (xs.empty()) return f_true();
  if (xs.size() == 1) return xs[0];
  return mk(NodeKind::And, std::move(xs));
}

FormulaPtr f_or(std::vector<FormulaPtr> xs) {
  if (xs.empty()) return f_false();
  if (xs.size() == 1) return xs[0];
  return mk(NodeKind::Or, std::move(xs));
}

FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  return f_and(std::vector<FormulaPtr>{std::move(a), std::move(b)});
}
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return f_or(std::vector<FormulaPtr>{std::move(a), std::move(b)});
}
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return mk(NodeKind::Implies, {std::move(a), std::move(b)});
}
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b) {
  return mk(NodeKind::Iff, {std::move(a), std::move(b)});
}
FormulaPtr f_exists(std::vector<std::string> vars, FormulaPtr body) {
  if (vars.empty()) return body;
  return mk(NodeKind::Exists, {std::move(body)}, std::move(vars));
}
FormulaPtr f_forall(std::vector<std::string> vars, FormulaPtr body) {
  if (vars.empty()) return body;
  return mk(NodeKind::Forall, {std::move(body)}, std::move(vars));
}
FormulaPtr f_prefix(Term x, Term y) {
  return mk(NodeKind::Prefix, {}, {}, {std::move(x), std::move(y)});
}
FormulaPtr f_succp(Term x, Term y) {
  return mk(NodeKind::SuccP, {}, {}, {std::move(x), std::move(y)});
}
FormulaPtr f_eqlen(Term x, Term y) {
  return mk(NodeKind::EqLen, {}, {}, {std::move(x), std::move(y)});
}
FormulaPtr f_last(std::string symbol, Term x) {
  return mk(NodeKind::Last, {}, {}, {std::move(x)}, std::move(symbol));
}
FormulaPtr f_eq(Term x, Term y) {
  return mk(NodeKind::Eq, {}, {}, {std::move(x), std::move(y)});
}
FormulaPtr f_in_lang(Term x, std::string lang) {
  return mk(NodeKind::InLang, {}, {}, {std::move(x)}, std::move(lang));
}
FormulaPtr f_add(Term x, Term z, Term y) {
  return mk(NodeKind::Add, {}, {}, {std::move(x), std::move(z), std::move(y)});
}
FormulaPtr f_rel_app(std::string name, std::vector<Term> args) {
  return mk(NodeKind::RelApp, {}, {}, std::move(args), std::move(name));
}

// --- printing ---------------------------------------------------------------

namespace {

std::string term_str(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var:
      return t.text;
    case Term::Kind::StrLit:
      return "\"" + t.text + "\"";
    case Term::Kind::NumLit:
      return t.text;
  }
  return "?";
}

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Iff:
      return 1;
    case NodeKind::Implies:
      return 2;
    case NodeKind::Or:
      return 3;
    case NodeKind::And:
      return 4;
    case NodeKind::Not:
      return 5;
    case NodeKind::Exists:
    case NodeKind::Forall:
      return 0;
    default:
      return 6;
  }
}

void print(const Formula& f, std::ostringstream& out, int parent_prec) {
  int prec = precedence(f.kind());
  bool paren = prec < parent_prec;
  auto open = [&] {
    if (paren) out << '(';
  };
  auto close = [&] {
    if (paren) out << ')';
  };
  switch (f.kind()) {
    case NodeKind::True:
      out << "true";
      break;
    case NodeKind::False:
      out << "false";
      break;
    case NodeKind::Not:
      out << '!';
      print(*f.children()[0], out, prec + 1);
      break;
    case NodeKind::And:
    case NodeKind::Or: {
      open();
      const char* op = f.kind() == NodeKind::And ? " & " : " | ";
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        if (i) out << op;
        print(*f.children()[i], out, prec + 1);
      }
      close();
      break;
    }
    case NodeKind::Implies:
      open();
      print(*f.children()[0], out, prec + 1);
      out << " => ";
      print(*f.children()[1], out, prec);
      close();
      break;
    case NodeKind::Iff:
      open();
      print(*f.children()[0], out, prec + 1);
      out << " <=> ";
      print(*f.children()[1], out, prec + 1);
      close();
      break;
    case NodeKind::Exists:
    case NodeKind::Forall: {
      open();
      out << (f.kind() == NodeKind::Exists ? "E " : "A ");
      for (std::size_t i = 0; i < f.quantified().size(); ++i) {
        if (i) out << ", ";
        out << f.quantified()[i];
      }
      out << " . ";
      print(*f.children()[0], out, 0);
      close();
      break;
    }
    case NodeKind::Prefix:
      out << term_str(f.terms()[0]) << " <=p " << term_str(f.terms()[1]);
      break;
    case NodeKind::SuccP:
      out << "succp(" << term_str(f.terms()[0]) << ", " << term_str(f.terms()[1]) << ")";
      break;
    case NodeKind::EqLen:
      out << "eqlen(" << term_str(f.terms()[0]) << ", " << term_str(f.terms()[1]) << ")";
      break;
    case NodeKind::Last:
      out << "last_" << f.name() << "(" << term_str(f.terms()[0]) << ")";
      break;
    case NodeKind::Eq:
      out << term_str(f.terms()[0]) << " = " << term_str(f.terms()[1]);
      break;
    case NodeKind::InLang:
      out << term_str(f.terms()[0]) << " in lang(" << f.name() << ")";
      break;
    case NodeKind::Add:
      out << "add(" << term_str(f.terms()[0]) << ", " << term_str(f.terms()[1]) << ", "
          << term_str(f.terms()[2]) << ")";
      break;
    case NodeKind::RelApp: {
      out << f.name() << "(";
      for (std::size_t i = 0; i < f.terms().size(); ++i) {
        if (i) out << ", ";
        out << term_str(f.terms()[i]);
      }
      out << ")";
      break;
    }
  }
}

} // namespace

std::string Formula::to_string() const {
  std::ostringstream out;
  print(*this, out, 0);
  return out.str();
}

// --- parsing ----------------------------------------------------------------

namespace {

struct Token {
  enum class Kind { Ident, Number, String, Punct, End };
  Kind kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(&text) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  struct Mark {
    std::size_t i;
    Token tok;
  };
  Mark mark() const { return {i_, tok_}; }
  void rewind(const Mark& m) {
    i_ = m.i;
    tok_ = m.tok;
  }

private:
  void advance() {
    const std::string& text = *text_;
    while (i_ < text.size() && std::isspace(static_cast<unsigned char>(text[i_]))) ++i_;
    tok_.pos = i_;
    if (i_ >= text.size()) {
      tok_ = {Token::Kind::End, "", i_};
      return;
    }
    char c = text[i_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      tok_ = {Token::Kind::Number, text.substr(i_, j - i_), i_};
      i_ = j;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
              text[j] == '\''))
        ++j;
      tok_ = {Token::Kind::Ident, text.substr(i_, j - i_), i_};
      i_ = j;
      return;
    }
    if (c == '"') {
      std::size_t j = i_ + 1;
      while (j < text.size() && text[j] != '"') ++j;
      if (j >= text.size())
        fail(ErrorCode::SyntaxError, "unterminated string literal at offset " +
                                         std::to_string(i_));
      tok_ = {Token::Kind::String, text.substr(i_ + 1, j - i_ - 1), i_};
      i_ = j + 1;
      return;
    }
    // multi-char punctuation first
    static const char* puncts[] = {"<=>", "<=p", "=>", "(", ")", ",", ".", "&", "|", "!", "="};
    for (const char* p : puncts) {
      std::size_t n = std::strlen(p);
      if (text.compare(i_, n, p) == 0) {
        tok_ = {Token::Kind::Punct, p, i_};
        i_ += n;
        return;
      }
    }
    fail(ErrorCode::SyntaxError,
         "unexpected character '" + std::string(1, c) + "' at offset " + std::to_string(i_));
  }

  const std::string* text_;
  std::size_t i_ = 0;
  Token tok_;
};

class Parser {
public:
  explicit Parser(const std::string& text) : lex_(text) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_iff();
    expect_end();
    return f;
  }

private:
  [[noreturn]] void err(const std::string& expected) {
    const Token& t = lex_.peek();
    fail(ErrorCode::SyntaxError, "syntax error at offset " + std::to_string(t.pos) +
                                     ": expected " + expected +
                                     (t.kind == Token::Kind::End ? ", got end of input"
                                                                 : ", got '" + t.text + "'"));
  }

  bool at_punct(const char* p) {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
  }
  void eat_punct(const char* p) {
    if (!at_punct(p)) err(std::string("'") + p + "'");
    lex_.take();
  }
  void expect_end() {
    if (lex_.peek().kind != Token::Kind::End) err("end of input");
  }

  FormulaPtr parse_iff() {
    FormulaPtr a = parse_implies();
    while (at_punct("<=>")) {
      lex_.take();
      a = f_iff(a, parse_implies());
    }
    return a;
  }

  FormulaPtr parse_implies() {
    FormulaPtr a = parse_or();
    if (at_punct("=>")) {
      lex_.take();
      return f_implies(a, parse_implies());
    }
    return a;
  }

  FormulaPtr parse_or() {
    FormulaPtr a = parse_and();
    std::vector<FormulaPtr> xs{a};
    while (at_punct("|")) {
      lex_.take();
      xs.push_back(parse_and());
    }
    return xs.size() == 1 ? xs[0] : f_or(std::move(xs));
  }

  FormulaPtr parse_and() {
    FormulaPtr a = parse_unary();
    std::vector<FormulaPtr> xs{a};
    while (at_punct("&")) {
      lex_.take();
      xs.push_back(parse_unary());
    }
    return xs.size() == 1 ? xs[0] : f_and(std::move(xs));
  }

  FormulaPtr parse_unary() {
    const Token& t = lex_.peek();
    if (at_punct("!")) {
      lex_.take();
      return f_not(parse_unary());
    }
    if (at_punct("(")) {
      lex_.take();
      FormulaPtr f = parse_iff();
      eat_punct(")");
      return f;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "true") {
        lex_.take();
        return f_true();
      }
      if (t.text == "false") {
        lex_.take();
        return f_false();
      }
      if (t.text == "E" || t.text == "A") {
        bool exists = t.text == "E";
        lex_.take();
        std::vector<std::string> vars;
        while (true) {
          if (lex_.peek().kind != Token::Kind::Ident) err("variable name");
          vars.push_back(lex_.take().text);
          if (at_punct(",")) {
            lex_.take();
            continue;
          }
          break;
        }
        eat_punct(".");
        FormulaPtr body = parse_iff();
        return exists ? f_exists(std::move(vars), body) : f_forall(std::move(vars), body);
      }
    }
    return parse_atom();
  }

  Term parse_term() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Ident) return var(lex_.take().text);
    if (t.kind == Token::Kind::String) return str_lit(lex_.take().text);
    if (t.kind == Token::Kind::Number) {
      Token tok = lex_.take();
      for (char c : tok.text)
        if (c != '0' && c != '1')
          fail(ErrorCode::SyntaxError, "numeral literal must be binary at offset " +
                                           std::to_string(tok.pos));
      return num_lit(tok.text);
    }
    err("term");
  }

  FormulaPtr parse_atom() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Ident) {
      const std::string& id = t.text;
      if (id == "succp" || id == "eqlen" || id == "add") {
        std::string kw = lex_.take().text;
        eat_punct("(");
        std::vector<Term> args;
        args.push_back(parse_term());
        eat_punct(",");
        args.push_back(parse_term());
        if (kw == "add") {
          eat_punct(",");
          args.push_back(parse_term());
        }
        eat_punct(")");
        if (kw == "succp") return f_succp(args[0], args[1]);
        if (kw == "eqlen") return f_eqlen(args[0], args[1]);
        return f_add(args[0], args[1], args[2]);
      }
      if (id.rfind("last_", 0) == 0) {
        std::string sym = id.substr(5);
        if (sym.empty()) err("symbol after last_");
        lex_.take();
        eat_punct("(");
        Term x = parse_term();
        eat_punct(")");
        return f_last(sym, x);
      }
      // RelApp if directly followed by '(' — otherwise fall through to a
      // term-led atom (=, <=p, in ...).
      Lexer::Mark save = lex_.mark();
      Token name = lex_.take();
      if (at_punct("(")) {
        lex_.take();
        std::vector<Term> args;
        args.push_back(parse_term());
        while (at_punct(",")) {
          lex_.take();
          args.push_back(parse_term());
        }
        eat_punct(")");
        return f_rel_app(name.text, std::move(args));
      }
      lex_.rewind(save);
    }
    Term a = parse_term();
    if (at_punct("=")) {
      lex_.take();
      return f_eq(a, parse_term());
    }
    if (at_punct("<=p")) {
      lex_.take();
      return f_prefix(a, parse_term());
    }
    if (lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == "in") {
      lex_.take();
      if (lex_.peek().kind != Token::Kind::Ident || lex_.peek().text != "lang") err("'lang'");
      lex_.take();
      eat_punct("(");
      if (lex_.peek().kind != Token::Kind::Ident) err("language name");
      std::string name = lex_.take().text;
      eat_punct(")");
      return f_in_lang(a, std::move(name));
    }
    err("atom operator ('=', '<=p' or 'in')");
  }

  Lexer lex_;
};

} // namespace

FormulaPtr parse_formula(const std::string& text) { return Parser(text).parse(); }

} // namespace probisim::logic
