#include "probisim/automaton_io.hpp"

#include <map>
#include <sstream>

namespace probisim::automata {

std::string serialize(const RelationAutomaton& a0) {
  RelationAutomaton a = trim(a0);
  const TapedAlphabet& ta = a.taped_alphabet();
  std::ostringstream out;
  out << "alphabet";
  for (const std::string& s : ta.base().symbols()) out << ' ' << s;
  out << "\ntapes " << ta.tapes() << '\n';
  std::vector<bool> is_init(a.num_states(), false);
  for (State s : a.initial_states()) is_init[s] = true;
  for (State s = 0; s < a.num_states(); ++s) {
    out << "state " << s;
    if (is_init[s]) out << " initial";
    if (a.finals()[s]) out << " final";
    out << '\n';
  }
  for (const Transition& t : a.transitions())
    out << "trans " << t.from << ' ' << ta.format(t.sym) << ' ' << t.to << '\n';
  return out.str();
}

RelationAutomaton parse_automaton(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Alphabet base;
  int tapes = -1;
  bool have_alphabet = false;
  struct RawTrans {
    State from, to;
    std::string sym;
  };
  std::vector<RawTrans> raw;
  std::map<State, std::pair<bool, bool>> states; // id -> (initial, final)
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw) || kw[0] == '#') continue;
    auto bad = [&](const std::string& what) {
      fail(ErrorCode::SyntaxError,
           "automaton line " + std::to_string(lineno) + ": " + what);
    };
    if (kw == "alphabet") {
      std::vector<std::string> syms;
      std::string s;
      while (ls >> s) syms.push_back(s);
      base = Alphabet(std::move(syms));
      have_alphabet = true;
    } else if (kw == "tapes") {
      if (!(ls >> tapes) || tapes < 1) bad("bad tape count");
    } else if (kw == "state") {
      State id;
      if (!(ls >> id)) bad("bad state id");
      auto& st = states[id];
      std::string flag;
      while (ls >> flag) {
        if (flag == "initial")
          st.first = true;
        else if (flag == "final")
          st.second = true;
        else
          bad("unknown state flag " + flag);
      }
    } else if (kw == "trans") {
      RawTrans t;
      if (!(ls >> t.from >> t.sym >> t.to)) bad("bad transition");
      raw.push_back(t);
      states[t.from];
      states[t.to];
    } else {
      bad("unknown declaration " + kw);
    }
  }
  if (!have_alphabet || tapes < 1)
    fail(ErrorCode::SyntaxError, "automaton file missing alphabet/tapes");
  TapedAlphabet ta(base, tapes);
  State n = 0;
  std::map<State, State> renum;
  for (auto& [id, st] : states) renum[id] = n++;
  std::vector<State> initial;
  std::vector<bool> finals(n, false);
  for (auto& [id, st] : states) {
    if (st.first) initial.push_back(renum[id]);
    finals[renum[id]] = st.second;
  }
  std::vector<Transition> trans;
  std::vector<int> comp(static_cast<std::size_t>(tapes));
  for (const RawTrans& t : raw) {
    std::string s = t.sym;
    if (s.size() < 2 || s.front() != '(' || s.back() != ')')
      fail(ErrorCode::SyntaxError, "bad tuple " + s);
    s = s.substr(1, s.size() - 2);
    std::size_t pos = 0;
    for (int i = 0; i < tapes; ++i) {
      std::size_t comma = s.find(',', pos);
      std::string tok = comma == std::string::npos ? s.substr(pos) : s.substr(pos, comma - pos);
      if (tok == "_")
        comp[static_cast<std::size_t>(i)] = ta.pad();
      else {
        int c = base.index_of(tok);
        if (c < 0) fail(ErrorCode::SyntaxError, "unknown symbol " + tok);
        comp[static_cast<std::size_t>(i)] = c;
      }
      pos = comma == std::string::npos ? s.size() : comma + 1;
    }
    trans.push_back({renum[t.from], ta.encode(comp), renum[t.to]});
  }
  return RelationAutomaton::make_sparse(std::move(ta), n, std::move(initial),
                                        std::move(finals), std::move(trans));
}

std::string to_dot(const RelationAutomaton& a0, const std::string& name) {
  RelationAutomaton a = trim(a0);
  const TapedAlphabet& ta = a.taped_alphabet();
  std::ostringstream out;
  out << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (State s : a.initial_states())
    out << "  init" << s << " [shape=point]; init" << s << " -> q" << s << ";\n";
  for (State s = 0; s < a.num_states(); ++s)
    if (a.finals()[s]) out << "  q" << s << " [shape=doublecircle];\n";
  // Merge parallel edges; cap the label list to keep graphs readable.
  std::map<std::pair<State, State>, std::vector<Symbol>> edges;
  for (const Transition& t : a.transitions()) edges[{t.from, t.to}].push_back(t.sym);
  for (auto& [e, syms] : edges) {
    out << "  q" << e.first << " -> q" << e.second << " [label=\"";
    for (std::size_t i = 0; i < syms.size() && i < 8; ++i) {
      if (i) out << ' ';
      out << ta.format(syms[i]);
    }
    if (syms.size() > 8) out << " ...";
    out << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

} // namespace probisim::automata
