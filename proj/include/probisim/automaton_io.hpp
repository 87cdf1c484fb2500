#ifndef PROBISIM_AUTOMATON_IO_HPP
#define PROBISIM_AUTOMATON_IO_HPP

#include <string>

#include "probisim/automaton.hpp"

namespace probisim::automata {

// Textual exchange format, one declaration per line:
//   alphabet s1 s2 ...
//   tapes k
//   state i [initial] [final]
//   trans i (a,b,...) j        with `_` denoting the pad
// Lines starting with `#` are comments. Serialization trims the automaton
// and keeps the input numbering order (canonical when the input came out of
// determinize_minimize); parsing is whitespace-tolerant.
std::string serialize(const RelationAutomaton& a);
RelationAutomaton parse_automaton(const std::string& text);

std::string to_dot(const RelationAutomaton& a, const std::string& name = "automaton");

} // namespace probisim::automata

#endif
