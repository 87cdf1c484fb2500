#ifndef PROBISIM_WS1S_HPP
#define PROBISIM_WS1S_HPP

#include <string>

#include "probisim/compiler.hpp"
#include "probisim/formula.hpp"

namespace probisim::logic {

// Renders the formula as a self-contained WS1S text under the word-to-set
// interpretation f(w) = the set whose characteristic string is w.1, with one
// second-order variable per string variable. Requires the binary alphabet
// {0,1}; named relations and arithmetic atoms have no exported definition.
std::string export_ws1s(const FormulaPtr& f, const Environment& env);

} // namespace probisim::logic

#endif
