#ifndef PROBISIM_BASE_HPP
#define PROBISIM_BASE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace probisim {

// Error kinds mirror the failure modes of the public operations; `code` is
// stable so callers (CLI, tests) can dispatch without string matching.
enum class ErrorCode {
  AlphabetMismatch,
  BadTapeIndex,
  SyntaxError,
  UnboundName,
  ArityMismatch,
  MissingDigits,
  UnsupportedAtom,
  UnsupportedAlphabet,
  NotLengthPreserving,
  DomainsOverlap,
  WeightMismatch,
  StartUnknown,
  SeedNotOnTerminals,
  CapExceeded,
  SliceBudget,
  ResourceExceeded,
  BadInput,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

} // namespace probisim

#endif
