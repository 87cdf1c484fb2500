#ifndef PROBISIM_ALPHABET_HPP
#define PROBISIM_ALPHABET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "probisim/base.hpp"

namespace probisim::automata {

using Symbol = std::uint64_t; // encoded tuple over (base ∪ {pad})^k
using State = std::uint32_t;

// A word over the base alphabet, stored as symbol indexes.
using Word = std::vector<int>;
// A word over a taped alphabet (convolution), stored as encoded tuples.
using ConvWord = std::vector<Symbol>;

// Ordered set of distinct symbol names. List position is the total order
// used for every lexicographic tie-break downstream.
class Alphabet {
public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& name(int i) const { return symbols_[static_cast<size_t>(i)]; }
  // -1 if absent.
  int index_of(std::string_view s) const;
  bool contains(std::string_view s) const { return index_of(s) >= 0; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  bool operator==(const Alphabet& o) const { return symbols_ == o.symbols_; }
  bool operator!=(const Alphabet& o) const { return !(*this == o); }

  // Words as text. If every symbol is a single character the compact form
  // (no separators) is used; otherwise symbols are space-separated.
  std::string format_word(const Word& w) const;
  Word parse_word(std::string_view text) const;

private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// k-tape alphabet over (base ∪ {⊥})^k minus the all-⊥ tuple. Component
// values range over 0..B-1 for base symbols and B for ⊥, so the integer
// encoding (component 0 most significant) coincides with the tuple order:
// lexicographic by component with ⊥ after every base symbol.
class TapedAlphabet {
public:
  TapedAlphabet() = default;
  TapedAlphabet(Alphabet base, int tapes);

  const Alphabet& base() const { return base_; }
  int tapes() const { return tapes_; }
  int pad() const { return base_.size(); } // component value of ⊥
  std::uint64_t num_symbols() const { return num_symbols_; }

  Symbol encode(std::span<const int> components) const;
  void decode(Symbol s, std::span<int> components) const;
  int component(Symbol s, int tape) const;
  // Bitmask of padded tapes (bit t set iff component t is ⊥).
  std::uint32_t pad_pattern(Symbol s) const;
  std::uint32_t num_pad_patterns() const { return (1u << tapes_) - 1; }

  std::string format(Symbol s) const; // "(a,_,b)"

  bool operator==(const TapedAlphabet& o) const {
    return base_ == o.base_ && tapes_ == o.tapes_;
  }
  bool operator!=(const TapedAlphabet& o) const { return !(*this == o); }

private:
  Alphabet base_;
  int tapes_ = 1;
  std::uint64_t num_symbols_ = 0;
  std::vector<std::uint64_t> weight_; // weight_[t] = (B+1)^(k-1-t)
};

// Juxtaposes k words, padding shorter ones with ⊥. All-empty input yields
// the empty word.
ConvWord convolve(const TapedAlphabet& ta, std::span<const Word> words);
// Exact inverse on valid convolutions.
std::vector<Word> deconvolve(const TapedAlphabet& ta, const ConvWord& w);

} // namespace probisim::automata

#endif
