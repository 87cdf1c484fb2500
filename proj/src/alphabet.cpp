#include "probisim/alphabet.hpp"

#include <algorithm>
#include <sstream>

namespace probisim::automata {

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) fail(ErrorCode::BadInput, "alphabet must be non-empty");
  for (size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty()) fail(ErrorCode::BadInput, "empty symbol name");
    if (symbols_[i] == "_")
      fail(ErrorCode::BadInput, "'_' is reserved for the pad symbol");
    auto [it, fresh] = index_.emplace(symbols_[i], static_cast<int>(i));
    (void)it;
    if (!fresh) fail(ErrorCode::BadInput, "duplicate symbol: " + symbols_[i]);
  }
}

int Alphabet::index_of(std::string_view s) const {
  auto it = index_.find(std::string(s));
  return it == index_.end() ? -1 : it->second;
}

std::string Alphabet::format_word(const Word& w) const {
  bool compact = std::all_of(symbols_.begin(), symbols_.end(),
                             [](const std::string& s) { return s.size() == 1; });
  std::string out;
  for (size_t i = 0; i < w.size(); ++i) {
    if (!compact && i > 0) out += ' ';
    out += name(w[i]);
  }
  return out;
}

Word Alphabet::parse_word(std::string_view text) const {
  Word w;
  if (text.find(' ') != std::string_view::npos) {
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) {
      int i = index_of(tok);
      if (i < 0) fail(ErrorCode::BadInput, "unknown symbol: " + tok);
      w.push_back(i);
    }
    return w;
  }
  // No spaces: try whole-string symbol first, then per-character split.
  if (text.empty()) return w;
  if (int i = index_of(text); i >= 0) {
    w.push_back(i);
    return w;
  }
  for (char c : text) {
    int i = index_of(std::string_view(&c, 1));
    if (i < 0)
      fail(ErrorCode::BadInput,
           "cannot tokenize literal '" + std::string(text) + "' over this alphabet");
    w.push_back(i);
  }
  return w;
}

TapedAlphabet::TapedAlphabet(Alphabet base, int tapes)
    : base_(std::move(base)), tapes_(tapes) {
  if (tapes_ < 1) fail(ErrorCode::BadInput, "tape count must be positive");
  if (tapes_ > 16) fail(ErrorCode::ResourceExceeded, "too many tapes");
  std::uint64_t b1 = static_cast<std::uint64_t>(base_.size()) + 1;
  std::uint64_t total = 1;
  weight_.assign(static_cast<size_t>(tapes_), 0);
  for (int t = tapes_ - 1; t >= 0; --t) {
    weight_[static_cast<size_t>(t)] = total;
    if (total > (1ull << 62) / b1)
      fail(ErrorCode::ResourceExceeded, "taped alphabet too large");
    total *= b1;
  }
  num_symbols_ = total - 1; // exclude all-pad
}

Symbol TapedAlphabet::encode(std::span<const int> components) const {
  std::uint64_t v = 0;
  bool all_pad = true;
  for (int t = 0; t < tapes_; ++t) {
    int c = components[static_cast<size_t>(t)];
    if (c < 0 || c > pad()) fail(ErrorCode::BadInput, "component out of range");
    if (c != pad()) all_pad = false;
    v += static_cast<std::uint64_t>(c) * weight_[static_cast<size_t>(t)];
  }
  if (all_pad) fail(ErrorCode::BadInput, "all-pad tuple is not a symbol");
  return static_cast<Symbol>(v);
}

void TapedAlphabet::decode(Symbol s, std::span<int> components) const {
  std::uint64_t v = s;
  for (int t = 0; t < tapes_; ++t) {
    components[static_cast<size_t>(t)] =
        static_cast<int>(v / weight_[static_cast<size_t>(t)]);
    v %= weight_[static_cast<size_t>(t)];
  }
}

int TapedAlphabet::component(Symbol s, int tape) const {
  return static_cast<int>((s / weight_[static_cast<size_t>(tape)]) %
                          (static_cast<std::uint64_t>(base_.size()) + 1));
}

std::uint32_t TapedAlphabet::pad_pattern(Symbol s) const {
  std::uint32_t m = 0;
  for (int t = 0; t < tapes_; ++t)
    if (component(s, t) == pad()) m |= (1u << t);
  return m;
}

std::string TapedAlphabet::format(Symbol s) const {
  std::string out = "(";
  for (int t = 0; t < tapes_; ++t) {
    if (t > 0) out += ',';
    int c = component(s, t);
    out += (c == pad()) ? "_" : base_.name(c);
  }
  out += ')';
  return out;
}

ConvWord convolve(const TapedAlphabet& ta, std::span<const Word> words) {
  if (static_cast<int>(words.size()) != ta.tapes())
    fail(ErrorCode::BadInput, "convolve: word count != tape count");
  size_t len = 0;
  for (const Word& w : words) len = std::max(len, w.size());
  ConvWord out;
  out.reserve(len);
  std::vector<int> comp(static_cast<size_t>(ta.tapes()));
  for (size_t i = 0; i < len; ++i) {
    for (int t = 0; t < ta.tapes(); ++t) {
      const Word& w = words[static_cast<size_t>(t)];
      comp[static_cast<size_t>(t)] = i < w.size() ? w[i] : ta.pad();
    }
    out.push_back(ta.encode(comp));
  }
  return out;
}

std::vector<Word> deconvolve(const TapedAlphabet& ta, const ConvWord& w) {
  std::vector<Word> out(static_cast<size_t>(ta.tapes()));
  for (Symbol s : w) {
    for (int t = 0; t < ta.tapes(); ++t) {
      int c = ta.component(s, t);
      if (c != ta.pad()) out[static_cast<size_t>(t)].push_back(c);
    }
  }
  return out;
}

} // namespace probisim::automata
