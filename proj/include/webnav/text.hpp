#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace webnav {

// Project-wide token normalization: ASCII letters are lowercased, any byte
// that is not an ASCII alphanumeric splits tokens, empty tokens are dropped.
// Bytes >= 0x80 are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> Tokenize(std::string_view text);

// Number of tokens Tokenize would return, without allocating them.
std::size_t CountTokens(std::string_view text);

struct Span {
  std::uint32_t start = 0;
  std::uint32_t end = 0;  // exclusive

  bool operator==(const Span&) const = default;
};

// Sentence boundaries over `text`. A sentence ends at '.', '!' or '?' when
// followed by whitespace and then an uppercase letter, or by end of text.
// Newlines always end a sentence. Spans are trimmed of surrounding
// whitespace; empty sentences are skipped.
std::vector<Span> SplitSentences(std::string_view text);

// Small deterministic helpers shared by the samplers. Independent of the
// standard library's distribution implementations so that seeded output is
// identical across toolchains.
template <typename Rng>
std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  // Rejection sampling over the full 64-bit range.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename Rng>
double UniformReal(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// FNV-1a 64-bit; used to tie datasets and checkpoints to a graph file.
std::uint64_t Fnv1a64(std::string_view bytes);

std::string ToHex(std::uint64_t value);

}  // namespace webnav
