#include "webnav/text.hpp"

#include <cstdio>

namespace webnav {
namespace {

bool IsTokenByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char Lower(char c) { return (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c; }

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (IsTokenByte(static_cast<unsigned char>(c))) {
      current.push_back(Lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t CountTokens(std::string_view text) {
  std::size_t count = 0;
  bool inside = false;
  for (char c : text) {
    const bool token = IsTokenByte(static_cast<unsigned char>(c));
    if (token && !inside) ++count;
    inside = token;
  }
  return count;
}

std::vector<Span> SplitSentences(std::string_view text) {
  std::vector<Span> spans;
  const std::size_t n = text.size();

  auto emit = [&](std::size_t begin, std::size_t end) {
    while (begin < end && IsSpace(text[begin])) ++begin;
    while (end > begin && IsSpace(text[end - 1])) --end;
    if (begin < end) {
      spans.push_back(
          {static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    }
  };

  std::size_t begin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c == '\n') {
      emit(begin, i);
      begin = i + 1;
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 == n) {
      emit(begin, n);
      begin = n;
      break;
    }
    if (!IsSpace(text[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < n && IsSpace(text[j]) && text[j] != '\n') ++j;
    if (j == n || text[j] == '\n' || (text[j] >= 'A' && text[j] <= 'Z')) {
      emit(begin, i + 1);
      begin = i + 1;
    }
  }
  emit(begin, n);
  return spans;
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string ToHex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace webnav
