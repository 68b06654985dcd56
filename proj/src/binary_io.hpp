#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "webnav/error.hpp"

namespace webnav::internal {

static_assert(std::endian::native == std::endian::little,
              "binary containers assume a little-endian host");

class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) { Raw(&v, sizeof v); }
  void U64(std::uint64_t v) { Raw(&v, sizeof v); }
  void F32(float v) { Raw(&v, sizeof v); }

  void VarUint(std::uint64_t v) {
    while (v >= 0x80) {
      U8(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    U8(static_cast<std::uint8_t>(v));
  }
  void VarInt(std::int64_t v) {
    VarUint((static_cast<std::uint64_t>(v) << 1) ^
            static_cast<std::uint64_t>(v >> 63));
  }

  void Bytes(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void Raw(const void* data, std::size_t size) {
    out_.append(static_cast<const char*>(data), size);
  }

  const std::string& str() const { return out_; }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(std::string_view in, std::string what)
      : in_(in), what_(std::move(what)) {}

  std::uint8_t U8() {
    Need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t U32() { return Pod<std::uint32_t>(); }
  std::uint64_t U64() { return Pod<std::uint64_t>(); }
  float F32() { return Pod<float>(); }

  std::uint64_t VarUint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = U8();
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    Fail("varint too long");
  }
  std::int64_t VarInt() {
    const std::uint64_t z = VarUint();
    return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
  }

  std::string Bytes() {
    const std::uint32_t n = U32();
    Need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view Fixed(std::size_t n) {
    Need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == in_.size(); }
  std::size_t Remaining() const { return in_.size() - pos_; }

  [[noreturn]] void Fail(const std::string& why) const {
    throw DataError(what_ + ": " + why + " (offset " + std::to_string(pos_) +
                    ")");
  }

 private:
  template <typename T>
  T Pod() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) Fail("truncated");
  }

  std::string_view in_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view bytes);

}  // namespace webnav::internal
