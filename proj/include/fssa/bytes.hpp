#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fssa/error.hpp"

namespace fssa {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Little-endian append-only encoder used by every wire structure.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u32(std::uint32_t v) { uint_le(v, 4); }

  void uint_le(std::uint64_t v, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i) {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

  // 4-byte little-endian length followed by the bytes.
  void length_prefixed(ByteView data) {
    require(data.size() <= UINT32_MAX, "length-prefixed field too large");
    u32(static_cast<std::uint32_t>(data.size()));
    raw(data);
  }

  const Bytes& bytes() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(uint_le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint_le(4)); }

  std::uint64_t uint_le(std::size_t width) {
    need(width);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += width;
    return v;
  }

  ByteView raw(std::size_t len) {
    need(len);
    ByteView out = data_.subspan(pos_, len);
    pos_ += len;
    return out;
  }

  Bytes length_prefixed() {
    const std::uint32_t len = u32();
    ByteView v = raw(len);
    return Bytes(v.begin(), v.end());
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool done() const noexcept { return pos_ == data_.size(); }

  void expect_done(const char* what) const {
    require(done(), std::string("trailing bytes after ") + what);
  }

 private:
  void need(std::size_t len) const {
    require(len <= remaining(), "truncated input");
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

inline std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    fail(ErrorCode::kInvalidArgument, "bad hex digit");
  };
  require(hex.size() % 2 == 0, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace fssa
