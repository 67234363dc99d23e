#pragma once

#include <bitset>
#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fla/error.hpp"

namespace fla {

/// Anything that looks like a fixed-length sequence of bits.
template <class T>
concept BitSequence = requires(const T& a, T b, std::size_t i) {
  { a.size() } -> std::convertible_to<std::size_t>;
  { a.test(i) } -> std::convertible_to<bool>;
  { b.flip(i) };
};

namespace detail {

inline char hex_digit(unsigned v) { return "0123456789abcdef"[v & 0xF]; }

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// MSB-first packing: bit 0 is the most significant bit of byte 0.
template <BitSequence B>
std::string to_hex(const B& bits) {
  const std::size_t n = bits.size();
  const std::size_t bytes = (n + 7) / 8;
  std::string out;
  out.reserve(bytes * 2);
  for (std::size_t byte = 0; byte < bytes; ++byte) {
    unsigned v = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t i = byte * 8 + k;
      v = (v << 1) | ((i < n && bits.test(i)) ? 1U : 0U);
    }
    out.push_back(hex_digit(v >> 4));
    out.push_back(hex_digit(v));
  }
  return out;
}

template <BitSequence B>
void from_hex(std::string_view hex, B& bits) {
  const std::size_t n = bits.size();
  const std::size_t bytes = (n + 7) / 8;
  if (hex.size() != bytes * 2) {
    throw Error(ErrorCode::BadGenotype, "expected " + std::to_string(bytes * 2) +
                                            " hex characters, got " + std::to_string(hex.size()));
  }
  for (std::size_t byte = 0; byte < bytes; ++byte) {
    const int hi = hex_value(hex[2 * byte]);
    const int lo = hex_value(hex[2 * byte + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::BadGenotype, "non-hex character in '" + std::string(hex) + "'");
    }
    const unsigned v = static_cast<unsigned>(hi * 16 + lo);
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t i = byte * 8 + k;
      const bool bit = (v >> (7 - k)) & 1U;
      if (i >= n) {
        if (bit) throw Error(ErrorCode::BadGenotype, "nonzero padding bits");
        continue;
      }
      if (bit != bits.test(i)) bits.flip(i);
    }
  }
}

}  // namespace detail

/// Dynamic-length bit string. Used for synthetic spaces (NK, ones-count)
/// where the length is a runtime parameter.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n) : bits_(n, false) {}

  /// Bit i takes bit i of `value` (least significant first).
  static BitString from_index(std::size_t n, std::uint64_t value) {
    BitString s(n);
    for (std::size_t i = 0; i < n && i < 64; ++i) s.bits_[i] = (value >> i) & 1U;
    return s;
  }

  static BitString from_hex(std::string_view hex, std::size_t n) {
    BitString s(n);
    detail::from_hex(hex, s);
    return s;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool v = true) { bits_[i] = v; }
  void flip(std::size_t i) { bits_[i] = !bits_[i]; }

  BitString flipped(std::size_t i) const {
    BitString copy = *this;
    copy.flip(i);
    return copy;
  }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (bool b : bits_) c += b ? 1 : 0;
    return c;
  }

  std::uint64_t to_index() const {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < size() && i < 64; ++i) v |= std::uint64_t{bits_[i]} << i;
    return v;
  }

  std::string hex() const { return detail::to_hex(*this); }

  friend bool operator==(const BitString&, const BitString&) = default;

  /// Lexicographic over bit positions with 0 < 1; matches hex string order.
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
    if (auto c = a.size() <=> b.size(); c != 0) return c;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a.bits_[i] != b.bits_[i]) return a.bits_[i] ? std::strong_ordering::greater
                                                      : std::strong_ordering::less;
    }
    return std::strong_ordering::equal;
  }

 private:
  std::vector<bool> bits_;
};

/// Hamming distance between two bit sequences of equal length.
template <BitSequence B>
std::size_t hamming(const B& a, const B& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, "hamming: lengths " + std::to_string(a.size()) +
                                               " and " + std::to_string(b.size()));
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a.test(i) != b.test(i)) ? 1 : 0;
  return d;
}

}  // namespace fla
