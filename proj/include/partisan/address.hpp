#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "partisan/error.hpp"

namespace partisan {

namespace detail {

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::string_view strip_0x(std::string_view s) {
  if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  return s;
}

}  // namespace detail

/// 20-byte EVM account identifier. Ordering and equality are byte-wise,
/// which coincides with ordering of the lowercase hex rendering.
class Address {
 public:
  static constexpr std::size_t kSize = 20;
  using Bytes = std::array<std::uint8_t, kSize>;

  Address() = default;
  explicit Address(const Bytes& bytes) : bytes_(bytes) {}

  /// Accepts 40 hex digits with optional 0x prefix, any case.
  static std::optional<Address> try_parse(std::string_view text) {
    text = detail::strip_0x(text);
    if (text.size() != 2 * kSize) return std::nullopt;
    Bytes out{};
    for (std::size_t i = 0; i < kSize; ++i) {
      int hi = detail::hex_value(text[2 * i]);
      int lo = detail::hex_value(text[2 * i + 1]);
      if (hi < 0 || lo < 0) return std::nullopt;
      out[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return Address(out);
  }

  static Address parse(std::string_view text) {
    auto a = try_parse(text);
    if (!a) throw MalformedData("invalid address '" + std::string(text) + "'");
    return *a;
  }

  std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s = "0x";
    s.reserve(2 + 2 * kSize);
    for (auto b : bytes_) {
      s.push_back(digits[b >> 4]);
      s.push_back(digits[b & 0xF]);
    }
    return s;
  }

  const Bytes& bytes() const noexcept { return bytes_; }

  auto operator<=>(const Address&) const = default;

 private:
  Bytes bytes_{};
};

}  // namespace partisan

template <>
struct std::hash<partisan::Address> {
  std::size_t operator()(const partisan::Address& a) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto b : a.bytes()) h = (h ^ b) * 1099511628211ULL;
    return h;
  }
};
