#pragma once

// Keccak-256 as used by Ethereum (original Keccak padding 0x01, not the
// FIPS-202 SHA3 padding 0x06).

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace partisan {

using Hash256 = std::array<std::uint8_t, 32>;

namespace detail {

inline void keccak_f1600(std::array<std::uint64_t, 25>& st) {
  static constexpr std::uint64_t kRoundConstants[24] = {
      0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
      0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
      0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
      0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
      0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
      0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
      0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
      0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};
  static constexpr int kRotations[24] = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                                         27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};
  static constexpr int kPi[24] = {10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
                                  15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1};
  auto rotl = [](std::uint64_t x, int n) { return (x << n) | (x >> (64 - n)); };

  for (int round = 0; round < 24; ++round) {
    std::uint64_t bc[5];
    for (int i = 0; i < 5; ++i) bc[i] = st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20];
    for (int i = 0; i < 5; ++i) {
      std::uint64_t t = bc[(i + 4) % 5] ^ rotl(bc[(i + 1) % 5], 1);
      for (int j = 0; j < 25; j += 5) st[j + i] ^= t;
    }
    std::uint64_t t = st[1];
    for (int i = 0; i < 24; ++i) {
      int j = kPi[i];
      std::uint64_t tmp = st[j];
      st[j] = rotl(t, kRotations[i]);
      t = tmp;
    }
    for (int j = 0; j < 25; j += 5) {
      for (int i = 0; i < 5; ++i) bc[i] = st[j + i];
      for (int i = 0; i < 5; ++i) st[j + i] ^= (~bc[(i + 1) % 5]) & bc[(i + 2) % 5];
    }
    st[0] ^= kRoundConstants[round];
  }
}

}  // namespace detail

inline Hash256 keccak256(std::span<const std::uint8_t> input) {
  constexpr std::size_t kRate = 136;
  std::array<std::uint64_t, 25> st{};
  auto absorb_block = [&st](const std::uint8_t* block) {
    for (std::size_t i = 0; i < kRate / 8; ++i) {
      std::uint64_t lane = 0;
      for (int b = 0; b < 8; ++b) lane |= static_cast<std::uint64_t>(block[8 * i + b]) << (8 * b);
      st[i] ^= lane;
    }
    detail::keccak_f1600(st);
  };

  std::size_t offset = 0;
  for (; input.size() - offset >= kRate; offset += kRate) absorb_block(input.data() + offset);

  std::array<std::uint8_t, kRate> last{};
  std::size_t rem = input.size() - offset;
  for (std::size_t i = 0; i < rem; ++i) last[i] = input[offset + i];
  last[rem] ^= 0x01;
  last[kRate - 1] ^= 0x80;
  absorb_block(last.data());

  Hash256 out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(st[i / 8] >> (8 * (i % 8)));
  return out;
}

inline Hash256 keccak256(std::string_view text) {
  return keccak256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string to_hex(std::span<const std::uint8_t> bytes, bool prefix = true) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s = prefix ? "0x" : "";
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xF]);
  }
  return s;
}

}  // namespace partisan
