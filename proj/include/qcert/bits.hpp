#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace qcert {

/// Fixed-length binary word over time bins. Bin 0 is the first character of the
/// textual form ("1100" has pulses in bins 0 and 1).
class BitString {
 public:
  static constexpr int kMaxLength = 63;

  BitString() = default;
  BitString(std::uint64_t mask, int length);

  static BitString parse(std::string_view text);

  int length() const noexcept { return length_; }
  std::uint64_t mask() const noexcept { return mask_; }
  bool test(int bin) const noexcept { return (mask_ >> bin) & 1U; }
  int weight() const noexcept { return std::popcount(mask_); }
  std::string str() const;

  /// Index of the word when read as a binary number with bin 0 most significant.
  std::uint64_t lexicographic_index() const noexcept;
  static BitString from_lexicographic_index(std::uint64_t index, int length);

  friend bool operator==(const BitString&, const BitString&) = default;
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
    if (auto c = a.length_ <=> b.length_; c != 0) return c;
    return a.lexicographic_index() <=> b.lexicographic_index();
  }

 private:
  std::uint64_t mask_ = 0;
  int length_ = 0;
};

/// A prepared time-bin state: 1 = weak coherent pulse, 0 = vacuum.
using Codeword = BitString;
/// A detection record: 1 = click registered in that bin.
using ClickPattern = BitString;

}  // namespace qcert
