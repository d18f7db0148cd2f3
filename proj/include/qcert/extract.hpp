#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qcert/bits.hpp"

namespace qcert {

inline constexpr int kDefaultSecurityMargin = 64;

struct ExtractionResult {
  std::vector<std::uint8_t> bits;  ///< one 0/1 entry per output bit
  std::size_t input_bits = 0;
  std::size_t output_bits = 0;
  std::uint64_t seed = 0;
};

/// Output length floor(k * h_min) - margin for k symbols; throws insufficient-entropy if <= 0.
std::int64_t extractable_bits(std::size_t symbols, double h_min, int security_margin = kDefaultSecurityMargin);

/// Toeplitz hashing of the concatenated patterns (bin 0 first). The matrix
/// diagonals are drawn from mt19937_64 seeded with `seed`.
ExtractionResult extract_bits(std::span<const ClickPattern> raw, double h_min, std::uint64_t seed,
                              int security_margin = kDefaultSecurityMargin);

/// Plain matrix-vector product over GF(2); reference for the word-parallel path.
std::vector<std::uint8_t> toeplitz_reference(std::span<const std::uint8_t> input, std::size_t output_bits,
                                             std::span<const std::uint8_t> diagonals);

/// The in + out - 1 diagonal bits used by extract_bits for this seed.
std::vector<std::uint8_t> toeplitz_diagonals(std::size_t input_bits, std::size_t output_bits, std::uint64_t seed);

}  // namespace qcert
