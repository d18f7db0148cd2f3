#include "qcert/extract.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "qcert/error.hpp"

namespace qcert {

std::int64_t extractable_bits(std::size_t symbols, double h_min, int security_margin) {
  if (!(h_min > 0.0)) throw Error(Errc::insufficient_entropy, "min-entropy must be positive");
  const auto out = static_cast<std::int64_t>(std::floor(static_cast<double>(symbols) * h_min)) - security_margin;
  if (out <= 0) {
    throw Error(Errc::insufficient_entropy, std::to_string(symbols) + " symbols at " + std::to_string(h_min) +
                                                " bits leave nothing after a " + std::to_string(security_margin) +
                                                "-bit margin");
  }
  return out;
}

std::vector<std::uint8_t> toeplitz_diagonals(std::size_t input_bits, std::size_t output_bits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(input_bits + output_bits - 1);
  for (std::size_t i = 0; i < out.size(); i += 64) {
    const std::uint64_t word = rng();
    for (std::size_t j = 0; j < 64 && i + j < out.size(); ++j) out[i + j] = (word >> j) & 1U;
  }
  return out;
}

// T[i][j] = d[i - j + in - 1].
std::vector<std::uint8_t> toeplitz_reference(std::span<const std::uint8_t> input, std::size_t output_bits,
                                             std::span<const std::uint8_t> diagonals) {
  const std::size_t in = input.size();
  if (diagonals.size() != in + output_bits - 1) throw Error(Errc::dimension_mismatch, "need in + out - 1 diagonals");
  std::vector<std::uint8_t> out(output_bits, 0);
  for (std::size_t i = 0; i < output_bits; ++i) {
    std::uint8_t acc = 0;
    for (std::size_t j = 0; j < in; ++j) acc ^= diagonals[i + in - 1 - j] & input[j];
    out[i] = acc;
  }
  return out;
}

namespace {

std::vector<std::uint64_t> pack(std::span<const std::uint8_t> bits) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64 + 1, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) words[i / 64] |= std::uint64_t{bits[i]} << (i % 64);
  return words;
}

// 64 bits of `words` starting at bit `offset`.
std::uint64_t window(const std::vector<std::uint64_t>& words, std::size_t offset) {
  const std::size_t w = offset / 64, s = offset % 64;
  if (s == 0) return words[w];
  return (words[w] >> s) | (words[w + 1] << (64 - s));
}

}  // namespace

ExtractionResult extract_bits(std::span<const ClickPattern> raw, double h_min, std::uint64_t seed, int security_margin) {
  const auto out_bits = static_cast<std::size_t>(extractable_bits(raw.size(), h_min, security_margin));
  std::vector<std::uint8_t> input;
  for (const auto& p : raw) {
    for (int t = 0; t < p.length(); ++t) input.push_back(p.test(t) ? 1 : 0);
  }
  const std::size_t in = input.size();
  if (in < out_bits) throw Error(Errc::insufficient_entropy, "raw input is shorter than the output block");

  // Output bit i is the parity of d[i .. i + in - 1] against the reversed input.
  std::vector<std::uint8_t> reversed(input.rbegin(), input.rend());
  const auto diag = toeplitz_diagonals(in, out_bits, seed);
  const auto u = pack(reversed);
  const auto d = pack(diag);
  const std::size_t full = in / 64, tail = in % 64;
  const std::uint64_t tail_mask = tail == 0 ? 0 : (std::uint64_t{1} << tail) - 1;

  ExtractionResult result;
  result.bits.resize(out_bits);
  for (std::size_t i = 0; i < out_bits; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < full; ++w) acc ^= window(d, i + 64 * w) & u[w];
    if (tail) acc ^= window(d, i + 64 * full) & u[full] & tail_mask;
    result.bits[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  result.input_bits = in;
  result.output_bits = out_bits;
  result.seed = seed;
  return result;
}

}  // namespace qcert
