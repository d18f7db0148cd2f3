#include "qcert/bits.hpp"

#include "qcert/error.hpp"

namespace qcert {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameters: return "invalid-parameters";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::degenerate_group: return "degenerate-group";
    case Errc::search_limit_exceeded: return "search-limit-exceeded";
    case Errc::not_psd: return "not-psd";
    case Errc::dimension_limit: return "dimension-limit";
    case Errc::partial_grouping: return "partial-grouping";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::infeasible: return "infeasible";
    case Errc::iteration_limit: return "limit";
    case Errc::numerical_failure: return "numerical-failure";
    case Errc::uncertified: return "uncertified";
    case Errc::limit_exceeded: return "limit-exceeded";
    case Errc::table_row_sum: return "table-row-sum";
    case Errc::unsupported_dimension: return "unsupported-dimension";
    case Errc::no_feasible_attack: return "no-feasible-attack";
    case Errc::insufficient_entropy: return "insufficient-entropy";
    case Errc::invalid_input: return "invalid-input";
  }
  return "unknown";
}

BitString::BitString(std::uint64_t mask, int length) : mask_(mask), length_(length) {
  if (length < 0 || length > kMaxLength) {
    throw Error(Errc::invalid_parameters, "bit string length out of range");
  }
  if (length < 64 && (mask >> length) != 0) {
    throw Error(Errc::invalid_parameters, "bits set beyond the string length");
  }
}

BitString BitString::parse(std::string_view text) {
  if (text.size() > static_cast<std::size_t>(kMaxLength)) {
    throw Error(Errc::invalid_parameters, "bit string too long: " + std::string(text));
  }
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      mask |= std::uint64_t{1} << i;
    } else if (text[i] != '0') {
      throw Error(Errc::invalid_input, "not a bit string: " + std::string(text));
    }
  }
  return BitString(mask, static_cast<int>(text.size()));
}

std::string BitString::str() const {
  std::string out(static_cast<std::size_t>(length_), '0');
  for (int i = 0; i < length_; ++i) {
    if (test(i)) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

std::uint64_t BitString::lexicographic_index() const noexcept {
  std::uint64_t index = 0;
  for (int i = 0; i < length_; ++i) index = (index << 1) | ((mask_ >> i) & 1U);
  return index;
}

BitString BitString::from_lexicographic_index(std::uint64_t index, int length) {
  std::uint64_t mask = 0;
  for (int i = length - 1; i >= 0; --i) {
    mask |= (index & 1U) << i;
    index >>= 1;
  }
  return BitString(mask, length);
}

}  // namespace qcert
