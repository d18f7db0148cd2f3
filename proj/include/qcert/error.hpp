#pragma once

#include <stdexcept>
#include <string>

namespace qcert {

enum class Errc {
  invalid_parameters,
  length_mismatch,
  degenerate_group,
  search_limit_exceeded,
  not_psd,
  dimension_limit,
  partial_grouping,
  dimension_mismatch,
  infeasible,
  iteration_limit,
  numerical_failure,
  uncertified,
  limit_exceeded,
  table_row_sum,
  unsupported_dimension,
  no_feasible_attack,
  insufficient_entropy,
  invalid_input,
};

const char* to_string(Errc code) noexcept;

/// Domain error carrying a machine-readable code. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qcert
