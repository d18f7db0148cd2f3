#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcert/bits.hpp"
#include "qcert/combinatorics.hpp"

namespace qcert {

/// Threshold-detector model. `epsilon` is a dimensionless per-bin click
/// probability; use noise_from_dark_counts to convert a dark-count rate.
struct DetectorParams {
  double eta_det = 1.0;       ///< detection efficiency in [0, 1]
  double transmission = 1.0;  ///< channel transmission L in [0, 1]
  double epsilon = 0.0;       ///< noise click probability per bin
  double p_ap = 0.0;          ///< first-order afterpulse probability in [0, 1)
  double rep_rate = 31.25e6;  ///< repetition rate f in Hz

  void validate() const;
  friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

/// epsilon = DCR / f.
double noise_from_dark_counts(double dark_count_rate, double rep_rate);

enum class Boundary { cold, stationary };

const char* to_string(Boundary boundary) noexcept;
Boundary parse_boundary(std::string_view text);

struct ClickProbability {
  double value = 0.0;
  bool clamped = false;
};

/// 1 - exp(-eta L mu) + epsilon for a pulse bin, epsilon for a vacuum bin,
/// clamped into [0, 1].
ClickProbability base_click_prob(bool has_pulse, double mu, const DetectorParams& params);

/// (1 - exp(-eta L mu) + epsilon) / (1 - p_ap): the fixed point of
/// P_T = base + p_ap P_{T-1}. Throws invalid-parameters if it exceeds 1.
double steady_state_click_prob(double mu, const DetectorParams& params);

/// Probability of `pattern` given `state` under the one-bin afterpulse chain:
/// p(click_t | prev) = min(1, base_t + p_ap [prev clicked]).
double pattern_prob(const BitString& state, const ClickPattern& pattern, double mu, const DetectorParams& params,
                    Boundary boundary = Boundary::stationary);

/// Probabilities of all 2^n patterns, indexed by ClickPattern::lexicographic_index().
std::vector<double> pattern_distribution(const BitString& state, double mu, const DetectorParams& params,
                                         Boundary boundary = Boundary::stationary);

/// Surjective relabelling of table outcomes. Group labels are listed in order of
/// first appearance when scanning the source outcomes.
struct OutcomeGrouping {
  std::string name;
  std::map<std::string, std::string> map;

  static OutcomeGrouping identity(std::span<const std::string> labels);
  /// E0 for the all-zero pattern, E1 for any click.
  static OutcomeGrouping no_click(int n);
  /// Noiseless patterns keep their label; every other pattern becomes "other".
  static OutcomeGrouping ideal(std::span<const Codeword> members);
  /// Label is the first bin that clicked ("none" for no click).
  static OutcomeGrouping first_click(int n);
  /// Label is the pattern restricted to `bins`, e.g. "-1-0".
  static OutcomeGrouping marginal(int n, std::span<const int> bins);
};

struct CondProbTable {
  std::vector<std::string> inputs;
  std::vector<std::string> outcomes;
  Eigen::MatrixXd probs;  ///< inputs x outcomes
  std::optional<std::string> grouping;
  std::optional<double> mu;
  std::optional<DetectorParams> params;
  std::optional<Boundary> boundary;

  Eigen::Index input_count() const noexcept { return probs.rows(); }
  Eigen::Index outcome_count() const noexcept { return probs.cols(); }
  /// Entries in [0, 1], rows summing to 1 within `row_tolerance`, unique labels.
  void validate(double row_tolerance = 1e-12) const;
};

inline constexpr int kMaxExactBins = 20;

/// Exact table over all 2^n patterns (or grouped labels) by the chain rule.
CondProbTable cond_prob_table(std::span<const Codeword> states, double mu, const DetectorParams& params,
                              const std::optional<OutcomeGrouping>& grouping = std::nullopt,
                              Boundary boundary = Boundary::stationary);
inline CondProbTable cond_prob_table(const StateGroup& group, double mu, const DetectorParams& params,
                                     const std::optional<OutcomeGrouping>& grouping = std::nullopt,
                                     Boundary boundary = Boundary::stationary) {
  return cond_prob_table(group.members, mu, params, grouping, boundary);
}

/// Sums merged columns. Throws partial-grouping if an outcome is unmapped.
CondProbTable group_outcomes(const CondProbTable& table, const OutcomeGrouping& grouping);

/// Independent draws from the pattern_prob distribution; deterministic in `seed`.
std::vector<ClickPattern> sample_patterns(const BitString& state, double mu, const DetectorParams& params,
                                          std::size_t count, std::uint64_t seed,
                                          Boundary boundary = Boundary::stationary);

/// Largest total-variation distance between corresponding rows.
double max_row_tv_distance(const CondProbTable& observed, const CondProbTable& model);

}  // namespace qcert
