#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcert/bits.hpp"

namespace qcert {

/// (n, m, s): n time bins, m pulses per state, s pulses shared by every pair of states.
struct ConfigurationSpec {
  int n = 0;
  int m = 0;
  int s = 0;

  /// Throws invalid-parameters unless n > m >= s >= 0.
  void validate() const;
  friend bool operator==(const ConfigurationSpec&, const ConfigurationSpec&) = default;
};

/// States of one configuration with pairwise coincidence exactly spec.s.
struct StateGroup {
  ConfigurationSpec spec;
  std::vector<Codeword> members;

  void validate() const;
  std::size_t size() const noexcept { return members.size(); }
};

/// Pairwise state overlaps. Unit diagonal, symmetric, positive semidefinite.
struct GramMatrix {
  Eigen::MatrixXd entries;

  Eigen::Index size() const noexcept { return entries.rows(); }
  /// Throws not-psd if any invariant fails by more than the tolerance.
  void validate(double psd_tolerance = 1e-10) const;
};

inline constexpr double kPsdTolerance = 1e-10;

std::uint64_t binomial(int n, int k);

/// All C(n, m) weight-m words of length n, ordered lexicographically by their
/// sorted pulse positions (1100, 1010, 1001, 0110, ...).
std::vector<Codeword> enumerate_states(int n, int m);

/// Number of bins in which both words carry a pulse.
int coincidence(const BitString& a, const BitString& b);

int hamming_from_s(int m, int s);

/// Number of distinct coincidence subsets in an (n, m)-configuration.
int subset_count(int n, int m);

/// Size of the explicit construction; a lower bound on the largest constant-s group.
std::int64_t lower_bound_code_size(int n, int m, int s);

/// Builds the explicit constant-s group: a shared block of s pulses followed by
/// disjoint blocks of m - s pulses when 2m <= n, or disjoint blocks of m - s
/// vacuum bins inside the 2m - s non-shared-vacuum bins when 2m > n.
StateGroup construct_lower_bound_code(int n, int m, int s);

struct MaxGroupResult {
  std::int64_t size = 0;
  StateGroup witness;
  std::uint64_t nodes = 0;  ///< branch-and-bound nodes expanded
};

inline constexpr int kDefaultSearchLimit = 16;

/// Exact maximum clique of the graph on weight-m words joined when their
/// coincidence equals s.
MaxGroupResult max_constant_s_group(int n, int m, int s, int search_limit = kDefaultSearchLimit);

/// All noiseless click patterns: every subset of every member's pulse positions,
/// deduplicated, in ascending textual order (the all-zero pattern first).
std::vector<ClickPattern> ideal_outcome_set(std::span<const Codeword> members);
inline std::vector<ClickPattern> ideal_outcome_set(const StateGroup& group) {
  return ideal_outcome_set(group.members);
}

/// C(2^m - 2^s) + 2^s: the union size for C members sharing one s-position set.
std::int64_t shared_prefix_outcome_count(std::int64_t members, int m, int s);
/// The closed-form count C(2^m - 1) - 2^(m-s) + 1. It disagrees with direct
/// enumeration in general (e.g. m = 1 gives n - 1 rather than n + 1).
std::int64_t closed_form_outcome_count(std::int64_t members, int m, int s);

/// |<psi_i|psi_j>| = <0|alpha>^(2(m-s)) = exp(-mu (m - s)).
double overlap_delta(double mu, int m, int s);

GramMatrix gram_matrix(std::span<const Codeword> members, double mu);
inline GramMatrix gram_matrix(const StateGroup& group, double mu) {
  return gram_matrix(group.members, mu);
}
/// I x I matrix with unit diagonal and every off-diagonal equal to delta.
GramMatrix constant_overlap_gram(int inputs, double delta);

}  // namespace qcert
