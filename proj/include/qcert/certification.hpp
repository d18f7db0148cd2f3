#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcert/combinatorics.hpp"
#include "qcert/detector.hpp"
#include "qcert/sdp.hpp"

namespace qcert {

/// Real unit vectors whose inner products reproduce a Gram matrix (one column per state).
struct StateEmbedding {
  Eigen::MatrixXd vectors;

  int size() const noexcept { return static_cast<int>(vectors.cols()); }
};

/// Lower-triangular factor G = L L^T; state x is row x of L. Pivots below
/// kPsdTolerance are treated as zero (rank-deficient Gram matrices).
StateEmbedding embed_states(const GramMatrix& gram);

/// The adversary's guess for each input: entry x is the outcome guessed when x is sent.
using Strategy = std::vector<int>;

inline constexpr std::int64_t kDefaultStrategyLimit = 100000;

/// All B^I strategies in lexicographic order (input 0 most significant).
std::vector<Strategy> enumerate_strategies(int inputs, int outcomes, std::int64_t limit = kDefaultStrategyLimit);

struct GuessSdpOptions {
  std::vector<double> input_weights;  ///< empty means balanced 1/I
  std::int64_t max_strategies = kDefaultStrategyLimit;
  /// Exploit exact zeros of the table: drop strategies guessing an impossible
  /// outcome and restrict each block to the complement of the states it can
  /// never fire on. The optimum is unchanged.
  bool reduce = false;
  /// With reduce, entries at or below this are treated as exact zeros.
  double zero_threshold = 0.0;
  /// Drop constraints implied by the others (needed by the interior-point
  /// solver; certificates may keep them all).
  bool independent = true;
  double row_tolerance = 1e-9;
};

/// The guessing-probability SDP: one PSD block M_b^s per strategy s and outcome b.
struct GuessSdp {
  struct BlockInfo {
    int strategy = 0;
    int outcome = 0;
    Eigen::MatrixXd basis;  ///< I x d orthonormal columns; M_b^s = basis N basis^T
  };

  /// Identifies a global constraint: normalisation (x = -1) or table entry (x, b).
  struct GlobalRow {
    int x = -1;
    int b = -1;
  };

  SdpProblem problem;
  std::vector<Strategy> strategies;
  /// Support of each input: outcomes kept as possible.
  std::vector<std::vector<int>> support;
  /// Local equality kinds kept per strategy (index into the canonical list
  /// (i, j), i <= j, (i, j) != (0, 0), row-major); constraints are ordered
  /// strategy-major, then kind, then the global rows.
  std::vector<int> local_kinds;
  std::vector<GlobalRow> globals;
  std::vector<BlockInfo> blocks;
  int inputs = 0;
  int outcomes = 0;
  int local_constraints = 0;   ///< per-strategy POVM-consistency equalities
  int data_constraints = 0;    ///< table reproduction equalities kept in the problem
};

GuessSdp build_guess_sdp(const StateEmbedding& embedding, const CondProbTable& table,
                         const GuessSdpOptions& options = {});

struct CertifyOptions {
  double tol = 1e-6;
  int max_iter = 200;
  std::int64_t max_strategies = kDefaultStrategyLimit;
  std::vector<double> input_weights;
  bool reduce = true;
  /// Table entries at or below this are solved as zeros; the certificate is
  /// then lifted back to the exact table.
  double zero_threshold = 0.0;
  /// Price of violating a table row in the solved problem (0: hard rows).
  double elastic_penalty = 0.0;
  bool verbose = false;
};

struct CertificationResult {
  double p_guess_primal = 0.0;
  double p_guess_upper = 1.0;   ///< min(1, certified dual bound)
  double h_min_lower = 0.0;     ///< -log2(p_guess_upper), bits per state transmission
  double dual_bound = 1.0;      ///< certified bound before clamping at 1
  std::int64_t strategy_count = 0;
  int inputs = 0;
  int outcomes = 0;
  SdpStatus status = SdpStatus::numerical_failure;
  int iterations = 0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double solve_seconds = 0.0;
  bool reduced = false;
  int thresholded_entries = 0;  ///< non-zero entries solved as zeros
  double lift_multiplier = 0.0; ///< multiplier placed on those entries
  double tol = 1e-6;
  std::vector<double> input_weights;
  GramMatrix gram;
  std::optional<double> delta;
  std::optional<double> mu;
  std::string table_digest;
  std::string problem_digest;
  Eigen::VectorXd dual;  ///< multipliers of the archived problem
};

CertificationResult certify_min_entropy(const GramMatrix& gram, const CondProbTable& table,
                                        const CertifyOptions& options = {});
/// Gram matrix from the group's coincidences at mean photon number mu.
CertificationResult certify_min_entropy(std::span<const Codeword> states, double mu, const CondProbTable& table,
                                        const CertifyOptions& options = {});
/// I states with constant pairwise overlap delta.
CertificationResult certify_min_entropy_overlap(int inputs, double delta, const CondProbTable& table,
                                                const CertifyOptions& options = {});

/// Rebuilds the certificate problem archived in a result: the exact table,
/// exact-zero reduction if enabled, every constraint kept.
GuessSdp rebuild_guess_sdp(const CertificationResult& result, const CondProbTable& table);

struct ResultAudit {
  bool pass = false;
  double recomputed_bound = 0.0;
  std::vector<std::string> failures;
};

/// Re-checks an archived result against its certificate problem: digests,
/// the bound recomputed from the stored multipliers, and the derived entropy.
ResultAudit audit_result(const CertificationResult& result, const SdpProblem& problem,
                         const CondProbTable* table = nullptr);

std::string table_digest(const CondProbTable& table);
std::string problem_digest(const SdpProblem& problem);

}  // namespace qcert
