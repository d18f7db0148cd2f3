#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcert/certification.hpp"
#include "qcert/detector.hpp"
#include "qcert/sdp.hpp"

namespace qcert {

struct OracleReport {
  double lower_bound = 0.0;  ///< best attack found by the search
  double sdp_value = 0.0;    ///< value under test
  double margin = 0.0;       ///< sdp_value - lower_bound
  bool consistent = true;    ///< false iff lower_bound > sdp_value + tolerance
  double tolerance = 1e-6;
  int grid_resolution = 0;
  int lp_solves = 0;
  int columns = 0;           ///< grid columns brought into the LP
  int pivots = 0;
  double max_data_violation = 0.0;

  const char* verdict() const { return consistent ? "consistent" : "violation"; }
};

/// Lower bound on the guessing probability for two real states: every block
/// M_b^s is restricted to non-negative combinations of rank-one projectors onto
/// `grid_resolution` equally spaced directions in [0, pi), and the resulting LP
/// is solved with the table reproduced within `data_tolerance`. Only valid for
/// I = 2 and B <= 4.
OracleReport grid_lp_oracle(const StateEmbedding& embedding, const CondProbTable& table, int grid_resolution,
                            std::vector<double> weights = {}, double sdp_value = 1.0, double data_tolerance = 1e-6);

/// Dense linear program: maximise c^T x subject to A x (<=, =, >=) b, x >= 0.
struct LinearProgram {
  enum class Sense { le, eq, ge };
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<Sense> sense;
};

struct LpResult {
  enum class Status { optimal, infeasible, unbounded, iteration_limit };
  Status status = Status::iteration_limit;
  Eigen::VectorXd x;
  Eigen::VectorXd dual;  ///< row prices of the final basis
  double value = 0.0;
  int pivots = 0;
};

const char* to_string(LpResult::Status status) noexcept;

/// Two-phase revised simplex with Bland's rule; meant for small dense problems.
LpResult solve_lp(const LinearProgram& lp, int max_pivots = 100000);

struct CertificateCheck {
  bool pass = false;
  double dual_residual = 0.0;       ///< ||A^T y - Z - C||_inf against the stored slack
  double dual_min_eig = 0.0;        ///< smallest eigenvalue of the stored slack
  double recomputed_min_eig = 0.0;  ///< smallest eigenvalue of A^T y - C
  double primal_value = 0.0;
  double dual_value = 0.0;         ///< b^T y, corrected by the trace bound when present
  std::string reason;
};

/// Passes iff the dual is feasible within `feas_tol` and dual_value >= primal_value - 1e-12.
/// For a maximisation with a trace bound, dual_value is the corrected bound of
/// certified_upper_bound rather than the bare b^T y.
CertificateCheck verify_certificate(const SdpProblem& problem, const SdpSolution& solution, double feas_tol = 1e-8);

inline constexpr int kOracleMaxBins = 12;

/// All 2^n pattern probabilities by recursive expansion over bins, written
/// independently of the detector module. Index i is the pattern whose text
/// reads as i in binary (bin 0 most significant).
std::vector<double> pattern_prob_oracle(const std::string& state, double mu, const DetectorParams& params,
                                        Boundary boundary);

}  // namespace qcert
