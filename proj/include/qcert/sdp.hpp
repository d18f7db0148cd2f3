#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qcert {

/// Symmetric matrix stored as its upper-triangular non-zeros (row <= col).
class SymMatrix {
 public:
  struct Entry {
    int row;
    int col;
    double value;
  };

  SymMatrix() = default;
  explicit SymMatrix(int dim) : dim_(dim) {}
  /// Keeps the upper triangle of `dense`, dropping exact zeros.
  static SymMatrix from_dense(const Eigen::MatrixXd& dense);

  int dim() const noexcept { return dim_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// Adds `value` at (row, col) and its mirror.
  void add(int row, int col, double value);

  Eigen::MatrixXd dense() const;
  /// tr(A X) for a dense (not necessarily symmetric) X.
  double trace_product(const Eigen::MatrixXd& x) const;
  /// target += scale * A.
  void add_to(Eigen::MatrixXd& target, double scale = 1.0) const;

 private:
  int dim_ = 0;
  std::vector<Entry> entries_;
};

struct BlockTerm {
  int block = 0;
  SymMatrix matrix;
};

struct SdpConstraint {
  std::vector<BlockTerm> terms;
  double rhs = 0.0;
};

/// optimise <C, X> subject to <A_i, X> = b_i and X = diag(X_1, ..., X_k) PSD.
struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<BlockTerm> objective;
  std::vector<SdpConstraint> constraints;
  bool maximize = true;
  /// Known bound on sum_k tr(X_k) over the feasible set. When present, dual
  /// certificates are corrected for any PSD deficit of the dual slack.
  std::optional<double> trace_bound;

  void validate() const;
};

enum class SdpStatus { optimal, infeasible, limit, numerical_failure };

const char* to_string(SdpStatus status) noexcept;
SdpStatus parse_sdp_status(std::string_view text);

/// Multipliers follow the maximisation convention: A^T(dual) - dual_slack = sign * C,
/// with sign = +1 for maximise and -1 for minimise problems.
struct SdpSolution {
  std::vector<Eigen::MatrixXd> primal;
  Eigen::VectorXd dual;
  std::vector<Eigen::MatrixXd> dual_slack;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  ///< |dual - primal| / max(1, |primal|)
  SdpStatus status = SdpStatus::numerical_failure;
  int iterations = 0;
};

struct SdpOptions {
  double tol = 1e-6;          ///< relative gap
  double feas_tol = 1e-8;     ///< absolute primal and dual residuals
  int max_iter = 100;
  double step_fraction = 0.98;
  bool verbose = false;
};

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {});

struct FeasibilityReport {
  double primal_residual = 0.0;   ///< ||A(X) - b||_inf
  double dual_residual = 0.0;     ///< ||A^T y - Z - sign C||_inf
  double primal_min_eig = 0.0;    ///< smallest eigenvalue over primal blocks
  double dual_min_eig = 0.0;      ///< smallest eigenvalue over the stored dual slack
  double dual_recomputed_min_eig = 0.0;  ///< smallest eigenvalue of A^T y - sign C
  std::vector<double> primal_block_min_eig;
  std::vector<double> dual_block_min_eig;
  double primal_objective = 0.0;
  double dual_objective = 0.0;

  bool primal_feasible(double tol = 1e-8) const { return primal_residual <= tol && primal_min_eig >= -tol; }
  bool dual_feasible(double tol = 1e-8) const { return dual_residual <= tol && dual_min_eig >= -tol; }
};

/// Recomputes residuals and spectra from the problem data alone.
FeasibilityReport check_feasibility(const SdpProblem& problem, const SdpSolution& solution);

/// Rigorous upper bound on a maximisation optimum from the dual multipliers:
/// b^T y, plus trace_bound * max(0, -lambda_min(A^T y - C)) when the problem
/// carries a trace bound. Without a trace bound the dual slack must be PSD
/// within `tol`, otherwise throws uncertified.
double certified_upper_bound(const SdpProblem& problem, const SdpSolution& solution, double tol = 1e-8);
/// Same bound from the multipliers alone.
double certified_upper_bound(const SdpProblem& problem, const Eigen::VectorXd& dual, double tol = 1e-8);

}  // namespace qcert
