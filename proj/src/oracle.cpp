#include "qcert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qcert/error.hpp"

namespace qcert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

const char* to_string(LpResult::Status status) noexcept {
  switch (status) {
    case LpResult::Status::optimal: return "optimal";
    case LpResult::Status::infeasible: return "infeasible";
    case LpResult::Status::unbounded: return "unbounded";
    case LpResult::Status::iteration_limit: return "iteration-limit";
  }
  return "?";
}

namespace {

// Revised simplex over a growing column set, A x = b with b >= 0 and x >= 0.
// The basis matrix is refactored every pivot; rows are few, so this is cheap
// and keeps the iterates accurate.
class Simplex {
 public:
  enum class Outcome { optimal, unbounded, limit };

  Simplex(const Vec& b, int max_pivots) : a_(b.size(), 0), b_(b), max_pivots_(max_pivots) {}

  int rows() const { return static_cast<int>(b_.size()); }
  int cols() const { return static_cast<int>(a_.cols()); }

  int add_column(const Vec& column, double cost, bool enterable) {
    a_.conservativeResize(Eigen::NoChange, a_.cols() + 1);
    a_.col(a_.cols() - 1) = column;
    cost_.push_back(cost);
    enterable_.push_back(enterable);
    in_basis_.push_back(0);
    return cols() - 1;
  }
  void set_cost(int j, double cost) { cost_[static_cast<std::size_t>(j)] = cost; }
  void set_enterable(int j, bool e) { enterable_[static_cast<std::size_t>(j)] = e; }

  void set_basis(std::vector<int> basis) {
    basis_ = std::move(basis);
    std::fill(in_basis_.begin(), in_basis_.end(), 0);
    for (int j : basis_) in_basis_[static_cast<std::size_t>(j)] = 1;
    refactor();
  }

  Outcome optimize() {
    int degenerate = 0;
    for (;;) {
      refactor();
      const Vec y = duals();
      int entering = -1;
      double best = kReducedTol;
      const bool bland = degenerate > 50;
      for (int j = 0; j < cols(); ++j) {
        if (in_basis_[static_cast<std::size_t>(j)] || !enterable_[static_cast<std::size_t>(j)]) continue;
        const double d = cost_[static_cast<std::size_t>(j)] - y.dot(a_.col(j));
        if (d > best) {
          entering = j;
          if (bland) break;
          best = d;
        }
      }
      if (entering < 0) return Outcome::optimal;
      if (pivots_ >= max_pivots_) return Outcome::limit;

      const Vec u = lu_.solve(a_.col(entering));
      int leaving = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        if (u(i) <= kPivotTol) continue;
        const double r = std::max(0.0, xb_(i)) / u(i);
        bool take = r < ratio - 1e-15;
        if (!take && leaving >= 0 && r <= ratio + 1e-15) {
          // Ties: smallest index under Bland's rule, otherwise the largest pivot.
          take = bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)]
                       : u(i) > u(leaving);
        }
        if (take) {
          ratio = std::min(ratio, r);
          leaving = i;
        }
      }
      if (leaving < 0) return Outcome::unbounded;
      degenerate = ratio <= 1e-14 ? degenerate + 1 : 0;
      in_basis_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leaving)])] = 0;
      basis_[static_cast<std::size_t>(leaving)] = entering;
      in_basis_[static_cast<std::size_t>(entering)] = 1;
      ++pivots_;
    }
  }

  Vec duals() const {
    Vec cb(rows());
    for (int i = 0; i < rows(); ++i) cb(i) = cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
    return lu_.transpose().solve(cb);
  }

  Vec solution() const {
    Vec x = Vec::Zero(cols());
    for (int i = 0; i < rows(); ++i) x(basis_[static_cast<std::size_t>(i)]) = std::max(0.0, xb_(i));
    return x;
  }

  double value() const {
    double v = 0.0;
    for (int i = 0; i < rows(); ++i) v += cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] * std::max(0.0, xb_(i));
    return v;
  }

  // Pivots basic columns for which `drop` holds out of the basis where possible.
  void evict(const std::vector<char>& drop) {
    for (int i = 0; i < rows(); ++i) {
      if (!drop[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])]) continue;
      refactor();
      Vec e = Vec::Zero(rows());
      e(i) = 1.0;
      const Vec row = lu_.transpose().solve(e);  // row i of B^-1
      for (int j = 0; j < cols(); ++j) {
        if (in_basis_[static_cast<std::size_t>(j)] || drop[static_cast<std::size_t>(j)]) continue;
        if (std::abs(row.dot(a_.col(j))) > 1e-9) {
          in_basis_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = 0;
          basis_[static_cast<std::size_t>(i)] = j;
          in_basis_[static_cast<std::size_t>(j)] = 1;
          ++pivots_;
          break;
        }
      }
    }
    refactor();
  }

  int pivots() const { return pivots_; }
  const std::vector<int>& basis() const { return basis_; }

 private:
  static constexpr double kReducedTol = 1e-10;
  static constexpr double kPivotTol = 1e-9;

  void refactor() {
    Mat bm(rows(), rows());
    for (int i = 0; i < rows(); ++i) bm.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    lu_.compute(bm);
    xb_ = lu_.solve(b_);
  }

  Mat a_;
  Vec b_;
  std::vector<double> cost_;
  std::vector<char> enterable_;
  std::vector<char> in_basis_;
  std::vector<int> basis_;
  Eigen::PartialPivLU<Mat> lu_;
  Vec xb_;
  int max_pivots_;
  int pivots_ = 0;
};

// Standard-form scaffold shared by solve_lp and the oracle: slack or surplus
// per inequality, rows flipped to b >= 0, one artificial per row.
struct StandardForm {
  std::vector<double> flip;
  std::vector<int> artificial;
  std::vector<char> is_artificial;
};

StandardForm scaffold(Simplex& simplex, const Vec& b_raw, const std::vector<LinearProgram::Sense>& sense) {
  const int m = static_cast<int>(b_raw.size());
  StandardForm sf;
  sf.flip.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) sf.flip[static_cast<std::size_t>(i)] = b_raw(i) < 0.0 ? -1.0 : 1.0;
  for (int i = 0; i < m; ++i) {
    const auto s = sense[static_cast<std::size_t>(i)];
    if (s == LinearProgram::Sense::eq) continue;
    Vec col = Vec::Zero(m);
    col(i) = (s == LinearProgram::Sense::le ? 1.0 : -1.0) * sf.flip[static_cast<std::size_t>(i)];
    simplex.add_column(col, 0.0, true);
  }
  std::vector<int> basis;
  for (int i = 0; i < m; ++i) {
    Vec col = Vec::Zero(m);
    col(i) = 1.0;
    basis.push_back(simplex.add_column(col, -1.0, true));
  }
  sf.artificial = basis;
  sf.is_artificial.assign(static_cast<std::size_t>(simplex.cols()), 0);
  for (int j : basis) sf.is_artificial[static_cast<std::size_t>(j)] = 1;
  simplex.set_basis(basis);
  return sf;
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, int max_pivots) {
  const auto m = lp.a.rows();
  const auto n = lp.a.cols();
  if (lp.b.size() != m || lp.c.size() != n || static_cast<Eigen::Index>(lp.sense.size()) != m) {
    throw Error(Errc::dimension_mismatch, "linear program dimensions disagree");
  }
  Vec b = lp.b.cwiseAbs();
  Simplex simplex(b, max_pivots);
  std::vector<int> structural;
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec col = lp.a.col(j);
    for (Eigen::Index i = 0; i < m; ++i) if (lp.b(i) < 0.0) col(i) = -col(i);
    structural.push_back(simplex.add_column(col, 0.0, true));
  }
  auto sf = scaffold(simplex, lp.b, lp.sense);

  LpResult out;
  auto outcome = simplex.optimize();
  if (outcome == Simplex::Outcome::limit) {
    out.pivots = simplex.pivots();
    return out;
  }
  if (-simplex.value() > 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
    out.status = LpResult::Status::infeasible;
    out.pivots = simplex.pivots();
    return out;
  }
  sf.is_artificial.resize(static_cast<std::size_t>(simplex.cols()), 0);
  simplex.evict(sf.is_artificial);
  for (int j : sf.artificial) {
    simplex.set_cost(j, 0.0);
    simplex.set_enterable(j, false);
  }
  for (Eigen::Index j = 0; j < n; ++j) simplex.set_cost(structural[static_cast<std::size_t>(j)], lp.c(j));
  outcome = simplex.optimize();
  out.pivots = simplex.pivots();
  if (outcome == Simplex::Outcome::limit) return out;
  if (outcome == Simplex::Outcome::unbounded) {
    out.status = LpResult::Status::unbounded;
    return out;
  }
  out.status = LpResult::Status::optimal;
  const Vec x = simplex.solution();
  out.x = x.head(n);
  out.value = lp.c.dot(out.x);
  out.dual = simplex.duals();
  for (Eigen::Index i = 0; i < m; ++i) out.dual(i) *= sf.flip[static_cast<std::size_t>(i)];
  return out;
}

OracleReport grid_lp_oracle(const StateEmbedding& embedding, const CondProbTable& table, int grid_resolution,
                            std::vector<double> weights, double sdp_value, double data_tolerance) {
  const int inputs = embedding.size();
  const auto outcomes = static_cast<int>(table.outcome_count());
  if (inputs != 2 || embedding.vectors.rows() != 2) {
    throw Error(Errc::unsupported_dimension, "the grid oracle handles two real states only");
  }
  if (outcomes > 4 || outcomes < 1) throw Error(Errc::unsupported_dimension, "the grid oracle handles B <= 4");
  if (table.input_count() != inputs) throw Error(Errc::dimension_mismatch, "table rows must match the states");
  if (grid_resolution < 1) throw Error(Errc::invalid_parameters, "grid resolution must be positive");
  if (weights.empty()) weights.assign(static_cast<std::size_t>(inputs), 1.0 / inputs);

  // Directions of the states and of the grid; cos^2(t - phi) = (1 + cos 2t cos 2phi + sin 2t sin 2phi) / 2.
  std::vector<double> phi(static_cast<std::size_t>(inputs));
  for (int x = 0; x < inputs; ++x) phi[static_cast<std::size_t>(x)] = std::atan2(embedding.vectors(1, x), embedding.vectors(0, x));
  // The uniform grid plus the direction orthogonal to each state, so that
  // zero entries of the table can be reproduced exactly.
  const int directions = grid_resolution + inputs;
  std::vector<double> c2(static_cast<std::size_t>(directions)), s2(static_cast<std::size_t>(directions));
  for (int k = 0; k < directions; ++k) {
    const double t = k < grid_resolution ? std::numbers::pi * k / grid_resolution
                                         : phi[static_cast<std::size_t>(k - grid_resolution)] + std::numbers::pi / 2;
    c2[static_cast<std::size_t>(k)] = std::cos(2.0 * t);
    s2[static_cast<std::size_t>(k)] = std::sin(2.0 * t);
  }

  int strategies = 1;
  for (int x = 0; x < inputs; ++x) strategies *= outcomes;
  auto guess = [&](int strategy, int x) {
    for (int y = inputs - 1; y > x; --y) strategy /= outcomes;
    return strategy % outcomes;
  };

  // Rows: per strategy (diag difference, off-diagonal), normalisation, then
  // upper and lower data bands per (x, b).
  const int local_rows = 2 * strategies;
  const int norm_row = local_rows;
  const int data_rows = inputs * outcomes;
  const int m = local_rows + 1 + 2 * data_rows;
  Vec rhs = Vec::Zero(m);
  std::vector<LinearProgram::Sense> sense(static_cast<std::size_t>(m), LinearProgram::Sense::eq);
  rhs(norm_row) = 1.0;
  for (int x = 0; x < inputs; ++x) {
    for (int b = 0; b < outcomes; ++b) {
      const int r = local_rows + 1 + 2 * (x * outcomes + b);
      const double p = table.probs(x, b);
      rhs(r) = p + data_tolerance * p;
      sense[static_cast<std::size_t>(r)] = LinearProgram::Sense::le;
      rhs(r + 1) = p - data_tolerance * p;
      sense[static_cast<std::size_t>(r + 1)] = LinearProgram::Sense::ge;
    }
  }

  auto column = [&](int strategy, int b, int k) {
    Vec col = Vec::Zero(m);
    const double c = c2[static_cast<std::size_t>(k)], s = s2[static_cast<std::size_t>(k)];
    col(2 * strategy) = c;              // (00) - (11) of the projector
    col(2 * strategy + 1) = 0.5 * s;    // (01)
    col(norm_row) = 0.5 * (1.0 + c);    // (00)
    for (int x = 0; x < inputs; ++x) {
      const double p = phi[static_cast<std::size_t>(x)];
      const double overlap = 0.5 * (1.0 + c * std::cos(2.0 * p) + s * std::sin(2.0 * p));
      const int r = local_rows + 1 + 2 * (x * outcomes + b);
      col(r) = overlap;
      col(r + 1) = overlap;
    }
    return col;
  };
  auto objective = [&](int strategy, int b, int k) {
    const double c = c2[static_cast<std::size_t>(k)], s = s2[static_cast<std::size_t>(k)];
    double v = 0.0;
    for (int x = 0; x < inputs; ++x) {
      if (guess(strategy, x) != b) continue;
      const double p = phi[static_cast<std::size_t>(x)];
      v += weights[static_cast<std::size_t>(x)] * 0.5 * (1.0 + c * std::cos(2.0 * p) + s * std::sin(2.0 * p));
    }
    return v;
  };

  Vec b_abs = rhs.cwiseAbs();
  Simplex simplex(b_abs, 1000000);
  auto sf = scaffold(simplex, rhs, sense);
  std::vector<double> flip = sf.flip;
  std::vector<int> structural_index;  // column id -> (strategy * B + b) * K + k
  std::vector<char> seen(static_cast<std::size_t>(strategies) * outcomes * directions, 0);

  OracleReport report;
  report.grid_resolution = grid_resolution;
  report.sdp_value = sdp_value;
  report.tolerance = 1e-6;

  // Price every (strategy, b) over the grid and bring in the best direction of each.
  auto price = [&](bool phase_one) {
    const Vec y = simplex.duals();
    // Undo the row flips so prices apply to unflipped columns.
    Vec yu = y;
    for (int i = 0; i < m; ++i) yu(i) *= flip[static_cast<std::size_t>(i)];
    int added = 0;
    for (int strategy = 0; strategy < strategies; ++strategy) {
      for (int b = 0; b < outcomes; ++b) {
        // Reduced cost alpha + beta cos 2t + gamma sin 2t.
        double alpha = -0.5 * yu(norm_row), beta = -yu(2 * strategy) - 0.5 * yu(norm_row), gamma = -0.5 * yu(2 * strategy + 1);
        for (int x = 0; x < inputs; ++x) {
          const double p = phi[static_cast<std::size_t>(x)];
          const int r = local_rows + 1 + 2 * (x * outcomes + b);
          const double yy = yu(r) + yu(r + 1);
          double w = 0.0;
          if (!phase_one && guess(strategy, x) == b) w = weights[static_cast<std::size_t>(x)];
          const double coef = 0.5 * (w - yy);
          alpha += coef;
          beta += coef * std::cos(2.0 * p);
          gamma += coef * std::sin(2.0 * p);
        }
        int best_k = -1;
        double best = 1e-10;
        for (int k = 0; k < directions; ++k) {
          const double rc = alpha + beta * c2[static_cast<std::size_t>(k)] + gamma * s2[static_cast<std::size_t>(k)];
          if (rc > best) {
            best = rc;
            best_k = k;
          }
        }
        if (best_k < 0) continue;
        const std::size_t key = (static_cast<std::size_t>(strategy) * outcomes + b) * directions + best_k;
        if (seen[key]) continue;
        seen[key] = 1;
        Vec col = column(strategy, b, best_k);
        for (int i = 0; i < m; ++i) col(i) *= flip[static_cast<std::size_t>(i)];
        simplex.add_column(col, phase_one ? 0.0 : objective(strategy, b, best_k), true);
        structural_index.push_back(static_cast<int>(key));
        ++added;
      }
    }
    return added;
  };

  const int first_structural = simplex.cols();
  auto run_phase = [&](bool phase_one) {
    for (;;) {
      if (simplex.optimize() != Simplex::Outcome::optimal) {
        throw Error(Errc::numerical_failure, "oracle LP did not reach optimality");
      }
      ++report.lp_solves;
      if (price(phase_one) == 0) break;
    }
  };
  run_phase(true);
  if (-simplex.value() > 1e-9) {
    throw Error(Errc::no_feasible_attack,
                "no attack on a grid of " + std::to_string(grid_resolution) + " directions reproduces the table");
  }
  sf.is_artificial.resize(static_cast<std::size_t>(simplex.cols()), 0);
  simplex.evict(sf.is_artificial);
  for (int j : sf.artificial) {
    simplex.set_cost(j, 0.0);
    simplex.set_enterable(j, false);
  }
  for (int j = first_structural; j < simplex.cols(); ++j) {
    const int key = structural_index[static_cast<std::size_t>(j - first_structural)];
    const int k = key % directions;
    const int sb = key / directions;
    simplex.set_cost(j, objective(sb / outcomes, sb % outcomes, k));
  }
  run_phase(false);

  const Vec x = simplex.solution();
  Vec produced = Vec::Zero(data_rows);
  double value = 0.0;
  for (int j = first_structural; j < simplex.cols(); ++j) {
    if (x(j) == 0.0) continue;
    const int key = structural_index[static_cast<std::size_t>(j - first_structural)];
    const int k = key % directions;
    const int sb = key / directions;
    const Vec col = column(sb / outcomes, sb % outcomes, k);
    value += x(j) * objective(sb / outcomes, sb % outcomes, k);
    for (int r = 0; r < data_rows; ++r) produced(r) += x(j) * col(local_rows + 1 + 2 * r);
  }
  // Independent check of the final point against the unflipped rows.
  Vec lhs = Vec::Zero(m);
  for (int j = first_structural; j < simplex.cols(); ++j) {
    if (x(j) == 0.0) continue;
    const int key = structural_index[static_cast<std::size_t>(j - first_structural)];
    lhs += x(j) * column(key / directions / outcomes, (key / directions) % outcomes, key % directions);
  }
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = lhs(i) - rhs(i);
    const auto sn = sense[static_cast<std::size_t>(i)];
    worst = std::max(worst, sn == LinearProgram::Sense::eq ? std::abs(r) : sn == LinearProgram::Sense::le ? r : -r);
  }
  if (worst > 1e-9) {
    throw Error(Errc::numerical_failure, "oracle LP point violates a row by " + std::to_string(worst));
  }
  for (int xi = 0; xi < inputs; ++xi) {
    for (int b = 0; b < outcomes; ++b) {
      report.max_data_violation =
          std::max(report.max_data_violation, std::abs(produced(xi * outcomes + b) - table.probs(xi, b)));
    }
  }
  report.lower_bound = value;
  report.margin = sdp_value - value;
  report.consistent = !(value > sdp_value + report.tolerance);
  report.columns = simplex.cols() - first_structural;
  report.pivots = simplex.pivots();
  return report;
}

CertificateCheck verify_certificate(const SdpProblem& problem, const SdpSolution& solution, double feas_tol) {
  if (solution.primal.size() != problem.block_dims.size() || solution.dual_slack.size() != problem.block_dims.size() ||
      solution.dual.size() != static_cast<Eigen::Index>(problem.constraints.size())) {
    throw Error(Errc::dimension_mismatch, "solution does not match the problem");
  }
  const auto report = check_feasibility(problem, solution);
  CertificateCheck out;
  out.dual_residual = report.dual_residual;
  out.dual_min_eig = report.dual_min_eig;
  out.recomputed_min_eig = report.dual_recomputed_min_eig;
  out.primal_value = report.primal_objective;
  out.dual_value = report.dual_objective;
  // With a trace bound the rigorous dual value absorbs any slack deficit.
  if (problem.maximize && problem.trace_bound) {
    out.dual_value += *problem.trace_bound * std::max(0.0, -report.dual_recomputed_min_eig);
  }
  // Compare in the maximisation convention.
  const double sign = problem.maximize ? 1.0 : -1.0;
  const bool feasible = report.dual_residual <= feas_tol && report.dual_min_eig >= -feas_tol &&
                        report.dual_recomputed_min_eig >= -feas_tol;
  const bool weak = sign * out.dual_value >= sign * out.primal_value - 1e-12;
  if (!feasible) {
    out.reason = "dual infeasible: residual " + std::to_string(report.dual_residual) + ", slack eigenvalue " +
                 std::to_string(std::min(report.dual_min_eig, report.dual_recomputed_min_eig));
  } else if (!weak) {
    out.reason = "weak duality violated";
  }
  out.pass = feasible && weak;
  return out;
}

std::vector<double> pattern_prob_oracle(const std::string& state, double mu, const DetectorParams& params,
                                        Boundary boundary) {
  const int n = static_cast<int>(state.size());
  if (n < 1 || n > kOracleMaxBins) throw Error(Errc::dimension_limit, "oracle distributions need 1 <= n <= 12");
  const double signal = 1.0 - std::exp(-params.eta_det * params.transmission * mu);
  auto click = [&](int t, bool previous) {
    double p = (state[static_cast<std::size_t>(t)] == '1' ? signal : 0.0) + params.epsilon;
    if (previous) p += params.p_ap;
    return std::clamp(p, 0.0, 1.0);
  };
  // Stationary start: iterate P_T = base + p_ap P_{T-1} from zero until it settles.
  double start = 0.0;
  if (boundary == Boundary::stationary) {
    const double base = signal + params.epsilon;
    for (int it = 0; it < 100000; ++it) {
      const double next = base + params.p_ap * start;
      if (next == start) break;
      start = next;
    }
  }
  std::vector<double> out(std::size_t{1} << n, 0.0);
  // Depth-first over bins; `index` accumulates the pattern with bin 0 most significant.
  auto expand = [&](auto&& self, int t, bool previous, double p, std::size_t index) -> void {
    if (t == n) {
      out[index] += p;
      return;
    }
    const double c = click(t, previous);
    self(self, t + 1, true, p * c, (index << 1) | 1U);
    self(self, t + 1, false, p * (1.0 - c), index << 1);
  };
  if (start < 1.0) expand(expand, 0, false, 1.0 - start, 0);
  if (start > 0.0) expand(expand, 0, true, start, 0);
  return out;
}

}  // namespace qcert
