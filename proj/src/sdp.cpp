#include "qcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "qcert/error.hpp"

namespace qcert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& dense) {
  SymMatrix out(static_cast<int>(dense.rows()));
  for (int c = 0; c < dense.cols(); ++c) {
    for (int r = 0; r <= c; ++r) {
      if (dense(r, c) != 0.0) out.entries_.push_back({r, c, dense(r, c)});
    }
  }
  return out;
}

void SymMatrix::add(int row, int col, double value) {
  if (row > col) std::swap(row, col);
  if (row < 0 || col >= dim_) throw Error(Errc::dimension_mismatch, "matrix entry out of range");
  for (auto& e : entries_) {
    if (e.row == row && e.col == col) {
      e.value += value;
      return;
    }
  }
  entries_.push_back({row, col, value});
}

Eigen::MatrixXd SymMatrix::dense() const {
  Mat out = Mat::Zero(dim_, dim_);
  add_to(out);
  return out;
}

double SymMatrix::trace_product(const Eigen::MatrixXd& x) const {
  double sum = 0.0;
  for (const auto& e : entries_) {
    sum += e.row == e.col ? e.value * x(e.row, e.row) : e.value * (x(e.row, e.col) + x(e.col, e.row));
  }
  return sum;
}

void SymMatrix::add_to(Eigen::MatrixXd& target, double scale) const {
  for (const auto& e : entries_) {
    target(e.row, e.col) += scale * e.value;
    if (e.row != e.col) target(e.col, e.row) += scale * e.value;
  }
}

const char* to_string(SdpStatus status) noexcept {
  switch (status) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::limit: return "limit";
    case SdpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

SdpStatus parse_sdp_status(std::string_view text) {
  for (auto s : {SdpStatus::optimal, SdpStatus::infeasible, SdpStatus::limit, SdpStatus::numerical_failure}) {
    if (text == to_string(s)) return s;
  }
  throw Error(Errc::invalid_input, "unknown solver status '" + std::string(text) + "'");
}

void SdpProblem::validate() const {
  if (block_dims.empty()) throw Error(Errc::invalid_input, "an SDP needs at least one block");
  for (int d : block_dims) {
    if (d < 1) throw Error(Errc::invalid_input, "block dimensions must be positive");
  }
  auto check_term = [&](const BlockTerm& t) {
    if (t.block < 0 || t.block >= static_cast<int>(block_dims.size())) {
      throw Error(Errc::dimension_mismatch, "term references unknown block " + std::to_string(t.block));
    }
    if (t.matrix.dim() != block_dims[static_cast<std::size_t>(t.block)]) {
      throw Error(Errc::dimension_mismatch, "coefficient dimension does not match block " + std::to_string(t.block));
    }
    for (const auto& e : t.matrix.entries()) {
      if (!std::isfinite(e.value)) throw Error(Errc::invalid_input, "non-finite coefficient");
      if (e.row > e.col || e.row < 0 || e.col >= t.matrix.dim()) throw Error(Errc::invalid_input, "bad entry index");
    }
  };
  for (const auto& t : objective) check_term(t);
  for (const auto& c : constraints) {
    if (!std::isfinite(c.rhs)) throw Error(Errc::invalid_input, "non-finite right-hand side");
    for (const auto& t : c.terms) check_term(t);
  }
  if (trace_bound && !(*trace_bound >= 0.0)) throw Error(Errc::invalid_input, "trace bound must be >= 0");
}

namespace {

double min_eigenvalue(const Mat& m) {
  if (m.rows() == 1) return m(0, 0);
  return Eigen::SelfAdjointEigenSolver<Mat>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

// The interior-point iteration runs in extended precision: optimal
// multipliers of guessing-probability problems with tiny table entries reach
// 1e4 and beyond, and double precision then stalls the primal residual.
using Real = long double;
using RMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using RVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

Real trace_product(const SymMatrix& a, const RMat& x) {
  Real sum = 0.0L;
  for (const auto& e : a.entries()) {
    sum += e.row == e.col ? e.value * x(e.row, e.row) : e.value * (x(e.row, e.col) + x(e.col, e.row));
  }
  return sum;
}

void add_into(const SymMatrix& a, RMat& target, Real scale) {
  for (const auto& e : a.entries()) {
    target(e.row, e.col) += scale * e.value;
    if (e.row != e.col) target(e.col, e.row) += scale * e.value;
  }
}

RMat symmetrized(const RMat& m) { return 0.5L * (m + m.transpose()); }

Real min_eigenvalue(const RMat& m) {
  if (m.rows() == 1) return m(0, 0);
  return Eigen::SelfAdjointEigenSolver<RMat>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// Largest alpha with x + alpha * dx PSD (infinity if unbounded, 0 if x is not PD).
Real max_step(const RMat& x, const RMat& dx) {
  if (x.rows() == 1) {
    if (!(x(0, 0) > 0.0L)) return 0.0L;
    return dx(0, 0) >= 0.0L ? std::numeric_limits<Real>::infinity() : -x(0, 0) / dx(0, 0);
  }
  Eigen::LLT<RMat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0L;
  const auto lower = llt.matrixL();
  RMat half = lower.solve(dx);
  RMat scaled = lower.solve(half.transpose());
  const Real lambda = min_eigenvalue(symmetrized(scaled));
  return lambda >= 0.0L ? std::numeric_limits<Real>::infinity() : -1.0L / lambda;
}

// W A W for sparse symmetric A.
RMat sandwich(const RMat& w, const SymMatrix& a) {
  const int n = a.dim();
  RMat out = RMat::Zero(n, n);
  for (const auto& e : a.entries()) {
    out.noalias() += e.value * w.col(e.row) * w.row(e.col);
    if (e.row != e.col) out.noalias() += e.value * w.col(e.col) * w.row(e.row);
  }
  return out;
}

struct Block {
  int dim = 0;
  std::vector<int> constraint;    // sorted constraint ids
  std::vector<SymMatrix> coeff;   // merged coefficient per constraint id
  std::vector<Eigen::Index> slot; // Schur value slots for pairs p >= q, packed p(p+1)/2 + q
  RMat c;
};

class InteriorPoint {
 public:
  InteriorPoint(const SdpProblem& problem, const SdpOptions& options)
      : problem_(problem), options_(options), sign_(problem.maximize ? 1.0L : -1.0L) {
    const auto k = problem.block_dims.size();
    blocks_.resize(k);
    for (std::size_t b = 0; b < k; ++b) {
      blocks_[b].dim = problem.block_dims[b];
      blocks_[b].c = RMat::Zero(blocks_[b].dim, blocks_[b].dim);
      total_dim_ += blocks_[b].dim;
    }
    for (const auto& t : problem.objective) add_into(t.matrix, blocks_[static_cast<std::size_t>(t.block)].c, sign_);
    m_ = static_cast<Eigen::Index>(problem.constraints.size());
    rhs_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const auto& con = problem.constraints[static_cast<std::size_t>(i)];
      rhs_(i) = con.rhs;
      for (const auto& t : con.terms) {
        auto& blk = blocks_[static_cast<std::size_t>(t.block)];
        if (!blk.constraint.empty() && blk.constraint.back() == i) {
          for (const auto& e : t.matrix.entries()) blk.coeff.back().add(e.row, e.col, e.value);
        } else {
          blk.constraint.push_back(static_cast<int>(i));
          blk.coeff.push_back(t.matrix);
        }
      }
    }
    build_schur_pattern();
  }

  SdpSolution run() {
    initial_point();
    SdpSolution sol;
    sol.status = SdpStatus::limit;
    int iter = 0;
    for (;; ++iter) {
      if (!compute_scaling()) {
        sol.status = SdpStatus::numerical_failure;
        break;
      }
      residuals();
      if (iter == 0) {
        pinf0_ = std::max(pinf_, 1e-30L);
        mu0_ = mu_;
      }
      remember_best(iter);
      if (options_.verbose) {
        std::cerr << "iter " << iter << " pobj " << static_cast<double>(pobj_) << " dobj "
                  << static_cast<double>(dobj_) << " gap " << static_cast<double>(gap_) << " pinf "
                  << static_cast<double>(pinf_) << " dinf " << static_cast<double>(dinf_) << " mu "
                  << static_cast<double>(mu_) << " ap " << static_cast<double>(last_ap_) << " ad "
                  << static_cast<double>(last_ad_) << "\n";
      }
      if (converged()) {
        sol.status = SdpStatus::optimal;
        break;
      }
      if (primal_infeasibility_certified()) {
        sol.status = SdpStatus::infeasible;
        break;
      }
      if (iter >= options_.max_iter) break;
      if (!step()) {
        sol.status = SdpStatus::numerical_failure;
        break;
      }
    }
    if (sol.status != SdpStatus::optimal && sol.status != SdpStatus::infeasible && best_.valid) {
      // Hand back the most nearly optimal iterate rather than the last one.
      x_ = best_.x;
      z_ = best_.z;
      y_ = best_.y;
      iter = best_.iteration;
    }
    if (sol.status != SdpStatus::infeasible && polish_primal()) {
      residuals();
      if (converged()) sol.status = SdpStatus::optimal;
    }
    residuals();
    sol.iterations = iter;
    for (const auto& x : x_) sol.primal.push_back(x.cast<double>());
    for (const auto& z : z_) sol.dual_slack.push_back(z.cast<double>());
    sol.dual = y_.cast<double>();
    sol.primal_value = static_cast<double>(sign_ * pobj_);
    sol.dual_value = static_cast<double>(sign_ * dobj_);
    sol.gap = static_cast<double>(gap_);
    return sol;
  }

 private:
  struct Snapshot {
    bool valid = false;
    Real merit = std::numeric_limits<Real>::infinity();
    int iteration = 0;
    std::vector<RMat> x, z;
    RVec y;
  };

  // Projects X onto A(X) = b along W A^T(u) W, the primal part of a Newton
  // step with the complementarity target switched off. Large multipliers turn
  // residuals of 1e-11 into objective errors of 1e-6, which the damped
  // interior-point steps cannot remove once the iterates hug the boundary.
  bool polish_primal() {
    bool changed = false;
    for (int pass = 0; pass < 3; ++pass) {
      if (!compute_scaling()) break;
      residuals();
      if (pinf_ == 0.0L) break;
      if (!assemble_and_factor()) break;
      const RVec u = solve_schur(rp_);
      std::vector<RMat> candidate = x_;
      bool psd = true;
      for (std::size_t b = 0; b < blocks_.size() && psd; ++b) {
        candidate[b] += symmetrized(RMat(w_[b] * apply_at(b, u) * w_[b]));
        psd = min_eigenvalue(candidate[b]) > 0.0L;
      }
      if (options_.verbose) {
        std::cerr << "polish pass " << pass << " psd " << psd << " pinf " << static_cast<double>(pinf_) << "\n";
      }
      if (!psd) break;
      const Real before = pinf_;
      std::swap(candidate, x_);
      residuals();
      if (!(pinf_ < before)) {
        std::swap(candidate, x_);
        break;
      }
      changed = true;
      if (options_.verbose) {
        std::cerr << "  polished pobj " << static_cast<double>(pobj_) << " dobj " << static_cast<double>(dobj_)
                  << " pinf " << static_cast<double>(pinf_) << "\n";
      }
    }
    return changed;
  }

  bool converged() const {
    return gap_ <= options_.tol && pinf_ <= options_.feas_tol && dinf_ <= options_.feas_tol;
  }

  void remember_best(int iter) {
    const Real merit = std::max({gap_ / options_.tol, pinf_ / options_.feas_tol, dinf_ / options_.feas_tol});
    if (!(merit < best_.merit)) return;
    best_.valid = true;
    best_.merit = merit;
    best_.iteration = iter;
    best_.x = x_;
    best_.z = z_;
    best_.y = y_;
  }

  void build_schur_pattern() {
    std::vector<Eigen::Triplet<Real>> triplets;
    for (Eigen::Index i = 0; i < m_; ++i) triplets.emplace_back(i, i, 0.0L);
    for (const auto& blk : blocks_) {
      for (std::size_t p = 0; p < blk.constraint.size(); ++p) {
        for (std::size_t q = 0; q <= p; ++q) triplets.emplace_back(blk.constraint[p], blk.constraint[q], 0.0L);
      }
    }
    schur_.resize(m_, m_);
    schur_.setFromTriplets(triplets.begin(), triplets.end());
    schur_.makeCompressed();
    auto locate = [&](Eigen::Index row, Eigen::Index col) {
      const auto* outer = schur_.outerIndexPtr();
      const auto* inner = schur_.innerIndexPtr();
      const auto* begin = inner + outer[col];
      const auto* end = inner + outer[col + 1];
      return static_cast<Eigen::Index>(std::lower_bound(begin, end, static_cast<int>(row)) - inner);
    };
    diag_slot_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) diag_slot_[static_cast<std::size_t>(i)] = locate(i, i);
    for (auto& blk : blocks_) {
      const std::size_t c = blk.constraint.size();
      blk.slot.resize(c * (c + 1) / 2);
      for (std::size_t p = 0; p < c; ++p) {
        for (std::size_t q = 0; q <= p; ++q) blk.slot[p * (p + 1) / 2 + q] = locate(blk.constraint[p], blk.constraint[q]);
      }
    }
    ldlt_.analyzePattern(schur_);
    scaled_ = schur_;
  }

  void initial_point() {
    const auto k = blocks_.size();
    x_.resize(k);
    z_.resize(k);
    y_ = RVec::Zero(m_);
    for (std::size_t b = 0; b < k; ++b) {
      const auto& blk = blocks_[b];
      const Real n = blk.dim;
      Real xi = std::max(1.0L, std::sqrt(n));
      Real zeta = std::max(1.0L, std::sqrt(n));
      for (std::size_t p = 0; p < blk.constraint.size(); ++p) {
        const Real norm = blk.coeff[p].dense().norm();
        xi = std::max(xi, n * (1.0L + std::abs(rhs_(blk.constraint[p]))) / (1.0L + norm));
        zeta = std::max(zeta, norm);
      }
      zeta = std::max(zeta, blk.c.norm());
      if (problem_.trace_bound && *problem_.trace_bound > 0.0) {
        // Known scale of the primal: start near the centre of the trace simplex.
        xi = *problem_.trace_bound / total_dim_;
        zeta = std::max(1.0L, zeta);
      }
      x_[b] = xi * RMat::Identity(blk.dim, blk.dim);
      z_[b] = zeta * RMat::Identity(blk.dim, blk.dim);
    }
  }

  // Nesterov-Todd scaling per block: G^{-1} X G^{-T} = G^T Z G = diag(lambda).
  bool compute_scaling() {
    const auto k = blocks_.size();
    g_.resize(k);
    ginv_.resize(k);
    w_.resize(k);
    lambda_.resize(k);
    for (std::size_t b = 0; b < k; ++b) {
      if (blocks_[b].dim == 1) {
        const Real x = x_[b](0, 0);
        const Real z = z_[b](0, 0);
        if (!(x > 0.0L) || !(z > 0.0L)) return false;
        const Real g = std::sqrt(std::sqrt(x / z));
        g_[b] = RMat::Constant(1, 1, g);
        ginv_[b] = RMat::Constant(1, 1, 1.0L / g);
        w_[b] = RMat::Constant(1, 1, g * g);
        lambda_[b] = RVec::Constant(1, std::sqrt(x * z));
        continue;
      }
      Eigen::LLT<RMat> lx(x_[b]);
      Eigen::LLT<RMat> lz(z_[b]);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
      const RMat lxm = lx.matrixL();
      const RMat lzm = lz.matrixL();
      Eigen::JacobiSVD<RMat> svd(lzm.transpose() * lxm, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const RVec sv = svd.singularValues();
      if (!(sv.minCoeff() > 0.0L)) return false;
      const RVec root = sv.cwiseSqrt();
      g_[b] = lxm * svd.matrixV() * root.cwiseInverse().asDiagonal();
      ginv_[b] = root.asDiagonal() * svd.matrixV().transpose() *
                 lxm.triangularView<Eigen::Lower>().solve(RMat::Identity(blocks_[b].dim, blocks_[b].dim));
      w_[b] = g_[b] * g_[b].transpose();
      lambda_[b] = sv;
    }
    return true;
  }

  RVec apply_a(const std::vector<RMat>& t) const {
    RVec out = RVec::Zero(m_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      for (std::size_t p = 0; p < blk.constraint.size(); ++p) out(blk.constraint[p]) += trace_product(blk.coeff[p], t[b]);
    }
    return out;
  }

  RMat apply_at(std::size_t b, const RVec& v) const {
    const auto& blk = blocks_[b];
    RMat out = RMat::Zero(blk.dim, blk.dim);
    for (std::size_t p = 0; p < blk.constraint.size(); ++p) add_into(blk.coeff[p], out, v(blk.constraint[p]));
    return out;
  }

  void residuals() {
    rp_ = rhs_ - apply_a(x_);
    rd_.resize(blocks_.size());
    pobj_ = 0.0L;
    Real complementarity = 0.0L;
    dinf_ = 0.0L;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      rd_[b] = blocks_[b].c + z_[b] - apply_at(b, y_);
      dinf_ = std::max(dinf_, rd_[b].cwiseAbs().maxCoeff());
      pobj_ += (blocks_[b].c.cwiseProduct(x_[b])).sum();
      complementarity += (x_[b].cwiseProduct(z_[b])).sum();
    }
    dobj_ = rhs_.dot(y_);
    pinf_ = m_ > 0 ? rp_.cwiseAbs().maxCoeff() : 0.0L;
    mu_ = complementarity / total_dim_;
    gap_ = std::abs(dobj_ - pobj_) / std::max(1.0L, std::abs(pobj_));
  }

  // Farkas: y with A^T y PSD and b^T y < 0 proves the primal infeasible.
  bool primal_infeasibility_certified() const {
    if (!(dobj_ < 0.0L)) return false;
    const Real scale = -dobj_;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (min_eigenvalue(apply_at(b, y_)) / scale < -options_.feas_tol) return false;
    }
    return true;
  }

  bool assemble_and_factor() {
    Real* values = schur_.valuePtr();
    std::fill(values, values + schur_.nonZeros(), 0.0L);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      for (std::size_t p = 0; p < blk.constraint.size(); ++p) {
        const RMat product = sandwich(w_[b], blk.coeff[p]);
        for (std::size_t q = 0; q <= p; ++q) values[blk.slot[p * (p + 1) / 2 + q]] += trace_product(blk.coeff[q], product);
      }
    }
    // Jacobi scaling: blocks that vanish at the optimum make rows differ by
    // many orders of magnitude, which a plain factorisation cannot absorb.
    scale_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Real d = values[diag_slot_[static_cast<std::size_t>(i)]];
      scale_(i) = d > 0.0L ? 1.0L / std::sqrt(d) : 1.0L;
    }
    scaled_ = schur_;
    Real* scaled = scaled_.valuePtr();
    for (Eigen::Index col = 0; col < m_; ++col) {
      for (auto k = schur_.outerIndexPtr()[col]; k < schur_.outerIndexPtr()[col + 1]; ++k) {
        scaled[k] *= scale_(col) * scale_(schur_.innerIndexPtr()[k]);
      }
    }
    Real shift = 0.0L;
    for (int attempt = 0; attempt < 8; ++attempt) {
      ldlt_.factorize(scaled_);
      if (ldlt_.info() == Eigen::Success && ldlt_.vectorD().minCoeff() > 0.0L) return true;
      const Real next = attempt == 0 ? 1e-17L : 100.0L * shift;
      for (auto s : diag_slot_) scaled[s] += next - shift;
      shift = next;
    }
    return false;
  }

  RVec solve_schur(const RVec& rhs) const {
    auto scaled_solve = [&](const RVec& r) -> RVec { return scale_.cwiseProduct(ldlt_.solve(scale_.cwiseProduct(r))); };
    RVec dy = scaled_solve(rhs);
    for (int pass = 0; pass < 2; ++pass) {
      const RVec residual = rhs - schur_.selfadjointView<Eigen::Lower>() * dy;
      dy += scaled_solve(residual);
    }
    return dy;
  }

  // Direction for the scaled complementarity equation
  // sym(Lambda (dX~ + dZ~)) = R, with dX~ = G^{-1} dX G^{-T} and dZ~ = G^T dZ G.
  void direction(const std::vector<RMat>& r, std::vector<RMat>& dx, RVec& dy, std::vector<RMat>& dz) const {
    const auto k = blocks_.size();
    std::vector<RMat> t(k), wrw(k);
    for (std::size_t b = 0; b < k; ++b) {
      const auto& l = lambda_[b];
      RMat rc = r[b];
      for (Eigen::Index j = 0; j < rc.cols(); ++j) {
        for (Eigen::Index i = 0; i < rc.rows(); ++i) rc(i, j) *= 2.0L / (l(i) + l(j));
      }
      t[b] = g_[b] * rc * g_[b].transpose();
      wrw[b] = w_[b] * rd_[b] * w_[b];
    }
    dy = solve_schur(apply_a(t) + apply_a(wrw) - rp_);
    dx.resize(k);
    dz.resize(k);
    for (std::size_t b = 0; b < k; ++b) {
      dz[b] = apply_at(b, dy) - rd_[b];
      dx[b] = symmetrized(RMat(t[b] - w_[b] * dz[b] * w_[b]));
    }
  }

  std::pair<Real, Real> step_lengths(const std::vector<RMat>& dx, const std::vector<RMat>& dz) const {
    Real ap = std::numeric_limits<Real>::infinity();
    Real ad = std::numeric_limits<Real>::infinity();
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      ap = std::min(ap, max_step(x_[b], dx[b]));
      ad = std::min(ad, max_step(z_[b], dz[b]));
    }
    return {ap, ad};
  }

  // Mehrotra predictor-corrector step.
  bool step() {
    if (!assemble_and_factor()) return false;
    const auto k = blocks_.size();

    std::vector<RMat> r(k);
    for (std::size_t b = 0; b < k; ++b) r[b] = -RMat(lambda_[b].cwiseAbs2().asDiagonal());
    std::vector<RMat> dx_aff, dz_aff;
    RVec dy_aff;
    direction(r, dx_aff, dy_aff, dz_aff);
    auto [ap, ad] = step_lengths(dx_aff, dz_aff);
    ap = std::min(1.0L, ap);
    ad = std::min(1.0L, ad);
    Real mu_aff = 0.0L;
    for (std::size_t b = 0; b < k; ++b) {
      mu_aff += ((x_[b] + ap * dx_aff[b]).cwiseProduct(z_[b] + ad * dz_aff[b])).sum();
    }
    mu_aff /= total_dim_;
    const Real ratio = std::clamp(mu_aff / mu_, 0.0L, 1.0L);
    // Aggressive centring only when the affine step made progress.
    const Real expon = std::max(1.0L, 3.0L * std::min(ap, ad) * std::min(ap, ad));
    Real sigma = std::pow(ratio, expon);
    // Keep complementarity from racing ahead of primal feasibility: once mu
    // shrinks faster than the residual, the iterates jam against the boundary.
    if (pinf0_ > 0.0L && mu0_ > 0.0L && pinf_ / pinf0_ > 10.0L * mu_ / mu0_ && pinf_ > options_.feas_tol) {
      sigma = std::max(sigma, 0.5L);
    }

    for (std::size_t b = 0; b < k; ++b) {
      const RMat sx = ginv_[b] * dx_aff[b] * ginv_[b].transpose();
      const RMat sz = g_[b].transpose() * dz_aff[b] * g_[b];
      r[b] = sigma * mu_ * RMat::Identity(blocks_[b].dim, blocks_[b].dim) -
             RMat(lambda_[b].cwiseAbs2().asDiagonal()) - symmetrized(RMat(sx * sz));
    }
    std::vector<RMat> dx, dz;
    RVec dy;
    direction(r, dx, dy, dz);
    if (!dy.allFinite()) return false;
    std::tie(ap, ad) = step_lengths(dx, dz);
    const Real fraction =
        std::max(0.9L, static_cast<Real>(options_.step_fraction) * std::min(1.0L, 0.9L + 0.1L * std::min(ap, ad)));
    ap = std::min(1.0L, fraction * ap);
    ad = std::min(1.0L, fraction * ad);
    for (std::size_t b = 0; b < k; ++b) {
      x_[b] += ap * dx[b];
      z_[b] += ad * dz[b];
    }
    y_ += ad * dy;
    last_ap_ = ap;
    last_ad_ = ad;
    return true;
  }

  const SdpProblem& problem_;
  SdpOptions options_;
  Real sign_;
  Real total_dim_ = 0.0L;
  Eigen::Index m_ = 0;
  RVec rhs_;
  std::vector<Block> blocks_;
  Eigen::SparseMatrix<Real> schur_, scaled_;
  RVec scale_;
  std::vector<Eigen::Index> diag_slot_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;

  std::vector<RMat> x_, z_, rd_, g_, ginv_, w_;
  std::vector<RVec> lambda_;
  RVec y_, rp_;
  Snapshot best_;
  Real last_ap_ = 0.0L, last_ad_ = 0.0L, pinf0_ = 0.0L, mu0_ = 0.0L;
  Real pobj_ = 0.0L, dobj_ = 0.0L, gap_ = 0.0L, pinf_ = 0.0L, dinf_ = 0.0L, mu_ = 0.0L;
};

// Blockwise A^T y - sign * C, rebuilt from the problem terms.
std::vector<Mat> recomputed_slack(const SdpProblem& problem, const Vec& y) {
  const double sign = problem.maximize ? 1.0 : -1.0;
  std::vector<Mat> slack;
  for (int d : problem.block_dims) slack.push_back(Mat::Zero(d, d));
  for (const auto& t : problem.objective) t.matrix.add_to(slack[static_cast<std::size_t>(t.block)], -sign);
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    for (const auto& t : problem.constraints[i].terms) {
      t.matrix.add_to(slack[static_cast<std::size_t>(t.block)], y(static_cast<Eigen::Index>(i)));
    }
  }
  return slack;
}

void require_matching(const SdpProblem& problem, const SdpSolution& solution) {
  const auto k = problem.block_dims.size();
  if (solution.primal.size() != k || solution.dual_slack.size() != k ||
      solution.dual.size() != static_cast<Eigen::Index>(problem.constraints.size())) {
    throw Error(Errc::dimension_mismatch, "solution does not match the problem shape");
  }
  for (std::size_t b = 0; b < k; ++b) {
    const int d = problem.block_dims[b];
    if (solution.primal[b].rows() != d || solution.primal[b].cols() != d || solution.dual_slack[b].rows() != d ||
        solution.dual_slack[b].cols() != d) {
      throw Error(Errc::dimension_mismatch, "block " + std::to_string(b) + " has the wrong dimension");
    }
  }
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  InteriorPoint ipm(problem, options);
  return ipm.run();
}

FeasibilityReport check_feasibility(const SdpProblem& problem, const SdpSolution& solution) {
  require_matching(problem, solution);
  const double sign = problem.maximize ? 1.0 : -1.0;
  const auto k = problem.block_dims.size();
  FeasibilityReport report;

  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    double lhs = 0.0;
    for (const auto& t : con.terms) lhs += t.matrix.trace_product(solution.primal[static_cast<std::size_t>(t.block)]);
    report.primal_residual = std::max(report.primal_residual, std::abs(lhs - con.rhs));
    report.dual_objective += sign * con.rhs * solution.dual(static_cast<Eigen::Index>(i));
  }
  for (const auto& t : problem.objective) {
    report.primal_objective += t.matrix.trace_product(solution.primal[static_cast<std::size_t>(t.block)]);
  }

  const auto slack = recomputed_slack(problem, solution.dual);
  report.primal_min_eig = std::numeric_limits<double>::infinity();
  report.dual_min_eig = std::numeric_limits<double>::infinity();
  report.dual_recomputed_min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < k; ++b) {
    report.dual_residual = std::max(report.dual_residual, (slack[b] - solution.dual_slack[b]).cwiseAbs().maxCoeff());
    const double pe = min_eigenvalue(symmetrized(solution.primal[b]));
    const double de = min_eigenvalue(symmetrized(solution.dual_slack[b]));
    report.primal_block_min_eig.push_back(pe);
    report.dual_block_min_eig.push_back(de);
    report.primal_min_eig = std::min(report.primal_min_eig, pe);
    report.dual_min_eig = std::min(report.dual_min_eig, de);
    report.dual_recomputed_min_eig = std::min(report.dual_recomputed_min_eig, min_eigenvalue(slack[b]));
  }
  return report;
}

double certified_upper_bound(const SdpProblem& problem, const SdpSolution& solution, double tol) {
  require_matching(problem, solution);
  return certified_upper_bound(problem, solution.dual, tol);
}

double certified_upper_bound(const SdpProblem& problem, const Eigen::VectorXd& dual, double tol) {
  if (!problem.maximize) throw Error(Errc::invalid_input, "certified upper bounds need a maximisation problem");
  if (dual.size() != static_cast<Eigen::Index>(problem.constraints.size())) {
    throw Error(Errc::dimension_mismatch, "one multiplier per constraint required");
  }
  if (!dual.allFinite()) throw Error(Errc::uncertified, "dual multipliers are not finite");
  double bound = 0.0;
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    bound += problem.constraints[i].rhs * dual(static_cast<Eigen::Index>(i));
  }
  double lambda = std::numeric_limits<double>::infinity();
  for (const auto& s : recomputed_slack(problem, dual)) lambda = std::min(lambda, min_eigenvalue(s));
  if (lambda >= 0.0) return bound;
  // For feasible X: <C, X> = b^T y - <A^T y - C, X> <= b^T y - lambda_min * sum tr(X_k).
  if (problem.trace_bound) return bound - lambda * *problem.trace_bound;
  if (lambda < -tol) {
    throw Error(Errc::uncertified, "dual slack has eigenvalue " + std::to_string(lambda));
  }
  return bound;
}

}  // namespace qcert
