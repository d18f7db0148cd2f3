#include "qcert/certification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "qcert/digest.hpp"
#include "qcert/error.hpp"

namespace qcert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

namespace {

// Orthonormal basis of the complement of span{v_x : x in zero_inputs}.
Mat complement_basis(const StateEmbedding& embedding, const std::vector<int>& zero_inputs) {
  const int dim = embedding.size();
  if (zero_inputs.empty()) return Mat::Identity(dim, dim);
  Mat span(dim, static_cast<Eigen::Index>(zero_inputs.size()));
  for (std::size_t k = 0; k < zero_inputs.size(); ++k) span.col(static_cast<Eigen::Index>(k)) = embedding.vectors.col(zero_inputs[k]);
  Eigen::SelfAdjointEigenSolver<Mat> eig(span * span.transpose());
  std::vector<Eigen::Index> keep;
  const double scale = std::max(1.0, eig.eigenvalues().maxCoeff());
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (eig.eigenvalues()(i) <= 1e-10 * scale) keep.push_back(i);
  }
  Mat basis(dim, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = eig.eigenvectors().col(keep[k]);
  return basis;
}

// Compresses a symmetric I x I matrix onto a block's face.
SymMatrix compress(const Mat& basis, const Mat& full) {
  Mat c = basis.transpose() * full * basis;
  // Flush round-off so identity bases keep exactly sparse coefficients.
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (std::abs(c.data()[i]) < 1e-15) c.data()[i] = 0.0;
  }
  return SymMatrix::from_dense(0.5 * (c + c.transpose()));
}

// The linear functional N -> tr(A N) written in upper-triangular coordinates.
void append_coordinates(const SymMatrix& a, Eigen::Index offset, Vec& out) {
  for (const auto& e : a.entries()) {
    // Offset of (row, col) in the packed upper triangle of a dim x dim block.
    const Eigen::Index pos = offset + e.col * (e.col + 1) / 2 + e.row;
    out(pos) += e.row == e.col ? e.value : 2.0 * e.value;
  }
}

struct Candidate {
  std::vector<SymMatrix> per_outcome;  // coefficient on the block of each outcome (empty dim allowed)
  double rhs = 0.0;
  int x = -1;  // data constraint input, -1 otherwise
  int b = -1;  // outcome, or the kind of a local constraint
};

}  // namespace

StateEmbedding embed_states(const GramMatrix& gram) {
  gram.validate();
  const Eigen::Index n = gram.size();
  Mat lower = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = gram.entries(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (d < -kPsdTolerance) throw Error(Errc::not_psd, "negative pivot " + std::to_string(d));
    lower(j, j) = std::sqrt(std::max(d, 0.0));
    if (lower(j, j) <= kPsdTolerance) continue;  // dependent direction
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = gram.entries(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= lower(i, k) * lower(j, k);
      lower(i, j) = v / lower(j, j);
    }
  }
  StateEmbedding out{lower.transpose()};
  const double error = (out.vectors.transpose() * out.vectors - gram.entries).cwiseAbs().maxCoeff();
  if (error > kPsdTolerance) throw Error(Errc::not_psd, "embedding misses the Gram matrix by " + std::to_string(error));
  return out;
}

std::vector<Strategy> enumerate_strategies(int inputs, int outcomes, std::int64_t limit) {
  if (inputs < 1 || outcomes < 1) throw Error(Errc::invalid_parameters, "need at least one input and one outcome");
  double count = std::pow(static_cast<double>(outcomes), inputs);
  if (count > static_cast<double>(limit)) {
    throw Error(Errc::limit_exceeded, std::to_string(static_cast<long long>(count)) + " strategies (" +
                                          std::to_string(outcomes) + "^" + std::to_string(inputs) +
                                          ") exceed the limit " + std::to_string(limit) +
                                          "; group outcomes first");
  }
  std::vector<Strategy> out;
  out.reserve(static_cast<std::size_t>(count));
  Strategy current(static_cast<std::size_t>(inputs), 0);
  while (true) {
    out.push_back(current);
    int pos = inputs - 1;
    while (pos >= 0 && current[static_cast<std::size_t>(pos)] == outcomes - 1) current[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
    ++current[static_cast<std::size_t>(pos)];
  }
  return out;
}

GuessSdp build_guess_sdp(const StateEmbedding& embedding, const CondProbTable& table, const GuessSdpOptions& options) {
  const int inputs = embedding.size();
  const int outcomes = static_cast<int>(table.outcome_count());
  if (table.input_count() != inputs) {
    throw Error(Errc::dimension_mismatch, "table has " + std::to_string(table.input_count()) + " inputs, embedding " +
                                              std::to_string(inputs));
  }
  table.validate(options.row_tolerance);

  std::vector<double> weights = options.input_weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(inputs), 1.0 / inputs);
  if (static_cast<int>(weights.size()) != inputs) throw Error(Errc::dimension_mismatch, "one weight per input required");
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(Errc::invalid_parameters, "input weights must be non-negative");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) throw Error(Errc::invalid_parameters, "input weights must sum to 1");

  GuessSdp sdp;
  sdp.inputs = inputs;
  sdp.outcomes = outcomes;

  // Outcomes each input can produce, and the face each outcome's operators live on.
  std::vector<std::vector<int>> support(static_cast<std::size_t>(inputs));
  std::vector<Mat> basis(static_cast<std::size_t>(outcomes));
  for (int b = 0; b < outcomes; ++b) {
    std::vector<int> zero_inputs;
    for (int x = 0; x < inputs; ++x) {
      if (!options.reduce || table.probs(x, b) > options.zero_threshold) {
        support[static_cast<std::size_t>(x)].push_back(b);
      } else {
        zero_inputs.push_back(x);
      }
    }
    basis[static_cast<std::size_t>(b)] = complement_basis(embedding, zero_inputs);
  }

  if (options.zero_threshold < 0.0) throw Error(Errc::invalid_parameters, "zero threshold must be >= 0");
  for (int x = 0; x < inputs; ++x) {
    if (support[static_cast<std::size_t>(x)].empty()) {
      throw Error(Errc::invalid_parameters, "input " + std::to_string(x) + " has no outcome above the zero threshold");
    }
  }
  sdp.support = support;
  double count = 1.0;
  for (const auto& s : support) count *= static_cast<double>(s.size());
  if (count > static_cast<double>(options.max_strategies)) {
    throw Error(Errc::limit_exceeded, std::to_string(static_cast<long long>(count)) + " strategies exceed the limit " +
                                          std::to_string(options.max_strategies) + "; group outcomes first");
  }
  if (options.reduce) {
    Strategy current(static_cast<std::size_t>(inputs), 0);
    while (true) {
      Strategy s(static_cast<std::size_t>(inputs));
      for (int x = 0; x < inputs; ++x) s[static_cast<std::size_t>(x)] = support[static_cast<std::size_t>(x)][static_cast<std::size_t>(current[static_cast<std::size_t>(x)])];
      sdp.strategies.push_back(std::move(s));
      int pos = inputs - 1;
      while (pos >= 0 && current[static_cast<std::size_t>(pos)] + 1 == static_cast<int>(support[static_cast<std::size_t>(pos)].size())) {
        current[static_cast<std::size_t>(pos--)] = 0;
      }
      if (pos < 0) break;
      ++current[static_cast<std::size_t>(pos)];
    }
  } else {
    sdp.strategies = enumerate_strategies(inputs, outcomes, options.max_strategies);
  }

  // Per-strategy template: every strategy owns one block per outcome with a non-trivial face.
  std::vector<int> block_of_outcome(static_cast<std::size_t>(outcomes), -1);
  std::vector<int> template_outcomes;
  std::vector<Eigen::Index> offset(static_cast<std::size_t>(outcomes), 0);
  Eigen::Index coords = 0;
  for (int b = 0; b < outcomes; ++b) {
    const auto d = basis[static_cast<std::size_t>(b)].cols();
    if (d == 0) continue;
    block_of_outcome[static_cast<std::size_t>(b)] = static_cast<int>(template_outcomes.size());
    template_outcomes.push_back(b);
    offset[static_cast<std::size_t>(b)] = coords;
    coords += d * (d + 1) / 2;
  }
  const int per_strategy = static_cast<int>(template_outcomes.size());

  auto coordinates = [&](const Candidate& c) {
    Vec v = Vec::Zero(coords);
    for (int b : template_outcomes) append_coordinates(c.per_outcome[static_cast<std::size_t>(b)], offset[static_cast<std::size_t>(b)], v);
    return v;
  };
  auto compressed_all = [&](const Mat& full) {
    std::vector<SymMatrix> out(static_cast<std::size_t>(outcomes));
    for (int b : template_outcomes) out[static_cast<std::size_t>(b)] = compress(basis[static_cast<std::size_t>(b)], full);
    return out;
  };

  // Candidate constraints on one strategy's blocks: the POVM-consistency
  // equalities (sum_b M_b proportional to identity), the normalisation
  // sum_s c_s = 1, then table reproduction for every (x, b).
  std::vector<Candidate> local_candidates;
  int kind = 0;
  for (int i = 0; i < inputs; ++i) {
    for (int j = i; j < inputs; ++j) {
      if (i == 0 && j == 0) continue;
      Mat l = Mat::Zero(inputs, inputs);
      if (i == j) {
        l(0, 0) = 1.0;
        l(i, i) = -1.0;
      } else {
        l(i, j) = 0.5;
        l(j, i) = 0.5;
      }
      local_candidates.push_back({compressed_all(l), 0.0, -1, kind++});
    }
  }
  std::vector<Candidate> global_candidates;
  {
    Mat e00 = Mat::Zero(inputs, inputs);
    e00(0, 0) = 1.0;
    global_candidates.push_back({compressed_all(e00), 1.0});
  }
  for (int x = 0; x < inputs; ++x) {
    const Vec v = embedding.vectors.col(x);
    const Mat rho = v * v.transpose();
    for (int b : support[static_cast<std::size_t>(x)]) {
      Candidate c;
      c.per_outcome.resize(static_cast<std::size_t>(outcomes));
      if (block_of_outcome[static_cast<std::size_t>(b)] >= 0) c.per_outcome[static_cast<std::size_t>(b)] = compress(basis[static_cast<std::size_t>(b)], rho);
      c.rhs = table.probs(x, b);
      c.x = x;
      c.b = b;
      global_candidates.push_back(std::move(c));
    }
  }

  // Keep a linearly independent subset. Dependencies are identical on every
  // strategy, so one template decides for all of them.
  std::vector<Vec> accepted;
  std::vector<double> accepted_rhs;
  auto independent = [&](const Candidate& c, bool& consistent) {
    const Vec v = coordinates(c);
    consistent = true;
    if (v.norm() == 0.0) {
      consistent = std::abs(c.rhs) <= 1e-12;
      return false;
    }
    if (accepted.empty()) return true;
    Mat basis_cols(coords, static_cast<Eigen::Index>(accepted.size()));
    for (std::size_t k = 0; k < accepted.size(); ++k) basis_cols.col(static_cast<Eigen::Index>(k)) = accepted[k];
    Eigen::ColPivHouseholderQR<Mat> qr(basis_cols);
    const Vec alpha = qr.solve(v);
    if ((basis_cols * alpha - v).norm() > 1e-9 * v.norm()) return true;
    double implied = 0.0;
    for (std::size_t k = 0; k < accepted_rhs.size(); ++k) implied += alpha(static_cast<Eigen::Index>(k)) * accepted_rhs[k];
    consistent = std::abs(implied - c.rhs) <= 1e-9;
    return false;
  };

  std::vector<Candidate> locals;
  for (auto& c : local_candidates) {
    bool consistent = true;
    if (!options.independent || independent(c, consistent)) {
      accepted.push_back(coordinates(c));
      accepted_rhs.push_back(0.0);
      sdp.local_kinds.push_back(c.b);
      locals.push_back(std::move(c));
    }
  }
  std::vector<Candidate> globals;
  for (auto& c : global_candidates) {
    bool consistent = true;
    // A dependent but inconsistent constraint is kept so the solver reports infeasibility.
    if (!options.independent || independent(c, consistent) || !consistent) {
      sdp.globals.push_back({c.x, c.b});
      accepted.push_back(coordinates(c));
      accepted_rhs.push_back(c.rhs);
      globals.push_back(std::move(c));
    }
  }
  sdp.local_constraints = static_cast<int>(locals.size());
  sdp.data_constraints = 0;
  for (const auto& g : globals) sdp.data_constraints += g.x >= 0 ? 1 : 0;

  // Blocks.
  auto& problem = sdp.problem;
  const auto strategies = sdp.strategies.size();
  for (std::size_t s = 0; s < strategies; ++s) {
    for (int b : template_outcomes) {
      problem.block_dims.push_back(static_cast<int>(basis[static_cast<std::size_t>(b)].cols()));
      sdp.blocks.push_back({static_cast<int>(s), b, basis[static_cast<std::size_t>(b)]});
    }
  }
  auto block_id = [&](std::size_t s, int b) {
    return static_cast<int>(s) * per_strategy + block_of_outcome[static_cast<std::size_t>(b)];
  };

  // Objective: sum_x w_x tr(rho_x M_{s_x}^s).
  std::vector<Mat> rho(static_cast<std::size_t>(inputs));
  for (int x = 0; x < inputs; ++x) rho[static_cast<std::size_t>(x)] = embedding.vectors.col(x) * embedding.vectors.col(x).transpose();
  for (std::size_t s = 0; s < strategies; ++s) {
    const auto& strategy = sdp.strategies[s];
    for (int b : template_outcomes) {
      Mat weight = Mat::Zero(inputs, inputs);
      bool any = false;
      for (int x = 0; x < inputs; ++x) {
        if (strategy[static_cast<std::size_t>(x)] == b && weights[static_cast<std::size_t>(x)] != 0.0) {
          weight += weights[static_cast<std::size_t>(x)] * rho[static_cast<std::size_t>(x)];
          any = true;
        }
      }
      if (!any) continue;
      auto c = compress(basis[static_cast<std::size_t>(b)], weight);
      if (!c.entries().empty()) problem.objective.push_back({block_id(s, b), std::move(c)});
    }
  }

  for (std::size_t s = 0; s < strategies; ++s) {
    for (const auto& l : locals) {
      SdpConstraint con;
      for (int b : template_outcomes) {
        const auto& m = l.per_outcome[static_cast<std::size_t>(b)];
        if (!m.entries().empty()) con.terms.push_back({block_id(s, b), m});
      }
      problem.constraints.push_back(std::move(con));
    }
  }
  for (const auto& g : globals) {
    SdpConstraint con;
    con.rhs = g.rhs;
    for (std::size_t s = 0; s < strategies; ++s) {
      for (int b : template_outcomes) {
        const auto& m = g.per_outcome[static_cast<std::size_t>(b)];
        if (!m.entries().empty()) con.terms.push_back({block_id(s, b), m});
      }
    }
    problem.constraints.push_back(std::move(con));
  }
  // sum over all blocks of tr(M) = sum_s c_s tr(1) = I.
  problem.trace_bound = static_cast<double>(inputs);
  problem.maximize = true;
  return sdp;
}

std::string table_digest(const CondProbTable& table) {
  Fnv1a h;
  for (const auto& s : table.inputs) h.update(s);
  for (const auto& s : table.outcomes) h.update(s);
  for (Eigen::Index x = 0; x < table.probs.rows(); ++x) {
    for (Eigen::Index b = 0; b < table.probs.cols(); ++b) h.update_value(table.probs(x, b));
  }
  return h.hex();
}

std::string problem_digest(const SdpProblem& problem) {
  Fnv1a h;
  h.update_value(problem.maximize);
  for (int d : problem.block_dims) h.update_value(d);
  auto term = [&](const BlockTerm& t) {
    h.update_value(t.block);
    for (const auto& e : t.matrix.entries()) {
      h.update_value(e.row);
      h.update_value(e.col);
      h.update_value(e.value);
    }
  };
  for (const auto& t : problem.objective) term(t);
  for (const auto& c : problem.constraints) {
    h.update_value(c.rhs);
    h.update_value(c.terms.size());
    for (const auto& t : c.terms) term(t);
  }
  h.update_value(problem.trace_bound.value_or(-1.0));
  return h.hex();
}

namespace {

GuessSdpOptions certificate_options(const std::vector<double>& weights, std::int64_t max_strategies, bool reduce) {
  GuessSdpOptions o;
  o.input_weights = weights;
  o.max_strategies = max_strategies;
  o.reduce = reduce;
  o.zero_threshold = 0.0;
  o.independent = false;
  return o;
}

// Maps the multipliers of the solved (thresholded, independent) problem onto
// the certificate problem. Entries solved as zeros get `kappa + w_x`: the
// constant buys back the directions the thresholded faces dropped, w_x pays
// for strategies that guess such an outcome.
class DualLift {
 public:
  DualLift(const GuessSdp& solved, const GuessSdp& cert, const CondProbTable& table,
           const std::vector<double>& weights, const Vec& solved_dual)
      : cert_(cert) {
    const int inputs = cert.inputs;
    std::map<Strategy, int> solved_index;
    for (std::size_t i = 0; i < solved.strategies.size(); ++i) solved_index[solved.strategies[i]] = static_cast<int>(i);
    std::vector<int> fallback(static_cast<std::size_t>(inputs));
    for (int x = 0; x < inputs; ++x) {
      Eigen::Index best = 0;
      table.probs.row(x).maxCoeff(&best);
      fallback[static_cast<std::size_t>(x)] = static_cast<int>(best);
    }
    auto supported = [&](int x, int b) {
      const auto& s = solved.support[static_cast<std::size_t>(x)];
      return std::find(s.begin(), s.end(), b) != s.end();
    };

    const auto kinds_c = cert.local_kinds.size();
    const auto kinds_s = solved.local_kinds.size();
    std::map<int, std::size_t> kind_pos;
    for (std::size_t k = 0; k < kinds_s; ++k) kind_pos[solved.local_kinds[k]] = k;

    base_ = Vec::Zero(static_cast<Eigen::Index>(cert.problem.constraints.size()));
    for (std::size_t sc = 0; sc < cert.strategies.size(); ++sc) {
      Strategy mapped = cert.strategies[sc];
      for (int x = 0; x < inputs; ++x) {
        auto& g = mapped[static_cast<std::size_t>(x)];
        if (!supported(x, g)) g = fallback[static_cast<std::size_t>(x)];
      }
      const auto it = solved_index.find(mapped);
      if (it == solved_index.end()) throw Error(Errc::numerical_failure, "strategy lift failed");
      const auto ss = static_cast<std::size_t>(it->second);
      for (std::size_t k = 0; k < kinds_c; ++k) {
        const auto pos = kind_pos.find(cert.local_kinds[k]);
        if (pos == kind_pos.end()) continue;
        base_(static_cast<Eigen::Index>(sc * kinds_c + k)) = solved_dual(static_cast<Eigen::Index>(ss * kinds_s + pos->second));
      }
    }
    const std::size_t offset_c = cert.strategies.size() * kinds_c;
    const std::size_t offset_s = solved.strategies.size() * kinds_s;
    for (std::size_t g = 0; g < cert.globals.size(); ++g) {
      const auto row = cert.globals[g];
      const auto idx = static_cast<Eigen::Index>(offset_c + g);
      if (row.x >= 0 && !supported(row.x, row.b)) {
        base_(idx) = weights[static_cast<std::size_t>(row.x)];
        lifted_.push_back(idx);
        mass_ += table.probs(row.x, row.b);
        continue;
      }
      for (std::size_t h = 0; h < solved.globals.size(); ++h) {
        if (solved.globals[h].x == row.x && solved.globals[h].b == row.b) {
          base_(idx) = solved_dual(static_cast<Eigen::Index>(offset_s + h));
          break;
        }
      }
    }

    // Slack blocks A^T y - C at kappa = 0, and the kappa direction.
    const auto& problem = cert.problem;
    const auto blocks = problem.block_dims.size();
    slack_.resize(blocks);
    direction_.resize(blocks);
    for (std::size_t k = 0; k < blocks; ++k) slack_[k] = Mat::Zero(problem.block_dims[k], problem.block_dims[k]);
    for (const auto& t : problem.objective) t.matrix.add_to(slack_[static_cast<std::size_t>(t.block)], -1.0);
    std::vector<char> is_lifted(problem.constraints.size(), 0);
    for (auto i : lifted_) is_lifted[static_cast<std::size_t>(i)] = 1;
    for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
      const double y = base_(static_cast<Eigen::Index>(i));
      bound_ += problem.constraints[i].rhs * y;
      for (const auto& t : problem.constraints[i].terms) {
        const auto k = static_cast<std::size_t>(t.block);
        if (y != 0.0) t.matrix.add_to(slack_[k], y);
        if (is_lifted[i]) {
          if (direction_[k].size() == 0) direction_[k] = Mat::Zero(problem.block_dims[k], problem.block_dims[k]);
          t.matrix.add_to(direction_[k]);
        }
      }
    }
    fixed_min_eig_ = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < blocks; ++k) {
      if (direction_[k].size() == 0) fixed_min_eig_ = std::min(fixed_min_eig_, min_eig(slack_[k]));
    }
  }

  bool needs_search() const { return !lifted_.empty(); }

  double bound(double kappa) const {
    double lambda = fixed_min_eig_;
    for (std::size_t k = 0; k < slack_.size(); ++k) {
      if (direction_[k].size() != 0) lambda = std::min(lambda, min_eig(slack_[k] + kappa * direction_[k]));
    }
    return bound_ + kappa * mass_ + *cert_.problem.trace_bound * std::max(0.0, -lambda);
  }

  // Coarse scan in log10(kappa), then golden-section refinement.
  double best_kappa() const {
    if (!needs_search()) return 0.0;
    double best_t = -4.0;
    double best = bound(std::pow(10.0, best_t));
    for (double t = -3.5; t <= 14.0 + 1e-9; t += 0.5) {
      const double v = bound(std::pow(10.0, t));
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    double lo = best_t - 0.5;
    double hi = best_t + 0.5;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - ratio * (hi - lo);
    double b = lo + ratio * (hi - lo);
    double fa = bound(std::pow(10.0, a));
    double fb = bound(std::pow(10.0, b));
    for (int it = 0; it < 40; ++it) {
      if (fa < fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - ratio * (hi - lo);
        fa = bound(std::pow(10.0, a));
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + ratio * (hi - lo);
        fb = bound(std::pow(10.0, b));
      }
    }
    const double t = fa < fb ? a : b;
    return std::min(fa, fb) < best ? std::pow(10.0, t) : std::pow(10.0, best_t);
  }

  Vec dual(double kappa) const {
    Vec y = base_;
    for (auto i : lifted_) y(i) += kappa;
    return y;
  }

  int lifted_count() const { return static_cast<int>(lifted_.size()); }

 private:
  static double min_eig(const Mat& m) {
    if (m.rows() == 1) return m(0, 0);
    return Eigen::SelfAdjointEigenSolver<Mat>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
  }

  const GuessSdp& cert_;
  Vec base_;
  std::vector<Eigen::Index> lifted_;
  double mass_ = 0.0;
  double bound_ = 0.0;
  std::vector<Mat> slack_;
  std::vector<Mat> direction_;
  double fixed_min_eig_ = 0.0;
};

// Elastic copy: every table row gets slacks u+ - u- at price `penalty`, which
// bounds the multipliers by the penalty and keeps the problem well posed when
// entries are tiny. Multipliers of the original rows carry over unchanged.
SdpProblem elastic_problem(const GuessSdp& sdp, double penalty) {
  SdpProblem out = sdp.problem;
  if (penalty <= 0.0) return out;
  const std::size_t first_global = out.constraints.size() - sdp.globals.size();
  for (std::size_t g = 0; g < sdp.globals.size(); ++g) {
    if (sdp.globals[g].x < 0) continue;
    auto& con = out.constraints[first_global + g];
    for (double sign : {1.0, -1.0}) {
      const int block = static_cast<int>(out.block_dims.size());
      out.block_dims.push_back(1);
      SymMatrix unit(1);
      unit.add(0, 0, 1.0);
      SymMatrix signed_unit(1);
      signed_unit.add(0, 0, sign);
      SymMatrix price(1);
      price.add(0, 0, -penalty);
      con.terms.push_back({block, signed_unit});
      out.objective.push_back({block, price});
    }
  }
  out.trace_bound.reset();
  return out;
}

}  // namespace

CertificationResult certify_min_entropy(const GramMatrix& gram, const CondProbTable& table,
                                        const CertifyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto embedding = embed_states(gram);
  GuessSdpOptions build;
  build.input_weights = options.input_weights;
  build.max_strategies = options.max_strategies;
  build.reduce = options.reduce;
  build.zero_threshold = options.reduce ? options.zero_threshold : 0.0;
  const auto solved = build_guess_sdp(embedding, table, build);
  const auto cert =
      build_guess_sdp(embedding, table, certificate_options(options.input_weights, options.max_strategies, options.reduce));

  SdpOptions solver;
  solver.tol = options.tol;
  solver.max_iter = options.max_iter;
  solver.verbose = options.verbose;
  const auto solved_problem = elastic_problem(solved, options.elastic_penalty);
  const auto solution = solve(solved_problem, solver);
  const auto report = check_feasibility(solved_problem, solution);

  CertificationResult result;
  result.inputs = cert.inputs;
  result.outcomes = cert.outcomes;
  result.strategy_count = static_cast<std::int64_t>(cert.strategies.size());
  result.status = solution.status;
  result.iterations = solution.iterations;
  result.gap = solution.gap;
  result.primal_residual = report.primal_residual;
  result.dual_residual = report.dual_residual;
  result.reduced = options.reduce;
  result.tol = options.tol;
  result.input_weights = options.input_weights;
  result.gram = gram;
  result.table_digest = table_digest(table);
  result.problem_digest = problem_digest(cert.problem);
  if (solution.status == SdpStatus::infeasible) {
    // The statistics cannot come from states with these overlaps; nothing is certified.
    result.dual = Vec::Zero(static_cast<Eigen::Index>(cert.problem.constraints.size()));
    result.dual_bound = 1.0;
    result.p_guess_upper = 1.0;
    result.p_guess_primal = 0.0;
  } else {
    std::vector<double> weights = options.input_weights;
    if (weights.empty()) weights.assign(static_cast<std::size_t>(cert.inputs), 1.0 / cert.inputs);
    const DualLift lift(solved, cert, table, weights, solution.dual);
    const double kappa = lift.best_kappa();
    result.thresholded_entries = lift.lifted_count();
    result.lift_multiplier = kappa;
    result.dual = lift.dual(kappa);
    result.dual_bound = certified_upper_bound(cert.problem, result.dual);
    result.p_guess_upper = std::min(1.0, result.dual_bound);
    result.p_guess_primal = std::clamp(solution.primal_value, 0.0, result.p_guess_upper);
  }
  result.h_min_lower = std::max(0.0, -std::log2(result.p_guess_upper));
  result.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CertificationResult certify_min_entropy(std::span<const Codeword> states, double mu, const CondProbTable& table,
                                        const CertifyOptions& options) {
  auto result = certify_min_entropy(gram_matrix(states, mu), table, options);
  result.mu = mu;
  return result;
}

CertificationResult certify_min_entropy_overlap(int inputs, double delta, const CondProbTable& table,
                                                const CertifyOptions& options) {
  auto result = certify_min_entropy(constant_overlap_gram(inputs, delta), table, options);
  result.delta = delta;
  return result;
}

GuessSdp rebuild_guess_sdp(const CertificationResult& result, const CondProbTable& table) {
  return build_guess_sdp(embed_states(result.gram), table,
                         certificate_options(result.input_weights, std::max<std::int64_t>(result.strategy_count, 1),
                                             result.reduced));
}

ResultAudit audit_result(const CertificationResult& result, const SdpProblem& problem, const CondProbTable* table) {
  ResultAudit audit;
  auto fail = [&](std::string why) { audit.failures.push_back(std::move(why)); };
  if (problem_digest(problem) != result.problem_digest) fail("problem digest differs from the archived one");
  if (table && table_digest(*table) != result.table_digest) fail("table digest differs from the archived one");
  try {
    audit.recomputed_bound = certified_upper_bound(problem, result.dual);
    if (std::abs(audit.recomputed_bound - result.dual_bound) > 1e-9 * std::max(1.0, std::abs(result.dual_bound))) {
      fail("stored bound " + std::to_string(result.dual_bound) + " but multipliers give " +
           std::to_string(audit.recomputed_bound));
    }
    const double p = std::min(1.0, audit.recomputed_bound);
    if (std::abs(p - result.p_guess_upper) > 1e-9) fail("p_guess_upper does not follow from the bound");
    if (std::abs(std::max(0.0, -std::log2(p)) - result.h_min_lower) > 1e-9) fail("h_min_lower does not follow from p_guess_upper");
  } catch (const Error& e) {
    fail(e.what());
  }
  if (result.p_guess_primal > result.p_guess_upper + 1e-9) fail("attack value exceeds the certified bound");
  audit.pass = audit.failures.empty();
  return audit;
}

}  // namespace qcert
