#include <doctest.h>

#include <random>

#include "qcert/certification.hpp"
#include "qcert/error.hpp"
#include "qcert/oracle.hpp"

using namespace qcert;

namespace {

// max c^T x over {A x <= b, x >= 0} in three variables by vertex enumeration.
double vertex_max(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  Eigen::MatrixXd rows(m + 3, 3);
  Eigen::VectorXd rhs(m + 3);
  rows << a, -Eigen::MatrixXd::Identity(3, 3);
  rhs << b, Eigen::VectorXd::Zero(3);
  double best = -1e300;
  for (int i = 0; i < m + 3; ++i) {
    for (int j = i + 1; j < m + 3; ++j) {
      for (int k = j + 1; k < m + 3; ++k) {
        Eigen::Matrix3d s;
        s << rows.row(i), rows.row(j), rows.row(k);
        if (std::abs(s.determinant()) < 1e-12) continue;
        const Eigen::Vector3d x = s.lu().solve(Eigen::Vector3d(rhs(i), rhs(j), rhs(k)));
        if (((rows * x - rhs).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
      }
    }
  }
  return best;
}

CondProbTable two_input_table(const Eigen::MatrixXd& probs) {
  CondProbTable t;
  t.inputs = {"x0", "x1"};
  for (Eigen::Index b = 0; b < probs.cols(); ++b) t.outcomes.push_back("b" + std::to_string(b));
  t.probs = probs;
  return t;
}

}  // namespace

TEST_CASE("simplex matches vertex enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    LinearProgram lp;
    lp.a = Eigen::MatrixXd(4, 3);
    lp.b = Eigen::VectorXd(4);
    lp.c = Eigen::VectorXd(3);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 3; ++j) lp.a(i, j) = u(rng);
      lp.b(i) = u(rng);
    }
    for (int j = 0; j < 3; ++j) lp.c(j) = u(rng) - 0.3;
    lp.sense.assign(4, LinearProgram::Sense::le);
    const auto r = solve_lp(lp);
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK(r.value == doctest::Approx(std::max(0.0, vertex_max(lp.a, lp.b, lp.c))).epsilon(1e-9));
  }
}

TEST_CASE("simplex statuses") {
  LinearProgram lp;
  lp.a = Eigen::MatrixXd(2, 1);
  lp.a << 1, 1;
  lp.b = Eigen::VectorXd(2);
  lp.b << 1, 2;
  lp.c = Eigen::VectorXd::Ones(1);
  lp.sense = {LinearProgram::Sense::le, LinearProgram::Sense::ge};
  CHECK(solve_lp(lp).status == LpResult::Status::infeasible);
  lp.sense = {LinearProgram::Sense::ge, LinearProgram::Sense::ge};
  CHECK(solve_lp(lp).status == LpResult::Status::unbounded);
  lp.sense = {LinearProgram::Sense::eq, LinearProgram::Sense::le};
  const auto r = solve_lp(lp);
  CHECK(r.status == LpResult::Status::optimal);
  CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("grid oracle brackets the SDP from below") {
  const double delta = 0.6;
  const auto embedding = embed_states(constant_overlap_gram(2, delta));
  // Unambiguous-discrimination style table, strictly inside the achievable set:
  // conclusive outcomes only for the sent state.
  const double pc = 0.8 * (1 - delta);
  Eigen::MatrixXd probs(2, 3);
  probs << pc, 0, 1 - pc, 0, pc, 1 - pc;
  const auto table = two_input_table(probs);
  const auto cert = certify_min_entropy_overlap(2, delta, table);
  const auto report = grid_lp_oracle(embedding, table, 2000, {}, cert.p_guess_upper);
  CHECK(report.consistent);
  CHECK(report.lower_bound <= cert.p_guess_upper + 1e-6);
  CHECK(report.lower_bound >= cert.p_guess_upper - 1e-3);
  CHECK(report.max_data_violation <= 1e-6);
}

TEST_CASE("grid oracle refuses unsupported inputs") {
  Eigen::MatrixXd probs = Eigen::MatrixXd::Constant(3, 2, 0.5);
  CondProbTable t;
  t.inputs = {"a", "b", "c"};
  t.outcomes = {"0", "1"};
  t.probs = probs;
  CHECK_THROWS_AS(grid_lp_oracle(embed_states(constant_overlap_gram(3, 0.5)), t, 100), Error);
  const auto wide = two_input_table(Eigen::MatrixXd::Constant(2, 5, 0.2));
  CHECK_THROWS_AS(grid_lp_oracle(embed_states(constant_overlap_gram(2, 0.5)), wide, 100), Error);
}
