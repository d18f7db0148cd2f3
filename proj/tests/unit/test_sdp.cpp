#include <doctest.h>

#include <random>

#include "qcert/error.hpp"
#include "qcert/oracle.hpp"
#include "qcert/sdp.hpp"

using namespace qcert;

namespace {

Eigen::MatrixXd random_symmetric(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  }
  return (a + a.transpose()) / 2;
}

// optimise <C, X> over density matrices of dimension d.
SdpProblem trace_one(const Eigen::MatrixXd& c, bool maximize) {
  const int d = static_cast<int>(c.rows());
  SdpProblem p;
  p.block_dims = {d};
  p.objective = {{0, SymMatrix::from_dense(c)}};
  p.constraints = {{{{0, SymMatrix::from_dense(Eigen::MatrixXd::Identity(d, d))}}, 1.0}};
  p.maximize = maximize;
  p.trace_bound = 1.0;
  return p;
}

}  // namespace

TEST_CASE("symmetric storage") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 0;
  const auto s = SymMatrix::from_dense(m);
  CHECK(s.entries().size() == 2);
  CHECK((s.dense() - m).norm() == 0.0);
  Eigen::MatrixXd x(2, 2);
  x << 3, 1, 1, 5;
  CHECK(s.trace_product(x) == doctest::Approx((m * x).trace()));
}

TEST_CASE("trace-one problems recover extreme eigenvalues") {
  std::mt19937_64 rng(3);
  for (int d = 1; d <= 5; ++d) {
    const auto c = random_symmetric(d, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    const auto mx = solve(trace_one(c, true));
    CHECK(mx.status == SdpStatus::optimal);
    CHECK(mx.primal_value == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-6));
    CHECK(certified_upper_bound(trace_one(c, true), mx) >= mx.primal_value - 1e-12);
    const auto mn = solve(trace_one(c, false));
    CHECK(mn.status == SdpStatus::optimal);
    CHECK(mn.primal_value == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-6));
    const auto check = verify_certificate(trace_one(c, true), mx);
    CHECK(check.pass);
  }
}

TEST_CASE("multi-block problem and certified bound") {
  // max x11 + 2 y11 s.t. tr X + tr Y = 1: optimum 2, all weight on Y.
  SdpProblem p;
  p.block_dims = {2, 1};
  SymMatrix cx(2);
  cx.add(0, 0, 1.0);
  SymMatrix cy(1);
  cy.add(0, 0, 2.0);
  p.objective = {{0, cx}, {1, cy}};
  SymMatrix ix = SymMatrix::from_dense(Eigen::MatrixXd::Identity(2, 2));
  SymMatrix iy = SymMatrix::from_dense(Eigen::MatrixXd::Identity(1, 1));
  p.constraints = {{{{0, ix}, {1, iy}}, 1.0}};
  p.trace_bound = 1.0;
  const auto sol = solve(p);
  CHECK(sol.status == SdpStatus::optimal);
  CHECK(sol.primal_value == doctest::Approx(2.0).epsilon(1e-6));
  const double bound = certified_upper_bound(p, sol);
  CHECK(bound >= 2.0 - 1e-12);
  CHECK(bound <= 2.0 + 1e-5);
  // A dual below the optimum is corrected by the trace bound.
  Eigen::VectorXd low(1);
  low << 1.5;
  CHECK(certified_upper_bound(p, low) == doctest::Approx(2.0).epsilon(1e-12));
  p.trace_bound.reset();
  CHECK_THROWS_AS(certified_upper_bound(p, low), Error);
}

TEST_CASE("infeasible problems are reported") {
  // A 1x1 PSD block cannot have trace -1.
  SdpProblem p;
  p.block_dims = {1};
  SymMatrix one(1);
  one.add(0, 0, 1.0);
  p.objective = {{0, one}};
  p.constraints = {{{{0, one}}, -1.0}};
  const auto sol = solve(p);
  CHECK(sol.status != SdpStatus::optimal);
}

TEST_CASE("malformed problems are rejected") {
  SdpProblem p;
  p.block_dims = {2};
  SymMatrix wrong(3);
  wrong.add(0, 0, 1.0);
  p.objective = {{0, wrong}};
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("certificate verification detects tampering") {
  std::mt19937_64 rng(5);
  const auto c = random_symmetric(3, rng);
  const auto p = trace_one(c, true);
  auto sol = solve(p);
  REQUIRE(verify_certificate(p, sol).pass);
  auto zero = sol;
  zero.dual.setZero();
  CHECK_FALSE(verify_certificate(p, zero).pass);
  auto low = sol;
  low.dual(0) -= 0.1;
  CHECK_FALSE(verify_certificate(p, low).pass);
  auto slack = sol;
  slack.dual_slack[0](0, 0) += 1e-3;
  CHECK_FALSE(verify_certificate(p, slack).pass);
}
