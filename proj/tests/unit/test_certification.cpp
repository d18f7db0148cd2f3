#include <doctest.h>

#include <cmath>

#include "qcert/certification.hpp"
#include "qcert/error.hpp"

using namespace qcert;

namespace {

CondProbTable table_of(const Eigen::MatrixXd& probs) {
  CondProbTable t;
  for (Eigen::Index x = 0; x < probs.rows(); ++x) t.inputs.push_back("x" + std::to_string(x));
  for (Eigen::Index b = 0; b < probs.cols(); ++b) t.outcomes.push_back("b" + std::to_string(b));
  t.probs = probs;
  return t;
}

CondProbTable binary_table(double mu, const DetectorParams& p, const std::optional<OutcomeGrouping>& g = {}) {
  const std::vector<Codeword> states{BitString::parse("10"), BitString::parse("01")};
  return cond_prob_table(states, mu, p, g, Boundary::cold);
}

}  // namespace

TEST_CASE("embedding reproduces the Gram matrix") {
  const auto g = gram_matrix(construct_lower_bound_code(4, 2, 1), 0.7);
  const auto e = embed_states(g);
  CHECK((e.vectors.transpose() * e.vectors - g.entries).cwiseAbs().maxCoeff() <= 1e-12);
  const auto rank_one = embed_states(constant_overlap_gram(3, 1.0));
  CHECK((rank_one.vectors.transpose() * rank_one.vectors).isApprox(Eigen::MatrixXd::Ones(3, 3), 1e-12));
}

TEST_CASE("strategies and block layout") {
  const auto s = enumerate_strategies(2, 2);
  CHECK(s == std::vector<Strategy>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(enumerate_strategies(3, 4).size() == 64);
  CHECK_THROWS_AS(enumerate_strategies(6, 7, 1000), Error);
  Eigen::MatrixXd probs(2, 2);
  probs << 0.7, 0.3, 0.4, 0.6;
  GuessSdpOptions o;
  o.reduce = false;
  const auto sdp = build_guess_sdp(embed_states(constant_overlap_gram(2, 0.5)), table_of(probs), o);
  CHECK(sdp.strategies.size() == 4);
  CHECK(sdp.problem.block_dims == std::vector<int>(8, 2));
  // Every strategy's outcome blocks sum to c_s times the identity on the inputs.
  CHECK(sdp.problem.trace_bound.value() == doctest::Approx(2.0));
}

TEST_CASE("trivial guessing cases give zero entropy") {
  // Every input always produces the same outcome.
  Eigen::MatrixXd fixed(3, 2);
  fixed << 1, 0, 1, 0, 1, 0;
  const auto r = certify_min_entropy_overlap(3, 0.4, table_of(fixed));
  CHECK(std::abs(r.h_min_lower) <= 1e-9);
  // Identical states cannot be told apart, whatever the table.
  Eigen::MatrixXd same(2, 3);
  same << 0.2, 0.5, 0.3, 0.2, 0.5, 0.3;
  const auto d1 = certify_min_entropy_overlap(2, 1.0, table_of(same));
  CHECK(std::abs(d1.h_min_lower) <= 1e-9);
  // Orthogonal states reveal the input, so any table is a mixture of deterministic ones.
  Eigen::MatrixXd mixed(2, 2);
  mixed << 0.5, 0.5, 0.3, 0.7;
  const auto d0 = certify_min_entropy_overlap(2, 0.0, table_of(mixed));
  CHECK(std::abs(d0.h_min_lower) <= 1e-9);
}

TEST_CASE("two-state no-click test has positive entropy and a consistent result") {
  DetectorParams p;
  p.eta_det = 0.83;
  const auto t = binary_table(0.8, p);
  const auto r = certify_min_entropy_overlap(2, std::exp(-0.8), t);
  CHECK(r.status == SdpStatus::optimal);
  CHECK(r.h_min_lower > 0.05);
  CHECK(r.p_guess_primal <= r.p_guess_upper + 1e-12);
  CHECK(r.p_guess_upper - r.p_guess_primal <= 1e-5);
  CHECK(r.h_min_lower == doctest::Approx(-std::log2(r.p_guess_upper)).epsilon(1e-12));
  const auto sdp = rebuild_guess_sdp(r, t);
  const auto audit = audit_result(r, sdp.problem, &t);
  CHECK(audit.pass);
  auto tampered = r;
  tampered.h_min_lower += 0.01;
  CHECK_FALSE(audit_result(tampered, sdp.problem, &t).pass);
}

TEST_CASE("results do not depend on how inputs and outcomes are labelled") {
  DetectorParams p;
  p.eta_det = 0.9;
  p.epsilon = 1e-3;
  p.p_ap = 0.01;
  const std::vector<Codeword> states{BitString::parse("1100"), BitString::parse("1010"), BitString::parse("1001")};
  const double mu = 0.7;
  const auto t = cond_prob_table(states, mu, p, OutcomeGrouping::first_click(4), Boundary::cold);
  const auto base = certify_min_entropy(states, mu, t);

  const std::vector<Codeword> rev(states.rbegin(), states.rend());
  auto tr = t;
  tr.probs = t.probs.colwise().reverse();
  std::reverse(tr.inputs.begin(), tr.inputs.end());
  tr.probs = tr.probs.rowwise().reverse().eval();
  std::reverse(tr.outcomes.begin(), tr.outcomes.end());
  const auto perm = certify_min_entropy(rev, mu, tr);
  CHECK(std::abs(perm.h_min_lower - base.h_min_lower) <= 1e-5);
}

TEST_CASE("coarse-graining outcomes never increases the certified entropy") {
  DetectorParams p;
  p.eta_det = 0.8;
  p.epsilon = 1e-3;
  const auto raw = binary_table(0.9, p);
  const auto grouped = binary_table(0.9, p, OutcomeGrouping::no_click(2));
  const double delta = std::exp(-0.9);
  const auto hr = certify_min_entropy_overlap(2, delta, raw);
  const auto hg = certify_min_entropy_overlap(2, delta, grouped);
  CHECK(hg.h_min_lower <= hr.h_min_lower + 1e-6);
}

TEST_CASE("input weights and validation") {
  Eigen::MatrixXd probs(2, 2);
  probs << 0.7, 0.3, 0.4, 0.6;
  CertifyOptions o;
  o.input_weights = {0.5, 0.4};
  CHECK_THROWS_AS(certify_min_entropy_overlap(2, 0.5, table_of(probs), o), Error);
  o.input_weights = {0.9, 0.1};
  const auto skew = certify_min_entropy_overlap(2, 0.5, table_of(probs), o);
  const auto flat = certify_min_entropy_overlap(2, 0.5, table_of(probs));
  CHECK(skew.p_guess_upper >= 0.5);
  CHECK(flat.p_guess_upper >= 0.5);
  Eigen::MatrixXd bad(2, 2);
  bad << 0.7, 0.2, 0.4, 0.6;
  CHECK_THROWS_AS(certify_min_entropy_overlap(2, 0.5, table_of(bad)), Error);
}

TEST_CASE("tables incompatible with the states are infeasible") {
  // Perfect discrimination of non-orthogonal states.
  Eigen::MatrixXd perfect(2, 2);
  perfect << 1, 0, 0, 1;
  const auto r = certify_min_entropy_overlap(2, 0.5, table_of(perfect));
  CHECK(r.status == SdpStatus::infeasible);
  CHECK(r.h_min_lower == 0.0);
}
