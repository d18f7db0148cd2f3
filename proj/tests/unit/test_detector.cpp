#include <doctest.h>

#include <cmath>
#include <random>

#include "qcert/detector.hpp"
#include "qcert/error.hpp"
#include "qcert/oracle.hpp"

using namespace qcert;

TEST_CASE("base and steady-state click probabilities") {
  DetectorParams p;
  p.eta_det = 0.83;
  CHECK(base_click_prob(false, 5.0, p).value == 0.0);
  CHECK(base_click_prob(true, 0.5, p).value == doctest::Approx(1 - std::exp(-0.83 * 0.5)).epsilon(1e-15));
  p.epsilon = 1e-3;
  p.p_ap = 0.02;
  // Fixed point of P_T = base + p_ap P_{T-1}, reached by iteration.
  const double base = 1 - std::exp(-0.83 * 0.5) + 1e-3;
  double it = 0.0;
  for (int k = 0; k < 200; ++k) it = base + p.p_ap * it;
  CHECK(std::abs(steady_state_click_prob(0.5, p) - it) <= 1e-12);
  p.epsilon = 0.3;
  p.p_ap = 0.5;
  CHECK_THROWS_AS(steady_state_click_prob(10.0, p), Error);
  p.p_ap = 1.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("pattern distributions agree with the independent recursion") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int draw = 0; draw < 50; ++draw) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::string state;
    for (int t = 0; t < n; ++t) state.push_back(rng() % 2 ? '1' : '0');
    DetectorParams p;
    p.eta_det = u(rng);
    p.transmission = u(rng);
    p.epsilon = 0.01 * u(rng);
    p.p_ap = 0.05 * u(rng);
    const double mu = 2.0 * u(rng);
    const auto boundary = draw % 2 ? Boundary::cold : Boundary::stationary;
    const auto got = pattern_distribution(BitString::parse(state), mu, p, boundary);
    const auto want = pattern_prob_oracle(state, mu, p, boundary);
    double sum = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got[i] - want[i]) <= 1e-12);
      sum += got[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("limits of the detector model") {
  DetectorParams p;
  p.eta_det = 0.7;
  // No afterpulsing and no noise: a product of independent bins.
  const auto d = pattern_distribution(BitString::parse("101"), 0.8, p, Boundary::cold);
  const double c = 1 - std::exp(-0.7 * 0.8);
  CHECK(d[0b101] == doctest::Approx(c * c).epsilon(1e-14));
  CHECK(d[0b100] == doctest::Approx(c * (1 - c)).epsilon(1e-14));
  CHECK(d[0b010] == 0.0);
  // Vacuum state, no noise: everything on the zero pattern.
  const auto v = pattern_distribution(BitString::parse("0000"), 3.0, p);
  CHECK(v[0] == 1.0);
  CHECK_THROWS_AS(pattern_prob(BitString::parse("10"), BitString::parse("100"), 0.1, p), Error);
  CHECK_THROWS_AS(pattern_distribution(BitString(1, 21), 0.1, p), Error);
}

TEST_CASE("tables and groupings") {
  const std::vector<Codeword> states{BitString::parse("1100"), BitString::parse("0011")};
  DetectorParams p;
  p.eta_det = 0.83;
  p.epsilon = 1e-4;
  p.p_ap = 0.01;
  const auto raw = cond_prob_table(states, 0.6, p);
  CHECK(raw.outcome_count() == 16);
  raw.validate();
  const auto same = group_outcomes(raw, OutcomeGrouping::identity(raw.outcomes));
  CHECK((same.probs - raw.probs).cwiseAbs().maxCoeff() == 0.0);
  OutcomeGrouping all{"all", {}};
  for (const auto& o : raw.outcomes) all.map[o] = "any";
  const auto one = group_outcomes(raw, all);
  CHECK(one.outcome_count() == 1);
  CHECK(std::abs(one.probs(0, 0) - 1.0) <= 1e-12);
  const auto nc = cond_prob_table(states, 0.6, p, OutcomeGrouping::no_click(4));
  CHECK(nc.outcome_count() == 2);
  CHECK(nc.probs(0, 0) == doctest::Approx(raw.probs(0, 0)).epsilon(1e-14));
  OutcomeGrouping partial{"partial", {{"0000", "a"}}};
  CHECK_THROWS_AS(group_outcomes(raw, partial), Error);
}

TEST_CASE("sampling is deterministic and tracks the distribution") {
  DetectorParams p;
  p.eta_det = 0.8;
  p.p_ap = 0.02;
  const auto state = BitString::parse("1010");
  const auto a = sample_patterns(state, 0.5, p, 20000, 42);
  const auto b = sample_patterns(state, 0.5, p, 20000, 42);
  CHECK(a == b);
  const auto dist = pattern_distribution(state, 0.5, p);
  std::vector<double> freq(16, 0.0);
  for (const auto& x : a) freq[x.lexicographic_index()] += 1.0 / 20000;
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(freq[i] - dist[i]) < 0.015);
}
