#include <doctest.h>

#include "qcert/error.hpp"
#include "qcert/rate.hpp"

using namespace qcert;

TEST_CASE("generation rate") {
  const auto r = generation_rate(31.25e6, 4, 3, 0.759);
  CHECK(r.rate == doctest::Approx(17789062.5).epsilon(1e-12));
  CHECK(r.rate_per_pulse == doctest::Approx(r.rate / 31.25e6).epsilon(1e-12));
  CHECK(r.h_per_bin == doctest::Approx(0.759 / 4).epsilon(1e-12));
  CHECK(generation_rate(31.25e6, 4, 3, 0.5).rate * 2 ==
        doctest::Approx(generation_rate(31.25e6, 4, 3, 1.0).rate).epsilon(1e-12));
  CHECK(generation_rate(1e6, 2, 2, 0.0).rate == 0.0);
  CHECK_THROWS_AS(generation_rate(1e6, 0, 2, 0.5), Error);
}

TEST_CASE("mu search") {
  Instance inst;
  inst.states = {BitString::parse("10"), BitString::parse("01")};
  inst.params.eta_det = 0.83;
  MuSearch once;
  once.mu_min = once.mu_max = 0.9;
  const auto fixed = optimize_mu(inst, once);
  CHECK(fixed.evaluations == 1);
  CHECK(fixed.mu_optimal == 0.9);
  MuSearch s;
  s.grid = 8;
  const auto best = optimize_mu(inst, s);
  CHECK(best.heuristic);
  CHECK(best.h_min_at_opt >= fixed.h_min_at_opt - 1e-9);
  for (const auto& [mu, h] : best.grid) CHECK(h <= best.h_min_at_opt + 1e-9);
}

TEST_CASE("families and sweep grids") {
  const auto f = Family::parse("n=6,m=3,s=1,eta=0.8,eps=1e-5,pap=0.01,grouping=raw,lo=0.2,hi=0.8");
  CHECK(f.n == 6);
  CHECK(f.params.eta_det == 0.8);
  CHECK(f.grouping == "raw");
  CHECK(Family::parse(f.str()).str() == f.str());
  CHECK_THROWS_AS(Family::parse("n=6,bogus=1"), Error);
  const auto g = sweep_grid(SweepAxis::overlap, f, 4);
  CHECK(g == std::vector<double>{0.2, 0.4, 0.6000000000000001, 0.8});
  CHECK(sweep_grid(SweepAxis::inputs, f, 3) == std::vector<double>{2, 3, 4});
  CHECK(parse_sweep_axis("outcomes") == SweepAxis::outcomes);
  CHECK_THROWS_AS(parse_sweep_axis("time"), Error);
}

TEST_CASE("overlap sweep rows arrive in order") {
  auto f = Family::parse("n=3,m=1,s=0,grouping=ideal,lo=0.3,hi=0.7");
  SweepOptions o;
  o.grid = 3;
  o.threads = 2;
  std::vector<double> seen;
  const auto rows = sweep(SweepAxis::overlap, f, o, [&](const SweepRow& r) { seen.push_back(r.value); });
  REQUIRE(rows.size() == 3);
  CHECK(seen == std::vector<double>{rows[0].value, rows[1].value, rows[2].value});
  for (const auto& r : rows) {
    CHECK(r.trusted());
    CHECK(r.inputs == 3);
  }
  // Larger overlap: harder to distinguish, more private randomness.
  CHECK(rows[2].h_min_lower >= rows[0].h_min_lower - 1e-6);
  CHECK(csv_line(rows[0]).rfind("overlap,", 0) == 0);
}
