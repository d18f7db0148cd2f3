#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qcert/certification.hpp"
#include "qcert/detector.hpp"

namespace qcert {

struct RateResult {
  double rate = 0.0;             ///< (f / n) * cardinality * h_min, bits per second
  double rate_per_pulse = 0.0;   ///< rate / f
  double h_per_bin = 0.0;        ///< h_min / n
  double mu_optimal = 0.0;
  double h_min_at_opt = 0.0;
  double f = 0.0;
  int n = 0;
  int cardinality = 0;
  std::optional<DetectorParams> params;
  /// Coarse grid kept for audit: (mu, h_min) pairs in evaluation order.
  std::vector<std::pair<double, double>> grid;
  int evaluations = 0;
  bool heuristic = false;  ///< true when mu came from the unimodal search
};

RateResult generation_rate(double f, int n, int cardinality, double h_min);

/// A certification instance parameterised by mu: fixed states, detector and grouping.
struct Instance {
  std::vector<Codeword> states;
  DetectorParams params;
  std::string grouping = "ideal";  ///< ideal | raw | no-click | first-click
  Boundary boundary = Boundary::cold;
  CertifyOptions certify;

  int bins() const { return states.empty() ? 0 : states.front().length(); }
  CondProbTable table(double mu) const;
  CertificationResult evaluate(double mu) const;
};

struct MuSearch {
  double mu_min = 0.05;
  double mu_max = 3.0;
  int grid = 25;             ///< log-spaced coarse points
  double refine_tol = 1e-3;  ///< golden-section stops when the bracket is shorter
};

/// Coarse grid, then golden-section refinement around the best grid point.
/// Assumes h_min is unimodal in mu near the optimum; the result is a heuristic optimum.
RateResult optimize_mu(const Instance& instance, const MuSearch& search, double f = 31.25e6);

enum class SweepAxis { overlap, mu, outcomes, inputs };

const char* to_string(SweepAxis axis) noexcept;
SweepAxis parse_sweep_axis(std::string_view text);

/// Instance family for sweeps, parsed from "key=value,..." text. Keys: n, m, s
/// (the group is the explicit constant-s construction), eta, loss, eps, pap,
/// grouping, boundary, lo, hi (grid range), mu (fixed mean photon number for
/// the inputs axis; absent means optimise).
struct Family {
  int n = 4;
  int m = 2;
  int s = 1;
  DetectorParams params;
  std::string grouping = "ideal";
  Boundary boundary = Boundary::cold;
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<double> mu;

  static Family parse(std::string_view spec);
  std::string str() const;
};

struct SweepRow {
  SweepAxis axis = SweepAxis::overlap;
  double value = 0.0;
  double h_min_lower = 0.0;
  double p_guess_upper = 1.0;
  double mu = 0.0;
  double gap = 0.0;
  std::string status;  ///< solver status, or "error: ..." when the point failed
  double runtime_s = 0.0;
  int inputs = 0;
  int outcomes = 0;

  /// Rows whose bound came from a converged solve; trend checks use only these.
  bool trusted() const { return status == "optimal"; }
};

struct SweepOptions {
  int grid = 25;
  int threads = 0;  ///< 0: QCERT_THREADS or hardware concurrency
  MuSearch search;  ///< used by the outcomes and inputs axes
  CertifyOptions certify;
};

/// Grid values for an axis: overlap and mu are linear in [lo, hi]; outcomes is
/// m = 1..grid binary pairs (2m bins, no shared pulses); inputs is I = 2..grid+1
/// single-pulse states.
std::vector<double> sweep_grid(SweepAxis axis, const Family& family, int grid);

/// One row per grid point in grid order. `sink` sees rows in grid order as soon
/// as every earlier row is complete.
std::vector<SweepRow> sweep(SweepAxis axis, const Family& family, const SweepOptions& options,
                            const std::function<void(const SweepRow&)>& sink = {});

inline constexpr const char* kSweepCsvHeader = "axis,value,h_min_lower,p_guess_upper,mu,gap,status,runtime_s";
std::string csv_line(const SweepRow& row);

/// Worker count from QCERT_THREADS, falling back to hardware concurrency.
int default_thread_count();

}  // namespace qcert
