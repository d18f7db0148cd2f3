#include "qcert/rate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "qcert/error.hpp"

namespace qcert {

RateResult generation_rate(double f, int n, int cardinality, double h_min) {
  if (!(f > 0.0) || n <= 0 || cardinality <= 0 || !(h_min >= 0.0)) {
    throw Error(Errc::invalid_parameters, "rate needs f > 0, n > 0, cardinality > 0 and h_min >= 0");
  }
  RateResult r;
  r.f = f;
  r.n = n;
  r.cardinality = cardinality;
  r.h_min_at_opt = h_min;
  r.rate = f / n * cardinality * h_min;
  r.rate_per_pulse = r.rate / f;
  r.h_per_bin = h_min / n;
  return r;
}

CondProbTable Instance::table(double mu) const {
  const int n = bins();
  std::optional<OutcomeGrouping> g;
  if (grouping == "ideal") {
    g = OutcomeGrouping::ideal(states);
  } else if (grouping == "no-click") {
    g = OutcomeGrouping::no_click(n);
  } else if (grouping == "first-click") {
    g = OutcomeGrouping::first_click(n);
  } else if (grouping != "raw") {
    throw Error(Errc::invalid_input, "unknown grouping '" + grouping + "'");
  }
  return cond_prob_table(states, mu, params, g, boundary);
}

CertificationResult Instance::evaluate(double mu) const {
  return certify_min_entropy(std::span<const Codeword>(states), mu, table(mu), certify);
}

RateResult optimize_mu(const Instance& instance, const MuSearch& search, double f) {
  if (!(search.mu_min > 0.0) || !(search.mu_max >= search.mu_min)) {
    throw Error(Errc::invalid_parameters, "mu range must be positive and ordered");
  }
  RateResult best;
  best.mu_optimal = search.mu_min;
  best.h_min_at_opt = -1.0;
  auto eval = [&](double mu) {
    const double h = instance.evaluate(mu).h_min_lower;
    ++best.evaluations;
    if (h > best.h_min_at_opt) {
      best.h_min_at_opt = h;
      best.mu_optimal = mu;
    }
    return h;
  };

  if (search.mu_max == search.mu_min) {
    best.grid.emplace_back(search.mu_min, eval(search.mu_min));
  } else {
    if (search.grid < 3) throw Error(Errc::invalid_parameters, "mu grid needs at least 3 points");
    const double ratio = std::log(search.mu_max / search.mu_min) / (search.grid - 1);
    std::vector<double> mus(static_cast<std::size_t>(search.grid));
    for (int i = 0; i < search.grid; ++i) mus[i] = search.mu_min * std::exp(ratio * i);
    mus.back() = search.mu_max;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
      best.grid.emplace_back(mus[i], eval(mus[i]));
      if (best.grid[i].second > best.grid[arg].second) arg = i;
    }
    // Golden section on the bracket around the best grid point.
    double a = mus[arg == 0 ? 0 : arg - 1];
    double b = mus[std::min(arg + 1, mus.size() - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    while (b - a > search.refine_tol) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = eval(d);
      }
    }
    best.heuristic = true;
  }

  const int n = instance.bins();
  const auto card = static_cast<int>(instance.states.size());
  auto out = generation_rate(f, n, card, std::max(0.0, best.h_min_at_opt));
  out.mu_optimal = best.mu_optimal;
  out.grid = std::move(best.grid);
  out.evaluations = best.evaluations;
  out.heuristic = best.heuristic;
  out.params = instance.params;
  return out;
}

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::overlap: return "overlap";
    case SweepAxis::mu: return "mu";
    case SweepAxis::outcomes: return "outcomes";
    case SweepAxis::inputs: return "inputs";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  for (auto axis : {SweepAxis::overlap, SweepAxis::mu, SweepAxis::outcomes, SweepAxis::inputs}) {
    if (text == to_string(axis)) return axis;
  }
  throw Error(Errc::invalid_input, "unknown sweep axis '" + std::string(text) + "'");
}

namespace {

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(Errc::invalid_input, "family key '" + std::string(key) + "' expects a number, got '" +
                                         std::string(text) + "'");
  }
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v)) throw Error(Errc::invalid_input, "family key '" + std::string(key) + "' expects an integer");
  return static_cast<int>(v);
}

std::string shortest(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<Codeword> binary_pair(int m) {
  const int n = 2 * m;
  const std::uint64_t low = (std::uint64_t{1} << m) - 1;
  return {BitString(low, n), BitString(low << m, n)};
}

std::vector<Codeword> single_pulse_states(int n) {
  std::vector<Codeword> out;
  for (int i = 0; i < n; ++i) out.emplace_back(std::uint64_t{1} << i, n);
  return out;
}

}  // namespace

Family Family::parse(std::string_view spec) {
  Family f;
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const auto item = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::invalid_input, "family item '" + std::string(item) + "' lacks '='");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    if (key == "n") f.n = parse_int(key, value);
    else if (key == "m") f.m = parse_int(key, value);
    else if (key == "s") f.s = parse_int(key, value);
    else if (key == "eta") f.params.eta_det = parse_double(key, value);
    else if (key == "loss") f.params.transmission = parse_double(key, value);
    else if (key == "eps") f.params.epsilon = parse_double(key, value);
    else if (key == "pap") f.params.p_ap = parse_double(key, value);
    else if (key == "f") f.params.rep_rate = parse_double(key, value);
    else if (key == "grouping") f.grouping = std::string(value);
    else if (key == "boundary") f.boundary = parse_boundary(value);
    else if (key == "lo") f.lo = parse_double(key, value);
    else if (key == "hi") f.hi = parse_double(key, value);
    else if (key == "mu") f.mu = parse_double(key, value);
    else throw Error(Errc::invalid_input, "unknown family key '" + std::string(key) + "'");
  }
  f.params.validate();
  ConfigurationSpec{f.n, f.m, f.s}.validate();
  return f;
}

std::string Family::str() const {
  std::string out = "n=" + std::to_string(n) + ",m=" + std::to_string(m) + ",s=" + std::to_string(s) +
                    ",eta=" + shortest(params.eta_det) + ",loss=" + shortest(params.transmission) +
                    ",eps=" + shortest(params.epsilon) + ",pap=" + shortest(params.p_ap) +
                    ",f=" + shortest(params.rep_rate) + ",grouping=" + grouping + ",boundary=" + to_string(boundary);
  if (lo) out += ",lo=" + shortest(*lo);
  if (hi) out += ",hi=" + shortest(*hi);
  if (mu) out += ",mu=" + shortest(*mu);
  return out;
}

std::vector<double> sweep_grid(SweepAxis axis, const Family& family, int grid) {
  if (grid < 1) throw Error(Errc::invalid_parameters, "grid needs at least one point");
  std::vector<double> out;
  switch (axis) {
    case SweepAxis::overlap:
    case SweepAxis::mu: {
      const double lo = family.lo.value_or(axis == SweepAxis::overlap ? 0.05 : 0.05);
      const double hi = family.hi.value_or(axis == SweepAxis::overlap ? 0.95 : 3.0);
      if (!(hi >= lo) || !(lo > 0.0) || (axis == SweepAxis::overlap && hi > 1.0)) {
        throw Error(Errc::invalid_parameters, "grid range must satisfy 0 < lo <= hi (<= 1 for overlaps)");
      }
      if (grid > 1 && hi == lo) throw Error(Errc::invalid_parameters, "grid must be strictly monotone");
      for (int i = 0; i < grid; ++i) out.push_back(grid == 1 ? lo : lo + (hi - lo) * i / (grid - 1));
      break;
    }
    case SweepAxis::outcomes:
      for (int m = 1; m <= grid; ++m) out.push_back(static_cast<double>((std::int64_t{1} << (m + 1)) - 1));
      break;
    case SweepAxis::inputs:
      for (int i = 2; i <= grid + 1; ++i) out.push_back(i);
      break;
  }
  return out;
}

namespace {

SweepRow sweep_point(SweepAxis axis, const Family& family, const SweepOptions& options, std::size_t index,
                     double value) {
  SweepRow row;
  row.axis = axis;
  row.value = value;
  const auto start = std::chrono::steady_clock::now();
  try {
    Instance inst;
    inst.params = family.params;
    inst.grouping = family.grouping;
    inst.boundary = family.boundary;
    inst.certify = options.certify;
    std::optional<double> mu;
    switch (axis) {
      case SweepAxis::overlap: {
        inst.states = construct_lower_bound_code(family.n, family.m, family.s).members;
        mu = -std::log(value) / (family.m - family.s);
        break;
      }
      case SweepAxis::mu:
        inst.states = construct_lower_bound_code(family.n, family.m, family.s).members;
        mu = value;
        break;
      case SweepAxis::outcomes:
        inst.states = binary_pair(static_cast<int>(index) + 1);
        break;
      case SweepAxis::inputs:
        inst.states = single_pulse_states(static_cast<int>(value));
        mu = family.mu;
        break;
    }
    if (!mu) mu = optimize_mu(inst, options.search, family.params.rep_rate).mu_optimal;
    const auto result = inst.evaluate(*mu);
    row.h_min_lower = result.h_min_lower;
    row.p_guess_upper = result.p_guess_upper;
    row.mu = *mu;
    row.gap = result.gap;
    row.status = to_string(result.status);
    row.inputs = result.inputs;
    row.outcomes = result.outcomes;
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

int default_thread_count() {
  if (const char* env = std::getenv("QCERT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<SweepRow> sweep(SweepAxis axis, const Family& family, const SweepOptions& options,
                            const std::function<void(const SweepRow&)>& sink) {
  const auto grid = sweep_grid(axis, family, options.grid);
  std::vector<SweepRow> rows(grid.size());
  std::vector<char> done(grid.size(), 0);
  std::size_t emitted = 0;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      auto row = sweep_point(axis, family, options, i, grid[i]);
      std::lock_guard lock(mutex);
      rows[i] = std::move(row);
      done[i] = 1;
      while (emitted < grid.size() && done[emitted]) {
        if (sink) sink(rows[emitted]);
        ++emitted;
      }
    }
  };
  const int threads = std::clamp(options.threads > 0 ? options.threads : default_thread_count(), 1,
                                 static_cast<int>(std::max<std::size_t>(grid.size(), 1)));
  std::vector<std::jthread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return rows;
}

std::string csv_line(const SweepRow& row) {
  std::ostringstream os;
  os << std::setprecision(12) << to_string(row.axis) << ',' << row.value << ',' << row.h_min_lower << ','
     << row.p_guess_upper << ',' << row.mu << ',' << row.gap << ',';
  // Keep the status a single CSV field.
  std::string status = row.status;
  std::replace(status.begin(), status.end(), ',', ';');
  std::replace(status.begin(), status.end(), '\n', ' ');
  os << status << ',' << std::setprecision(6) << row.runtime_s;
  return os.str();
}

}  // namespace qcert
