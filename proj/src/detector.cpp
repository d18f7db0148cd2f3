#include "qcert/detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "qcert/error.hpp"

namespace qcert {

namespace {

struct ChainModel {
  double pulse = 0.0;       // base click probability of a pulse bin
  double vacuum = 0.0;      // base click probability of a vacuum bin
  double p_ap = 0.0;
  double initial_click = 0.0;  // probability that the bin before bin 0 clicked

  double click(bool has_pulse, bool previous) const {
    const double base = has_pulse ? pulse : vacuum;
    return std::min(1.0, base + (previous ? p_ap : 0.0));
  }
};

ChainModel make_chain(double mu, const DetectorParams& params, Boundary boundary) {
  params.validate();
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(Errc::invalid_parameters, "mean photon number must be finite and >= 0");
  ChainModel chain;
  chain.pulse = base_click_prob(true, mu, params).value;
  chain.vacuum = base_click_prob(false, mu, params).value;
  chain.p_ap = params.p_ap;
  chain.initial_click = boundary == Boundary::stationary ? steady_state_click_prob(mu, params) : 0.0;
  return chain;
}

double chain_prob(const ChainModel& chain, std::uint64_t state, std::uint64_t pattern, int n, bool previous) {
  double p = 1.0;
  for (int t = 0; t < n && p != 0.0; ++t) {
    const double click = chain.click((state >> t) & 1U, previous);
    const bool clicked = (pattern >> t) & 1U;
    p *= clicked ? click : 1.0 - click;
    previous = clicked;
  }
  return p;
}

double chain_prob(const ChainModel& chain, std::uint64_t state, std::uint64_t pattern, int n) {
  double p = 0.0;
  if (chain.initial_click < 1.0) p += (1.0 - chain.initial_click) * chain_prob(chain, state, pattern, n, false);
  if (chain.initial_click > 0.0) p += chain.initial_click * chain_prob(chain, state, pattern, n, true);
  return p;
}

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void DetectorParams::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(eta_det)) throw Error(Errc::invalid_parameters, "eta_det must lie in [0, 1]");
  if (!in_unit(transmission)) throw Error(Errc::invalid_parameters, "transmission must lie in [0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(Errc::invalid_parameters, "epsilon must lie in [0, 1]");
  if (!(p_ap >= 0.0 && p_ap < 1.0)) throw Error(Errc::invalid_parameters, "p_ap must lie in [0, 1)");
  if (!(rep_rate > 0.0) || !std::isfinite(rep_rate)) throw Error(Errc::invalid_parameters, "rep_rate must be > 0");
}

double noise_from_dark_counts(double dark_count_rate, double rep_rate) {
  if (!(dark_count_rate >= 0.0) || !(rep_rate > 0.0)) {
    throw Error(Errc::invalid_parameters, "need DCR >= 0 and f > 0");
  }
  return dark_count_rate / rep_rate;
}

const char* to_string(Boundary boundary) noexcept {
  return boundary == Boundary::cold ? "cold" : "stationary";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "cold") return Boundary::cold;
  if (text == "stationary") return Boundary::stationary;
  throw Error(Errc::invalid_input, "unknown boundary '" + std::string(text) + "'");
}

ClickProbability base_click_prob(bool has_pulse, double mu, const DetectorParams& params) {
  double p = params.epsilon;
  if (has_pulse) p += -std::expm1(-params.eta_det * params.transmission * mu);
  ClickProbability out{std::clamp(p, 0.0, 1.0), false};
  out.clamped = out.value != p;
  return out;
}

double steady_state_click_prob(double mu, const DetectorParams& params) {
  params.validate();
  const double base = -std::expm1(-params.eta_det * params.transmission * mu) + params.epsilon;
  const double p = base / (1.0 - params.p_ap);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(Errc::invalid_parameters, "steady-state click probability " + std::to_string(p) + " leaves [0, 1]");
  }
  return p;
}

double pattern_prob(const BitString& state, const ClickPattern& pattern, double mu, const DetectorParams& params,
                    Boundary boundary) {
  if (state.length() != pattern.length()) {
    throw Error(Errc::length_mismatch, state.str() + " vs " + pattern.str());
  }
  const auto chain = make_chain(mu, params, boundary);
  return chain_prob(chain, state.mask(), pattern.mask(), state.length());
}

std::vector<double> pattern_distribution(const BitString& state, double mu, const DetectorParams& params,
                                         Boundary boundary) {
  const int n = state.length();
  if (n > kMaxExactBins) throw Error(Errc::dimension_limit, "exact distributions are limited to 20 bins");
  const auto chain = make_chain(mu, params, boundary);
  const std::uint64_t patterns = std::uint64_t{1} << n;
  std::vector<double> out(patterns);
  for (std::uint64_t index = 0; index < patterns; ++index) {
    const auto pattern = BitString::from_lexicographic_index(index, n);
    out[index] = chain_prob(chain, state.mask(), pattern.mask(), n);
  }
  return out;
}

OutcomeGrouping OutcomeGrouping::identity(std::span<const std::string> labels) {
  OutcomeGrouping g{"identity", {}};
  for (const auto& label : labels) g.map.emplace(label, label);
  return g;
}

OutcomeGrouping OutcomeGrouping::no_click(int n) {
  OutcomeGrouping g{"no-click", {}};
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t index = 0; index < patterns; ++index) {
    g.map.emplace(BitString::from_lexicographic_index(index, n).str(), index == 0 ? "E0" : "E1");
  }
  return g;
}

OutcomeGrouping OutcomeGrouping::ideal(std::span<const Codeword> members) {
  if (members.empty()) throw Error(Errc::invalid_parameters, "empty state list");
  const int n = members.front().length();
  std::set<std::string> keep;
  for (const auto& p : ideal_outcome_set(members)) keep.insert(p.str());
  OutcomeGrouping g{"ideal", {}};
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t index = 0; index < patterns; ++index) {
    auto label = BitString::from_lexicographic_index(index, n).str();
    g.map.emplace(label, keep.contains(label) ? label : "other");
  }
  return g;
}

OutcomeGrouping OutcomeGrouping::first_click(int n) {
  OutcomeGrouping g{"first-click", {}};
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t index = 0; index < patterns; ++index) {
    const auto pattern = BitString::from_lexicographic_index(index, n);
    std::string label = "none";
    if (pattern.mask() != 0) label = "bin" + std::to_string(std::countr_zero(pattern.mask()));
    g.map.emplace(pattern.str(), label);
  }
  return g;
}

OutcomeGrouping OutcomeGrouping::marginal(int n, std::span<const int> bins) {
  OutcomeGrouping g{"marginal", {}};
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t index = 0; index < patterns; ++index) {
    const auto text = BitString::from_lexicographic_index(index, n).str();
    std::string label(static_cast<std::size_t>(n), '-');
    for (int b : bins) {
      if (b < 0 || b >= n) throw Error(Errc::invalid_parameters, "marginal bin out of range");
      label[static_cast<std::size_t>(b)] = text[static_cast<std::size_t>(b)];
    }
    g.map.emplace(text, label);
  }
  return g;
}

void CondProbTable::validate(double row_tolerance) const {
  if (probs.rows() != static_cast<Eigen::Index>(inputs.size()) ||
      probs.cols() != static_cast<Eigen::Index>(outcomes.size())) {
    throw Error(Errc::dimension_mismatch, "table shape does not match its labels");
  }
  if (inputs.empty() || outcomes.empty()) throw Error(Errc::invalid_input, "empty table");
  if (std::set<std::string>(outcomes.begin(), outcomes.end()).size() != outcomes.size()) {
    throw Error(Errc::invalid_input, "outcome labels must be unique");
  }
  for (Eigen::Index x = 0; x < probs.rows(); ++x) {
    for (Eigen::Index b = 0; b < probs.cols(); ++b) {
      const double p = probs(x, b);
      if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_input, "probability outside [0, 1]");
    }
    const double sum = probs.row(x).sum();
    if (std::abs(sum - 1.0) > row_tolerance) {
      throw Error(Errc::table_row_sum, "row " + inputs[static_cast<std::size_t>(x)] + " sums to " + std::to_string(sum));
    }
  }
}

CondProbTable cond_prob_table(std::span<const Codeword> states, double mu, const DetectorParams& params,
                              const std::optional<OutcomeGrouping>& grouping, Boundary boundary) {
  if (states.empty()) throw Error(Errc::invalid_parameters, "empty state list");
  const int n = states.front().length();
  if (n > kMaxExactBins) throw Error(Errc::dimension_limit, "exact tables are limited to 20 bins");
  const std::uint64_t patterns = std::uint64_t{1} << n;

  CondProbTable table;
  table.outcomes.reserve(patterns);
  for (std::uint64_t index = 0; index < patterns; ++index) {
    table.outcomes.push_back(BitString::from_lexicographic_index(index, n).str());
  }
  table.probs.resize(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(patterns));
  for (std::size_t x = 0; x < states.size(); ++x) {
    if (states[x].length() != n) throw Error(Errc::length_mismatch, "states differ in length");
    table.inputs.push_back(states[x].str());
    const auto row = pattern_distribution(states[x], mu, params, boundary);
    for (std::uint64_t b = 0; b < patterns; ++b) {
      table.probs(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(b)) = row[b];
    }
  }
  table.mu = mu;
  table.params = params;
  table.boundary = boundary;
  table.validate();
  if (grouping) return group_outcomes(table, *grouping);
  return table;
}

CondProbTable group_outcomes(const CondProbTable& table, const OutcomeGrouping& grouping) {
  std::vector<std::string> labels;
  std::map<std::string, Eigen::Index> column_of;
  std::vector<Eigen::Index> target(table.outcomes.size());
  for (std::size_t b = 0; b < table.outcomes.size(); ++b) {
    const auto it = grouping.map.find(table.outcomes[b]);
    if (it == grouping.map.end()) {
      throw Error(Errc::partial_grouping, "outcome '" + table.outcomes[b] + "' is not mapped");
    }
    auto [slot, inserted] = column_of.emplace(it->second, static_cast<Eigen::Index>(labels.size()));
    if (inserted) labels.push_back(it->second);
    target[b] = slot->second;
  }
  CondProbTable out = table;
  out.outcomes = labels;
  out.probs = Eigen::MatrixXd::Zero(table.probs.rows(), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t b = 0; b < target.size(); ++b) out.probs.col(target[b]) += table.probs.col(static_cast<Eigen::Index>(b));
  out.grouping = table.grouping ? *table.grouping + "+" + grouping.name : grouping.name;
  return out;
}

std::vector<ClickPattern> sample_patterns(const BitString& state, double mu, const DetectorParams& params,
                                          std::size_t count, std::uint64_t seed, Boundary boundary) {
  if (count < 1) throw Error(Errc::invalid_parameters, "need at least one draw");
  const auto chain = make_chain(mu, params, boundary);
  std::mt19937_64 rng(seed);
  std::vector<ClickPattern> out;
  out.reserve(count);
  for (std::size_t draw = 0; draw < count; ++draw) {
    bool previous = uniform01(rng) < chain.initial_click;
    std::uint64_t mask = 0;
    for (int t = 0; t < state.length(); ++t) {
      previous = uniform01(rng) < chain.click(state.test(t), previous);
      if (previous) mask |= std::uint64_t{1} << t;
    }
    out.emplace_back(mask, state.length());
  }
  return out;
}

double max_row_tv_distance(const CondProbTable& observed, const CondProbTable& model) {
  if (observed.inputs != model.inputs || observed.outcomes != model.outcomes) {
    throw Error(Errc::dimension_mismatch, "tables must share input and outcome labels");
  }
  return 0.5 * (observed.probs - model.probs).cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace qcert
