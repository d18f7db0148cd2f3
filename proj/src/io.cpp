#include "qcert/io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qcert/digest.hpp"
#include "qcert/error.hpp"

#ifndef QCERT_VERSION
#define QCERT_VERSION "0.0.0"
#endif

namespace qcert {

const char* tool_version() noexcept { return QCERT_VERSION; }

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) throw Error(Errc::invalid_input, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(Errc::invalid_input, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Json terms_json(const std::vector<BlockTerm>& terms) {
  Json out = Json::array();
  for (const auto& t : terms) {
    Json entries = Json::array();
    for (const auto& e : t.matrix.entries()) entries.push_back({e.row, e.col, e.value});
    out.push_back({{"block", t.block}, {"dim", t.matrix.dim()}, {"entries", std::move(entries)}});
  }
  return out;
}

std::vector<BlockTerm> terms_from_json(const Json& j) {
  std::vector<BlockTerm> out;
  for (const auto& t : j) {
    BlockTerm term{t.at("block").get<int>(), SymMatrix(t.at("dim").get<int>())};
    for (const auto& e : t.at("entries")) term.matrix.add(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    out.push_back(std::move(term));
  }
  return out;
}

}  // namespace

Json to_json(const StateGroup& group) {
  Json members = Json::array();
  for (const auto& c : group.members) members.push_back(c.str());
  return {{"n", group.spec.n}, {"m", group.spec.m}, {"s", group.spec.s}, {"members", std::move(members)}};
}

StateGroup group_from_json(const Json& j) {
  StateGroup g;
  const auto& members = j.is_array() ? j : j.at("members");
  for (const auto& m : members) g.members.push_back(BitString::parse(m.get<std::string>()));
  if (g.members.empty()) throw Error(Errc::invalid_input, "group has no members");
  if (j.is_object() && j.contains("n")) {
    g.spec = {j.at("n").get<int>(), j.at("m").get<int>(), j.at("s").get<int>()};
  } else {
    // Infer the configuration from the members.
    g.spec.n = g.members.front().length();
    g.spec.m = g.members.front().weight();
    g.spec.s = g.members.size() > 1 ? coincidence(g.members[0], g.members[1]) : 0;
  }
  g.validate();
  return g;
}

Json to_json(const DetectorParams& p) {
  return {{"eta_det", p.eta_det}, {"transmission", p.transmission}, {"epsilon", p.epsilon},
          {"p_ap", p.p_ap}, {"rep_rate", p.rep_rate}};
}

DetectorParams params_from_json(const Json& j) {
  DetectorParams p;
  p.eta_det = j.value("eta_det", p.eta_det);
  p.transmission = j.value("transmission", p.transmission);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.p_ap = j.value("p_ap", p.p_ap);
  p.rep_rate = j.value("rep_rate", p.rep_rate);
  p.validate();
  return p;
}

Json to_json(const CondProbTable& t) {
  Json j = {{"inputs", t.inputs}, {"outcomes", t.outcomes}, {"probs", matrix_json(t.probs)}};
  if (t.grouping) j["grouping"] = *t.grouping;
  if (t.mu) j["mu"] = *t.mu;
  if (t.params) j["params"] = to_json(*t.params);
  if (t.boundary) j["boundary"] = to_string(*t.boundary);
  return j;
}

CondProbTable table_from_json(const Json& j) {
  CondProbTable t;
  t.inputs = j.at("inputs").get<std::vector<std::string>>();
  t.outcomes = j.at("outcomes").get<std::vector<std::string>>();
  t.probs = matrix_from_json(j.at("probs"));
  if (t.probs.rows() != static_cast<Eigen::Index>(t.inputs.size()) ||
      t.probs.cols() != static_cast<Eigen::Index>(t.outcomes.size())) {
    throw Error(Errc::dimension_mismatch, "probs shape does not match the labels");
  }
  if (j.contains("grouping")) t.grouping = j.at("grouping").get<std::string>();
  if (j.contains("mu")) t.mu = j.at("mu").get<double>();
  if (j.contains("params")) t.params = params_from_json(j.at("params"));
  if (j.contains("boundary")) t.boundary = parse_boundary(j.at("boundary").get<std::string>());
  t.validate(1e-9);
  return t;
}

Json to_json(const SdpProblem& p) {
  Json constraints = Json::array();
  for (const auto& c : p.constraints) constraints.push_back({{"rhs", c.rhs}, {"terms", terms_json(c.terms)}});
  Json j = {{"maximize", p.maximize},
            {"block_dims", p.block_dims},
            {"objective", terms_json(p.objective)},
            {"constraints", std::move(constraints)}};
  if (p.trace_bound) j["trace_bound"] = *p.trace_bound;
  return j;
}

SdpProblem problem_from_json(const Json& j) {
  SdpProblem p;
  p.maximize = j.at("maximize").get<bool>();
  p.block_dims = j.at("block_dims").get<std::vector<int>>();
  p.objective = terms_from_json(j.at("objective"));
  for (const auto& c : j.at("constraints")) p.constraints.push_back({terms_from_json(c.at("terms")), c.at("rhs").get<double>()});
  if (j.contains("trace_bound")) p.trace_bound = j.at("trace_bound").get<double>();
  p.validate();
  return p;
}

Json to_json(const CertificationResult& r) {
  Json inputs = {{"gram", matrix_json(r.gram.entries)},
                 {"table_digest", r.table_digest},
                 {"problem_digest", r.problem_digest},
                 {"input_weights", r.input_weights},
                 {"reduced", r.reduced},
                 {"tol", r.tol}};
  if (r.mu) inputs["mu"] = *r.mu;
  if (r.delta) inputs["delta"] = *r.delta;
  return {{"p_guess_upper", r.p_guess_upper},
          {"h_min_lower", r.h_min_lower},
          {"strategies", r.strategy_count},
          {"status", to_string(r.status)},
          {"inputs", std::move(inputs)},
          {"p_guess_primal", r.p_guess_primal},
          {"dual_bound", r.dual_bound},
          {"input_count", r.inputs},
          {"outcome_count", r.outcomes},
          {"solver",
           {{"iterations", r.iterations},
            {"gap", r.gap},
            {"primal_residual", r.primal_residual},
            {"dual_residual", r.dual_residual},
            {"seconds", r.solve_seconds},
            {"thresholded_entries", r.thresholded_entries},
            {"lift_multiplier", r.lift_multiplier}}},
          {"dual", std::vector<double>(r.dual.data(), r.dual.data() + r.dual.size())}};
}

CertificationResult result_from_json(const Json& j) {
  CertificationResult r;
  r.p_guess_upper = j.at("p_guess_upper").get<double>();
  r.h_min_lower = j.at("h_min_lower").get<double>();
  r.strategy_count = j.at("strategies").get<std::int64_t>();
  r.status = parse_sdp_status(j.at("status").get<std::string>());
  const auto& in = j.at("inputs");
  r.gram.entries = matrix_from_json(in.at("gram"));
  r.table_digest = in.at("table_digest").get<std::string>();
  r.problem_digest = in.at("problem_digest").get<std::string>();
  r.input_weights = in.value("input_weights", std::vector<double>{});
  r.reduced = in.value("reduced", true);
  r.tol = in.value("tol", 1e-6);
  if (in.contains("mu")) r.mu = in.at("mu").get<double>();
  if (in.contains("delta")) r.delta = in.at("delta").get<double>();
  r.p_guess_primal = j.value("p_guess_primal", 0.0);
  r.dual_bound = j.value("dual_bound", r.p_guess_upper);
  r.inputs = j.value("input_count", static_cast<int>(r.gram.size()));
  r.outcomes = j.value("outcome_count", 0);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    r.iterations = s.value("iterations", 0);
    r.gap = s.value("gap", 0.0);
    r.primal_residual = s.value("primal_residual", 0.0);
    r.dual_residual = s.value("dual_residual", 0.0);
    r.solve_seconds = s.value("seconds", 0.0);
    r.thresholded_entries = s.value("thresholded_entries", 0);
    r.lift_multiplier = s.value("lift_multiplier", 0.0);
  }
  const auto dual = j.value("dual", std::vector<double>{});
  r.dual = Eigen::Map<const Eigen::VectorXd>(dual.data(), static_cast<Eigen::Index>(dual.size()));
  return r;
}

Json to_json(const OracleReport& o) {
  return {{"lower_bound", o.lower_bound},   {"sdp_value", o.sdp_value},
          {"margin", o.margin},             {"verdict", o.verdict()},
          {"tolerance", o.tolerance},       {"grid_resolution", o.grid_resolution},
          {"lp_solves", o.lp_solves},       {"columns", o.columns},
          {"pivots", o.pivots},             {"max_data_violation", o.max_data_violation}};
}

Json to_json(const RateResult& r) {
  Json grid = Json::array();
  for (const auto& [mu, h] : r.grid) grid.push_back({{"mu", mu}, {"h_min_lower", h}});
  Json j = {{"rate_bits_per_s", r.rate},
            {"rate_per_pulse", r.rate_per_pulse},
            {"h_per_bin", r.h_per_bin},
            {"mu_optimal", r.mu_optimal},
            {"h_min_at_opt", r.h_min_at_opt},
            {"heuristic", r.heuristic},
            {"inputs", {{"f", r.f}, {"n", r.n}, {"cardinality", r.cardinality}}},
            {"evaluations", r.evaluations},
            {"grid", std::move(grid)}};
  if (r.params) j["inputs"]["params"] = to_json(*r.params);
  return j;
}

Json to_json(const SweepRow& row) {
  return {{"axis", to_string(row.axis)}, {"value", row.value},     {"h_min_lower", row.h_min_lower},
          {"p_guess_upper", row.p_guess_upper}, {"mu", row.mu},   {"gap", row.gap},
          {"status", row.status},       {"runtime_s", row.runtime_s}};
}

Json to_json(const RunManifest& m) {
  return {{"command", m.command},   {"parameters", m.parameters}, {"seed", m.seed},
          {"tool_version", m.tool_version}, {"input_digests", m.input_digests},
          {"started", m.started},   {"finished", m.finished},   {"outputs", m.outputs}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_input, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_input, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::invalid_input, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::invalid_input, "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  Fnv1a h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto p = output;
  p.replace_extension();
  p += ".manifest.json";
  return p;
}

}  // namespace qcert
