#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcert/certification.hpp"
#include "qcert/error.hpp"
#include "qcert/extract.hpp"
#include "qcert/io.hpp"
#include "qcert/oracle.hpp"
#include "qcert/rate.hpp"

namespace py = pybind11;
using namespace qcert;

namespace {

std::vector<Codeword> parse_states(const std::vector<std::string>& states) {
  std::vector<Codeword> out;
  for (const auto& s : states) out.push_back(BitString::parse(s));
  return out;
}

std::vector<std::string> words(const std::vector<BitString>& v) {
  std::vector<std::string> out;
  for (const auto& b : v) out.push_back(b.str());
  return out;
}

std::optional<OutcomeGrouping> grouping_for(const std::string& name, const std::vector<Codeword>& states) {
  if (name == "raw") return std::nullopt;
  if (name == "ideal") return OutcomeGrouping::ideal(states);
  if (name == "no-click") return OutcomeGrouping::no_click(states.front().length());
  if (name == "first-click") return OutcomeGrouping::first_click(states.front().length());
  throw Error(Errc::invalid_input, "unknown grouping '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_qcert, m) {
  m.doc() = "qcert core bindings";
  m.attr("__version__") = tool_version();
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<DetectorParams>(m, "DetectorParams")
      .def(py::init([](double eta, double transmission, double epsilon, double p_ap, double rep_rate) {
             DetectorParams p{eta, transmission, epsilon, p_ap, rep_rate};
             p.validate();
             return p;
           }),
           py::arg("eta_det") = 1.0, py::arg("transmission") = 1.0, py::arg("epsilon") = 0.0,
           py::arg("p_ap") = 0.0, py::arg("rep_rate") = 31.25e6)
      .def_readwrite("eta_det", &DetectorParams::eta_det)
      .def_readwrite("transmission", &DetectorParams::transmission)
      .def_readwrite("epsilon", &DetectorParams::epsilon)
      .def_readwrite("p_ap", &DetectorParams::p_ap)
      .def_readwrite("rep_rate", &DetectorParams::rep_rate)
      .def("__repr__", [](const DetectorParams& p) { return "DetectorParams(" + to_json(p).dump() + ")"; });

  py::class_<CondProbTable>(m, "CondProbTable")
      .def_readonly("inputs", &CondProbTable::inputs)
      .def_readonly("outcomes", &CondProbTable::outcomes)
      .def_readonly("probs", &CondProbTable::probs)
      .def("to_json", [](const CondProbTable& t) { return to_json(t).dump(); })
      .def_static("from_json", [](const std::string& text) { return table_from_json(Json::parse(text)); });

  py::class_<CertificationResult>(m, "CertificationResult")
      .def_readonly("p_guess_upper", &CertificationResult::p_guess_upper)
      .def_readonly("p_guess_primal", &CertificationResult::p_guess_primal)
      .def_readonly("h_min_lower", &CertificationResult::h_min_lower)
      .def_readonly("strategy_count", &CertificationResult::strategy_count)
      .def_readonly("gap", &CertificationResult::gap)
      .def_readonly("iterations", &CertificationResult::iterations)
      .def_property_readonly("status", [](const CertificationResult& r) { return std::string(to_string(r.status)); })
      .def("to_json", [](const CertificationResult& r) { return to_json(r).dump(); });

  m.def("enumerate_states", [](int n, int k) { return words(enumerate_states(n, k)); }, py::arg("n"), py::arg("m"));
  m.def("coincidence", [](const std::string& a, const std::string& b) {
    return coincidence(BitString::parse(a), BitString::parse(b));
  });
  m.def("lower_bound_code_size", &lower_bound_code_size, py::arg("n"), py::arg("m"), py::arg("s"));
  m.def("construct_lower_bound_code", [](int n, int k, int s) { return words(construct_lower_bound_code(n, k, s).members); },
        py::arg("n"), py::arg("m"), py::arg("s"));
  m.def("max_constant_s_group", [](int n, int k, int s) { return words(max_constant_s_group(n, k, s).witness.members); },
        py::arg("n"), py::arg("m"), py::arg("s"));
  m.def("ideal_outcome_set", [](const std::vector<std::string>& states) {
    return words(ideal_outcome_set(parse_states(states)));
  });

  m.def("steady_state_click_prob", &steady_state_click_prob, py::arg("mu"), py::arg("params"));
  m.def(
      "pattern_distribution",
      [](const std::string& state, double mu, const DetectorParams& params, const std::string& boundary) {
        return pattern_distribution(BitString::parse(state), mu, params, parse_boundary(boundary));
      },
      py::arg("state"), py::arg("mu"), py::arg("params"), py::arg("boundary") = "stationary");
  m.def("pattern_prob_oracle",
        [](const std::string& state, double mu, const DetectorParams& params, const std::string& boundary) {
          return pattern_prob_oracle(state, mu, params, parse_boundary(boundary));
        },
        py::arg("state"), py::arg("mu"), py::arg("params"), py::arg("boundary") = "stationary");
  m.def(
      "cond_prob_table",
      [](const std::vector<std::string>& states, double mu, const DetectorParams& params, const std::string& grouping,
         const std::string& boundary) {
        const auto codewords = parse_states(states);
        return cond_prob_table(codewords, mu, params, grouping_for(grouping, codewords), parse_boundary(boundary));
      },
      py::arg("states"), py::arg("mu"), py::arg("params"), py::arg("grouping") = "ideal",
      py::arg("boundary") = "stationary");

  m.def(
      "certify",
      [](const std::vector<std::string>& states, double mu, const CondProbTable& table, double tol) {
        CertifyOptions o;
        o.tol = tol;
        const auto codewords = parse_states(states);
        py::gil_scoped_release release;
        return certify_min_entropy(std::span<const Codeword>(codewords), mu, table, o);
      },
      py::arg("states"), py::arg("mu"), py::arg("table"), py::arg("tol") = 1e-6);
  m.def(
      "certify_overlap",
      [](int inputs, double delta, const CondProbTable& table, double tol) {
        CertifyOptions o;
        o.tol = tol;
        py::gil_scoped_release release;
        return certify_min_entropy_overlap(inputs, delta, table, o);
      },
      py::arg("inputs"), py::arg("delta"), py::arg("table"), py::arg("tol") = 1e-6);

  m.def(
      "grid_lp_oracle",
      [](double delta, const CondProbTable& table, int resolution) {
        const auto report = grid_lp_oracle(embed_states(constant_overlap_gram(2, delta)), table, resolution);
        return report.lower_bound;
      },
      py::arg("delta"), py::arg("table"), py::arg("resolution") = 10000);

  m.def(
      "generation_rate",
      [](double f, int n, int cardinality, double h_min) { return generation_rate(f, n, cardinality, h_min).rate; },
      py::arg("f"), py::arg("n"), py::arg("cardinality"), py::arg("h_min"));

  m.def(
      "extract_bits",
      [](const std::vector<std::string>& patterns, double h_min, std::uint64_t seed, int margin) {
        return extract_bits(parse_states(patterns), h_min, seed, margin).bits;
      },
      py::arg("patterns"), py::arg("h_min"), py::arg("seed"), py::arg("margin") = kDefaultSecurityMargin);
}
