// qcert: batch front end for enumeration, simulation, certification, sweeps,
// rates, sampling, extraction and verification. JSON outputs embed their run
// manifest; CSV and other files get a sidecar "<stem>.manifest.json".

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcert/error.hpp"
#include "qcert/extract.hpp"
#include "qcert/io.hpp"

namespace {

using namespace qcert;
namespace fs = std::filesystem;

struct Run {
  RunManifest manifest;

  explicit Run(std::string command) {
    manifest.command = std::move(command);
    manifest.started = utc_timestamp();
  }
  void input(const std::string& path) { manifest.input_digests[path] = file_digest(path); }

  // Writes `body` (plus the manifest) to `out`, or to stdout when empty.
  void emit_json(Json body, const std::string& out) {
    manifest.finished = utc_timestamp();
    if (!out.empty()) manifest.outputs.push_back(out);
    body["manifest"] = to_json(manifest);
    if (out.empty()) {
      std::cout << body.dump(2) << '\n';
    } else {
      write_json(out, body);
    }
  }
  // Sidecar manifest for non-JSON outputs.
  void seal(const std::string& out) {
    manifest.finished = utc_timestamp();
    manifest.outputs.push_back(out);
    write_json(manifest_path(out), to_json(manifest));
  }
};

struct DetectorFlags {
  double eta = 1.0;
  double loss = 1.0;
  double epsilon = 0.0;
  double pap = 0.0;
  double f = 31.25e6;
  std::optional<double> dcr;

  void attach(CLI::App* app) {
    app->add_option("--eta", eta, "detection efficiency")->capture_default_str();
    app->add_option("--loss", loss, "channel transmission L")->capture_default_str();
    app->add_option("--epsilon", epsilon, "noise click probability per bin")->capture_default_str();
    app->add_option("--dcr", dcr, "dark-count rate in Hz; sets epsilon = DCR / f");
    app->add_option("--pap", pap, "afterpulse probability")->capture_default_str();
    app->add_option("--f", f, "repetition rate in Hz")->capture_default_str();
  }
  DetectorParams params() const {
    DetectorParams p{eta, loss, dcr ? noise_from_dark_counts(*dcr, f) : epsilon, pap, f};
    p.validate();
    return p;
  }
};

std::optional<OutcomeGrouping> make_grouping(const std::string& name, std::span<const Codeword> states) {
  const int n = states.front().length();
  if (name == "raw") return std::nullopt;
  if (name == "no-click") return OutcomeGrouping::no_click(n);
  if (name == "ideal") return OutcomeGrouping::ideal(states);
  if (name == "first-click") return OutcomeGrouping::first_click(n);
  throw Error(Errc::invalid_input, "unknown grouping '" + name + "'");
}

std::vector<Codeword> states_of(const CondProbTable& table) {
  std::vector<Codeword> out;
  for (const auto& label : table.inputs) out.push_back(BitString::parse(label));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-device-independent randomness certification for time-bin weak coherent states"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "constant-overlap state group for (n, m, s)");
  int en = 0, em = 0, es = 0;
  bool emax = false;
  int search_limit = kDefaultSearchLimit;
  std::string enum_out;
  enumerate->add_option("--n", en, "time bins")->required();
  enumerate->add_option("--m", em, "pulses per state")->required();
  enumerate->add_option("--s", es, "shared pulses per pair")->required();
  enumerate->add_flag("--max", emax, "exact maximum group by clique search instead of the explicit construction");
  enumerate->add_option("--search-limit", search_limit, "largest n for the clique search")->capture_default_str();
  enumerate->add_option("--out", enum_out, "output JSON (default stdout)");

  // probs
  auto* probs = app.add_subcommand("probs", "conditional probability table from the detector model");
  std::string group_file, probs_out, grouping = "ideal", boundary = "stationary";
  double probs_mu = 0.0;
  DetectorFlags det;
  probs->add_option("--group", group_file, "group JSON (from enumerate)")->required()->check(CLI::ExistingFile);
  probs->add_option("--mu", probs_mu, "mean photon number per pulse")->required();
  det.attach(probs);
  probs->add_option("--grouping", grouping, "raw | ideal | no-click | first-click")->capture_default_str();
  probs->add_option("--boundary", boundary, "cold | stationary")->capture_default_str();
  probs->add_option("--out", probs_out, "output JSON (default stdout)");

  // certify
  auto* certify = app.add_subcommand("certify", "certified guessing probability and min-entropy");
  std::string table_file, cert_group, cert_out, problem_out;
  std::optional<double> delta, cert_mu, stop_on_noise;
  CertifyOptions copts;
  certify->add_option("--table", table_file, "table JSON")->required()->check(CLI::ExistingFile);
  auto* delta_opt = certify->add_option("--delta", delta, "constant pairwise overlap");
  auto* mu_opt = certify->add_option("--mu", cert_mu, "mean photon number; overlaps from the states' coincidences");
  delta_opt->excludes(mu_opt);
  certify->add_option("--group", cert_group, "group JSON for --mu (default: the table's input labels)")
      ->check(CLI::ExistingFile);
  certify->add_option("--tol", copts.tol, "solver relative gap")->capture_default_str();
  certify->add_option("--max-strategies", copts.max_strategies, "strategy guard")->capture_default_str();
  certify->add_option("--stop-on-noise", stop_on_noise,
                      "abort when the table is further than this total-variation distance from the model table "
                      "recorded in its metadata (0.05 is a sensible threshold)");
  certify->add_option("--out", cert_out, "result JSON (default stdout)");
  certify->add_option("--problem", problem_out, "archive the certificate problem here (default <out>.problem.json)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "certified entropy over a parameter grid, as CSV");
  std::string axis_text, family_text, sweep_out;
  SweepOptions sopts;
  sweep_cmd->add_option("--axis", axis_text, "overlap | mu | outcomes | inputs")->required();
  sweep_cmd->add_option("--family", family_text, "family, e.g. n=4,m=2,s=1,eta=0.83,eps=2.56e-6")->required();
  sweep_cmd->add_option("--grid", sopts.grid, "grid points")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "output CSV")->required();
  sweep_cmd->add_option("--threads", sopts.threads, "worker threads (default QCERT_THREADS or all cores)");
  sweep_cmd->add_option("--json", "also write the rows as a JSON array to this path");

  // rate
  auto* rate = app.add_subcommand("rate", "generation rate (f / n) * cardinality * h_min");
  double rf = 31.25e6, rhmin = 0.0;
  int rn = 0, rcard = 0;
  bool roptimize = false;
  std::string rate_group, rate_out, rate_grouping = "ideal", rate_boundary = "cold";
  MuSearch search;
  DetectorFlags rdet;
  rate->add_option("--f", rf, "repetition rate in Hz")->capture_default_str();
  rate->add_option("--n", rn, "time bins per state");
  rate->add_option("--cardinality", rcard, "number of input states");
  rate->add_option("--hmin", rhmin, "certified min-entropy per state");
  rate->add_flag("--optimize", roptimize, "optimise mu for --group and report the rate at the optimum");
  rate->add_option("--group", rate_group, "group JSON for --optimize")->check(CLI::ExistingFile);
  rate->add_option("--eta", rdet.eta)->capture_default_str();
  rate->add_option("--loss", rdet.loss)->capture_default_str();
  rate->add_option("--epsilon", rdet.epsilon)->capture_default_str();
  rate->add_option("--pap", rdet.pap)->capture_default_str();
  rate->add_option("--grouping", rate_grouping)->capture_default_str();
  rate->add_option("--boundary", rate_boundary)->capture_default_str();
  rate->add_option("--mu-min", search.mu_min)->capture_default_str();
  rate->add_option("--mu-max", search.mu_max)->capture_default_str();
  rate->add_option("--mu-grid", search.grid)->capture_default_str();
  rate->add_option("--refine-tol", search.refine_tol)->capture_default_str();
  rate->add_option("--out", rate_out, "output JSON (default stdout)");

  // sample
  auto* sample = app.add_subcommand("sample", "simulated click patterns for one state");
  std::string state_bits, sample_out, sample_boundary = "stationary";
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double sample_mu = 0.5;
  DetectorFlags sdet;
  sample->add_option("--state", state_bits, "codeword, e.g. 1100")->required();
  sample->add_option("--count", count, "number of patterns")->required();
  sample->add_option("--seed", seed, "RNG seed")->required();
  sample->add_option("--mu", sample_mu)->capture_default_str();
  sdet.attach(sample);
  sample->add_option("--boundary", sample_boundary)->capture_default_str();
  sample->add_option("--out", sample_out, "output JSON (default stdout)");

  // extract
  auto* extract = app.add_subcommand("extract", "Toeplitz hashing of sampled patterns");
  std::string extract_in, extract_out;
  double ehmin = 0.0;
  std::uint64_t eseed = 0;
  int margin = kDefaultSecurityMargin;
  extract->add_option("--in", extract_in, "patterns JSON (from sample)")->required()->check(CLI::ExistingFile);
  extract->add_option("--hmin", ehmin, "certified min-entropy per symbol")->required();
  extract->add_option("--seed", eseed, "Toeplitz seed")->required();
  extract->add_option("--margin", margin, "security margin in bits")->capture_default_str();
  extract->add_option("--out", extract_out, "output JSON (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "re-check a stored certification result");
  std::string verify_result, verify_problem, verify_table;
  verify->add_option("--result", verify_result, "result JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--problem", verify_problem, "archived problem (default <result>.problem.json)");
  verify->add_option("--table", verify_table, "table to compare digests with")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*enumerate) {
      Run run("enumerate");
      run.manifest.parameters = {{"n", en}, {"m", em}, {"s", es}, {"max", emax}};
      Json body;
      if (emax) {
        const auto best = max_constant_s_group(en, em, es, search_limit);
        body = to_json(best.witness);
        body["size"] = best.size;
        body["nodes"] = best.nodes;
        body["lower_bound"] = lower_bound_code_size(en, em, es);
      } else {
        body = to_json(construct_lower_bound_code(en, em, es));
        body["size"] = body["members"].size();
      }
      run.emit_json(std::move(body), enum_out);
    } else if (*probs) {
      Run run("probs");
      run.input(group_file);
      const auto group = group_from_json(read_json(group_file));
      const auto params = det.params();
      run.manifest.parameters = {{"group", group_file}, {"mu", probs_mu}, {"params", to_json(params)},
                                 {"grouping", grouping}, {"boundary", boundary}};
      const auto table =
          cond_prob_table(group.members, probs_mu, params, make_grouping(grouping, group.members), parse_boundary(boundary));
      run.emit_json(to_json(table), probs_out);
    } else if (*certify) {
      if (!delta && !cert_mu) throw CLI::RequiredError("--delta or --mu");
      Run run("certify");
      run.input(table_file);
      const auto table = table_from_json(read_json(table_file));
      run.manifest.parameters = {{"table", table_file}, {"tol", copts.tol}, {"max_strategies", copts.max_strategies}};
      if (stop_on_noise) {
        if (!table.mu || !table.params) {
          throw Error(Errc::invalid_input, "--stop-on-noise needs mu and params recorded in the table");
        }
        const auto states = states_of(table);
        const auto model = cond_prob_table(states, *table.mu, *table.params,
                                           make_grouping(table.grouping.value_or("raw"), states),
                                           table.boundary.value_or(Boundary::stationary));
        const double tv = max_row_tv_distance(table, model);
        run.manifest.parameters["stop_on_noise"] = *stop_on_noise;
        if (tv > *stop_on_noise) {
          std::cerr << "qcert: observed statistics are " << tv << " from the model (threshold " << *stop_on_noise
                    << "); stopping\n";
          return 1;
        }
      }
      CertificationResult result;
      if (delta) {
        run.manifest.parameters["delta"] = *delta;
        result = certify_min_entropy_overlap(static_cast<int>(table.input_count()), *delta, table, copts);
      } else {
        run.manifest.parameters["mu"] = *cert_mu;
        std::vector<Codeword> states;
        if (!cert_group.empty()) {
          run.input(cert_group);
          states = group_from_json(read_json(cert_group)).members;
        } else {
          states = states_of(table);
        }
        result = certify_min_entropy(std::span<const Codeword>(states), *cert_mu, table, copts);
      }
      const auto archived = rebuild_guess_sdp(result, table);
      if (problem_out.empty() && !cert_out.empty()) {
        problem_out = (fs::path(cert_out).replace_extension().string()) + ".problem.json";
      }
      Json body = to_json(result);
      if (!problem_out.empty()) {
        write_json(problem_out, to_json(archived.problem));
        run.manifest.outputs.push_back(problem_out);
        body["problem_file"] = fs::path(problem_out).filename().string();
      }
      run.emit_json(std::move(body), cert_out);
    } else if (*sweep_cmd) {
      Run run("sweep");
      const auto axis = parse_sweep_axis(axis_text);
      const auto family = Family::parse(family_text);
      run.manifest.parameters = {{"axis", axis_text}, {"family", family.str()}, {"grid", sopts.grid}};
      std::ofstream csv(sweep_out);
      if (!csv) throw Error(Errc::invalid_input, "cannot write " + sweep_out);
      csv << kSweepCsvHeader << '\n';
      const auto rows = sweep(axis, family, sopts, [&](const SweepRow& row) { csv << csv_line(row) << '\n' << std::flush; });
      csv.close();
      if (const auto* json_opt = sweep_cmd->get_option("--json"); json_opt->count() > 0) {
        const auto path = json_opt->as<std::string>();
        Json arr = Json::array();
        for (const auto& r : rows) arr.push_back(to_json(r));
        write_json(path, arr);
        run.manifest.outputs.push_back(path);
      }
      run.seal(sweep_out);
      int failed = 0;
      for (const auto& r : rows) failed += r.status.rfind("error", 0) == 0;
      if (failed) std::cerr << "qcert: " << failed << " grid point(s) failed; see the status column\n";
    } else if (*rate) {
      Run run("rate");
      RateResult result;
      if (roptimize) {
        if (rate_group.empty()) throw CLI::RequiredError("--group (with --optimize)");
        run.input(rate_group);
        Instance inst;
        inst.states = group_from_json(read_json(rate_group)).members;
        inst.params = rdet.params();
        inst.grouping = rate_grouping;
        inst.boundary = parse_boundary(rate_boundary);
        run.manifest.parameters = {{"group", rate_group}, {"params", to_json(inst.params)}, {"grouping", rate_grouping},
                                   {"mu_min", search.mu_min}, {"mu_max", search.mu_max}, {"mu_grid", search.grid}};
        result = optimize_mu(inst, search, rf);
      } else {
        if (rn <= 0 || rcard <= 0) throw CLI::RequiredError("--n and --cardinality (or --optimize)");
        run.manifest.parameters = {{"f", rf}, {"n", rn}, {"cardinality", rcard}, {"hmin", rhmin}};
        result = generation_rate(rf, rn, rcard, rhmin);
      }
      run.emit_json(to_json(result), rate_out);
    } else if (*sample) {
      Run run("sample");
      run.manifest.seed = seed;
      const auto params = sdet.params();
      run.manifest.parameters = {{"state", state_bits}, {"count", count}, {"mu", sample_mu},
                                 {"params", to_json(params)}, {"boundary", sample_boundary}};
      const auto patterns =
          sample_patterns(BitString::parse(state_bits), sample_mu, params, count, seed, parse_boundary(sample_boundary));
      Json arr = Json::array();
      for (const auto& p : patterns) arr.push_back(p.str());
      run.emit_json({{"state", state_bits}, {"patterns", std::move(arr)}}, sample_out);
    } else if (*extract) {
      Run run("extract");
      run.input(extract_in);
      run.manifest.seed = eseed;
      run.manifest.parameters = {{"in", extract_in}, {"hmin", ehmin}, {"margin", margin}};
      const auto j = read_json(extract_in);
      std::vector<ClickPattern> raw;
      for (const auto& p : j.is_array() ? j : j.at("patterns")) raw.push_back(BitString::parse(p.get<std::string>()));
      const auto result = extract_bits(raw, ehmin, eseed, margin);
      std::string bits;
      bits.reserve(result.bits.size());
      for (auto b : result.bits) bits.push_back(b ? '1' : '0');
      run.emit_json({{"input_bits", result.input_bits}, {"output_bits", result.output_bits}, {"seed", eseed},
                     {"bits", bits}},
                    extract_out);
    } else if (*verify) {
      const auto rj = read_json(verify_result);
      const auto result = result_from_json(rj);
      if (verify_problem.empty()) {
        if (rj.contains("problem_file")) {
          verify_problem = (fs::path(verify_result).parent_path() / rj.at("problem_file").get<std::string>()).string();
        } else {
          verify_problem = fs::path(verify_result).replace_extension().string() + ".problem.json";
        }
      }
      const auto problem = problem_from_json(read_json(verify_problem));
      std::optional<CondProbTable> table;
      if (!verify_table.empty()) table = table_from_json(read_json(verify_table));
      const auto audit = audit_result(result, problem, table ? &*table : nullptr);
      Json body = {{"pass", audit.pass}, {"recomputed_bound", audit.recomputed_bound}, {"failures", audit.failures},
                   {"result", verify_result}, {"problem", verify_problem}};
      std::cout << body.dump(2) << '\n';
      if (!audit.pass) {
        for (const auto& f : audit.failures) std::cerr << "qcert verify: " << f << '\n';
        return 1;
      }
    }
  } catch (const CLI::Error& e) {
    std::cerr << "qcert: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "qcert: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "qcert: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
