#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "qcert/certification.hpp"
#include "qcert/combinatorics.hpp"
#include "qcert/detector.hpp"
#include "qcert/oracle.hpp"
#include "qcert/rate.hpp"
#include "qcert/sdp.hpp"

namespace qcert {

using Json = nlohmann::ordered_json;

const char* tool_version() noexcept;

Json to_json(const StateGroup& group);
StateGroup group_from_json(const Json& j);

Json to_json(const DetectorParams& params);
DetectorParams params_from_json(const Json& j);

Json to_json(const CondProbTable& table);
CondProbTable table_from_json(const Json& j);

Json to_json(const SdpProblem& problem);
SdpProblem problem_from_json(const Json& j);

/// {"p_guess_upper", "h_min_lower", "strategies", "status", "inputs": {...}, ...};
/// the inputs echo carries the Gram matrix, mu or delta, options and digests.
Json to_json(const CertificationResult& result);
CertificationResult result_from_json(const Json& j);

Json to_json(const OracleReport& report);
Json to_json(const RateResult& rate);
Json to_json(const SweepRow& row);

/// Provenance written next to every output file.
struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  std::uint64_t seed = 0;
  std::string tool_version = qcert::tool_version();
  std::map<std::string, std::string> input_digests;  ///< path -> FNV-1a of the bytes
  std::string started;  ///< UTC, ISO 8601
  std::string finished;
  std::vector<std::string> outputs;
};

Json to_json(const RunManifest& manifest);
std::string utc_timestamp();

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
std::string file_digest(const std::filesystem::path& path);
/// "out.json" -> "out.manifest.json".
std::filesystem::path manifest_path(const std::filesystem::path& output);

}  // namespace qcert
