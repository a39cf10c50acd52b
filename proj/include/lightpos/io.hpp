#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lightpos/sim.hpp"

namespace lightpos {

inline constexpr const char* kToolVersion = "0.1.0";

/// Optional coverage-planning block of a scenario file.
struct CoverageSettings {
  double cell_size = kDefaultCellSize;
  double candidate_spacing = 1.0;
  double candidate_height = 3.0;
  CoverageCriteria criteria;
};

struct ScenarioFile {
  Scenario scenario;
  CoverageSettings coverage;
  std::string digest;  // sha256 of the file bytes, hex
};

/// Parses and validates a scenario document. Angles are in degrees. Errors
/// are InputError with the JSON path of the offending field, or the line and
/// column of a syntax error.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::string& path);

Floorplan floorplan_of(const Scenario& scn);

std::string read_file(const std::string& path);
/// Writes bytes verbatim; throws InputError when the path is not writable.
void write_file(const std::string& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

/// Fixed 9-significant-digit formatting used by every report.
std::string format_number(double v);

struct ReportEnvelope {
  std::string version = kToolVersion;
  std::string scenario_digest;
  std::uint64_t seed = 0;
  std::optional<std::string> timestamp;  // omitted unless requested
  std::string payload;                   // file name of the CSV body
};

std::string fixes_csv(std::span<const Fix> fixes);
std::string track_csv(std::span<const TrackFix> track);
/// Header "median,mean,max,stdev,count" and one row.
std::string stats_csv(const ErrorStats& stats);
std::string sensitivity_csv(const SensitivityTable& table);

/// Sorted-key JSON with numbers at 9 significant digits and a trailing LF.
std::string stats_sidecar(const ReportEnvelope& env, const ErrorStats& stats,
                          std::size_t failures);

}  // namespace lightpos
