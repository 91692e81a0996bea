#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dseq/error.hpp"
#include "dseq/io.hpp"

namespace dseq::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kNumericalFailure = 3,
  kRankOneFailure = 4,
};

/// AM run that ended without a rank-one solution; its trace and summary are
/// already on disk when this is thrown.
class RankOneFailure : public Error {
 public:
  using Error::Error;
};

struct RunSummary {
  std::string algorithm;
  int n = 0;
  double wpsl = 0.0;
  double wpsl_db = 0.0;
  double papr = 0.0;
  double max_stopband_esd = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  std::string status;
  std::filesystem::path sequence_csv;
  std::filesystem::path trace_csv;
  std::filesystem::path summary_json;

  nlohmann::json to_json(std::uint64_t seed) const;
};

/// Runs the configured algorithm and writes sequence.csv, trace.csv and
/// summary.json under out_dir.
RunSummary cmd_design(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Writes af_grid.csv, esd.csv and feasibility.json for a saved sequence.
FeasibilityReport cmd_analyze(const std::filesystem::path& seq_path, const RunConfig& cfg,
                              const std::filesystem::path& out_dir, bool renormalize = false);

/// Writes compare.csv with one row per sequence.
void cmd_compare(const std::vector<std::filesystem::path>& seq_paths, const RunConfig& cfg,
                 const std::filesystem::path& out_dir);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dseq::cli
