#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dseq/ambiguity.hpp"
#include "dseq/error.hpp"
#include "dseq/trace.hpp"
#include "dseq/waveform.hpp"

namespace dseq {

/// Configuration problem, with the file and field (or line/column) it came from.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct ZoneSpec {
  int max_delay = 5;
  std::string unit = "bins";  // "bins" (nu = f N) or "cycles" (f)
  double min = -2.0;
  double max = 2.0;
  int count = 41;
  std::vector<double> weights;  // empty means unit weights
};

struct MaskSpec {
  std::vector<std::pair<double, double>> stopband;  // empty means no mask
  double attenuation_db = 0.0;
  int bins = 50;  // per band
};

struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  int n = 0;
  std::string algorithm = "alamm";
  std::uint64_t seed = 1;
  ZoneSpec zone;
  MaskSpec mask;
  DesignConfig design;
  int filter_taps = 63;
  std::string output_dir = "out";
  bool record_timing = true;

  ZoneOfOperation make_zone() const;
  SpectralMask make_mask() const;
};

/// Parses and validates a JSON config. `source` only labels diagnostics.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// CSV with header `n,re,im`, n = 1..N.
void write_sequence_csv(const std::filesystem::path& path, const CVector& x);
CVector read_sequence_csv(const std::filesystem::path& path);

/// `iter,wpsl_db,merit,max_stopband_violation,papr,wall_ms`; wall_ms is
/// written as 0 when timing is off.
void write_alamm_trace_csv(const std::filesystem::path& path, const AlammTrace& trace,
                           bool record_timing = true);
/// `iter,gap,phi,sigma_ratio,wall_ms`.
void write_am_trace_csv(const std::filesystem::path& path, const AmTrace& trace,
                        bool record_timing = true);

/// `k,doppler,re,im,abs_db` with Doppler in bins and the mainlobe row first.
void write_af_grid_csv(const std::filesystem::path& path, const AFGrid& grid, int n);

/// `f,esd,esd_db,u_max` on a uniform grid of `grid_size` points merged with
/// the mask bins.
void write_esd_csv(const std::filesystem::path& path, const CVector& x, const SpectralMask& mask,
                   int grid_size = 2048);

nlohmann::json to_json(const FeasibilityReport& report);

}  // namespace dseq
