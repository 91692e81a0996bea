#include "dseq/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dseq/error.hpp"

namespace dseq {

namespace {

using nlohmann::json;

std::string location(const std::string& source, const std::string& field) {
  return source + ": field '" + field + "'";
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& path, const std::string& source,
            T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(location(source, path + key) + ": " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& path,
                    const std::string& source) {
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) throw ConfigError(location(source, path + key) + ": unknown key");
  }
}

const json& object_field(const json& j, const char* key, const std::string& path, const std::string& source) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(location(source, path + key) + ": expected an object");
  return j.at(key);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

double db10(double v) { return 10.0 * std::log10(v); }

}  // namespace

ZoneOfOperation RunConfig::make_zone() const {
  if (zone.unit == "bins")
    return ZoneOfOperation::from_bins(zone.max_delay, zone.min, zone.max, zone.count, n, zone.weights);
  std::vector<double> doppler;
  for (int i = 0; i < zone.count; ++i)
    doppler.push_back(zone.count == 1 ? zone.min : zone.min + (zone.max - zone.min) * i / (zone.count - 1));
  std::vector<double> weights = zone.weights;
  if (weights.empty()) weights.assign(2 * zone.max_delay + 1, 1.0);
  return ZoneOfOperation(zone.max_delay, std::move(doppler), std::move(weights));
}

SpectralMask RunConfig::make_mask() const {
  if (mask.stopband.empty()) return SpectralMask::none(n);
  return SpectralMask::from_bands(n, mask.stopband, mask.bins, mask.attenuation_db);
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": " << e.what();
    throw ConfigError(os.str());
  }
  if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
  reject_unknown(j, {"schema_version", "N", "algorithm", "seed", "zone", "mask", "design", "output_dir",
                     "record_timing"},
                 "", source);

  RunConfig cfg;
  const int version = get_field<int>(j, "schema_version", "", source, -1);
  if (version != RunConfig::kSchemaVersion)
    throw ConfigError(location(source, "schema_version") + ": expected " +
                      std::to_string(RunConfig::kSchemaVersion));
  if (!j.contains("N")) throw ConfigError(location(source, "N") + ": required");
  cfg.n = get_field<int>(j, "N", "", source, 0);
  if (cfg.n < 2) throw ConfigError(location(source, "N") + ": must be at least 2");
  cfg.algorithm = get_field<std::string>(j, "algorithm", "", source, cfg.algorithm);
  static const char* algorithms[] = {"alamm", "am", "chirp", "polyphase", "filtered-polyphase"};
  if (std::none_of(std::begin(algorithms), std::end(algorithms), [&](const char* a) { return cfg.algorithm == a; }))
    throw ConfigError(location(source, "algorithm") + ": unknown algorithm '" + cfg.algorithm + "'");
  cfg.seed = get_field<std::uint64_t>(j, "seed", "", source, cfg.seed);
  cfg.output_dir = get_field<std::string>(j, "output_dir", "", source, cfg.output_dir);
  cfg.record_timing = get_field<bool>(j, "record_timing", "", source, cfg.record_timing);

  const json& zone = object_field(j, "zone", "", source);
  reject_unknown(zone, {"max_delay", "doppler", "weights"}, "zone.", source);
  cfg.zone.max_delay = get_field<int>(zone, "max_delay", "zone.", source, cfg.zone.max_delay);
  cfg.zone.weights = get_field<std::vector<double>>(zone, "weights", "zone.", source, {});
  const json& doppler = object_field(zone, "doppler", "zone.", source);
  reject_unknown(doppler, {"unit", "min", "max", "count"}, "zone.doppler.", source);
  cfg.zone.unit = get_field<std::string>(doppler, "unit", "zone.doppler.", source, cfg.zone.unit);
  if (cfg.zone.unit != "bins" && cfg.zone.unit != "cycles")
    throw ConfigError(location(source, "zone.doppler.unit") + ": expected 'bins' or 'cycles'");
  cfg.zone.min = get_field<double>(doppler, "min", "zone.doppler.", source, cfg.zone.min);
  cfg.zone.max = get_field<double>(doppler, "max", "zone.doppler.", source, cfg.zone.max);
  cfg.zone.count = get_field<int>(doppler, "count", "zone.doppler.", source, cfg.zone.count);
  if (cfg.zone.max_delay < 0 || cfg.zone.max_delay >= cfg.n)
    throw ConfigError(location(source, "zone.max_delay") + ": must lie in [0, N - 1]");
  if (cfg.zone.count < 1) throw ConfigError(location(source, "zone.doppler.count") + ": must be positive");
  if (!cfg.zone.weights.empty() && cfg.zone.weights.size() != static_cast<std::size_t>(2 * cfg.zone.max_delay + 1))
    throw ConfigError(location(source, "zone.weights") + ": expected 2 * max_delay + 1 entries");

  if (j.contains("mask") && !j.at("mask").is_null()) {
    const json& mask = object_field(j, "mask", "", source);
    reject_unknown(mask, {"stopband", "attenuation_db", "bins"}, "mask.", source);
    const auto bands = get_field<std::vector<std::vector<double>>>(mask, "stopband", "mask.", source, {});
    for (const auto& b : bands) {
      if (b.size() != 2 || !(b[1] >= b[0]))
        throw ConfigError(location(source, "mask.stopband") + ": each band is [lo, hi] with lo <= hi");
      cfg.mask.stopband.emplace_back(b[0], b[1]);
    }
    cfg.mask.attenuation_db = get_field<double>(mask, "attenuation_db", "mask.", source, cfg.mask.attenuation_db);
    cfg.mask.bins = get_field<int>(mask, "bins", "mask.", source, cfg.mask.bins);
  }

  const json& design = object_field(j, "design", "", source);
  reject_unknown(design,
                 {"papr_bound", "p", "eta", "rho", "tol_x", "tol_r", "t_max", "conic_tol", "conic_max_iter",
                  "inner_tol", "outer_tol", "stopband_tol", "feasibility_slack", "inner_max", "outer_max",
                  "filter_taps"},
                 "design.", source);
  DesignConfig& d = cfg.design;
  const std::string dp = "design.";
  d.papr_bound = get_field(design, "papr_bound", dp, source, d.papr_bound);
  d.p = get_field(design, "p", dp, source, d.p);
  d.eta = get_field(design, "eta", dp, source, d.eta);
  d.rho = get_field(design, "rho", dp, source, d.rho);
  d.tol_x = get_field(design, "tol_x", dp, source, d.tol_x);
  d.tol_r = get_field(design, "tol_r", dp, source, d.tol_r);
  d.t_max = get_field(design, "t_max", dp, source, d.t_max);
  d.conic_tol = get_field(design, "conic_tol", dp, source, d.conic_tol);
  d.conic_max_iter = get_field(design, "conic_max_iter", dp, source, d.conic_max_iter);
  d.inner_tol = get_field(design, "inner_tol", dp, source, d.inner_tol);
  d.outer_tol = get_field(design, "outer_tol", dp, source, d.outer_tol);
  d.stopband_tol = get_field(design, "stopband_tol", dp, source, d.stopband_tol);
  d.feasibility_slack = get_field(design, "feasibility_slack", dp, source, d.feasibility_slack);
  d.inner_max = get_field(design, "inner_max", dp, source, d.inner_max);
  d.outer_max = get_field(design, "outer_max", dp, source, d.outer_max);
  cfg.filter_taps = get_field(design, "filter_taps", dp, source, cfg.filter_taps);
  d.seed = cfg.seed;

  // Domain validation, reported against the config file.
  try {
    d.validate(cfg.n);
    (void)cfg.make_zone();
    (void)cfg.make_mask();
  } catch (const InvalidInput& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.string());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_sequence_csv(const std::filesystem::path& path, const CVector& x) {
  std::ostringstream os;
  os << "n,re,im\n";
  for (Eigen::Index i = 0; i < x.size(); ++i)
    os << i + 1 << ',' << format_double(x(i).real()) << ',' << format_double(x(i).imag()) << '\n';
  write_text(path, os.str());
}

CVector read_sequence_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  int lineno = 0;
  std::vector<cdouble> values;
  const auto fail = [&](const std::string& what) {
    throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "n,re,im") fail("expected header 'n,re,im'");
      continue;
    }
    std::istringstream fields(line);
    std::string a, b, c, extra;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c, ',') ||
        std::getline(fields, extra, ','))
      fail("expected three fields");
    try {
      std::size_t used = 0;
      const long idx = std::stol(a, &used);
      if (used != a.size() || idx != static_cast<long>(values.size()) + 1) fail("index out of sequence");
      const double re = std::stod(b, &used);
      if (used != b.size()) fail("bad real part");
      const double im = std::stod(c, &used);
      if (used != c.size()) fail("bad imaginary part");
      if (!std::isfinite(re) || !std::isfinite(im)) fail("non-finite value");
      values.emplace_back(re, im);
    } catch (const std::logic_error&) {
      fail("malformed number");
    }
  }
  if (values.empty()) throw InvalidInput(path.string() + ": no samples");
  CVector x(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) x(static_cast<Eigen::Index>(i)) = values[i];
  return x;
}

void write_alamm_trace_csv(const std::filesystem::path& path, const AlammTrace& trace, bool record_timing) {
  std::ostringstream os;
  os << "iter,wpsl_db,merit,max_stopband_violation,papr,wall_ms\n";
  for (const auto& r : trace.rows)
    os << r.iter << ',' << format_double(r.wpsl_db) << ',' << format_double(r.merit) << ','
       << format_double(r.max_stopband_violation) << ',' << format_double(r.papr) << ','
       << format_double(record_timing ? r.wall_ms : 0.0) << '\n';
  write_text(path, os.str());
}

void write_am_trace_csv(const std::filesystem::path& path, const AmTrace& trace, bool record_timing) {
  std::ostringstream os;
  os << "iter,gap,phi,sigma_ratio,wall_ms\n";
  for (const auto& r : trace.rows)
    os << r.iter << ',' << format_double(r.gap) << ',' << format_double(r.phi) << ','
       << format_double(r.sigma_ratio) << ',' << format_double(record_timing ? r.wall_ms : 0.0) << '\n';
  write_text(path, os.str());
}

void write_af_grid_csv(const std::filesystem::path& path, const AFGrid& grid, int n) {
  std::ostringstream os;
  os << "k,doppler,re,im,abs_db\n";
  const auto row = [&](int k, double f, cdouble a) {
    os << k << ',' << format_double(f * n) << ',' << format_double(a.real()) << ',' << format_double(a.imag())
       << ',' << format_double(20.0 * std::log10(std::abs(a) / n)) << '\n';
  };
  row(0, 0.0, grid.mainlobe);
  const auto& zone = grid.zone;
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l)
      if (zone.contains(k, l)) row(k, zone.doppler()[l], grid.at(k, l));
  write_text(path, os.str());
}

void write_esd_csv(const std::filesystem::path& path, const CVector& x, const SpectralMask& mask, int grid_size) {
  std::vector<double> freqs;
  for (int i = 0; i < grid_size; ++i) freqs.push_back(static_cast<double>(i) / grid_size);
  freqs.insert(freqs.end(), mask.bins().begin(), mask.bins().end());
  std::sort(freqs.begin(), freqs.end());
  freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
  const RVector e = esd(x, freqs);
  const double n = static_cast<double>(x.size());
  const std::string cap = mask.empty() ? "inf" : format_double(mask.u_max());
  std::ostringstream os;
  os << "f,esd,esd_db,u_max\n";
  for (std::size_t i = 0; i < freqs.size(); ++i)
    os << format_double(freqs[i]) << ',' << format_double(e(i)) << ',' << format_double(db10(e(i) / n)) << ','
       << cap << '\n';
  write_text(path, os.str());
}

json to_json(const FeasibilityReport& r) {
  json violations = json::array();
  for (const auto& v : r.stopband_violations)
    violations.push_back({{"frequency", v.frequency}, {"esd", v.esd}, {"u_max", v.u_max}});
  return {{"energy_error", r.energy_error},
          {"papr", r.papr_value},
          {"papr_bound", r.papr_bound},
          {"papr_ok", r.papr_ok()},
          {"max_stopband_esd", r.max_stopband_esd},
          {"stopband_violations", violations},
          {"wpsl", r.wpsl},
          {"wpsl_db", r.wpsl_db}};
}

}  // namespace dseq
