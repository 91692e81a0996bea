#include "dseq/cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dseq/alamm.hpp"
#include "dseq/am_sdr.hpp"
#include "dseq/threads.hpp"

namespace dseq::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json db_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double max_stopband_esd(const CVector& x, const SpectralMask& mask) {
  if (mask.empty()) return 0.0;
  return esd(x, mask.bins()).maxCoeff();
}

Sequence load_sequence(const fs::path& path, int expected_n, bool renormalize) {
  const CVector raw = read_sequence_csv(path);
  if (raw.size() != expected_n) {
    std::ostringstream os;
    os << path.string() << ": sequence length " << raw.size() << " does not match config N = " << expected_n;
    throw InvalidInput(os.str());
  }
  return renormalize ? Sequence::normalized(raw) : Sequence(raw);
}

}  // namespace

json RunSummary::to_json(std::uint64_t seed) const {
  const double esd_db = max_stopband_esd > 0.0 ? 10.0 * std::log10(max_stopband_esd / n) : -INFINITY;
  return {{"algorithm", algorithm},
          {"N", n},
          {"seed", seed},
          {"wpsl", wpsl},
          {"wpsl_db", db_or_null(wpsl_db)},
          {"papr", papr},
          {"max_stopband_esd", max_stopband_esd},
          {"max_stopband_esd_db", db_or_null(esd_db)},
          {"iterations", iterations},
          {"wall_ms", wall_ms},
          {"status", status},
          {"files",
           {{"sequence", sequence_csv.filename().string()},
            {"trace", trace_csv.filename().string()},
            {"summary", summary_json.filename().string()}}}};
}

RunSummary cmd_design(const RunConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const int n = cfg.n;
  const ZoneOfOperation zone = cfg.make_zone();
  const SpectralMask mask = cfg.make_mask();

  RunSummary summary;
  summary.algorithm = cfg.algorithm;
  summary.n = n;
  summary.status = "ok";
  summary.sequence_csv = out_dir / "sequence.csv";
  summary.trace_csv = out_dir / "trace.csv";
  summary.summary_json = out_dir / "summary.json";
  fs::create_directories(out_dir);

  const auto finish = [&](const CVector& x) {
    summary.wall_ms = cfg.record_timing
                          ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
                          : 0.0;
    summary.wpsl = wpsl(x, zone);
    summary.wpsl_db = wpsl_db(summary.wpsl, n);
    summary.papr = papr(x);
    summary.max_stopband_esd = max_stopband_esd(x, mask);
    write_json(summary.summary_json, summary.to_json(cfg.seed));
  };

  const auto baseline = [&](const Sequence& x) {
    AlammTrace trace;
    AlammTraceRow row;
    const FeasibilityReport rep = feasibility_report(x, zone, mask, cfg.design.papr_bound);
    row.wpsl_db = rep.wpsl_db;
    row.merit = NAN;
    row.max_stopband_violation = mask.empty() ? 0.0 : std::max(0.0, rep.max_stopband_esd - mask.u_max());
    row.papr = rep.papr_value;
    trace.rows.push_back(row);
    write_sequence_csv(summary.sequence_csv, x.values());
    write_alamm_trace_csv(summary.trace_csv, trace, cfg.record_timing);
    finish(x.values());
  };

  if (cfg.algorithm == "chirp") {
    baseline(gen_chirp(n));
  } else if (cfg.algorithm == "polyphase") {
    baseline(gen_random_polyphase(n, cfg.seed));
  } else if (cfg.algorithm == "filtered-polyphase") {
    baseline(gen_filtered_polyphase(n, cfg.seed, mask, cfg.filter_taps));
  } else if (cfg.algorithm == "alamm") {
    const AlammResult res = alamm_solve(gen_random_polyphase(n, cfg.seed), zone, mask, cfg.design);
    summary.iterations = res.trace.rows.empty() ? 0 : res.trace.rows.back().iter;
    summary.status = res.converged ? "converged" : "max_iters";
    write_sequence_csv(summary.sequence_csv, res.x.values());
    write_alamm_trace_csv(summary.trace_csv, res.trace, cfg.record_timing);
    finish(res.x.values());
  } else if (cfg.algorithm == "am") {
    if (n > AdmmConicBackend::kMaxDim)
      throw ConfigError("algorithm 'am' requires N <= " + std::to_string(AdmmConicBackend::kMaxDim));
    const Sequence init = gen_random_polyphase(n, cfg.seed);
    const AmResult res = am_solve(init, zone, mask, cfg.design);
    summary.iterations = res.state.t;
    summary.status = to_string(res.status);
    write_am_trace_csv(summary.trace_csv, res.trace, cfg.record_timing);
    if (!res.x) {
      summary.sequence_csv.clear();
      finish(init.values());
      std::ostringstream os;
      os << "am: " << to_string(res.status) << " (sigma1/sigma0 = " << res.sigma_ratio << ", gap = " << res.state.gap
         << ")";
      if (res.status == AmStatus::rank_one_failure) throw RankOneFailure(os.str());
      throw NumericalError(os.str());
    }
    write_sequence_csv(summary.sequence_csv, res.x->values());
    finish(res.x->values());
  }
  return summary;
}

FeasibilityReport cmd_analyze(const fs::path& seq_path, const RunConfig& cfg, const fs::path& out_dir,
                              bool renormalize) {
  const Sequence x = load_sequence(seq_path, cfg.n, renormalize);
  const ZoneOfOperation zone = cfg.make_zone();
  const SpectralMask mask = cfg.make_mask();
  fs::create_directories(out_dir);
  write_af_grid_csv(out_dir / "af_grid.csv", af_grid(x, zone), cfg.n);
  write_esd_csv(out_dir / "esd.csv", x.values(), mask);
  const FeasibilityReport rep = feasibility_report(x, zone, mask, cfg.design.papr_bound);
  json j = to_json(rep);
  j["sequence"] = seq_path.filename().string();
  j["wpsl_db"] = db_or_null(rep.wpsl_db);
  j["u_max"] = mask.empty() ? json(nullptr) : json(mask.u_max());
  write_json(out_dir / "feasibility.json", j);
  return rep;
}

void cmd_compare(const std::vector<fs::path>& seq_paths, const RunConfig& cfg, const fs::path& out_dir) {
  if (seq_paths.empty()) throw InvalidInput("compare: no sequences given");
  const ZoneOfOperation zone = cfg.make_zone();
  const SpectralMask mask = cfg.make_mask();
  std::ostringstream os;
  os << "sequence,wpsl_db,papr,max_stopband_esd_db\n";
  for (const auto& path : seq_paths) {
    const Sequence x = load_sequence(path, cfg.n, false);
    const double w = wpsl(x, zone);
    const double esd_db = mask.empty() ? NAN : 10.0 * std::log10(max_stopband_esd(x.values(), mask) / cfg.n);
    os << path.string() << ',' << format_double(wpsl_db(w, cfg.n)) << ',' << format_double(papr(x)) << ','
       << format_double(esd_db) << '\n';
  }
  fs::create_directories(out_dir);
  write_text(out_dir / "compare.csv", os.str());
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design and analyze sequences with a shaped local ambiguity function", "dseq"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seq_path;
  std::vector<std::string> seq_paths;
  bool renormalize = false;

  auto* design = app.add_subcommand("design", "Run an optimizer or baseline generator");
  design->add_option("--config", config_path, "Run configuration (JSON)")->required();
  design->add_option("--out", out_dir, "Output directory (default: output_dir from the config)");

  auto* analyze = app.add_subcommand("analyze", "Export AF grid, ESD and feasibility of a sequence");
  analyze->add_option("--seq", seq_path, "Sequence CSV")->required();
  analyze->add_option("--config", config_path, "Run configuration (JSON)")->required();
  analyze->add_option("--out", out_dir, "Output directory");
  analyze->add_flag("--renormalize", renormalize, "Rescale the sequence to energy N before analysis");

  auto* compare = app.add_subcommand("compare", "Tabulate WPSL, PAPR and stopband ESD for several sequences");
  compare->add_option("--seqs", seq_paths, "Sequence CSVs")->required()->expected(1, -1);
  compare->add_option("--config", config_path, "Run configuration (JSON)")->required();
  compare->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    apply_thread_limit_from_env();
    const RunConfig cfg = load_run_config(config_path);
    const fs::path dir = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
    if (*design) {
      const RunSummary s = cmd_design(cfg, dir);
      out << cfg.algorithm << ": wpsl " << format_double(s.wpsl_db) << " dB, papr " << format_double(s.papr)
          << ", " << s.iterations << " iterations, " << s.status << "\n";
    } else if (*analyze) {
      const FeasibilityReport rep = cmd_analyze(seq_path, cfg, dir, renormalize);
      out << "wpsl " << format_double(rep.wpsl_db) << " dB, papr " << format_double(rep.papr_value) << ", "
          << rep.stopband_violations.size() << " stopband violations\n";
    } else if (*compare) {
      std::vector<fs::path> paths(seq_paths.begin(), seq_paths.end());
      cmd_compare(paths, cfg, dir);
      out << "wrote " << (dir / "compare.csv").string() << "\n";
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const RankOneFailure& e) {
    err << "rank-one failure: " << e.what() << "\n";
    return kRankOneFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const BracketError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const OutOfRange& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

}  // namespace dseq::cli
