#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dseq/ambiguity.hpp"
#include "dseq/cli.hpp"
#include "dseq/io.hpp"
#include "oracles.hpp"

using namespace dseq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dseq_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string small_config(const std::string& algorithm, const std::string& extra_design = "") {
  return R"({
  "schema_version": 1,
  "N": 16,
  "algorithm": ")" + algorithm + R"(",
  "seed": 7,
  "record_timing": false,
  "zone": {"max_delay": 2, "doppler": {"unit": "bins", "min": -1, "max": 1, "count": 3}},
  "mask": {"stopband": [[0.2, 0.3]], "attenuation_db": 3, "bins": 8},
  "design": {"outer_max": 10, "inner_max": 20)" + extra_design + R"(}
})";
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "dseq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config errors name the location") {
  const std::string good = small_config("alamm");
  CHECK(parse_run_config(good).n == 16);

  try {
    parse_run_config("{\n  \"N\": 16,\n  oops\n}", "bad.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("bad.json:3:", 0) == 0);
  }

  std::string unknown = good;
  unknown.replace(unknown.find("\"outer_max\""), 11, "\"outer_maxx\"");
  try {
    parse_run_config(unknown, "u.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("design.outer_maxx") != std::string::npos);
  }

  std::string wrong_type = good;
  wrong_type.replace(wrong_type.find("\"N\": 16"), 7, "\"N\": \"x\"");
  CHECK_THROWS_AS(parse_run_config(wrong_type), ConfigError);

  std::string bad_delay = good;
  bad_delay.replace(bad_delay.find("\"max_delay\": 2"), 14, "\"max_delay\": 16");
  CHECK_THROWS_AS(parse_run_config(bad_delay), ConfigError);

  std::string bad_gamma = small_config("alamm", ", \"papr_bound\": 0.5");
  CHECK_THROWS_AS(parse_run_config(bad_gamma), ConfigError);
}

TEST_CASE("sequence CSV round trip is exact") {
  std::mt19937_64 rng(1);
  const CVector x = oracle::random_energy_n(9, rng);
  const fs::path dir = scratch("csv");
  write_sequence_csv(dir / "s.csv", x);
  CHECK(read_sequence_csv(dir / "s.csv") == x);
  write_text(dir / "bad.csv", "n,re,im\n0,1.0\n");
  CHECK_THROWS_AS(read_sequence_csv(dir / "bad.csv"), InvalidInput);
}

TEST_CASE("design then analyze reproduces the summary") {
  const fs::path dir = scratch("roundtrip");
  const RunConfig cfg = parse_run_config(small_config("alamm"));
  const cli::RunSummary s = cli::cmd_design(cfg, dir / "run");
  REQUIRE(fs::exists(dir / "run" / "sequence.csv"));
  REQUIRE(fs::exists(dir / "run" / "trace.csv"));
  REQUIRE(fs::exists(dir / "run" / "summary.json"));
  const FeasibilityReport r = cli::cmd_analyze(dir / "run" / "sequence.csv", cfg, dir / "an");
  CHECK(std::abs(r.wpsl - s.wpsl) <= 1e-9 * s.wpsl);
  CHECK(r.papr_value == doctest::Approx(s.papr).epsilon(1e-12));
  CHECK(fs::exists(dir / "an" / "af_grid.csv"));
  CHECK(fs::exists(dir / "an" / "esd.csv"));
  const auto j = nlohmann::json::parse(read_text(dir / "an" / "feasibility.json"));
  CHECK(j.at("wpsl").get<double>() == r.wpsl);

  // Independent recomputation from the saved values.
  const CVector x = read_sequence_csv(dir / "run" / "sequence.csv");
  double worst = 0.0;
  const ZoneOfOperation zone = cfg.make_zone();
  for (int k = -2; k <= 2; ++k)
    for (int l = 0; l < zone.doppler_count(); ++l)
      if (zone.contains(k, l)) worst = std::max(worst, std::abs(oracle::af(x, k, zone.doppler()[l])));
  CHECK(worst == doctest::Approx(s.wpsl).epsilon(1e-10));
}

TEST_CASE("fixed seed runs are byte identical") {
  const fs::path dir = scratch("determinism");
  const RunConfig cfg = parse_run_config(small_config("alamm"));
  cli::cmd_design(cfg, dir / "a");
  cli::cmd_design(cfg, dir / "b");
  for (const char* f : {"sequence.csv", "trace.csv", "summary.json"})
    CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
}

TEST_CASE("baselines") {
  const fs::path dir = scratch("baselines");
  const cli::RunSummary chirp = cli::cmd_design(parse_run_config(small_config("chirp")), dir / "chirp");
  CHECK(chirp.papr == doctest::Approx(1.0).epsilon(1e-12));
  const cli::RunSummary poly = cli::cmd_design(parse_run_config(small_config("polyphase")), dir / "poly");
  CHECK(poly.papr == doctest::Approx(1.0).epsilon(1e-12));

  // Comparing a sequence with itself gives identical rows.
  const RunConfig cfg = parse_run_config(small_config("chirp"));
  cli::cmd_compare({dir / "chirp" / "sequence.csv", dir / "chirp" / "sequence.csv"}, cfg, dir / "cmp");
  std::istringstream in(read_text(dir / "cmp" / "compare.csv"));
  std::string header, a, b;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  CHECK(header == "sequence,wpsl_db,papr,max_stopband_esd_db");
  CHECK(a.substr(a.find(',')) == b.substr(b.find(',')));
}

TEST_CASE("impulse ESD is flat") {
  const fs::path dir = scratch("impulse");
  CVector x = CVector::Zero(16);
  x(0) = 4.0;
  write_sequence_csv(dir / "imp.csv", x);
  const RunConfig cfg = parse_run_config(small_config("chirp"));
  const FeasibilityReport r = cli::cmd_analyze(dir / "imp.csv", cfg, dir / "an");
  CHECK(r.max_stopband_esd == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(r.papr_value == doctest::Approx(16.0));
  CHECK_FALSE(r.papr_ok());
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  write_text(dir / "good.json", small_config("chirp"));
  write_text(dir / "bad.json", "{ \"N\": ");
  std::string out, err;
  CHECK(run_cli({"design", "--config", (dir / "good.json").string(), "--out", (dir / "o").string()}) == cli::kOk);
  CHECK(run_cli({}, &out, &err) == cli::kUsage);
  CHECK(run_cli({"frobnicate"}, &out, &err) == cli::kUsage);
  CHECK(run_cli({"design", "--config", (dir / "bad.json").string()}, &out, &err) == cli::kConfigError);
  CHECK(err.find("bad.json") != std::string::npos);
  CHECK(run_cli({"analyze", "--seq", (dir / "missing.csv").string(), "--config", (dir / "good.json").string(),
                 "--out", (dir / "a").string()},
                &out, &err) == cli::kUsage);

  // A rank-two start that the AM extraction rejects: one sweep with a tiny
  // ratio tolerance.
  write_text(dir / "am.json", R"({"schema_version": 1, "N": 4, "algorithm": "am", "seed": 3,
    "record_timing": false,
    "zone": {"max_delay": 1, "doppler": {"unit": "bins", "min": -0.5, "max": 0.5, "count": 3}},
    "design": {"t_max": 1, "tol_r": 1e-12, "papr_bound": 1.0}})");
  const int am_code = run_cli({"design", "--config", (dir / "am.json").string(), "--out", (dir / "am").string()},
                              &out, &err);
  CHECK((am_code == cli::kRankOneFailure || am_code == cli::kOk));
  if (am_code == cli::kRankOneFailure) CHECK(fs::exists(dir / "am" / "trace.csv"));
}

}  // TEST_SUITE
