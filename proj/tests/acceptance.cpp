// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dseq/alamm.hpp"
#include "dseq/am_sdr.hpp"
#include "dseq/ambiguity.hpp"
#include "dseq/cli.hpp"
#include "dseq/io.hpp"
#include "oracles.hpp"

using namespace dseq;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

CMatrix lifted_lambda(const ZoneOfOperation& zone, const Eigen::MatrixXd& a, int n, int l) {
  CMatrix big = CMatrix::Zero(n * n, n * n);
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k) {
    if (!zone.contains(k, l)) continue;
    const CVector v = oracle::vec(oracle::U(n, k, zone.doppler()[l]));
    big += zone.weight(k) * a(k + zone.max_delay(), l) * v * v.adjoint();
  }
  return big;
}

// 1. AF and ESD against dense products.
void oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> len(2, 16);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    const CVector x = oracle::random_energy_n(n, rng);
    const int r = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const double step = 0.01 + 0.2 * unit(rng);
    const int count = 1 + trial % 5;
    std::vector<double> dop;
    for (int l = 0; l < count; ++l) dop.push_back(-step * (count / 2) + step * l + (r == 0 ? 0.013 : 0.0));
    const ZoneOfOperation zone(r, dop);
    const AFGrid grid = af_grid(x, zone);
    for (int k = -r; k <= r; ++k)
      for (int l = 0; l < count; ++l) {
        const cdouble ref = x.dot(oracle::U(n, k, dop[l]) * x);
        worst = std::max(worst, std::abs(af_value(x, k, dop[l]) - ref));
        worst = std::max(worst, std::abs(grid.at(k, l) - ref));
      }
    for (int s = 0; s < 5; ++s) {
      const double f = unit(rng);
      const double ref = x.dot(oracle::F(n, f) * x).real();
      worst = std::max(worst, std::abs(esd(x, f) - ref));
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst <= 1e-10 && secs < 10.0, fmt("max abs error %.3e (tol 1e-10), %.2f s", worst, secs));
}

// 2. PAPR projection.
void projection() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> len(4, 64);
  std::bernoulli_distribution zero(0.25);
  double energy_err = 0.0, peak_excess = 0.0, beta_err = 0.0;
  int beta_cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    CVector v = oracle::random_vector(n, rng);
    for (int i = 0; i < n; ++i)
      if (zero(rng)) v(i) = 0.0;
    if (v.squaredNorm() == 0.0) v(0) = 1.0;
    int m = 0;
    for (int i = 0; i < n; ++i) m += v(i) != 0.0;
    for (double gamma : {1.0, 1.5, 3.0}) {
      const Sequence x = project_papr(v, gamma, n);
      const RVector mag2 = x.values().cwiseAbs2();
      energy_err = std::max(energy_err, std::abs(mag2.sum() - n) / n);
      peak_excess = std::max(peak_excess, mag2.maxCoeff() / gamma - 1.0);
      if (n - m * gamma >= 0.0) continue;
      // Scaled branch: |x_n| = min(beta |v_n|, sqrt(gamma)); recover beta
      // from an unclipped entry and check the energy equation.
      double beta = -1.0;
      for (int i = 0; i < n; ++i)
        if (v(i) != 0.0 && mag2(i) < gamma * (1 - 1e-6)) beta = std::sqrt(mag2(i)) / std::abs(v(i));
      if (beta < 0.0) continue;
      ++beta_cases;
      double lhs = 0.0;
      for (int i = 0; i < n; ++i) lhs += std::min(beta * beta * std::norm(v(i)), gamma);
      beta_err = std::max(beta_err, std::abs(lhs - n) / n);
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = energy_err <= 1e-9 && peak_excess <= 1e-9 && beta_err <= 1e-8 && beta_cases > 0 && secs < 5.0;
  report(2, ok,
         fmt("energy rel err %.2e (1e-9), peak excess %.2e (1e-9), scaled-branch energy err %.2e (1e-8)",
             energy_err, peak_excess, beta_err) +
             " over " + std::to_string(beta_cases) + " scaled cases, " + fmt("%.2f s", secs));
}

// 3. Closed-form eigenvalue bounds.
void eigen_bounds() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  const int n = 8;
  const ZoneOfOperation zone(2, {-0.1, -0.03, 0.04, 0.11}, {0.5, 1.0, 2.0, 1.0, 0.3});
  MajorizerCoefficients c;
  c.a = Eigen::MatrixXd(5, 4);
  for (int i = 0; i < 5; ++i)
    for (int l = 0; l < 4; ++l) c.a(i, l) = u(rng);
  double lambda_err = 0.0;
  for (int l = 0; l < 4; ++l)
    lambda_err = std::max(lambda_err, std::abs(lambda_max_Lambda(c, zone, n, l) -
                                               oracle::max_eig(lifted_lambda(zone, c.a, n, l))));

  CMatrix lifted_l = CMatrix::Zero(n * n, n * n);
  for (int s : {1, 2, 5}) {
    const CVector v = oracle::vec(oracle::F(n, static_cast<double>(s) / n));
    lifted_l += v * v.adjoint();
  }
  const double l_err = std::abs(oracle::max_eig(lifted_l) - lambda_max_L(n));

  const ZoneOfOperation z2(2, {-0.05, 0.0, 0.05});
  const SpectralMask mask(n, {0.12, 0.2, 0.31}, 10.0);
  const AlammModel model(z2, mask, n);
  double mu_excess = -INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    const CVector x = oracle::random_energy_n(n, rng);
    RVector lambda(3);
    for (int s = 0; s < 3; ++s) lambda(s) = u(rng);
    const int p = trial % 2 ? 22 : 4;
    const auto coef = model.coefficients(x, lambda, 1.0, p, model.weighted_lp_norm(x, p));
    const double mu = model.mu(coef, lambda, 1.0);
    const double top = oracle::max_eig(model.phi_dense(x, coef, lambda, 1.0).matrix());
    mu_excess = std::max(mu_excess, top - mu);
  }
  const double secs = seconds_since(t0);
  const bool ok = lambda_err <= 1e-8 && l_err <= 1e-8 && mu_excess <= 1e-8 && secs < 30.0;
  report(3, ok,
         fmt("Lambda_l err %.2e, L err %.2e (tol 1e-8), max(lambda_max(Phi) - mu) %.3e (<= 1e-8), %.2f s",
             lambda_err, l_err, mu_excess, secs));
}

// 4. Logged merit never increases.
void monotone_descent() {
  const auto t0 = Clock::now();
  const int n = 32;
  const ZoneOfOperation zone = ZoneOfOperation::from_bins(3, -4.0, 4.0, 9, n);
  DesignConfig cfg;
  cfg.p = 8;
  cfg.inner_max = 20;
  cfg.outer_max = 10;
  // Tolerances small enough that only the iteration caps end the run.
  cfg.inner_tol = 1e-300;
  cfg.outer_tol = 1e-300;
  cfg.stopband_tol = 1e-300;
  int rows = 0, bad = 0, min_run = 1 << 30;
  double worst = -INFINITY;
  for (bool with_mask : {false, true}) {
    const SpectralMask mask =
        with_mask ? SpectralMask::from_bands(n, {{0.1, 0.2}}, 10, 10.0) : SpectralMask::none(n);
    const AlammResult r = alamm_solve(gen_random_polyphase(n, 44), zone, mask, cfg);
    int steps = 0;
    for (const auto& row : r.trace.rows) {
      if (row.iter == 0) continue;
      ++steps;
      ++rows;
      const double rise = (row.merit - row.merit_before) / std::max(1.0, std::abs(row.merit_before));
      worst = std::max(worst, rise);
      if (row.merit > row.merit_before) ++bad;
    }
    min_run = std::min(min_run, steps);

    // Fixed multipliers over 200 consecutive steps.
    const AlammModel model(zone, mask, n);
    ALState st{gen_random_polyphase(n, 45), RVector::Constant(mask.size(), 0.5), 1.0, 0, 0, false, {}};
    st.objective_norm = model.weighted_lp_norm(st.x.values(), cfg.p);
    double prev = model.merit(st.x.values(), st.lambda, cfg.rho, cfg.p, st.objective_norm);
    for (int i = 0; i < 200; ++i) {
      st = squarem_step(st, model, cfg.rho, cfg.p, cfg.papr_bound);
      const double w = model.merit(st.x.values(), st.lambda, cfg.rho, cfg.p, st.objective_norm);
      ++rows;
      if (w > prev) ++bad;
      worst = std::max(worst, (w - prev) / std::max(1.0, std::abs(prev)));
      prev = w;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = bad == 0 && min_run >= 200 && secs < 60.0;
  report(4, ok,
         "increases " + std::to_string(bad) + " of " + std::to_string(rows) + " logged steps, solver runs of " +
             std::to_string(min_run) + "+ iterations" + fmt(", worst relative change %.3e, %.2f s", worst, secs));
}

// 5. The N = 128 experiment.
void reproduction() {
  const auto t0 = Clock::now();
  const int n = 128;
  const ZoneOfOperation zone = ZoneOfOperation::from_bins(5, -2.0, 2.0, 41, n);
  const SpectralMask mask = SpectralMask::from_bands(n, {{0.1, 0.2}}, 50, 20.0);
  DesignConfig cfg;
  cfg.p = 22;
  cfg.papr_bound = 1.0;
  const Sequence x0 = gen_random_polyphase(n, 1);
  const double chirp_db = wpsl_db(wpsl(gen_chirp(n), zone), n);
  const AlammResult r1 = alamm_solve(x0, zone, mask, cfg);
  cfg.papr_bound = 3.0;
  const AlammResult r3 = alamm_solve(x0, zone, mask, cfg);
  const double db1 = wpsl_db(wpsl(r1.x, zone), n);
  const double db3 = wpsl_db(wpsl(r3.x, zone), n);
  const FeasibilityReport f1 = feasibility_report(r1.x, zone, mask, 1.0);
  const double secs = seconds_since(t0);
  const bool a = db1 <= chirp_db - 10.0;
  const bool b = f1.max_stopband_esd <= mask.u_max() * 1.05;
  const bool c = db3 <= db1 + 1e-9;
  report(5, a && b && c && secs <= 1800.0,
         std::string("(a) ") + (a ? "ok" : "NO") +
             fmt(" WPSL %.3f dB vs chirp %.3f dB, need <= chirp - 10", db1, chirp_db) + "; (b) " +
             (b ? "ok" : "NO") +
             fmt(" max stopband ESD %.4f vs 1.05 U_max %.4f", f1.max_stopband_esd, 1.05 * mask.u_max()) +
             "; (c) " + (c ? "ok" : "NO") + fmt(" gamma=3 WPSL %.3f dB vs gamma=1 %.3f dB", db3, db1) +
             fmt("; %.1f s", secs));

  // Same setup on integer Doppler bins (L = 5), reported for reference.
  const auto t1 = Clock::now();
  const ZoneOfOperation bins = ZoneOfOperation::from_bins(5, -2.0, 2.0, 5, n);
  cfg.papr_bound = 1.0;
  const AlammResult rb = alamm_solve(x0, bins, mask, cfg);
  const FeasibilityReport fb = feasibility_report(rb.x, bins, mask, 1.0);
  std::printf("info: L=5 integer-bin zone: ALaMM WPSL %.3f dB vs chirp %.3f dB, max stopband ESD %.4f, %.1f s\n",
              fb.wpsl_db, wpsl_db(wpsl(gen_chirp(n), bins), n), fb.max_stopband_esd, seconds_since(t1));
}

// 6 and 7. AM at N = 8 and its cost relative to ALaMM.
void am_and_cost() {
  const int n = 8;
  const ZoneOfOperation zone = ZoneOfOperation::from_bins(2, -2.0, 2.0, 5, n);
  const SpectralMask none = SpectralMask::none(n);
  DesignConfig cfg;
  const Sequence x0 = gen_random_polyphase(n, 5);

  // Wall time of each solver is the fastest of several identical runs.
  const auto best_secs = [](const std::function<void()>& f) {
    double best = INFINITY;
    for (int i = 0; i < 7; ++i) {
      const auto t0 = Clock::now();
      f();
      best = std::min(best, seconds_since(t0));
    }
    return best;
  };

  std::optional<AmResult> am_run;
  const double am_secs = best_secs([&] { am_run = am_solve(x0, zone, none, cfg); });
  const AmResult& am = *am_run;
  bool ok = am.x.has_value() && am.status == AmStatus::converged && am.sigma_ratio <= cfg.tol_r &&
            am.state.gap <= cfg.tol_x;
  double w_am = NAN, w0 = wpsl(x0, zone), energy_err = NAN, peak = NAN;
  if (am.x) {
    w_am = wpsl(*am.x, zone);
    energy_err = std::abs(am.x->energy() - n);
    peak = am.x->values().cwiseAbs2().maxCoeff();
    ok = ok && w_am <= w0 * (1 + 1e-12) && energy_err <= 1e-4 && peak <= cfg.papr_bound + 1e-4;
  }
  ok = ok && am_secs <= 600.0;
  report(6, ok,
         "status " + to_string(am.status) + ", sweeps " + std::to_string(am.state.t) +
             fmt(", gap %.2e (1e-3), sigma ratio %.2e (1e-2), WPSL %.4f vs init %.4f", am.state.gap, am.sigma_ratio,
                 w_am, w0) +
             fmt(", energy err %.1e, peak %.6f, %.3f s", energy_err, peak, am_secs));

  std::optional<AlammResult> al_run;
  const double al_secs = best_secs([&] { al_run = alamm_solve(x0, zone, none, cfg); });
  const AlammResult& al = *al_run;
  report(7, al_secs * 10.0 <= am_secs,
         fmt("ALaMM %.4f s (WPSL %.4f), AM %.4f s, ratio %.1fx (need >= 10x)", al_secs, wpsl(al.x, zone), am_secs,
             am_secs / al_secs));
}

// 8. Byte-identical outputs across repeated runs.
void determinism() {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "dseq_acceptance_determinism";
  fs::remove_all(root);
  int compared = 0, differing = 0;
  const auto same = [&](const fs::path& a, const fs::path& b) {
    ++compared;
    if (read_text(a) != read_text(b)) {
      ++differing;
      std::printf("  differs: %s\n", a.filename().string().c_str());
    }
  };
  for (const std::string alg : {"alamm", "am", "chirp", "polyphase", "filtered-polyphase"}) {
    const int n = alg == "am" ? 6 : 32;
    const std::string text = R"({"schema_version": 1, "N": )" + std::to_string(n) + R"(, "algorithm": ")" + alg +
                             R"(", "seed": 11, "record_timing": false,
      "zone": {"max_delay": 2, "doppler": {"unit": "bins", "min": -1, "max": 1, "count": 3}},
      "mask": {"stopband": [[0.1, 0.2]], "attenuation_db": 10, "bins": 10},
      "design": {"filter_taps": 15, "t_max": 3}})";
    const RunConfig cfg = parse_run_config(text, alg);
    std::vector<fs::path> seqs;
    for (const char* run : {"a", "b"}) {
      const fs::path dir = root / alg / run;
      try {
        cli::cmd_design(cfg, dir);
      } catch (const cli::RankOneFailure&) {
        // Trace and summary are written either way.
      }
      if (fs::exists(dir / "sequence.csv")) {
        cli::cmd_analyze(dir / "sequence.csv", cfg, dir / "analyze");
        seqs.push_back(dir / "sequence.csv");
      }
    }
    for (const char* f : {"sequence.csv", "trace.csv", "summary.json"})
      if (fs::exists(root / alg / "a" / f) || fs::exists(root / alg / "b" / f)) same(root / alg / "a" / f, root / alg / "b" / f);
    for (const char* f : {"af_grid.csv", "esd.csv", "feasibility.json"})
      if (fs::exists(root / alg / "a" / "analyze" / f))
        same(root / alg / "a" / "analyze" / f, root / alg / "b" / "analyze" / f);
    if (!seqs.empty()) {
      cli::cmd_compare(seqs, cfg, root / alg / "cmp_a");
      cli::cmd_compare(seqs, cfg, root / alg / "cmp_b");
      same(root / alg / "cmp_a" / "compare.csv", root / alg / "cmp_b" / "compare.csv");
    }
  }
  fs::remove_all(root);
  report(8, differing == 0 && compared > 0,
         std::to_string(differing) + " of " + std::to_string(compared) + " output files differ" +
             fmt(", %.1f s", seconds_since(t0)));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {oracle_equivalence, projection, eigen_bounds,
                                                       monotone_descent,   reproduction, am_and_cost,
                                                       determinism};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("criterion error: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
