#include "dseq/ambiguity.hpp"

#include <cmath>
#include <numbers>

#include "dseq/error.hpp"

namespace dseq {

cdouble af_value(const CVector& x, int k, double f) {
  const auto n = static_cast<int>(x.size());
  if (k <= -n || k >= n) throw OutOfRange("af_value: |k| must be below N");
  // Sum over m (0-indexed) with n - m = k in J_k: conj(x_{m+k}) x_m p_m.
  cdouble acc = 0.0;
  for (int m = std::max(0, -k); m < std::min(n, n - k); ++m) {
    double cycles = f * (m + 1.0);
    cycles -= std::round(cycles);
    acc += std::conj(x(m + k)) * x(m) * std::polar(1.0, 2.0 * std::numbers::pi * cycles);
  }
  return acc;
}

AFGrid af_grid(const CVector& x, const ZoneOfOperation& zone, kernels::Exec exec) {
  const auto n = static_cast<int>(x.size());
  if (zone.max_delay() >= n) throw OutOfRange("af_grid: zone delay exceeds N - 1");
  const CMatrix phasors = kernels::doppler_phasors(zone.doppler(), n);
  return AFGrid{zone, kernels::ambiguity_block(x, phasors, zone.max_delay(), exec),
                cdouble(x.squaredNorm(), 0.0)};
}

double wpsl(const AFGrid& grid) {
  const auto& zone = grid.zone;
  double worst = 0.0;
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l)
      if (zone.contains(k, l)) worst = std::max(worst, zone.weight(k) * std::abs(grid.at(k, l)));
  return worst;
}

double wpsl(const CVector& x, const ZoneOfOperation& zone) { return wpsl(af_grid(x, zone)); }

double wpsl_db(double wpsl_value, int n) { return 20.0 * std::log10(wpsl_value / n); }

double esd(const CVector& x, double f) {
  cdouble acc = 0.0;
  for (Eigen::Index m = 0; m < x.size(); ++m) {
    double cycles = f * static_cast<double>(m);
    cycles -= std::round(cycles);
    acc += x(m) * std::polar(1.0, -2.0 * std::numbers::pi * cycles);
  }
  return std::norm(acc);
}

RVector esd(const CVector& x, const std::vector<double>& freqs) {
  return kernels::dtft_energy(x, kernels::dtft_rows(freqs, static_cast<int>(x.size())));
}

double u_max(int n, double attenuation_db) {
  if (!(attenuation_db >= 0.0)) throw InvalidInput("u_max: attenuation must be non-negative");
  return n * std::pow(10.0, -0.1 * attenuation_db);
}

FeasibilityReport feasibility_report(const CVector& x, const ZoneOfOperation& zone,
                                     const SpectralMask& mask, double papr_bound) {
  const auto n = static_cast<double>(x.size());
  FeasibilityReport rep;
  rep.energy_error = std::abs(x.squaredNorm() - n);
  rep.papr_value = papr(x);
  rep.papr_bound = papr_bound;
  if (!mask.empty()) {
    const RVector e = esd(x, mask.bins());
    rep.max_stopband_esd = e.maxCoeff();
    for (int s = 0; s < mask.size(); ++s)
      if (e(s) > mask.u_max() * (1.0 + 1e-12))
        rep.stopband_violations.push_back({mask.bins()[s], e(s), mask.u_max()});
  }
  rep.wpsl = wpsl(x, zone);
  rep.wpsl_db = wpsl_db(rep.wpsl, static_cast<int>(x.size()));
  return rep;
}

}  // namespace dseq
