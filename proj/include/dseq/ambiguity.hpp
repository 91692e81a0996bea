#pragma once

#include <vector>

#include "dseq/kernels.hpp"
#include "dseq/waveform.hpp"

namespace dseq {

/// x^H U_{k,f} x for one delay/Doppler pair, U_{k,f} = J_k Diag(p(f)).
/// Doppler f is in cycles per sample. Throws OutOfRange for |k| >= N.
cdouble af_value(const CVector& x, int k, double f);
inline cdouble af_value(const Sequence& x, int k, double f) { return af_value(x.values(), k, f); }

/// AF samples over a zone: values(k + r, l) for k = -r..r and every Doppler
/// bin, plus the mainlobe x^H x at (0, 0).
struct AFGrid {
  ZoneOfOperation zone;
  CMatrix values;
  cdouble mainlobe;

  cdouble at(int k, int l) const { return values(k + zone.max_delay(), l); }
};

AFGrid af_grid(const CVector& x, const ZoneOfOperation& zone,
               kernels::Exec exec = kernels::Exec::parallel);
inline AFGrid af_grid(const Sequence& x, const ZoneOfOperation& zone,
                      kernels::Exec exec = kernels::Exec::parallel) {
  return af_grid(x.values(), zone, exec);
}

/// max over the zone (origin excluded) of w_k |A_{k,l}|.
double wpsl(const CVector& x, const ZoneOfOperation& zone);
inline double wpsl(const Sequence& x, const ZoneOfOperation& zone) { return wpsl(x.values(), zone); }
double wpsl(const AFGrid& grid);

/// 20 log10(wpsl / N).
double wpsl_db(double wpsl_value, int n);

/// |sum_n x_{n+1} exp(-j 2 pi f n)|^2.
double esd(const CVector& x, double f);
inline double esd(const Sequence& x, double f) { return esd(x.values(), f); }

/// ESD at many frequencies at once.
RVector esd(const CVector& x, const std::vector<double>& freqs);

/// N * 10^(-A/10).
double u_max(int n, double attenuation_db);

struct StopbandViolation {
  double frequency;
  double esd;
  double u_max;
};

struct FeasibilityReport {
  double energy_error = 0.0;  // |x^H x - N|
  double papr_value = 0.0;
  double papr_bound = 0.0;
  double max_stopband_esd = 0.0;  // 0 when the mask is empty
  std::vector<StopbandViolation> stopband_violations;
  double wpsl = 0.0;
  double wpsl_db = 0.0;

  bool papr_ok(double rel_tol = 1e-9) const { return papr_value <= papr_bound * (1.0 + rel_tol); }
};

/// A stopband bin counts as violated only when its ESD exceeds U_max by more
/// than a 1e-12 relative rounding allowance.
FeasibilityReport feasibility_report(const CVector& x, const ZoneOfOperation& zone,
                                     const SpectralMask& mask, double papr_bound);
inline FeasibilityReport feasibility_report(const Sequence& x, const ZoneOfOperation& zone,
                                            const SpectralMask& mask, double papr_bound) {
  return feasibility_report(x.values(), zone, mask, papr_bound);
}

}  // namespace dseq
