#pragma once

#include <utility>
#include <vector>

#include "dseq/ambiguity.hpp"
#include "dseq/kernels.hpp"
#include "dseq/trace.hpp"
#include "dseq/waveform.hpp"

namespace dseq {

/// Coefficients of the quadratic majorizer of t^p on [0, z] that touches at
/// t0: a t^2 + b t + const. Computed in ratio form, so z^p is never formed
/// and z = t0 needs no special casing (a tends to p(p-1) z^(p-2) / 2).
std::pair<double, double> quadratic_majorizer(double t0, double z, int p);

/// Per-bin majorizer data at one iterate.
///
/// The sidelobe objective being majorized is sum_{Gamma} w_k |A_{k,l} / c|^p,
/// with c = objective_norm (1 gives the plain l_p^p sum). a and b multiply
/// |A|^2 and |A| in unscaled units; z is in the same units as |A|. Entries
/// outside the zone (the origin) are zero.
struct MajorizerCoefficients {
  CMatrix A;            // (2r+1) x L, x^H U_{k,l} x
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  RVector stopband_energy;  // x^H F_s x
  double z = 0.0;
  double objective_norm = 1.0;
};

/// Precomputed phasor tables for one (zone, mask, N) triple. All ALaMM
/// quantities are evaluated through this object; it is immutable after
/// construction and safe to share between threads.
class AlammModel {
 public:
  AlammModel(const ZoneOfOperation& zone, const SpectralMask& mask, int n);

  int n() const { return n_; }
  const ZoneOfOperation& zone() const { return zone_; }
  const SpectralMask& mask() const { return mask_; }

  CMatrix ambiguity(const CVector& x) const;
  RVector stopband_energy(const CVector& x) const;

  MajorizerCoefficients coefficients(const CVector& x, const RVector& lambda, double rho, int p,
                                     double objective_norm = 1.0) const;

  /// max_k { w_k a_{k,l} (N - |k|) } over the zone at Doppler index l.
  double lambda_max_Lambda(const MajorizerCoefficients& c, int l) const;

  /// Phi(x) as an explicit dense matrix; O(N^2 |Gamma|), meant for checks.
  HermitianMatrix phi_dense(const CVector& x, const MajorizerCoefficients& c,
                            const RVector& lambda, double rho) const;

  /// Phi(x) x without forming Phi.
  CVector phi_times_x(const CVector& x, const MajorizerCoefficients& c, const RVector& lambda,
                      double rho) const;

  double mu(const MajorizerCoefficients& c, const RVector& lambda, double rho) const;

  /// v = (mu I - Phi(x)) x, the vector fed to the PAPR projection.
  CVector mm_vector(const CVector& x, const RVector& lambda, double rho, int p,
                    double objective_norm) const;

  /// W(x) = sum w |A/c|^p + sum lambda_s e_s + rho/2 sum e_s^2 - rho U_max sum e_s.
  double merit(const CVector& x, const RVector& lambda, double rho, int p,
               double objective_norm) const;

  /// (sum_{Gamma} w_k |A_{k,l}|^p)^(1/p), computed without overflow.
  double weighted_lp_norm(const CVector& x, int p) const;

 private:
  ZoneOfOperation zone_;
  SpectralMask mask_;
  int n_;
  CMatrix phasors_;  // L x N
  CMatrix dtft_;     // N_f x N
};

/// Free-function forms used by tests and callers that do not keep a model.
MajorizerCoefficients compute_coefficients(const CVector& x, const ZoneOfOperation& zone,
                                           const SpectralMask& mask, const RVector& lambda,
                                           double rho, int p, double objective_norm = 1.0);
double lambda_max_Lambda(const MajorizerCoefficients& c, const ZoneOfOperation& zone, int n, int l);
double lambda_max_L(int n);
HermitianMatrix build_phi(const CVector& x, const MajorizerCoefficients& c,
                          const ZoneOfOperation& zone, const SpectralMask& mask,
                          const RVector& lambda, double rho);
double compute_mu(const MajorizerCoefficients& c, const ZoneOfOperation& zone,
                  const SpectralMask& mask, const RVector& lambda, double rho, int n);

/// Nearest point (in the Re<x, v> sense) with energy N and |x_n|^2 <= gamma.
/// Throws InvalidInput for v = 0 or non-finite v.
Sequence project_papr(const CVector& v, double gamma, int n);

struct ALState {
  Sequence x;
  RVector lambda;              // one multiplier per stopband bin, >= 0
  double objective_norm = 1.0; // c, fixed within an outer iteration
  int iteration = 0;
  int outer = 0;
  bool stalled = false;        // last step could not decrease W
  AlammTrace trace;
};

/// One accelerated MM step with merit backtracking. W never increases.
ALState squarem_step(const ALState& state, const AlammModel& model, double rho, int p,
                     double gamma);

/// lambda_s <- max(0, lambda_s + rho (x^H F_s x - U_max)).
ALState update_multipliers(const ALState& state, const AlammModel& model, double rho);

struct AlammResult {
  Sequence x;
  AlammTrace trace;
  int outer_iterations = 0;
  bool converged = false;
};

/// Requires x_init to satisfy the energy and PAPR constraints. Returns the
/// lowest-WPSL outer iterate whose stopband ESD stays within
/// (1 + feasibility_slack) U_max, or the final iterate if none does.
AlammResult alamm_solve(const Sequence& x_init, const ZoneOfOperation& zone,
                        const SpectralMask& mask, const DesignConfig& config);

}  // namespace dseq
