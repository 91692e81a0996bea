#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dseq/numerics.hpp"

namespace dseq {

/// Length-N complex design variable with energy N.
///
/// Storage is 0-indexed; element x_n of the usual 1-indexed notation is
/// values()[n - 1].
class Sequence {
 public:
  static constexpr double kEnergyTol = 1e-9;  // relative

  /// Takes values as-is; throws InvalidInput unless sum |x_n|^2 = N.
  explicit Sequence(CVector values);

  /// Rescales v to energy N. Throws InvalidInput for a zero or non-finite v.
  static Sequence normalized(const CVector& v);

  Eigen::Index size() const { return v_.size(); }
  const CVector& values() const { return v_; }
  cdouble operator[](Eigen::Index i) const { return v_(i); }
  double energy() const { return v_.squaredNorm(); }

 private:
  CVector v_;
};

/// Delay-Doppler region Gamma with per-delay weights. Doppler values are in
/// cycles per sample. The origin (0, 0) is always excluded.
class ZoneOfOperation {
 public:
  /// weights has 2r+1 entries for k = -r..r. Throws InvalidInput on a
  /// non-uniform or non-increasing grid, negative weights, or an empty zone.
  ZoneOfOperation(int max_delay, std::vector<double> doppler,
                  std::vector<double> weights);

  /// Unit weights.
  ZoneOfOperation(int max_delay, std::vector<double> doppler);

  /// Doppler grid given in bins (nu = f * N), L uniformly spaced values on
  /// [nu_lo, nu_hi].
  static ZoneOfOperation from_bins(int max_delay, double nu_lo, double nu_hi,
                                   int count, int n, std::vector<double> weights = {});

  int max_delay() const { return r_; }
  int delay_count() const { return 2 * r_ + 1; }
  int doppler_count() const { return static_cast<int>(doppler_.size()); }
  const std::vector<double>& doppler() const { return doppler_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int k) const { return weights_[static_cast<std::size_t>(k + r_)]; }

  /// True for every grid point other than the origin.
  bool contains(int k, int l) const { return !(k == 0 && doppler_[l] == 0.0); }

 private:
  int r_;
  std::vector<double> doppler_;
  std::vector<double> weights_;
};

/// Stopband bins with a common energy cap U_max = N * 10^(-A/10).
class SpectralMask {
 public:
  /// Throws InvalidInput for an empty bin list, bins outside [0, 1), duplicate
  /// bins, or a negative attenuation.
  SpectralMask(int n, std::vector<double> bins, double attenuation_db,
               std::vector<std::pair<double, double>> bands = {});

  /// A mask with no stopband bins (no spectral constraint).
  static SpectralMask none(int n);

  /// `count` bins spread uniformly (endpoints included) over each band.
  static SpectralMask from_bands(int n, const std::vector<std::pair<double, double>>& bands,
                                 int count, double attenuation_db);

  int n() const { return n_; }
  bool empty() const { return bins_.empty(); }
  int size() const { return static_cast<int>(bins_.size()); }
  const std::vector<double>& bins() const { return bins_; }
  double attenuation_db() const { return attenuation_db_; }
  double u_max() const { return u_max_; }

  /// Bands the bins were drawn from; when built from bins alone this is the
  /// single hull [min bin, max bin].
  const std::vector<std::pair<double, double>>& bands() const { return bands_; }

 private:
  SpectralMask() = default;

  int n_ = 0;
  std::vector<double> bins_;
  double attenuation_db_ = 0.0;
  double u_max_ = 0.0;
  std::vector<std::pair<double, double>> bands_;
};

struct DesignConfig {
  double papr_bound = 1.0;  // gamma
  int p = 22;               // l_p surrogate order
  double eta = 0.6;         // AM coupling weight
  double rho = 1.0;         // AL penalty step

  // AM stopping rules and reference backend settings.
  double tol_x = 1e-3;
  double tol_r = 1e-2;
  int t_max = 50;
  double conic_tol = 1e-7;
  int conic_max_iter = 20000;

  // ALaMM schedule.
  double inner_tol = 1e-6;
  double outer_tol = 1e-5;
  double stopband_tol = 1e-3;      // outer exit: max violation < stopband_tol * U_max
  double feasibility_slack = 1e-2; // best-iterate acceptance: ESD <= (1 + slack) U_max
  int inner_max = 100;
  int outer_max = 200;

  std::uint64_t seed = 1;

  /// Throws InvalidInput when a field is outside its documented range for
  /// sequences of length n.
  void validate(int n) const;
};

/// x_n = exp(j pi (n-1)^2 / N), n = 1..N.
Sequence gen_chirp(int n);

/// Unimodular sequence with phases uniform on [0, 2 pi), reproducible from seed.
Sequence gen_random_polyphase(int n, std::uint64_t seed);

/// Random polyphase sequence passed through a windowed linear-phase FIR
/// band-stop filter (circular convolution), rescaled to energy N. The
/// rejection depth follows the mask attenuation; A = 0 dB is all-pass.
Sequence gen_filtered_polyphase(int n, std::uint64_t seed, const SpectralMask& mask,
                                int taps = 63);

/// Band-stop taps used by gen_filtered_polyphase, index 0 is the centre tap's
/// left neighbour at -(taps-1)/2.
CVector bandstop_taps(const SpectralMask& mask, int taps);

/// max_n |x_n|^2 / (sum |x_n|^2 / N).
double papr(const CVector& x);
inline double papr(const Sequence& x) { return papr(x.values()); }

}  // namespace dseq
