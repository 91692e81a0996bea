#include "dseq/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dseq/error.hpp"

namespace dseq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> unit_weights(int r) { return std::vector<double>(2 * r + 1, 1.0); }

}  // namespace

Sequence::Sequence(CVector values) : v_(std::move(values)) {
  const auto n = static_cast<double>(v_.size());
  if (v_.size() < 1) throw InvalidInput("Sequence: empty");
  if (!v_.allFinite()) throw InvalidInput("Sequence: non-finite entry");
  if (std::abs(v_.squaredNorm() - n) > kEnergyTol * n) {
    std::ostringstream os;
    os.precision(17);
    os << "Sequence: energy " << v_.squaredNorm() << " differs from N = " << v_.size();
    throw InvalidInput(os.str());
  }
}

Sequence Sequence::normalized(const CVector& v) {
  if (v.size() < 1 || !v.allFinite()) throw InvalidInput("Sequence::normalized: bad input");
  const double e = v.squaredNorm();
  if (e == 0.0) throw InvalidInput("Sequence::normalized: zero vector");
  return Sequence(v * std::sqrt(static_cast<double>(v.size()) / e));
}

ZoneOfOperation::ZoneOfOperation(int max_delay, std::vector<double> doppler,
                                 std::vector<double> weights)
    : r_(max_delay), doppler_(std::move(doppler)), weights_(std::move(weights)) {
  if (r_ < 0) throw InvalidInput("ZoneOfOperation: negative max delay");
  if (doppler_.empty()) throw InvalidInput("ZoneOfOperation: empty Doppler grid");
  if (weights_.size() != static_cast<std::size_t>(2 * r_ + 1))
    throw InvalidInput("ZoneOfOperation: expected 2r+1 weights");
  for (double w : weights_)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("ZoneOfOperation: negative weight");
  for (double f : doppler_)
    if (!std::isfinite(f)) throw InvalidInput("ZoneOfOperation: non-finite Doppler value");
  if (doppler_.size() > 1) {
    const double step = doppler_[1] - doppler_[0];
    for (std::size_t l = 1; l < doppler_.size(); ++l) {
      const double d = doppler_[l] - doppler_[l - 1];
      if (!(d > 0.0)) throw InvalidInput("ZoneOfOperation: Doppler grid not strictly increasing");
      if (std::abs(d - step) > 1e-12) throw InvalidInput("ZoneOfOperation: Doppler grid not uniform");
    }
  }
  if (r_ == 0 && doppler_.size() == 1 && doppler_[0] == 0.0)
    throw InvalidInput("ZoneOfOperation: only the origin remains");
}

ZoneOfOperation::ZoneOfOperation(int max_delay, std::vector<double> doppler)
    : ZoneOfOperation(max_delay, std::move(doppler), unit_weights(std::max(max_delay, 0))) {}

ZoneOfOperation ZoneOfOperation::from_bins(int max_delay, double nu_lo, double nu_hi, int count,
                                           int n, std::vector<double> weights) {
  if (count < 1 || n < 1) throw InvalidInput("ZoneOfOperation::from_bins: bad grid size");
  if (count > 1 && !(nu_hi > nu_lo))
    throw InvalidInput("ZoneOfOperation::from_bins: empty Doppler interval");
  std::vector<double> f(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) {
    const double nu = count == 1 ? nu_lo : nu_lo + (nu_hi - nu_lo) * l / (count - 1);
    f[static_cast<std::size_t>(l)] = nu / n;
  }
  if (weights.empty()) weights = unit_weights(std::max(max_delay, 0));
  return ZoneOfOperation(max_delay, std::move(f), std::move(weights));
}

SpectralMask::SpectralMask(int n, std::vector<double> bins, double attenuation_db,
                           std::vector<std::pair<double, double>> bands)
    : n_(n), bins_(std::move(bins)), attenuation_db_(attenuation_db), bands_(std::move(bands)) {
  if (n_ < 1) throw InvalidInput("SpectralMask: N must be positive");
  if (bins_.empty()) throw InvalidInput("SpectralMask: no stopband bins");
  if (!(attenuation_db_ >= 0.0) || !std::isfinite(attenuation_db_))
    throw InvalidInput("SpectralMask: attenuation must be a non-negative dB value");
  for (double f : bins_)
    if (!(f >= 0.0 && f < 1.0)) throw InvalidInput("SpectralMask: bin outside [0, 1)");
  std::vector<double> sorted = bins_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("SpectralMask: duplicate stopband bins");
  for (const auto& [lo, hi] : bands_)
    if (!(hi >= lo) || hi - lo >= 1.0) throw InvalidInput("SpectralMask: band wider than [0, 1)");
  if (bands_.empty()) bands_.emplace_back(sorted.front(), sorted.back());
  u_max_ = n_ * std::pow(10.0, -0.1 * attenuation_db_);
}

SpectralMask SpectralMask::none(int n) {
  if (n < 1) throw InvalidInput("SpectralMask: N must be positive");
  SpectralMask m;
  m.n_ = n;
  m.u_max_ = static_cast<double>(n);
  return m;
}

SpectralMask SpectralMask::from_bands(int n, const std::vector<std::pair<double, double>>& bands,
                                      int count, double attenuation_db) {
  if (bands.empty()) throw InvalidInput("SpectralMask::from_bands: no bands");
  if (count < 1) throw InvalidInput("SpectralMask::from_bands: need at least one bin per band");
  std::vector<double> bins;
  for (const auto& [lo, hi] : bands) {
    if (!(hi >= lo) || hi - lo >= 1.0) throw InvalidInput("SpectralMask: band wider than [0, 1)");
    for (int i = 0; i < count; ++i) {
      double f = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1);
      f -= std::floor(f);
      bins.push_back(f);
    }
  }
  return SpectralMask(n, std::move(bins), attenuation_db, bands);
}

void DesignConfig::validate(int n) const {
  auto fail = [](const char* what) { throw InvalidInput(std::string("DesignConfig: ") + what); };
  if (!(papr_bound >= 1.0) || !(papr_bound < n || (n == 1 && papr_bound == 1.0)))
    fail("papr_bound must lie in [1, N)");
  if (p < 2 || p % 2 != 0) fail("p must be an even integer >= 2");
  if (!(eta >= 0.0 && eta <= 1.0)) fail("eta must lie in [0, 1]");
  if (!(rho > 0.0)) fail("rho must be positive");
  for (double t : {tol_x, tol_r, conic_tol, inner_tol, outer_tol, stopband_tol})
    if (!(t > 0.0)) fail("tolerances must be positive");
  if (!(feasibility_slack >= 0.0)) fail("feasibility_slack must be non-negative");
  if (t_max < 1 || inner_max < 1 || outer_max < 1 || conic_max_iter < 1)
    fail("iteration caps must be positive");
}

Sequence gen_chirp(int n) {
  if (n < 2) throw InvalidInput("gen_chirp: N must be at least 2");
  CVector x(n);
  for (int i = 0; i < n; ++i) {
    // Reduce the quadratic phase exactly before scaling to keep large N accurate.
    const long long q = (static_cast<long long>(i) * i) % (2LL * n);
    x(i) = std::polar(1.0, std::numbers::pi * static_cast<double>(q) / n);
  }
  return Sequence::normalized(x);
}

Sequence gen_random_polyphase(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("gen_random_polyphase: N must be positive");
  std::mt19937_64 rng(seed);
  CVector x(n);
  for (int i = 0; i < n; ++i) {
    // 53 random mantissa bits; avoids library-specific distribution code.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x(i) = std::polar(1.0, kTwoPi * u);
  }
  return Sequence::normalized(x);
}

CVector bandstop_taps(const SpectralMask& mask, int taps) {
  if (taps < 1 || taps % 2 == 0) throw InvalidInput("bandstop_taps: taps must be odd");
  const int half = (taps - 1) / 2;
  // Rejection depth matches the attenuation target; A = 0 leaves the input alone.
  const double depth = mask.empty() ? 0.0 : 1.0 - std::pow(10.0, -mask.attenuation_db() / 20.0);
  // Widen each band by half the Hamming main lobe so the band edges sit in the
  // filter's stopband rather than on its transition.
  const double guard = 2.0 / taps;

  CVector h = CVector::Zero(taps);
  h(half) = 1.0;
  if (depth == 0.0) return h;
  for (const auto& [lo, hi] : mask.bands()) {
    const double width = std::min(hi - lo + 2.0 * guard, 1.0);
    const double centre = 0.5 * (lo + hi);
    for (int i = 0; i < taps; ++i) {
      const int m = i - half;
      const double arg = std::numbers::pi * width * m;
      const double sinc = m == 0 ? 1.0 : std::sin(arg) / arg;
      const double window = taps == 1 ? 1.0 : 0.54 - 0.46 * std::cos(kTwoPi * i / (taps - 1));
      h(i) -= depth * window * width * sinc * std::polar(1.0, kTwoPi * centre * m);
    }
  }
  return h;
}

Sequence gen_filtered_polyphase(int n, std::uint64_t seed, const SpectralMask& mask, int taps) {
  if (taps < 1 || taps % 2 == 0 || taps >= n)
    throw InvalidInput("gen_filtered_polyphase: taps must be odd and below N");
  const CVector x = gen_random_polyphase(n, seed).values();
  const CVector h = bandstop_taps(mask, taps);
  const int half = (taps - 1) / 2;
  CVector y = CVector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < taps; ++t) {
      const int src = ((i - (t - half)) % n + n) % n;
      y(i) += h(t) * x(src);
    }
  return Sequence::normalized(y);
}

double papr(const CVector& x) {
  if (x.size() < 1) throw InvalidInput("papr: empty sequence");
  const double e = x.squaredNorm();
  if (!(e > 0.0)) throw InvalidInput("papr: zero sequence");
  return x.cwiseAbs2().maxCoeff() / (e / static_cast<double>(x.size()));
}

}  // namespace dseq
