#include "dseq/kernels.hpp"

#include <cmath>
#include <numbers>

#include "dseq/error.hpp"

namespace dseq::kernels {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Idx = Eigen::Index;

// exp(j 2 pi f t) with the argument reduced first; keeps phasors accurate for
// large t without relying on the platform's large-argument sin/cos.
cdouble unit_phasor(double f, double t) {
  double cycles = f * t;
  cycles -= std::round(cycles);
  return std::polar(1.0, kTwoPi * cycles);
}

}  // namespace

CMatrix doppler_phasors(const std::vector<double>& doppler, int n) {
  CMatrix out(static_cast<Idx>(doppler.size()), n);
  for (Idx l = 0; l < out.rows(); ++l)
    for (int m = 0; m < n; ++m) out(l, m) = unit_phasor(doppler[l], m + 1.0);
  return out;
}

CMatrix dtft_rows(const std::vector<double>& freqs, int n) {
  CMatrix out(static_cast<Idx>(freqs.size()), n);
  for (Idx s = 0; s < out.rows(); ++s)
    for (int m = 0; m < n; ++m) out(s, m) = unit_phasor(freqs[s], m);
  return out;
}

CMatrix ambiguity_block(const CVector& x, const CMatrix& phasors, int max_delay, Exec exec) {
  const Idx n = x.size();
  const Idx num_l = phasors.rows();
  if (phasors.cols() != n) throw InvalidInput("ambiguity_block: phasor table size mismatch");
  if (max_delay >= n) throw OutOfRange("ambiguity_block: delay exceeds N - 1");
  const int nk = 2 * max_delay + 1;
  CMatrix out(nk, num_l);

  if (exec == Exec::serial) {
    for (int k = -max_delay; k <= max_delay; ++k)
      for (Idx l = 0; l < num_l; ++l) {
        cdouble acc = 0.0;
        for (Idx m = std::max<Idx>(0, -k); m < std::min<Idx>(n, n - k); ++m)
          acc += std::conj(x(m + k)) * x(m) * phasors(l, m);
        out(k + max_delay, l) = acc;
      }
    return out;
  }

  // Lag products c_k[m] = conj(x_{m+k}) x_m, zero outside the overlap.
  CMatrix lag = CMatrix::Zero(nk, n);
#pragma omp parallel for schedule(static)
  for (int kk = 0; kk < nk; ++kk) {
    const int k = kk - max_delay;
    for (Idx m = std::max<Idx>(0, -k); m < std::min<Idx>(n, n - k); ++m)
      lag(kk, m) = std::conj(x(m + k)) * x(m);
  }
  const Idx total = static_cast<Idx>(nk) * num_l;
#pragma omp parallel for schedule(static)
  for (Idx idx = 0; idx < total; ++idx) {
    const Idx kk = idx / num_l;
    const Idx l = idx % num_l;
    const int k = static_cast<int>(kk) - max_delay;
    cdouble acc = 0.0;
    for (Idx m = std::max<Idx>(0, -k); m < std::min<Idx>(n, n - k); ++m)
      acc += lag(kk, m) * phasors(l, m);
    out(kk, l) = acc;
  }
  return out;
}

RVector dtft_energy(const CVector& x, const CMatrix& rows, Exec exec) {
  const Idx ns = rows.rows();
  if (rows.cols() != x.size()) throw InvalidInput("dtft_energy: row length mismatch");
  RVector out(ns);
  if (exec == Exec::serial) {
    for (Idx s = 0; s < ns; ++s) {
      cdouble acc = 0.0;
      for (Idx m = 0; m < x.size(); ++m) acc += std::conj(rows(s, m)) * x(m);
      out(s) = std::norm(acc);
    }
    return out;
  }
#pragma omp parallel for schedule(static)
  for (Idx s = 0; s < ns; ++s) {
    cdouble acc = 0.0;
    for (Idx m = 0; m < x.size(); ++m) acc += std::conj(rows(s, m)) * x(m);
    out(s) = std::norm(acc);
  }
  return out;
}

CVector shift_sum_apply(const CMatrix& alpha, const CMatrix& phasors, const CVector& x,
                        Exec exec) {
  const Idx n = x.size();
  const Idx num_l = phasors.rows();
  const int max_delay = static_cast<int>((alpha.rows() - 1) / 2);
  if (alpha.cols() != num_l || phasors.cols() != n || alpha.rows() % 2 == 0)
    throw InvalidInput("shift_sum_apply: shape mismatch");
  if (max_delay >= n) throw OutOfRange("shift_sum_apply: delay exceeds N - 1");

  if (exec == Exec::serial) {
    // Direct definition: (U x)[n] = p[n-k] x[n-k], (U^H x)[m] = conj(p[m]) x[m+k].
    CVector y = CVector::Zero(n);
    for (int k = -max_delay; k <= max_delay; ++k)
      for (Idx l = 0; l < num_l; ++l) {
        const cdouble a = alpha(k + max_delay, l);
        if (a == cdouble(0.0)) continue;
        for (Idx m = std::max<Idx>(0, -k); m < std::min<Idx>(n, n - k); ++m) {
          y(m + k) += a * phasors(l, m) * x(m);
          y(m) += std::conj(a) * std::conj(phasors(l, m)) * x(m + k);
        }
      }
    return y;
  }

  // beta_k[m] = sum_l alpha(k, l) p_l[m] collapses the Doppler axis first.
  const int nk = 2 * max_delay + 1;
  CMatrix beta(nk, n);
#pragma omp parallel for schedule(static)
  for (Idx idx = 0; idx < static_cast<Idx>(nk) * n; ++idx) {
    const Idx kk = idx / n;
    const Idx m = idx % n;
    cdouble acc = 0.0;
    for (Idx l = 0; l < num_l; ++l) acc += alpha(kk, l) * phasors(l, m);
    beta(kk, m) = acc;
  }
  CVector y(n);
#pragma omp parallel for schedule(static)
  for (Idx i = 0; i < n; ++i) {
    cdouble acc = 0.0;
    for (int kk = 0; kk < nk; ++kk) {
      const int k = kk - max_delay;
      const Idx src = i - k;  // forward shift term
      if (src >= 0 && src < n) acc += beta(kk, src) * x(src);
      const Idx fwd = i + k;  // adjoint term
      if (fwd >= 0 && fwd < n) acc += std::conj(beta(kk, i)) * x(fwd);
    }
    y(i) = acc;
  }
  return y;
}

CVector rank_one_sum_apply(const RVector& c, const CMatrix& rows, const CVector& x, Exec exec) {
  const Idx ns = rows.rows();
  const Idx n = x.size();
  if (c.size() != ns || rows.cols() != n) throw InvalidInput("rank_one_sum_apply: shape mismatch");
  if (exec == Exec::serial) {
    CVector y = CVector::Zero(n);
    for (Idx s = 0; s < ns; ++s) {
      cdouble g = 0.0;
      for (Idx m = 0; m < n; ++m) g += std::conj(rows(s, m)) * x(m);
      for (Idx m = 0; m < n; ++m) y(m) += c(s) * g * rows(s, m);
    }
    return y;
  }
  CVector g(ns);
#pragma omp parallel for schedule(static)
  for (Idx s = 0; s < ns; ++s) {
    cdouble acc = 0.0;
    for (Idx m = 0; m < n; ++m) acc += std::conj(rows(s, m)) * x(m);
    g(s) = c(s) * acc;
  }
  CVector y(n);
#pragma omp parallel for schedule(static)
  for (Idx m = 0; m < n; ++m) {
    cdouble acc = 0.0;
    for (Idx s = 0; s < ns; ++s) acc += g(s) * rows(s, m);
    y(m) = acc;
  }
  return y;
}

}  // namespace dseq::kernels
