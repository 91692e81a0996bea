#pragma once

#include <vector>

#include "dseq/numerics.hpp"

/// Data-parallel inner loops shared by the analysis code and the optimizers.
///
/// Every kernel has a serial reference (Exec::serial), written as the direct
/// definition, and an OpenMP version (Exec::parallel). Parallel versions
/// assign each output element to exactly one thread and sum in a fixed order,
/// so results do not depend on the thread count.
namespace dseq::kernels {

enum class Exec { serial, parallel };

/// phasors(l, m) = exp(j 2 pi f_l (m + 1)), the diagonal of Diag(p(f_l)).
CMatrix doppler_phasors(const std::vector<double>& doppler, int n);

/// rows(s, n) = exp(j 2 pi f_s n), the DTFT vector f_s.
CMatrix dtft_rows(const std::vector<double>& freqs, int n);

/// out(k + r, l) = x^H U_{k,l} x for k = -r..r, with U_{k,l} = J_k Diag(p(f_l)).
CMatrix ambiguity_block(const CVector& x, const CMatrix& phasors, int max_delay,
                        Exec exec = Exec::parallel);

/// e_s = x^H F_s x = |f_s^H x|^2.
RVector dtft_energy(const CVector& x, const CMatrix& rows, Exec exec = Exec::parallel);

/// y = sum_{k,l} alpha(k+r, l) U_{k,l} x + conj(alpha(k+r, l)) U_{k,l}^H x.
CVector shift_sum_apply(const CMatrix& alpha, const CMatrix& phasors, const CVector& x,
                        Exec exec = Exec::parallel);

/// y = sum_s c_s f_s f_s^H x.
CVector rank_one_sum_apply(const RVector& c, const CMatrix& rows, const CVector& x,
                           Exec exec = Exec::parallel);

}  // namespace dseq::kernels
