#include <doctest.h>

#include <random>

#include "dseq/kernels.hpp"
#include "dseq/threads.hpp"
#include "oracles.hpp"

using namespace dseq;
using kernels::Exec;

namespace {

std::vector<double> grid(double lo, double hi, int count) {
  std::vector<double> f;
  for (int i = 0; i < count; ++i) f.push_back(lo + (hi - lo) * i / (count - 1));
  return f;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("ambiguity_block matches the dense definition in both modes") {
  std::mt19937_64 rng(21);
  const int n = 12, r = 4;
  const auto doppler = grid(-0.2, 0.3, 6);
  const CMatrix ph = kernels::doppler_phasors(doppler, n);
  const CVector x = oracle::random_vector(n, rng);
  for (Exec e : {Exec::serial, Exec::parallel}) {
    const CMatrix a = kernels::ambiguity_block(x, ph, r, e);
    for (int k = -r; k <= r; ++k)
      for (int l = 0; l < 6; ++l) CHECK(std::abs(a(k + r, l) - oracle::af(x, k, doppler[l])) < 1e-10);
  }
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  std::mt19937_64 rng(5);
  const int n = 40, r = 6;
  const auto doppler = grid(-0.05, 0.05, 9);
  const auto freqs = grid(0.1, 0.2, 13);
  const CMatrix ph = kernels::doppler_phasors(doppler, n);
  const CMatrix rows = kernels::dtft_rows(freqs, n);
  const CVector x = oracle::random_vector(n, rng);
  CMatrix alpha(2 * r + 1, 9);
  for (int j = 0; j < 9; ++j) alpha.col(j) = oracle::random_vector(2 * r + 1, rng);
  RVector c = RVector::Random(13);

  CHECK(kernels::ambiguity_block(x, ph, r, Exec::serial) == kernels::ambiguity_block(x, ph, r, Exec::parallel));
  CHECK(kernels::dtft_energy(x, rows, Exec::serial) == kernels::dtft_energy(x, rows, Exec::parallel));
  const CVector s1 = kernels::shift_sum_apply(alpha, ph, x, Exec::serial);
  const CVector s2 = kernels::shift_sum_apply(alpha, ph, x, Exec::parallel);
  CHECK((s1 - s2).norm() < 1e-11 * (1.0 + s1.norm()));
  CHECK(kernels::rank_one_sum_apply(c, rows, x, Exec::serial) ==
        kernels::rank_one_sum_apply(c, rows, x, Exec::parallel));
}

TEST_CASE("parallel results do not depend on the thread count") {
  std::mt19937_64 rng(8);
  const int n = 64, r = 5;
  const CMatrix ph = kernels::doppler_phasors(grid(-2.0 / n, 2.0 / n, 41), n);
  const CVector x = oracle::random_vector(n, rng);
  CMatrix alpha(2 * r + 1, 41);
  for (int j = 0; j < 41; ++j) alpha.col(j) = oracle::random_vector(2 * r + 1, rng);
  const int before = thread_limit();
  set_thread_limit(1);
  const CMatrix a1 = kernels::ambiguity_block(x, ph, r);
  const CVector y1 = kernels::shift_sum_apply(alpha, ph, x);
  set_thread_limit(4);
  const CMatrix a4 = kernels::ambiguity_block(x, ph, r);
  const CVector y4 = kernels::shift_sum_apply(alpha, ph, x);
  set_thread_limit(before);
  CHECK(a1 == a4);
  CHECK(y1 == y4);
}

TEST_CASE("shift_sum_apply equals the dense operator sum") {
  std::mt19937_64 rng(13);
  const int n = 10, r = 3;
  const auto doppler = grid(-0.1, 0.1, 5);
  const CMatrix ph = kernels::doppler_phasors(doppler, n);
  CMatrix alpha(2 * r + 1, 5);
  for (int j = 0; j < 5; ++j) alpha.col(j) = oracle::random_vector(2 * r + 1, rng);
  CMatrix dense = CMatrix::Zero(n, n);
  for (int k = -r; k <= r; ++k)
    for (int l = 0; l < 5; ++l) {
      const CMatrix u = oracle::U(n, k, doppler[l]);
      dense += alpha(k + r, l) * u + std::conj(alpha(k + r, l)) * u.adjoint();
    }
  const CVector x = oracle::random_vector(n, rng);
  for (Exec e : {Exec::serial, Exec::parallel})
    CHECK((kernels::shift_sum_apply(alpha, ph, x, e) - dense * x).norm() < 1e-10 * (dense * x).norm());
}

TEST_CASE("rank_one_sum_apply and dtft_energy match dense F_s") {
  std::mt19937_64 rng(17);
  const int n = 9;
  const auto freqs = grid(0.05, 0.45, 4);
  const CMatrix rows = kernels::dtft_rows(freqs, n);
  RVector c(4);
  c << 0.5, -1.0, 2.0, 0.25;
  CMatrix dense = CMatrix::Zero(n, n);
  for (int s = 0; s < 4; ++s) dense += c(s) * oracle::F(n, freqs[s]);
  const CVector x = oracle::random_vector(n, rng);
  CHECK((kernels::rank_one_sum_apply(c, rows, x) - dense * x).norm() < 1e-10 * (dense * x).norm());
  const RVector e = kernels::dtft_energy(x, rows);
  for (int s = 0; s < 4; ++s) CHECK(std::abs(e(s) - oracle::esd(x, freqs[s])) < 1e-10);
}

}  // TEST_SUITE
