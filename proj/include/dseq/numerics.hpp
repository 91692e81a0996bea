#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace dseq {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Dense complex matrix equal to its conjugate transpose.
///
/// Construction checks |H(i,j) - conj(H(j,i))| <= tol entrywise (absolute).
class HermitianMatrix {
 public:
  static constexpr double kDefaultTol = 1e-12;

  explicit HermitianMatrix(CMatrix m, double tol = kDefaultTol);

  static HermitianMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  cdouble operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

/// Largest absolute deviation from Hermitian symmetry.
double hermitian_defect(const CMatrix& m);

struct EigenDecomposition {
  RVector values;   // descending
  CMatrix vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)
};

EigenDecomposition eig_hermitian(const HermitianMatrix& h);

struct SvdResult {
  RVector singular_values;  // descending, non-negative
  CMatrix u;
  CMatrix v;
};

/// Full SVD, M = U * diag(S) * V^H. Throws InvalidInput on non-finite entries.
SvdResult svd(const CMatrix& m);

/// Bisection on [lo, hi]. Stops when |f(x)| <= tol or the bracket is no wider
/// than tol. Throws BracketError when f(lo) and f(hi) share a strict sign.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol, int max_iter = 4096);

}  // namespace dseq
