#include "dseq/numerics.hpp"

#include <cmath>
#include <sstream>

#include "dseq/error.hpp"

namespace dseq {

double hermitian_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

HermitianMatrix::HermitianMatrix(CMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols())
    throw InvalidInput("HermitianMatrix: expected a non-empty square matrix");
  if (!m_.allFinite()) throw InvalidInput("HermitianMatrix: non-finite entry");
  const double defect = hermitian_defect(m_);
  if (defect > tol) {
    std::ostringstream os;
    os << "HermitianMatrix: asymmetry " << defect << " exceeds tolerance " << tol;
    throw InvalidInput(os.str());
  }
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return HermitianMatrix(CMatrix::Identity(dim, dim));
}

EigenDecomposition eig_hermitian(const HermitianMatrix& h) {
  // Average with the adjoint so the solver sees an exactly self-adjoint input.
  const CMatrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eig_hermitian: eigensolver did not converge");
  const Eigen::Index n = sym.rows();
  EigenDecomposition out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

SvdResult svd(const CMatrix& m) {
  if (!m.allFinite()) throw InvalidInput("svd: non-finite entry");
  Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {solver.singularValues(), solver.matrixU(), solver.matrixV()};
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol, int max_iter) {
  if (!(lo <= hi)) throw InvalidInput("bisect_root: lo must not exceed hi");
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi))
    throw BracketError("bisect_root: no sign change on the bracket");

  for (int it = 0; it < max_iter; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    const double fmid = f(mid);
    if (std::abs(fmid) <= tol || (hi - lo) <= tol) return mid;
    if (mid == lo || mid == hi) return mid;  // bracket at double resolution
    if (std::signbit(fmid) == std::signbit(flo)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

}  // namespace dseq
