#include "dseq/conic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dseq/error.hpp"

namespace dseq {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double inf_norm(const RVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols()), c(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r[j] = m(i, j).real();
      c[j] = m(i, j).imag();
    }
    re.push_back(r);
    im.push_back(c);
  }
  return {{"re", re}, {"im", im}};
}

HermitianMatrix matrix_from_json(const nlohmann::json& j, int n) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != static_cast<std::size_t>(n) || im.size() != static_cast<std::size_t>(n))
    throw InvalidInput("sdp_from_json: matrix has the wrong dimension");
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (re[i].size() != static_cast<std::size_t>(n) || im[i].size() != static_cast<std::size_t>(n))
      throw InvalidInput("sdp_from_json: ragged matrix row");
    for (int k = 0; k < n; ++k) m(i, k) = cdouble(re[i][k].get<double>(), im[i][k].get<double>());
  }
  return HermitianMatrix(m, 1e-9);
}

nlohmann::json constraints_to_json(const std::vector<TraceConstraint>& cs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cs)
    out.push_back({{"a", matrix_to_json(c.a.matrix())}, {"phi_coeff", c.phi_coeff}, {"rhs", c.rhs}});
  return out;
}

std::vector<TraceConstraint> constraints_from_json(const nlohmann::json& j, int n) {
  std::vector<TraceConstraint> out;
  for (const auto& c : j)
    out.push_back({matrix_from_json(c.at("a"), n), c.value("phi_coeff", 0.0), c.at("rhs").get<double>()});
  return out;
}

RVector project_psd(const RVector& v, int n) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(smat(v, n));
  const RVector lam = es.eigenvalues().cwiseMax(0.0);
  const CMatrix& q = es.eigenvectors();
  return svec(q * lam.asDiagonal() * q.adjoint());
}

double max_eigenvalue(const RVector& v, int n) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(smat(v, n), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

SdpSubproblem::SdpSubproblem(int dim)
    : n(dim),
      linear(CMatrix::Zero(std::max(dim, 1), std::max(dim, 1))),
      quad_matrix(CMatrix::Zero(std::max(dim, 1), std::max(dim, 1))) {
  if (dim < 1) throw InvalidInput("SdpSubproblem: dimension must be positive");
}

double SdpSubproblem::objective(const CMatrix& x, double phi) const {
  const double lin = (linear.matrix() * x).trace().real();
  const double dev = quad_offset - (quad_matrix.matrix() * x).trace().real();
  return phi_weight * phi + lin + quad_weight * dev * dev;
}

std::string to_string(ConicStatus status) {
  switch (status) {
    case ConicStatus::optimal: return "optimal";
    case ConicStatus::max_iters: return "max_iters";
    case ConicStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

RVector svec(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  RVector v(n * n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) v(idx++) = h(i, i).real();
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      v(idx++) = kSqrt2 * h(i, j).real();
      v(idx++) = kSqrt2 * h(i, j).imag();
    }
  return v;
}

CMatrix smat(const RVector& v, int n) {
  if (v.size() < static_cast<Eigen::Index>(n) * n) throw InvalidInput("smat: vector too short");
  CMatrix h(n, n);
  Eigen::Index idx = 0;
  for (int i = 0; i < n; ++i) h(i, i) = v(idx++);
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      const cdouble z(v(idx) / kSqrt2, v(idx + 1) / kSqrt2);
      idx += 2;
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  return h;
}

ConicSolution AdmmConicBackend::solve(const SdpSubproblem& prob, double tol) const {
  const int n = prob.n;
  if (n > kMaxDim) {
    std::ostringstream os;
    os << "AdmmConicBackend: dimension " << n << " exceeds the reference limit " << kMaxDim;
    throw InvalidInput(os.str());
  }
  if (!(tol > 0.0)) throw InvalidInput("AdmmConicBackend: tolerance must be positive");

  // Variables: [svec(X); phi]. Rows: inequalities, equalities, PSD block,
  // all written as A v + s = b with s in the matching cone.
  const int nv = n * n + 1;
  const int mi = static_cast<int>(prob.inequalities.size());
  const int me = static_cast<int>(prob.equalities.size());
  const int mp = n * n;
  const int m = mi + me + mp;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, nv);
  RVector b = RVector::Zero(m);
  RVector row_scale = RVector::Ones(m);
  const auto fill_row = [&](int r, const TraceConstraint& c) {
    A.row(r).head(n * n) = svec(c.a.matrix()).transpose();
    A(r, n * n) = -c.phi_coeff;
    b(r) = c.rhs;
    const double norm = A.row(r).norm();
    if (norm > 0.0) {
      row_scale(r) = 1.0 / norm;
      A.row(r) *= row_scale(r);
      b(r) *= row_scale(r);
    }
  };
  for (int i = 0; i < mi; ++i) fill_row(i, prob.inequalities[i]);
  for (int i = 0; i < me; ++i) fill_row(mi + i, prob.equalities[i]);
  for (int i = 0; i < mp; ++i) A(mi + me + i, i) = -1.0;

  const RVector g = svec(prob.quad_matrix.matrix());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nv, nv);
  P.topLeftCorner(n * n, n * n) = 2.0 * prob.quad_weight * g * g.transpose();
  RVector q = RVector::Zero(nv);
  q.head(n * n) = svec(prob.linear.matrix()) - 2.0 * prob.quad_weight * prob.quad_offset * g;
  q(n * n) = prob.phi_weight;

  RVector rho_vec(m);
  double rho = options_.rho;
  const auto set_rho = [&](double r) {
    rho = std::clamp(r, 1e-6, 1e6);
    rho_vec.setConstant(rho);
    rho_vec.segment(mi, me).setConstant(rho * options_.eq_rho_scale);
  };
  set_rho(rho);

  Eigen::LLT<Eigen::MatrixXd> kkt;
  const auto factor = [&] {
    Eigen::MatrixXd K = P + A.transpose() * rho_vec.asDiagonal() * A;
    K.diagonal().array() += options_.sigma;
    kkt.compute(K);
    if (kkt.info() != Eigen::Success) throw NumericalError("AdmmConicBackend: KKT factorization failed");
  };
  factor();

  const auto project_cone = [&](RVector v) {
    for (int i = 0; i < mi; ++i) v(i) = std::max(v(i), 0.0);
    v.segment(mi, me).setZero();
    v.tail(mp) = project_psd(v.tail(mp), n);
    return v;
  };

  RVector x = RVector::Zero(nv), s = RVector::Zero(m), y = RVector::Zero(m);
  if (options_.seed != 0) {
    std::mt19937_64 rng(options_.seed);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < nv; ++i) x(i) = normal(rng);
    for (Eigen::Index i = 0; i < m; ++i) s(i) = normal(rng);
    s = project_cone(s);
  }

  ConicSolution out;
  const double alpha = options_.relaxation;
  RVector y_prev = y;
  for (int it = 1; it <= options_.max_iter; ++it) {
    const RVector rhs = options_.sigma * x - q + A.transpose() * (rho_vec.cwiseProduct(b - s) + y);
    const RVector xt = kkt.solve(rhs);
    const RVector st = b - A * xt;
    x = alpha * xt + (1.0 - alpha) * x;
    const RVector s_hat = alpha * st + (1.0 - alpha) * s;
    y_prev = y;
    s = project_cone(s_hat + y.cwiseQuotient(rho_vec));
    y += rho_vec.cwiseProduct(s_hat - s);

    const bool check = it % options_.adapt_interval == 0 || it == options_.max_iter;
    if (!check) continue;

    const RVector ax = A * x;
    const RVector rp = (ax + s - b).cwiseQuotient(row_scale);
    const RVector px = P * x;
    const RVector aty = A.transpose() * y;
    const RVector rd = px + q - aty;
    const double pobj = 0.5 * x.dot(px) + q.dot(x);
    const double gap = x.dot(px) + q.dot(x) - b.dot(y);
    const double rp_n = inf_norm(rp), rd_n = inf_norm(rd);
    const double rp_scale = std::max({inf_norm(ax.cwiseQuotient(row_scale)),
                                      inf_norm(s.cwiseQuotient(row_scale)),
                                      inf_norm(b.cwiseQuotient(row_scale))});
    const double rd_scale = std::max({inf_norm(px), inf_norm(q), inf_norm(aty)});
    out.iterations = it;
    out.primal_residual = rp_n;
    out.dual_residual = rd_n;
    out.duality_gap = gap;
    if (rp_n <= tol * (1.0 + rp_scale) && rd_n <= tol * (1.0 + rd_scale) &&
        std::abs(gap) <= tol * (1.0 + std::abs(pobj))) {
      out.status = ConicStatus::optimal;
      break;
    }

    // Farkas certificate: dy in the polar cone, A^T dy ~ 0, b^T dy > 0.
    const RVector dy = y - y_prev;
    const double dy_n = inf_norm(dy);
    if (dy_n > 0.0) {
      constexpr double eps = 1e-6;
      bool polar = true;
      for (int i = 0; i < mi; ++i) polar = polar && dy(i) <= eps * dy_n;
      polar = polar && max_eigenvalue(dy.tail(mp), n) <= eps * dy_n;
      if (polar && inf_norm(A.transpose() * dy) <= eps * dy_n && b.dot(dy) > eps * dy_n) {
        out.status = ConicStatus::infeasible;
        return out;
      }
    }

    if (options_.adaptive_rho && rp_scale > 0.0 && rd_scale > 0.0 && rd_n > 0.0) {
      const double ratio = std::sqrt((rp_n / rp_scale) / (rd_n / rd_scale));
      if (ratio > 5.0 || ratio < 0.2) {
        set_rho(rho * ratio);
        factor();
      }
    }
  }

  const CMatrix xm = smat(s.tail(mp), n);  // the PSD slack block is exactly PSD
  out.x.emplace(0.5 * (xm + xm.adjoint()));
  out.phi = x(n * n);
  out.objective = prob.objective(out.x->matrix(), out.phi);
  return out;
}

ConicSolution conic_solve(const SdpSubproblem& prob, double tol) {
  return AdmmConicBackend().solve(prob, tol);
}

nlohmann::json to_json(const SdpSubproblem& prob) {
  return {{"n", prob.n},
          {"phi_weight", prob.phi_weight},
          {"linear", matrix_to_json(prob.linear.matrix())},
          {"quad_weight", prob.quad_weight},
          {"quad_matrix", matrix_to_json(prob.quad_matrix.matrix())},
          {"quad_offset", prob.quad_offset},
          {"inequalities", constraints_to_json(prob.inequalities)},
          {"equalities", constraints_to_json(prob.equalities)}};
}

SdpSubproblem sdp_from_json(const nlohmann::json& j) {
  SdpSubproblem prob(j.at("n").get<int>());
  prob.phi_weight = j.value("phi_weight", 0.0);
  prob.linear = matrix_from_json(j.at("linear"), prob.n);
  prob.quad_weight = j.value("quad_weight", 0.0);
  prob.quad_matrix = matrix_from_json(j.at("quad_matrix"), prob.n);
  prob.quad_offset = j.value("quad_offset", 0.0);
  prob.inequalities = constraints_from_json(j.at("inequalities"), prob.n);
  prob.equalities = constraints_from_json(j.at("equalities"), prob.n);
  return prob;
}

}  // namespace dseq
