#include "dseq/am_sdr.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "dseq/alamm.hpp"
#include "dseq/ambiguity.hpp"
#include "dseq/error.hpp"
#include "dseq/kernels.hpp"

namespace dseq {

namespace {

// Dense U_{k,l} = J_k Diag(p(f_l)).
CMatrix shift_matrix(int n, int k, const CMatrix& phasors, int l) {
  CMatrix u = CMatrix::Zero(n, n);
  for (int col = std::max(0, -k); col < std::min(n, n - k); ++col) u(col + k, col) = phasors(l, col);
  return u;
}

void check_operand(const HermitianMatrix& x, const ZoneOfOperation& zone, const SpectralMask& mask,
                   double gamma, double eta) {
  const int n = static_cast<int>(x.dim());
  if (zone.max_delay() >= n) throw OutOfRange("subproblem: zone delay exceeds N - 1");
  if (mask.n() != n) throw InvalidInput("subproblem: mask built for a different N");
  if (!(gamma >= 1.0)) throw InvalidInput("subproblem: gamma must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidInput("subproblem: eta must lie in [0, 1]");
}

// Constraints shared by both steps; `lift(U)` maps U to the matrix C with the
// AF constraint written as tr(C X) <= phi.
template <typename Lift>
SdpSubproblem common_constraints(int n, const ZoneOfOperation& zone, const SpectralMask& mask,
                                 double gamma, Lift lift) {
  SdpSubproblem prob(n);
  const CMatrix phasors = kernels::doppler_phasors(zone.doppler(), n);
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l) {
      if (!zone.contains(k, l)) continue;
      const CMatrix c = zone.weight(k) * lift(shift_matrix(n, k, phasors, l));
      prob.inequalities.push_back({HermitianMatrix(0.5 * (c + c.adjoint())), 1.0, 0.0});
    }
  if (!mask.empty()) {
    const CMatrix rows = kernels::dtft_rows(mask.bins(), n);
    for (int s = 0; s < mask.size(); ++s) {
      const CVector f = rows.row(s).transpose();
      prob.inequalities.push_back({HermitianMatrix(f * f.adjoint()), 0.0, mask.u_max()});
    }
  }
  for (int i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    prob.inequalities.push_back({HermitianMatrix(e), 0.0, gamma});
  }
  prob.equalities.push_back({HermitianMatrix::identity(n), 0.0, static_cast<double>(n)});
  return prob;
}

}  // namespace

SdpSubproblem build_subproblem_X1(const HermitianMatrix& x2, const ZoneOfOperation& zone,
                                  const SpectralMask& mask, double gamma, double eta) {
  check_operand(x2, zone, mask, gamma, eta);
  const int n = static_cast<int>(x2.dim());
  // tr(U^H X1 U X2) = tr(X1 U X2 U^H)
  SdpSubproblem prob = common_constraints(
      n, zone, mask, gamma, [&](const CMatrix& u) -> CMatrix { return u * x2.matrix() * u.adjoint(); });
  prob.phi_weight = 1.0 - eta;
  prob.quad_weight = eta;
  prob.quad_matrix = x2;
  prob.quad_offset = static_cast<double>(n) * n;
  return prob;
}

SdpSubproblem build_subproblem_X2(const HermitianMatrix& x1, const ZoneOfOperation& zone,
                                  const SpectralMask& mask, double gamma, double eta) {
  check_operand(x1, zone, mask, gamma, eta);
  const int n = static_cast<int>(x1.dim());
  SdpSubproblem prob = common_constraints(
      n, zone, mask, gamma, [&](const CMatrix& u) -> CMatrix { return u.adjoint() * x1.matrix() * u; });
  prob.phi_weight = 1.0 - eta;
  prob.linear = HermitianMatrix(-eta * x1.matrix());
  return prob;
}

double coupling_gap(const HermitianMatrix& x1, const HermitianMatrix& x2, int n) {
  return 1.0 - (x1.matrix() * x2.matrix()).trace().real() / (static_cast<double>(n) * n);
}

RankOneExtraction extract_rank_one(const HermitianMatrix& x, double gamma, double tol_r) {
  const SvdResult s = svd(x.matrix());
  const int n = static_cast<int>(x.dim());
  RankOneExtraction out;
  const double s0 = s.singular_values(0);
  if (!(s0 > 0.0)) {
    out.sigma_ratio = INFINITY;
    return out;
  }
  out.sigma_ratio = n > 1 ? s.singular_values(1) / s0 : 0.0;
  if (out.sigma_ratio > tol_r) return out;
  CVector v = std::sqrt(s0) * s.u.col(0);
  CVector p = project_papr(v, gamma, n).values();
  if (std::abs(p(0)) > 0.0) p *= std::conj(p(0)) / std::abs(p(0));
  out.x.emplace(std::move(p));
  return out;
}

std::string to_string(AmStatus status) {
  switch (status) {
    case AmStatus::converged: return "converged";
    case AmStatus::max_iters: return "max_iters";
    case AmStatus::rank_one_failure: return "rank_one_failure";
    case AmStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

AmResult am_solve(const Sequence& x_init, const ZoneOfOperation& zone, const SpectralMask& mask,
                  const DesignConfig& config, const ConicBackend* backend) {
  const int n = static_cast<int>(x_init.size());
  config.validate(n);
  if (n > AdmmConicBackend::kMaxDim && backend == nullptr)
    throw InvalidInput("am_solve: the reference backend is limited to N <= 64");
  const AdmmConicBackend reference(AdmmOptions{.max_iter = config.conic_max_iter});
  const ConicBackend& solver = backend ? *backend : reference;

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  const CVector& x0 = x_init.values();
  const HermitianMatrix lifted(x0 * x0.adjoint(), 1e-9);
  AmResult result{AmStatus::max_iters, std::nullopt, {}, AMState{lifted, lifted, 0.0, 0, 0.0}, 0.0};
  AMState& st = result.state;
  st.phi = wpsl(x_init, zone);
  st.phi *= st.phi;
  result.trace.rows.push_back({0, 0.0, st.phi, 0.0, elapsed()});

  const double gap_floor = -10.0 * config.conic_tol * n;  // PSD iterates give gap >= 0 up to solver accuracy
  while (st.t < config.t_max) {
    const ConicSolution s1 =
        solver.solve(build_subproblem_X1(st.x2, zone, mask, config.papr_bound, config.eta), config.conic_tol);
    if (s1.status == ConicStatus::infeasible || !s1.x) {
      result.status = AmStatus::infeasible;
      return result;
    }
    st.x1 = *s1.x;
    const ConicSolution s2 =
        solver.solve(build_subproblem_X2(st.x1, zone, mask, config.papr_bound, config.eta), config.conic_tol);
    if (s2.status == ConicStatus::infeasible || !s2.x) {
      result.status = AmStatus::infeasible;
      return result;
    }
    st.x2 = *s2.x;
    st.phi = s2.phi;
    st.t += 1;
    st.gap = coupling_gap(st.x1, st.x2, n);
    if (st.gap < gap_floor) {
      std::ostringstream os;
      os << "am_solve: negative coupling gap " << st.gap << " at sweep " << st.t;
      throw NumericalError(os.str());
    }
    const SvdResult sv = svd(st.x2.matrix());
    const double ratio = n > 1 ? sv.singular_values(1) / sv.singular_values(0) : 0.0;
    result.trace.rows.push_back({st.t, st.gap, st.phi, ratio, elapsed()});
    if (st.gap <= config.tol_x) break;
  }

  const RankOneExtraction ex = extract_rank_one(st.x2, config.papr_bound, config.tol_r);
  result.sigma_ratio = ex.sigma_ratio;
  if (!ex.x) {
    result.status = AmStatus::rank_one_failure;
    return result;
  }
  result.x = ex.x;
  result.status = st.gap <= config.tol_x ? AmStatus::converged : AmStatus::max_iters;
  return result;
}

}  // namespace dseq
