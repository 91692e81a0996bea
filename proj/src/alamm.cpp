#include "dseq/alamm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "dseq/error.hpp"

namespace dseq {

namespace {

using Clock = std::chrono::steady_clock;

// Stable log(sum exp(t_i)); returns -inf for an empty list.
double log_sum_exp(const std::vector<double>& terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// A point together with the quantities every ALaMM formula needs.
struct Point {
  CVector x;
  CMatrix A;
  RVector e;
};

}  // namespace

std::pair<double, double> quadratic_majorizer(double t0, double z, int p) {
  if (p < 2) throw InvalidInput("quadratic_majorizer: p must be >= 2");
  if (!(t0 >= 0.0) || !(z >= 0.0)) throw InvalidInput("quadratic_majorizer: negative input");
  if (z == 0.0) return {p == 2 ? 1.0 : 0.0, 0.0};
  const double tau = std::min(t0 / z, 1.0);
  // (z^p - t^p - p t^(p-1) (z - t)) / (z - t)^2 = z^(p-2) sum_{d=0}^{p-2} (d+1) tau^d
  double poly = p - 1.0;
  for (int d = p - 3; d >= 0; --d) poly = poly * tau + (d + 1.0);
  const double zp2 = std::pow(z, p - 2);
  const double a = zp2 * poly;
  const double b = zp2 * z * (p * std::pow(tau, p - 1) - 2.0 * poly * tau);
  if (!std::isfinite(a) || !std::isfinite(b))
    throw NumericalError("quadratic_majorizer: overflow; reduce p or rescale the objective");
  return {a, b};
}

AlammModel::AlammModel(const ZoneOfOperation& zone, const SpectralMask& mask, int n)
    : zone_(zone), mask_(mask), n_(n) {
  if (n < 1) throw InvalidInput("AlammModel: N must be positive");
  if (zone.max_delay() >= n) throw OutOfRange("AlammModel: zone delay exceeds N - 1");
  if (mask.n() != n) throw InvalidInput("AlammModel: mask built for a different N");
  phasors_ = kernels::doppler_phasors(zone.doppler(), n);
  dtft_ = kernels::dtft_rows(mask.bins(), n);
}

CMatrix AlammModel::ambiguity(const CVector& x) const {
  return kernels::ambiguity_block(x, phasors_, zone_.max_delay());
}

RVector AlammModel::stopband_energy(const CVector& x) const {
  if (mask_.empty()) return RVector(0);
  return kernels::dtft_energy(x, dtft_);
}

namespace {

MajorizerCoefficients coefficients_from(const AlammModel& model, CMatrix A, RVector e,
                                        const RVector& lambda, double rho, int p, double c) {
  (void)rho;  // the bound on z below uses the unit-weight penalty sum
  const auto& zone = model.zone();
  const double u = model.mask().u_max();
  if (lambda.size() != e.size()) throw InvalidInput("coefficients: multiplier count mismatch");
  if (!(c > 0.0)) throw InvalidInput("coefficients: objective norm must be positive");

  // z^p = sum |A/c|^p + sum lambda_s e_s + sum (e_s - U)^2, in log form.
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(A.size()) + 1);
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l) {
      const double mag = std::abs(A(k + zone.max_delay(), l));
      if (zone.contains(k, l) && mag > 0.0) logs.push_back(p * std::log(mag / c));
    }
  double penalty = 0.0;
  for (Eigen::Index s = 0; s < e.size(); ++s)
    penalty += lambda(s) * e(s) + (e(s) - u) * (e(s) - u);
  if (penalty > 0.0) logs.push_back(std::log(penalty));
  const double lse = log_sum_exp(logs);
  const double zs = std::isfinite(lse) ? std::exp(lse / p) : 0.0;
  if (!std::isfinite(zs)) throw NumericalError("coefficients: z is not finite");

  MajorizerCoefficients out;
  out.a = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  out.b = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l) {
      if (!zone.contains(k, l)) continue;
      const auto [as, bs] = quadratic_majorizer(std::abs(A(k + zone.max_delay(), l)) / c, zs, p);
      out.a(k + zone.max_delay(), l) = as / (c * c);
      out.b(k + zone.max_delay(), l) = bs / c;
    }
  out.A = std::move(A);
  out.stopband_energy = std::move(e);
  out.z = zs * c;
  out.objective_norm = c;
  return out;
}

// Coefficient on U_{k,l} in Phi: w a conj(A) + (w b / 2) conj(A) / |A|.
CMatrix shift_coefficients(const ZoneOfOperation& zone, const MajorizerCoefficients& c) {
  CMatrix alpha = CMatrix::Zero(c.A.rows(), c.A.cols());
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l) {
      if (!zone.contains(k, l)) continue;
      const int kk = k + zone.max_delay();
      const cdouble a_conj = std::conj(c.A(kk, l));
      const double mag = std::abs(a_conj);
      const cdouble phase = mag > 0.0 ? a_conj / mag : cdouble(0.0);  // subgradient at 0
      alpha(kk, l) = zone.weight(k) * (c.a(kk, l) * a_conj + 0.5 * c.b(kk, l) * phase);
    }
  return alpha;
}

double merit_from(const AlammModel& model, const CMatrix& A, const RVector& e,
                  const RVector& lambda, double rho, int p, double c) {
  const auto& zone = model.zone();
  double f = 0.0;
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l)
      if (zone.contains(k, l) && zone.weight(k) > 0.0)
        f += zone.weight(k) * std::pow(std::abs(A(k + zone.max_delay(), l)) / c, p);
  const double u = model.mask().u_max();
  for (Eigen::Index s = 0; s < e.size(); ++s)
    f += lambda(s) * e(s) + 0.5 * rho * e(s) * e(s) - rho * u * e(s);
  return f;
}

double wpsl_from(const ZoneOfOperation& zone, const CMatrix& A) {
  double worst = 0.0;
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    for (int l = 0; l < zone.doppler_count(); ++l)
      if (zone.contains(k, l))
        worst = std::max(worst, zone.weight(k) * std::abs(A(k + zone.max_delay(), l)));
  return worst;
}

double violation_from(const SpectralMask& mask, const RVector& e) {
  if (e.size() == 0) return 0.0;
  return std::max(0.0, e.maxCoeff() - mask.u_max());
}

}  // namespace

MajorizerCoefficients AlammModel::coefficients(const CVector& x, const RVector& lambda,
                                               double rho, int p, double objective_norm) const {
  return coefficients_from(*this, ambiguity(x), stopband_energy(x), lambda, rho, p,
                           objective_norm);
}

double AlammModel::lambda_max_Lambda(const MajorizerCoefficients& c, int l) const {
  double best = 0.0;
  for (int k = -zone_.max_delay(); k <= zone_.max_delay(); ++k)
    if (zone_.contains(k, l))
      best = std::max(best, zone_.weight(k) * c.a(k + zone_.max_delay(), l) * (n_ - std::abs(k)));
  return best;
}

HermitianMatrix AlammModel::phi_dense(const CVector& x, const MajorizerCoefficients& c,
                                      const RVector& lambda, double rho) const {
  const int r = zone_.max_delay();
  const CMatrix xx = x * x.adjoint();
  CMatrix m = CMatrix::Zero(n_, n_);
  CMatrix nm = CMatrix::Zero(n_, n_);
  for (int l = 0; l < zone_.doppler_count(); ++l) {
    for (int k = -r; k <= r; ++k) {
      if (!zone_.contains(k, l)) continue;
      // U_{k,l} = J_k Diag(p(f_l)): entry (m + k, m) = p_l[m].
      CMatrix u = CMatrix::Zero(n_, n_);
      for (int col = std::max(0, -k); col < std::min(n_, n_ - k); ++col)
        u(col + k, col) = phasors_(l, col);
      const cdouble amp = c.A(k + r, l);
      const double w = zone_.weight(k);
      m += w * c.a(k + r, l) * std::conj(amp) * u;
      if (std::abs(amp) > 0.0) nm += 0.5 * w * c.b(k + r, l) * (amp / std::abs(amp)) * u.adjoint();
    }
    m -= lambda_max_Lambda(c, l) * xx;
  }
  CMatrix p = mask_.empty() ? CMatrix::Zero(n_, n_) : CMatrix(-lambda_max_L(n_) * xx);
  CMatrix f_sum = CMatrix::Zero(n_, n_);
  CMatrix f_lambda = CMatrix::Zero(n_, n_);
  for (int s = 0; s < mask_.size(); ++s) {
    const CVector fs = dtft_.row(s).transpose();
    const CMatrix fmat = fs * fs.adjoint();
    p += c.stopband_energy(s) * fmat;
    f_sum += fmat;
    f_lambda += lambda(s) * fmat;
  }
  CMatrix phi = m + m.adjoint() + nm + nm.adjoint() + 0.5 * rho * (p + p.adjoint()) + f_lambda -
                rho * mask_.u_max() * f_sum;
  return HermitianMatrix(0.5 * (phi + phi.adjoint()));
}

CVector AlammModel::phi_times_x(const CVector& x, const MajorizerCoefficients& c,
                                const RVector& lambda, double rho) const {
  const CMatrix alpha = shift_coefficients(zone_, c);
  CVector y = kernels::shift_sum_apply(alpha, phasors_, x);
  double lambda_sum = 0.0;
  for (int l = 0; l < zone_.doppler_count(); ++l) lambda_sum += lambda_max_Lambda(c, l);
  const double xx = x.squaredNorm();
  const double penalty_curvature = mask_.empty() ? 0.0 : rho * lambda_max_L(n_);
  y -= (2.0 * lambda_sum + penalty_curvature) * xx * x;
  if (!mask_.empty()) {
    RVector weights = rho * c.stopband_energy + lambda;
    weights.array() -= rho * mask_.u_max();
    y += kernels::rank_one_sum_apply(weights, dtft_, x);
  }
  return y;
}

double AlammModel::mu(const MajorizerCoefficients& c, const RVector& lambda, double rho) const {
  double side = 0.0;
  for (int k = -zone_.max_delay(); k <= zone_.max_delay(); ++k)
    for (int l = 0; l < zone_.doppler_count(); ++l) {
      if (!zone_.contains(k, l)) continue;
      const int kk = k + zone_.max_delay();
      const double phase_mag = std::abs(c.A(kk, l)) > 0.0 ? 1.0 : 0.0;
      side += zone_.weight(k) * (std::abs(c.a(kk, l) * c.A(kk, l)) + std::abs(c.b(kk, l)) * phase_mag);
    }
  return 2.0 * n_ * side + rho * n_ * c.stopband_energy.sum() + n_ * lambda.sum();
}

CVector AlammModel::mm_vector(const CVector& x, const RVector& lambda, double rho, int p,
                              double objective_norm) const {
  const MajorizerCoefficients c = coefficients(x, lambda, rho, p, objective_norm);
  return mu(c, lambda, rho) * x - phi_times_x(x, c, lambda, rho);
}

double AlammModel::merit(const CVector& x, const RVector& lambda, double rho, int p,
                         double objective_norm) const {
  return merit_from(*this, ambiguity(x), stopband_energy(x), lambda, rho, p, objective_norm);
}

double AlammModel::weighted_lp_norm(const CVector& x, int p) const {
  const CMatrix A = ambiguity(x);
  std::vector<double> logs;
  for (int k = -zone_.max_delay(); k <= zone_.max_delay(); ++k)
    for (int l = 0; l < zone_.doppler_count(); ++l) {
      const double mag = std::abs(A(k + zone_.max_delay(), l));
      const double w = zone_.weight(k);
      if (zone_.contains(k, l) && mag > 0.0 && w > 0.0)
        logs.push_back(std::log(w) + p * std::log(mag));
    }
  const double lse = log_sum_exp(logs);
  return std::isfinite(lse) ? std::exp(lse / p) : 0.0;
}

MajorizerCoefficients compute_coefficients(const CVector& x, const ZoneOfOperation& zone,
                                           const SpectralMask& mask, const RVector& lambda,
                                           double rho, int p, double objective_norm) {
  return AlammModel(zone, mask, static_cast<int>(x.size()))
      .coefficients(x, lambda, rho, p, objective_norm);
}

double lambda_max_Lambda(const MajorizerCoefficients& c, const ZoneOfOperation& zone, int n,
                         int l) {
  double best = 0.0;
  for (int k = -zone.max_delay(); k <= zone.max_delay(); ++k)
    if (zone.contains(k, l))
      best = std::max(best, zone.weight(k) * c.a(k + zone.max_delay(), l) * (n - std::abs(k)));
  return best;
}

double lambda_max_L(int n) { return static_cast<double>(n) * n; }

HermitianMatrix build_phi(const CVector& x, const MajorizerCoefficients& c,
                          const ZoneOfOperation& zone, const SpectralMask& mask,
                          const RVector& lambda, double rho) {
  return AlammModel(zone, mask, static_cast<int>(x.size())).phi_dense(x, c, lambda, rho);
}

double compute_mu(const MajorizerCoefficients& c, const ZoneOfOperation& zone,
                  const SpectralMask& mask, const RVector& lambda, double rho, int n) {
  return AlammModel(zone, mask, n).mu(c, lambda, rho);
}

Sequence project_papr(const CVector& v, double gamma, int n) {
  if (v.size() != n) throw InvalidInput("project_papr: length mismatch");
  if (!v.allFinite()) throw InvalidInput("project_papr: non-finite input");
  if (!(gamma >= 1.0)) throw InvalidInput("project_papr: gamma must be >= 1");
  int m = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m += v(i) != cdouble(0.0);
  if (m == 0) throw InvalidInput("project_papr: zero vector carries no phase information");

  const double cap = std::sqrt(gamma);
  CVector x(n);
  const double slack = n - m * gamma;
  if (slack >= 0.0) {
    const double fill = m < n ? std::sqrt(slack / (n - m)) : 0.0;
    for (int i = 0; i < n; ++i) {
      const double mag = std::abs(v(i));
      x(i) = mag > 0.0 ? cap * (v(i) / mag) : cdouble(fill, 0.0);
    }
    return Sequence(x);
  }

  // Solve sum_n min(beta^2 |v_n|^2, gamma) = N on v scaled to unit peak.
  const double peak = v.cwiseAbs().maxCoeff();
  RVector mag = v.cwiseAbs() / peak;
  double smallest = 1.0;
  for (Eigen::Index i = 0; i < mag.size(); ++i)
    if (mag(i) > 0.0) smallest = std::min(smallest, mag(i));
  const auto energy_gap = [&](double beta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mag.size(); ++i)
      acc += std::min(beta * beta * mag(i) * mag(i), gamma);
    return acc - n;
  };
  const double beta = bisect_root(energy_gap, 0.0, cap / smallest, 1e-13);
  for (int i = 0; i < n; ++i) {
    const double m_i = mag(i);
    x(i) = m_i > 0.0 ? std::min(beta * m_i, cap) * (v(i) / std::abs(v(i))) : cdouble(0.0);
  }
  return Sequence(x);
}

namespace {

Point evaluate(const AlammModel& model, CVector x) {
  Point pt{std::move(x), {}, {}};
  pt.A = model.ambiguity(pt.x);
  pt.e = model.stopband_energy(pt.x);
  return pt;
}

// One MM update x -> P((mu I - Phi(x)) x). A vanishing v means the surrogate is
// flat, so the point is returned unchanged.
Point mm_map(const AlammModel& model, const Point& pt, const RVector& lambda, double rho, int p,
             double c, double gamma) {
  const MajorizerCoefficients coef = coefficients_from(model, pt.A, pt.e, lambda, rho, p, c);
  const CVector v = model.mu(coef, lambda, rho) * pt.x - model.phi_times_x(pt.x, coef, lambda, rho);
  if (v.squaredNorm() == 0.0) return pt;
  return evaluate(model, project_papr(v, gamma, model.n()).values());
}

struct StepClock {
  Clock::time_point start = Clock::now();
  double offset_ms = 0.0;
  double now() const { return offset_ms + ms_since(start); }
};

ALState squarem_impl(const ALState& state, const AlammModel& model, double rho, int p,
                     double gamma, const Point& current, Point* accepted, const StepClock& clock) {
  const double c = state.objective_norm;
  const RVector& lambda = state.lambda;
  const double w0 = merit_from(model, current.A, current.e, lambda, rho, p, c);
  if (!std::isfinite(w0)) throw NumericalError("squarem_step: merit is not finite");
  const auto merit_of = [&](const Point& pt) {
    return merit_from(model, pt.A, pt.e, lambda, rho, p, c);
  };

  Point next = current;
  double w_next = w0;
  bool stalled = false;

  const Point x1 = mm_map(model, current, lambda, rho, p, c, gamma);
  const CVector r = x1.x - current.x;
  if (r.norm() == 0.0) {
    stalled = true;  // fixed point of the MM map
  } else {
    const Point x2 = mm_map(model, x1, lambda, rho, p, c, gamma);
    const CVector u = x2.x - x1.x - r;
    bool done = false;
    if (u.norm() > 0.0) {
      double alpha = -r.norm() / u.norm();
      for (int halving = 0; halving <= 60 && !done; ++halving) {
        CVector x3 = current.x - 2.0 * alpha * r + alpha * alpha * u;
        if (x3.allFinite() && x3.squaredNorm() > 0.0) {
          Point cand = mm_map(model, evaluate(model, std::move(x3)), lambda, rho, p, c, gamma);
          const double w = merit_of(cand);
          if (w <= w0) {
            next = std::move(cand);
            w_next = w;
            done = true;
            break;
          }
        }
        alpha = 0.5 * (alpha - 1.0);
      }
    }
    if (!done) {
      // Plain MM step; if even that fails to descend, stay put.
      const double w1 = merit_of(x1);
      if (w1 <= w0) {
        next = x1;
        w_next = w1;
      } else {
        stalled = true;
      }
    }
  }
  if (!std::isfinite(w_next)) throw NumericalError("squarem_step: merit is not finite");

  ALState out{Sequence(next.x), state.lambda, c, state.iteration + 1, state.outer, stalled,
              state.trace};
  AlammTraceRow row;
  row.iter = out.iteration;
  row.outer = out.outer;
  row.wpsl_db = wpsl_db(wpsl_from(model.zone(), next.A), model.n());
  row.merit = w_next;
  row.merit_before = w0;
  row.max_stopband_violation = violation_from(model.mask(), next.e);
  row.papr = papr(next.x);
  row.wall_ms = clock.now();
  out.trace.rows.push_back(row);
  if (accepted) *accepted = std::move(next);
  return out;
}

}  // namespace

ALState squarem_step(const ALState& state, const AlammModel& model, double rho, int p,
                     double gamma) {
  StepClock clock;
  clock.offset_ms = state.trace.rows.empty() ? 0.0 : state.trace.rows.back().wall_ms;
  return squarem_impl(state, model, rho, p, gamma, evaluate(model, state.x.values()), nullptr,
                      clock);
}

ALState update_multipliers(const ALState& state, const AlammModel& model, double rho) {
  ALState out = state;
  const RVector e = model.stopband_energy(state.x.values());
  for (Eigen::Index s = 0; s < e.size(); ++s)
    out.lambda(s) = std::max(0.0, state.lambda(s) + rho * (e(s) - model.mask().u_max()));
  return out;
}

AlammResult alamm_solve(const Sequence& x_init, const ZoneOfOperation& zone,
                        const SpectralMask& mask, const DesignConfig& config) {
  const int n = static_cast<int>(x_init.size());
  config.validate(n);
  const double gamma = config.papr_bound;
  if (papr(x_init) > gamma * (1.0 + 1e-9))
    throw InvalidInput("alamm_solve: initial sequence violates the PAPR bound");
  const AlammModel model(zone, mask, n);
  const double rho = config.rho;
  const int p = config.p;
  const double u = mask.u_max();

  StepClock clock;
  ALState state{x_init, RVector::Zero(mask.size()), 1.0, 0, 0, false, {}};
  Point current = evaluate(model, x_init.values());

  auto record_initial = [&] {
    AlammTraceRow row;
    row.wpsl_db = wpsl_db(wpsl_from(zone, current.A), n);
    row.merit = row.merit_before = merit_from(model, current.A, current.e, state.lambda, rho, p, 1.0);
    row.max_stopband_violation = violation_from(mask, current.e);
    row.papr = papr(current.x);
    row.wall_ms = clock.now();
    state.trace.rows.push_back(row);
  };
  record_initial();

  // Best outer iterate among those meeting the stopband cap within slack.
  const auto feasible = [&](const Point& pt) {
    return pt.e.size() == 0 || pt.e.maxCoeff() <= u * (1.0 + config.feasibility_slack);
  };
  std::optional<Point> best;
  double best_wpsl = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Point& pt) {
    const double w = wpsl_from(zone, pt.A);
    if (feasible(pt) && w < best_wpsl) {
      best = pt;
      best_wpsl = w;
    }
  };
  consider(current);

  AlammResult result{x_init, {}, 0, false};
  double prev_wpsl = wpsl_from(zone, current.A);
  for (int outer = 1; outer <= config.outer_max; ++outer) {
    state.outer = outer;
    // The sidelobe term is normalized by its own l_p norm at the start of each
    // outer pass, so it enters W at unit scale next to the penalty terms.
    const double norm = model.weighted_lp_norm(current.x, p);
    const double c_new = norm > 0.0 ? norm : 1.0;
    // The objective gradient scales as 1/c, so multipliers are carried over in
    // proportion to keep the same balance against the stopband terms.
    state.lambda *= state.objective_norm / c_new;
    state.objective_norm = c_new;
    double w_prev = merit_from(model, current.A, current.e, state.lambda, rho, p,
                               state.objective_norm);
    bool moved = false;
    for (int inner = 0; inner < config.inner_max; ++inner) {
      Point next;
      state = squarem_impl(state, model, rho, p, gamma, current, &next, clock);
      const AlammTraceRow& row = state.trace.rows.back();
      if (!std::isfinite(row.merit)) {
        std::ostringstream os;
        os << "alamm_solve: non-finite merit at iteration " << row.iter;
        throw NumericalError(os.str());
      }
      if (state.stalled) break;
      moved = true;
      current = std::move(next);
      const double w_new = row.merit;
      const double rel = std::abs(w_prev - w_new) / std::max(std::abs(w_prev), 1e-300);
      w_prev = w_new;
      if (rel < config.inner_tol) break;
    }
    const RVector lambda_before = state.lambda;
    state = update_multipliers(state, model, rho);
    consider(current);
    result.outer_iterations = outer;

    const double cur_wpsl = wpsl_from(zone, current.A);
    const double viol = violation_from(mask, current.e);
    const double wpsl_change = std::abs(cur_wpsl - prev_wpsl) / std::max(prev_wpsl, 1e-300);
    prev_wpsl = cur_wpsl;
    if (viol < config.stopband_tol * u && wpsl_change < config.outer_tol) {
      result.converged = true;
      break;
    }
    if (!moved && state.lambda == lambda_before) {
      result.converged = true;  // nothing left to change
      break;
    }
  }

  result.x = best ? Sequence(best->x) : Sequence(current.x);
  result.trace = std::move(state.trace);
  return result;
}

}  // namespace dseq
