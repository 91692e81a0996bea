#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dseq/numerics.hpp"

namespace dseq {

/// tr(A X) - phi_coeff * phi (<= or =) rhs.
struct TraceConstraint {
  HermitianMatrix a;
  double phi_coeff = 0.0;
  double rhs = 0.0;
};

/// Semidefinite program over a Hermitian X (dim n) and a free scalar phi:
///
///   minimize  phi_weight * phi + tr(C X) + quad_weight * (quad_offset - tr(G X))^2
///   s.t.      inequalities, equalities, X PSD.
struct SdpSubproblem {
  int n = 0;
  double phi_weight = 0.0;
  HermitianMatrix linear;       // C
  double quad_weight = 0.0;
  HermitianMatrix quad_matrix;  // G
  double quad_offset = 0.0;
  std::vector<TraceConstraint> inequalities;
  std::vector<TraceConstraint> equalities;

  explicit SdpSubproblem(int dim);

  std::size_t constraint_count() const { return inequalities.size() + equalities.size(); }

  /// Objective at (X, phi).
  double objective(const CMatrix& x, double phi) const;
};

enum class ConicStatus { optimal, max_iters, infeasible };

std::string to_string(ConicStatus status);

struct ConicSolution {
  ConicStatus status = ConicStatus::max_iters;
  std::optional<HermitianMatrix> x;  // absent when infeasible
  double phi = 0.0;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;  // max abs constraint residual, unscaled
  double dual_residual = 0.0;
  double duality_gap = 0.0;
};

/// Solve entry point shared by every backend.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual ConicSolution solve(const SdpSubproblem& prob, double tol) const = 0;
};

struct AdmmOptions {
  int max_iter = 20000;
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  double eq_rho_scale = 1e3;
  int adapt_interval = 25;
  bool adaptive_rho = true;
  std::uint64_t seed = 0;  // 0 starts from zero; otherwise a seeded random start
};

/// Reference first-order solver: ADMM on the real vectorization of X with
/// eigenvalue projection onto the PSD cone. Limited to n <= 64.
class AdmmConicBackend : public ConicBackend {
 public:
  static constexpr int kMaxDim = 64;

  AdmmConicBackend() = default;
  explicit AdmmConicBackend(AdmmOptions options) : options_(options) {}

  ConicSolution solve(const SdpSubproblem& prob, double tol) const override;

  const AdmmOptions& options() const { return options_; }

 private:
  AdmmOptions options_;
};

/// Reference backend with default options.
ConicSolution conic_solve(const SdpSubproblem& prob, double tol);

/// Real vectorization with svec(A) . svec(X) = tr(A X) for Hermitian A, X:
/// diagonal entries, then sqrt(2) Re and sqrt(2) Im of the strict upper
/// triangle in column order.
RVector svec(const CMatrix& h);
CMatrix smat(const RVector& v, int n);

/// Dense serialization; Hermitian matrices become {"re": [[..]], "im": [[..]]}.
nlohmann::json to_json(const SdpSubproblem& prob);
SdpSubproblem sdp_from_json(const nlohmann::json& j);

}  // namespace dseq
