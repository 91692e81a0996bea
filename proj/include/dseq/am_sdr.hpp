#pragma once

#include <optional>
#include <string>

#include "dseq/conic.hpp"
#include "dseq/trace.hpp"
#include "dseq/waveform.hpp"

namespace dseq {

/// X1-step: minimize (1 - eta) phi + eta (N^2 - tr(X1 X2))^2 over X1, with
///   tr(w_k U^H X1 U X2) <= phi on the zone, tr(F_s X1) <= U_max,
///   tr(X1) = N, tr(E_n X1) <= gamma, X1 PSD.
SdpSubproblem build_subproblem_X1(const HermitianMatrix& x2, const ZoneOfOperation& zone,
                                  const SpectralMask& mask, double gamma, double eta);

/// X2-step: minimize (1 - eta) phi - eta tr(X1 X2) over X2 with the mirrored
/// constraints.
SdpSubproblem build_subproblem_X2(const HermitianMatrix& x1, const ZoneOfOperation& zone,
                                  const SpectralMask& mask, double gamma, double eta);

/// 1 - tr(X1 X2) / N^2.
double coupling_gap(const HermitianMatrix& x1, const HermitianMatrix& x2, int n);

struct AMState {
  HermitianMatrix x1;
  HermitianMatrix x2;
  double phi = 0.0;
  int t = 0;
  double gap = 0.0;
};

struct RankOneExtraction {
  double sigma_ratio = 0.0;  // sigma_1 / sigma_0
  std::optional<Sequence> x; // set only when sigma_ratio <= tol_r
};

/// Leading singular pair of X, projected back onto the energy/PAPR set and
/// rotated so that x_1 is real and non-negative.
RankOneExtraction extract_rank_one(const HermitianMatrix& x, double gamma, double tol_r);

enum class AmStatus { converged, max_iters, rank_one_failure, infeasible };

std::string to_string(AmStatus status);

struct AmResult {
  AmStatus status = AmStatus::max_iters;
  std::optional<Sequence> x;  // absent on rank-one failure or infeasibility
  AmTrace trace;
  AMState state;
  double sigma_ratio = 0.0;
};

/// Alternates the two subproblems from X1 = X2 = x x^H until the coupling gap
/// drops to tol_x or t_max sweeps have run, then extracts a sequence from X2.
/// Uses the reference backend when none is given.
AmResult am_solve(const Sequence& x_init, const ZoneOfOperation& zone, const SpectralMask& mask,
                  const DesignConfig& config, const ConicBackend* backend = nullptr);

}  // namespace dseq
