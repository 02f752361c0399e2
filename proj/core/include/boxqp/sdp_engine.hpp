#ifndef BOXQP_SDP_ENGINE_HPP
#define BOXQP_SDP_ENGINE_HPP

#include <algorithm>
#include <chrono>
#include <iosfwd>
#include <optional>

#include "boxqp/relaxation.hpp"

namespace boxqp {

enum class SolveStatus { converged, iteration_limit, stalled };

// Approximate primal/dual iterates for the standard-form problem
//   min Qt . Xt  s.t.  Xt(0,0) = 1, B(Xt) >= b, Xt >= 0, Xt psd,
// with multipliers y (border normalization), v (inequalities), S
// (elementwise nonnegativity) and Z (psd cone).
struct SdpSolution {
  LiftedPoint primal;
  double raw_objective = 0.0;  // Qt . Xt
  double dual_y = 0.0;
  Vector dual_v;
  Matrix dual_S;
  Matrix dual_Z;
  Vector slack;        // inequality slack iterate, reused by warm starts
  double penalty = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::iteration_limit;
};

struct SolverConfig {
  double tolerance = 1e-4;      // relative KKT residual target
  int max_iterations = 20000;
  double penalty_init = 1.0;
  double penalty_factor = 1.5;  // applied when the residual ratio trips
  double penalty_trigger = 10.0;
  std::optional<SdpSolution> warm_start;
  std::ostream* trace = nullptr;  // per-check CSV: iter,primal,dual,gap,objective
  // wall-clock cutoff checked at every residual check; on expiry the solve
  // returns its current iterates with status iteration_limit
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Nearest (Frobenius) positive semidefinite matrix: eigendecompose and clamp
// negative eigenvalues to zero. Idempotent.
Matrix psd_project(const Matrix& M);

// Three-block ADMM on the dual: a CG solve for (y, v), closed-form
// projections for (S, t) and (Z), and multiplier updates that keep the
// primal iterate psd by construction. Deterministic for fixed inputs.
SdpSolution solve(const RelaxationModel& model, const SolverConfig& config);

// Residuals are measured on the sigma-normalized problem,
// sigma = max(1, ||Qt||_F):
//   primal: border/inequality violation over 1 + ||(1, b)||, elementwise
//           negativity and psd violation of Xt over 1 + ||Xt||_F
//   dual:   ||Qt/s - E11 y/s - B*(v/s) - Z/s - S/s||_F over 1 + ||Qt/s||_F,
//           plus negativity of v/s, S/s and the psd violation of Z/s
//   gap:    |primal obj - dual obj| / (1 + |primal obj| + |dual obj|), scaled
// max_residual() reproduces SdpSolution::kkt_residual.
struct ResidualReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double max_residual() const { return std::max({primal, dual, gap}); }
};

ResidualReport residuals(const RelaxationModel& model, const SdpSolution& sol);

}  // namespace boxqp

#endif
