#ifndef BOXQP_BOUNDING_HPP
#define BOXQP_BOUNDING_HPP

#include <chrono>
#include <functional>
#include <optional>

#include "boxqp/safe_bound.hpp"

namespace boxqp {

// (ub - lb) / max(1, |ub|); used uniformly for pruning, the fixing gate and
// termination.
double relative_gap(double lb, double ub);

// Certificates produced during a run, observable for auditing. The pointers
// are valid only for the duration of the callback.
struct CertificateEvent {
  enum class Context { bounding, fixing };
  Context context = Context::bounding;
  const RelaxationModel* model = nullptr;
  const CertifiedBound* bound = nullptr;
  double objective_constant = 0.0;
  long node_id = -1;
};
using CertificateObserver = std::function<void(const CertificateEvent&)>;

struct BoundConfig {
  std::size_t max_separated = 100000;  // scanned-violated cap per round
  double violation_tol = 1e-4;
  double add_fraction = 0.10;          // share of the violated set added
  double purge_slack_tol = 1e-3;
  double improvement_tol = 1e-4;       // relative bound improvement floor
  int violated_floor_per_n = 10;       // stop when violated < this * n
  int max_rounds = 30;
  double prune_gap = 1e-4;
  SolverConfig solver;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  CertificateObserver observer;        // nullable
  long node_id = -1;
  // round-0 warm start: dual iterates aligned with warm_catalog are remapped
  // onto the assembled model (both pointers must outlive the call)
  const SdpSolution* warm_solution = nullptr;
  const ConstraintCatalog* warm_catalog = nullptr;
};

// Transfers dual iterates onto a changed catalog: multipliers of surviving
// rows are kept, new rows start at zero.
SdpSolution remap_warm_start(const SdpSolution& sol, const ConstraintCatalog& from,
                             const RelaxationModel& to);

// One SDP solve plus certification; on an uncertifiable outcome the solve is
// retried once at tolerance/10 from the last iterates.
struct CertifiedSolve {
  SdpSolution solution;
  CertifiedBound bound;
  int sdp_solves = 0;
};
CertifiedSolve solve_with_certificate(const RelaxationModel& model,
                                      const BoundConfig& cfg,
                                      const SdpSolution* warm,
                                      double objective_constant,
                                      CertificateEvent::Context context);

struct RoundLog {
  double certified = 0.0;  // certified bound of the round, instance units
  int cuts_added = 0;
  int cuts_purged = 0;
};

struct BoundResult {
  double lower_bound = 0.0;  // running max of certified values + constant
  LiftedPoint lifted;
  std::vector<LinearConstraint> active_cuts;  // post-purge triangles
  int rounds = 0;
  std::vector<RoundLog> per_round;
  SdpSolution solution;  // final iterates, for warm starts downstream
  ConstraintCatalog final_catalog;  // row alignment of solution.dual_v
  bool best_effort = false;
  int sdp_solves = 0;
};

// Cutting-plane bounding: round 0 solves RLT + inherited cuts, later rounds
// separate triangles, add the top add_fraction of the new violated ones,
// purge inactive triangles and re-solve warm-started. Stops when the number
// of new violated triangles falls under violated_floor_per_n * n, the
// relative improvement drops below improvement_tol, the bound prunes against
// ub, or the round cap is hit.
BoundResult bound_node(const Instance& inst,
                       const std::vector<LinearConstraint>& inherited_cuts,
                       double ub, const BoundConfig& cfg);

}  // namespace boxqp

#endif
