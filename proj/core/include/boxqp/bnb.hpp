#ifndef BOXQP_BNB_HPP
#define BOXQP_BNB_HPP

#include <iosfwd>

#include "boxqp/bounding.hpp"
#include "boxqp/fixing.hpp"
#include "boxqp/heuristics.hpp"

namespace boxqp {

enum class BranchKind { binary, ternary };

struct BranchChoice {
  int variable = -1;
  BranchKind kind = BranchKind::binary;
};

struct Node {
  long id = 0;
  long parent = -1;
  int depth = 0;
  FixState fix;        // original-index bookkeeping; fix.u maps local -> original
  Instance inst;       // reduced instance, dimension |fix.u|
  std::vector<LinearConstraint> cuts;          // inherited triangle cuts, local indices
  std::vector<LinearConstraint> ternary_rows;  // stationarity equalities as >= pairs
  std::vector<int> ternary_vars;               // local indices carrying such rows
  double lower_bound = 0.0;  // certified, original objective units
  LiftedPoint lifted;
  SdpSolution last_solution;
  ConstraintCatalog last_catalog;  // row alignment of last_solution.dual_v
  int rounds = 0;
};

struct SolveConfig {
  double gap_tol = 1e-4;         // relative optimality gap (0.01%)
  double time_limit_s = 0.0;     // 0 disables the limit
  int threads = 2;
  bool fixing_enabled = true;
  double fixing_gate = 0.01;     // attempt fixing only under 1% node gap
  double eps1 = 0.01;
  double eps2 = 0.01;
  int multistart_count = 200;
  int rounding_samples = 1000;
  double sdp_tol = 1e-4;
  std::size_t cp_max_separated = 100000;
  double cp_add_fraction = 0.10;
  double cp_violation_tol = 1e-4;
  double cp_purge_tol = 1e-3;
  int cp_violated_floor = 10;    // times n
  double cp_improvement_tol = 1e-4;
  int cp_max_rounds = 30;
  std::uint64_t seed = 0;
  Convention convention = Convention::min;
  bool deterministic = false;
  bool rounding_one_flip = true;
  std::ostream* log = nullptr;   // JSON lines, one record per node
  CertificateObserver certificate_observer;
};

struct SolveReport {
  enum class Status { optimal, time_limit };
  Status status = Status::optimal;
  double optimal_value = 0.0;
  Vector optimal_x;
  long nodes_processed = 0;
  long sdp_fix_count = 0;    // SDPs solved for fixing
  long fix_success_count = 0;
  long root_fix_count = 0;   // variables fixed at the root
  int cp_rounds_root = 0;
  double gap_root_rlt = 0.0;  // percent, against the multistart incumbent
  double gap_root_cp = 0.0;   // percent
  double wall_time_s = 0.0;
  long total_sdp_solves = 0;  // bounding + fixing
  double frontier_bound = 0.0;
};

// N rule: the free variable furthest from a binary value, binary branching.
// P rule (only when no N variable is free): the variable maximizing the
// lifting error sum_k Q_kj (x_j x_k - X_jk), ternary branching; variables in
// `ternary_constrained` are skipped. Ties break to the smallest index.
// variable == -1 when nothing is selectable.
BranchChoice select_branch_variable(const Instance& inst, const LiftedPoint& point,
                                    const IndexClassification& cls,
                                    const std::vector<int>& ternary_constrained = {});

// Children of a node: two reduced instances for a binary branch; for a
// ternary branch additionally a same-dimension child carrying Q_i x = -c_i
// as a pair of opposing >= rows. Children inherit the node's triangle cuts
// that survive the reduction (dropped, not substituted, when they touch a
// fixed variable). Ids are left at -1 for the caller to assign.
std::vector<Node> branch(const Node& node, const BranchChoice& choice);

// Best-first branch and bound.
SolveReport solve(const Instance& inst, const SolveConfig& cfg);

}  // namespace boxqp

#endif
