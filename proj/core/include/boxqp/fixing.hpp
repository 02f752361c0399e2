#ifndef BOXQP_FIXING_HPP
#define BOXQP_FIXING_HPP

#include <optional>
#include <utility>

#include "boxqp/bounding.hpp"

namespace boxqp {

// Partition of an instance's indices: fixed to 0, fixed to 1, and the free
// remainder. u is sorted ascending; u[k] is the original index of reduced
// variable k.
struct FixState {
  std::vector<int> f0;
  std::vector<int> f1;
  std::vector<int> u;
};

FixState identity_fix_state(int n);

// T0 = {i in N : x*_i <= eps2}, T1 = {i in N : x*_i >= 1 - eps2}; indices at
// exactly eps2 distance from both ends go to T0 so the sets stay disjoint.
std::pair<std::vector<int>, std::vector<int>> select_candidates(
    const Vector& x_star, const std::vector<int>& n_set, double eps2);

struct FixAttempt {
  std::vector<int> t0;
  std::vector<int> t1;
  double alpha_certified = 0.0;  // certified budget-problem bound + constant
  bool fixed = false;
  double budget_rhs = 0.0;       // |T| - 1 + eps1
  bool solved = false;           // an SDP was actually solved
  int sdp_solves = 0;
};

// Solves the node relaxation with the budget row
//   sum_{T0} (1 - x_i) + sum_{T1} x_i <= |T| - 1 + eps1
// and certifies; the variables in T are fixed when the certified bound
// reaches ub. An uncertifiable solve leaves fixed == false.
FixAttempt attempt_fixing(const Instance& inst,
                          const std::vector<LinearConstraint>& cuts,
                          const std::vector<int>& t0, const std::vector<int>& t1,
                          double ub, double eps1, const BoundConfig& cfg,
                          const SdpSolution* warm = nullptr,
                          const ConstraintCatalog* warm_catalog = nullptr);

// Eliminates the fixed variables: Hessian Q^{UU}, linear term
// Q^{U F1} 1 + c^U, constant increased by 0.5 1'Q^{F1 F1} 1 + (c^{F1})' 1.
Instance reduce(const Instance& inst, const FixState& state);

struct FixOutcome {
  FixAttempt attempt;
  FixState delta;  // populated when attempt.fixed
  std::optional<Instance> reduced;
};

// One candidate selection, at most one SDP solve, one fixing decision.
FixOutcome multiple_fixing(const Instance& inst,
                           const std::vector<LinearConstraint>& cuts,
                           const Vector& x_star, double ub, double eps1,
                           double eps2, const BoundConfig& cfg,
                           const SdpSolution* warm = nullptr,
                           const ConstraintCatalog* warm_catalog = nullptr);

}  // namespace boxqp

#endif
