#ifndef BOXQP_SIMPLEX_HPP
#define BOXQP_SIMPLEX_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "boxqp/instance.hpp"

namespace boxqp {

struct SparseColumn {
  std::vector<std::pair<int, double>> entries;  // (row, value)
};

// maximize obj'w  s.t.  A w <= rhs,  w_j >= 0 unless is_free[j].
struct LpProblem {
  int rows = 0;
  std::vector<SparseColumn> cols;
  Vector obj;
  Vector rhs;
  std::vector<std::uint8_t> is_free;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vector w;           // structural variable values
  Vector row_slack;   // rhs - A w, recomputed from w
  Vector dual;        // row prices, >= 0
  Vector ray;         // improving feasible direction when unbounded
  double objective = 0.0;
  double duality_gap = 0.0;  // |obj'w - rhs'dual|
  int pivots = 0;
};

// Two-phase revised simplex with a dense basis inverse. Dantzig pricing,
// switching permanently to Bland's rule once `bland_after` degenerate pivots
// have accumulated (default 10 * number of structural columns). Deterministic.
LpSolution solve_lp(const LpProblem& lp, long bland_after = -1);

}  // namespace boxqp

#endif
