#include "boxqp/simplex.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace boxqp {

namespace {

constexpr double kPivotTol = 1e-9;

struct Column {
  std::vector<std::pair<int, double>> entries;
  double cost = 0.0;       // phase-2 cost (minimization)
  int structural = -1;     // index of the structural variable, -1 otherwise
  double sign = 1.0;       // +1 for the positive split, -1 for the negative
  bool artificial = false;
};

}  // namespace

LpSolution solve_lp(const LpProblem& lp, long bland_after) {
  const int rows = lp.rows;
  const int nstruct = static_cast<int>(lp.cols.size());
  if (lp.rhs.size() != rows || lp.obj.size() != nstruct ||
      lp.is_free.size() != static_cast<std::size_t>(nstruct))
    throw std::invalid_argument("solve_lp: inconsistent problem dimensions");
  if (bland_after < 0) bland_after = 10L * std::max(nstruct, 1);

  // Internal minimization columns: structural splits, then slacks, then
  // artificials for rows with negative rhs.
  std::vector<Column> cols;
  cols.reserve(2 * nstruct + 2 * rows);
  for (int j = 0; j < nstruct; ++j) {
    Column c;
    c.entries = lp.cols[j].entries;
    c.cost = -lp.obj(j);
    c.structural = j;
    cols.push_back(c);
    if (lp.is_free[j]) {
      Column neg;
      neg.entries.reserve(c.entries.size());
      for (auto [r, v] : c.entries) neg.entries.emplace_back(r, -v);
      neg.cost = lp.obj(j);
      neg.structural = j;
      neg.sign = -1.0;
      cols.push_back(neg);
    }
  }
  const int first_slack = static_cast<int>(cols.size());
  for (int r = 0; r < rows; ++r) {
    Column c;
    c.entries.emplace_back(r, 1.0);
    cols.push_back(c);
  }
  std::vector<int> basic(rows);
  std::vector<int> artificial_of_row(rows, -1);
  for (int r = 0; r < rows; ++r) {
    if (lp.rhs(r) >= 0.0) {
      basic[r] = first_slack + r;
    } else {
      Column c;
      c.entries.emplace_back(r, -1.0);
      c.artificial = true;
      artificial_of_row[r] = static_cast<int>(cols.size());
      basic[r] = static_cast<int>(cols.size());
      cols.push_back(c);
    }
  }
  const int ncols = static_cast<int>(cols.size());

  Matrix binv = Matrix::Identity(rows, rows);
  Vector xb(rows);
  std::vector<std::uint8_t> in_basis(ncols, 0);
  for (int r = 0; r < rows; ++r) {
    if (artificial_of_row[r] >= 0) binv(r, r) = -1.0;
    xb(r) = std::abs(lp.rhs(r));
    in_basis[basic[r]] = 1;
  }

  auto refactor = [&]() {
    Matrix B = Matrix::Zero(rows, rows);
    for (int r = 0; r < rows; ++r)
      for (auto [row, val] : cols[basic[r]].entries) B(row, r) = val;
    Eigen::PartialPivLU<Matrix> lu(B);
    binv = lu.inverse();
    xb = binv * lp.rhs;
  };

  Vector lambda(rows), dir(rows);
  long degenerate = 0;
  int pivots = 0;
  const long pivot_limit = 50000L + 40L * (ncols + rows);

  auto cost_of = [&](int j, int phase) -> double {
    if (phase == 1) return cols[j].artificial ? 1.0 : 0.0;
    return cols[j].cost;
  };

  double cost_scale = 1.0;
  for (int j = 0; j < nstruct; ++j) cost_scale = std::max(cost_scale, std::abs(lp.obj(j)));
  const double rc_tol = 1e-9 * cost_scale;

  for (int phase = 1; phase <= 2; ++phase) {
    if (phase == 1) {
      bool any_artificial = false;
      for (int r = 0; r < rows; ++r) any_artificial |= artificial_of_row[r] >= 0;
      if (!any_artificial) continue;
    }
    bool fresh_basis = false;  // true right after a refactorization
    while (true) {
      if (pivots > pivot_limit)
        throw std::runtime_error("solve_lp: pivot limit exceeded");
      // lambda' = c_B' binv
      for (int r = 0; r < rows; ++r) lambda(r) = cost_of(basic[r], phase);
      lambda = binv.transpose() * lambda;

      const bool bland = degenerate > bland_after;
      int enter = -1;
      double best_rc = -rc_tol;
      for (int j = 0; j < ncols; ++j) {
        if (in_basis[j]) continue;
        if (cols[j].artificial) continue;  // artificials never re-enter
        double rc = cost_of(j, phase);
        for (auto [r, v] : cols[j].entries) rc -= lambda(r) * v;
        if (rc < best_rc) {
          enter = j;
          if (bland) break;
          best_rc = rc;
        }
      }
      if (enter < 0) break;  // phase optimal

      dir.setZero();
      for (auto [r, v] : cols[enter].entries) dir += v * binv.col(r);

      // Ratio test. In phase 2 a basic artificial sits at zero; if its value
      // would grow it is expelled by a degenerate pivot instead, keeping the
      // original rows honest.
      int leave = -1;
      double step = std::numeric_limits<double>::infinity();
      if (phase == 2) {
        for (int r = 0; r < rows; ++r) {
          if (cols[basic[r]].artificial && dir(r) < -kPivotTol) {
            leave = r;
            step = 0.0;
            break;
          }
        }
      }
      if (leave < 0) {
        for (int r = 0; r < rows; ++r) {
          if (dir(r) <= kPivotTol) continue;
          const double ratio = std::max(xb(r), 0.0) / dir(r);
          if (ratio < step - 1e-12 ||
              (ratio < step + 1e-12 &&
               (leave < 0 ||
                (bland ? basic[r] < basic[leave]
                       : std::abs(dir(r)) > std::abs(dir(leave)))))) {
            step = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) {
        // rule out a stale basis inverse before declaring unboundedness
        if (!fresh_basis) {
          refactor();
          fresh_basis = true;
          continue;
        }
        if (phase == 1)
          throw std::runtime_error("solve_lp: unbounded phase-1 problem");
        LpSolution sol;
        sol.status = LpStatus::unbounded;
        sol.pivots = pivots;
        // improving ray: entering variable grows, basics move along -dir
        sol.ray = Vector::Zero(nstruct);
        if (cols[enter].structural >= 0)
          sol.ray(cols[enter].structural) += cols[enter].sign;
        for (int r = 0; r < rows; ++r) {
          const Column& bc = cols[basic[r]];
          if (bc.structural >= 0 && dir(r) != 0.0)
            sol.ray(bc.structural) -= bc.sign * dir(r);
        }
        return sol;
      }
      fresh_basis = false;

      if (step <= 1e-12) ++degenerate;
      xb -= step * dir;
      xb(leave) = step;
      in_basis[basic[leave]] = 0;
      in_basis[enter] = 1;
      basic[leave] = enter;

      const double piv = dir(leave);
      binv.row(leave) /= piv;
      for (int r = 0; r < rows; ++r) {
        if (r == leave) continue;
        const double f = dir(r);
        if (f != 0.0) binv.row(r) -= f * binv.row(leave);
      }
      ++pivots;
      if (pivots % 200 == 0) refactor();
    }

    if (phase == 1) {
      double infeas = 0.0;
      for (int r = 0; r < rows; ++r)
        if (cols[basic[r]].artificial) infeas += std::max(xb(r), 0.0);
      if (infeas > 1e-7 * (1.0 + lp.rhs.cwiseAbs().maxCoeff())) {
        LpSolution sol;
        sol.status = LpStatus::infeasible;
        sol.pivots = pivots;
        return sol;
      }
      refactor();
    }
  }

  LpSolution sol;
  sol.status = LpStatus::optimal;
  sol.pivots = pivots;
  sol.w = Vector::Zero(nstruct);
  for (int r = 0; r < rows; ++r) {
    const Column& c = cols[basic[r]];
    if (c.structural >= 0) sol.w(c.structural) += c.sign * std::max(xb(r), 0.0);
  }
  sol.row_slack = lp.rhs;
  for (int j = 0; j < nstruct; ++j) {
    if (sol.w(j) == 0.0) continue;
    for (auto [r, v] : lp.cols[j].entries) sol.row_slack(r) -= v * sol.w(j);
  }
  for (int r = 0; r < rows; ++r) lambda(r) = cols[basic[r]].cost;
  sol.dual = -(binv.transpose() * lambda);
  sol.objective = lp.obj.dot(sol.w);
  sol.duality_gap = std::abs(sol.objective - lp.rhs.dot(sol.dual));
  return sol;
}

}  // namespace boxqp
