#include "boxqp/oracle.hpp"

#include <Eigen/LU>
#include <limits>

namespace boxqp {

OracleResult kkt_enumeration_oracle(const Instance& inst) {
  const int n = inst.n;
  if (n > 12)
    throw std::invalid_argument("kkt_enumeration_oracle: n > 12 exceeds the 3^n budget");

  std::vector<int> digit(n, 0);  // 0 -> x=0, 1 -> x=1, 2 -> free
  Vector x(n);
  OracleResult best;
  best.value = std::numeric_limits<double>::infinity();

  std::vector<int> free_idx;
  free_idx.reserve(n);
  const double tol = 1e-9;

  while (true) {
    free_idx.clear();
    for (int i = 0; i < n; ++i) {
      if (digit[i] == 2)
        free_idx.push_back(i);
      else
        x(i) = static_cast<double>(digit[i]);
    }

    bool feasible = true;
    if (!free_idx.empty()) {
      const int f = static_cast<int>(free_idx.size());
      Matrix qff(f, f);
      Vector rhs(f);
      for (int a = 0; a < f; ++a) {
        const int i = free_idx[a];
        double ones_term = 0.0;
        for (int j = 0; j < n; ++j)
          if (digit[j] == 1) ones_term += inst.Q(i, j);
        rhs(a) = -inst.c(i) - ones_term;
        for (int b = 0; b < f; ++b) qff(a, b) = inst.Q(i, free_idx[b]);
      }
      Eigen::FullPivLU<Matrix> lu(qff);
      if (!lu.isInvertible()) {
        feasible = false;  // singular pattern, reachable via sub-patterns
      } else {
        Vector xf = lu.solve(rhs);
        for (int a = 0; a < f; ++a) {
          if (xf(a) < -tol || xf(a) > 1.0 + tol) {
            feasible = false;
            break;
          }
          x(free_idx[a]) = std::min(1.0, std::max(0.0, xf(a)));
        }
      }
    }

    if (feasible) {
      const double v = evaluate(inst, x);
      if (v < best.value) {
        best.value = v;
        best.x = x;
      }
    }

    int k = 0;
    while (k < n && ++digit[k] == 3) digit[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace boxqp
