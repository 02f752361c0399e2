#ifndef BOXQP_ORACLE_HPP
#define BOXQP_ORACLE_HPP

#include "boxqp/instance.hpp"

namespace boxqp {

struct OracleResult {
  Vector x;
  double value = 0.0;
};

// Ground-truth global minimum for small instances (n <= 12). Enumerates all
// 3^n assignments of each variable to {at 0, at 1, free}, solves the
// stationarity system on the free block, keeps box-feasible candidates
// (tolerance 1e-9) and returns the best. Every vertex of {0,1}^n is among
// the candidates, so a global minimizer is always found. Patterns whose free
// block is singular are skipped; their minimizers are reachable through
// lower-dimensional patterns. Throws std::invalid_argument for n > 12.
OracleResult kkt_enumeration_oracle(const Instance& inst);

}  // namespace boxqp

#endif
