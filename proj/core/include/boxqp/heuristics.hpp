#ifndef BOXQP_HEURISTICS_HPP
#define BOXQP_HEURISTICS_HPP

#include <cstdint>

#include "boxqp/relaxation.hpp"

namespace boxqp {

enum class IncumbentSource { multistart, node_polish, rounding };

// Feasible point with its exactly re-evaluated objective. For instances of
// binary origin the point is exactly binary.
struct Incumbent {
  Vector x;
  double value = 0.0;
  IncumbentSource source = IncumbentSource::node_polish;
};

// Projected gradient descent with monotone backtracking, stopping when the
// unit-step projected gradient norm falls under 1e-8 or after 5000
// iterations. Instances of binary origin get a monotone per-coordinate
// rounding plus a 1-flip pass on top, so the result stays binary and never
// worse than the continuous point.
Incumbent local_search(const Instance& inst, const Vector& x0);

// Best local_search result over `count` uniform box starts; start k draws
// from a substream derived from (seed, k), so a longer run extends a shorter
// one with the same seed.
Incumbent multistart(const Instance& inst, int count, std::uint64_t seed);

// Gaussian randomized rounding for converted binary instances: samples
// N(x*, X* - x* x*') through an eigenvalue-clamped factor, rounds each
// coordinate to the nearer binary value (0.5 rounds to 1), keeps the best
// against the naively rounded x* baseline and optionally improves the winner
// with a single 1-flip pass.
Incumbent randomized_rounding(const Instance& inst, const LiftedPoint& lifted,
                              int samples, std::uint64_t seed,
                              bool one_flip = true);

Vector round_to_binary(const Vector& x);

// Single left-to-right pass of improving single-coordinate flips.
Vector one_flip_improve(const Instance& inst, Vector z);

}  // namespace boxqp

#endif
