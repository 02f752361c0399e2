#include "boxqp/heuristics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "boxqp/rng.hpp"

namespace boxqp {

namespace {

Vector clamp_box(Vector x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

// Rounds each coordinate to the endpoint with the smaller objective. Valid
// as a monotone step because the instance diagonal is nonpositive, so the
// objective is concave along every coordinate.
Vector monotone_round(const Instance& inst, Vector x) {
  Vector g = inst.Q * x + inst.c;
  for (int i = 0; i < inst.n; ++i) {
    const double xi = x(i);
    if (xi == 0.0 || xi == 1.0) continue;
    // objective change for moving coordinate i to value b
    auto delta = [&](double b) {
      const double d = b - xi;
      return d * g(i) + 0.5 * inst.Q(i, i) * d * d;
    };
    const double b = delta(0.0) <= delta(1.0) ? 0.0 : 1.0;
    const double step = b - xi;
    x(i) = b;
    g += step * inst.Q.col(i);
  }
  return x;
}

}  // namespace

Vector round_to_binary(const Vector& x) {
  Vector z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) z(i) = x(i) >= 0.5 ? 1.0 : 0.0;
  return z;
}

Vector one_flip_improve(const Instance& inst, Vector z) {
  Vector g = inst.Q * z + inst.c;
  for (int i = 0; i < inst.n; ++i) {
    const double d = 1.0 - 2.0 * z(i);
    const double delta = d * g(i) + 0.5 * inst.Q(i, i);
    if (delta < 0.0) {
      z(i) += d;
      g += d * inst.Q.col(i);
    }
  }
  return z;
}

Incumbent local_search(const Instance& inst, const Vector& x0) {
  Vector x = clamp_box(x0);
  double fx = evaluate(inst, x);
  double alpha = 1.0;
  for (int iter = 0; iter < 5000; ++iter) {
    const Vector g = inst.Q * x + inst.c;
    if ((x - clamp_box(x - g)).norm() <= 1e-8) break;
    bool moved = false;
    while (alpha > 1e-16) {
      Vector xn = clamp_box(x - alpha * g);
      const Vector d = xn - x;
      const double dn = d.squaredNorm();
      if (dn == 0.0) {
        alpha *= 0.5;
        continue;
      }
      const double fn = evaluate(inst, xn);
      if (fn <= fx + g.dot(d) + 0.5 * dn / alpha) {
        x = std::move(xn);
        fx = fn;
        alpha = std::min(alpha * 1.5, 1e8);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }
  if (inst.origin == Origin::converted_binary) {
    x = one_flip_improve(inst, monotone_round(inst, x));
    fx = evaluate(inst, x);
  }
  return {std::move(x), fx, IncumbentSource::node_polish};
}

Incumbent multistart(const Instance& inst, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("multistart: count must be >= 1");
  Incumbent best;
  for (int k = 0; k < count; ++k) {
    SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(k));
    Vector x0(inst.n);
    for (int i = 0; i < inst.n; ++i) x0(i) = rng.uniform01();
    Incumbent cand = local_search(inst, x0);
    if (k == 0 || cand.value < best.value) best = std::move(cand);
  }
  best.source = IncumbentSource::multistart;
  return best;
}

Incumbent randomized_rounding(const Instance& inst, const LiftedPoint& lifted,
                              int samples, std::uint64_t seed, bool one_flip) {
  if (inst.origin != Origin::converted_binary)
    throw std::invalid_argument("randomized_rounding: instance is not of binary origin");
  if (lifted.dim() != inst.n)
    throw std::invalid_argument("randomized_rounding: dimension mismatch");

  const Vector x = clamp_box(lifted.x);
  Matrix cov = lifted.X - lifted.x * lifted.x.transpose();
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix factor = es.eigenvectors() * scale.asDiagonal();

  Vector best_z = round_to_binary(x);  // naive rounding baseline
  double best_v = evaluate(inst, best_z);
  Vector g(inst.n), w(inst.n);
  for (int k = 0; k < samples; ++k) {
    SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(k));
    for (int i = 0; i < inst.n; ++i) g(i) = rng.gaussian();
    w = x + factor * g;
    Vector z = round_to_binary(w);
    const double v = evaluate(inst, z);
    if (v < best_v) {
      best_v = v;
      best_z = std::move(z);
    }
  }
  if (one_flip) {
    best_z = one_flip_improve(inst, std::move(best_z));
    best_v = evaluate(inst, best_z);
  }
  return {std::move(best_z), best_v, IncumbentSource::rounding};
}

}  // namespace boxqp
