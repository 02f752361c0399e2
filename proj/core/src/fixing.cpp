#include "boxqp/fixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace boxqp {

FixState identity_fix_state(int n) {
  FixState state;
  state.u.resize(n);
  std::iota(state.u.begin(), state.u.end(), 0);
  return state;
}

std::pair<std::vector<int>, std::vector<int>> select_candidates(
    const Vector& x_star, const std::vector<int>& n_set, double eps2) {
  std::vector<int> t0, t1;
  for (int i : n_set) {
    const double xi = x_star(i);
    if (xi <= eps2)
      t0.push_back(i);
    else if (xi >= 1.0 - eps2)
      t1.push_back(i);
  }
  return {std::move(t0), std::move(t1)};
}

FixAttempt attempt_fixing(const Instance& inst,
                          const std::vector<LinearConstraint>& cuts,
                          const std::vector<int>& t0, const std::vector<int>& t1,
                          double ub, double eps1, const BoundConfig& cfg,
                          const SdpSolution* warm,
                          const ConstraintCatalog* warm_catalog) {
  FixAttempt attempt;
  attempt.t0 = t0;
  attempt.t1 = t1;
  if (t0.empty() && t1.empty())
    throw std::invalid_argument("attempt_fixing: empty candidate set");
  attempt.budget_rhs = static_cast<double>(t0.size() + t1.size()) - 1.0 + eps1;

  std::vector<LinearConstraint> extra = cuts;
  extra.push_back(make_fixing_budget(t0, t1, eps1));
  const RelaxationModel model = assemble_model(inst, extra);

  std::optional<SdpSolution> remapped;
  if (warm && warm->primal.dim() == inst.n) {
    if (warm_catalog) {
      remapped = remap_warm_start(*warm, *warm_catalog, model);
    } else {
      // fall back to the node model rows without the budget row
      RelaxationModel node_model = assemble_model(inst, cuts);
      remapped = remap_warm_start(*warm, node_model.catalog, model);
    }
  }
  CertifiedSolve cs =
      solve_with_certificate(model, cfg, remapped ? &*remapped : nullptr,
                             inst.objective_constant,
                             CertificateEvent::Context::fixing);
  attempt.solved = true;
  attempt.sdp_solves = cs.sdp_solves;
  if (cs.bound.status == CertStatus::certified) {
    attempt.alpha_certified = cs.bound.value + inst.objective_constant;
    attempt.fixed = attempt.alpha_certified >= ub;
  } else if (cs.bound.status == CertStatus::primal_infeasible) {
    // no feasible lift disagrees with the pattern at all
    attempt.alpha_certified = std::numeric_limits<double>::infinity();
    attempt.fixed = true;
  } else {
    attempt.alpha_certified = -std::numeric_limits<double>::infinity();
    attempt.fixed = false;
  }
  return attempt;
}

Instance reduce(const Instance& inst, const FixState& state) {
  const int n = inst.n;
  const int nu = static_cast<int>(state.u.size());
  if (static_cast<int>(state.f0.size() + state.f1.size()) + nu != n)
    throw std::invalid_argument("reduce: sets do not partition the indices");
  if (nu < 1) throw std::invalid_argument("reduce: no free variables left");

  Matrix Qr(nu, nu);
  Vector cr(nu);
  for (int a = 0; a < nu; ++a) {
    const int i = state.u[a];
    for (int b = 0; b < nu; ++b) Qr(a, b) = inst.Q(i, state.u[b]);
    double ones = 0.0;
    for (int j : state.f1) ones += inst.Q(i, j);
    cr(a) = inst.c(i) + ones;
  }
  double constant = inst.objective_constant;
  for (int i : state.f1) {
    constant += inst.c(i);
    for (int j : state.f1) constant += 0.5 * inst.Q(i, j);
  }
  std::optional<Vector> lambda;
  if (inst.lambda_shift) {
    Vector lr(nu);
    for (int a = 0; a < nu; ++a) lr(a) = (*inst.lambda_shift)(state.u[a]);
    lambda = std::move(lr);
  }
  return make_instance(std::move(Qr), std::move(cr), constant, inst.origin,
                       std::move(lambda));
}

FixOutcome multiple_fixing(const Instance& inst,
                           const std::vector<LinearConstraint>& cuts,
                           const Vector& x_star, double ub, double eps1,
                           double eps2, const BoundConfig& cfg,
                           const SdpSolution* warm,
                           const ConstraintCatalog* warm_catalog) {
  FixOutcome outcome;
  const IndexClassification cls = classify(inst);
  auto [t0, t1] = select_candidates(x_star.cwiseMax(0.0).cwiseMin(1.0),
                                    cls.n_set, eps2);
  if (t0.empty() && t1.empty()) return outcome;

  outcome.attempt = attempt_fixing(inst, cuts, t0, t1, ub, eps1, cfg, warm,
                                   warm_catalog);
  if (!outcome.attempt.fixed) return outcome;

  outcome.delta.f0 = t0;
  outcome.delta.f1 = t1;
  std::vector<std::uint8_t> fixed(inst.n, 0);
  for (int i : t0) fixed[i] = 1;
  for (int i : t1) fixed[i] = 1;
  for (int i = 0; i < inst.n; ++i)
    if (!fixed[i]) outcome.delta.u.push_back(i);
  if (!outcome.delta.u.empty()) outcome.reduced = reduce(inst, outcome.delta);
  return outcome;
}

}  // namespace boxqp
