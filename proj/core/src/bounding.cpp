#include "boxqp/bounding.hpp"

#include <cmath>
#include <limits>

namespace boxqp {

double relative_gap(double lb, double ub) {
  return (ub - lb) / std::max(1.0, std::abs(ub));
}

SdpSolution remap_warm_start(const SdpSolution& sol, const ConstraintCatalog& from,
                             const RelaxationModel& to) {
  SdpSolution warm = sol;
  const auto& new_rows = to.catalog.constraints();
  const int m = static_cast<int>(new_rows.size());
  warm.dual_v = Vector::Zero(m);
  warm.slack = Vector::Zero(m);
  const Matrix Xt = sol.primal.bordered();

  // index of each old row by identity
  const auto& old_rows = from.constraints();
  auto match = [&](const LinearConstraint& row) -> int {
    for (std::size_t i = 0; i < old_rows.size(); ++i)
      if (old_rows[i].kind == row.kind && old_rows[i].idx == row.idx)
        return static_cast<int>(i);
    return -1;
  };
  for (int i = 0; i < m; ++i) {
    const int j = match(new_rows[i]);
    if (j >= 0) {
      warm.dual_v(i) = sol.dual_v(j);
      warm.slack(i) = sol.slack(j);
    } else {
      warm.slack(i) = std::max(new_rows[i].slack(Xt), 0.0);
    }
  }
  return warm;
}

CertifiedSolve solve_with_certificate(const RelaxationModel& model,
                                      const BoundConfig& cfg,
                                      const SdpSolution* warm,
                                      double objective_constant,
                                      CertificateEvent::Context context) {
  CertifiedSolve out;
  SolverConfig scfg = cfg.solver;
  scfg.deadline = cfg.deadline;
  if (warm) scfg.warm_start = *warm;
  out.solution = solve(model, scfg);
  out.sdp_solves = 1;
  out.bound = certify(model, out.solution);
  if (out.bound.status == CertStatus::lp_infeasible) {
    // One defensive retry at a tighter tolerance before giving up.
    scfg.tolerance = cfg.solver.tolerance / 10.0;
    scfg.warm_start = out.solution;
    out.solution = solve(model, scfg);
    ++out.sdp_solves;
    out.bound = certify(model, out.solution);
  }
  if (cfg.observer && out.bound.status == CertStatus::certified) {
    CertificateEvent event;
    event.context = context;
    event.model = &model;
    event.bound = &out.bound;
    event.objective_constant = objective_constant;
    event.node_id = cfg.node_id;
    cfg.observer(event);
  }
  return out;
}

BoundResult bound_node(const Instance& inst,
                       const std::vector<LinearConstraint>& inherited_cuts,
                       double ub, const BoundConfig& cfg) {
  RelaxationModel model = assemble_model(inst, inherited_cuts);
  BoundResult result;
  result.lower_bound = -std::numeric_limits<double>::infinity();

  std::optional<SdpSolution> warm;
  if (cfg.warm_solution && cfg.warm_catalog &&
      cfg.warm_solution->primal.dim() == inst.n)
    warm = remap_warm_start(*cfg.warm_solution, *cfg.warm_catalog, model);
  ConstraintCatalog prev_catalog;
  double prev_certified = std::numeric_limits<double>::quiet_NaN();

  for (int round = 0; round < cfg.max_rounds; ++round) {
    const SdpSolution* warm_ptr = warm ? &*warm : nullptr;
    CertifiedSolve cs = solve_with_certificate(model, cfg, warm_ptr,
                                               inst.objective_constant,
                                               CertificateEvent::Context::bounding);
    result.sdp_solves += cs.sdp_solves;
    result.solution = std::move(cs.solution);
    result.rounds = round + 1;

    RoundLog log;
    double certified = -std::numeric_limits<double>::infinity();
    if (cs.bound.status == CertStatus::certified) {
      certified = cs.bound.value + inst.objective_constant;
      result.lower_bound = std::max(result.lower_bound, certified);
    } else if (cs.bound.status == CertStatus::primal_infeasible) {
      // verified empty relaxation: the node region holds no candidate
      certified = std::numeric_limits<double>::infinity();
      result.lower_bound = certified;
    } else {
      result.best_effort = true;
    }
    log.certified = certified;
    result.per_round.push_back(log);

    if (cs.bound.status == CertStatus::primal_infeasible) break;

    if (result.solution.status == SolveStatus::stalled) {
      result.best_effort = true;
      break;
    }
    if (relative_gap(result.lower_bound, ub) <= cfg.prune_gap) break;
    if (cfg.deadline && std::chrono::steady_clock::now() >= *cfg.deadline) break;
    if (round + 1 >= cfg.max_rounds) break;
    if (round >= 1 && std::isfinite(certified) && std::isfinite(prev_certified) &&
        (certified - prev_certified) / std::max(1.0, std::abs(prev_certified)) <
            cfg.improvement_tol)
      break;
    prev_certified = certified;

    // Separate and keep only triangles not already in the catalog: an active
    // row can show a small spurious violation at first-order accuracy.
    std::vector<ViolatedCut> violated =
        separate_triangles(result.solution.primal, cfg.max_separated, cfg.violation_tol);
    std::vector<ViolatedCut> fresh;
    fresh.reserve(violated.size());
    for (auto& vc : violated)
      if (!model.catalog.contains(vc.cut.kind, vc.cut.idx)) fresh.push_back(std::move(vc));
    if (static_cast<long>(fresh.size()) <
        static_cast<long>(cfg.violated_floor_per_n) * inst.n)
      break;

    prev_catalog = model.catalog;
    const std::size_t to_add = std::max<std::size_t>(
        1, static_cast<std::size_t>(cfg.add_fraction * static_cast<double>(fresh.size())));
    int added = 0;
    for (std::size_t i = 0; i < to_add && i < fresh.size(); ++i)
      if (model.catalog.add(fresh[i].cut)) ++added;

    const std::size_t before = model.catalog.size();
    model.catalog =
        purge_inactive(model.catalog, result.solution.primal, cfg.purge_slack_tol);
    result.per_round.back().cuts_added = added;
    result.per_round.back().cuts_purged = static_cast<int>(before - model.catalog.size());

    warm = remap_warm_start(result.solution, prev_catalog, model);
  }

  result.lifted = result.solution.primal;
  result.final_catalog = model.catalog;
  const ConstraintCatalog final_active =
      purge_inactive(model.catalog, result.solution.primal, cfg.purge_slack_tol);
  for (const auto& row : final_active.constraints())
    if (is_triangle(row.kind)) result.active_cuts.push_back(row);
  return result;
}

}  // namespace boxqp
