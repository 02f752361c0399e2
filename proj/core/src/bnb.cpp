#include "boxqp/bnb.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "boxqp/rng.hpp"
#include "boxqp/simplex.hpp"

namespace boxqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector embed_point(const FixState& fix, int root_n, const Vector& x_local) {
  Vector x = Vector::Zero(root_n);
  for (int i : fix.f1) x(i) = 1.0;
  for (std::size_t k = 0; k < fix.u.size(); ++k) x(fix.u[k]) = x_local(k);
  return x;
}

// Local index translation after removing `removed` (sorted): -1 if removed.
std::vector<int> shift_map(int n, const std::vector<int>& removed) {
  std::vector<int> map(n);
  std::vector<std::uint8_t> gone(n, 0);
  for (int r : removed) gone[r] = 1;
  int next = 0;
  for (int i = 0; i < n; ++i) map[i] = gone[i] ? -1 : next++;
  return map;
}

std::vector<LinearConstraint> remap_triangles(const std::vector<LinearConstraint>& cuts,
                                              const std::vector<int>& map) {
  std::vector<LinearConstraint> out;
  out.reserve(cuts.size());
  for (const auto& cut : cuts) {
    if (!is_triangle(cut.kind)) continue;
    const int i = map[cut.idx[0]], j = map[cut.idx[1]], t = map[cut.idx[2]];
    if (i < 0 || j < 0 || t < 0) continue;
    out.push_back(make_triangle(cut.kind, i, j, t));
  }
  return out;
}

LiftedPoint restrict_point(const LiftedPoint& point, const std::vector<int>& keep) {
  const int k = static_cast<int>(keep.size());
  LiftedPoint out;
  out.x = Vector(k);
  out.X = Matrix(k, k);
  for (int a = 0; a < k; ++a) {
    out.x(a) = point.x(keep[a]);
    for (int b = 0; b < k; ++b) out.X(a, b) = point.X(keep[a], keep[b]);
  }
  return out;
}

// Rebuilds a catalog row of a reconstructible kind at shifted indices.
std::optional<LinearConstraint> rebuild_row(CutKind kind, int i, int j, int t) {
  switch (kind) {
    case CutKind::rlt_nonneg: return make_rlt_nonneg(i, j);
    case CutKind::rlt_le_i: return make_rlt_le_i(i, j);
    case CutKind::rlt_le_j: return make_rlt_le_j(i, j);
    case CutKind::rlt_geq_sum: return make_rlt_geq_sum(i, j);
    case CutKind::rlt_diag_le: return make_rlt_diag_le(i);
    case CutKind::rlt_diag_ge: return make_rlt_diag_ge(i);
    case CutKind::box_lower: return make_box_lower(i);
    case CutKind::box_upper: return make_box_upper(i);
    case CutKind::tri_type1:
    case CutKind::tri_type2:
    case CutKind::tri_type3:
    case CutKind::tri_type4: return make_triangle(kind, i, j, t);
    default: return std::nullopt;  // instance-bound rows do not transfer
  }
}

struct RestrictedWarm {
  SdpSolution solution;
  ConstraintCatalog catalog;
};

// Projects parent dual/primal iterates onto the subspace left after fixing
// the given local variables; used to warm-start child bounding solves.
std::optional<RestrictedWarm> restrict_warm(const SdpSolution& sol,
                                            const ConstraintCatalog& catalog,
                                            int parent_n,
                                            const std::vector<int>& removed) {
  if (sol.primal.dim() != parent_n) return std::nullopt;
  const std::vector<int> map = shift_map(parent_n, removed);
  std::vector<int> keep;
  for (int i = 0; i < parent_n; ++i)
    if (map[i] >= 0) keep.push_back(i);
  if (keep.empty()) return std::nullopt;

  RestrictedWarm out;
  out.solution.dual_y = sol.dual_y;
  out.solution.penalty = sol.penalty;
  const int k = static_cast<int>(keep.size());
  out.solution.primal.x = Vector(k);
  out.solution.primal.X = Matrix(k, k);
  out.solution.dual_S = Matrix(k + 1, k + 1);
  out.solution.dual_Z = Matrix(k + 1, k + 1);
  std::vector<int> bordered{0};
  for (int i : keep) bordered.push_back(i + 1);
  for (int a = 0; a <= k; ++a)
    for (int b = 0; b <= k; ++b) {
      out.solution.dual_S(a, b) = sol.dual_S(bordered[a], bordered[b]);
      out.solution.dual_Z(a, b) = sol.dual_Z(bordered[a], bordered[b]);
    }
  for (int a = 0; a < k; ++a) {
    out.solution.primal.x(a) = sol.primal.x(keep[a]);
    for (int b = 0; b < k; ++b)
      out.solution.primal.X(a, b) = sol.primal.X(keep[a], keep[b]);
  }

  std::vector<double> v, slack;
  const auto& rows = catalog.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    bool dropped = false;
    std::array<int, 3> idx = row.idx;
    for (int& x : idx) {
      if (x < 0) continue;
      if (map[x] < 0) {
        dropped = true;
        break;
      }
      x = map[x];
    }
    if (dropped) continue;
    std::optional<LinearConstraint> rebuilt =
        rebuild_row(row.kind, idx[0], idx[1], idx[2]);
    if (!rebuilt) continue;
    if (!out.catalog.add(std::move(*rebuilt))) continue;
    v.push_back(sol.dual_v(i));
    slack.push_back(sol.slack(i));
  }
  out.solution.dual_v = Eigen::Map<Vector>(v.data(), v.size());
  out.solution.slack = Eigen::Map<Vector>(slack.data(), slack.size());
  return out;
}

// Merges a local-index fix delta into the global bookkeeping.
FixState merge_fix(const FixState& fix, const std::vector<int>& local_f0,
                   const std::vector<int>& local_f1) {
  FixState next;
  next.f0 = fix.f0;
  next.f1 = fix.f1;
  std::vector<std::uint8_t> gone(fix.u.size(), 0);
  for (int l : local_f0) {
    next.f0.push_back(fix.u[l]);
    gone[l] = 1;
  }
  for (int l : local_f1) {
    next.f1.push_back(fix.u[l]);
    gone[l] = 1;
  }
  for (std::size_t k = 0; k < fix.u.size(); ++k)
    if (!gone[k]) next.u.push_back(fix.u[k]);
  std::sort(next.f0.begin(), next.f0.end());
  std::sort(next.f1.begin(), next.f1.end());
  return next;
}

}  // namespace

BranchChoice select_branch_variable(const Instance& inst, const LiftedPoint& point,
                                    const IndexClassification& cls,
                                    const std::vector<int>& ternary_constrained) {
  BranchChoice choice;
  const Vector x = point.x.cwiseMax(0.0).cwiseMin(1.0);
  if (!cls.n_set.empty()) {
    double best = -1.0;
    for (int j : cls.n_set) {
      const double score = std::min(x(j), 1.0 - x(j));
      if (score > best) {
        best = score;
        choice.variable = j;
      }
    }
    choice.kind = BranchKind::binary;
    return choice;
  }
  double best = -kInf;
  for (int j : cls.p_set) {
    if (std::find(ternary_constrained.begin(), ternary_constrained.end(), j) !=
        ternary_constrained.end())
      continue;
    double score = 0.0;
    for (int k = 0; k < inst.n; ++k)
      score += inst.Q(k, j) * (x(j) * x(k) - point.X(j, k));
    if (score > best) {
      best = score;
      choice.variable = j;
      choice.kind = BranchKind::ternary;
    }
  }
  return choice;
}

std::vector<Node> branch(const Node& node, const BranchChoice& choice) {
  const int var = choice.variable;
  std::vector<Node> children;

  auto fixed_child = [&](bool to_one) {
    Node child;
    child.parent = node.id;
    child.depth = node.depth + 1;
    FixState local;
    (to_one ? local.f1 : local.f0).push_back(var);
    for (int i = 0; i < node.inst.n; ++i)
      if (i != var) local.u.push_back(i);
    child.inst = reduce(node.inst, local);
    child.fix = merge_fix(node.fix, local.f0, local.f1);
    child.cuts = remap_triangles(node.cuts, shift_map(node.inst.n, {var}));
    child.lower_bound = node.lower_bound;
    return child;
  };

  children.push_back(fixed_child(false));
  children.push_back(fixed_child(true));

  if (choice.kind == BranchKind::ternary) {
    Node child;
    child.parent = node.id;
    child.depth = node.depth + 1;
    child.inst = node.inst;
    child.fix = node.fix;
    child.cuts = node.cuts;
    child.ternary_rows = node.ternary_rows;
    child.ternary_rows.push_back(make_ternary_stationarity(node.inst, var, +1));
    child.ternary_rows.push_back(make_ternary_stationarity(node.inst, var, -1));
    child.ternary_vars = node.ternary_vars;
    child.ternary_vars.push_back(var);
    child.lower_bound = node.lower_bound;
    children.push_back(std::move(child));
  }
  return children;
}

namespace {

using ordered_json = nlohmann::ordered_json;

void write_log(const SolveConfig& cfg, const ordered_json& record) {
  if (cfg.log) *cfg.log << record.dump() << '\n';
}

ordered_json node_record(const Node& node, double ub, const char* fate) {
  ordered_json rec;
  rec["node"] = node.id;
  rec["parent"] = node.parent;
  rec["depth"] = node.depth;
  rec["dim"] = node.inst.n;
  rec["bound"] = node.lower_bound;
  rec["ub"] = ub;
  rec["gap"] = relative_gap(node.lower_bound, ub);
  rec["rounds"] = node.rounds;
  rec["cuts"] = node.cuts.size();
  rec["fate"] = fate;
  return rec;
}

}  // namespace

SolveReport solve(const Instance& root_inst, const SolveConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (cfg.time_limit_s > 0.0)
    deadline = t_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(cfg.time_limit_s));

  BoundConfig bcfg;
  bcfg.max_separated = cfg.cp_max_separated;
  bcfg.violation_tol = cfg.cp_violation_tol;
  bcfg.add_fraction = cfg.cp_add_fraction;
  bcfg.purge_slack_tol = cfg.cp_purge_tol;
  bcfg.improvement_tol = cfg.cp_improvement_tol;
  bcfg.violated_floor_per_n = cfg.cp_violated_floor;
  bcfg.max_rounds = cfg.cp_max_rounds;
  bcfg.prune_gap = cfg.gap_tol;
  bcfg.solver.tolerance = cfg.sdp_tol;
  bcfg.deadline = deadline;
  bcfg.observer = cfg.certificate_observer;

  SolveReport rep;
  const Incumbent start = multistart(root_inst, cfg.multistart_count, cfg.seed);
  double ub = start.value;
  Vector ubx = start.x;
  const double ub_multistart = ub;

  long next_id = 0;
  long bound_solves = 0;

  auto node_seed = [&](long id) {
    SplitMix64 mix(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(id + 1));
    return mix.next();
  };

  auto try_incumbent = [&](const FixState& fix, const Vector& x_local) {
    const Vector x = embed_point(fix, root_inst.n, x_local);
    const double v = evaluate(root_inst, x);
    if (v < ub) {
      ub = v;
      ubx = x;
    }
  };

  // Bounds a node against a fixed incumbent snapshot; pure w.r.t. shared state.
  auto bound_one = [&](Node& node, double ub_snapshot,
                       const RestrictedWarm* warm) -> BoundResult {
    std::vector<LinearConstraint> extra = node.cuts;
    extra.insert(extra.end(), node.ternary_rows.begin(), node.ternary_rows.end());
    BoundConfig nb = bcfg;
    nb.node_id = node.id;
    if (warm) {
      nb.warm_solution = &warm->solution;
      nb.warm_catalog = &warm->catalog;
    }
    BoundResult br = bound_node(node.inst, extra, ub_snapshot, nb);
    node.lower_bound = std::max(node.lower_bound, br.lower_bound);
    node.cuts = br.active_cuts;
    node.lifted = br.lifted;
    node.last_solution = br.solution;
    node.last_catalog = br.final_catalog;
    node.rounds = br.rounds;
    return br;
  };

  auto polish = [&](const Node& node) {
    if (node.inst.n < 1) return;
    if (node.inst.origin == Origin::converted_binary) {
      const Incumbent cand =
          randomized_rounding(node.inst, node.lifted, cfg.rounding_samples,
                              node_seed(node.id), cfg.rounding_one_flip);
      try_incumbent(node.fix, cand.x);
    } else {
      const Incumbent cand =
          local_search(node.inst, node.lifted.x.cwiseMax(0.0).cwiseMin(1.0));
      try_incumbent(node.fix, cand.x);
    }
  };

  // Exact closure of a node whose free variables all carry stationarity
  // rows: the objective is constant on the stationary affine set, so one
  // box-feasible point of Q x = -c settles the node.
  auto stationary_leaf = [&](const Node& node) {
    const Instance& inst = node.inst;
    Eigen::FullPivLU<Matrix> lu(inst.Q);
    if (lu.isInvertible()) {
      const Vector xh = lu.solve(-inst.c);
      if ((xh.array() >= -1e-9).all() && (xh.array() <= 1.0 + 1e-9).all())
        try_incumbent(node.fix, xh.cwiseMax(0.0).cwiseMin(1.0));
      return;
    }
    LpProblem lp;
    lp.rows = 3 * inst.n;
    lp.rhs = Vector(lp.rows);
    lp.cols.resize(inst.n);
    lp.obj = Vector::Zero(inst.n);
    lp.is_free.assign(inst.n, 0);
    for (int i = 0; i < inst.n; ++i) {
      lp.rhs(i) = -inst.c(i);
      lp.rhs(inst.n + i) = inst.c(i);
      lp.rhs(2 * inst.n + i) = 1.0;
      for (int j = 0; j < inst.n; ++j) {
        if (inst.Q(i, j) == 0.0) continue;
        lp.cols[j].entries.emplace_back(i, inst.Q(i, j));
        lp.cols[j].entries.emplace_back(inst.n + i, -inst.Q(i, j));
      }
      lp.cols[i].entries.emplace_back(2 * inst.n + i, 1.0);
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::optimal)
      try_incumbent(node.fix, sol.w.cwiseMax(0.0).cwiseMin(1.0));
  };

  std::map<long, Node> store;
  std::set<std::pair<double, long>> queue;

  {
    Node root;
    root.id = next_id++;
    root.fix = identity_fix_state(root_inst.n);
    root.inst = root_inst;
    root.lower_bound = -kInf;
    const BoundResult br = bound_one(root, ub, nullptr);
    ++rep.nodes_processed;
    bound_solves += br.sdp_solves;
    rep.cp_rounds_root = br.rounds;
    const double rlt_bound = br.per_round.empty() ? -kInf : br.per_round.front().certified;
    rep.gap_root_rlt = 100.0 * relative_gap(rlt_bound, ub_multistart);
    rep.gap_root_cp = 100.0 * relative_gap(br.lower_bound, ub_multistart);
    polish(root);
    queue.emplace(root.lower_bound, root.id);
    store.emplace(root.id, std::move(root));
  }

  bool timed_out = false;
  while (!queue.empty()) {
    if (deadline && std::chrono::steady_clock::now() >= *deadline) {
      timed_out = true;
      break;
    }
    const auto top = *queue.begin();
    queue.erase(queue.begin());
    Node node = std::move(store.at(top.second));
    store.erase(top.second);

    if (relative_gap(node.lower_bound, ub) <= cfg.gap_tol) {
      write_log(cfg, node_record(node, ub, "pruned"));
      continue;
    }

    // Multiple variable fixing, gated on the node gap.
    ordered_json fix_log;
    if (cfg.fixing_enabled && node.inst.n >= 1 &&
        relative_gap(node.lower_bound, ub) < cfg.fixing_gate) {
      const IndexClassification cls = classify(node.inst);
      if (!cls.n_set.empty()) {
        std::vector<LinearConstraint> extra = node.cuts;
        extra.insert(extra.end(), node.ternary_rows.begin(), node.ternary_rows.end());
        BoundConfig fb = bcfg;
        fb.node_id = node.id;
        const FixOutcome fo =
            multiple_fixing(node.inst, extra, node.lifted.x, ub, cfg.eps1,
                            cfg.eps2, fb, &node.last_solution,
                            &node.last_catalog);
        if (fo.attempt.solved) {
          rep.sdp_fix_count += fo.attempt.sdp_solves;
          fix_log["t0"] = fo.attempt.t0.size();
          fix_log["t1"] = fo.attempt.t1.size();
          fix_log["alpha"] = fo.attempt.alpha_certified;
          fix_log["ub"] = ub;
          fix_log["fixed"] = fo.attempt.fixed;
        }
        if (fo.attempt.fixed) {
          ++rep.fix_success_count;
          const long fixed_count =
              static_cast<long>(fo.attempt.t0.size() + fo.attempt.t1.size());
          if (node.depth == 0) rep.root_fix_count += fixed_count;
          if (!fo.reduced) {
            // every remaining variable got fixed; close the node exactly
            node.fix = merge_fix(node.fix, fo.delta.f0, fo.delta.f1);
            try_incumbent(node.fix, Vector(0));
            ordered_json rec = node_record(node, ub, "fixed_leaf");
            rec["fix"] = fix_log;
            write_log(cfg, rec);
            continue;
          }
          std::vector<int> removed = fo.delta.f0;
          removed.insert(removed.end(), fo.delta.f1.begin(), fo.delta.f1.end());
          std::sort(removed.begin(), removed.end());
          const std::vector<int> map = shift_map(node.inst.n, removed);
          node.cuts = remap_triangles(node.cuts, map);
          node.ternary_rows.clear();
          node.ternary_vars.clear();
          node.lifted = restrict_point(node.lifted, fo.delta.u);
          node.fix = merge_fix(node.fix, fo.delta.f0, fo.delta.f1);
          std::optional<RestrictedWarm> rw = restrict_warm(
              node.last_solution, node.last_catalog, node.inst.n, removed);
          node.inst = *fo.reduced;
          if (rw) {
            node.last_solution = std::move(rw->solution);
            node.last_catalog = std::move(rw->catalog);
          } else {
            node.last_solution = SdpSolution{};
            node.last_catalog = ConstraintCatalog{};
          }
        }
      }
    }

    const IndexClassification cls = classify(node.inst);
    const BranchChoice choice =
        select_branch_variable(node.inst, node.lifted, cls, node.ternary_vars);

    if (choice.variable < 0) {
      stationary_leaf(node);
      ordered_json rec = node_record(node, ub, "stationary_leaf");
      if (!fix_log.empty()) rec["fix"] = fix_log;
      write_log(cfg, rec);
      continue;
    }

    if (node.inst.n == 1) {
      // children would be zero-dimensional: enumerate the closures directly
      try_incumbent(node.fix, Vector::Zero(1));
      try_incumbent(node.fix, Vector::Ones(1));
      if (choice.kind == BranchKind::ternary && node.inst.Q(0, 0) != 0.0) {
        const double xh = -node.inst.c(0) / node.inst.Q(0, 0);
        if (xh >= -1e-9 && xh <= 1.0 + 1e-9)
          try_incumbent(node.fix, Vector::Constant(1, std::clamp(xh, 0.0, 1.0)));
      }
      ordered_json rec = node_record(node, ub, "enumerated_leaf");
      if (!fix_log.empty()) rec["fix"] = fix_log;
      write_log(cfg, rec);
      continue;
    }

    std::vector<Node> children = branch(node, choice);
    for (Node& child : children) child.id = next_id++;

    std::vector<BoundResult> results(children.size());
    std::vector<std::optional<RestrictedWarm>> warms(children.size());
    for (std::size_t k = 0; k < children.size(); ++k) {
      if (children[k].inst.n == node.inst.n) {
        // same-dimension ternary child: parent iterates transfer directly
        RestrictedWarm rw{node.last_solution, node.last_catalog};
        if (rw.solution.primal.dim() == node.inst.n) warms[k] = std::move(rw);
      } else {
        warms[k] = restrict_warm(node.last_solution, node.last_catalog,
                                 node.inst.n, {choice.variable});
      }
    }
    const double ub_snapshot = ub;
    const bool parallel =
        cfg.threads >= 2 && !cfg.deterministic && children.size() >= 2;
    if (parallel) {
      std::vector<std::thread> workers;
      for (std::size_t k = 1; k < children.size(); ++k)
        workers.emplace_back([&, k] {
          results[k] = bound_one(children[k], ub_snapshot,
                                 warms[k] ? &*warms[k] : nullptr);
        });
      results[0] = bound_one(children[0], ub_snapshot, warms[0] ? &*warms[0] : nullptr);
      for (auto& w : workers) w.join();
    } else {
      for (std::size_t k = 0; k < children.size(); ++k)
        results[k] = bound_one(children[k], ub_snapshot,
                               warms[k] ? &*warms[k] : nullptr);
    }

    for (std::size_t k = 0; k < children.size(); ++k) {
      ++rep.nodes_processed;
      bound_solves += results[k].sdp_solves;
      polish(children[k]);
    }
    for (Node& child : children) {
      queue.emplace(child.lower_bound, child.id);
      store.emplace(child.id, std::move(child));
    }

    ordered_json rec = node_record(node, ub, "branched");
    rec["branch_var"] = node.fix.u[choice.variable];
    rec["branch_kind"] = choice.kind == BranchKind::binary ? "binary" : "ternary";
    if (!fix_log.empty()) rec["fix"] = fix_log;
    write_log(cfg, rec);
  }

  rep.status = timed_out ? SolveReport::Status::time_limit : SolveReport::Status::optimal;
  rep.optimal_value = ub;
  rep.optimal_x = ubx;
  rep.total_sdp_solves = bound_solves + rep.sdp_fix_count;
  rep.frontier_bound = queue.empty() ? ub : queue.begin()->first;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                  t_start).count();

  ordered_json final_rec;
  final_rec["report"] = {
      {"status", rep.status == SolveReport::Status::optimal ? "optimal" : "time_limit"},
      {"optimal_value", rep.optimal_value},
      {"nodes_processed", rep.nodes_processed},
      {"sdp_fix_count", rep.sdp_fix_count},
      {"fix_success_count", rep.fix_success_count},
      {"root_fix_count", rep.root_fix_count},
      {"cp_rounds_root", rep.cp_rounds_root},
      {"gap_root_rlt", rep.gap_root_rlt},
      {"gap_root_cp", rep.gap_root_cp},
      {"total_sdp_solves", rep.total_sdp_solves},
      {"frontier_bound", rep.frontier_bound},
  };
  write_log(cfg, final_rec);
  return rep;
}

}  // namespace boxqp
