// Acceptance suite: one pass/fail line per criterion. Run all criteria or a
// single one with --only <name>; --list prints the names. Exit status is the
// number of failed criteria.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "boxqp/bnb.hpp"
#include "boxqp/oracle.hpp"
#include "boxqp/rng.hpp"

using namespace boxqp;

namespace {

struct Criterion {
  const char* name;
  std::function<bool(std::string&)> run;
};

SolveConfig deterministic_config(std::uint64_t seed) {
  SolveConfig cfg;
  cfg.deterministic = true;
  cfg.seed = seed;
  return cfg;
}

Instance reconstruct_instance(const RelaxationModel& model, double constant) {
  const int n = model.n;
  Matrix Q = 2.0 * model.Qt.block(1, 1, n, n);
  Vector c = 2.0 * model.Qt.block(1, 0, n, 1);
  return make_instance(std::move(Q), std::move(c), constant);
}

// ---------------------------------------------------------------------------
// Oracle equivalence + safe-bound soundness share one instrumented sweep.

struct SoundnessStats {
  long certificates = 0;
  long feasibility_violations = 0;
  long bound_violations = 0;
  double worst_margin = 0.0;
  double worst_excess = -1e300;
};

bool run_oracle_suite(std::string& detail, SoundnessStats& stats) {
  std::mutex mu;
  int matched = 0;
  const int total = 50;
  const int densities[4] = {25, 50, 75, 100};

  for (int k = 0; k < total; ++k) {
    const int n = 6 + k % 7;
    const int d = densities[k % 4];
    const Instance inst = generate_spar(n, d, 5000 + k);
    const double oracle = kkt_enumeration_oracle(inst).value;

    bool ok = true;
    for (const bool fixing : {true, false}) {
      SolveConfig cfg = deterministic_config(17 + k);
      cfg.fixing_enabled = fixing;
      cfg.certificate_observer = [&](const CertificateEvent& event) {
        std::lock_guard<std::mutex> lock(mu);
        ++stats.certificates;
        const CertificateCheck check =
            verify_certificate(*event.model, event.bound->certificate);
        stats.worst_margin = std::min(stats.worst_margin, check.margin);
        if (check.v_min < -1e-8 || check.s_min < -1e-8 ||
            check.z_min_eigenvalue < -1e-8 || check.equality_residual > 1e-8)
          ++stats.feasibility_violations;
        // Compare against the box oracle only when every catalog row is valid
        // for the whole box; stationarity rows restrict the node region.
        if (event.context == CertificateEvent::Context::bounding &&
            event.model->catalog.count(CutKind::ternary_stationarity) == 0) {
          const Instance node_inst =
              reconstruct_instance(*event.model, event.objective_constant);
          const double node_oracle = kkt_enumeration_oracle(node_inst).value;
          const double value = event.bound->value + event.objective_constant;
          stats.worst_excess = std::max(stats.worst_excess, value - node_oracle);
          if (value > node_oracle + 1e-8 * (1.0 + std::abs(node_oracle)))
            ++stats.bound_violations;
        }
      };
      const SolveReport rep = solve(inst, cfg);
      if (rep.status != SolveReport::Status::optimal ||
          std::abs(rep.optimal_value - oracle) > 1e-6 * (1.0 + std::abs(oracle)))
        ok = false;
    }
    if (ok) ++matched;
  }
  std::ostringstream out;
  out << matched << "/" << total << " instances matched the oracle";
  detail = out.str();
  return matched == total;
}

SoundnessStats g_soundness;
bool g_oracle_ran = false;
bool g_oracle_ok = false;
std::string g_oracle_detail;

void ensure_oracle_suite() {
  if (g_oracle_ran) return;
  g_oracle_ran = true;
  g_oracle_ok = run_oracle_suite(g_oracle_detail, g_soundness);
}

bool criterion_oracle(std::string& detail) {
  ensure_oracle_suite();
  detail = g_oracle_detail;
  return g_oracle_ok;
}

bool criterion_soundness(std::string& detail) {
  ensure_oracle_suite();
  std::ostringstream out;
  out << g_soundness.certificates << " certificates, "
      << g_soundness.feasibility_violations << " feasibility violations, "
      << g_soundness.bound_violations << " bound violations (worst margin "
      << g_soundness.worst_margin << ", worst excess " << g_soundness.worst_excess
      << ")";
  detail = out.str();
  return g_soundness.certificates > 0 && g_soundness.feasibility_violations == 0 &&
         g_soundness.bound_violations == 0;
}

// ---------------------------------------------------------------------------

bool criterion_binary(std::string& detail) {
  int matched = 0;
  const int total = 30;
  bool all_binary = true;
  for (int k = 0; k < total; ++k) {
    const int n = 8 + k % 5;
    const Instance raw = generate_spar(n, 60 + 10 * (k % 4), 7000 + k);
    double best = std::numeric_limits<double>::infinity();
    for (long mask = 0; mask < (1L << n); ++mask) {
      Vector z(n);
      for (int j = 0; j < n; ++j) z(j) = (mask >> j) & 1;
      best = std::min(best, 0.5 * z.dot(raw.Q * z) + raw.c.dot(z));
    }
    const Instance conv = binary_to_box(raw.Q, raw.c);
    const SolveReport rep = solve(conv, deterministic_config(23 + k));
    for (int i = 0; i < n; ++i)
      if (rep.optimal_x(i) != 0.0 && rep.optimal_x(i) != 1.0) all_binary = false;
    if (rep.status == SolveReport::Status::optimal && rep.optimal_value == best)
      ++matched;
  }
  std::ostringstream out;
  out << matched << "/" << total << " exact matches, incumbents "
      << (all_binary ? "all binary" : "NOT binary");
  detail = out.str();
  return matched == total && all_binary;
}

bool criterion_cutting_planes(std::string& detail) {
  double sum_gap0 = 0.0, sum_gapcp = 0.0;
  bool monotone = true;
  const int total = 10;
  for (int k = 0; k < total; ++k) {
    const Instance inst = generate_spar(20, 75, 9000 + k);
    const Incumbent inc = multistart(inst, 200, 3);
    BoundConfig cfg;
    const BoundResult br = bound_node(inst, {}, inc.value, cfg);
    sum_gap0 += 100.0 * relative_gap(br.per_round.front().certified, inc.value);
    sum_gapcp += 100.0 * relative_gap(br.lower_bound, inc.value);
    double running = -std::numeric_limits<double>::infinity();
    double reported_prev = -std::numeric_limits<double>::infinity();
    for (const RoundLog& log : br.per_round) {
      running = std::max(running, log.certified);
      if (running < reported_prev - 1e-12) monotone = false;
      reported_prev = running;
    }
  }
  std::ostringstream out;
  out << "mean gap0 " << sum_gap0 / total << "%, mean gapCP " << sum_gapcp / total
      << "%, per-round bounds " << (monotone ? "monotone" : "NOT monotone");
  detail = out.str();
  return sum_gapcp <= 0.5 * sum_gap0 && monotone && sum_gap0 > 0.0;
}

// ---------------------------------------------------------------------------
// Fixing effect: frozen +/-1 coupling instances that branch at desk scale.

Instance fixing_instance(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix Q = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = (rng.next() & 1) ? 1.0 : -1.0;
      Q(i, j) = Q(j, i) = v;
    }
  return binary_to_box(Q, Vector::Zero(n), ShiftPolicy::max_diag);
}

struct FixingCase {
  int n;
  std::uint64_t seed;
};

// The ten hardest instances found in a 140+-seed calibration sweep of this
// family over n in [30, 40]; kept in decreasing order of measured difficulty.
constexpr FixingCase kFixingCases[10] = {
    {34, 60}, {40, 12}, {32, 9},  {34, 91}, {34, 160},
    {34, 125}, {32, 48}, {32, 37}, {34, 132}, {34, 10},
};

bool criterion_fixing(std::string& detail) {
  long solves_off = 0, solves_on = 0, successes = 0;
  int value_matches = 0, forced_trees = 0;
  std::ostringstream nodes_list;
  for (const FixingCase& fc : kFixingCases) {
    const Instance inst = fixing_instance(fc.n, fc.seed);
    SolveConfig off = deterministic_config(11);
    off.fixing_enabled = false;
    const SolveReport rep_off = solve(inst, off);
    SolveConfig on = deterministic_config(11);
    const SolveReport rep_on = solve(inst, on);

    nodes_list << (nodes_list.tellp() > 0 ? "," : "") << rep_off.nodes_processed;
    if (rep_off.nodes_processed >= 15) ++forced_trees;
    solves_off += rep_off.total_sdp_solves;
    solves_on += rep_on.total_sdp_solves;
    successes += rep_on.fix_success_count;
    if (std::abs(rep_on.optimal_value - rep_off.optimal_value) <=
        1e-6 * (1.0 + std::abs(rep_off.optimal_value)))
      ++value_matches;
  }
  std::ostringstream out;
  out << forced_trees << "/10 instances reached 15 nodes (node counts "
      << nodes_list.str() << "), optima matched " << value_matches
      << "/10, sdp solves " << solves_on << " vs " << solves_off << " ("
      << (solves_off ? 100.0 * solves_on / solves_off : 0.0) << "%), "
      << successes << " successful fixes";
  detail = out.str();
  return forced_trees == 10 && value_matches == 10 &&
         solves_on <= 1.2 * static_cast<double>(solves_off) && successes >= 1;
}

// ---------------------------------------------------------------------------

bool criterion_parameters(std::string& detail) {
  const SolveConfig cfg;
  const SolverConfig scfg;
  const BoundConfig bcfg;
  bool ok = true;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      ok = false;
      detail += std::string(detail.empty() ? "" : "; ") + "mismatch: " + what;
    }
  };
  expect(cfg.sdp_tol == 1e-4, "sdp tolerance 1e-4");
  expect(scfg.tolerance == 1e-4, "solver tolerance 1e-4");
  expect(cfg.cp_max_separated == 100000, "100000 separated triangles");
  expect(cfg.cp_add_fraction == 0.10, "add 10% of violated cuts");
  expect(cfg.cp_violation_tol == 1e-4, "violation tolerance 1e-4");
  expect(cfg.cp_purge_tol == 1e-3, "purge tolerance 1e-3");
  expect(cfg.cp_violated_floor == 10, "violated floor 10n");
  expect(cfg.cp_improvement_tol == 1e-4, "improvement tolerance 1e-4");
  expect(bcfg.max_separated == 100000, "bound config separation cap");
  expect(bcfg.add_fraction == 0.10, "bound config add fraction");
  expect(bcfg.violation_tol == 1e-4, "bound config violation tolerance");
  expect(bcfg.purge_slack_tol == 1e-3, "bound config purge tolerance");
  expect(bcfg.violated_floor_per_n == 10, "bound config violated floor");
  expect(bcfg.improvement_tol == 1e-4, "bound config improvement tolerance");
  expect(cfg.multistart_count == 200, "200 multistarts");
  expect(cfg.rounding_samples == 1000, "1000 rounding samples");
  expect(cfg.eps1 == 0.01, "eps1 = 0.01");
  expect(cfg.eps2 == 0.01, "eps2 = 0.01");
  expect(cfg.fixing_gate == 0.01, "fixing gate 1%");
  expect(cfg.gap_tol == 1e-4, "gap tolerance 0.01%");
  expect(cfg.threads == 2, "two parallel children");
  if (ok) detail = "all defaults match the published settings";
  return ok;
}

bool criterion_spot_check(std::string& detail) {
  const char* dir = std::getenv("BOXQP_SPAR_DIR");
  const std::string base = dir ? dir : "data/published";
  std::vector<std::string> present;
  for (const char* name :
       {"spar070-025-1.in", "spar070-025-2.in", "spar070-025-3.in"}) {
    const std::string path = base + "/" + name;
    if (std::ifstream(path).good()) present.push_back(path);
  }
  if (present.empty()) {
    detail = "published spar070-025 instances not found under '" + base +
             "' (skipped, not failed)";
    return true;
  }
  bool ok = true;
  std::ostringstream out;
  for (const std::string& path : present) {
    const Instance inst = parse_instance_file(path, Convention::max);
    const Incumbent inc = multistart(inst, 200, 1);
    BoundConfig bcfg;
    const BoundResult br = bound_node(inst, {}, inc.value, bcfg);
    const double gap_cp = 100.0 * relative_gap(br.lower_bound, inc.value);
    SolveConfig cfg = deterministic_config(1);
    cfg.time_limit_s = 1800.0;
    const SolveReport rep = solve(inst, cfg);
    out << path << ": gapCP " << gap_cp << "pp nodes " << rep.nodes_processed
        << "; ";
    if (gap_cp > 0.05 || rep.nodes_processed > 3) ok = false;
  }
  detail = out.str();
  return ok;
}

bool criterion_determinism(std::string& detail) {
  int identical = 0;
  for (int k = 0; k < 3; ++k) {
    const Instance inst = generate_spar(8 + k, 50 + 25 * k, 600 + k);
    std::string logs[2];
    for (int run = 0; run < 2; ++run) {
      std::ostringstream log;
      SolveConfig cfg = deterministic_config(99);
      cfg.log = &log;
      solve(inst, cfg);
      logs[run] = log.str();
    }
    if (!logs[0].empty() && logs[0] == logs[1]) ++identical;
  }
  std::ostringstream out;
  out << identical << "/3 instances with byte-identical run logs";
  detail = out.str();
  return identical == 3;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"oracle-equivalence", criterion_oracle},
      {"safe-bound-soundness", criterion_soundness},
      {"binary-correctness", criterion_binary},
      {"cutting-plane-effectiveness", criterion_cutting_planes},
      {"fixing-effect", criterion_fixing},
      {"parameter-fidelity", criterion_parameters},
      {"published-spot-check", criterion_spot_check},
      {"determinism", criterion_determinism},
  };

  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--list")) {
      for (const auto& c : criteria) std::printf("%s\n", c.name);
      return 0;
    }
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = argv[++i];
  }

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!only.empty() && only != criterion.name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    const bool passed = criterion.run(detail);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %s (%.1fs) %s\n", passed ? "PASS" : "FAIL", criterion.name,
                seconds, detail.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
  }
  return failures;
}
