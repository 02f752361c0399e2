#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "boxqp/bnb.hpp"
#include "boxqp/bounding.hpp"
#include "boxqp/heuristics.hpp"
#include "boxqp/oracle.hpp"

using namespace boxqp;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
  std::string path;
  std::string convention = "min";
  bool binary = false;
  std::string out;
};

Instance load_instance(const CommonOpts& opts) {
  const Convention conv =
      opts.convention == "max" ? Convention::max : Convention::min;
  Instance inst = parse_instance_file(opts.path, conv);
  if (opts.binary) inst = binary_to_box(inst.Q, inst.c);
  return inst;
}

ordered_json report_json(const SolveReport& rep, bool with_time) {
  ordered_json j;
  j["status"] = rep.status == SolveReport::Status::optimal ? "optimal" : "time_limit";
  j["optimal_value"] = rep.optimal_value;
  std::vector<double> x(rep.optimal_x.data(), rep.optimal_x.data() + rep.optimal_x.size());
  j["optimal_x"] = x;
  j["nodes_processed"] = rep.nodes_processed;
  j["sdp_fix_count"] = rep.sdp_fix_count;
  j["fix_success_count"] = rep.fix_success_count;
  j["root_fix_count"] = rep.root_fix_count;
  j["cp_rounds_root"] = rep.cp_rounds_root;
  j["gap_root_rlt"] = rep.gap_root_rlt;
  j["gap_root_cp"] = rep.gap_root_cp;
  j["total_sdp_solves"] = rep.total_sdp_solves;
  j["frontier_bound"] = rep.frontier_bound;
  if (with_time) j["wall_time_s"] = rep.wall_time_s;
  return j;
}

int run_solve(const CommonOpts& opts, SolveConfig cfg, const std::string& log_path) {
  const Instance inst = load_instance(opts);
  std::ofstream log_stream;
  if (!log_path.empty()) {
    log_stream.open(log_path);
    if (!log_stream) throw std::runtime_error("cannot open log file " + log_path);
    cfg.log = &log_stream;
  }
  const SolveReport rep = solve(inst, cfg);

  std::cout << "status           " << (rep.status == SolveReport::Status::optimal
                                           ? "optimal"
                                           : "time_limit")
            << "\n"
            << "objective        " << rep.optimal_value << "\n"
            << "nodes            " << rep.nodes_processed << "\n"
            << "cp rounds (root) " << rep.cp_rounds_root << "\n"
            << "gap0 / gapCP     " << rep.gap_root_rlt << "% / " << rep.gap_root_cp
            << "%\n"
            << "sdp fix solves   " << rep.sdp_fix_count << "\n"
            << "fixed at root    " << rep.root_fix_count << "\n"
            << "total sdp solves " << rep.total_sdp_solves << "\n"
            << "wall time        " << rep.wall_time_s << " s\n";

  if (!opts.out.empty()) {
    std::ofstream out(opts.out);
    if (!out) throw std::runtime_error("cannot open output file " + opts.out);
    out << report_json(rep, true).dump(2) << "\n";
  }
  return rep.status == SolveReport::Status::optimal ? 0 : 2;
}

int run_root_bound(const CommonOpts& opts, const SolveConfig& cfg) {
  const Instance inst = load_instance(opts);
  const auto t0 = std::chrono::steady_clock::now();
  const Incumbent inc = multistart(inst, cfg.multistart_count, cfg.seed);

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
  const BoundResult br = bound_node(inst, {}, inc.value, bcfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ordered_json j;
  j["gap0"] = 100.0 * relative_gap(br.per_round.front().certified, inc.value);
  j["cp_rounds"] = br.rounds;
  j["gap_cp"] = 100.0 * relative_gap(br.lower_bound, inc.value);
  j["time_s"] = seconds;
  j["ub"] = inc.value;
  j["lb_rlt"] = br.per_round.front().certified;
  j["lb_cp"] = br.lower_bound;
  j["active_cuts"] = br.active_cuts.size();

  std::cout << j.dump(2) << "\n";
  if (!opts.out.empty()) {
    std::ofstream out(opts.out);
    if (!out) throw std::runtime_error("cannot open output file " + opts.out);
    out << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global solver for box-constrained quadratic programs"};
  app.require_subcommand(1);

  CommonOpts opts;
  SolveConfig cfg;
  std::string log_path;
  bool no_fixing = false;
  bool paper_defaults = false;

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve an instance to global optimality");
  solve_cmd->add_option("file", opts.path, "instance file")->required();
  solve_cmd->add_flag("--binary", opts.binary, "treat the input as a binary QP and convert it");
  solve_cmd->add_option("--convention", opts.convention, "objective sense of the file (min|max)")
      ->check(CLI::IsMember({"min", "max"}));
  solve_cmd->add_option("--gap", cfg.gap_tol, "relative optimality gap tolerance");
  solve_cmd->add_option("--time-limit", cfg.time_limit_s, "wall-clock limit in seconds");
  solve_cmd->add_option("--threads", cfg.threads, "concurrent child evaluations");
  solve_cmd->add_flag("--no-fixing", no_fixing, "disable multiple variable fixing");
  solve_cmd->add_option("--seed", cfg.seed, "random seed");
  solve_cmd->add_flag("--deterministic", cfg.deterministic,
                      "single-threaded, byte-reproducible run logs");
  solve_cmd->add_option("--out", opts.out, "write the final report as JSON");
  solve_cmd->add_option("--log", log_path, "write the JSON-lines run log");
  solve_cmd->add_flag("--paper-defaults", paper_defaults,
                      "no-op; asserts the defaults match the published settings");

  CLI::App* gen_cmd = app.add_subcommand("generate", "generate a spar-style instance");
  int gen_n = 0, gen_d = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen_cmd->add_option("n", gen_n, "dimension")->required();
  gen_cmd->add_option("d", gen_d, "density percentage in [1,100]")->required();
  gen_cmd->add_option("seed", gen_seed, "generator seed")->required();
  gen_cmd->add_option("-o,--out", gen_out, "output file")->required();

  CLI::App* root_cmd = app.add_subcommand("root-bound", "root relaxation statistics");
  root_cmd->add_option("file", opts.path, "instance file")->required();
  root_cmd->add_flag("--binary", opts.binary, "treat the input as a binary QP and convert it");
  root_cmd->add_option("--convention", opts.convention, "objective sense of the file (min|max)")
      ->check(CLI::IsMember({"min", "max"}));
  root_cmd->add_option("--seed", cfg.seed, "random seed");
  root_cmd->add_option("--out", opts.out, "write the record as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (no_fixing) cfg.fixing_enabled = false;
    if (paper_defaults) {
      const SolveConfig defaults;
      if (cfg.sdp_tol != defaults.sdp_tol || cfg.gap_tol != defaults.gap_tol ||
          cfg.multistart_count != 200 || cfg.rounding_samples != 1000 ||
          cfg.eps1 != 0.01 || cfg.eps2 != 0.01 || cfg.fixing_gate != 0.01)
        throw std::runtime_error("--paper-defaults: configuration deviates");
    }
    if (solve_cmd->parsed()) return run_solve(opts, cfg, log_path);
    if (gen_cmd->parsed()) {
      const Instance inst = generate_spar(gen_n, gen_d, gen_seed);
      std::ofstream out(gen_out);
      if (!out) throw std::runtime_error("cannot open output file " + gen_out);
      write_instance(out, inst);
      return 0;
    }
    if (root_cmd->parsed()) return run_root_bound(opts, cfg);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
