// Scratch driver used while calibrating the solver; not installed.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "boxqp/bounding.hpp"
#include "boxqp/oracle.hpp"
#include "boxqp/sdp_engine.hpp"

using namespace boxqp;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 6;
  const int d = argc > 2 ? std::atoi(argv[2]) : 75;
  const unsigned long long seed0 = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  const int count = argc > 4 ? std::atoi(argv[4]) : 5;

  for (unsigned long long s = seed0; s < seed0 + count; ++s) {
    Instance inst = generate_spar(n, d, s);
    const auto t0 = std::chrono::steady_clock::now();
    RelaxationModel model = assemble_model(inst);
    SolverConfig cfg;
    SdpSolution sol = solve(model, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    CertifiedBound bound = certify(model, sol);
    const auto t2 = std::chrono::steady_clock::now();

    double oracle_value = 0.0;
    if (n <= 12) oracle_value = kkt_enumeration_oracle(inst).value;

    std::printf(
        "n=%d d=%d seed=%llu  iters=%d status=%d kkt=%.2e obj=%.6f cert=%.6f "
        "(margin %.1e, %s) oracle=%.6f sdp=%.2fs lp=%.2fs\n",
        n, d, s, sol.iterations, static_cast<int>(sol.status), sol.kkt_residual,
        sol.raw_objective, bound.value, bound.feasibility_margin,
        bound.status == CertStatus::certified ? "certified" : "LP-INFEASIBLE",
        oracle_value, std::chrono::duration<double>(t1 - t0).count(),
        std::chrono::duration<double>(t2 - t1).count());
  }
  return 0;
}
