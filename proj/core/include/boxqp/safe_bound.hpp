#ifndef BOXQP_SAFE_BOUND_HPP
#define BOXQP_SAFE_BOUND_HPP

#include <optional>
#include <string>

#include "boxqp/sdp_engine.hpp"
#include "boxqp/simplex.hpp"

namespace boxqp {

struct DualCertificate {
  double y = 0.0;
  Vector v;
  Matrix S;
  Matrix Z;
};

// primal_infeasible: the repair LP is unbounded and its improving ray checks
// out as a Farkas certificate, proving the relaxed feasible set empty; the
// bound value is +infinity and the node can be discarded.
enum class CertStatus { certified, lp_infeasible, primal_infeasible };

// A lower bound on the relaxation optimum (and hence on the BoxQP optimum,
// up to the instance constant) backed by an exactly dual-feasible point.
// value = y + b'v, adjusted downward by the tiny negativity allowances of
// S and Z so it stays valid at the 1e-8 margin contract.
struct CertifiedBound {
  double value = 0.0;
  DualCertificate certificate;
  double feasibility_margin = 0.0;  // most negative slack across all checks
  CertStatus status = CertStatus::lp_infeasible;
};

// LP rows are the upper-triangle entries (p, q) of the (n+1)x(n+1) dual
// equality, ordered p outer then q; columns are y (free) followed by v.
struct RepairLp {
  LpProblem lp;
  Matrix Zt;  // psd-projected Z embedded in the right-hand side
};

int repair_lp_row(int p, int q, int dim);

RepairLp build_repair_lp(const RelaxationModel& model, const Matrix& Z);

struct RepairSolution {
  enum class Kind { optimal, unbounded_ray };
  Kind kind = Kind::optimal;
  double y = 0.0;  // the improving ray when kind == unbounded_ray
  Vector v;
};

// nullopt on LP infeasibility; an unbounded LP yields the improving ray,
// which (once verified) proves the primal relaxation empty.
std::optional<RepairSolution> solve_repair_lp(const RepairLp& repair);

// psd-projects Z from the solver iterate, solves the repair LP, and rebuilds
// S from scratch as the equality residual. On success every feasibility
// condition is re-verified from raw data.
CertifiedBound certify(const RelaxationModel& model, const SdpSolution& sol);

// Independent re-verification used by certify() and by the test suites.
struct CertificateCheck {
  double v_min = 0.0;
  double s_min = 0.0;
  double z_min_eigenvalue = 0.0;
  double equality_residual = 0.0;  // ||E11 y + B*(v) + Z + S - Qt||_max
  double margin = 0.0;             // min(v_min, s_min, z_min_eigenvalue, -equality_residual)
  double safe_value = 0.0;         // y + b'v with negativity allowances priced in
};

CertificateCheck verify_certificate(const RelaxationModel& model,
                                    const DualCertificate& cert);

// Audit dump: y, sparse v, eigenvalue floor of Z, margin, value.
std::string certificate_json(const RelaxationModel& model, const CertifiedBound& bound);

}  // namespace boxqp

#endif
