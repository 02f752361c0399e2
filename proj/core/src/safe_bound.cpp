#include "boxqp/safe_bound.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace boxqp {

int repair_lp_row(int p, int q, int dim) {
  // row index of (p, q), p <= q, when the upper triangle is walked by rows
  return p * dim - p * (p - 1) / 2 + (q - p);
}

RepairLp build_repair_lp(const RelaxationModel& model, const Matrix& Z) {
  const int d = model.n + 1;
  const int m = static_cast<int>(model.catalog.size());
  RepairLp repair;
  repair.Zt = psd_project(Z);

  LpProblem& lp = repair.lp;
  lp.rows = d * (d + 1) / 2;
  lp.rhs = Vector(lp.rows);
  const Matrix target = model.Qt - repair.Zt;
  for (int p = 0; p < d; ++p)
    for (int q = p; q < d; ++q) lp.rhs(repair_lp_row(p, q, d)) = target(p, q);

  lp.cols.resize(m + 1);
  lp.obj = Vector(m + 1);
  lp.is_free.assign(m + 1, 0);
  lp.cols[0].entries.emplace_back(repair_lp_row(0, 0, d), 1.0);
  lp.obj(0) = 1.0;
  lp.is_free[0] = 1;

  const auto& rows = model.catalog.constraints();
  for (int i = 0; i < m; ++i) {
    SparseColumn& col = lp.cols[i + 1];
    for (const auto& e : rows[i].entries) {
      const double coeff = (e.row == e.col) ? e.weight : 0.5 * e.weight;
      col.entries.emplace_back(repair_lp_row(e.row, e.col, d), coeff);
    }
    lp.obj(i + 1) = rows[i].rhs;
  }
  return repair;
}

std::optional<RepairSolution> solve_repair_lp(const RepairLp& repair) {
  const LpSolution sol = solve_lp(repair.lp);
  if (sol.status == LpStatus::infeasible) return std::nullopt;
  RepairSolution out;
  if (sol.status == LpStatus::unbounded) {
    out.kind = RepairSolution::Kind::unbounded_ray;
    const double scale = std::max(1.0, sol.ray.cwiseAbs().maxCoeff());
    out.y = sol.ray(0) / scale;
    out.v = (sol.ray.tail(sol.ray.size() - 1) / scale).cwiseMax(0.0);
    return out;
  }
  out.y = sol.w(0);
  out.v = sol.w.tail(sol.w.size() - 1).cwiseMax(0.0);
  return out;
}

CertificateCheck verify_certificate(const RelaxationModel& model,
                                    const DualCertificate& cert) {
  const int d = model.n + 1;
  const auto& rows = model.catalog.constraints();
  if (cert.v.size() != static_cast<Eigen::Index>(rows.size()))
    throw std::invalid_argument("verify_certificate: v has wrong length");

  Matrix lhs = Matrix::Zero(d, d);
  lhs(0, 0) = cert.y;
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].scatter(cert.v(i), lhs);
  lhs += cert.Z + cert.S;

  CertificateCheck check;
  check.equality_residual = (lhs - model.Qt).cwiseAbs().maxCoeff();
  check.v_min = rows.empty() ? 0.0 : cert.v.minCoeff();
  check.s_min = cert.S.minCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(cert.Z, Eigen::EigenvaluesOnly);
  check.z_min_eigenvalue = es.eigenvalues().minCoeff();
  check.margin = std::min({check.v_min, check.s_min, check.z_min_eigenvalue,
                           -check.equality_residual});

  // Any feasible lifted point has entries in [0, 1] and trace at most n+1,
  // so negative parts of S and Z discount the dual objective by at most the
  // allowances added here.
  double discount = 0.0;
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) discount += std::min(cert.S(p, q), 0.0);
  discount += d * std::min(check.z_min_eigenvalue, 0.0);
  const Vector b = model.rhs();
  check.safe_value = cert.y + b.dot(cert.v) + discount;
  return check;
}

CertifiedBound certify(const RelaxationModel& model, const SdpSolution& sol) {
  const RepairLp repair = build_repair_lp(model, sol.dual_Z);
  const std::optional<RepairSolution> lp_sol = solve_repair_lp(repair);
  CertifiedBound bound;
  if (!lp_sol) {
    bound.status = CertStatus::lp_infeasible;
    return bound;
  }
  if (lp_sol->kind == RepairSolution::Kind::unbounded_ray) {
    // Farkas direction: with E11 y + B*(v) + S = 0, S >= 0, v >= 0 and
    // y + b'v > 0, any feasible lifted point yields 0 >= y + b'v, absurd.
    const int d = model.n + 1;
    Matrix S = Matrix::Zero(d, d);
    S(0, 0) -= lp_sol->y;
    const auto& rows = model.catalog.constraints();
    for (std::size_t i = 0; i < rows.size(); ++i)
      rows[i].scatter(-lp_sol->v(i), S);
    double allowance = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) allowance += std::min(S(p, q), 0.0);
    const double gain = lp_sol->y + model.rhs().dot(lp_sol->v) + allowance;
    if (gain > 1e-7) {
      bound.status = CertStatus::primal_infeasible;
      bound.value = std::numeric_limits<double>::infinity();
      bound.certificate.y = lp_sol->y;
      bound.certificate.v = lp_sol->v;
      bound.certificate.S = S;
      bound.certificate.Z = Matrix::Zero(d, d);
      bound.feasibility_margin = S.minCoeff();
    } else {
      bound.status = CertStatus::lp_infeasible;  // unverifiable ray
    }
    return bound;
  }
  bound.certificate.y = lp_sol->y;
  bound.certificate.v = lp_sol->v;
  bound.certificate.Z = repair.Zt;
  // S is the equality residual by construction, so the dual equality holds
  // to rounding error; its entrywise sign is what remains to check.
  const int d = model.n + 1;
  Matrix S = model.Qt - repair.Zt;
  S(0, 0) -= lp_sol->y;
  Matrix adj = Matrix::Zero(d, d);
  const auto& rows = model.catalog.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].scatter(lp_sol->v(i), adj);
  S -= adj;
  bound.certificate.S = S;

  const CertificateCheck check = verify_certificate(model, bound.certificate);
  bound.value = check.safe_value;
  bound.feasibility_margin = check.margin;
  bound.status =
      check.margin >= -1e-8 ? CertStatus::certified : CertStatus::lp_infeasible;
  return bound;
}

std::string certificate_json(const RelaxationModel& model,
                             const CertifiedBound& bound) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "{\"status\":\""
      << (bound.status == CertStatus::certified ? "certified" : "lp_infeasible")
      << "\",\"value\":" << num(bound.value)
      << ",\"feasibility_margin\":" << num(bound.feasibility_margin)
      << ",\"y\":" << num(bound.certificate.y) << ",\"v\":[";
  bool first = true;
  for (Eigen::Index i = 0; i < bound.certificate.v.size(); ++i) {
    if (bound.certificate.v(i) == 0.0) continue;
    if (!first) out << ',';
    first = false;
    out << "{\"i\":" << i << ",\"value\":" << num(bound.certificate.v(i)) << '}';
  }
  double z_floor = 0.0;
  if (bound.certificate.Z.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(bound.certificate.Z,
                                             Eigen::EigenvaluesOnly);
    z_floor = es.eigenvalues().minCoeff();
  }
  out << "],\"z_eigenvalue_floor\":" << num(z_floor)
      << ",\"constraints\":" << model.catalog.size() << '}';
  return out.str();
}

}  // namespace boxqp
