#include "boxqp/sdp_engine.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace boxqp {

Matrix psd_project(const Matrix& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("psd_project: not square");
  const Matrix sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psd_project: eigendecomposition failed, ||M||_F = " +
                             std::to_string(sym.norm()));
  const Vector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

// Forward/adjoint application of the stacked operator A = [E11; B^1; ...; B^m].
struct StackedOperator {
  const std::vector<LinearConstraint>* rows = nullptr;
  int dim = 0;

  void forward(const Matrix& M, Vector& out) const {
    out(0) = M(0, 0);
    const auto& r = *rows;
    for (std::size_t i = 0; i < r.size(); ++i) out(i + 1) = r[i].eval(M);
  }

  void adjoint(const Vector& u, Matrix& out) const {
    out.setZero();
    out(0, 0) = u(0);
    const auto& r = *rows;
    for (std::size_t i = 0; i < r.size(); ++i) r[i].scatter(u(i + 1), out);
  }
};

struct ScaledResiduals {
  double primal;
  double dual;
  double gap;
  double pobj;  // unscaled primal objective
};

double min_eigenvalue(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Shared between solve() and residuals() so the two agree bit-for-bit.
ScaledResiduals compute_residuals(double sigma, const Matrix& Qs, const Vector& b,
                                  const StackedOperator& op, const Matrix& Xt,
                                  double ys, const Vector& vs, const Matrix& Zs,
                                  const Matrix& Ss) {
  const int m = static_cast<int>(b.size());
  Vector ax(m + 1);
  op.forward(Xt, ax);

  double feas_sq = (1.0 - ax(0)) * (1.0 - ax(0));
  for (int i = 0; i < m; ++i) {
    const double viol = std::max(b(i) - ax(i + 1), 0.0);
    feas_sq += viol * viol;
  }
  const double bhat_norm = std::sqrt(1.0 + b.squaredNorm());
  const double xt_norm = Xt.norm();
  const double primal = std::max(
      {std::sqrt(feas_sq) / (1.0 + bhat_norm),
       Xt.cwiseMin(0.0).norm() / (1.0 + xt_norm),
       std::max(-min_eigenvalue(Xt), 0.0) / (1.0 + xt_norm)});

  Matrix R = Qs - Zs - Ss;
  R(0, 0) -= ys;
  Vector neg_v = vs.cwiseMin(0.0);
  Matrix adj = Matrix::Zero(op.dim, op.dim);
  Vector u(m + 1);
  u(0) = 0.0;
  u.tail(m) = vs;
  op.adjoint(u, adj);
  adj(0, 0) = 0.0;  // ys already subtracted
  R -= adj;
  const double dual = std::max(
      {R.norm() / (1.0 + Qs.norm()), neg_v.norm() / (1.0 + vs.norm()),
       Ss.cwiseMin(0.0).norm() / (1.0 + Ss.norm()),
       std::max(-min_eigenvalue(Zs), 0.0) / (1.0 + Zs.norm())});

  const double pobj_s = Qs.cwiseProduct(Xt).sum();
  const double dobj_s = ys + b.dot(vs);
  const double gap =
      std::abs(pobj_s - dobj_s) / (1.0 + std::abs(pobj_s) + std::abs(dobj_s));

  return {primal, dual, gap, sigma * pobj_s};
}

// Jacobi-preconditioned CG on K u = rhs with K = A A* + diag(0, I).
class NormalSystem {
 public:
  NormalSystem(const StackedOperator& op, int m) : op_(op), m_(m) {
    precond_ = Vector::Ones(m + 1);
    const auto& rows = *op.rows;
    for (int i = 0; i < m; ++i) precond_(i + 1) = rows[i].frobenius_sq() + 1.0;
    scratch_.resize(op.dim, op.dim);
    q_.resize(m + 1);
    r_.resize(m + 1);
    z_.resize(m + 1);
    p_.resize(m + 1);
  }

  void apply(const Vector& u, Vector& out) {
    op_.adjoint(u, scratch_);
    op_.forward(scratch_, out);
    out.tail(m_) += u.tail(m_);
  }

  // Solves in place, warm-started from the incoming u.
  int solve(Vector& u, const Vector& rhs) {
    apply(u, q_);
    r_ = rhs - q_;
    const double tol = 1e-10 * std::max(1.0, rhs.norm());
    if (r_.norm() <= tol) return 0;
    z_ = r_.cwiseQuotient(precond_);
    p_ = z_;
    double rz = r_.dot(z_);
    const int maxit = 2 * (m_ + 1) + 20;
    int it = 0;
    for (; it < maxit; ++it) {
      apply(p_, q_);
      const double pq = p_.dot(q_);
      if (pq <= 0.0) break;
      const double alpha = rz / pq;
      u += alpha * p_;
      r_ -= alpha * q_;
      if (r_.norm() <= tol) break;
      z_ = r_.cwiseQuotient(precond_);
      const double rz_new = r_.dot(z_);
      p_ = z_ + (rz_new / rz) * p_;
      rz = rz_new;
    }
    return it;
  }

 private:
  const StackedOperator& op_;
  int m_;
  Vector precond_;
  Matrix scratch_;
  Vector q_, r_, z_, p_;
};

}  // namespace

SdpSolution solve(const RelaxationModel& model, const SolverConfig& config) {
  if (config.tolerance <= 0.0 || config.max_iterations < 1)
    throw std::invalid_argument("solve: bad solver configuration");
  const int n = model.n;
  const int d = n + 1;
  const auto& rows = model.catalog.constraints();
  const int m = static_cast<int>(rows.size());

  const double sigma = std::max(1.0, model.Qt.norm());
  const Matrix Qs = model.Qt / sigma;
  const Vector b = model.rhs();
  StackedOperator op{&rows, d};
  NormalSystem system(op, m);

  Matrix Xt, Z, S;
  Vector v, t, s;
  double y0 = 0.0;
  double mu = config.penalty_init;

  if (config.warm_start) {
    const SdpSolution& w = *config.warm_start;
    if (w.primal.dim() != n || w.dual_v.size() != m || w.slack.size() != m)
      throw std::invalid_argument("solve: warm start has mismatched dimensions");
    Xt = w.primal.bordered();
    Z = w.dual_Z / sigma;
    S = w.dual_S / sigma;
    v = w.dual_v / sigma;
    y0 = w.dual_y / sigma;
    s = w.slack;
    t = v.cwiseMax(0.0);
    if (w.penalty > 0.0) mu = w.penalty;
  } else {
    Vector x0 = Vector::Constant(n, 0.5);
    LiftedPoint p0{x0, x0 * x0.transpose() + 0.25 * Matrix::Identity(n, n)};
    Xt = p0.bordered();
    Z = Matrix::Zero(d, d);
    S = Matrix::Zero(d, d);
    v = Vector::Zero(m);
    s = Vector::Zero(m);
    Vector ax(m + 1);
    op.forward(Xt, ax);
    for (int i = 0; i < m; ++i) s(i) = std::max(ax(i + 1) - b(i), 0.0);
    t = Vector::Zero(m);
  }

  Vector u(m + 1), rhs(m + 1), ax(m + 1), aq(m + 1);
  u(0) = y0;
  u.tail(m) = v;
  Matrix adj(d, d), M1(d, d), W(d, d);

  const int check_every = 20;
  const int penalty_every = 100;
  SdpSolution out;
  out.status = SolveStatus::iteration_limit;
  out.iterations = config.max_iterations;

  double last_primal = 1.0, last_dual = 1.0;
  // (iteration, residual) history for stall detection
  std::vector<std::pair<int, double>> history;

  Matrix aq_mat = Matrix::Zero(d, d);
  Vector a_qzs(m + 1);

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    // (y, v) block: (A A* + diag(0, I)) u = A(Qs - Z - S) + (bhat - A(Xt))/mu + (0; t)
    aq_mat = Qs - Z - S;
    op.forward(aq_mat, a_qzs);
    op.forward(Xt, ax);
    rhs(0) = a_qzs(0) + (1.0 - ax(0)) / mu;
    for (int i = 0; i < m; ++i)
      rhs(i + 1) = a_qzs(i + 1) + (b(i) - ax(i + 1) + s(i)) / mu + t(i);
    system.solve(u, rhs);
    y0 = u(0);
    v = u.tail(m);

    // (S, t) block
    op.adjoint(u, adj);
    M1 = Qs - adj - Xt / mu;
    S = (M1 - Z).cwiseMax(0.0);
    t = (v - s / mu).cwiseMax(0.0);

    // (Z, Xt) block from one eigendecomposition of W
    W = M1 - S;
    W = 0.5 * (W + W.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(W);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("solve: eigendecomposition failed in ADMM step");
    const Vector lam_pos = es.eigenvalues().cwiseMax(0.0);
    Z = es.eigenvectors() * lam_pos.asDiagonal() * es.eigenvectors().transpose();
    Xt = mu * (Z - W);
    s = (s - mu * v).cwiseMax(0.0);

    const bool last = iter == config.max_iterations;
    if (iter % check_every == 0 || last) {
      const ScaledResiduals res =
          compute_residuals(sigma, Qs, b, op, Xt, y0, v, Z, S);
      last_primal = res.primal;
      last_dual = res.dual;
      const double kkt = std::max({res.primal, res.dual, res.gap});
      if (config.trace) {
        *config.trace << iter << ',' << res.primal << ',' << res.dual << ','
                      << res.gap << ',' << res.pobj << '\n';
      }
      history.emplace_back(iter, kkt);
      if (kkt <= config.tolerance) {
        out.status = SolveStatus::converged;
        out.iterations = iter;
        break;
      }
      if (config.deadline && std::chrono::steady_clock::now() >= *config.deadline) {
        out.iterations = iter;
        break;
      }
      // stalled: relative residual change below 1e-12 across 200 iterations
      for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (iter - it->first < 200) continue;
        if (std::abs(it->second - kkt) < 1e-12 * std::max(1.0, kkt)) {
          out.status = SolveStatus::stalled;
          out.iterations = iter;
        }
        break;
      }
      if (out.status == SolveStatus::stalled) break;
    }

    // Residual balancing. The scheme runs on the dual, so a lagging
    // dual-feasibility residual calls for a larger penalty and vice versa.
    if (iter % penalty_every == 0) {
      if (last_dual > config.penalty_trigger * last_primal)
        mu = std::min(mu * config.penalty_factor, 1e8);
      else if (last_primal > config.penalty_trigger * last_dual)
        mu = std::max(mu / config.penalty_factor, 1e-6);
    }
  }

  out.primal = LiftedPoint::from_bordered(Xt);
  out.raw_objective = model.Qt.cwiseProduct(Xt).sum();
  out.dual_y = sigma * y0;
  out.dual_v = sigma * v;
  out.dual_S = sigma * S;
  out.dual_Z = sigma * Z;
  out.slack = s;
  out.penalty = mu;
  // Recompute the residual through the public path so it is reproducible
  // from the returned fields alone (the border entry is renormalized to 1).
  out.kkt_residual = residuals(model, out).max_residual();
  if (out.status == SolveStatus::iteration_limit) out.iterations = config.max_iterations;
  return out;
}

ResidualReport residuals(const RelaxationModel& model, const SdpSolution& sol) {
  const int d = model.n + 1;
  const auto& rows = model.catalog.constraints();
  const int m = static_cast<int>(rows.size());
  if (sol.primal.dim() != model.n || sol.dual_v.size() != m)
    throw std::invalid_argument("residuals: dimension mismatch");
  const double sigma = std::max(1.0, model.Qt.norm());
  const Matrix Qs = model.Qt / sigma;
  const Vector b = model.rhs();
  StackedOperator op{&rows, d};
  const Matrix Xt = sol.primal.bordered();
  const ScaledResiduals res =
      compute_residuals(sigma, Qs, b, op, Xt, sol.dual_y / sigma,
                        sol.dual_v / sigma, sol.dual_Z / sigma, sol.dual_S / sigma);
  return {res.primal, res.dual, res.gap};
}

}  // namespace boxqp
