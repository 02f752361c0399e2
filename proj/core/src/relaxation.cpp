#include "boxqp/relaxation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace boxqp {

Matrix LiftedPoint::bordered() const {
  const int n = dim();
  Matrix Xt(n + 1, n + 1);
  Xt(0, 0) = 1.0;
  Xt.block(0, 1, 1, n) = x.transpose();
  Xt.block(1, 0, n, 1) = x;
  Xt.block(1, 1, n, n) = X;
  return Xt;
}

LiftedPoint LiftedPoint::from_bordered(const Matrix& Xt) {
  const int n = static_cast<int>(Xt.rows()) - 1;
  LiftedPoint p;
  p.x = 0.5 * (Xt.block(0, 1, 1, n).transpose() + Xt.block(1, 0, n, 1));
  p.X = Xt.block(1, 1, n, n);
  return p;
}

const char* cut_kind_name(CutKind kind) {
  switch (kind) {
    case CutKind::rlt_nonneg: return "rlt_nonneg";
    case CutKind::rlt_le_i: return "rlt_le_i";
    case CutKind::rlt_le_j: return "rlt_le_j";
    case CutKind::rlt_geq_sum: return "rlt_geq_sum";
    case CutKind::rlt_diag_le: return "rlt_diag_le";
    case CutKind::rlt_diag_ge: return "rlt_diag_ge";
    case CutKind::box_lower: return "box_lower";
    case CutKind::box_upper: return "box_upper";
    case CutKind::tri_type1: return "tri_type1";
    case CutKind::tri_type2: return "tri_type2";
    case CutKind::tri_type3: return "tri_type3";
    case CutKind::tri_type4: return "tri_type4";
    case CutKind::fixing_budget: return "fixing_budget";
    case CutKind::ternary_stationarity: return "ternary_stationarity";
  }
  return "?";
}

bool is_triangle(CutKind kind) {
  return kind == CutKind::tri_type1 || kind == CutKind::tri_type2 ||
         kind == CutKind::tri_type3 || kind == CutKind::tri_type4;
}

double LinearConstraint::eval(const Matrix& bordered) const {
  double v = 0.0;
  for (const Entry& e : entries) v += e.weight * bordered(e.row, e.col);
  return v;
}

void LinearConstraint::scatter(double u, Matrix& acc) const {
  for (const Entry& e : entries) {
    if (e.row == e.col) {
      acc(e.row, e.col) += u * e.weight;
    } else {
      acc(e.row, e.col) += 0.5 * u * e.weight;
      acc(e.col, e.row) += 0.5 * u * e.weight;
    }
  }
}

double LinearConstraint::frobenius_sq() const {
  double v = 0.0;
  for (const Entry& e : entries)
    v += (e.row == e.col) ? e.weight * e.weight : 0.5 * e.weight * e.weight;
  return v;
}

bool LinearConstraint::touches_variable(int var) const {
  const int b = var + 1;
  for (const Entry& e : entries)
    if (e.row == b || e.col == b) return true;
  return false;
}

namespace {

LinearConstraint::Entry x_entry(int i, double w) { return {0, i + 1, w}; }

LinearConstraint::Entry xx_entry(int i, int j, double w) {
  return {std::min(i, j) + 1, std::max(i, j) + 1, w};
}

LinearConstraint make(CutKind kind, std::array<int, 3> idx,
                      std::vector<LinearConstraint::Entry> entries, double rhs) {
  LinearConstraint c;
  c.kind = kind;
  c.idx = idx;
  c.entries = std::move(entries);
  c.rhs = rhs;
  return c;
}

}  // namespace

LinearConstraint make_rlt_nonneg(int i, int j) {
  return make(CutKind::rlt_nonneg, {std::min(i, j), std::max(i, j), -1},
              {xx_entry(i, j, 1.0)}, 0.0);
}

LinearConstraint make_rlt_le_i(int i, int j) {
  return make(CutKind::rlt_le_i, {i, j, -1},
              {x_entry(i, 1.0), xx_entry(i, j, -1.0)}, 0.0);
}

LinearConstraint make_rlt_le_j(int i, int j) {
  return make(CutKind::rlt_le_j, {i, j, -1},
              {x_entry(j, 1.0), xx_entry(i, j, -1.0)}, 0.0);
}

LinearConstraint make_rlt_geq_sum(int i, int j) {
  return make(CutKind::rlt_geq_sum, {i, j, -1},
              {xx_entry(i, j, 1.0), x_entry(i, -1.0), x_entry(j, -1.0)}, -1.0);
}

LinearConstraint make_rlt_diag_le(int i) {
  return make(CutKind::rlt_diag_le, {i, -1, -1},
              {x_entry(i, 1.0), xx_entry(i, i, -1.0)}, 0.0);
}

LinearConstraint make_rlt_diag_ge(int i) {
  return make(CutKind::rlt_diag_ge, {i, -1, -1},
              {xx_entry(i, i, 1.0), x_entry(i, -2.0)}, -1.0);
}

LinearConstraint make_box_lower(int i) {
  return make(CutKind::box_lower, {i, -1, -1}, {x_entry(i, 1.0)}, 0.0);
}

LinearConstraint make_box_upper(int i) {
  return make(CutKind::box_upper, {i, -1, -1}, {x_entry(i, -1.0)}, -1.0);
}

LinearConstraint make_triangle(CutKind kind, int i, int j, int t) {
  switch (kind) {
    case CutKind::tri_type1:
      return make(kind, {i, j, t},
                  {xx_entry(i, j, 1.0), xx_entry(i, t, 1.0), xx_entry(j, t, 1.0),
                   x_entry(i, -1.0), x_entry(j, -1.0), x_entry(t, -1.0)},
                  -1.0);
    case CutKind::tri_type2:
      return make(kind, {i, j, t},
                  {x_entry(i, 1.0), xx_entry(j, t, 1.0), xx_entry(i, j, -1.0),
                   xx_entry(i, t, -1.0)},
                  0.0);
    case CutKind::tri_type3:
      return make(kind, {i, j, t},
                  {x_entry(j, 1.0), xx_entry(i, t, 1.0), xx_entry(i, j, -1.0),
                   xx_entry(j, t, -1.0)},
                  0.0);
    case CutKind::tri_type4:
      return make(kind, {i, j, t},
                  {x_entry(t, 1.0), xx_entry(i, j, 1.0), xx_entry(i, t, -1.0),
                   xx_entry(j, t, -1.0)},
                  0.0);
    default:
      throw std::logic_error("make_triangle: not a triangle kind");
  }
}

LinearConstraint make_fixing_budget(const std::vector<int>& t0,
                                    const std::vector<int>& t1, double eps1) {
  LinearConstraint c;
  c.kind = CutKind::fixing_budget;
  for (int i : t0) c.entries.push_back(x_entry(i, 1.0));
  for (int i : t1) c.entries.push_back(x_entry(i, -1.0));
  const double t = static_cast<double>(t0.size() + t1.size());
  c.rhs = static_cast<double>(t0.size()) - t + 1.0 - eps1;
  return c;
}

LinearConstraint make_ternary_stationarity(const Instance& inst, int i, int sign) {
  LinearConstraint c;
  c.kind = CutKind::ternary_stationarity;
  c.idx = {i, sign > 0 ? 1 : 0, -1};
  const double s = sign > 0 ? 1.0 : -1.0;
  for (int j = 0; j < inst.n; ++j)
    if (inst.Q(i, j) != 0.0) c.entries.push_back(x_entry(j, s * inst.Q(i, j)));
  c.rhs = -s * inst.c(i);
  return c;
}

std::uint64_t ConstraintCatalog::key(CutKind kind, const std::array<int, 3>& idx) {
  std::uint64_t k = static_cast<std::uint64_t>(kind);
  for (int v : idx) k = k * 0x100000001B3ULL + static_cast<std::uint64_t>(v + 2);
  return k;
}

bool ConstraintCatalog::add(LinearConstraint constraint) {
  const std::uint64_t k = key(constraint.kind, constraint.idx);
  auto [it, inserted] = index_.try_emplace(k, rows_.size());
  if (!inserted) {
    if (rows_[it->second].rhs != constraint.rhs)
      throw std::logic_error("ConstraintCatalog: duplicate row with conflicting rhs");
    return false;
  }
  rows_.push_back(std::move(constraint));
  return true;
}

std::size_t ConstraintCatalog::count(CutKind kind) const {
  std::size_t c = 0;
  for (const auto& r : rows_)
    if (r.kind == kind) ++c;
  return c;
}

bool ConstraintCatalog::contains(CutKind kind, const std::array<int, 3>& idx) const {
  return index_.count(key(kind, idx)) != 0;
}

Vector ConstraintCatalog::rhs() const {
  Vector b(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) b(i) = rows_[i].rhs;
  return b;
}

ConstraintCatalog build_rlt_catalog(int n) {
  if (n < 1) throw std::invalid_argument("build_rlt_catalog: n must be >= 1");
  ConstraintCatalog cat;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      cat.add(make_rlt_nonneg(i, j));
      cat.add(make_rlt_le_i(i, j));
      cat.add(make_rlt_le_j(i, j));
      cat.add(make_rlt_geq_sum(i, j));
    }
  for (int i = 0; i < n; ++i) {
    cat.add(make_rlt_diag_le(i));
    cat.add(make_rlt_diag_ge(i));
    cat.add(make_rlt_nonneg(i, i));
  }
  for (int i = 0; i < n; ++i) {
    cat.add(make_box_lower(i));
    cat.add(make_box_upper(i));
  }
  return cat;
}

std::vector<ViolatedCut> separate_triangles(const LiftedPoint& point,
                                            std::size_t max_separated,
                                            double violation_tol) {
  const int n = point.dim();
  const Vector& x = point.x;
  const Matrix& X = point.X;
  std::vector<ViolatedCut> found;

  auto push = [&](CutKind kind, int i, int j, int t, double violation) {
    found.push_back({make_triangle(kind, i, j, t), violation});
  };

  bool full = false;
  for (int i = 0; i < n && !full; ++i)
    for (int j = i + 1; j < n && !full; ++j)
      for (int t = j + 1; t < n && !full; ++t) {
        const double xij = X(i, j), xit = X(i, t), xjt = X(j, t);
        const double v1 = x(i) + x(j) + x(t) - xij - xit - xjt - 1.0;
        const double v2 = xij + xit - x(i) - xjt;
        const double v3 = xij + xjt - x(j) - xit;
        const double v4 = xit + xjt - x(t) - xij;
        if (v1 > violation_tol) push(CutKind::tri_type1, i, j, t, v1);
        if (found.size() >= max_separated) { full = true; break; }
        if (v2 > violation_tol) push(CutKind::tri_type2, i, j, t, v2);
        if (found.size() >= max_separated) { full = true; break; }
        if (v3 > violation_tol) push(CutKind::tri_type3, i, j, t, v3);
        if (found.size() >= max_separated) { full = true; break; }
        if (v4 > violation_tol) push(CutKind::tri_type4, i, j, t, v4);
        if (found.size() >= max_separated) { full = true; break; }
      }

  std::sort(found.begin(), found.end(), [](const ViolatedCut& a, const ViolatedCut& b) {
    if (a.violation != b.violation) return a.violation > b.violation;
    if (a.cut.kind != b.cut.kind) return a.cut.kind < b.cut.kind;
    return a.cut.idx < b.cut.idx;
  });
  return found;
}

ConstraintCatalog purge_inactive(const ConstraintCatalog& catalog,
                                 const LiftedPoint& point, double slack_tol) {
  const Matrix Xt = point.bordered();
  ConstraintCatalog kept;
  for (const auto& row : catalog.constraints()) {
    if (is_triangle(row.kind) && row.slack(Xt) > slack_tol) continue;
    kept.add(row);
  }
  return kept;
}

RelaxationModel assemble_model(const Instance& inst,
                               const std::vector<LinearConstraint>& extra_cuts) {
  RelaxationModel model;
  model.n = inst.n;
  model.Qt = Matrix::Zero(inst.n + 1, inst.n + 1);
  model.Qt.block(0, 1, 1, inst.n) = 0.5 * inst.c.transpose();
  model.Qt.block(1, 0, inst.n, 1) = 0.5 * inst.c;
  model.Qt.block(1, 1, inst.n, inst.n) = 0.5 * inst.Q;
  model.catalog = build_rlt_catalog(inst.n);
  for (const auto& cut : extra_cuts) model.catalog.add(cut);
  return model;
}

void dump_catalog(std::ostream& out, const ConstraintCatalog& catalog) {
  char buf[64];
  for (const auto& row : catalog.constraints()) {
    out << cut_kind_name(row.kind) << ' ' << row.idx[0] << ' ' << row.idx[1]
        << ' ' << row.idx[2];
    for (const auto& e : row.entries) {
      std::snprintf(buf, sizeof buf, " %.17g@(%d,%d)", e.weight, e.row, e.col);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, " >= %.17g", row.rhs);
    out << buf << "\n";
  }
}

}  // namespace boxqp
