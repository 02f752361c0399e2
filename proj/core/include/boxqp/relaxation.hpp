#ifndef BOXQP_RELAXATION_HPP
#define BOXQP_RELAXATION_HPP

#include <array>
#include <cstddef>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "boxqp/instance.hpp"

namespace boxqp {

// Point (x, X) in the lifted space; bordered() is [[1, x'], [x, X]].
struct LiftedPoint {
  Vector x;
  Matrix X;

  Matrix bordered() const;
  static LiftedPoint from_bordered(const Matrix& Xt);
  int dim() const { return static_cast<int>(x.size()); }
};

enum class CutKind : std::uint8_t {
  rlt_nonneg,    // X_ij >= 0 (i == j covers the diagonal)
  rlt_le_i,      // x_i - X_ij >= 0
  rlt_le_j,      // x_j - X_ij >= 0
  rlt_geq_sum,   // X_ij - x_i - x_j >= -1
  rlt_diag_le,   // x_i - X_ii >= 0
  rlt_diag_ge,   // X_ii - 2 x_i >= -1
  box_lower,     // x_i >= 0
  box_upper,     // -x_i >= -1
  tri_type1,     // X_ij + X_it + X_jt - x_i - x_j - x_t >= -1
  tri_type2,     // x_i + X_jt - X_ij - X_it >= 0
  tri_type3,     // x_j + X_it - X_ij - X_jt >= 0
  tri_type4,     // x_t + X_ij - X_it - X_jt >= 0
  fixing_budget,
  ternary_stationarity,
};

const char* cut_kind_name(CutKind kind);
bool is_triangle(CutKind kind);

// One row of the linear operator, normalized to ">= rhs". Entries live in
// bordered coordinates (row 0 is the x border) on the upper triangle; an
// off-diagonal entry (p, q, w) stands for w/2 at both (p,q) and (q,p) of
// the symmetric coefficient matrix, so eval() equals the trace inner
// product against the bordered matrix.
struct LinearConstraint {
  struct Entry {
    int row;
    int col;
    double weight;
  };

  CutKind kind;
  std::array<int, 3> idx{{-1, -1, -1}};
  std::vector<Entry> entries;
  double rhs = 0.0;

  double eval(const Matrix& bordered) const;
  double slack(const Matrix& bordered) const { return eval(bordered) - rhs; }
  // Scatters u * B into a dense symmetric accumulator.
  void scatter(double u, Matrix& acc) const;
  double frobenius_sq() const;
  bool touches_variable(int var) const;
};

LinearConstraint make_rlt_nonneg(int i, int j);
LinearConstraint make_rlt_le_i(int i, int j);
LinearConstraint make_rlt_le_j(int i, int j);
LinearConstraint make_rlt_geq_sum(int i, int j);
LinearConstraint make_rlt_diag_le(int i);
LinearConstraint make_rlt_diag_ge(int i);
LinearConstraint make_box_lower(int i);
LinearConstraint make_box_upper(int i);
LinearConstraint make_triangle(CutKind kind, int i, int j, int t);
// sum_{i in t0} x_i - sum_{i in t1} x_i >= |t0| - |t| + 1 - eps1
LinearConstraint make_fixing_budget(const std::vector<int>& t0,
                                    const std::vector<int>& t1, double eps1);
// Q_i x >= -c_i (sign=+1) or -Q_i x >= c_i (sign=-1).
LinearConstraint make_ternary_stationarity(const Instance& inst, int i, int sign);

// Indexed constraint list with (kind, idx) deduplication.
class ConstraintCatalog {
 public:
  // Returns false when an identical (kind, idx) row is already present;
  // throws std::logic_error if the duplicate carries a different rhs.
  bool add(LinearConstraint constraint);
  const std::vector<LinearConstraint>& constraints() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t count(CutKind kind) const;
  bool contains(CutKind kind, const std::array<int, 3>& idx) const;
  Vector rhs() const;

 private:
  static std::uint64_t key(CutKind kind, const std::array<int, 3>& idx);
  std::vector<LinearConstraint> rows_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

// RLT rows for all pairs, diagonal rows, and explicit box rows.
ConstraintCatalog build_rlt_catalog(int n);

struct ViolatedCut {
  LinearConstraint cut;
  double violation;
};

// Scans all 4*C(n,3) triangle inequalities at `point`, collecting the ones
// violated by more than violation_tol until max_separated are found, then
// sorts by decreasing violation (ties: kind, i, j, t).
std::vector<ViolatedCut> separate_triangles(const LiftedPoint& point,
                                            std::size_t max_separated,
                                            double violation_tol);

// Drops triangle rows whose slack at `point` exceeds slack_tol; every other
// kind is kept. A violated triangle (negative slack) is always kept.
ConstraintCatalog purge_inactive(const ConstraintCatalog& catalog,
                                 const LiftedPoint& point, double slack_tol);

// Standard-form data: objective matrix 0.5*[[0, c'],[c, Q]] and catalog.
struct RelaxationModel {
  int n = 0;
  Matrix Qt;
  ConstraintCatalog catalog;

  Vector rhs() const { return catalog.rhs(); }
  std::size_t num_constraints() const { return catalog.size(); }
};

RelaxationModel assemble_model(const Instance& inst,
                               const std::vector<LinearConstraint>& extra_cuts = {});

// Debug dump, one line per row: "kind i j t entries... rhs".
void dump_catalog(std::ostream& out, const ConstraintCatalog& catalog);

}  // namespace boxqp

#endif
