#ifndef BOXQP_INSTANCE_HPP
#define BOXQP_INSTANCE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace boxqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Origin { native_box, converted_binary };
enum class Convention { min, max };
enum class ShiftPolicy { max_diag, per_diag };

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// min over [0,1]^n of 0.5 x'Qx + c'x + objective_constant.
// Q is kept exactly symmetric (bitwise) after construction.
struct Instance {
  int n = 0;
  Matrix Q;
  Vector c;
  double objective_constant = 0.0;
  Origin origin = Origin::native_box;
  std::optional<Vector> lambda_shift;  // set iff origin == converted_binary
};

// Builds an Instance, mirroring the upper triangle of Q onto the lower so
// the symmetry invariant holds bitwise. Throws std::invalid_argument on a
// dimension mismatch or n < 1.
Instance make_instance(Matrix Q, Vector c, double constant = 0.0,
                       Origin origin = Origin::native_box,
                       std::optional<Vector> lambda = std::nullopt);

// N: indices with Q_ii <= 0 (binary at any optimum), P: indices with Q_ii > 0.
struct IndexClassification {
  std::vector<int> n_set;
  std::vector<int> p_set;
};

// Row-wise extreme values of Q_i x over the unit box: lower = sum of the
// negative entries of row i, upper = sum of the positive entries.
struct RowBounds {
  Vector lower;
  Vector upper;
};

// Dense format:  line 1: n, line 2: c (n values), lines 3..n+2: rows of Q.
// Sparse variant: "SPARSE n nnz", nnz lines "i j value" (1-based, upper
// triangle), then a line "c" followed by n values. '#' starts a comment.
// convention == max negates Q and c on ingest. An asymmetric dense Q is a
// ParseError unless symmetrize is set, in which case (Q + Q')/2 is used.
Instance parse_instance(std::istream& in, Convention convention,
                        bool symmetrize = false);
Instance parse_instance_file(const std::string& path, Convention convention,
                             bool symmetrize = false);

// Canonical writer for the dense format; integer values are written without
// a decimal point so generate -> parse -> write round-trips byte-identically.
void write_instance(std::ostream& out, const Instance& inst);

// spar-style generator: every entry of the upper triangle of Q (diagonal
// included) is nonzero with probability density_pct/100; nonzero Q entries
// and all c entries are integers uniform in [-50, 50]. Deterministic in the
// seed (SplitMix64, fixed draw order: Q by rows i <= j, then c).
Instance generate_spar(int n, int density_pct, std::uint64_t seed);

IndexClassification classify(const Instance& inst);

RowBounds row_bounds(const Instance& inst);

// Binary QP min over {0,1}^n of 0.5 x'Qx + c'x, rewritten over the box with
// Hessian Q - Diag(lambda) and linear term c + lambda. max_diag uses
// lambda_i = max_j Q_jj, per_diag uses lambda_i = Q_ii; either way the new
// diagonal is nonpositive, so box optima are binary.
Instance binary_to_box(const Matrix& Q, const Vector& c,
                       ShiftPolicy policy = ShiftPolicy::max_diag);

// Objective value at x; x must lie in the box within 1e-9 (domain_error).
double evaluate(const Instance& inst, const Vector& x);

// Gradient Qx + c (constant plays no role).
Vector gradient(const Instance& inst, const Vector& x);

}  // namespace boxqp

#endif
