#include "boxqp/instance.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "boxqp/rng.hpp"

namespace boxqp {

Instance make_instance(Matrix Q, Vector c, double constant, Origin origin,
                       std::optional<Vector> lambda) {
  const auto n = Q.rows();
  if (n < 1 || Q.cols() != n || c.size() != n)
    throw std::invalid_argument("make_instance: inconsistent dimensions");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) Q(j, i) = Q(i, j);
  Instance inst;
  inst.n = static_cast<int>(n);
  inst.Q = std::move(Q);
  inst.c = std::move(c);
  inst.objective_constant = constant;
  inst.origin = origin;
  inst.lambda_shift = std::move(lambda);
  return inst;
}

namespace {

// Token scanner that tracks line numbers and skips '#' comments.
class Scanner {
 public:
  explicit Scanner(std::istream& in) : in_(in) {}

  bool next_token(std::string& tok) {
    tok.clear();
    int ch;
    while ((ch = in_.get()) != EOF) {
      if (ch == '#') {
        while ((ch = in_.get()) != EOF && ch != '\n') {
        }
        if (ch == '\n') ++line_;
        continue;
      }
      if (ch == '\n') {
        ++line_;
        continue;
      }
      if (std::isspace(ch)) continue;
      break;
    }
    if (ch == EOF) return false;
    token_line_ = line_;
    do {
      tok.push_back(static_cast<char>(ch));
      ch = in_.get();
    } while (ch != EOF && !std::isspace(ch) && ch != '#');
    if (ch == '#') in_.unget();
    if (ch == '\n') ++line_;
    return true;
  }

  double next_number(const char* what) {
    std::string tok;
    if (!next_token(tok)) fail(std::string("unexpected end of input, expected ") + what);
    try {
      std::size_t pos = 0;
      double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail(std::string("non-numeric token '") + tok + "' while reading " + what);
    }
    return 0.0;  // unreachable
  }

  long long next_int(const char* what) {
    double v = next_number(what);
    if (v != std::floor(v)) fail(std::string("expected integer for ") + what);
    return static_cast<long long>(v);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("parse error at line " + std::to_string(token_line_) + ": " + msg);
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 1;
  int token_line_ = 1;
};

}  // namespace

Instance parse_instance(std::istream& in, Convention convention, bool symmetrize) {
  Scanner sc(in);
  std::string tok;
  if (!sc.next_token(tok)) sc.fail("empty input");

  Matrix Q;
  Vector c;
  if (tok == "SPARSE") {
    const long long n = sc.next_int("n");
    const long long nnz = sc.next_int("nnz");
    if (n < 1) sc.fail("n must be >= 1");
    Q = Matrix::Zero(n, n);
    c = Vector::Zero(n);
    for (long long k = 0; k < nnz; ++k) {
      const long long i = sc.next_int("row index");
      const long long j = sc.next_int("col index");
      const double v = sc.next_number("entry value");
      if (i < 1 || i > n || j < 1 || j > n) sc.fail("index out of range");
      if (i > j) sc.fail("sparse entries must be on the upper triangle (i <= j)");
      Q(i - 1, j - 1) = v;
      Q(j - 1, i - 1) = v;
    }
    if (!sc.next_token(tok) || tok != "c") sc.fail("expected 'c' marker");
    for (long long i = 0; i < n; ++i) c(i) = sc.next_number("c entry");
  } else {
    long long n = 0;
    try {
      std::size_t pos = 0;
      n = std::stoll(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      sc.fail("expected dimension n or SPARSE header, got '" + tok + "'");
    }
    if (n < 1) sc.fail("n must be >= 1");
    c = Vector(n);
    for (long long i = 0; i < n; ++i) c(i) = sc.next_number("c entry");
    Q = Matrix(n, n);
    for (long long i = 0; i < n; ++i)
      for (long long j = 0; j < n; ++j) Q(i, j) = sc.next_number("Q entry");
    for (long long i = 0; i < n; ++i)
      for (long long j = i + 1; j < n; ++j)
        if (Q(i, j) != Q(j, i)) {
          if (!symmetrize)
            sc.fail("Q is not symmetric at (" + std::to_string(i + 1) + "," +
                    std::to_string(j + 1) + "); rerun with symmetrization enabled");
          const double v = 0.5 * (Q(i, j) + Q(j, i));
          Q(i, j) = v;
          Q(j, i) = v;
        }
  }
  if (sc.next_token(tok)) sc.fail("trailing token '" + tok + "'");

  if (convention == Convention::max) {
    Q = -Q;
    c = -c;
  }
  return make_instance(std::move(Q), std::move(c));
}

Instance parse_instance_file(const std::string& path, Convention convention,
                             bool symmetrize) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_instance(in, convention, symmetrize);
}

namespace {

void write_value(std::ostream& out, double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    out << static_cast<long long>(v);
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  }
}

}  // namespace

void write_instance(std::ostream& out, const Instance& inst) {
  out << inst.n << "\n";
  for (int i = 0; i < inst.n; ++i) {
    if (i) out << ' ';
    write_value(out, inst.c(i));
  }
  out << "\n";
  for (int i = 0; i < inst.n; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      if (j) out << ' ';
      write_value(out, inst.Q(i, j));
    }
    out << "\n";
  }
}

Instance generate_spar(int n, int density_pct, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_spar: n must be >= 2");
  if (density_pct < 1 || density_pct > 100)
    throw std::invalid_argument("generate_spar: density must be in [1,100]");
  SplitMix64 rng(seed);
  Matrix Q = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const bool nonzero = rng.next() % 100 < static_cast<std::uint64_t>(density_pct);
      if (!nonzero) continue;
      const double v = static_cast<double>(rng.uniform_int(-50, 50));
      Q(i, j) = v;
      Q(j, i) = v;
    }
  Vector c(n);
  for (int i = 0; i < n; ++i) c(i) = static_cast<double>(rng.uniform_int(-50, 50));
  return make_instance(std::move(Q), std::move(c));
}

IndexClassification classify(const Instance& inst) {
  IndexClassification cls;
  for (int i = 0; i < inst.n; ++i) {
    if (inst.Q(i, i) <= 0.0)
      cls.n_set.push_back(i);
    else
      cls.p_set.push_back(i);
  }
  return cls;
}

RowBounds row_bounds(const Instance& inst) {
  RowBounds rb{Vector::Zero(inst.n), Vector::Zero(inst.n)};
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.n; ++j) {
      const double q = inst.Q(i, j);
      if (q < 0.0)
        rb.lower(i) += q;
      else
        rb.upper(i) += q;
    }
  return rb;
}

Instance binary_to_box(const Matrix& Q, const Vector& c, ShiftPolicy policy) {
  const auto n = Q.rows();
  if (n < 1 || Q.cols() != n || c.size() != n)
    throw std::invalid_argument("binary_to_box: inconsistent dimensions");
  Vector lambda(n);
  if (policy == ShiftPolicy::max_diag) {
    lambda.setConstant(Q.diagonal().maxCoeff());
  } else {
    lambda = Q.diagonal();
  }
  Matrix Qb = Q;
  Qb.diagonal() -= lambda;
  // Under the 1/2-scaled objective, the diagonal shift contributes
  // -lambda_i/2 x_i^2, so adding lambda_i/2 x_i makes it vanish on binaries.
  return make_instance(std::move(Qb), c + 0.5 * lambda, 0.0,
                       Origin::converted_binary, lambda);
}

double evaluate(const Instance& inst, const Vector& x) {
  if (x.size() != inst.n) throw std::invalid_argument("evaluate: wrong dimension");
  if ((x.array() < -1e-9).any() || (x.array() > 1.0 + 1e-9).any())
    throw std::domain_error("evaluate: point outside the unit box");
  return 0.5 * x.dot(inst.Q * x) + inst.c.dot(x) + inst.objective_constant;
}

Vector gradient(const Instance& inst, const Vector& x) {
  return inst.Q * x + inst.c;
}

}  // namespace boxqp
