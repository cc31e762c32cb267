#include "elliptic/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "elliptic/error.hpp"

namespace elliptic {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimMismatch, std::string(what) + ": shapes " + std::to_string(a.rows()) + "x" +
                                            std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                                            "x" + std::to_string(b.cols()));
  }
}

void require_same_dim(const SymmetricMatrix& a, const SymmetricMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimMismatch,
                std::string(what) + ": dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorKind::InvalidMatrix, "matrix has no rows");
  const std::size_t cols = rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorKind::InvalidMatrix, "ragged row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  if (!m.all_finite()) throw Error(ErrorKind::InvalidMatrix, "non-finite entry");
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimMismatch, "matrix product: inner dimensions " + std::to_string(a.cols()) + " and " +
                                            std::to_string(b.rows()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix sum");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix difference");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}

// ---------------------------------------------------------------------------
// SymmetricMatrix

SymmetricMatrix::SymmetricMatrix(std::size_t n) : m_(n, n) {
  if (n == 0) throw Error(ErrorKind::InvalidMatrix, "dimension must be positive");
}

SymmetricMatrix SymmetricMatrix::from_matrix(const Matrix& m) {
  if (!m.square() || m.rows() == 0) {
    throw Error(ErrorKind::InvalidMatrix,
                "symmetric matrix must be square and non-empty, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  if (!m.all_finite()) throw Error(ErrorKind::InvalidMatrix, "non-finite entry");
  double asym = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
  if (asym > 1e-8 * m.max_abs()) {
    throw Error(ErrorKind::InvalidMatrix, "asymmetry " + std::to_string(asym) + " exceeds 1e-8 * max|entry|");
  }
  SymmetricMatrix s = symmetrized(m);
  s.asymmetry_ = asym;
  return s;
}

SymmetricMatrix SymmetricMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  return from_matrix(Matrix::from_rows(rows));
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) { return scalar(n, 1.0); }

SymmetricMatrix SymmetricMatrix::scalar(std::size_t n, double value) {
  SymmetricMatrix s(n);
  for (std::size_t i = 0; i < n; ++i) s.m_(i, i) = value;
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidMatrix, "non-finite entry");
  return s;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> entries) {
  SymmetricMatrix s(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i])) throw Error(ErrorKind::InvalidMatrix, "non-finite entry");
    s.m_(i, i) = entries[i];
  }
  return s;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::initializer_list<double> entries) {
  return diagonal(std::span<const double>(entries.begin(), entries.size()));
}

SymmetricMatrix SymmetricMatrix::symmetrized(const Matrix& m) {
  if (!m.square() || m.rows() == 0) throw Error(ErrorKind::InvalidMatrix, "symmetric matrix must be square");
  if (!m.all_finite()) throw Error(ErrorKind::InvalidMatrix, "non-finite entry");
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      out(i, j) = avg;
      out(j, i) = avg;
    }
  return SymmetricMatrix(std::move(out), 0.0);
}

double SymmetricMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i);
  return t;
}

double SymmetricMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double v : m_.data()) s += v * v;
  return std::sqrt(s);
}

SymmetricMatrix SymmetricMatrix::square() const { return symmetrized(m_ * m_); }

std::vector<double> SymmetricMatrix::apply(std::span<const double> v) const {
  if (v.size() != dim()) {
    throw Error(ErrorKind::DimMismatch,
                "matrix-vector product: dims " + std::to_string(dim()) + " and " + std::to_string(v.size()));
  }
  std::vector<double> out(dim(), 0.0);
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) out[i] += m_(i, j) * v[j];
  return out;
}

double SymmetricMatrix::quadratic_form(std::span<const double> v) const {
  const auto xv = apply(v);
  return std::inner_product(xv.begin(), xv.end(), v.begin(), 0.0);
}

SymmetricMatrix SymmetricMatrix::operator-() const { return SymmetricMatrix(-1.0 * m_, 0.0); }

SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  require_same_dim(a, b, "symmetric sum");
  return SymmetricMatrix(a.m_ + b.m_, 0.0);
}

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  require_same_dim(a, b, "symmetric difference");
  return SymmetricMatrix(a.m_ - b.m_, 0.0);
}

SymmetricMatrix operator*(double s, const SymmetricMatrix& a) { return SymmetricMatrix(s * a.m_, 0.0); }

// ---------------------------------------------------------------------------
// Eigensystem

Spectrum eigen_decompose(const SymmetricMatrix& x) {
  const std::size_t n = x.dim();
  if (n == 0) throw Error(ErrorKind::InvalidMatrix, "empty matrix");
  if (!x.matrix().all_finite()) throw Error(ErrorKind::InvalidMatrix, "non-finite entry");

  Matrix a = x.matrix();
  Matrix v = Matrix::identity(n);
  const double target = 1e-12 * x.frobenius_norm();

  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= target) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.eigenvalues[col] = a(src, src);
    std::size_t big = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(v(r, src)) > std::abs(v(big, src))) big = r;
    const double sign = v(big, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, col) = sign * v(r, src);
  }
  return out;
}

std::vector<double> eigenvalues(const SymmetricMatrix& x) { return eigen_decompose(x).eigenvalues; }

double lambda_min(const SymmetricMatrix& x) { return eigen_decompose(x).min(); }

double lambda_max(const SymmetricMatrix& x) { return eigen_decompose(x).max(); }

double operator_norm(const SymmetricMatrix& x) {
  const auto ev = eigenvalues(x);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

double loewner_margin(const SymmetricMatrix& x, const SymmetricMatrix& y) {
  require_same_dim(x, y, "loewner order");
  return lambda_min(y - x);
}

bool loewner_leq(const SymmetricMatrix& x, const SymmetricMatrix& y, double tol) {
  if (!(tol >= 0.0)) throw Error(ErrorKind::BadArgument, "tolerance must be non-negative");
  return loewner_margin(x, y) >= -tol;
}

bool is_psd(const SymmetricMatrix& x, double tol) { return lambda_min(x) >= -tol; }

double elementary_symmetric(int k, std::span<const double> v) {
  if (k < 1 || static_cast<std::size_t>(k) > v.size()) {
    throw Error(ErrorKind::BadArgument,
                "elementary_symmetric: k = " + std::to_string(k) + " outside 1.." + std::to_string(v.size()));
  }
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t top = std::min<std::size_t>(i + 1, static_cast<std::size_t>(k));
    for (std::size_t j = top; j >= 1; --j) e[j] += v[i] * e[j - 1];
  }
  return e[static_cast<std::size_t>(k)];
}

bool gamma_k_member(const SymmetricMatrix& x, int k, double tol) {
  if (k < 1 || static_cast<std::size_t>(k) > x.dim()) {
    throw Error(ErrorKind::BadArgument,
                "gamma_k_member: k = " + std::to_string(k) + " outside 1.." + std::to_string(x.dim()));
  }
  const auto ev = eigenvalues(x);
  for (int j = 1; j <= k; ++j)
    if (elementary_symmetric(j, ev) < -tol) return false;
  return true;
}

double trace_product(const SymmetricMatrix& c, const SymmetricMatrix& a) {
  require_same_dim(c, a, "trace product");
  double t = 0.0;
  for (std::size_t i = 0; i < c.dim(); ++i)
    for (std::size_t j = 0; j < c.dim(); ++j) t += c(i, j) * a(j, i);
  return t;
}

SymmetricMatrix congruence(const Matrix& q, const SymmetricMatrix& x) {
  return SymmetricMatrix::symmetrized(q * x.matrix() * q.transpose());
}

SymmetricMatrix gram(const Matrix& p) { return SymmetricMatrix::symmetrized(p.transpose() * p); }

double sigma_max(const Matrix& b) {
  if (b.rows() == 0 || b.cols() == 0) throw Error(ErrorKind::InvalidMatrix, "empty matrix");
  return std::sqrt(std::max(0.0, lambda_max(gram(b))));
}

// ---------------------------------------------------------------------------
// 2N x 2N blocks

SymmetricMatrix BlockMatrix2N::assemble() const {
  const std::size_t n = half_dim();
  Matrix a(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = E(i, j);
      a(n + i, n + j) = D(i, j);
      a(i, n + j) = B(i, j);
      a(n + j, i) = B(i, j);
    }
  return SymmetricMatrix::symmetrized(a);
}

BlockMatrix2N block_compose(const SymmetricMatrix& e, const Matrix& b, const SymmetricMatrix& d) {
  const std::size_t n = e.dim();
  if (d.dim() != n || b.rows() != n || b.cols() != n) {
    throw Error(ErrorKind::DimMismatch, "block_compose: E is " + std::to_string(n) + ", D is " +
                                            std::to_string(d.dim()) + ", B is " + std::to_string(b.rows()) +
                                            "x" + std::to_string(b.cols()));
  }
  if (!b.all_finite()) throw Error(ErrorKind::InvalidMatrix, "non-finite entry in B");
  return BlockMatrix2N{e, b, d};
}

BlockMatrix2N block_extract(const SymmetricMatrix& a) {
  if (a.dim() % 2 != 0) {
    throw Error(ErrorKind::DimMismatch, "block_extract: odd dimension " + std::to_string(a.dim()));
  }
  const std::size_t n = a.dim() / 2;
  Matrix e(n, n), b(n, n), d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      e(i, j) = a(i, j);
      b(i, j) = a(i, n + j);
      d(i, j) = a(n + i, n + j);
    }
  return BlockMatrix2N{SymmetricMatrix::symmetrized(e), b, SymmetricMatrix::symmetrized(d)};
}

SymmetricMatrix block_diag(const SymmetricMatrix& x, const SymmetricMatrix& z) {
  const std::size_t n = x.dim();
  const std::size_t m = z.dim();
  Matrix a(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = x(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(n + i, n + j) = z(i, j);
  return SymmetricMatrix::symmetrized(a);
}

}  // namespace elliptic
