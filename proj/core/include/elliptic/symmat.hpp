#pragma once

// Dense symmetric matrices with a Jacobi eigensolver and Loewner-order tests.
//
// Sized for desk-scale verification (N <= 16). Values are immutable after
// construction and all functions are pure.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace elliptic {

inline constexpr double kDefaultLoewnerTol = 1e-9;
inline constexpr std::size_t kMaxDim = 16;

/// Dense row-major real matrix. Used for non-symmetric data such as the
/// off-diagonal block B, eigenvector bases and random factors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

/// Symmetric N x N matrix with exactly symmetric storage.
///
/// Construction from raw data symmetrizes via (M + M^T)/2 and rejects input
/// whose raw asymmetry exceeds 1e-8 * max|entry| (InvalidMatrix), as well as
/// non-finite entries.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n);

  static SymmetricMatrix from_matrix(const Matrix& m);
  static SymmetricMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static SymmetricMatrix identity(std::size_t n);
  static SymmetricMatrix scalar(std::size_t n, double value);
  static SymmetricMatrix diagonal(std::span<const double> entries);
  static SymmetricMatrix diagonal(std::initializer_list<double> entries);

  // Averages with the transpose without the asymmetry check. For results of
  // algebra that is symmetric in exact arithmetic (X^2, Q L Q^T, P^T P).
  static SymmetricMatrix symmetrized(const Matrix& m);

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  double max_asymmetry() const noexcept { return asymmetry_; }

  double trace() const noexcept;
  double max_abs() const noexcept { return m_.max_abs(); }
  double frobenius_norm() const noexcept;
  SymmetricMatrix square() const;
  std::vector<double> apply(std::span<const double> v) const;
  double quadratic_form(std::span<const double> v) const;

  SymmetricMatrix operator-() const;
  friend SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b);
  friend SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b);
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a);
  friend bool operator==(const SymmetricMatrix& a, const SymmetricMatrix& b) { return a.m_ == b.m_; }

 private:
  explicit SymmetricMatrix(Matrix m, double asymmetry) : m_(std::move(m)), asymmetry_(asymmetry) {}

  Matrix m_;
  double asymmetry_{0.0};
};

/// Ordered eigensystem: eigenvalues ascending, eigenvectors as orthonormal
/// columns in the same order.
struct Spectrum {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;

  double min() const { return eigenvalues.front(); }
  double max() const { return eigenvalues.back(); }
};

/// Cyclic Jacobi with a fixed row-major (p < q) sweep order. Stops when the
/// off-diagonal Frobenius norm drops to 1e-12 * ||X||_F or after 30 sweeps.
/// Eigenvector signs are fixed so the largest-magnitude component is positive.
Spectrum eigen_decompose(const SymmetricMatrix& x);

std::vector<double> eigenvalues(const SymmetricMatrix& x);
double lambda_min(const SymmetricMatrix& x);
double lambda_max(const SymmetricMatrix& x);

/// max_j |lambda_j(X)|
double operator_norm(const SymmetricMatrix& x);

/// lambda_1(Y - X); non-negative exactly when X <= Y.
double loewner_margin(const SymmetricMatrix& x, const SymmetricMatrix& y);

/// X <= Y in the Loewner order, accepted when lambda_1(Y - X) >= -tol.
bool loewner_leq(const SymmetricMatrix& x, const SymmetricMatrix& y, double tol = kDefaultLoewnerTol);

bool is_psd(const SymmetricMatrix& x, double tol = kDefaultLoewnerTol);

/// k-th elementary symmetric polynomial of v, 1 <= k <= len(v).
///
/// Uses the one-pass recurrence e_j <- e_j + v_i * e_{j-1} (j descending),
/// which costs O(k n), never subtracts partial results of different order and
/// is exact for integer-valued input whose partial sums stay below 2^53.
double elementary_symmetric(int k, std::span<const double> v);

/// lambda(X) in the closure of the Garding cone Gamma_k:
/// S_j(lambda(X)) >= -tol for j = 1..k.
bool gamma_k_member(const SymmetricMatrix& x, int k, double tol = kDefaultLoewnerTol);

/// tr(C A)
double trace_product(const SymmetricMatrix& c, const SymmetricMatrix& a);

/// Q X Q^T
SymmetricMatrix congruence(const Matrix& q, const SymmetricMatrix& x);

/// P^T P (always PSD)
SymmetricMatrix gram(const Matrix& p);

/// Largest singular value, sqrt(lambda_max(B^T B)).
double sigma_max(const Matrix& b);

/// A = [[E, B], [B^T, D]] stored by blocks.
struct BlockMatrix2N {
  SymmetricMatrix E;
  Matrix B;
  SymmetricMatrix D;

  std::size_t half_dim() const noexcept { return E.dim(); }
  SymmetricMatrix assemble() const;
};

BlockMatrix2N block_compose(const SymmetricMatrix& e, const Matrix& b, const SymmetricMatrix& d);
BlockMatrix2N block_extract(const SymmetricMatrix& a);

/// diag(X, Z) as a 2N x 2N symmetric matrix (blocks may differ in size).
SymmetricMatrix block_diag(const SymmetricMatrix& x, const SymmetricMatrix& z);

}  // namespace elliptic
