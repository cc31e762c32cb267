#pragma once

// Conversions between oracle dense arrays and library matrices, plus seeded
// random draws for tests.

#include <random>

#include "elliptic/symmat.hpp"
#include "oracles.hpp"

inline elliptic::SymmetricMatrix to_sym(const oracle::Dense& d) { return elliptic::SymmetricMatrix::from_rows(d); }

inline oracle::Dense to_dense(const elliptic::SymmetricMatrix& x) {
  oracle::Dense d = oracle::zeros(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i)
    for (std::size_t j = 0; j < x.dim(); ++j) d[i][j] = x(i, j);
  return d;
}

inline elliptic::SymmetricMatrix random_sym(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  oracle::Dense d = oracle::zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) d[i][j] = d[j][i] = u(rng);
  return to_sym(d);
}

inline elliptic::SymmetricMatrix random_psd(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  oracle::Dense p = oracle::zeros(n);
  for (auto& row : p)
    for (double& a : row) a = u(rng);
  oracle::Dense g = oracle::multiply(oracle::transpose(p), p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g[i][j] = g[j][i];
  return to_sym(g);
}

inline elliptic::SymmetricMatrix random_orthogonal_conjugate(std::mt19937_64& rng, const elliptic::SymmetricMatrix& x) {
  const oracle::Dense q = oracle::random_orthogonal(rng, x.dim());
  oracle::Dense m = oracle::multiply(oracle::multiply(q, to_dense(x)), oracle::transpose(q));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) m[i][j] = m[j][i] = 0.5 * (m[i][j] + m[j][i]);
  return to_sym(m);
}
