#pragma once

// Seeded random draws and the deterministic trial runner shared by the
// falsification checks. Internal to the core library.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "elliptic/falsify.hpp"
#include "elliptic/symmat.hpp"

namespace elliptic::detail {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream for trial `index` of stage `stream`.
inline Rng trial_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed ^ (stream * 0xD1B54A32D192ED03ULL)) + index));
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = uniform(rng, -scale, scale);
  return m;
}

inline SymmetricMatrix random_symmetric(Rng& rng, std::size_t n, double scale) {
  return SymmetricMatrix::symmetrized(random_matrix(rng, n, n, scale));
}

inline SymmetricMatrix random_psd(Rng& rng, std::size_t n, double scale) {
  return gram(random_matrix(rng, n, n, scale));
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& a : v) a = uniform(rng, -scale, scale);
  return v;
}

inline JetPoint random_jet(Rng& rng, std::size_t n, double scale) {
  JetPoint w;
  w.x = random_vector(rng, n, scale);
  w.r = uniform(rng, -scale, scale);
  w.nu = random_vector(rng, n, scale);
  return w;
}

/// Symmetric draw for domain-constrained sampling. Odd attempts add a random
/// positive shift so restricted domains such as Sigma_k are reached quickly.
inline SymmetricMatrix proposal(Rng& rng, std::size_t n, double scale, std::size_t attempt) {
  SymmetricMatrix x = random_symmetric(rng, n, scale);
  if (attempt % 2 == 1) x = x + SymmetricMatrix::scalar(n, uniform(rng, 0.0, 2.0 * scale * static_cast<double>(n)));
  return x;
}

struct StageOutcome {
  std::optional<Certificate> violation;
  std::size_t resamples{0};
};

/// Runs fn(index, resamples) for index in [0, count) and returns the
/// violation with the smallest index. Threads skip indices above the best
/// violation found so far; every index below it is always evaluated, so the
/// answer is independent of scheduling.
template <class Fn>
StageOutcome run_trials(std::size_t count, unsigned threads, Fn&& fn) {
  unsigned t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(count, 1)));

  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::atomic<std::size_t> best{none};
  std::mutex mu;
  std::size_t best_index = none;
  std::optional<Certificate> best_cert;
  std::exception_ptr best_error;
  std::atomic<std::size_t> resamples{0};

  auto lower_best = [&](std::size_t i) {
    std::size_t cur = best.load();
    while (i < cur && !best.compare_exchange_weak(cur, i)) {
    }
  };

  auto worker = [&](unsigned tid) {
    std::size_t local = 0;
    for (std::size_t i = tid; i < count; i += t) {
      if (i > best.load()) break;
      try {
        std::optional<Certificate> c = fn(i, local);
        if (c) {
          c->trial = i;
          std::lock_guard lock(mu);
          if (i < best_index) {
            best_index = i;
            best_cert = std::move(c);
            best_error = nullptr;
          }
          lower_best(i);
          break;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < best_index) {
          best_index = i;
          best_cert.reset();
          best_error = std::current_exception();
        }
        lower_best(i);
        break;
      }
    }
    resamples += local;
  };

  if (t <= 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(t);
    for (unsigned tid = 0; tid < t; ++tid) pool.emplace_back(worker, tid);
  }
  if (best_error) std::rethrow_exception(best_error);
  return StageOutcome{std::move(best_cert), resamples.load()};
}

}  // namespace elliptic::detail
