#pragma once

// Property-based membership checks and deterministic counterexample
// reproductions.
//
// Every check either passes (PassReport) or returns the violation with the
// smallest trial index as a Certificate. Trials draw from a per-index RNG
// stream derived from the seed, so the result does not depend on how many
// threads ran them.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "elliptic/operators.hpp"
#include "elliptic/witnesses.hpp"

namespace elliptic {

/// A sampled inequality counts as violated only when it fails by more than this.
inline constexpr double kViolationMargin = 1e-8;
/// Draw cap for domain-constrained sampling.
inline constexpr std::size_t kResampleCap = 100000;

struct SampleConfig {
  std::uint64_t seed{0};
  std::size_t trials{1000};
  double scale{1.0};
  std::size_t dim{2};
  unsigned threads{0};  // 0 = hardware concurrency

  void validate() const;
};

struct PassReport {
  std::string kind;
  std::size_t trials{0};
  std::size_t resamples{0};
  nlohmann::json details = nlohmann::json::object();
};

/// A stored, re-checkable instance. `margin` is the amount by which the
/// claimed inequality fails (sampled checks) or the gap the construction
/// demonstrates (counterexamples); recompute_margin reproduces it from
/// `witnesses` alone.
struct Certificate {
  std::string kind;
  nlohmann::json witnesses = nlohmann::json::object();
  double lhs{0.0};
  double rhs{0.0};
  double margin{0.0};
  std::string relation;
  std::optional<std::size_t> trial;
  nlohmann::json details = nlohmann::json::object();
};

using CheckResult = std::variant<PassReport, Certificate>;

inline bool passed(const CheckResult& r) { return std::holds_alternative<PassReport>(r); }

nlohmann::json to_json(const PassReport& r);
nlohmann::json to_json(const Certificate& c);
nlohmann::json to_json(const CheckResult& r);

/// Samples (omega, X, Y = X + P^T P) inside the domain and checks
/// F(omega, X) >= F(omega, Y).
CheckResult check_degenerate_ellipticity(const OperatorDescriptor& op, const SampleConfig& cfg);

/// Checks B <= M  =>  F(w, B) - F(w, M) >= lambda tr(M - B) + H(w), first on
/// the structured pairs (nu = s e_1, B = 0, M = l e_2 e_2^T), then on random
/// pairs.
CheckResult check_class_u(const OperatorDescriptor& op, const ClassUWitness& w, const SampleConfig& cfg);

/// Checks the four Class M conditions for (g1, g2):
///   1. t -> g_i(t, M) strictly increasing on a log grid, sign change on [-1e6, 1e6]
///      and g_i(inv_at_zero(M), M) = 0;
///   2. M -> inv_at_zero(M) stable under vanishing perturbations;
///   3. X <= M  =>  -F(w, X) <= g1(lambda_1(X), M)  (divergence probes, then random);
///   4. -Y <= M =>  -F(w, Y) >= g2(lambda_N(Y), M)  (random).
/// omega comes from each witness's context, or is sampled when absent.
CheckResult check_class_m(const OperatorDescriptor& op, const ClassMWitness& g1, const ClassMWitness& g2,
                          const SampleConfig& cfg);

/// Condition 3 along the divergence families M = I, X = c I and
/// X = diag(1, .., c, .., 1) for c down to -1e6.
std::optional<Certificate> probe_condition_3(const OperatorDescriptor& op, const ClassMWitness& g1, std::size_t dim);

struct CounterexampleParams {
  std::size_t dim{2};
  int k{2};
  std::int64_t n{5};
  std::optional<double> c;
  int d{3};
  double lambda{1.0};
  double K{0.0};
  double p{4.0};
};

/// Names: inf_laplace, k_hessian, p1_laplace, power_not_u, p_laplace_not_u.
Certificate counterexample(std::string_view name, const CounterexampleParams& params);

/// Objects a certificate may need to be re-evaluated. Catalog operators are
/// rebuilt from the stored spec when `op` is null.
struct RecheckContext {
  const OperatorDescriptor* op{nullptr};
  const ClassMWitness* g1{nullptr};
  const ClassMWitness* g2{nullptr};
};

/// Recomputes the certificate's margin from its stored objects.
double recompute_margin(const Certificate& cert, const RecheckContext& ctx = {});

/// C(n, k) in 64-bit integers (0 when k < 0 or k > n).
std::int64_t binomial(std::int64_t n, std::int64_t k);

/// S_k by enumerating all k-subsets.
std::int64_t elementary_symmetric_bruteforce(int k, std::span<const std::int64_t> v);

/// -F_k(diag(-n, -n, 1, ..., 1)) = C(N-2,k-2) n^2 - 2 C(N-2,k-1) n + C(N-2,k).
std::int64_t k_hessian_counterexample_value(std::int64_t dim, std::int64_t k, std::int64_t n);

}  // namespace elliptic
