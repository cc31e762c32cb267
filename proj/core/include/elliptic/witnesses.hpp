#pragma once

// Class U and Class M witnesses and the lower bounds they give on X and -Y.

#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "elliptic/operators.hpp"
#include "elliptic/symmat.hpp"

namespace elliptic {

inline constexpr double kBisectionBracket = 1e9;
inline constexpr double kBisectionTol = 1e-10;

/// (lambda, H): B <= M  =>  F(w, B) - F(w, M) >= lambda tr(M - B) + H(w).
class ClassUWitness {
 public:
  using HFn = std::function<double(const JetPoint&)>;

  ClassUWitness(double lambda, HFn h, std::string h_name = "H");
  static ClassUWitness constant(double lambda, double h);

  double lambda() const noexcept { return lambda_; }
  double H(const JetPoint& w) const;
  const std::string& h_name() const noexcept { return h_name_; }

 private:
  double lambda_;
  HFn h_;
  std::string h_name_;
};

enum class WitnessSide { G1, G2 };

/// One side g_i(t, M) of a Class M witness pair.
///
/// t -> g(t, M) must be an increasing bijection of R; inv_at_zero(M) is
/// g(-, M)^{-1}(0). Witnesses capture omega at construction; a different
/// omega needs a new witness.
class ClassMWitness {
 public:
  using EvalFn = std::function<double(double, const SymmetricMatrix&)>;
  using InverseFn = std::function<double(const SymmetricMatrix&)>;
  using DomainFn = std::function<bool(const SymmetricMatrix&)>;

  /// Closed-form inverse at zero. An empty domain predicate means all of S(N).
  ClassMWitness(WitnessSide side, std::string name, EvalFn eval, InverseFn inv_at_zero, DomainFn domain = {},
                std::optional<JetPoint> context = std::nullopt);

  /// Inverse at zero found by bisection on [-1e9, 1e9] to 1e-10.
  static ClassMWitness with_bisection(WitnessSide side, std::string name, EvalFn eval, DomainFn domain = {},
                                      std::optional<JetPoint> context = std::nullopt);

  WitnessSide side() const noexcept { return side_; }
  const std::string& name() const noexcept { return name_; }
  const std::optional<JetPoint>& context() const noexcept { return context_; }

  bool in_domain(const SymmetricMatrix& m) const;
  double eval(double t, const SymmetricMatrix& m) const;
  double inv_at_zero(const SymmetricMatrix& m) const;

 private:
  WitnessSide side_;
  std::string name_;
  EvalFn eval_;
  InverseFn inv_;
  DomainFn domain_;
  std::optional<JetPoint> context_;
};

struct WitnessPair {
  ClassMWitness g1;
  ClassMWitness g2;
};

/// Root of an increasing function on [lo, hi]; NotInClassM when f does not
/// change sign on the bracket.
double bisect_zero(const std::function<double(double)>& f, double lo = -kBisectionBracket,
                   double hi = kBisectionBracket, double tol = kBisectionTol);

/// Class U (lambda, H) turned into Class M witnesses:
///   g1(t, M) = lambda t - lambda lambda_1(M) - H(w) - F(w, M)
///   g2(t, M) = lambda t - lambda lambda_N(-M) + H(w) - F(w, -M)
/// The g2 form is the one whose inverse at zero reproduces the Class U
/// corollary bound; note lambda_N(-M) = -lambda_1(M).
WitnessPair class_u_to_class_m(const OperatorDescriptor& op, const ClassUWitness& w, const JetPoint& omega);
WitnessPair class_u_to_class_m(const OperatorDescriptor& op, const ClassUWitness& w, const JetPoint& omega_x,
                               const JetPoint& omega_y);

/// p-Laplacian witnesses for p > 1 (NotInClassM for p <= 1).
///   p >= 2:     g1 = |nu|^(p-2) [t + (N+p-3) lambda_N(M)],     g2 = |nu|^(p-2) [t - (N+p-3) lambda_N(M)]
///   1 < p < 2:  g1 = |nu|^(p-2) [(p-1) t + (N-1) lambda_N(M)], g2 = |nu|^(p-2) [(p-1) t - (N-1) lambda_N(M)]
WitnessPair witness_p_laplace(double p, const JetPoint& omega);
WitnessPair witness_p_laplace(double p, const JetPoint& omega_x, const JetPoint& omega_y);

/// Witnesses for F_H = -sum H(lambda_j(X)) with H a bijection of R:
///   g1(t, M) = H(t) + sum_{j=2}^N H(lambda_j(M))
///   g2(t, M) = H(t) + sum_{j=1}^{N-1} H(lambda_j(-M))
/// NotInClassM when H is bounded above or below.
WitnessPair witness_eig_sum(const MonotoneFunction& h);

struct BoundReport {
  double lower_X{0.0};
  double lower_negY{0.0};
  bool upper_block_ok{false};
  std::string witness;
  nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const BoundReport& r);

/// lower_X = g1(-, E)^{-1}(0), lower_negY = -g2(-, D)^{-1}(0).
BoundReport theorem_lower_bounds(const ClassMWitness& g1, const ClassMWitness& g2, const SymmetricMatrix& e,
                                 const SymmetricMatrix& d);

/// Class U closed forms:
///   lower_X    = (H(wx) + F(wx, E)) / lambda + lambda_1(E)
///   lower_negY = (H(wy) - F(wy, -D)) / lambda - lambda_N(-D)
BoundReport corollary_bounds(const OperatorDescriptor& op, const ClassUWitness& w, const JetPoint& wx,
                             const JetPoint& wy, const SymmetricMatrix& e, const SymmetricMatrix& d);

/// Uniform-ellipticity constants for catalog operators that are Class U
/// (linear_uniform, p_laplace with p = 2, p_laplace_homog with p > 1,
/// eig_sum(identity), k_hessian with k = 1, sqrt_gradient); H = 0 throughout.
std::optional<ClassUWitness> known_class_u_witness(const OperatorDescriptor& op);

/// Shipped Class M witnesses for a catalog operator, if it has any.
std::optional<WitnessPair> known_class_m_witnesses(const OperatorDescriptor& op, const JetPoint& omega_x,
                                                   const JetPoint& omega_y);

}  // namespace elliptic
