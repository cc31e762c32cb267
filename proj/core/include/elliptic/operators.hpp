#pragma once

// Catalog of degenerate elliptic operators F(omega, X) with their domains.
//
// An operator is a uniform descriptor: a domain predicate over (omega, X)
// and an evaluation that refuses (OutOfDomain) to run outside it.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elliptic/symmat.hpp"

namespace elliptic {

/// Gradients shorter than this are treated as zero.
inline constexpr double kGradientFloor = 1e-12;

/// omega = (x, r, nu): base point, value slot and gradient slot.
struct JetPoint {
  std::vector<double> x;
  double r{0.0};
  std::vector<double> nu;

  static JetPoint with_gradient(std::vector<double> nu);
  static JetPoint origin(std::size_t dim);

  std::size_t dim() const noexcept { return nu.size(); }
  double gradient_norm() const;
  bool all_finite() const;
};

nlohmann::json to_json(const JetPoint& w);
JetPoint jet_from_json(const nlohmann::json& j);

/// Strictly increasing scalar function H with an optional inverse (present
/// only when H is a bijection of R) and optional bounds.
struct MonotoneFunction {
  std::string name;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::optional<double> bounded_below;
  std::optional<double> bounded_above;
  nlohmann::json spec;

  double operator()(double t) const { return forward(t); }
  bool bijective() const noexcept { return static_cast<bool>(inverse); }

  static MonotoneFunction identity();
  /// sign(t)|t|^(1/d) for odd d >= 3.
  static MonotoneFunction odd_root(int d);
  static MonotoneFunction arctan();
  static MonotoneFunction from_json(const nlohmann::json& j);
};

class OperatorDescriptor {
 public:
  using DomainFn = std::function<bool(const JetPoint&, const SymmetricMatrix&)>;
  using EvalFn = std::function<double(const JetPoint&, const SymmetricMatrix&)>;

  OperatorDescriptor(std::string name, nlohmann::json params, DomainFn in_domain, EvalFn evaluate);

  const std::string& name() const noexcept { return name_; }
  /// Family parameters; for catalog operators this is also the JSON spec
  /// accepted by make_operator.
  const nlohmann::json& params() const noexcept { return params_; }

  /// Dimension-consistent and inside the family's domain.
  bool in_domain(const JetPoint& w, const SymmetricMatrix& x) const;

  /// F(omega, X). Throws OutOfDomain outside the domain and DimMismatch when
  /// omega and X disagree on N.
  double evaluate(const JetPoint& w, const SymmetricMatrix& x) const;

 private:
  std::string name_;
  nlohmann::json params_;
  DomainFn in_domain_;
  EvalFn evaluate_;
};

namespace catalog {

/// x-dependent coefficients of a linear operator. Callbacks must be pure.
struct LinearCoefficients {
  std::function<SymmetricMatrix(std::span<const double>)> sigma;
  std::function<std::vector<double>(std::span<const double>)> b;
  std::function<double(std::span<const double>)> c;
};

/// F = -tr(a(x) X) + b(x).nu + c(x) r with a(x) = sigma(x) + theta I and
/// sigma(x) PSD. A non-PSD sigma sample raises BadParams at evaluation.
OperatorDescriptor linear_uniform(double theta, LinearCoefficients coeffs);

/// Constant-coefficient form. sigma defaults to 0, b to 0 and c to 0.
OperatorDescriptor linear_uniform(double theta, std::optional<SymmetricMatrix> sigma = std::nullopt,
                                  std::vector<double> b = {}, double c = 0.0);

/// -tr X
OperatorDescriptor laplacian();

/// -|nu|^(p-2) [tr X + (p-2) <X nu/|nu|, nu/|nu|>], p >= 1, nu != 0.
OperatorDescriptor p_laplace(double p);

/// -tr X - (p-2) <X nu/|nu|, nu/|nu|>, p >= 1, nu != 0.
OperatorDescriptor p_laplace_homog(double p);

/// -<X nu, nu>
OperatorDescriptor inf_laplace();

/// -<X nu, nu> / <nu, nu>, nu != 0.
OperatorDescriptor inf_laplace_homog();

/// -S_k(lambda(X)) on Sigma_k = {X : lambda(X) in closure(Gamma_k)}.
OperatorDescriptor k_hessian(int k, std::size_t dim);

/// -sum_j H(lambda_j(X))
OperatorDescriptor eig_sum(MonotoneFunction h);

/// -tr X - |nu|^(1/2)
OperatorDescriptor sqrt_gradient();

/// Builds a catalog operator from its JSON spec, e.g.
/// {"family": "p_laplace", "p": 4}. `dim` is needed by k_hessian.
OperatorDescriptor make_operator(const nlohmann::json& spec, std::size_t dim);

struct FamilyInfo {
  std::string family;
  std::string formula;
  std::string domain;
  std::vector<std::string> fields;
};

const std::vector<FamilyInfo>& families();

}  // namespace catalog

}  // namespace elliptic
