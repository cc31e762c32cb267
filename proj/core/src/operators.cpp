#include "elliptic/operators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>

#include "elliptic/error.hpp"
#include "elliptic/matrix_io.hpp"

namespace elliptic {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// <X nu, nu> / <nu, nu>, computed on the normalized gradient.
double rayleigh(const SymmetricMatrix& x, std::span<const double> nu) {
  const double n = norm2(nu);
  std::vector<double> unit(nu.begin(), nu.end());
  for (double& u : unit) u /= n;
  return x.quadratic_form(unit);
}

bool nonzero_gradient(const JetPoint& w) { return w.gradient_norm() >= kGradientFloor; }

void require_known_keys(const nlohmann::json& spec, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok{"family"};
  for (const char* a : allowed) ok.insert(a);
  for (const auto& [key, _] : spec.items()) {
    if (!ok.contains(key)) {
      throw Error(ErrorKind::BadParams, "unknown field '" + key + "' for family " + spec.value("family", "?"));
    }
  }
}

double number_field(const nlohmann::json& spec, const char* key) {
  if (!spec.contains(key) || !spec.at(key).is_number()) {
    throw Error(ErrorKind::BadParams, std::string("missing numeric field '") + key + "'");
  }
  return spec.at(key).get<double>();
}

int integer_field(const nlohmann::json& spec, const char* key) {
  if (!spec.contains(key) || !spec.at(key).is_number_integer()) {
    throw Error(ErrorKind::BadParams, std::string("missing integer field '") + key + "'");
  }
  return spec.at(key).get<int>();
}

}  // namespace

// ---------------------------------------------------------------------------
// JetPoint

JetPoint JetPoint::with_gradient(std::vector<double> nu) {
  JetPoint w;
  w.x.assign(nu.size(), 0.0);
  w.nu = std::move(nu);
  return w;
}

JetPoint JetPoint::origin(std::size_t dim) { return with_gradient(std::vector<double>(dim, 0.0)); }

double JetPoint::gradient_norm() const { return norm2(nu); }

bool JetPoint::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::isfinite(r) && std::all_of(x.begin(), x.end(), finite) && std::all_of(nu.begin(), nu.end(), finite);
}

nlohmann::json to_json(const JetPoint& w) { return {{"x", w.x}, {"r", w.r}, {"nu", w.nu}}; }

JetPoint jet_from_json(const nlohmann::json& j) {
  try {
    JetPoint w;
    w.nu = j.at("nu").get<std::vector<double>>();
    w.x = j.contains("x") ? j.at("x").get<std::vector<double>>() : std::vector<double>(w.nu.size(), 0.0);
    w.r = j.value("r", 0.0);
    if (!w.all_finite()) throw Error(ErrorKind::BadArgument, "jet point has non-finite components");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("jet point: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// MonotoneFunction

MonotoneFunction MonotoneFunction::identity() {
  MonotoneFunction h;
  h.name = "identity";
  h.forward = [](double t) { return t; };
  h.inverse = [](double s) { return s; };
  h.spec = {{"H", "identity"}};
  return h;
}

MonotoneFunction MonotoneFunction::odd_root(int d) {
  if (d < 3 || d % 2 == 0) {
    throw Error(ErrorKind::BadParams, "odd_root needs an odd integer d >= 3, got " + std::to_string(d));
  }
  MonotoneFunction h;
  h.name = "odd_root_" + std::to_string(d);
  if (d == 3) {
    h.forward = [](double t) { return std::cbrt(t); };
  } else {
    const double inv_d = 1.0 / d;
    h.forward = [inv_d](double t) { return std::copysign(std::pow(std::abs(t), inv_d), t); };
  }
  h.inverse = [d](double s) { return std::copysign(std::pow(std::abs(s), d), s); };
  h.spec = {{"H", "odd_root"}, {"d", d}};
  return h;
}

MonotoneFunction MonotoneFunction::arctan() {
  MonotoneFunction h;
  h.name = "arctan";
  h.forward = [](double t) { return std::atan(t); };
  h.bounded_below = -std::numbers::pi / 2;
  h.bounded_above = std::numbers::pi / 2;
  h.spec = {{"H", "arctan"}};
  return h;
}

MonotoneFunction MonotoneFunction::from_json(const nlohmann::json& j) {
  const std::string kind = j.is_string() ? j.get<std::string>() : j.value("H", "");
  if (kind == "identity") return identity();
  if (kind == "arctan") return arctan();
  if (kind == "odd_root") return odd_root(integer_field(j, "d"));
  throw Error(ErrorKind::BadParams, "unknown monotone function '" + kind + "' (identity, odd_root, arctan)");
}

// ---------------------------------------------------------------------------
// OperatorDescriptor

OperatorDescriptor::OperatorDescriptor(std::string name, nlohmann::json params, DomainFn in_domain, EvalFn evaluate)
    : name_(std::move(name)), params_(std::move(params)), in_domain_(std::move(in_domain)),
      evaluate_(std::move(evaluate)) {}

bool OperatorDescriptor::in_domain(const JetPoint& w, const SymmetricMatrix& x) const {
  if (!w.nu.empty() && w.nu.size() != x.dim()) return false;
  if (!w.x.empty() && w.x.size() != x.dim()) return false;
  return in_domain_(w, x);
}

double OperatorDescriptor::evaluate(const JetPoint& w, const SymmetricMatrix& x) const {
  if ((!w.nu.empty() && w.nu.size() != x.dim()) || (!w.x.empty() && w.x.size() != x.dim())) {
    throw Error(ErrorKind::DimMismatch, name_ + ": jet point of dim " + std::to_string(w.nu.size()) +
                                            " with matrix of dim " + std::to_string(x.dim()));
  }
  if (!in_domain_(w, x)) throw Error(ErrorKind::OutOfDomain, name_ + ": (omega, X) outside the operator domain");
  return evaluate_(w, x);
}

// ---------------------------------------------------------------------------
// Catalog

namespace catalog {

namespace {

bool everywhere(const JetPoint&, const SymmetricMatrix&) { return true; }

bool gradient_domain(const JetPoint& w, const SymmetricMatrix&) { return nonzero_gradient(w); }

void require_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorKind::BadParams, "linear_uniform: theta must be positive, got " + format_double(theta));
  }
}

void require_p(double p, const char* family) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::BadParams, std::string(family) + ": p must be >= 1, got " + format_double(p));
  }
}

}  // namespace

OperatorDescriptor linear_uniform(double theta, LinearCoefficients coeffs) {
  require_theta(theta);
  auto eval = [theta, coeffs = std::move(coeffs)](const JetPoint& w, const SymmetricMatrix& x) {
    const std::size_t n = x.dim();
    const std::vector<double> base = w.x.empty() ? std::vector<double>(n, 0.0) : w.x;
    double value = 0.0;
    if (coeffs.sigma) {
      const SymmetricMatrix sigma = coeffs.sigma(base);
      if (sigma.dim() != n) throw Error(ErrorKind::DimMismatch, "linear_uniform: sigma(x) has wrong dimension");
      if (!is_psd(sigma)) throw Error(ErrorKind::BadParams, "linear_uniform: sigma(x) is not PSD");
      value -= trace_product(sigma, x);
    }
    value -= theta * x.trace();
    if (coeffs.b) {
      const auto b = coeffs.b(base);
      if (b.size() != w.nu.size()) throw Error(ErrorKind::DimMismatch, "linear_uniform: b(x) has wrong dimension");
      value += dot(b, w.nu);
    }
    if (coeffs.c) value += coeffs.c(base) * w.r;
    return value;
  };
  return OperatorDescriptor("linear_uniform", {{"family", "linear_uniform"}, {"theta", theta}, {"coefficients", "callback"}},
                            everywhere, std::move(eval));
}

OperatorDescriptor linear_uniform(double theta, std::optional<SymmetricMatrix> sigma, std::vector<double> b, double c) {
  require_theta(theta);
  if (sigma && !is_psd(*sigma)) throw Error(ErrorKind::BadParams, "linear_uniform: sigma is not PSD");
  if (!std::isfinite(c)) throw Error(ErrorKind::BadParams, "linear_uniform: c must be finite");
  nlohmann::json params{{"family", "linear_uniform"}, {"theta", theta}};
  if (sigma) params["sigma"] = to_json(*sigma);
  if (!b.empty()) params["b"] = b;
  if (c != 0.0) params["c"] = c;

  auto domain = [dim = sigma ? sigma->dim() : 0, nb = b.size()](const JetPoint& w, const SymmetricMatrix& x) {
    return (dim == 0 || dim == x.dim()) && (nb == 0 || nb == w.nu.size());
  };
  // Shared rather than optional: GCC 11 misreports the moved optional as uninitialized.
  auto shared_sigma = sigma ? std::make_shared<const SymmetricMatrix>(std::move(*sigma)) : nullptr;
  auto eval = [theta, sigma = std::move(shared_sigma), b = std::move(b), c](const JetPoint& w, const SymmetricMatrix& x) {
    double value = -theta * x.trace();
    if (sigma) value -= trace_product(*sigma, x);
    if (!b.empty()) value += dot(b, w.nu);
    return value + c * w.r;
  };
  return OperatorDescriptor("linear_uniform", std::move(params), std::move(domain), std::move(eval));
}

OperatorDescriptor laplacian() { return linear_uniform(1.0); }

OperatorDescriptor p_laplace(double p) {
  require_p(p, "p_laplace");
  auto eval = [p](const JetPoint& w, const SymmetricMatrix& x) {
    const double n = w.gradient_norm();
    return -std::pow(n, p - 2.0) * (x.trace() + (p - 2.0) * rayleigh(x, w.nu));
  };
  return OperatorDescriptor("p_laplace", {{"family", "p_laplace"}, {"p", p}}, gradient_domain, std::move(eval));
}

OperatorDescriptor p_laplace_homog(double p) {
  require_p(p, "p_laplace_homog");
  auto eval = [p](const JetPoint& w, const SymmetricMatrix& x) { return -x.trace() - (p - 2.0) * rayleigh(x, w.nu); };
  return OperatorDescriptor("p_laplace_homog", {{"family", "p_laplace_homog"}, {"p", p}}, gradient_domain,
                            std::move(eval));
}

OperatorDescriptor inf_laplace() {
  auto eval = [](const JetPoint& w, const SymmetricMatrix& x) { return -x.quadratic_form(w.nu); };
  auto domain = [](const JetPoint& w, const SymmetricMatrix& x) { return w.nu.size() == x.dim(); };
  return OperatorDescriptor("inf_laplace", {{"family", "inf_laplace"}}, domain, std::move(eval));
}

OperatorDescriptor inf_laplace_homog() {
  auto eval = [](const JetPoint& w, const SymmetricMatrix& x) { return -rayleigh(x, w.nu); };
  return OperatorDescriptor("inf_laplace_homog", {{"family", "inf_laplace_homog"}}, gradient_domain, std::move(eval));
}

OperatorDescriptor k_hessian(int k, std::size_t dim) {
  if (dim == 0 || k < 1 || static_cast<std::size_t>(k) > dim) {
    throw Error(ErrorKind::BadParams,
                "k_hessian: k = " + std::to_string(k) + " outside 1.." + std::to_string(dim));
  }
  auto domain = [k, dim](const JetPoint&, const SymmetricMatrix& x) {
    return x.dim() == dim && gamma_k_member(x, k, kDefaultLoewnerTol);
  };
  auto eval = [k](const JetPoint&, const SymmetricMatrix& x) { return -elementary_symmetric(k, eigenvalues(x)); };
  return OperatorDescriptor("k_hessian", {{"family", "k_hessian"}, {"k", k}, {"dim", dim}}, std::move(domain),
                            std::move(eval));
}

OperatorDescriptor eig_sum(MonotoneFunction h) {
  nlohmann::json params = h.spec;
  params["family"] = "eig_sum";
  auto eval = [h = std::move(h)](const JetPoint&, const SymmetricMatrix& x) {
    double s = 0.0;
    for (double l : eigenvalues(x)) s += h(l);
    return -s;
  };
  return OperatorDescriptor("eig_sum", std::move(params), everywhere, std::move(eval));
}

OperatorDescriptor sqrt_gradient() {
  auto eval = [](const JetPoint& w, const SymmetricMatrix& x) { return -x.trace() - std::sqrt(w.gradient_norm()); };
  return OperatorDescriptor("sqrt_gradient", {{"family", "sqrt_gradient"}}, everywhere, std::move(eval));
}

OperatorDescriptor make_operator(const nlohmann::json& spec, std::size_t dim) {
  if (!spec.is_object() || !spec.contains("family") || !spec.at("family").is_string()) {
    throw Error(ErrorKind::BadParams, "operator spec must be an object with a string \"family\"");
  }
  const std::string family = spec.at("family").get<std::string>();
  try {
    if (family == "linear_uniform") {
      require_known_keys(spec, {"theta", "sigma", "b", "c"});
      std::optional<SymmetricMatrix> sigma;
      if (spec.contains("sigma")) sigma = symmetric_from_json(spec.at("sigma"));
      std::vector<double> b = spec.contains("b") ? spec.at("b").get<std::vector<double>>() : std::vector<double>{};
      const double c = spec.contains("c") ? number_field(spec, "c") : 0.0;
      return linear_uniform(number_field(spec, "theta"), std::move(sigma), std::move(b), c);
    }
    if (family == "p_laplace") {
      require_known_keys(spec, {"p"});
      return p_laplace(number_field(spec, "p"));
    }
    if (family == "p_laplace_homog") {
      require_known_keys(spec, {"p"});
      return p_laplace_homog(number_field(spec, "p"));
    }
    if (family == "inf_laplace") {
      require_known_keys(spec, {});
      return inf_laplace();
    }
    if (family == "inf_laplace_homog") {
      require_known_keys(spec, {});
      return inf_laplace_homog();
    }
    if (family == "k_hessian") {
      require_known_keys(spec, {"k", "dim"});
      const std::size_t n = spec.contains("dim") ? spec.at("dim").get<std::size_t>() : dim;
      return k_hessian(integer_field(spec, "k"), n);
    }
    if (family == "eig_sum") {
      require_known_keys(spec, {"H", "d"});
      if (!spec.contains("H")) throw Error(ErrorKind::BadParams, "eig_sum needs field 'H'");
      return eig_sum(MonotoneFunction::from_json(spec.at("H").is_string() && spec.contains("d")
                                                      ? nlohmann::json{{"H", spec.at("H")}, {"d", spec.at("d")}}
                                                      : spec.at("H")));
    }
    if (family == "sqrt_gradient") {
      require_known_keys(spec, {});
      return sqrt_gradient();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadParams, family + ": " + e.what());
  }
  throw Error(ErrorKind::BadParams, "unknown operator family '" + family + "'");
}

const std::vector<FamilyInfo>& families() {
  static const std::vector<FamilyInfo> table{
      {"linear_uniform", "-tr((sigma + theta I) X) + b.nu + c r", "all (omega, X)", {"theta", "sigma", "b", "c"}},
      {"p_laplace", "-|nu|^(p-2) [tr X + (p-2) <X nu/|nu|, nu/|nu|>]", "nu != 0", {"p"}},
      {"p_laplace_homog", "-tr X - (p-2) <X nu/|nu|, nu/|nu|>", "nu != 0", {"p"}},
      {"inf_laplace", "-<X nu, nu>", "all (omega, X)", {}},
      {"inf_laplace_homog", "-<X nu, nu> / <nu, nu>", "nu != 0", {}},
      {"k_hessian", "-S_k(lambda(X))", "lambda(X) in closure(Gamma_k)", {"k", "dim"}},
      {"eig_sum", "-sum_j H(lambda_j(X)), H in {identity, odd_root(d), arctan}", "all (omega, X)", {"H", "d"}},
      {"sqrt_gradient", "-tr X - |nu|^(1/2)", "all (omega, X)", {}},
  };
  return table;
}

}  // namespace catalog

}  // namespace elliptic
