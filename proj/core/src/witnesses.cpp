#include "elliptic/witnesses.hpp"

#include <algorithm>
#include <cmath>

#include "elliptic/error.hpp"
#include "elliptic/matrix_io.hpp"

namespace elliptic {

namespace {

void require_dim(const SymmetricMatrix& m, std::size_t n, const std::string& who) {
  if (m.dim() != n) {
    throw Error(ErrorKind::DimMismatch,
                who + ": matrix of dim " + std::to_string(m.dim()) + ", witness built for N = " + std::to_string(n));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Class U

ClassUWitness::ClassUWitness(double lambda, HFn h, std::string h_name)
    : lambda_(lambda), h_(std::move(h)), h_name_(std::move(h_name)) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::BadParams, "Class U witness needs lambda > 0, got " + format_double(lambda));
  }
  if (!h_) throw Error(ErrorKind::BadParams, "Class U witness needs a function H");
}

ClassUWitness ClassUWitness::constant(double lambda, double h) {
  if (!std::isfinite(h)) throw Error(ErrorKind::BadParams, "constant H must be finite");
  return ClassUWitness(lambda, [h](const JetPoint&) { return h; }, "const(" + format_double(h) + ")");
}

double ClassUWitness::H(const JetPoint& w) const {
  const double v = h_(w);
  if (!std::isfinite(v)) throw Error(ErrorKind::BadArgument, "H(omega) is not finite");
  return v;
}

// ---------------------------------------------------------------------------
// Class M

ClassMWitness::ClassMWitness(WitnessSide side, std::string name, EvalFn eval, InverseFn inv_at_zero, DomainFn domain,
                             std::optional<JetPoint> context)
    : side_(side), name_(std::move(name)), eval_(std::move(eval)), inv_(std::move(inv_at_zero)),
      domain_(std::move(domain)), context_(std::move(context)) {
  if (!eval_ || !inv_) throw Error(ErrorKind::BadParams, "Class M witness needs eval and inverse functions");
}

ClassMWitness ClassMWitness::with_bisection(WitnessSide side, std::string name, EvalFn eval, DomainFn domain,
                                            std::optional<JetPoint> context) {
  if (!eval) throw Error(ErrorKind::BadParams, "Class M witness needs an eval function");
  auto inv = [eval](const SymmetricMatrix& m) { return bisect_zero([&](double t) { return eval(t, m); }); };
  return ClassMWitness(side, std::move(name), eval, std::move(inv), std::move(domain), std::move(context));
}

bool ClassMWitness::in_domain(const SymmetricMatrix& m) const { return !domain_ || domain_(m); }

double ClassMWitness::eval(double t, const SymmetricMatrix& m) const {
  if (!in_domain(m)) throw Error(ErrorKind::OutOfDomain, name_ + ": M outside the witness domain");
  return eval_(t, m);
}

double ClassMWitness::inv_at_zero(const SymmetricMatrix& m) const {
  if (!in_domain(m)) throw Error(ErrorKind::OutOfDomain, name_ + ": M outside the witness domain");
  return inv_(m);
}

double bisect_zero(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw Error(ErrorKind::NotInClassM, "witness does not cross zero on [" + format_double(lo) + ", " +
                                            format_double(hi) + "]");
  }
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (fm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Shipped witnesses

WitnessPair class_u_to_class_m(const OperatorDescriptor& op, const ClassUWitness& w, const JetPoint& omega) {
  return class_u_to_class_m(op, w, omega, omega);
}

WitnessPair class_u_to_class_m(const OperatorDescriptor& op, const ClassUWitness& w, const JetPoint& omega_x,
                               const JetPoint& omega_y) {
  const double lambda = w.lambda();
  const double hx = w.H(omega_x);
  const double hy = w.H(omega_y);

  auto g1 = [op, lambda, hx, omega_x](double t, const SymmetricMatrix& m) {
    return lambda * t - lambda * lambda_min(m) - hx - op.evaluate(omega_x, m);
  };
  auto inv1 = [op, lambda, hx, omega_x](const SymmetricMatrix& m) {
    return (hx + op.evaluate(omega_x, m)) / lambda + lambda_min(m);
  };
  auto dom1 = [op, omega_x](const SymmetricMatrix& m) { return op.in_domain(omega_x, m); };

  auto g2 = [op, lambda, hy, omega_y](double t, const SymmetricMatrix& m) {
    return lambda * t - lambda * lambda_max(-m) + hy - op.evaluate(omega_y, -m);
  };
  auto inv2 = [op, lambda, hy, omega_y](const SymmetricMatrix& m) {
    return (op.evaluate(omega_y, -m) - hy) / lambda + lambda_max(-m);
  };
  auto dom2 = [op, omega_y](const SymmetricMatrix& m) { return op.in_domain(omega_y, -m); };

  const std::string base = "class_u(" + op.name() + ", lambda=" + format_double(lambda) + ")";
  return WitnessPair{
      ClassMWitness(WitnessSide::G1, base + ".g1", g1, inv1, dom1, omega_x),
      ClassMWitness(WitnessSide::G2, base + ".g2", g2, inv2, dom2, omega_y),
  };
}

WitnessPair witness_p_laplace(double p, const JetPoint& omega) { return witness_p_laplace(p, omega, omega); }

WitnessPair witness_p_laplace(double p, const JetPoint& omega_x, const JetPoint& omega_y) {
  if (!std::isfinite(p)) throw Error(ErrorKind::BadParams, "p must be finite");
  if (p <= 1.0) {
    throw Error(ErrorKind::NotInClassM, "p-Laplacian is in Class M only for p in (1, inf), got p = " +
                                            format_double(p));
  }
  for (const JetPoint* w : {&omega_x, &omega_y}) {
    if (w->gradient_norm() < kGradientFloor) {
      throw Error(ErrorKind::OutOfDomain, "p-Laplacian witness needs a non-zero gradient slot");
    }
  }
  if (omega_x.dim() != omega_y.dim()) throw Error(ErrorKind::DimMismatch, "omega_x and omega_y differ in N");

  const std::size_t n = omega_x.dim();
  const double nd = static_cast<double>(n);
  const double sx = std::pow(omega_x.gradient_norm(), p - 2.0);
  const double sy = std::pow(omega_y.gradient_norm(), p - 2.0);
  // g(t, M) = s [slope t + sign * coef lambda_N(M)]
  const bool large_p = p >= 2.0;
  const double slope = large_p ? 1.0 : p - 1.0;
  const double coef = large_p ? nd + p - 3.0 : nd - 1.0;

  auto make = [&](WitnessSide side, double s, const JetPoint& ctx) {
    const double sign = side == WitnessSide::G1 ? 1.0 : -1.0;
    auto eval = [=](double t, const SymmetricMatrix& m) {
      require_dim(m, n, "p-Laplace witness");
      return s * (slope * t + sign * coef * lambda_max(m));
    };
    auto inv = [=](const SymmetricMatrix& m) {
      require_dim(m, n, "p-Laplace witness");
      return -sign * coef / slope * lambda_max(m);
    };
    const std::string name = std::string("p_laplace(p=") + format_double(p) + ")." +
                             (side == WitnessSide::G1 ? "g1" : "g2");
    return ClassMWitness(side, name, eval, inv, {}, ctx);
  };
  return WitnessPair{make(WitnessSide::G1, sx, omega_x), make(WitnessSide::G2, sy, omega_y)};
}

WitnessPair witness_eig_sum(const MonotoneFunction& h) {
  if (!h.bijective() || h.bounded_below || h.bounded_above) {
    throw Error(ErrorKind::NotInClassM,
                "eig_sum(" + h.name + "): F_H is in Class M only when H is unbounded above and below");
  }
  // Sum of H over all eigenvalues of `m` except the smallest.
  auto tail_sum = [h](const SymmetricMatrix& m) {
    const auto ev = eigenvalues(m);
    double s = 0.0;
    for (std::size_t j = 1; j < ev.size(); ++j) s += h(ev[j]);
    return s;
  };
  // Sum of H over all eigenvalues of -m except the largest.
  auto head_sum_neg = [h](const SymmetricMatrix& m) {
    const auto ev = eigenvalues(-m);
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < ev.size(); ++j) s += h(ev[j]);
    return s;
  };
  auto g1 = [h, tail_sum](double t, const SymmetricMatrix& m) { return h(t) + tail_sum(m); };
  auto inv1 = [h, tail_sum](const SymmetricMatrix& m) { return h.inverse(-tail_sum(m)); };
  auto g2 = [h, head_sum_neg](double t, const SymmetricMatrix& m) { return h(t) + head_sum_neg(m); };
  auto inv2 = [h, head_sum_neg](const SymmetricMatrix& m) { return h.inverse(-head_sum_neg(m)); };
  return WitnessPair{
      ClassMWitness(WitnessSide::G1, "eig_sum(" + h.name + ").g1", g1, inv1),
      ClassMWitness(WitnessSide::G2, "eig_sum(" + h.name + ").g2", g2, inv2),
  };
}

// ---------------------------------------------------------------------------
// Bounds

nlohmann::json to_json(const BoundReport& r) {
  return {{"lower_X", r.lower_X},
          {"lower_negY", r.lower_negY},
          {"upper_block_ok", r.upper_block_ok},
          {"witness", r.witness},
          {"details", r.details}};
}

BoundReport theorem_lower_bounds(const ClassMWitness& g1, const ClassMWitness& g2, const SymmetricMatrix& e,
                                 const SymmetricMatrix& d) {
  if (e.dim() != d.dim()) throw Error(ErrorKind::DimMismatch, "E and D differ in dimension");
  BoundReport r;
  r.lower_X = g1.inv_at_zero(e);
  r.lower_negY = -g2.inv_at_zero(d);
  r.witness = g1.name() + " / " + g2.name();
  r.details = {{"route", "class_m"}, {"upper_block_checked", false}};
  return r;
}

BoundReport corollary_bounds(const OperatorDescriptor& op, const ClassUWitness& w, const JetPoint& wx,
                             const JetPoint& wy, const SymmetricMatrix& e, const SymmetricMatrix& d) {
  if (e.dim() != d.dim()) throw Error(ErrorKind::DimMismatch, "E and D differ in dimension");
  BoundReport r;
  r.lower_X = (w.H(wx) + op.evaluate(wx, e)) / w.lambda() + lambda_min(e);
  r.lower_negY = (w.H(wy) - op.evaluate(wy, -d)) / w.lambda() - lambda_max(-d);
  r.witness = "class_u(" + op.name() + ", lambda=" + format_double(w.lambda()) + ", H=" + w.h_name() + ")";
  r.details = {{"route", "class_u_corollary"}, {"upper_block_checked", false}};
  return r;
}

std::optional<ClassUWitness> known_class_u_witness(const OperatorDescriptor& op) {
  const auto& params = op.params();
  const std::string family = params.value("family", "");
  if (family == "linear_uniform") return ClassUWitness::constant(params.at("theta").get<double>(), 0.0);
  if (family == "sqrt_gradient") return ClassUWitness::constant(1.0, 0.0);
  if (family == "p_laplace" && params.at("p").get<double>() == 2.0) return ClassUWitness::constant(1.0, 0.0);
  if (family == "p_laplace_homog") {
    const double p = params.at("p").get<double>();
    if (p > 1.0) return ClassUWitness::constant(std::min(1.0, p - 1.0), 0.0);
  }
  if (family == "eig_sum" && params.value("H", "") == "identity") return ClassUWitness::constant(1.0, 0.0);
  if (family == "k_hessian" && params.at("k").get<int>() == 1) return ClassUWitness::constant(1.0, 0.0);
  return std::nullopt;
}

std::optional<WitnessPair> known_class_m_witnesses(const OperatorDescriptor& op, const JetPoint& omega_x,
                                                   const JetPoint& omega_y) {
  const auto& params = op.params();
  const std::string family = params.value("family", "");
  if (family == "p_laplace" && params.at("p").get<double>() > 1.0) {
    return witness_p_laplace(params.at("p").get<double>(), omega_x, omega_y);
  }
  if (family == "eig_sum") {
    const auto h = MonotoneFunction::from_json(params);
    if (h.bijective()) return witness_eig_sum(h);
    return std::nullopt;
  }
  if (auto u = known_class_u_witness(op)) return class_u_to_class_m(op, *u, omega_x, omega_y);
  return std::nullopt;
}

}  // namespace elliptic
