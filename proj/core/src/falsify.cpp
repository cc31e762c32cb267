#include "elliptic/falsify.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "elliptic/error.hpp"
#include "elliptic/matrix_io.hpp"
#include "sampling.hpp"

namespace elliptic {

namespace {

using detail::Rng;

enum Stream : std::uint64_t {
  kEllipticity = 1,
  kClassU = 2,
  kCondition1 = 3,
  kCondition2 = 4,
  kCondition3 = 5,
  kCondition4 = 6,
};

OperatorDescriptor resolve_op(const Certificate& cert, const RecheckContext& ctx) {
  if (ctx.op) return *ctx.op;
  return catalog::make_operator(cert.witnesses.at("operator"), cert.witnesses.at("dim").get<std::size_t>());
}

const ClassMWitness& resolve_witness(const RecheckContext& ctx, const std::string& side) {
  const ClassMWitness* g = side == "g1" ? ctx.g1 : ctx.g2;
  if (!g) throw Error(ErrorKind::BadArgument, "re-checking this certificate needs witness " + side);
  return *g;
}

// Log-spaced grid on [-1e6, 1e6] (four points per decade on each side) plus 0.
const std::vector<double>& monotonicity_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> pos;
    for (int e = -24; e <= 24; ++e) pos.push_back(std::pow(10.0, e / 4.0));
    std::vector<double> g;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.push_back(-*it);
    g.push_back(0.0);
    g.insert(g.end(), pos.begin(), pos.end());
    return g;
  }();
  return grid;
}

constexpr double kSurjectivityEnd = 1e6;
constexpr double kInverseResidual = 1e-8;
constexpr double kContinuityStep = 1e-8;
constexpr double kContinuityAllowance = 1e-5;

std::string side_name(const ClassMWitness& g) { return g.side() == WitnessSide::G1 ? "g1" : "g2"; }

SymmetricMatrix draw_witness_matrix(Rng& rng, const ClassMWitness& g, std::size_t n, double scale,
                                    std::size_t& resamples) {
  for (std::size_t attempt = 0; attempt < kResampleCap; ++attempt) {
    SymmetricMatrix m = detail::proposal(rng, n, scale, attempt);
    if (g.in_domain(m)) return m;
    ++resamples;
  }
  throw Error(ErrorKind::SamplingExhausted, g.name() + ": no matrix in the witness domain after cap");
}

JetPoint jet_for(Rng& rng, const std::optional<JetPoint>& context, std::size_t n, double scale) {
  return context ? *context : detail::random_jet(rng, n, scale);
}

void require_context_dim(const ClassMWitness& g, std::size_t n) {
  if (g.context() && g.context()->dim() != n) {
    throw Error(ErrorKind::DimMismatch, g.name() + ": witness built for N = " + std::to_string(g.context()->dim()) +
                                            ", sampling N = " + std::to_string(n));
  }
}

// --- condition 1 ---------------------------------------------------------

std::optional<Certificate> condition_1(const ClassMWitness& g, const SymmetricMatrix& m, std::size_t n) {
  auto base = [&](const char* check) {
    Certificate c;
    c.kind = "class_m_condition_1";
    c.witnesses = {{"side", side_name(g)}, {"witness", g.name()}, {"check", check}, {"dim", n}, {"M", to_json(m)}};
    return c;
  };
  const auto& grid = monotonicity_grid();
  double prev = g.eval(grid.front(), m);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = g.eval(grid[i], m);
    if (!(cur > prev)) {
      Certificate c = base("strictly_increasing");
      c.witnesses["t_lo"] = grid[i - 1];
      c.witnesses["t_hi"] = grid[i];
      c.lhs = prev;
      c.rhs = cur;
      c.margin = prev - cur;
      c.relation = "g(t_lo, M) < g(t_hi, M)";
      return c;
    }
    prev = cur;
  }
  const double lo = g.eval(-kSurjectivityEnd, m);
  const double hi = g.eval(kSurjectivityEnd, m);
  if (!(lo < 0.0 && hi > 0.0)) {
    Certificate c = base("sign_change");
    c.lhs = lo;
    c.rhs = hi;
    c.margin = std::max(lo, -hi);
    c.relation = "g(-1e6, M) < 0 < g(1e6, M)";
    return c;
  }
  const double residual = std::abs(g.eval(g.inv_at_zero(m), m));
  if (residual > kInverseResidual) {
    Certificate c = base("inverse_at_zero");
    c.lhs = residual;
    c.rhs = kInverseResidual;
    c.margin = residual - kInverseResidual;
    c.relation = "|g(inv_at_zero(M), M)| <= 1e-8";
    return c;
  }
  return std::nullopt;
}

double recompute_condition_1(const Certificate& cert, const ClassMWitness& g) {
  const SymmetricMatrix m = symmetric_from_json(cert.witnesses.at("M"));
  const std::string check = cert.witnesses.at("check").get<std::string>();
  if (check == "strictly_increasing") {
    return g.eval(cert.witnesses.at("t_lo").get<double>(), m) - g.eval(cert.witnesses.at("t_hi").get<double>(), m);
  }
  if (check == "sign_change") return std::max(g.eval(-kSurjectivityEnd, m), -g.eval(kSurjectivityEnd, m));
  return std::abs(g.eval(g.inv_at_zero(m), m)) - kInverseResidual;
}

// --- condition 2 ---------------------------------------------------------

std::optional<Certificate> condition_2(const ClassMWitness& g, const SymmetricMatrix& m, const SymmetricMatrix& dir,
                                       std::size_t n) {
  const SymmetricMatrix moved = m + kContinuityStep * dir;
  if (!g.in_domain(moved)) return std::nullopt;
  const double at = g.inv_at_zero(m);
  const double change = std::abs(g.inv_at_zero(moved) - at);
  const double allowed = kContinuityAllowance * (1.0 + std::abs(at));
  if (change <= allowed) return std::nullopt;
  Certificate c;
  c.kind = "class_m_condition_2";
  c.witnesses = {{"side", side_name(g)}, {"witness", g.name()}, {"dim", n},
                 {"M", to_json(m)},      {"direction", to_json(dir)}, {"step", kContinuityStep}};
  c.lhs = change;
  c.rhs = allowed;
  c.margin = change - allowed;
  c.relation = "|inv(M + step E) - inv(M)| <= 1e-5 (1 + |inv(M)|)";
  return c;
}

double recompute_condition_2(const Certificate& cert, const ClassMWitness& g) {
  const SymmetricMatrix m = symmetric_from_json(cert.witnesses.at("M"));
  const SymmetricMatrix dir = symmetric_from_json(cert.witnesses.at("direction"));
  const double at = g.inv_at_zero(m);
  const double change = std::abs(g.inv_at_zero(m + cert.witnesses.at("step").get<double>() * dir) - at);
  return change - kContinuityAllowance * (1.0 + std::abs(at));
}

// --- conditions 3 and 4 --------------------------------------------------

Certificate condition_3_certificate(const OperatorDescriptor& op, const ClassMWitness& g1, const JetPoint& w,
                                    const SymmetricMatrix& x, const SymmetricMatrix& m, double lhs, double rhs) {
  Certificate c;
  c.kind = "class_m_condition_3";
  c.witnesses = {{"operator", op.params()}, {"dim", x.dim()}, {"witness", g1.name()},
                 {"omega", to_json(w)},     {"X", to_json(x)},  {"M", to_json(m)}};
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = lhs - rhs;
  c.relation = "-F(omega, X) <= g1(lambda_1(X), M)";
  return c;
}

double condition_3_margin(const OperatorDescriptor& op, const ClassMWitness& g1, const JetPoint& w,
                          const SymmetricMatrix& x, const SymmetricMatrix& m, double* lhs = nullptr,
                          double* rhs = nullptr) {
  const double l = -op.evaluate(w, x);
  const double r = g1.eval(lambda_min(x), m);
  if (lhs) *lhs = l;
  if (rhs) *rhs = r;
  return l - r;
}

double condition_4_margin(const OperatorDescriptor& op, const ClassMWitness& g2, const JetPoint& w,
                          const SymmetricMatrix& y, const SymmetricMatrix& m, double* lhs = nullptr,
                          double* rhs = nullptr) {
  const double l = -op.evaluate(w, y);
  const double r = g2.eval(lambda_max(y), m);
  if (lhs) *lhs = l;
  if (rhs) *rhs = r;
  return r - l;
}

// --- counterexamples -----------------------------------------------------

std::vector<double> nonpositive_grid(const CounterexampleParams& params, std::vector<double> fallback) {
  if (params.c) {
    if (!(*params.c <= 0.0) || !std::isfinite(*params.c)) {
      throw Error(ErrorKind::BadParams, "c must be a finite value <= 0");
    }
    return {*params.c};
  }
  return fallback;
}

void require_dim_at_least_2(const CounterexampleParams& params) {
  if (params.dim < 2 || params.dim > kMaxDim) {
    throw Error(ErrorKind::BadParams, "construction needs 2 <= N <= 16, got N = " + std::to_string(params.dim));
  }
}

std::vector<double> unit(std::size_t n, std::size_t i) {
  std::vector<double> e(n, 0.0);
  e[i] = 1.0;
  return e;
}

struct RowEval {
  double minus_f;
  double lambda1;
};

RowEval inf_laplace_row(std::size_t n, double c) {
  std::vector<double> d(n, 0.0);
  d.front() = 1.0;
  d.back() = c;
  const auto x = SymmetricMatrix::diagonal(d);
  return {-catalog::inf_laplace().evaluate(JetPoint::with_gradient(unit(n, 0)), x), lambda_min(x)};
}

RowEval p1_laplace_row(std::size_t n, double c) {
  std::vector<double> d(n, 1.0);
  d.back() = c;
  const auto x = SymmetricMatrix::diagonal(d);
  return {-catalog::p_laplace(1.0).evaluate(JetPoint::with_gradient(unit(n, n - 1)), x), lambda_min(x)};
}

// Shared shape of the "value constant while lambda_1 -> -inf" certificates.
template <class RowFn>
Certificate constant_value_certificate(const std::string& kind, std::size_t n, const std::vector<double>& grid,
                                       double expected, const nlohmann::json& op_spec, RowFn row_fn) {
  Certificate cert;
  cert.kind = kind;
  cert.witnesses = {{"operator", op_spec}, {"dim", n}, {"grid", grid}, {"expected_value", expected}};
  nlohmann::json rows = nlohmann::json::array();
  bool constant = true;
  bool eigen_exact = true;
  RowEval last{};
  for (double c : grid) {
    last = row_fn(n, c);
    constant = constant && last.minus_f == expected;
    eigen_exact = eigen_exact && last.lambda1 == c;
    rows.push_back({{"c", c}, {"minus_F", last.minus_f}, {"lambda_1", last.lambda1}});
  }
  cert.witnesses["rows"] = rows;
  cert.lhs = last.minus_f;
  cert.rhs = last.lambda1;
  cert.margin = last.minus_f - last.lambda1;
  cert.relation = "-F(X_c) stays at the expected value while lambda_1(X_c) = c -> -inf";
  cert.details = {{"value", last.minus_f},
                  {"lambda_1", last.lambda1},
                  {"constant_value", constant},
                  {"lambda_1_equals_c", eigen_exact},
                  {"holds", constant && eigen_exact && cert.margin > 0.0}};
  return cert;
}

double k_hessian_value(std::size_t n, int k, std::int64_t m) {
  std::vector<double> d(n, 1.0);
  d[0] = d[1] = -static_cast<double>(m);
  return elementary_symmetric(k, eigenvalues(SymmetricMatrix::diagonal(d)));
}

Certificate k_hessian_certificate(const CounterexampleParams& params) {
  require_dim_at_least_2(params);
  if (params.k < 2 || static_cast<std::size_t>(params.k) > params.dim) {
    throw Error(ErrorKind::BadParams, "k_hessian construction needs 2 <= k <= N");
  }
  if (params.n < 1 || params.n > 1000000) throw Error(ErrorKind::BadParams, "k_hessian construction needs 1 <= n <= 1e6");
  const std::size_t n = params.dim;
  const auto nn = static_cast<std::int64_t>(n);

  Certificate cert;
  cert.kind = "k_hessian";
  cert.witnesses = {{"operator", {{"family", "k_hessian"}, {"k", params.k}, {"dim", n}}},
                    {"dim", n},
                    {"k", params.k},
                    {"n", params.n},
                    {"M", to_json(SymmetricMatrix::identity(n))}};

  nlohmann::json rows = nlohmann::json::array();
  bool exact = true;
  bool increasing = true;
  double prev = -std::numeric_limits<double>::infinity();
  std::int64_t m = params.n;
  for (int step = 0; step < 4; ++step, m *= 10) {
    std::vector<double> d(n, 1.0);
    d[0] = d[1] = -static_cast<double>(m);
    const auto x = SymmetricMatrix::diagonal(d);
    const double value = k_hessian_value(n, params.k, m);
    const std::int64_t formula = k_hessian_counterexample_value(nn, params.k, m);
    std::vector<std::int64_t> ints(n, 1);
    ints[0] = ints[1] = -m;
    const std::int64_t brute = elementary_symmetric_bruteforce(params.k, ints);
    exact = exact && formula == brute && value == static_cast<double>(formula);
    increasing = increasing && value > prev;
    prev = value;
    rows.push_back({{"n", m},
                    {"minus_F", value},
                    {"formula", formula},
                    {"bruteforce", brute},
                    {"lambda_1", lambda_min(x)},
                    {"in_sigma_k", gamma_k_member(x, params.k)}});
  }
  cert.witnesses["rows"] = rows;
  const double value = rows[0]["minus_F"].get<double>();
  cert.lhs = value;
  cert.rhs = -static_cast<double>(params.n);
  cert.margin = cert.lhs - cert.rhs;
  cert.relation = "-F_k(X_n) = C(N-2,k-2) n^2 - 2 C(N-2,k-1) n + C(N-2,k) grows while lambda_1(X_n) = -n";
  cert.details = {{"value", value},
                  {"formula", rows[0]["formula"]},
                  {"formula_matches_bruteforce", exact},
                  {"diverges", increasing},
                  {"holds", exact && increasing && cert.margin > 0.0}};
  return cert;
}

struct PowerEval {
  double lhs;
  double rhs;
};

// B = X_n = -diag(n, 1/n, ..., 1/n), M = 0, constant H = K.
PowerEval power_class_u(std::size_t dim, int d, double lambda, double k_const, double n) {
  std::vector<double> diag(dim, -1.0 / n);
  diag[0] = -n;
  const auto b = SymmetricMatrix::diagonal(diag);
  const SymmetricMatrix m(dim);
  const auto op = catalog::eig_sum(MonotoneFunction::odd_root(d));
  const JetPoint w = JetPoint::origin(dim);
  return {op.evaluate(w, b) - op.evaluate(w, m), lambda * (m - b).trace() + k_const};
}

Certificate power_not_u_certificate(const CounterexampleParams& params) {
  require_dim_at_least_2(params);
  if (!(params.lambda > 0.0) || !std::isfinite(params.K)) {
    throw Error(ErrorKind::BadParams, "power_not_u needs lambda > 0 and finite K");
  }
  MonotoneFunction::odd_root(params.d);  // validates d
  for (int e = 0; e <= 62; ++e) {
    const double n = std::ldexp(1.0, e);
    const PowerEval v = power_class_u(params.dim, params.d, params.lambda, params.K, n);
    if (v.rhs - v.lhs > 1.0) {
      Certificate cert;
      cert.kind = "power_not_u";
      cert.witnesses = {{"operator", {{"family", "eig_sum"}, {"H", "odd_root"}, {"d", params.d}}},
                        {"dim", params.dim},
                        {"d", params.d},
                        {"lambda", params.lambda},
                        {"K", params.K},
                        {"n", n}};
      cert.lhs = v.lhs;
      cert.rhs = v.rhs;
      cert.margin = v.rhs - v.lhs;
      cert.relation = "F(X_n) - F(0) >= lambda tr(0 - X_n) + K fails";
      cert.details = {{"n", n}, {"holds", true}};
      return cert;
    }
  }
  throw Error(ErrorKind::BadParams, "power_not_u: no violating n up to 2^62");
}

struct PLaplaceEval {
  double lhs;
  double rhs;
};

PLaplaceEval p_laplace_pair(std::size_t dim, double p, double lambda, double k_const, double c, double l) {
  std::vector<double> nu(dim, 0.0);
  nu[0] = c;
  std::vector<double> yd(dim, 0.0);
  yd[1] = l;
  const auto y = SymmetricMatrix::diagonal(yd);
  const SymmetricMatrix x(dim);
  const auto op = catalog::p_laplace(p);
  const JetPoint w = JetPoint::with_gradient(nu);
  return {op.evaluate(w, x) - op.evaluate(w, y), lambda * (y - x).trace() + k_const};
}

Certificate p_laplace_not_u_certificate(const CounterexampleParams& params) {
  require_dim_at_least_2(params);
  if (!(params.p >= 1.0) || params.p == 2.0 || !std::isfinite(params.p)) {
    throw Error(ErrorKind::BadParams, "p_laplace_not_u needs p >= 1 and p != 2");
  }
  if (!(params.lambda > 0.0) || !std::isfinite(params.K)) {
    throw Error(ErrorKind::BadParams, "p_laplace_not_u needs lambda > 0 and finite K");
  }
  // |nu|^(p-2) = lambda / 2 < lambda, then l large enough that (|nu|^(p-2) - lambda) l < K.
  const double c = std::pow(params.lambda / 2.0, 1.0 / (params.p - 2.0));
  const double l = std::max(1.0, 4.0 * std::abs(params.K) / params.lambda + 1.0);
  const PLaplaceEval v = p_laplace_pair(params.dim, params.p, params.lambda, params.K, c, l);
  Certificate cert;
  cert.kind = "p_laplace_not_u";
  cert.witnesses = {{"operator", {{"family", "p_laplace"}, {"p", params.p}}},
                    {"dim", params.dim},
                    {"p", params.p},
                    {"lambda", params.lambda},
                    {"K", params.K},
                    {"c", c},
                    {"l", l}};
  cert.lhs = v.lhs;
  cert.rhs = v.rhs;
  cert.margin = v.rhs - v.lhs;
  cert.relation = "F(c e_1, 0) - F(c e_1, diag(0, l)) >= lambda l + K fails";
  cert.details = {{"holds", cert.margin > kViolationMargin}};
  return cert;
}

}  // namespace

// ---------------------------------------------------------------------------

void SampleConfig::validate() const {
  if (trials < 1) throw Error(ErrorKind::BadArgument, "trials must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorKind::BadArgument, "scale must be positive");
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::BadArgument, "dim must be in 1..16");
}

nlohmann::json to_json(const PassReport& r) {
  return {{"result", "pass"}, {"kind", r.kind}, {"trials", r.trials}, {"resamples", r.resamples}, {"details", r.details}};
}

nlohmann::json to_json(const Certificate& c) {
  return {{"result", "certificate"},
          {"kind", c.kind},
          {"witnesses", c.witnesses},
          {"inequality_values", {{"lhs", c.lhs}, {"rhs", c.rhs}, {"relation", c.relation}}},
          {"margin", c.margin},
          {"trial", c.trial ? nlohmann::json(*c.trial) : nlohmann::json(nullptr)},
          {"details", c.details}};
}

nlohmann::json to_json(const CheckResult& r) {
  return std::visit([](const auto& v) { return to_json(v); }, r);
}

CheckResult check_degenerate_ellipticity(const OperatorDescriptor& op, const SampleConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.dim;
  auto trial = [&](std::size_t i, std::size_t& resamples) -> std::optional<Certificate> {
    Rng rng = detail::trial_rng(cfg.seed, kEllipticity, i);
    for (std::size_t attempt = 0; attempt < kResampleCap; ++attempt) {
      const JetPoint w = detail::random_jet(rng, n, cfg.scale);
      const SymmetricMatrix x = detail::proposal(rng, n, cfg.scale, attempt);
      const SymmetricMatrix y = x + detail::random_psd(rng, n, cfg.scale);
      if (!op.in_domain(w, x) || !op.in_domain(w, y)) {
        ++resamples;
        continue;
      }
      const double fx = op.evaluate(w, x);
      const double fy = op.evaluate(w, y);
      if (fy - fx <= kViolationMargin) return std::nullopt;
      Certificate c;
      c.kind = "degenerate_ellipticity";
      c.witnesses = {{"operator", op.params()}, {"dim", n}, {"omega", to_json(w)}, {"X", to_json(x)}, {"Y", to_json(y)}};
      c.lhs = fx;
      c.rhs = fy;
      c.margin = fy - fx;
      c.relation = "X <= Y  =>  F(omega, X) >= F(omega, Y)";
      return c;
    }
    throw Error(ErrorKind::SamplingExhausted, op.name() + ": no in-domain (omega, X, Y) after cap");
  };
  auto out = detail::run_trials(cfg.trials, cfg.threads, trial);
  if (out.violation) return *out.violation;
  return PassReport{"degenerate_ellipticity", cfg.trials, out.resamples, {{"operator", op.params()}, {"dim", n}}};
}

CheckResult check_class_u(const OperatorDescriptor& op, const ClassUWitness& w, const SampleConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.dim;

  auto make_cert = [&](const JetPoint& omega, const SymmetricMatrix& b, const SymmetricMatrix& m) -> std::optional<Certificate> {
    const double lhs = op.evaluate(omega, b) - op.evaluate(omega, m);
    const double h = w.H(omega);
    const double rhs = w.lambda() * (m - b).trace() + h;
    if (rhs - lhs <= kViolationMargin) return std::nullopt;
    Certificate c;
    c.kind = "class_u";
    c.witnesses = {{"operator", op.params()}, {"dim", n},          {"omega", to_json(omega)}, {"B", to_json(b)},
                   {"M", to_json(m)},        {"lambda", w.lambda()}, {"H_omega", h}};
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = rhs - lhs;
    c.relation = "B <= M  =>  F(omega, B) - F(omega, M) >= lambda tr(M - B) + H(omega)";
    return c;
  };

  // Structured pairs: gradient along e_1, matrix gap along e_2.
  static constexpr double kGradScales[] = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  static constexpr double kGaps[] = {1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  std::size_t probes = 0;
  for (double s : kGradScales) {
    for (double l : kGaps) {
      std::vector<double> nu(n, 0.0);
      nu[0] = s;
      const JetPoint omega = JetPoint::with_gradient(nu);
      std::vector<double> md(n, 0.0);
      md[n >= 2 ? 1 : 0] = l;
      const SymmetricMatrix b(n);
      const auto m = SymmetricMatrix::diagonal(md);
      if (!op.in_domain(omega, b) || !op.in_domain(omega, m)) continue;
      ++probes;
      if (auto c = make_cert(omega, b, m)) {
        c->details = {{"stage", "structured_probe"}};
        return *c;
      }
    }
  }

  auto trial = [&](std::size_t i, std::size_t& resamples) -> std::optional<Certificate> {
    Rng rng = detail::trial_rng(cfg.seed, kClassU, i);
    for (std::size_t attempt = 0; attempt < kResampleCap; ++attempt) {
      const JetPoint omega = detail::random_jet(rng, n, cfg.scale);
      const SymmetricMatrix m = detail::proposal(rng, n, cfg.scale, attempt);
      const SymmetricMatrix b = m - detail::random_psd(rng, n, cfg.scale);
      if (!op.in_domain(omega, b) || !op.in_domain(omega, m)) {
        ++resamples;
        continue;
      }
      auto c = make_cert(omega, b, m);
      if (c) c->details = {{"stage", "random"}};
      return c;
    }
    throw Error(ErrorKind::SamplingExhausted, op.name() + ": no in-domain (omega, B, M) after cap");
  };
  auto out = detail::run_trials(cfg.trials, cfg.threads, trial);
  if (out.violation) return *out.violation;
  return PassReport{"class_u",
                    cfg.trials,
                    out.resamples,
                    {{"operator", op.params()}, {"dim", n}, {"lambda", w.lambda()}, {"structured_probes", probes}}};
}

std::optional<Certificate> probe_condition_3(const OperatorDescriptor& op, const ClassMWitness& g1, std::size_t dim) {
  require_context_dim(g1, dim);
  const JetPoint omega = g1.context() ? *g1.context() : JetPoint::with_gradient(unit(dim, 0));
  const SymmetricMatrix m = SymmetricMatrix::identity(dim);
  if (!g1.in_domain(m)) return std::nullopt;
  for (int e = 0; e <= 6; ++e) {
    const double c = -std::pow(10.0, e);
    std::vector<SymmetricMatrix> family{SymmetricMatrix::scalar(dim, c)};
    for (std::size_t pos = 0; pos < dim; ++pos) {
      std::vector<double> d(dim, 1.0);
      d[pos] = c;
      family.push_back(SymmetricMatrix::diagonal(d));
    }
    for (const auto& x : family) {
      if (!op.in_domain(omega, x)) continue;
      double lhs = 0.0;
      double rhs = 0.0;
      if (condition_3_margin(op, g1, omega, x, m, &lhs, &rhs) > kViolationMargin) {
        Certificate cert = condition_3_certificate(op, g1, omega, x, m, lhs, rhs);
        cert.details = {{"stage", "divergence_probe"}, {"c", c}, {"lambda_1", lambda_min(x)}};
        return cert;
      }
    }
  }
  return std::nullopt;
}

CheckResult check_class_m(const OperatorDescriptor& op, const ClassMWitness& g1, const ClassMWitness& g2,
                          const SampleConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.dim;
  require_context_dim(g1, n);
  require_context_dim(g2, n);
  if (g1.side() != WitnessSide::G1 || g2.side() != WitnessSide::G2) {
    throw Error(ErrorKind::BadArgument, "check_class_m expects (g1, g2) in that order");
  }
  std::size_t resamples = 0;
  const std::size_t structural = std::min<std::size_t>(cfg.trials, 64);

  auto stage_1 = [&](std::size_t i, std::size_t& rs) -> std::optional<Certificate> {
    Rng rng = detail::trial_rng(cfg.seed, kCondition1, i);
    for (const ClassMWitness* g : {&g1, &g2}) {
      if (auto c = condition_1(*g, draw_witness_matrix(rng, *g, n, cfg.scale, rs), n)) return c;
    }
    return std::nullopt;
  };
  auto s1 = detail::run_trials(structural, cfg.threads, stage_1);
  if (s1.violation) return *s1.violation;
  resamples += s1.resamples;

  auto stage_2 = [&](std::size_t i, std::size_t& rs) -> std::optional<Certificate> {
    Rng rng = detail::trial_rng(cfg.seed, kCondition2, i);
    for (const ClassMWitness* g : {&g1, &g2}) {
      const SymmetricMatrix m = draw_witness_matrix(rng, *g, n, cfg.scale, rs);
      SymmetricMatrix dir = detail::random_symmetric(rng, n, 1.0);
      dir = (1.0 / std::max(dir.frobenius_norm(), 1e-300)) * dir;
      if (auto c = condition_2(*g, m, dir, n)) return c;
    }
    return std::nullopt;
  };
  auto s2 = detail::run_trials(structural, cfg.threads, stage_2);
  if (s2.violation) return *s2.violation;
  resamples += s2.resamples;

  if (auto probe = probe_condition_3(op, g1, n)) return *probe;

  auto stage_3 = [&](std::size_t i, std::size_t& rs) -> std::optional<Certificate> {
    Rng rng = detail::trial_rng(cfg.seed, kCondition3, i);
    for (std::size_t attempt = 0; attempt < kResampleCap; ++attempt) {
      const JetPoint w = jet_for(rng, g1.context(), n, cfg.scale);
      const SymmetricMatrix m = detail::proposal(rng, n, cfg.scale, attempt);
      const SymmetricMatrix x = m - detail::random_psd(rng, n, cfg.scale);
      if (!g1.in_domain(m) || !op.in_domain(w, x)) {
        ++rs;
        continue;
      }
      double lhs = 0.0;
      double rhs = 0.0;
      if (condition_3_margin(op, g1, w, x, m, &lhs, &rhs) <= kViolationMargin) return std::nullopt;
      Certificate c = condition_3_certificate(op, g1, w, x, m, lhs, rhs);
      c.details = {{"stage", "random"}};
      return c;
    }
    throw Error(ErrorKind::SamplingExhausted, op.name() + ": no in-domain (X <= M) pair after cap");
  };
  auto s3 = detail::run_trials(cfg.trials, cfg.threads, stage_3);
  if (s3.violation) return *s3.violation;
  resamples += s3.resamples;

  auto stage_4 = [&](std::size_t i, std::size_t& rs) -> std::optional<Certificate> {
    Rng rng = detail::trial_rng(cfg.seed, kCondition4, i);
    for (std::size_t attempt = 0; attempt < kResampleCap; ++attempt) {
      const JetPoint w = jet_for(rng, g2.context(), n, cfg.scale);
      const SymmetricMatrix m = detail::proposal(rng, n, cfg.scale, attempt);
      const SymmetricMatrix y = -m + detail::random_psd(rng, n, cfg.scale);
      if (!g2.in_domain(m) || !op.in_domain(w, y)) {
        ++rs;
        continue;
      }
      double lhs = 0.0;
      double rhs = 0.0;
      if (condition_4_margin(op, g2, w, y, m, &lhs, &rhs) <= kViolationMargin) return std::nullopt;
      Certificate c;
      c.kind = "class_m_condition_4";
      c.witnesses = {{"operator", op.params()}, {"dim", n},          {"witness", g2.name()},
                     {"omega", to_json(w)},     {"Y", to_json(y)},  {"M", to_json(m)}};
      c.lhs = lhs;
      c.rhs = rhs;
      c.margin = rhs - lhs;
      c.relation = "-F(omega, Y) >= g2(lambda_N(Y), M)";
      c.details = {{"stage", "random"}};
      return c;
    }
    throw Error(ErrorKind::SamplingExhausted, op.name() + ": no in-domain (-Y <= M) pair after cap");
  };
  auto s4 = detail::run_trials(cfg.trials, cfg.threads, stage_4);
  if (s4.violation) return *s4.violation;
  resamples += s4.resamples;

  return PassReport{"class_m",
                    cfg.trials,
                    resamples,
                    {{"operator", op.params()},
                     {"dim", n},
                     {"witnesses", {g1.name(), g2.name()}},
                     {"condition_1_samples", structural},
                     {"condition_2_samples", structural},
                     {"condition_3_trials", cfg.trials},
                     {"condition_4_trials", cfg.trials}}};
}

Certificate counterexample(std::string_view name, const CounterexampleParams& params) {
  if (name == "inf_laplace") {
    require_dim_at_least_2(params);
    const auto grid = nonpositive_grid(params, {0.0, -1.0, -1e1, -1e2, -1e3, -1e4, -1e5, -1e6});
    return constant_value_certificate("inf_laplace", params.dim, grid, 1.0, {{"family", "inf_laplace"}},
                                      inf_laplace_row);
  }
  if (name == "p1_laplace") {
    require_dim_at_least_2(params);
    const auto grid = nonpositive_grid(params, {0.0, -1.0, -1e3, -1e6});
    return constant_value_certificate("p1_laplace", params.dim, grid, static_cast<double>(params.dim - 1),
                                      {{"family", "p_laplace"}, {"p", 1.0}}, p1_laplace_row);
  }
  if (name == "k_hessian") return k_hessian_certificate(params);
  if (name == "power_not_u") return power_not_u_certificate(params);
  if (name == "p_laplace_not_u") return p_laplace_not_u_certificate(params);
  throw Error(ErrorKind::BadParams, "unknown counterexample '" + std::string(name) +
                                        "' (inf_laplace, k_hessian, p1_laplace, power_not_u, p_laplace_not_u)");
}

double recompute_margin(const Certificate& cert, const RecheckContext& ctx) {
  const auto& w = cert.witnesses;
  const std::string& kind = cert.kind;
  if (kind == "degenerate_ellipticity") {
    const auto op = resolve_op(cert, ctx);
    const JetPoint omega = jet_from_json(w.at("omega"));
    return op.evaluate(omega, symmetric_from_json(w.at("Y"))) - op.evaluate(omega, symmetric_from_json(w.at("X")));
  }
  if (kind == "class_u") {
    const auto op = resolve_op(cert, ctx);
    const JetPoint omega = jet_from_json(w.at("omega"));
    const auto b = symmetric_from_json(w.at("B"));
    const auto m = symmetric_from_json(w.at("M"));
    const double lhs = op.evaluate(omega, b) - op.evaluate(omega, m);
    return w.at("lambda").get<double>() * (m - b).trace() + w.at("H_omega").get<double>() - lhs;
  }
  if (kind == "class_m_condition_1") return recompute_condition_1(cert, resolve_witness(ctx, w.at("side")));
  if (kind == "class_m_condition_2") return recompute_condition_2(cert, resolve_witness(ctx, w.at("side")));
  if (kind == "class_m_condition_3") {
    const auto op = resolve_op(cert, ctx);
    return condition_3_margin(op, resolve_witness(ctx, "g1"), jet_from_json(w.at("omega")),
                              symmetric_from_json(w.at("X")), symmetric_from_json(w.at("M")));
  }
  if (kind == "class_m_condition_4") {
    const auto op = resolve_op(cert, ctx);
    return condition_4_margin(op, resolve_witness(ctx, "g2"), jet_from_json(w.at("omega")),
                              symmetric_from_json(w.at("Y")), symmetric_from_json(w.at("M")));
  }
  if (kind == "inf_laplace" || kind == "p1_laplace") {
    const auto grid = w.at("grid").get<std::vector<double>>();
    const auto row = (kind == "inf_laplace" ? inf_laplace_row : p1_laplace_row)(w.at("dim").get<std::size_t>(),
                                                                                  grid.back());
    return row.minus_f - row.lambda1;
  }
  if (kind == "k_hessian") {
    const auto m = w.at("n").get<std::int64_t>();
    return k_hessian_value(w.at("dim").get<std::size_t>(), w.at("k").get<int>(), m) + static_cast<double>(m);
  }
  if (kind == "power_not_u") {
    const PowerEval v = power_class_u(w.at("dim").get<std::size_t>(), w.at("d").get<int>(), w.at("lambda").get<double>(),
                                      w.at("K").get<double>(), w.at("n").get<double>());
    return v.rhs - v.lhs;
  }
  if (kind == "p_laplace_not_u") {
    const PLaplaceEval v = p_laplace_pair(w.at("dim").get<std::size_t>(), w.at("p").get<double>(),
                                          w.at("lambda").get<double>(), w.at("K").get<double>(),
                                          w.at("c").get<double>(), w.at("l").get<double>());
    return v.rhs - v.lhs;
  }
  if (kind == "lemma_upper_bound") {
    return -loewner_margin(symmetric_from_json(w.at("matrix")), symmetric_from_json(w.at("bound")));
  }
  throw Error(ErrorKind::BadArgument, "unknown certificate kind '" + kind + "'");
}

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::int64_t elementary_symmetric_bruteforce(int k, std::span<const std::int64_t> v) {
  const std::size_t n = v.size();
  if (k < 1 || static_cast<std::size_t>(k) > n || n > 30) {
    throw Error(ErrorKind::BadArgument, "bruteforce S_k needs 1 <= k <= len(v) <= 30");
  }
  std::int64_t total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    std::int64_t prod = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) prod *= v[i];
    total += prod;
  }
  return total;
}

std::int64_t k_hessian_counterexample_value(std::int64_t dim, std::int64_t k, std::int64_t n) {
  return binomial(dim - 2, k - 2) * n * n - 2 * binomial(dim - 2, k - 1) * n + binomial(dim - 2, k);
}

}  // namespace elliptic
