#include "elliptic/sums.hpp"

#include <cmath>
#include <string>

#include "elliptic/error.hpp"
#include "elliptic/matrix_io.hpp"
#include "sampling.hpp"

namespace elliptic {

namespace {

constexpr std::uint64_t kJitterStream = 11;

SymmetricMatrix squared_block(const SymmetricMatrix& diag_block, const Matrix& cross) {
  return diag_block.square() + SymmetricMatrix::symmetrized(cross * cross.transpose());
}

void require_family(const AdmissibleFamily& family) {
  if (family.pairs.empty()) throw Error(ErrorKind::BadArgument, "admissible family is empty");
}

// Random PSD matrix scaled to operator norm 1, so jitter is a plain Loewner step.
SymmetricMatrix unit_psd(detail::Rng& rng, std::size_t n) {
  const SymmetricMatrix g = detail::random_psd(rng, n, 1.0);
  const double norm = lambda_max(g);
  return norm > 0.0 ? (1.0 / norm) * g : g;
}

}  // namespace

TestFunction TestFunction::quadratic(double alpha, std::size_t dim) {
  TestFunction tf;
  tf.alpha = alpha;
  tf.dim = dim;
  tf.x_hat.assign(dim, 0.0);
  if (dim > 0) tf.x_hat[0] = 1.0;
  tf.y_hat.assign(dim, 0.0);
  tf.validate();
  return tf;
}

void TestFunction::validate() const {
  if (family != "quadratic") throw Error(ErrorKind::BadParams, "unknown test function family '" + family + "'");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::BadParams, "alpha must be a finite value > 0");
  if (dim < 1 || dim > kMaxDim / 2) throw Error(ErrorKind::BadParams, "test function needs 1 <= N <= 8");
  if (x_hat.size() != dim || y_hat.size() != dim) throw Error(ErrorKind::DimMismatch, "anchor points must have N entries");
}

std::vector<double> TestFunction::p() const {
  std::vector<double> g(dim);
  for (std::size_t i = 0; i < dim; ++i) g[i] = alpha * (x_hat[i] - y_hat[i]);
  return g;
}

std::vector<double> TestFunction::q() const { return p(); }

JetPoint TestFunction::jet_x() const { return JetPoint{x_hat, u_value, p()}; }

JetPoint TestFunction::jet_y() const { return JetPoint{y_hat, v_value, q()}; }

BlockMatrix2N hessian_blocks(const TestFunction& tf) {
  tf.validate();
  const auto e = SymmetricMatrix::scalar(tf.dim, tf.alpha);
  Matrix b(tf.dim, tf.dim);
  for (std::size_t i = 0; i < tf.dim; ++i) b(i, i) = -tf.alpha;
  return block_compose(e, b, e);
}

EpsilonSchedule EpsilonSchedule::geometric(double eps0, double ratio, std::size_t terms) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::BadParams, "schedule ratio must lie in (0, 1)");
  EpsilonSchedule s;
  s.eps0 = eps0;
  double v = eps0;
  for (std::size_t i = 0; i < terms; ++i) s.values.push_back(v *= ratio);
  s.validate();
  return s;
}

void EpsilonSchedule::validate() const {
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw Error(ErrorKind::BadParams, "eps0 must be a finite value > 0");
  if (values.empty()) throw Error(ErrorKind::BadParams, "schedule is empty");
  double prev = eps0;
  for (double v : values) {
    if (!(v > 0.0 && v < prev)) throw Error(ErrorKind::BadParams, "schedule must decrease strictly inside (0, eps0)");
    prev = v;
  }
}

AdmissibleFamily generate_admissible(const BlockMatrix2N& a, const EpsilonSchedule& sched, double slack,
                                     std::uint64_t seed, double jitter) {
  sched.validate();
  if (!(slack >= 0.0) || !std::isfinite(slack)) throw Error(ErrorKind::BadParams, "slack must be a finite value >= 0");
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw Error(ErrorKind::BadParams, "jitter must be a finite value >= 0");
  const SymmetricMatrix full = a.assemble();
  const SymmetricMatrix full_sq = full.square();
  const std::size_t n = a.half_dim();

  AdmissibleFamily family{a, sched, {}};
  family.pairs.reserve(sched.values.size());
  for (std::size_t i = 0; i < sched.values.size(); ++i) {
    const double eps = sched.values[i];
    const BlockMatrix2N w = block_extract(full + eps * full_sq);
    const double c = sigma_max(w.B) + slack;
    SymmetricMatrix x = w.E - SymmetricMatrix::scalar(n, c);
    SymmetricMatrix neg_y = w.D - SymmetricMatrix::scalar(n, c);
    if (jitter > 0.0) {
      detail::Rng rng = detail::trial_rng(seed, kJitterStream, i);
      x = x - (eps * jitter) * unit_psd(rng, n);
      neg_y = neg_y - (eps * jitter) * unit_psd(rng, n);
    }
    SymmetricMatrix y = -neg_y;
    if (eq1_margins(a, eps, x, y).lower < -kSumsTol) {
      throw Error(ErrorKind::SlackTooLarge, "lower block bound fails at eps = " + format_double(eps) +
                                                " (slack " + format_double(slack) + ")");
    }
    family.pairs.push_back({eps, std::move(x), std::move(y)});
  }
  return family;
}

Eq1Margins eq1_margins(const BlockMatrix2N& a, double eps, const SymmetricMatrix& x, const SymmetricMatrix& y) {
  const std::size_t n = a.half_dim();
  if (x.dim() != n || y.dim() != n) throw Error(ErrorKind::DimMismatch, "X, Y must be N x N with A of size 2N");
  if (!(eps > 0.0)) throw Error(ErrorKind::BadArgument, "eps must be > 0");
  const SymmetricMatrix full = a.assemble();
  const SymmetricMatrix d = block_diag(x, -y);
  const double floor = 1.0 / eps + operator_norm(full);
  return {lambda_min(d + SymmetricMatrix::scalar(2 * n, floor)), loewner_margin(d, full + eps * full.square())};
}

bool verify_eq1(const BlockMatrix2N& a, double eps, const SymmetricMatrix& x, const SymmetricMatrix& y) {
  const Eq1Margins m = eq1_margins(a, eps, x, y);
  return m.lower >= -kSumsTol && m.upper >= -kSumsTol;
}

CheckResult lemma_upper_bound(const BlockMatrix2N& a, double eps0, const AdmissibleFamily& family) {
  require_family(family);
  for (const auto& pr : family.pairs) {
    if (!(pr.eps > 0.0 && pr.eps < eps0)) throw Error(ErrorKind::BadArgument, "schedule must lie in (0, eps0)");
  }
  const SymmetricMatrix e_tilde = squared_block(a.E, a.B);
  const SymmetricMatrix d_tilde = squared_block(a.D, a.B.transpose());
  const BlockMatrix2N sq = block_extract(a.assemble().square());
  const double identity_gap = std::max((sq.E - e_tilde).max_abs(), (sq.D - d_tilde).max_abs());
  const double identity_tol = 1e-12 * (1.0 + a.assemble().max_abs() * a.assemble().max_abs() * a.half_dim());
  if (identity_gap > identity_tol) {
    Certificate c;
    c.kind = "lemma_block_identity";
    c.witnesses = {{"A", to_json(a.assemble())}};
    c.lhs = identity_gap;
    c.rhs = identity_tol;
    c.margin = identity_gap - identity_tol;
    c.relation = "diagonal blocks of A^2 equal (E^2 + B B^T, D^2 + B^T B)";
    return c;
  }
  const SymmetricMatrix bound_x = a.E + eps0 * e_tilde;
  const SymmetricMatrix bound_neg_y = a.D + eps0 * d_tilde;
  for (std::size_t i = 0; i < family.pairs.size(); ++i) {
    const auto& pr = family.pairs[i];
    const SymmetricMatrix neg_y = -pr.Y;
    for (const auto& [side, m, bound] : {std::tuple{"X", &pr.X, &bound_x}, std::tuple{"-Y", &neg_y, &bound_neg_y}}) {
      const double margin = loewner_margin(*m, *bound);
      if (margin >= -kSumsTol) continue;
      Certificate c;
      c.kind = "lemma_upper_bound";
      c.witnesses = {{"side", side}, {"eps", pr.eps}, {"eps0", eps0}, {"matrix", to_json(*m)}, {"bound", to_json(*bound)}};
      c.lhs = lambda_max(*m - *bound);
      c.rhs = 0.0;
      c.margin = -margin;
      c.relation = std::string(side) + " <= bound";
      c.trial = i;
      return c;
    }
  }
  return PassReport{"lemma_upper_bound",
                    family.pairs.size(),
                    0,
                    {{"eps0", eps0},
                     {"block_identity_gap", identity_gap},
                     {"bound_X", to_json(bound_x)},
                     {"bound_negY", to_json(bound_neg_y)}}};
}

LimitPair extract_limit(const AdmissibleFamily& family, double tol) {
  require_family(family);
  if (!(tol > 0.0)) throw Error(ErrorKind::BadArgument, "tol must be > 0");
  const std::size_t n = family.pairs.size();
  const std::size_t start = n > kLimitTail ? n - kLimitTail : 0;
  const auto& last = family.pairs.back();
  double osc = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    osc = std::max({osc, (family.pairs[i].X - last.X).max_abs(), (family.pairs[i].Y - last.Y).max_abs()});
  }
  if (!(osc <= tol)) {
    throw Error(ErrorKind::NonConvergent,
                "schedule tail oscillates by " + format_double(osc) + " > tol " + format_double(tol));
  }
  return {last.X, last.Y, osc};
}

BoundReport verify_conclusion(const OperatorDescriptor& op, const ClassMWitness& g1, const ClassMWitness& g2,
                              const JetPoint& wx, const JetPoint& wy, const AdmissibleFamily& family,
                              const LimitPair& limits) {
  require_family(family);
  const BlockMatrix2N& a = family.A;
  const double eps0 = family.schedule.eps0;
  const SymmetricMatrix full = a.assemble();

  const double upper_margin = loewner_margin(block_diag(limits.X, -limits.Y), full);
  BoundReport report = theorem_lower_bounds(g1, g2, a.E, a.D);
  report.upper_block_ok = upper_margin >= -kSumsTol;

  const SymmetricMatrix m_x = a.E + eps0 * squared_block(a.E, a.B);
  const SymmetricMatrix m_y = a.D + eps0 * squared_block(a.D, a.B.transpose());
  const double inv_x = g1.inv_at_zero(m_x);
  const double inv_y = g2.inv_at_zero(m_y);

  nlohmann::json rows = nlohmann::json::array();
  bool all_ok = true;
  for (const auto& pr : family.pairs) {
    if (!op.in_domain(wx, pr.X)) {
      throw Error(ErrorKind::OutOfDomain, op.name() + ": (x_hat, u, p, X_eps) outside the domain at eps = " +
                                              format_double(pr.eps));
    }
    if (!op.in_domain(wy, pr.Y)) {
      throw Error(ErrorKind::OutOfDomain, op.name() + ": (y_hat, v, q, Y_eps) outside the domain at eps = " +
                                              format_double(pr.eps));
    }
    const double fx = op.evaluate(wx, pr.X);
    const double fy = op.evaluate(wy, pr.Y);
    const double l1 = lambda_min(pr.X);
    const double ln = lambda_max(pr.Y);
    const bool applies_x = fx <= 0.0;
    const bool applies_y = fy >= 0.0;
    const bool ok_x = !applies_x || l1 >= inv_x - kSumsTol;
    const bool ok_y = !applies_y || ln <= inv_y + kSumsTol;
    all_ok = all_ok && ok_x && ok_y;
    rows.push_back({{"eps", pr.eps},
                    {"F_X", fx},
                    {"F_Y", fy},
                    {"lambda_1_X", l1},
                    {"lambda_N_Y", ln},
                    {"applies_X", applies_x},
                    {"applies_Y", applies_y},
                    {"ok_X", ok_x},
                    {"ok_Y", ok_y}});
  }

  const double l1_limit = lambda_min(limits.X);
  const double neg_y_limit = lambda_min(-limits.Y);
  report.details["route"] = "theorem";
  report.details["upper_block_checked"] = true;
  report.details["upper_block_margin"] = upper_margin;
  report.details["eps0"] = eps0;
  report.details["inv_g1_at_E_plus_eps0_Etilde"] = inv_x;
  report.details["inv_g2_at_D_plus_eps0_Dtilde"] = inv_y;
  report.details["implications"] = rows;
  report.details["implications_ok"] = all_ok;
  report.details["lambda_1_X"] = l1_limit;
  report.details["lambda_1_negY"] = neg_y_limit;
  report.details["limit_X_ok"] = l1_limit >= report.lower_X - kSumsTol;
  report.details["limit_negY_ok"] = neg_y_limit >= report.lower_negY - kSumsTol;
  return report;
}

BoundReport verify_conclusion(const OperatorDescriptor& op, const ClassMWitness& g1, const ClassMWitness& g2,
                              const TestFunction& tf, const AdmissibleFamily& family, const LimitPair& limits) {
  tf.validate();
  return verify_conclusion(op, g1, g2, tf.jet_x(), tf.jet_y(), family, limits);
}

}  // namespace elliptic
