#include <doctest.h>

#include <cmath>
#include <random>

#include "elliptic/error.hpp"
#include "elliptic/witnesses.hpp"
#include "support.hpp"

using namespace elliptic;

namespace {

JetPoint e1(std::size_t n) {
  std::vector<double> nu(n, 0.0);
  nu[0] = 1.0;
  return JetPoint::with_gradient(nu);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an elliptic::Error");
  return ErrorKind::ParseError;
}

struct Shipped {
  std::string label;
  OperatorDescriptor op;
  WitnessPair pair;
};

std::vector<Shipped> shipped_witnesses(std::size_t n) {
  std::vector<Shipped> out;
  std::vector<double> nu(n, 0.0);
  nu[0] = 0.8;
  if (n > 1) nu[1] = -0.6;
  const JetPoint w = JetPoint::with_gradient(nu);
  for (double p : {1.25, 1.5, 2.0, 3.0, 4.0, 10.0}) {
    out.push_back({"p_laplace", catalog::p_laplace(p), witness_p_laplace(p, w)});
  }
  for (const auto& h : {MonotoneFunction::identity(), MonotoneFunction::odd_root(3), MonotoneFunction::odd_root(5)}) {
    out.push_back({"eig_sum", catalog::eig_sum(h), witness_eig_sum(h)});
  }
  const auto lin = catalog::linear_uniform(1.0);
  out.push_back({"linear_uniform", lin, class_u_to_class_m(lin, ClassUWitness::constant(1.0, 0.0), w)});
  const auto sq = catalog::sqrt_gradient();
  out.push_back({"sqrt_gradient", sq, class_u_to_class_m(sq, ClassUWitness::constant(1.0, 0.0), w)});
  const auto ph = catalog::p_laplace_homog(3.0);
  out.push_back({"p_laplace_homog", ph, class_u_to_class_m(ph, ClassUWitness::constant(1.0, 0.0), w)});
  return out;
}

}  // namespace

TEST_CASE("class_u_to_class_m on the Laplacian") {
  const auto lap = catalog::laplacian();
  const auto pair = class_u_to_class_m(lap, ClassUWitness::constant(1.0, 0.0), JetPoint::origin(2));
  CHECK(pair.g1.inv_at_zero(SymmetricMatrix::identity(2)) == -1.0);
  CHECK(pair.g1.inv_at_zero(SymmetricMatrix(2)) == 0.0);
  const auto m = SymmetricMatrix::from_rows({{2.0, 1.0}, {1.0, -3.0}});
  CHECK(pair.g1.eval(pair.g1.inv_at_zero(m), m) == doctest::Approx(0.0).scale(1.0));
  CHECK(pair.g2.eval(pair.g2.inv_at_zero(m), m) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("the g2 embedding needs lambda_N(-M), not lambda_1(M)") {
  // N = 1, F = -x, lambda = 1, H = 0, M = -1, Y = 1 (so -Y <= M).
  const auto lap = catalog::laplacian();
  const auto pair = class_u_to_class_m(lap, ClassUWitness::constant(1.0, 0.0), JetPoint::origin(1));
  const auto m = SymmetricMatrix::diagonal({-1.0});
  const auto y = SymmetricMatrix::diagonal({1.0});
  const double minus_f = -lap.evaluate(JetPoint::origin(1), y);
  auto literal = [&](double t) { return t - lambda_min(m) - lap.evaluate(JetPoint::origin(1), -m); };
  CHECK(minus_f < literal(lambda_max(y)));
  CHECK(minus_f >= pair.g2.eval(lambda_max(y), m));
}

TEST_CASE("witness_p_laplace inverse formulas") {
  const auto w = e1(2);
  CHECK(witness_p_laplace(4.0, w).g1.inv_at_zero(SymmetricMatrix::identity(2)) == -3.0);
  CHECK(witness_p_laplace(1.5, w).g1.inv_at_zero(SymmetricMatrix::identity(2)) == -2.0);
  for (double p : {1.5, 4.0}) {
    const auto pair = witness_p_laplace(p, w);
    CHECK(pair.g1.inv_at_zero(SymmetricMatrix(2)) == 0.0);
    CHECK(pair.g2.inv_at_zero(SymmetricMatrix(2)) == 0.0);
  }
  std::mt19937_64 rng(3);
  for (double p : {1.25, 1.5, 3.0, 4.0, 10.0}) {
    for (std::size_t n = 2; n <= 4; ++n) {
      const auto pair = witness_p_laplace(p, e1(n));
      const double coef = p >= 2.0 ? n + p - 3.0 : (n - 1.0) / (p - 1.0);
      for (int i = 0; i < 20; ++i) {
        const auto m = random_sym(rng, n, 2.0);
        CHECK(pair.g1.inv_at_zero(m) == doctest::Approx(-coef * lambda_max(m)).epsilon(1e-12));
        CHECK(pair.g2.inv_at_zero(m) == doctest::Approx(coef * lambda_max(m)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("witness_p_laplace rejects p <= 1 and nu = 0") {
  CHECK(kind_of([] { witness_p_laplace(1.0, e1(2)); }) == ErrorKind::NotInClassM);
  CHECK(kind_of([] { witness_p_laplace(0.5, e1(2)); }) == ErrorKind::NotInClassM);
  CHECK(kind_of([] { witness_p_laplace(3.0, JetPoint::with_gradient({0.0, 0.0})); }) == ErrorKind::OutOfDomain);
}

TEST_CASE("witness_eig_sum") {
  const auto id = witness_eig_sum(MonotoneFunction::identity());
  CHECK(id.g1.inv_at_zero(SymmetricMatrix::identity(3)) == -2.0);
  const auto cube = witness_eig_sum(MonotoneFunction::odd_root(3));
  CHECK(cube.g1.inv_at_zero(SymmetricMatrix(3)) == 0.0);
  CHECK(cube.g2.inv_at_zero(SymmetricMatrix(3)) == 0.0);
  CHECK(kind_of([] { witness_eig_sum(MonotoneFunction::arctan()); }) == ErrorKind::NotInClassM);
  // inv_at_zero(g1, M) = H^{-1}(-sum_{j>=2} H(lambda_j(M)))
  const auto m = SymmetricMatrix::diagonal({-8.0, 1.0, 27.0});
  CHECK(cube.g1.inv_at_zero(m) == doctest::Approx(-std::pow(4.0, 3.0)));
}

TEST_CASE("the eig_sum g2 sums H over lambda_j(-M)") {
  // N = 2, H = identity, M = diag(-1, 5), Y = diag(1, -5): -Y <= M.
  const auto pair = witness_eig_sum(MonotoneFunction::identity());
  const auto m = SymmetricMatrix::diagonal({-1.0, 5.0});
  const auto y = SymmetricMatrix::diagonal({1.0, -5.0});
  const double minus_f = y.trace();
  const auto ev = eigenvalues(m);
  const double literal = lambda_max(y) + (-ev[0]);  // H(t) + sum_{j<N} H(-lambda_j(M))
  CHECK(minus_f < literal);
  CHECK(minus_f >= pair.g2.eval(lambda_max(y), m));
}

TEST_CASE("theorem_lower_bounds for the p-Laplacian") {
  for (std::size_t n = 2; n <= 4; ++n) {
    for (double alpha : {0.5, 1.0, 3.0}) {
      const auto e = SymmetricMatrix::scalar(n, alpha);
      for (double p : {3.0, 4.0, 10.0}) {
        const auto pair = witness_p_laplace(p, e1(n));
        CHECK(theorem_lower_bounds(pair.g1, pair.g2, e, e).lower_X == doctest::Approx(-(n + p - 3.0) * alpha));
      }
      for (double p : {1.25, 1.5}) {
        const auto pair = witness_p_laplace(p, e1(n));
        CHECK(theorem_lower_bounds(pair.g1, pair.g2, e, e).lower_X ==
              doctest::Approx(-((n - 1.0) / (p - 1.0)) * alpha));
      }
    }
  }
  const auto id = witness_eig_sum(MonotoneFunction::identity());
  const auto zero = theorem_lower_bounds(id.g1, id.g2, SymmetricMatrix(3), SymmetricMatrix(3));
  CHECK(zero.lower_X == 0.0);
  CHECK(zero.lower_negY == 0.0);
}

TEST_CASE("corollary_bounds closed forms") {
  const auto lap = catalog::laplacian();
  const auto u = ClassUWitness::constant(1.0, 0.0);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const auto e = SymmetricMatrix::scalar(2, alpha);
    const auto r = corollary_bounds(lap, u, JetPoint::origin(2), JetPoint::origin(2), e, e);
    CHECK(r.lower_X == -alpha);
    CHECK(r.lower_negY == -alpha);
  }
  const auto zero = corollary_bounds(lap, u, JetPoint::origin(2), JetPoint::origin(2), SymmetricMatrix(2), SymmetricMatrix(2));
  CHECK(zero.lower_X == 0.0);
  CHECK(zero.lower_negY == 0.0);

  // a = sigma + theta I: ((-tr(a E) + b.p + c u) / theta) + lambda_1(E)
  const double theta = 0.5;
  const auto sigma = SymmetricMatrix::from_rows({{1.0, 0.2}, {0.2, 0.5}});
  const std::vector<double> b{1.0, -2.0};
  const double c = 0.75;
  const auto op = catalog::linear_uniform(theta, sigma, b, c);
  const JetPoint wx{{0.0, 0.0}, 2.0, {0.3, 0.4}};
  const auto e = SymmetricMatrix::from_rows({{1.0, -1.0}, {-1.0, 3.0}});
  const auto a = sigma + SymmetricMatrix::scalar(2, theta);
  const double expect = (-trace_product(a, e) + (b[0] * 0.3 + b[1] * 0.4) + c * 2.0) / theta + lambda_min(e);
  CHECK(corollary_bounds(op, ClassUWitness::constant(theta, 0.0), wx, wx, e, e).lower_X == doctest::Approx(expect));
}

TEST_CASE("the corollary and the theorem route agree for Class U operators") {
  std::mt19937_64 rng(7);
  const std::vector<OperatorDescriptor> ops{catalog::laplacian(), catalog::linear_uniform(0.5, std::nullopt, {1.0, 2.0}, -1.0),
                                            catalog::sqrt_gradient(), catalog::eig_sum(MonotoneFunction::identity())};
  for (const auto& op : ops) {
    const auto u = known_class_u_witness(op);
    REQUIRE(u);
    for (int i = 0; i < 100; ++i) {
      const JetPoint wx{{0.0, 0.0}, 0.5, {0.3, -1.2}};
      const JetPoint wy{{1.0, 0.0}, -0.5, {0.7, 0.1}};
      const auto e = random_sym(rng, 2, 3.0);
      const auto d = random_sym(rng, 2, 3.0);
      const auto pair = class_u_to_class_m(op, *u, wx, wy);
      const auto thm = theorem_lower_bounds(pair.g1, pair.g2, e, d);
      const auto cor = corollary_bounds(op, *u, wx, wy, e, d);
      CHECK(std::abs(thm.lower_X - cor.lower_X) <= 1e-8);
      CHECK(std::abs(thm.lower_negY - cor.lower_negY) <= 1e-8);
    }
  }
}

TEST_CASE("lambda_1(M) = -lambda_N(-M)") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto m = random_sym(rng, 1 + i % 6, 5.0);
    CHECK(std::abs(lambda_min(m) + lambda_max(-m)) <= 1e-10);
  }
}

TEST_CASE("conditions 3 and 4 hold for every shipped witness") {
  std::mt19937_64 rng(13);
  for (std::size_t n = 2; n <= 4; ++n) {
    for (const auto& s : shipped_witnesses(n)) {
      const JetPoint wx = s.pair.g1.context().value_or(e1(n));
      const JetPoint wy = s.pair.g2.context().value_or(e1(n));
      for (int i = 0; i < 10000 / 12; ++i) {
        const auto m = random_sym(rng, n, 2.0);
        const auto x = m - random_psd(rng, n, 1.0);
        const auto y = -m + random_psd(rng, n, 1.0);
        CHECK_MESSAGE(-s.op.evaluate(wx, x) <= s.pair.g1.eval(lambda_min(x), m) + 1e-8, s.pair.g1.name());
        CHECK_MESSAGE(-s.op.evaluate(wy, y) >= s.pair.g2.eval(lambda_max(y), m) - 1e-8, s.pair.g2.name());
      }
    }
  }
}

TEST_CASE("shipped witnesses are increasing on a log grid") {
  std::mt19937_64 rng(14);
  std::vector<double> grid;
  for (int e = 6; e >= -6; --e) grid.push_back(-std::pow(10.0, e));
  grid.push_back(0.0);
  for (int e = -6; e <= 6; ++e) grid.push_back(std::pow(10.0, e));
  for (const auto& s : shipped_witnesses(3)) {
    for (const ClassMWitness* g : {&s.pair.g1, &s.pair.g2}) {
      const auto m = random_sym(rng, 3, 1.0);
      for (std::size_t i = 1; i < grid.size(); ++i) CHECK(g->eval(grid[i - 1], m) < g->eval(grid[i], m));
      CHECK(g->eval(-1e6, m) < 0.0);
      CHECK(g->eval(1e6, m) > 0.0);
      CHECK(std::abs(g->eval(g->inv_at_zero(m), m)) <= 1e-8);
    }
  }
}

TEST_CASE("bisection fallback") {
  const auto g = ClassMWitness::with_bisection(WitnessSide::G1, "cubic",
                                               [](double t, const SymmetricMatrix& m) { return t * t * t + m.trace(); });
  const auto m = SymmetricMatrix::diagonal({4.0, 4.0});
  CHECK(g.inv_at_zero(m) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(kind_of([] { bisect_zero([](double t) { return std::atan(t) + 5.0; }); }) == ErrorKind::NotInClassM);
  CHECK(bisect_zero([](double t) { return t - 0.25; }) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("witness domains") {
  const auto ph = catalog::p_laplace_homog(3.0);
  const auto pair = class_u_to_class_m(ph, ClassUWitness::constant(1.0, 0.0), JetPoint::with_gradient({0.0, 0.0}));
  CHECK_FALSE(pair.g1.in_domain(SymmetricMatrix::identity(2)));
  CHECK(kind_of([&] { pair.g1.inv_at_zero(SymmetricMatrix::identity(2)); }) == ErrorKind::OutOfDomain);
  CHECK(kind_of([] { ClassUWitness::constant(0.0, 0.0); }) == ErrorKind::BadParams);
}

TEST_CASE("known witnesses") {
  CHECK(known_class_u_witness(catalog::linear_uniform(2.5))->lambda() == 2.5);
  CHECK(known_class_u_witness(catalog::p_laplace(2.0)));
  CHECK_FALSE(known_class_u_witness(catalog::p_laplace(4.0)));
  CHECK(known_class_u_witness(catalog::p_laplace_homog(1.5))->lambda() == 0.5);
  CHECK_FALSE(known_class_u_witness(catalog::inf_laplace()));
  CHECK(known_class_m_witnesses(catalog::p_laplace(4.0), e1(2), e1(2)));
  CHECK_FALSE(known_class_m_witnesses(catalog::eig_sum(MonotoneFunction::arctan()), e1(2), e1(2)));
  CHECK_FALSE(known_class_m_witnesses(catalog::k_hessian(2, 3), e1(3), e1(3)));
}
