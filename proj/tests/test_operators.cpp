#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "elliptic/error.hpp"
#include "elliptic/operators.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace elliptic;

namespace {

JetPoint grad(std::vector<double> nu) { return JetPoint::with_gradient(std::move(nu)); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an elliptic::Error");
  return ErrorKind::ParseError;
}

// -|nu|^(p-2) [tr X + (p-2) <X nu, nu> / |nu|^2] evaluated entrywise.
double p_laplace_oracle(double p, const std::vector<double>& nu, const oracle::Dense& x) {
  double n2 = 0.0;
  for (double a : nu) n2 += a * a;
  double tr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) tr += x[i][i];
  return -std::pow(std::sqrt(n2), p - 2.0) * (tr + (p - 2.0) * oracle::quadratic_form(x, nu) / n2);
}

}  // namespace

TEST_CASE("p_laplace(2) is minus the trace") {
  std::mt19937_64 rng(1);
  const auto op = catalog::p_laplace(2.0);
  for (int i = 0; i < 50; ++i) {
    const auto x = random_sym(rng, 3, 2.0);
    CHECK(op.evaluate(grad({0.3, -2.0, 0.1}), x) == doctest::Approx(-x.trace()).epsilon(1e-14));
  }
}

TEST_CASE("p_laplace matches the entrywise formula") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double p : {1.0, 1.25, 1.5, 3.0, 4.0, 10.0}) {
    const auto op = catalog::p_laplace(p);
    for (int i = 0; i < 50; ++i) {
      const auto x = random_sym(rng, 3, 2.0);
      const std::vector<double> nu{u(rng), u(rng), u(rng)};
      const double expect = p_laplace_oracle(p, nu, to_dense(x));
      CHECK(op.evaluate(grad(nu), x) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK(catalog::p_laplace(4.0).evaluate(grad({1.0, 0.0}), SymmetricMatrix::diagonal({2.0, 1.0})) == -7.0);
}

TEST_CASE("p_laplace difference along a rank-one gap") {
  for (double p : {1.5, 3.0, 4.0}) {
    for (double c : {0.5, 2.0}) {
      const double l = 7.0;
      const auto op = catalog::p_laplace(p);
      const double diff = op.evaluate(grad({c, 0.0}), SymmetricMatrix(2)) -
                          op.evaluate(grad({c, 0.0}), SymmetricMatrix::diagonal({0.0, l}));
      CHECK(diff == doctest::Approx(std::pow(c, p - 2.0) * l).epsilon(1e-14));
    }
  }
}

TEST_CASE("p_laplace(1) stays at -(N-1) along diag(1, ..., 1, c)") {
  for (std::size_t n = 2; n <= 5; ++n) {
    std::vector<double> nu(n, 0.0);
    nu.back() = 1.0;
    for (double c : {0.0, -1.0, -1e3, -1e6}) {
      std::vector<double> d(n, 1.0);
      d.back() = c;
      CHECK(catalog::p_laplace(1.0).evaluate(grad(nu), SymmetricMatrix::diagonal(d)) == -static_cast<double>(n - 1));
    }
  }
}

TEST_CASE("gradient-dependent operators refuse nu = 0") {
  const auto x = SymmetricMatrix::identity(2);
  for (const auto& op : {catalog::p_laplace(3.0), catalog::p_laplace(1.5), catalog::p_laplace_homog(3.0),
                         catalog::inf_laplace_homog()}) {
    CHECK_FALSE(op.in_domain(grad({0.0, 0.0}), x));
    CHECK_FALSE(op.in_domain(grad({1e-13, 0.0}), x));
    CHECK(kind_of([&] { op.evaluate(grad({0.0, 0.0}), x); }) == ErrorKind::OutOfDomain);
  }
  CHECK(catalog::inf_laplace().evaluate(grad({0.0, 0.0}), x) == 0.0);
  CHECK(catalog::sqrt_gradient().evaluate(grad({0.0, 0.0}), x) == -2.0);
}

TEST_CASE("inf_laplace along diag(1, 0, ..., 0, c)") {
  for (std::size_t n = 2; n <= 5; ++n) {
    std::vector<double> nu(n, 0.0);
    nu[0] = 1.0;
    for (double c : {0.0, -1.0, -1e3, -1e6}) {
      std::vector<double> d(n, 0.0);
      d[0] = 1.0;
      d.back() = c;
      CHECK(catalog::inf_laplace().evaluate(grad(nu), SymmetricMatrix::diagonal(d)) == -1.0);
    }
  }
}

TEST_CASE("inf_laplace_homog is invariant under gradient scaling") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto op = catalog::inf_laplace_homog();
  for (int i = 0; i < 200; ++i) {
    const auto x = random_sym(rng, 3, 2.0);
    std::vector<double> nu{u(rng), u(rng), u(rng)};
    const double base = op.evaluate(grad(nu), x);
    for (double s : {-7.0, -0.01, 0.5, 1e3}) {
      std::vector<double> scaled = nu;
      for (double& a : scaled) a *= s;
      CHECK(std::abs(op.evaluate(grad(scaled), x) - base) <= 1e-10 * (1.0 + std::abs(base)));
    }
  }
}

TEST_CASE("k_hessian equals the principal-minor sum on its domain") {
  std::mt19937_64 rng(6);
  for (std::size_t n = 2; n <= 5; ++n) {
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      const auto op = catalog::k_hessian(k, n);
      int evaluated = 0;
      for (int i = 0; i < 40; ++i) {
        const auto x = random_sym(rng, n, 1.0) + SymmetricMatrix::scalar(n, static_cast<double>(i % 4));
        if (!op.in_domain(JetPoint::origin(n), x)) continue;
        ++evaluated;
        const double expect = -oracle::principal_minor_sum(to_dense(x), k);
        CHECK(op.evaluate(JetPoint::origin(n), x) == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
      }
      CHECK(evaluated > 0);
    }
  }
  CHECK(catalog::k_hessian(3, 3).evaluate(JetPoint::origin(3), SymmetricMatrix::diagonal({1.0, 2.0, 3.0})) == -6.0);
}

TEST_CASE("k_hessian refuses diag(-n, -n, 1) while S_2 of its spectrum is n^2 - 2n") {
  const auto op = catalog::k_hessian(2, 3);
  for (std::int64_t n = 3; n <= 50; ++n) {
    const double dn = static_cast<double>(n);
    const auto x = SymmetricMatrix::diagonal({-dn, -dn, 1.0});
    CHECK_FALSE(op.in_domain(JetPoint::origin(3), x));
    CHECK(kind_of([&] { op.evaluate(JetPoint::origin(3), x); }) == ErrorKind::OutOfDomain);
    CHECK(elementary_symmetric(2, eigenvalues(x)) == static_cast<double>(n * n - 2 * n));
    CHECK(oracle::elementary_symmetric_int({-n, -n, 1}, 2) == n * n - 2 * n);
  }
}

TEST_CASE("eig_sum instances") {
  const auto cube = catalog::eig_sum(MonotoneFunction::odd_root(3));
  CHECK(cube.evaluate(JetPoint::origin(2), SymmetricMatrix::diagonal({-8.0, 27.0})) == doctest::Approx(-1.0).epsilon(1e-15));
  const auto ident = catalog::eig_sum(MonotoneFunction::identity());
  CHECK(ident.evaluate(JetPoint::origin(2), SymmetricMatrix::from_rows({{1.0, 4.0}, {4.0, -3.0}})) ==
        doctest::Approx(2.0));
  const auto at = catalog::eig_sum(MonotoneFunction::arctan());
  CHECK(at.evaluate(JetPoint::origin(2), SymmetricMatrix::diagonal({1.0, -1.0})) == doctest::Approx(0.0));
  CHECK(at.evaluate(JetPoint::origin(2), SymmetricMatrix::diagonal({1.0, 1.0})) ==
        doctest::Approx(-std::numbers::pi / 2.0));
}

TEST_CASE("monotone functions") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (const auto& h : {MonotoneFunction::identity(), MonotoneFunction::odd_root(3), MonotoneFunction::odd_root(5),
                        MonotoneFunction::arctan()}) {
    for (int i = 0; i < 500; ++i) {
      double a = u(rng), b = u(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      CHECK(h.forward(a) < h.forward(b));
      if (h.bijective()) CHECK(std::abs(h.inverse(h.forward(a)) - a) <= 1e-9 * (1.0 + std::abs(a)));
    }
  }
  CHECK(MonotoneFunction::odd_root(5).forward(-32.0) == doctest::Approx(-2.0));
  CHECK_FALSE(MonotoneFunction::arctan().bijective());
  CHECK(kind_of([] { MonotoneFunction::odd_root(4); }) == ErrorKind::BadParams);
  CHECK(kind_of([] { MonotoneFunction::odd_root(1); }) == ErrorKind::BadParams);
}

TEST_CASE("spectral operators are orthogonally invariant") {
  std::mt19937_64 rng(9);
  const std::vector<OperatorDescriptor> ops{catalog::k_hessian(1, 4), catalog::k_hessian(2, 4),
                                            catalog::eig_sum(MonotoneFunction::identity()),
                                            catalog::eig_sum(MonotoneFunction::odd_root(3)),
                                            catalog::eig_sum(MonotoneFunction::arctan())};
  for (const auto& op : ops) {
    for (int i = 0; i < 100; ++i) {
      const auto x = random_sym(rng, 4, 1.0) + SymmetricMatrix::scalar(4, 3.0);
      const auto y = random_orthogonal_conjugate(rng, x);
      if (!op.in_domain(JetPoint::origin(4), x) || !op.in_domain(JetPoint::origin(4), y)) continue;
      CHECK(std::abs(op.evaluate(JetPoint::origin(4), x) - op.evaluate(JetPoint::origin(4), y)) <= 1e-8);
    }
  }
}

TEST_CASE("operators are continuous in the matrix slot") {
  std::mt19937_64 rng(10);
  const std::vector<OperatorDescriptor> ops{catalog::p_laplace(3.0), catalog::p_laplace(1.5), catalog::inf_laplace(),
                                            catalog::eig_sum(MonotoneFunction::odd_root(3)), catalog::sqrt_gradient()};
  for (const auto& op : ops) {
    for (int i = 0; i < 50; ++i) {
      const auto x = random_sym(rng, 3, 1.0);
      const auto dir = random_sym(rng, 3, 1.0);
      const JetPoint w = grad({0.5, -1.0, 0.25});
      double prev = INFINITY;
      for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double change = std::abs(op.evaluate(w, x + delta * dir) - op.evaluate(w, x));
        CHECK(change <= prev + 1e-12);
        prev = change;
      }
      CHECK(prev <= 1e-5);
    }
  }
}

TEST_CASE("linear_uniform with constant and callback coefficients") {
  const auto sigma = SymmetricMatrix::from_rows({{1.0, 0.5}, {0.5, 1.0}});
  const auto op = catalog::linear_uniform(2.0, sigma, {1.0, -1.0}, 3.0);
  const JetPoint w{{0.0, 0.0}, 2.0, {4.0, 1.0}};
  const auto x = SymmetricMatrix::from_rows({{1.0, 2.0}, {2.0, -1.0}});
  // -tr((sigma + 2I) X) + b.nu + c r
  CHECK(op.evaluate(w, x) == doctest::Approx(-(3.0 * 1.0 + 2 * 0.5 * 2.0 + 3.0 * -1.0) + 3.0 + 6.0));

  catalog::LinearCoefficients coeffs;
  coeffs.sigma = [](std::span<const double> xs) { return SymmetricMatrix::scalar(2, xs[0] * xs[0]); };
  const auto var = catalog::linear_uniform(1.0, coeffs);
  CHECK(var.evaluate(JetPoint{{3.0, 0.0}, 0.0, {0.0, 0.0}}, SymmetricMatrix::identity(2)) == -20.0);

  catalog::LinearCoefficients bad;
  bad.sigma = [](std::span<const double>) { return SymmetricMatrix::diagonal({1.0, -1.0}); };
  const auto broken = catalog::linear_uniform(1.0, bad);
  CHECK(kind_of([&] { broken.evaluate(JetPoint::origin(2), SymmetricMatrix::identity(2)); }) == ErrorKind::BadParams);
}

TEST_CASE("invalid parameters") {
  CHECK(kind_of([] { catalog::p_laplace(0.5); }) == ErrorKind::BadParams);
  CHECK(kind_of([] { catalog::p_laplace_homog(0.99); }) == ErrorKind::BadParams);
  CHECK(kind_of([] { catalog::linear_uniform(0.0); }) == ErrorKind::BadParams);
  CHECK(kind_of([] { catalog::linear_uniform(1.0, SymmetricMatrix::diagonal({1.0, -1.0})); }) == ErrorKind::BadParams);
  CHECK(kind_of([] { catalog::k_hessian(0, 3); }) == ErrorKind::BadParams);
  CHECK(kind_of([] { catalog::k_hessian(4, 3); }) == ErrorKind::BadParams);
}

TEST_CASE("dimension mismatch between jet and matrix") {
  CHECK(kind_of([] { catalog::p_laplace(3.0).evaluate(grad({1.0, 0.0, 0.0}), SymmetricMatrix::identity(2)); }) ==
        ErrorKind::DimMismatch);
}

TEST_CASE("make_operator parses every catalog family") {
  const std::vector<std::string> specs{
      R"({"family":"linear_uniform","theta":1})",
      R"({"family":"linear_uniform","theta":0.5,"sigma":{"dim":2,"rows":[[1,0],[0,2]]},"b":[1,2],"c":-1})",
      R"({"family":"p_laplace","p":4})",
      R"({"family":"p_laplace_homog","p":1.5})",
      R"({"family":"inf_laplace"})",
      R"({"family":"inf_laplace_homog"})",
      R"({"family":"k_hessian","k":2})",
      R"({"family":"eig_sum","H":"identity"})",
      R"({"family":"eig_sum","H":"odd_root","d":3})",
      R"({"family":"eig_sum","H":"arctan"})",
      R"({"family":"sqrt_gradient"})"};
  for (const auto& s : specs) {
    const auto op = catalog::make_operator(nlohmann::json::parse(s), 2);
    const auto again = catalog::make_operator(op.params(), 2);
    CHECK(again.params() == op.params());
    const auto x = SymmetricMatrix::from_rows({{2.0, 0.5}, {0.5, 1.0}});
    CHECK(op.evaluate(grad({1.0, 1.0}), x) == again.evaluate(grad({1.0, 1.0}), x));
  }
  for (const char* bad : {R"({"family":"nope"})", R"({"family":"p_laplace"})", R"({"family":"p_laplace","p":4,"q":1})",
                          R"({"family":"eig_sum","H":"odd_root","d":4})", R"([1,2])"}) {
    CHECK(kind_of([&] { catalog::make_operator(nlohmann::json::parse(bad), 2); }) == ErrorKind::BadParams);
  }
  CHECK(catalog::families().size() >= 8);
}
