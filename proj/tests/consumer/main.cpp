// Links against an installed copy of the library and checks one closed form.

#include <cstdio>

#include <elliptic/elliptic.hpp>

int main() {
  elliptic::CounterexampleParams p;
  p.dim = 3;
  p.k = 2;
  p.n = 5;
  const auto cert = elliptic::counterexample("k_hessian", p);
  const double value = cert.details.at("value");
  std::printf("k_hessian N=3 k=2 n=5: %g\n", value);
  return value == 15.0 ? 0 : 1;
}
