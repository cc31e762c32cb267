#pragma once

// Theorem-of-sums harness on the quadratic doubling test function. Every
// Loewner check here runs at tolerance kSumsTol.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "elliptic/falsify.hpp"
#include "elliptic/operators.hpp"
#include "elliptic/symmat.hpp"
#include "elliptic/witnesses.hpp"

namespace elliptic {

/// Tolerance for every Loewner check in the harness.
inline constexpr double kSumsTol = 1e-8;
/// Number of trailing schedule terms used by the Cauchy test.
inline constexpr std::size_t kLimitTail = 10;

/// z(x, y) = (alpha / 2) |x - y|^2 anchored at (x_hat, y_hat).
struct TestFunction {
  std::string family{"quadratic"};
  double alpha{1.0};
  std::size_t dim{2};
  std::vector<double> x_hat;
  std::vector<double> y_hat;
  double u_value{0.0};
  double v_value{0.0};

  /// Anchors default to x_hat = e_1, y_hat = 0, so p = q = alpha e_1.
  static TestFunction quadratic(double alpha, std::size_t dim);

  void validate() const;
  /// p = D_x z(x_hat, y_hat) = alpha (x_hat - y_hat).
  std::vector<double> p() const;
  /// q = -D_y z(x_hat, y_hat) = alpha (x_hat - y_hat).
  std::vector<double> q() const;
  JetPoint jet_x() const;
  JetPoint jet_y() const;
};

/// (E, B, D) = (alpha I, -alpha I, alpha I).
BlockMatrix2N hessian_blocks(const TestFunction& tf);

struct EpsilonSchedule {
  double eps0{1.0};
  std::vector<double> values;

  /// eps0 * ratio^(i + 1) for i = 0 .. terms - 1.
  static EpsilonSchedule geometric(double eps0 = 1.0, double ratio = 0.5, std::size_t terms = 40);
  void validate() const;
};

struct AdmissiblePair {
  double eps;
  SymmetricMatrix X;
  SymmetricMatrix Y;
};

struct AdmissibleFamily {
  BlockMatrix2N A;
  EpsilonSchedule schedule;
  std::vector<AdmissiblePair> pairs;
};

/// For each eps: W = A + eps A^2, c = sigma_max(W_12) + slack,
/// X = W_11 - c I, -Y = W_22 - c I. A positive `jitter` additionally
/// subtracts eps * jitter * G (G a seeded PSD matrix of unit norm) from both
/// diagonal blocks.
/// SlackTooLarge when a pair violates the lower half of the block inequality.
AdmissibleFamily generate_admissible(const BlockMatrix2N& a, const EpsilonSchedule& sched, double slack = 0.0,
                                     std::uint64_t seed = 0, double jitter = 0.0);

struct Eq1Margins {
  double lower;  // lambda_1(diag(X, -Y) + (1/eps + |A|) I)
  double upper;  // lambda_1(A + eps A^2 - diag(X, -Y))
};

Eq1Margins eq1_margins(const BlockMatrix2N& a, double eps, const SymmetricMatrix& x, const SymmetricMatrix& y);

/// -(1/eps + |A|) I <= diag(X, -Y) <= A + eps A^2, both at tolerance 1e-8.
bool verify_eq1(const BlockMatrix2N& a, double eps, const SymmetricMatrix& x, const SymmetricMatrix& y);

/// Checks X_eps <= E + eps0 (E^2 + B B^T) and -Y_eps <= D + eps0 (D^2 + B^T B)
/// for every pair, after confirming those are the diagonal blocks of A^2.
CheckResult lemma_upper_bound(const BlockMatrix2N& a, double eps0, const AdmissibleFamily& family);

struct LimitPair {
  SymmetricMatrix X;
  SymmetricMatrix Y;
  double oscillation{0.0};
};

/// Last term of the family once the trailing terms agree entrywise within
/// tol; NonConvergent otherwise.
LimitPair extract_limit(const AdmissibleFamily& family, double tol = 1e-6);

/// Checks diag(X, -Y) <= A and the witness lower bounds at (E, D), then the
/// per-eps implications
///   F(wx, X_eps) <= 0  =>  lambda_1(X_eps) >= g1(-, E + eps0 E~)^{-1}(0) - 1e-8
///   F(wy, Y_eps) >= 0  =>  lambda_N(Y_eps) <= g2(-, D + eps0 D~)^{-1}(0) + 1e-8.
/// OutOfDomain when (wx, X_eps) or (wy, Y_eps) leaves the operator's domain.
BoundReport verify_conclusion(const OperatorDescriptor& op, const ClassMWitness& g1, const ClassMWitness& g2,
                              const JetPoint& wx, const JetPoint& wy, const AdmissibleFamily& family,
                              const LimitPair& limits);
BoundReport verify_conclusion(const OperatorDescriptor& op, const ClassMWitness& g1, const ClassMWitness& g2,
                              const TestFunction& tf, const AdmissibleFamily& family, const LimitPair& limits);

}  // namespace elliptic
