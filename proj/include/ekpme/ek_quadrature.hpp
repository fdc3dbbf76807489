#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ekpme {

enum class Rule { Rectangle, Trapezoid };

const char* rule_name(Rule rule) noexcept;

/// Uniform grid η_n = n·h, n = 0..N.
struct Grid {
  double h = 0.0;
  int N = 0;

  /// h = η*/N, so that η_N equals η* exactly.
  static Grid from_front(double eta_star, int N);
  static Grid from_spacing(double h, int N);

  double node(int n) const { return n * h; }
  double eta_star() const { return N * h; }
};

/// Order α and the scaling constants of the self-similar equation.
struct EKParams {
  double alpha = 0.5;
  double A = 0.5;
  double B = 0.25;
  Rule rule = Rule::Rectangle;

  /// A = 1 - α, B = α/2.
  static EKParams standard(double alpha, Rule rule = Rule::Rectangle);

  /// Throws DomainError unless 0 < α <= 1 and B > 0; the trapezoid rule
  /// further needs α < 1 and B < 1.
  void validate() const;
};

/// Truncation multiplier γ: N = γ·n for a standalone evaluation at η_n.
int optimal_truncation(double h, double B, Rule rule);

/// Row n of a product-quadrature matrix: weights for nodes i = n..N.
/// Trailing entries that underflow to exact zero are dropped.
struct EKWeightRow {
  int n = 0;
  int N = 0;
  double alpha = 0.5;
  std::vector<double> weights;  // weights[i - n]

  double operator()(int i) const;
  double sum() const;
};

EKWeightRow rectangle_weights(int n, int N, const EKParams& params);
EKWeightRow trapezoid_weights(int n, int N, const EKParams& params);
EKWeightRow ek_weights(int n, int N, const EKParams& params);

/// Σ_i a_{in} U_i for samples of U at i = n..N. Throws LengthError on a size mismatch.
double apply_ek(std::span<const double> samples, const EKWeightRow& row);

/// U(η) = min(1, η^μ) together with its closed-form EK transform (B = α/2).
struct AnalyticTestPair {
  double mu = 0.0;
  double alpha = 0.0;
  std::function<double(double)> U;
  std::function<double(double)> F;
};

AnalyticTestPair analytic_test_pair(double mu, double alpha);

}  // namespace ekpme
