#pragma once

namespace ekpme {

/// Accuracy controls for the series / continued-fraction evaluations.
struct SpecialFnConfig {
  double rel_tolerance = 1e-12;
  int max_iterations = 500;

  /// Throws DomainError unless rel_tolerance is in (0, 1e-6] and max_iterations >= 50.
  void validate() const;
};

/// Euler gamma function for x > 0.
double gamma(double x);

/// Complete beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b), a, b > 0.
double complete_beta(double a, double b);

/// Non-regularized incomplete beta function β(z; a, b) = ∫₀^z t^{a-1}(1-t)^{b-1} dt.
///
/// Evaluated with the modified Lentz continued fraction; for z above a/(a+b)
/// the reflection β(z; a, b) = B(a, b) - β(1-z; b, a) is used so that the
/// fraction is always evaluated on the rapidly converging side.
double incomplete_beta(double z, double a, double b, const SpecialFnConfig& config = {});

/// β(z_hi; a, b) - β(z_lo; a, b) for 0 <= z_lo <= z_hi <= 1, without the
/// cancellation of B(a, b) when both points lie on the reflected side.
double incomplete_beta_increment(double z_lo, double z_hi, double a, double b,
                                 const SpecialFnConfig& config = {});

}  // namespace ekpme
