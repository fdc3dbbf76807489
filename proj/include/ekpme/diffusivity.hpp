#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace ekpme {

/// What the η-stepping scheme needs from a diffusivity: D, its derivative,
/// the integral K(u) = ∫₀^u D(s) ds and the inverse of K.
///
/// All methods throw DomainError for negative arguments.
class Diffusivity {
 public:
  virtual ~Diffusivity() = default;

  virtual double D(double u) const = 0;
  virtual double dD(double u) const = 0;
  virtual double K(double u) const = 0;

  /// Solves K(u) = y. The default implementation grows a bracket
  /// geometrically from [0, 1] and polishes with safeguarded Newton steps so
  /// that |K(u) - y| <= 1e-12 max(1, y).
  virtual double K_inverse(double y) const;

  virtual std::string describe() const = 0;
};

enum class DiffusivityKind { PowerLaw, Exponential, Custom };

/// User supplied diffusivity. Only `D` is required; missing pieces fall back
/// to finite differences (dD), adaptive quadrature (K) and root finding (K⁻¹).
struct CustomDiffusivity {
  std::function<double(double)> D;
  std::function<double(double)> dD;
  std::function<double(double)> K;
  std::function<double(double)> K_inverse;
  std::string name = "custom";
};

/// Immutable diffusivity model: D(u) = u^m, D(u) = 1 - e^{-u}, or custom.
class DiffusivityModel final : public Diffusivity {
 public:
  static DiffusivityModel power_law(double m);
  static DiffusivityModel exponential();
  /// Spot-checks D(0) = 0 and D, D' > 0 on a positive sample grid.
  static DiffusivityModel custom(CustomDiffusivity spec);

  DiffusivityKind kind() const noexcept { return kind_; }
  /// Exponent m of a power law (0 for the other kinds).
  double exponent() const noexcept { return m_; }

  double D(double u) const override;
  double dD(double u) const override;
  double K(double u) const override;
  double K_inverse(double y) const override;
  std::string describe() const override;

  /// Canonical specification string (`power:m=<float>`, `exp`, or the custom name).
  std::string spec() const;

 private:
  DiffusivityModel(DiffusivityKind kind, double m, std::shared_ptr<const CustomDiffusivity> custom);

  DiffusivityKind kind_;
  double m_ = 0.0;
  std::shared_ptr<const CustomDiffusivity> custom_;
};

/// D_h(u) = max(D(u), ε): a diffusivity bounded below by the floor ε.
class RegularizedModel final : public Diffusivity {
 public:
  RegularizedModel(DiffusivityModel base, double epsilon);

  const DiffusivityModel& base() const noexcept { return base_; }
  double epsilon() const noexcept { return epsilon_; }
  /// The state u_ε with D(u_ε) = ε; below it D_h is the constant floor.
  double crossover() const noexcept { return crossover_; }

  double D(double u) const override;
  double dD(double u) const override;
  double K(double u) const override;
  double K_inverse(double y) const override;
  std::string describe() const override;

 private:
  DiffusivityModel base_;
  double epsilon_;
  double crossover_;
};

struct Admissibility {
  bool admissible = false;
  /// Estimate of ∫₀¹ D(s)/s ds when admissible, NaN otherwise.
  double value = 0.0;
};

/// Tests finiteness of ∫₀¹ D(s)/s ds, the condition for a compactly supported
/// profile. ∫_δ¹ is evaluated at δ = 10⁻², ..., 10⁻¹⁰ and the decade
/// increments must shrink geometrically.
Admissibility check_admissible(const Diffusivity& model);

/// Regularization floor ε(h) = C η* / (δ ln(1/h)). Requires 0 < h < 1.
double regularization_floor(double h, double eta_star, double C, double delta);

RegularizedModel regularize(const DiffusivityModel& model, double h, double eta_star,
                            double C = 1.0, double delta = 0.5);

/// Parses `power:m=<float>` or `exp`. Throws ParseError carrying the offending position.
DiffusivityModel parse_diffusivity(std::string_view spec);

}  // namespace ekpme
