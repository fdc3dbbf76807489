#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ekpme/diffusivity.hpp"
#include "ekpme/ek_quadrature.hpp"

namespace ekpme {

struct RegularizationOptions {
  double C = 1.0;
  double delta = 0.5;
};

struct SolverConfig {
  double alpha = 0.5;
  double A = 0.5;
  double B = 0.25;
  int N = 256;
  Rule rule = Rule::Rectangle;
  double tolerance = 1e-8;  // on |U_0 - M|
  int max_iterations = 100;
  double scalar_tolerance = 1e-12;
  std::optional<RegularizationOptions> regularization;

  /// A = 1 - α, B = α/2.
  static SolverConfig standard(double alpha, int N, Rule rule = Rule::Rectangle);

  EKParams ek_params() const { return EKParams{alpha, A, B, rule}; }

  /// Throws DomainError with a message naming the offending field.
  void validate() const;
};

/// Outer-integral weights b_{jn}, j = n..N, against G(η_n, z) = (A+2B)z - (A+B)η_n.
struct KernelWeightRow {
  int n = 0;
  int N = 0;
  std::vector<double> weights;  // weights[j - n]

  double operator()(int j) const;
};

KernelWeightRow kernel_weights_rect(int n, int N, double h, double A, double B);
KernelWeightRow kernel_weights_trap(int n, int N, double h, double A, double B);
KernelWeightRow kernel_weights(int n, int N, double h, double A, double B, Rule rule);

/// EK weight columns used while stepping; they depend on N and α only, so
/// one set serves every η* tried by the shooting loop.
///
/// Rectangle: F̂_j = Σ_{i=j}^{N-1} a^{(r)}_{(i+1)j} U_i, each cell sampled at
/// its near node. Trapezoid: F̂_j = Σ_{i=j}^{N} a^{(t)}_{ij} U_i.
class SchemeWeights {
 public:
  SchemeWeights(int N, const EKParams& params);

  int N() const noexcept { return N_; }
  const EKParams& params() const noexcept { return params_; }

  /// Weight of U_i in F̂_j (0 outside the stencil).
  double weight(int i, int j) const;

  /// F̂_j from the current profile values; U must hold N+1 entries.
  double ek_value(int j, std::span<const double> U) const;

 private:
  int N_;
  EKParams params_;
  std::vector<EKWeightRow> rows_;
};

/// K(U_n) = known + self_coefficient · U_n.
struct SchemeRhs {
  double known = 0.0;
  double self_coefficient = 0.0;
};

/// Right-hand side of the step at node n from U_{n+1..N} (U holds N+1 entries;
/// U_n itself is not read). When `cache` is given it must hold F̂_j for j > n;
/// otherwise those values are recomputed from U.
SchemeRhs scheme_rhs(int n, std::span<const double> U, const SchemeWeights& weights,
                     const KernelWeightRow& kernel, std::span<const double> cache = {});

/// Largest non-negative root of K(x) - c·x - r for c >= 0, r >= 0.
/// Returns 0 when no positive root exists.
double solve_scalar(const Diffusivity& model, double c, double r, double rel_tolerance = 1e-12);

/// Positive root of K(x) = q·x (0 when q <= 0).
double linear_root(const Diffusivity& model, double q, double rel_tolerance = 1e-12);

/// Seed U_{N-1} for a front at η*.
double terminal_value(double eta_star, const SolverConfig& config, const Diffusivity& model,
                      const SchemeWeights& weights);

struct Profile {
  Grid grid;
  std::vector<double> values;  // U_0..U_N
  Rule rule = Rule::Rectangle;
  double alpha = 0.5;
  double B = 0.25;
  std::string model;
  int clamped = 0;           // negative right-hand sides reset to zero
  bool degenerate = false;   // the terminal seed had only the trivial root

  double front() const { return grid.eta_star(); }
};

Profile step_profile(double eta_star, const SolverConfig& config, const DiffusivityModel& model);
Profile step_profile(double eta_star, const SolverConfig& config, const DiffusivityModel& model,
                     const SchemeWeights& weights);

struct ShootingOutcome {
  double eta_star = 0.0;
  Profile profile;
  double residual = 0.0;
  int iterations = 0;
  std::vector<std::pair<double, double>> brackets;
};

/// Finds η* with |U_0(η*) - M| < tolerance. Throws ConvergenceError when the
/// bracket cannot be formed within 200 doublings or the iteration limit is hit.
ShootingOutcome shoot_front(double M, const SolverConfig& config, const DiffusivityModel& model);

/// x_λ with K(x_λ) = λ x_λ, λ = (A+2B)η*²/Γ(2-α): an upper bound for any profile.
/// +inf when that equation has no positive root.
double apriori_bound(double eta_star, const SolverConfig& config, const Diffusivity& model);

/// u(x, t) = U(x t^{-α/2}) by linear interpolation; zero beyond the front.
double reconstruct_pde_solution(const Profile& profile, double x, double t);

void write_profile_csv(std::ostream& out, const Profile& profile);
void write_summary_csv(std::ostream& out, const ShootingOutcome& outcome);

}  // namespace ekpme
