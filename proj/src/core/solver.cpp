#include "ekpme/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <string>

#include "ekpme/error.hpp"
#include "ekpme/special_functions.hpp"

namespace ekpme {

namespace {

void check_kernel_index(int n, int N, double h) {
  if (N < 1 || n < 0 || n > N) {
    throw IndexError("kernel row index n=" + std::to_string(n) + " outside 0.." +
                     std::to_string(N));
  }
  if (!(h > 0.0)) throw DomainError("kernel weights: h must be positive");
}

// b^{(r)}_{jn} for j > n.
double rect_kernel(int j, int n, double h, double A, double B) {
  return 0.5 * h * h * ((A + 2.0 * B) * (2.0 * j - 1.0) - 2.0 * (A + B) * n);
}

// ∫_{η_j}^{η_{j+1}} G(η_n, z) (z - η_j)/h dz.
double trap_correction(int j, int n, double h, double A, double B) {
  return h * h / 6.0 * ((A + 2.0 * B) * (3.0 * j + 2.0) - 3.0 * (A + B) * n);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

}  // namespace

SolverConfig SolverConfig::standard(double alpha, int N, Rule rule) {
  SolverConfig c;
  c.alpha = alpha;
  c.A = 1.0 - alpha;
  c.B = alpha / 2.0;
  c.N = N;
  c.rule = rule;
  return c;
}

void SolverConfig::validate() const {
  ek_params().validate();
  if (N < 4) throw DomainError("N must be at least 4");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw DomainError("tolerance must lie in (0,1)");
  if (max_iterations < 1) throw DomainError("max_iterations must be positive");
  if (!(scalar_tolerance > 0.0 && scalar_tolerance < 1e-3)) {
    throw DomainError("scalar_tolerance must lie in (0,1e-3)");
  }
  if (regularization) {
    if (!(regularization->C > 0.0)) throw DomainError("regularization C must be positive");
    if (!(regularization->delta > 0.0 && regularization->delta < 1.0)) {
      throw DomainError("regularization delta must lie in (0,1)");
    }
  }
}

// ---------------------------------------------------------------------------

double KernelWeightRow::operator()(int j) const {
  if (j < n || j > N) {
    throw IndexError("kernel index j=" + std::to_string(j) + " outside " + std::to_string(n) +
                     ".." + std::to_string(N));
  }
  return weights[static_cast<std::size_t>(j - n)];
}

KernelWeightRow kernel_weights_rect(int n, int N, double h, double A, double B) {
  check_kernel_index(n, N, h);
  KernelWeightRow row{n, N, std::vector<double>(static_cast<std::size_t>(N - n + 1), 0.0)};
  for (int j = n + 1; j <= N; ++j) row.weights[static_cast<std::size_t>(j - n)] = rect_kernel(j, n, h, A, B);
  return row;
}

KernelWeightRow kernel_weights_trap(int n, int N, double h, double A, double B) {
  check_kernel_index(n, N, h);
  KernelWeightRow row{n, N, std::vector<double>(static_cast<std::size_t>(N - n + 1), 0.0)};
  if (n == N) return row;
  const auto d = [&](int j) { return trap_correction(j, n, h, A, B); };
  row.weights[0] = rect_kernel(n + 1, n, h, A, B) - d(n);
  for (int j = n + 1; j <= N - 1; ++j) {
    row.weights[static_cast<std::size_t>(j - n)] = d(j - 1) - d(j) + rect_kernel(j + 1, n, h, A, B);
  }
  row.weights.back() = d(N - 1);
  return row;
}

KernelWeightRow kernel_weights(int n, int N, double h, double A, double B, Rule rule) {
  return rule == Rule::Rectangle ? kernel_weights_rect(n, N, h, A, B)
                                 : kernel_weights_trap(n, N, h, A, B);
}

// ---------------------------------------------------------------------------

SchemeWeights::SchemeWeights(int N, const EKParams& params) : N_(N), params_(params) {
  params_.validate();
  if (N < 2) throw DomainError("scheme weights: N must be at least 2");
  rows_.reserve(static_cast<std::size_t>(N + 1));
  for (int j = 0; j <= N; ++j) rows_.push_back(ek_weights(j, N, params_));
}

double SchemeWeights::weight(int i, int j) const {
  if (j < 0 || j > N_ || i < j || i > N_) return 0.0;
  if (params_.rule == Rule::Trapezoid || j == 0) return rows_[static_cast<std::size_t>(j)](i);
  // Near-node sampling: U_i carries the weight of the cell [η_i, η_{i+1}].
  if (i == N_) return 0.0;
  return rows_[static_cast<std::size_t>(j)](i + 1);
}

double SchemeWeights::ek_value(int j, std::span<const double> U) const {
  if (U.size() != static_cast<std::size_t>(N_ + 1)) {
    throw LengthError("ek_value: expected " + std::to_string(N_ + 1) + " profile values");
  }
  if (j < 0 || j > N_) throw IndexError("ek_value: column " + std::to_string(j) + " out of range");
  const EKWeightRow& row = rows_[static_cast<std::size_t>(j)];
  const std::size_t shift = (params_.rule == Rule::Rectangle && j > 0) ? 1 : 0;
  double s = 0.0;
  for (std::size_t k = shift; k < row.weights.size(); ++k) {
    s += row.weights[k] * U[static_cast<std::size_t>(j) + k - shift];
  }
  return s;
}

SchemeRhs scheme_rhs(int n, std::span<const double> U, const SchemeWeights& weights,
                     const KernelWeightRow& kernel, std::span<const double> cache) {
  const int N = weights.N();
  if (U.size() != static_cast<std::size_t>(N + 1)) {
    throw LengthError("scheme_rhs: expected " + std::to_string(N + 1) + " profile values");
  }
  if (n < 0 || n >= N || kernel.n != n || kernel.N != N) {
    throw IndexError("scheme_rhs: row " + std::to_string(n) + " does not match the weights");
  }
  if (!cache.empty() && cache.size() != U.size()) {
    throw LengthError("scheme_rhs: cache must hold one value per node");
  }

  SchemeRhs rhs;
  const double b_self = kernel(n);
  if (b_self != 0.0) {
    double partial = 0.0;
    for (int i = n + 1; i <= N; ++i) partial += weights.weight(i, n) * U[static_cast<std::size_t>(i)];
    rhs.known = b_self * partial;
    rhs.self_coefficient = b_self * weights.weight(n, n);
  }
  for (int j = n + 1; j <= N; ++j) {
    const double f = cache.empty() ? weights.ek_value(j, U) : cache[static_cast<std::size_t>(j)];
    rhs.known += kernel(j) * f;
  }
  return rhs;
}

// ---------------------------------------------------------------------------

double linear_root(const Diffusivity& model, double q, double rel_tolerance) {
  if (!(q > 0.0)) return 0.0;
  if (const auto* m = dynamic_cast<const DiffusivityModel*>(&model);
      m != nullptr && m->kind() == DiffusivityKind::PowerLaw) {
    return std::pow((m->exponent() + 1.0) * q, 1.0 / m->exponent());
  }
  return solve_scalar(model, q, 0.0, rel_tolerance);
}

double solve_scalar(const Diffusivity& model, double c, double r, double rel_tolerance) {
  if (!(c >= 0.0) || !(r >= 0.0)) {
    throw DomainError("solve_scalar: requires c >= 0 and r >= 0");
  }
  if (c == 0.0) return model.K_inverse(r);

  const auto g = [&](double x) { return model.K(x) - c * x - r; };

  double hi = 1.0;
  while (g(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e300) {
      if (r == 0.0) return 0.0;
      throw ConvergenceError("solve_scalar: no root below 1e300 for c=" + std::to_string(c) +
                             ", r=" + std::to_string(r));
    }
  }
  double lo = 0.0;
  if (r == 0.0) {
    // g(0) = 0; step down to where g turns negative so that the positive root is bracketed.
    lo = hi;
    while (g(lo) >= 0.0) {
      lo *= 0.5;
      if (lo < 1e-300) return 0.0;
    }
  }

  // Newton from the right: g is convex, so the iterates decrease monotonically to the root.
  double x = hi;
  for (int it = 0; it < 500; ++it) {
    const double gx = g(x);
    if (gx > 0.0) hi = x; else lo = x;
    if (gx == 0.0 || hi - lo <= rel_tolerance * hi) return x;
    const double slope = model.D(x) - c;
    double next = slope > 0.0 ? x - gx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 0.1 * rel_tolerance * x) return next;
    x = next;
  }
  throw ConvergenceError("solve_scalar: no convergence for c=" + std::to_string(c) +
                         ", r=" + std::to_string(r));
}

double terminal_value(double eta_star, const SolverConfig& config, const Diffusivity& model,
                      const SchemeWeights& weights) {
  const Grid grid = Grid::from_front(eta_star, config.N);
  const int N = config.N;
  double q = 0.0;
  if (config.rule == Rule::Rectangle) {
    q = weights.weight(N - 1, N - 1) * rect_kernel(N, N - 1, grid.h, config.A, config.B);
  } else {
    const KernelWeightRow b = kernel_weights_trap(N - 1, N, grid.h, config.A, config.B);
    q = weights.weight(N - 1, N - 1) * b(N - 1);
  }
  return linear_root(model, q, config.scalar_tolerance);
}

// ---------------------------------------------------------------------------

Profile step_profile(double eta_star, const SolverConfig& config, const DiffusivityModel& model) {
  config.validate();
  const SchemeWeights weights(config.N, config.ek_params());
  return step_profile(eta_star, config, model, weights);
}

Profile step_profile(double eta_star, const SolverConfig& config, const DiffusivityModel& model,
                     const SchemeWeights& weights) {
  config.validate();
  if (weights.N() != config.N || weights.params().rule != config.rule ||
      weights.params().alpha != config.alpha || weights.params().B != config.B) {
    throw DomainError("step_profile: scheme weights were built for a different configuration");
  }
  const Grid grid = Grid::from_front(eta_star, config.N);
  const int N = config.N;

  std::unique_ptr<RegularizedModel> regularized;
  const Diffusivity* active = &model;
  if (config.regularization) {
    regularized = std::make_unique<RegularizedModel>(
        regularize(model, grid.h, eta_star, config.regularization->C, config.regularization->delta));
    active = regularized.get();
  }

  Profile profile;
  profile.grid = grid;
  profile.values.assign(static_cast<std::size_t>(N + 1), 0.0);
  profile.rule = config.rule;
  profile.alpha = config.alpha;
  profile.B = config.B;
  profile.model = active->describe();

  std::vector<double>& U = profile.values;
  std::vector<double> F(static_cast<std::size_t>(N + 1), 0.0);

  // The seed always comes from the unregularized model: with a floor ε above
  // the corner coefficient the regularized seed equation has only the zero root.
  U[static_cast<std::size_t>(N - 1)] = terminal_value(eta_star, config, model, weights);
  if (U[static_cast<std::size_t>(N - 1)] == 0.0) {
    profile.degenerate = true;
    return profile;
  }
  F[static_cast<std::size_t>(N - 1)] = weights.ek_value(N - 1, U);

  for (int n = N - 2; n >= 0; --n) {
    const KernelWeightRow kernel = kernel_weights(n, N, grid.h, config.A, config.B, config.rule);
    const SchemeRhs rhs = scheme_rhs(n, U, weights, kernel, F);
    double known = rhs.known;
    if (known < 0.0) {
      known = 0.0;
      ++profile.clamped;
    }
    double value = 0.0;
    try {
      value = rhs.self_coefficient == 0.0
                  ? active->K_inverse(known)
                  : solve_scalar(*active, std::max(rhs.self_coefficient, 0.0), known,
                                 config.scalar_tolerance);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("step at n=" + std::to_string(n) + " (rhs=" + fmt(known) +
                             "): " + e.what());
    }
    U[static_cast<std::size_t>(n)] = value;
    F[static_cast<std::size_t>(n)] = weights.ek_value(n, U);
  }
  return profile;
}

// ---------------------------------------------------------------------------

ShootingOutcome shoot_front(double M, const SolverConfig& config, const DiffusivityModel& model) {
  if (!(M > 0.0) || !std::isfinite(M)) throw DomainError("mass M must be positive");
  config.validate();
  const SchemeWeights weights(config.N, config.ek_params());

  ShootingOutcome out;
  int evaluations = 0;
  Profile last;
  const auto excess = [&](double eta) {
    ++evaluations;
    last = step_profile(eta, config, model, weights);
    return last.values.front() - M;
  };
  const auto finish = [&](double eta, double fx) {
    out.eta_star = eta;
    out.profile = std::move(last);
    out.residual = std::fabs(fx);
    out.iterations = evaluations;
    return out;
  };

  // f(η*) = U_0(η*) increases with η*: grow or shrink geometrically from 1.
  double lo = 1.0, hi = 1.0;
  double f_lo = excess(1.0), f_hi = f_lo;
  if (std::fabs(f_lo) < config.tolerance) return finish(1.0, f_lo);
  for (int k = 0; f_hi < 0.0; ++k) {
    if (k == 200) {
      throw ConvergenceError("shooting: U_0 stays below M after 200 doublings of eta*");
    }
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = excess(hi);
    if (std::fabs(f_hi) < config.tolerance) return finish(hi, f_hi);
  }
  for (int k = 0; f_lo > 0.0; ++k) {
    if (k == 200) {
      throw ConvergenceError("shooting: U_0 stays above M after 200 halvings of eta*");
    }
    hi = lo;
    f_hi = f_lo;
    lo *= 0.5;
    f_lo = excess(lo);
    if (std::fabs(f_lo) < config.tolerance) return finish(lo, f_lo);
  }
  out.brackets.emplace_back(lo, hi);

  // Illinois false position with a bisection fallback.
  int side = 0;
  int since_bisection = 0;
  for (int it = 0; it < config.max_iterations; ++it) {
    double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (since_bisection >= 8 || !(x > lo && x < hi)) {
      x = 0.5 * (lo + hi);
      since_bisection = 0;
    } else {
      ++since_bisection;
    }
    const double fx = excess(x);
    if (std::fabs(fx) < config.tolerance) return finish(x, fx);
    if (fx < 0.0) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    out.brackets.emplace_back(lo, hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  throw ConvergenceError("shooting: no convergence to |U_0 - M| < " + fmt(config.tolerance) +
                         " within " + std::to_string(config.max_iterations) + " iterations");
}

double apriori_bound(double eta_star, const SolverConfig& config, const Diffusivity& model) {
  if (!(eta_star > 0.0)) throw DomainError("apriori_bound: eta_star must be positive");
  config.ek_params().validate();
  const double lambda = (config.A + 2.0 * config.B) * eta_star * eta_star / gamma(2.0 - config.alpha);
  const double x = linear_root(model, lambda, config.scalar_tolerance);
  // K(x) = λx without a positive root (e.g. bounded D with λ >= sup D): no finite bound.
  return x > 0.0 ? x : std::numeric_limits<double>::infinity();
}

double reconstruct_pde_solution(const Profile& profile, double x, double t) {
  if (!(t > 0.0)) throw DomainError("reconstruct: t must be positive");
  if (!(x >= 0.0)) throw DomainError("reconstruct: x must be non-negative");
  if (profile.values.size() < 2) throw LengthError("reconstruct: empty profile");
  if (x >= profile.front() * std::pow(t, profile.alpha / 2.0)) return 0.0;
  const double eta = x * std::pow(t, -profile.alpha / 2.0);
  const double pos = eta / profile.grid.h;
  const auto k = std::min(static_cast<std::size_t>(pos), profile.values.size() - 2);
  const double w = pos - static_cast<double>(k);
  return (1.0 - w) * profile.values[k] + w * profile.values[k + 1];
}

void write_profile_csv(std::ostream& out, const Profile& profile) {
  out << "eta,U\n";
  for (std::size_t n = 0; n < profile.values.size(); ++n) {
    out << fmt(profile.grid.node(static_cast<int>(n))) << ',' << fmt(profile.values[n]) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ShootingOutcome& outcome) {
  out << "eta_star,residual,iterations\n"
      << fmt(outcome.eta_star) << ',' << fmt(outcome.residual) << ',' << outcome.iterations << '\n';
}

}  // namespace ekpme
