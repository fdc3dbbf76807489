#include "ekpme/ek_quadrature.hpp"

#include <cmath>
#include <string>

#include "ekpme/error.hpp"
#include "ekpme/special_functions.hpp"

namespace ekpme {

namespace {

void check_row_index(int n, int N) {
  if (N < 1) throw IndexError("weight row requires N >= 1, got N=" + std::to_string(N));
  if (n < 0 || n > N) {
    throw IndexError("row index n=" + std::to_string(n) + " outside 0.." + std::to_string(N));
  }
}

void trim_zeros(std::vector<double>& w) {
  while (w.size() > 1 && w.back() == 0.0) w.pop_back();
}

// ln(k/n) for k >= n >= 1 without losing digits when k is close to n.
double log_ratio(int k, int n) { return std::log1p(static_cast<double>(k - n) / n); }

// Untrimmed rectangle row for n >= 1, alpha < 1: entries i = n..N.
std::vector<double> rectangle_row(int n, int N, double alpha, double B) {
  const double g2 = gamma(2.0 - alpha);
  const double p = 1.0 - alpha;
  const double inv_b = 1.0 / B;
  std::vector<double> w(static_cast<std::size_t>(N - n + 1), 0.0);
  if (n == N) return w;

  // i = n+1: the lower bracket is 0^{1-α} = 0.
  double one_minus_prev = -std::expm1(-inv_b * log_ratio(n + 1, n));
  w[1] = std::exp(p * std::log(one_minus_prev)) / g2;
  for (int i = n + 2; i <= N; ++i) {
    const double s_i = std::exp(-inv_b * log_ratio(i, n));
    if (s_i == 0.0) break;
    const double gap = s_i * std::expm1(-inv_b * std::log1p(-1.0 / i));  // s_{i-1} - s_i
    const double growth = std::log1p(gap / one_minus_prev);
    w[static_cast<std::size_t>(i - n)] =
        std::exp(p * std::log(one_minus_prev)) * std::expm1(p * growth) / g2;
    one_minus_prev = -std::expm1(-inv_b * log_ratio(i, n));
  }
  return w;
}

}  // namespace

const char* rule_name(Rule rule) noexcept {
  return rule == Rule::Rectangle ? "rect" : "trap";
}

Grid Grid::from_front(double eta_star, int N) {
  if (!(eta_star > 0.0) || !std::isfinite(eta_star)) {
    throw DomainError("grid: eta_star must be positive and finite");
  }
  if (N < 2) throw DomainError("grid: N must be at least 2");
  return Grid{eta_star / N, N};
}

Grid Grid::from_spacing(double h, int N) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid: h must be positive and finite");
  if (N < 2) throw DomainError("grid: N must be at least 2");
  return Grid{h, N};
}

EKParams EKParams::standard(double alpha, Rule rule) {
  EKParams p{alpha, 1.0 - alpha, alpha / 2.0, rule};
  p.validate();
  return p;
}

void EKParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0,1]");
  if (!(B > 0.0) || !std::isfinite(B)) throw DomainError("B must be positive");
  if (!std::isfinite(A)) throw DomainError("A must be finite");
  if (rule == Rule::Trapezoid) {
    if (alpha >= 1.0) throw DomainError("trapezoid rule requires alpha < 1");
    if (B >= 1.0) throw DomainError("trapezoid rule requires B < 1");
  }
}

int optimal_truncation(double h, double B, Rule rule) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("optimal_truncation: h must lie in (0,1)");
  if (!(B > 0.0)) throw DomainError("optimal_truncation: B must be positive");
  const double exponent = rule == Rule::Rectangle ? B : 2.0 * B;
  return static_cast<int>(std::floor(std::pow(h, -exponent))) + 1;
}

double EKWeightRow::operator()(int i) const {
  if (i < n || i > N) {
    throw IndexError("weight index i=" + std::to_string(i) + " outside " + std::to_string(n) +
                     ".." + std::to_string(N));
  }
  const auto k = static_cast<std::size_t>(i - n);
  return k < weights.size() ? weights[k] : 0.0;
}

double EKWeightRow::sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

EKWeightRow rectangle_weights(int n, int N, const EKParams& params) {
  check_row_index(n, N);
  params.validate();
  EKWeightRow row{n, N, params.alpha, {}};
  if (n == 0) {
    row.weights = {1.0 / gamma(2.0 - params.alpha)};
    return row;
  }
  if (params.alpha == 1.0) {
    // Limiting rule: F̂ picks the right neighbour.
    row.weights = n < N ? std::vector<double>{0.0, 1.0} : std::vector<double>{0.0};
    return row;
  }
  row.weights = rectangle_row(n, N, params.alpha, params.B);
  trim_zeros(row.weights);
  return row;
}

EKWeightRow trapezoid_weights(int n, int N, const EKParams& params) {
  check_row_index(n, N);
  EKParams p = params;
  p.rule = Rule::Trapezoid;
  p.validate();
  const double alpha = p.alpha;
  EKWeightRow row{n, N, alpha, {}};
  if (n == 0) {
    row.weights = {1.0 / gamma(2.0 - alpha)};
    return row;
  }
  if (n == N) {
    row.weights = {0.0};
    return row;
  }

  const std::vector<double> rect = rectangle_row(n, N, alpha, p.B);
  const auto ar = [&](int i) { return rect[static_cast<std::size_t>(i - n)]; };
  const double g1 = gamma(1.0 - alpha);
  const double a = 1.0 - p.B;
  const double b = 1.0 - alpha;
  const SpecialFnConfig beta_config{1e-15, 1000};

  // d_k for k = n..N-1: the linear-interpolation correction on [η_k, η_{k+1}].
  std::vector<double> d(static_cast<std::size_t>(N - n), 0.0);
  double s_hi = 1.0;
  for (int k = n; k < N; ++k) {
    const double s_lo = std::exp(-log_ratio(k + 1, n) / p.B);
    const double increment = incomplete_beta_increment(s_lo, s_hi, a, b, beta_config);
    d[static_cast<std::size_t>(k - n)] = n / g1 * increment - k * ar(k + 1);
    s_hi = s_lo;
  }
  const auto dk = [&](int k) { return d[static_cast<std::size_t>(k - n)]; };

  row.weights.assign(static_cast<std::size_t>(N - n + 1), 0.0);
  row.weights[0] = ar(n + 1) - dk(n);
  for (int i = n + 1; i <= N - 1; ++i) {
    row.weights[static_cast<std::size_t>(i - n)] = dk(i - 1) - dk(i) + ar(i + 1);
  }
  row.weights.back() = dk(N - 1);
  trim_zeros(row.weights);
  return row;
}

EKWeightRow ek_weights(int n, int N, const EKParams& params) {
  return params.rule == Rule::Rectangle ? rectangle_weights(n, N, params)
                                        : trapezoid_weights(n, N, params);
}

double apply_ek(std::span<const double> samples, const EKWeightRow& row) {
  const auto expected = static_cast<std::size_t>(row.N - row.n + 1);
  if (samples.size() != expected) {
    throw LengthError("apply_ek: expected " + std::to_string(expected) + " samples, got " +
                      std::to_string(samples.size()));
  }
  if (row.n == 0) return samples[0] / gamma(2.0 - row.alpha);
  double s = 0.0;
  for (std::size_t k = 0; k < row.weights.size(); ++k) s += row.weights[k] * samples[k];
  return s;
}

AnalyticTestPair analytic_test_pair(double mu, double alpha) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("analytic pair: mu must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("analytic pair: alpha must lie in (0,1)");
  const double a = 1.0 - alpha * mu / 2.0;
  if (!(a > 0.0)) throw DomainError("analytic pair: requires alpha*mu/2 < 1");
  const double b = 1.0 - alpha;
  const double g1 = gamma(b);
  const double g2 = gamma(2.0 - alpha);

  AnalyticTestPair pair;
  pair.mu = mu;
  pair.alpha = alpha;
  pair.U = [mu](double eta) {
    if (!(eta >= 0.0)) throw DomainError("analytic pair: eta must be non-negative");
    return eta >= 1.0 ? 1.0 : std::pow(eta, mu);
  };
  pair.F = [mu, alpha, a, b, g1, g2](double eta) {
    if (!(eta >= 0.0)) throw DomainError("analytic pair: eta must be non-negative");
    if (eta >= 1.0) return 1.0 / g2;
    if (eta == 0.0) return 0.0;
    const double z = std::pow(eta, 2.0 / alpha);
    const double saturated = -std::expm1(b * std::log1p(-z)) / g2;
    // ∫_z^1 t^{a-1}(1-t)^{b-1} dt, taken from the reflected lower tail.
    const double upper = incomplete_beta(1.0 - z, b, a, SpecialFnConfig{1e-15, 1000});
    return saturated + std::pow(eta, mu) * upper / g1;
  };
  return pair;
}

}  // namespace ekpme
