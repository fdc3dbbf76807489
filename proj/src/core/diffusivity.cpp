#include "ekpme/diffusivity.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <system_error>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ekpme/error.hpp"

namespace ekpme {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_nonnegative(double u, const char* what) {
  if (!(u >= 0.0)) {
    throw DomainError(std::string(what) + ": argument must be non-negative, got " +
                      std::to_string(u));
  }
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) return std::to_string(x);
  return std::string(buf.data(), end);
}

// u + e^{-u} - 1 without cancellation for small u.
double exponential_K(double u) {
  if (u < 0.5) {
    double term = u * u / 2.0;
    double sum = 0.0;
    for (int k = 3; std::fabs(term) > kEps * sum * 0.25 && k < 40; ++k) {
      sum += term;
      term *= -u / k;
    }
    return sum;
  }
  return u + std::expm1(-u);
}

template <class F>
double integrate(F&& f, double a, double b, double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(std::forward<F>(f), a, b, 20, rel_tol);
}

}  // namespace

double Diffusivity::K_inverse(double y) const {
  require_nonnegative(y, "K_inverse");
  if (y == 0.0) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  while (K(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) {
      throw ConvergenceError("K_inverse: no bracket below 1e300 for y=" + std::to_string(y));
    }
  }

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double f = K(x) - y;
    if (std::fabs(f) <= 4.0 * kEps * y) return x;
    if (f < 0.0) lo = x; else hi = x;
    if (hi - lo <= 2.0 * kEps * hi) return x;
    const double slope = D(x);
    double next = slope > 0.0 ? x - f / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  throw ConvergenceError("K_inverse: no convergence for y=" + std::to_string(y));
}

// ---------------------------------------------------------------------------

DiffusivityModel::DiffusivityModel(DiffusivityKind kind, double m,
                                   std::shared_ptr<const CustomDiffusivity> custom)
    : kind_(kind), m_(m), custom_(std::move(custom)) {}

DiffusivityModel DiffusivityModel::power_law(double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw DomainError("power law exponent m must be positive and finite");
  }
  return DiffusivityModel(DiffusivityKind::PowerLaw, m, nullptr);
}

DiffusivityModel DiffusivityModel::exponential() {
  return DiffusivityModel(DiffusivityKind::Exponential, 0.0, nullptr);
}

DiffusivityModel DiffusivityModel::custom(CustomDiffusivity spec) {
  if (!spec.D) throw DomainError("custom diffusivity requires D");
  if (std::fabs(spec.D(0.0)) > 1e-14) {
    throw DomainError("custom diffusivity must be degenerate: D(0) = 0");
  }
  double previous = 0.0;
  for (int k = 0; k <= 48; ++k) {
    const double u = std::pow(10.0, -6.0 + k / 6.0);
    const double d = spec.D(u);
    if (!(d > 0.0) || !(d > previous)) {
      throw DomainError("custom diffusivity must be positive and increasing; fails at u=" +
                        std::to_string(u));
    }
    if (spec.dD && !(spec.dD(u) > 0.0)) {
      throw DomainError("custom diffusivity derivative must be positive; fails at u=" +
                        std::to_string(u));
    }
    previous = d;
  }
  return DiffusivityModel(DiffusivityKind::Custom, 0.0,
                          std::make_shared<const CustomDiffusivity>(std::move(spec)));
}

double DiffusivityModel::D(double u) const {
  require_nonnegative(u, "D");
  switch (kind_) {
    case DiffusivityKind::PowerLaw: return std::pow(u, m_);
    case DiffusivityKind::Exponential: return -std::expm1(-u);
    case DiffusivityKind::Custom: return custom_->D(u);
  }
  return 0.0;
}

double DiffusivityModel::dD(double u) const {
  require_nonnegative(u, "dD");
  switch (kind_) {
    case DiffusivityKind::PowerLaw:
      if (u == 0.0) {
        if (m_ < 1.0) return std::numeric_limits<double>::infinity();
        return m_ == 1.0 ? 1.0 : 0.0;
      }
      return m_ * std::pow(u, m_ - 1.0);
    case DiffusivityKind::Exponential: return std::exp(-u);
    case DiffusivityKind::Custom: {
      if (custom_->dD) return custom_->dD(u);
      const double step = std::cbrt(kEps) * std::max(1.0, u);
      if (u < step) return (custom_->D(u + step) - custom_->D(u)) / step;
      return (custom_->D(u + step) - custom_->D(u - step)) / (2.0 * step);
    }
  }
  return 0.0;
}

double DiffusivityModel::K(double u) const {
  require_nonnegative(u, "K");
  switch (kind_) {
    case DiffusivityKind::PowerLaw: return std::pow(u, m_ + 1.0) / (m_ + 1.0);
    case DiffusivityKind::Exponential: return exponential_K(u);
    case DiffusivityKind::Custom:
      if (custom_->K) return custom_->K(u);
      if (u == 0.0) return 0.0;
      return integrate([this](double s) { return custom_->D(s); }, 0.0, u, 1e-10);
  }
  return 0.0;
}

double DiffusivityModel::K_inverse(double y) const {
  require_nonnegative(y, "K_inverse");
  if (kind_ == DiffusivityKind::PowerLaw) {
    return std::pow((m_ + 1.0) * y, 1.0 / (m_ + 1.0));
  }
  if (kind_ == DiffusivityKind::Custom && custom_->K_inverse) return custom_->K_inverse(y);
  return Diffusivity::K_inverse(y);
}

std::string DiffusivityModel::describe() const {
  switch (kind_) {
    case DiffusivityKind::PowerLaw: return "D(u) = u^" + format_double(m_);
    case DiffusivityKind::Exponential: return "D(u) = 1 - exp(-u)";
    case DiffusivityKind::Custom: return "D(u) = " + custom_->name;
  }
  return {};
}

std::string DiffusivityModel::spec() const {
  switch (kind_) {
    case DiffusivityKind::PowerLaw: return "power:m=" + format_double(m_);
    case DiffusivityKind::Exponential: return "exp";
    case DiffusivityKind::Custom: return custom_->name;
  }
  return {};
}

// ---------------------------------------------------------------------------

RegularizedModel::RegularizedModel(DiffusivityModel base, double epsilon)
    : base_(std::move(base)), epsilon_(epsilon), crossover_(0.0) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("regularization floor must be positive and finite");
  }
  // D is increasing, so {D < ε} = [0, u_ε).
  double lo = 0.0;
  double hi = 1.0;
  while (base_.D(hi) < epsilon_) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) {
      crossover_ = std::numeric_limits<double>::infinity();
      return;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 2.0 * kEps * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (base_.D(mid) < epsilon_) lo = mid; else hi = mid;
  }
  crossover_ = hi;
}

double RegularizedModel::D(double u) const {
  require_nonnegative(u, "D");
  return std::max(base_.D(u), epsilon_);
}

double RegularizedModel::dD(double u) const {
  require_nonnegative(u, "dD");
  return u < crossover_ ? 0.0 : base_.dD(u);
}

double RegularizedModel::K(double u) const {
  require_nonnegative(u, "K");
  if (u <= crossover_) return epsilon_ * u;
  return epsilon_ * crossover_ + base_.K(u) - base_.K(crossover_);
}

double RegularizedModel::K_inverse(double y) const {
  require_nonnegative(y, "K_inverse");
  const double knee = epsilon_ * crossover_;
  if (y <= knee) return y / epsilon_;
  return base_.K_inverse(y - knee + base_.K(crossover_));
}

std::string RegularizedModel::describe() const {
  return "max(" + base_.describe() + ", " + format_double(epsilon_) + ")";
}

// ---------------------------------------------------------------------------

Admissibility check_admissible(const Diffusivity& model) {
  // Decade increments Δ_k = ∫_{10^{-k-1}}^{10^{-k}} D(s)/s ds, k = 2..9,
  // integrated in t = ln s where the integrand D(e^t) is smooth.
  const auto decade = [&model](int k) {
    const double a = -(k + 1) * std::log(10.0);
    const double b = -k * std::log(10.0);
    return integrate([&model](double t) { return model.D(std::exp(t)); }, a, b, 1e-12);
  };
  double head = 0.0;  // ∫_{10^{-2}}^{1}
  head += integrate([&model](double t) { return model.D(std::exp(t)); }, -2.0 * std::log(10.0),
                    0.0, 1e-12);

  std::array<double, 8> increments{};
  for (int k = 2; k <= 9; ++k) increments[k - 2] = decade(k);

  Admissibility result;
  double first_ratio = 0.0;
  double last_ratio = 0.0;
  for (std::size_t i = 0; i + 1 < increments.size(); ++i) {
    if (!(increments[i] > 0.0)) {
      result.value = std::numeric_limits<double>::quiet_NaN();
      return result;
    }
    const double r = increments[i + 1] / increments[i];
    if (!(r < 1.0 - 1e-3)) {
      result.value = std::numeric_limits<double>::quiet_NaN();
      return result;
    }
    if (i == 0) first_ratio = r;
    last_ratio = r;
  }
  // Ratios creeping towards one signal a logarithmically divergent tail.
  if (last_ratio > first_ratio + 0.05) {
    result.value = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  double total = head;
  for (double d : increments) total += d;
  total += increments.back() * last_ratio / (1.0 - last_ratio);
  result.admissible = true;
  result.value = total;
  return result;
}

double regularization_floor(double h, double eta_star, double C, double delta) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("regularization requires 0 < h < 1");
  if (!(eta_star > 0.0)) throw DomainError("regularization requires eta_star > 0");
  if (!(C > 0.0)) throw DomainError("regularization requires C > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("regularization requires 0 < delta < 1");
  return C * eta_star / (delta * std::log(1.0 / h));
}

RegularizedModel regularize(const DiffusivityModel& model, double h, double eta_star, double C,
                            double delta) {
  return RegularizedModel(model, regularization_floor(h, eta_star, C, delta));
}

// ---------------------------------------------------------------------------

DiffusivityModel parse_diffusivity(std::string_view spec) {
  if (spec.empty()) throw ParseError("empty diffusivity specification", 0);
  if (spec == "exp") return DiffusivityModel::exponential();

  constexpr std::string_view kPower = "power:";
  constexpr std::string_view kExponent = "m=";
  if (spec.substr(0, kPower.size()) != kPower) {
    if (spec.substr(0, 3) == "exp") {
      throw ParseError("unexpected trailing input after 'exp'", 3);
    }
    throw ParseError("unknown diffusivity kind; expected 'power:m=<float>' or 'exp'", 0);
  }
  std::size_t pos = kPower.size();
  if (spec.substr(pos, kExponent.size()) != kExponent) {
    throw ParseError("expected 'm=' after 'power:'", pos);
  }
  pos += kExponent.size();
  if (pos == spec.size()) throw ParseError("missing exponent value", pos);

  double m = 0.0;
  const char* first = spec.data() + pos;
  const char* last = spec.data() + spec.size();
  auto [end, ec] = std::from_chars(first, last, m);
  if (ec != std::errc{} || end == first) throw ParseError("invalid exponent value", pos);
  if (end != last) {
    throw ParseError("unexpected trailing input", static_cast<std::size_t>(end - spec.data()));
  }
  if (!(m > 0.0) || !std::isfinite(m)) throw ParseError("exponent m must be positive", pos);
  return DiffusivityModel::power_law(m);
}

}  // namespace ekpme
