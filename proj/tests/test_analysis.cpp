#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "ekpme/analysis.hpp"
#include "ekpme/error.hpp"
#include "ekpme/special_functions.hpp"

using ekpme::DiffusivityModel;
using ekpme::Rule;

namespace {

std::vector<double> fig_spacings() {
  std::vector<double> h;
  for (int k = 4; k <= 9; ++k) h.push_back(std::ldexp(1.0, -k));
  return h;
}

}  // namespace

TEST_CASE("aitken order examples") {
  CHECK(ekpme::aitken_order(1.0, 1.5, 1.75) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ekpme::aitken_order(1.0, 1.75, 1.9375) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(ekpme::aitken_order(1.0, 1.0, 1.5), ekpme::DomainError);
  CHECK_THROWS_AS(ekpme::aitken_order(1.0, 1.5, 1.5), ekpme::DomainError);
}

TEST_CASE("property: exact first-order sequences give order one") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> limit(-5.0, 5.0), coef(0.1, 10.0);
  std::uniform_int_distribution<int> base(10, 2000);
  for (int trial = 0; trial < 200; ++trial) {
    const double L = limit(rng), c = (trial % 2 ? 1.0 : -1.0) * coef(rng);
    const int N = base(rng);
    const auto v = [&](int n) { return L + c / n; };
    CHECK(ekpme::aitken_order(v(N), v(2 * N), v(4 * N)) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("log-log slope") {
  std::vector<ekpme::ErrorPoint> pts;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) pts.push_back({h, 3.0 * h * h});
  CHECK(ekpme::loglog_slope(pts).value() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(ekpme::loglog_slope(std::span(pts).first(1)).has_value());
  CHECK_FALSE(ekpme::loglog_slope({}).has_value());
  pts[2].error = 0.0;
  CHECK_THROWS_AS(ekpme::loglog_slope(pts), ekpme::DomainError);
  const std::vector<ekpme::ErrorPoint> same = {{0.1, 1.0}, {0.1, 2.0}};
  CHECK_THROWS_AS(ekpme::loglog_slope(same), ekpme::DomainError);
}

TEST_CASE("error curve on a single spacing has no slope") {
  const std::vector<double> h = {0.0625};
  const auto curve = ekpme::ek_error_curve(0.5, 2.0, h, Rule::Rectangle);
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].error > 0.0);
  CHECK_FALSE(curve.slope.has_value());
}

TEST_CASE("rectangle error points respect the quadrature bound") {
  const auto curve = ekpme::ek_error_curve(0.5, 2.0, fig_spacings(), Rule::Rectangle);
  for (const auto& p : curve.points) {
    CHECK(p.error < 1.05 * (1.0 + 2.0) * p.h / ekpme::gamma(1.5));
  }
}

TEST_CASE("property: error curve slopes") {
  const auto h = fig_spacings();
  for (double alpha : {0.25, 0.5, 0.75}) {
    for (Rule rule : {Rule::Rectangle, Rule::Trapezoid}) {
      const auto curve = ekpme::ek_error_curve(alpha, 2.0, h, rule);
      for (std::size_t k = 0; k < curve.points.size(); ++k) {
        CHECK(curve.points[k].error > 0.0);
        if (k > 0) CHECK(curve.points[k].h < curve.points[k - 1].h);
      }
      REQUIRE(curve.slope.has_value());
      const double target = rule == Rule::Rectangle ? 1.0 : 2.0;
      const double band = rule == Rule::Rectangle ? 0.15 : 0.2;
      INFO("alpha=" << alpha << " rule=" << std::string(ekpme::rule_name(rule)) << " slope=" << *curve.slope);
      CHECK(std::fabs(*curve.slope - target) <= band);
    }
  }
}

TEST_CASE("front errors decrease in the classical limit") {
  const std::vector<int> N = {10, 50, 100, 200, 500, 1000};
  const auto table = ekpme::front_error_table(N, 1.0, DiffusivityModel::power_law(1), 1.0, std::nullopt, 4);
  CHECK(table.extrapolated);
  REQUIRE(table.rows.size() == N.size());
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    CHECK(table.rows[k].error <= table.rows[k - 1].error);
  }
  const std::vector<int> one = {20};
  const auto given = ekpme::front_error_table(one, 1.0, DiffusivityModel::power_law(1), 1.0, 1.6);
  CHECK_FALSE(given.extrapolated);
  CHECK(given.reference == 1.6);
  CHECK(given.rows[0].error == doctest::Approx(std::fabs(given.rows[0].eta_star - 1.6)));
  CHECK_THROWS_AS(ekpme::front_error_table({}, 1.0, DiffusivityModel::power_law(1), 1.0), ekpme::DomainError);
}

TEST_CASE("order sweep is independent of the thread count") {
  const std::vector<double> alphas = {0.3, 0.6};
  const auto model = DiffusivityModel::exponential();
  const auto serial = ekpme::order_sweep(alphas, model, 1.0, 32, 0);
  const auto threaded = ekpme::order_sweep(alphas, model, 1.0, 32, 3);
  REQUIRE(serial.size() == 2);
  for (std::size_t k = 0; k < serial.size(); ++k) {
    CHECK(serial[k].alpha == alphas[k]);
    CHECK(serial[k].base_N == 32);
    CHECK(serial[k].v_4N == threaded[k].v_4N);
    CHECK(serial[k].order == threaded[k].order);
    CHECK(serial[k].order == ekpme::aitken_order(serial[k].v_N, serial[k].v_2N, serial[k].v_4N));
  }
  CHECK_THROWS_AS(ekpme::order_sweep(alphas, model, 1.0, 2), ekpme::DomainError);
}

TEST_CASE("time ratio is finite and positive") {
  const auto t = ekpme::time_ratio(0.5, DiffusivityModel::power_law(2), 32);
  CHECK(t.N == 32);
  CHECK(t.rect_seconds > 0.0);
  CHECK(t.trap_seconds > 0.0);
  CHECK(std::isfinite(t.tau));
  CHECK(t.tau > 0.0);
}

TEST_CASE("parallel_for visits every index once") {
  for (int threads : {0, 1, 2, 7}) {
    std::vector<std::atomic<int>> hits(100);
    ekpme::parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(ekpme::parallel_for(10, 3,
                                      [](std::size_t i) {
                                        if (i == 6) throw std::runtime_error("boom");
                                      }),
                  std::runtime_error);
}

TEST_CASE("analysis CSV schemas") {
  std::ostringstream a, b, c, d;
  ekpme::ErrorCurve curve;
  curve.points = {{0.5, 0.25}};
  ekpme::write_error_curve_csv(a, curve);
  CHECK(a.str() == "h,error\n5.000000000000000e-01,2.500000000000000e-01\n");

  ekpme::FrontErrorTable table;
  table.rows = {{10, 1.5, 0.1}};
  ekpme::write_front_table_csv(b, table);
  CHECK(b.str() == "N,eta_star,error\n10,1.500000000000000e+00,1.000000000000000e-01\n");

  const std::vector<ekpme::OrderEstimate> orders = {{0.25, 300, 0.0, 0.0, 0.0, 0.98}};
  ekpme::write_order_csv(c, orders);
  CHECK(c.str() == "alpha,order\n0.25,9.800000000000000e-01\n");

  const std::vector<ekpme::TimingResult> timings = {{0.5, 256, 1.0, 3.0, 3.0}};
  ekpme::write_timing_csv(d, timings);
  CHECK(d.str() == "alpha,tau\n0.5,3.000000000000000e+00\n");
}
