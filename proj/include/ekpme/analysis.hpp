#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ekpme/diffusivity.hpp"
#include "ekpme/ek_quadrature.hpp"

namespace ekpme {

struct ErrorPoint {
  double h = 0.0;
  double error = 0.0;
};

struct ErrorCurve {
  Rule rule = Rule::Rectangle;
  double alpha = 0.5;
  double mu = 2.0;
  std::vector<ErrorPoint> points;
  std::optional<double> slope;  // absent for a single point
};

/// Least-squares slope of log(error) against log(h); nullopt for fewer than two points.
std::optional<double> loglog_slope(std::span<const ErrorPoint> points);

/// max_n |F_αU(η_n) - F̂U(η_n)| for n·h in [0, 1], with N = γ·n per optimal truncation.
ErrorCurve ek_error_curve(double alpha, double mu, std::span<const double> h_list, Rule rule);

/// log2 |v_2N - v_N| / |v_4N - v_2N|. Throws DomainError when successive values coincide.
double aitken_order(double v_N, double v_2N, double v_4N);

struct OrderEstimate {
  double alpha = 0.0;
  int base_N = 0;
  double v_N = 0.0;
  double v_2N = 0.0;
  double v_4N = 0.0;
  double order = 0.0;
};

/// Runs `body(i)` for i in [0, count) on up to `threads` workers (0 or 1: inline).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Front positions at N, 2N, 4N and their Aitken order for each α (rectangle rule).
std::vector<OrderEstimate> order_sweep(std::span<const double> alphas, const DiffusivityModel& model,
                                       double M, int base_N, int threads = 0);

struct FrontErrorRow {
  int N = 0;
  double eta_star = 0.0;
  double error = 0.0;
};

struct FrontErrorTable {
  double alpha = 1.0;
  double reference = 0.0;
  bool extrapolated = false;
  std::vector<FrontErrorRow> rows;
};

/// Front errors against `reference`; without one, the reference is the first-order
/// Richardson limit 2η*(4N_max) - η*(2N_max).
FrontErrorTable front_error_table(std::span<const int> N_list, double alpha,
                                  const DiffusivityModel& model, double M,
                                  std::optional<double> reference = std::nullopt, int threads = 0);

struct TimingResult {
  double alpha = 0.0;
  int N = 0;
  double rect_seconds = 0.0;
  double trap_seconds = 0.0;
  double tau = 0.0;
};

/// Wall-clock ratio trapezoid/rectangle of a full front computation (best of 3
/// after one discarded run).
TimingResult time_ratio(double alpha, const DiffusivityModel& model, int N, double M = 1.0);

void write_error_curve_csv(std::ostream& out, const ErrorCurve& curve);
void write_front_table_csv(std::ostream& out, const FrontErrorTable& table);
void write_order_csv(std::ostream& out, std::span<const OrderEstimate> estimates);
void write_timing_csv(std::ostream& out, std::span<const TimingResult> timings);

}  // namespace ekpme
