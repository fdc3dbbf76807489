#include "ekpme/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "ekpme/error.hpp"
#include "ekpme/solver.hpp"

namespace ekpme {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

double shoot_eta(double alpha, int N, Rule rule, const DiffusivityModel& model, double M) {
  return shoot_front(M, SolverConfig::standard(alpha, N, rule), model).eta_star;
}

}  // namespace

std::optional<double> loglog_slope(std::span<const ErrorPoint> points) {
  if (points.size() < 2) return std::nullopt;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const ErrorPoint& p : points) {
    if (!(p.h > 0.0) || !(p.error > 0.0)) {
      throw DomainError("loglog_slope: h and error must be positive");
    }
    const double x = std::log(p.h);
    const double y = std::log(p.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DomainError("loglog_slope: all h values coincide");
  return (n * sxy - sx * sy) / denom;
}

ErrorCurve ek_error_curve(double alpha, double mu, std::span<const double> h_list, Rule rule) {
  const AnalyticTestPair pair = analytic_test_pair(mu, alpha);
  const EKParams params = EKParams::standard(alpha, rule);
  ErrorCurve curve{rule, alpha, mu, {}, std::nullopt};

  for (double h : h_list) {
    const int gamma_mult = optimal_truncation(h, params.B, rule);
    const int n_max = static_cast<int>(std::lround(1.0 / h));
    double worst = 0.0;
    std::vector<double> samples;
    for (int n = 1; n <= n_max; ++n) {
      const int N = gamma_mult * n;
      const EKWeightRow row = ek_weights(n, N, params);
      samples.resize(static_cast<std::size_t>(N - n + 1));
      for (int i = n; i <= N; ++i) samples[static_cast<std::size_t>(i - n)] = pair.U(i * h);
      const double err = std::fabs(apply_ek(samples, row) - pair.F(n * h));
      worst = std::max(worst, err);
    }
    curve.points.push_back({h, worst});
  }
  curve.slope = loglog_slope(curve.points);
  return curve;
}

double aitken_order(double v_N, double v_2N, double v_4N) {
  const double coarse = std::fabs(v_2N - v_N);
  const double fine = std::fabs(v_4N - v_2N);
  if (fine == 0.0 || coarse == 0.0) {
    throw DomainError("aitken_order: successive values coincide");
  }
  return std::log2(coarse / fine);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<OrderEstimate> order_sweep(std::span<const double> alphas, const DiffusivityModel& model,
                                       double M, int base_N, int threads) {
  if (base_N < 4) throw DomainError("order_sweep: base N must be at least 4");
  // One cell per (α, level) so that the expensive fine grids spread over workers.
  std::vector<double> eta(alphas.size() * 3, 0.0);
  parallel_for(eta.size(), threads, [&](std::size_t cell) {
    const double alpha = alphas[cell / 3];
    const int N = base_N << (cell % 3);
    eta[cell] = shoot_eta(alpha, N, Rule::Rectangle, model, M);
  });

  std::vector<OrderEstimate> out;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    OrderEstimate e{alphas[k], base_N, eta[3 * k], eta[3 * k + 1], eta[3 * k + 2], 0.0};
    e.order = aitken_order(e.v_N, e.v_2N, e.v_4N);
    out.push_back(e);
  }
  return out;
}

FrontErrorTable front_error_table(std::span<const int> N_list, double alpha,
                                  const DiffusivityModel& model, double M,
                                  std::optional<double> reference, int threads) {
  if (N_list.empty()) throw DomainError("front_error_table: empty N list");
  FrontErrorTable table;
  table.alpha = alpha;

  std::vector<int> grids(N_list.begin(), N_list.end());
  if (!reference) {
    const int finest = *std::max_element(N_list.begin(), N_list.end());
    grids.push_back(2 * finest);
    grids.push_back(4 * finest);
  }
  std::vector<double> eta(grids.size(), 0.0);
  parallel_for(grids.size(), threads, [&](std::size_t k) {
    eta[k] = shoot_eta(alpha, grids[k], Rule::Rectangle, model, M);
  });

  if (reference) {
    table.reference = *reference;
  } else {
    table.reference = 2.0 * eta[eta.size() - 1] - eta[eta.size() - 2];
    table.extrapolated = true;
  }
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    table.rows.push_back({N_list[k], eta[k], std::fabs(eta[k] - table.reference)});
  }
  return table;
}

TimingResult time_ratio(double alpha, const DiffusivityModel& model, int N, double M) {
  const auto best_time = [&](Rule rule) {
    double best = 0.0;
    for (int run = 0; run < 4; ++run) {
      const auto start = std::chrono::steady_clock::now();
      shoot_eta(alpha, N, rule, model, M);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      if (run == 1 || (run > 1 && elapsed.count() < best)) best = elapsed.count();
    }
    return best;
  };
  TimingResult r;
  r.alpha = alpha;
  r.N = N;
  r.rect_seconds = best_time(Rule::Rectangle);
  r.trap_seconds = best_time(Rule::Trapezoid);
  r.tau = r.trap_seconds / r.rect_seconds;
  return r;
}

void write_error_curve_csv(std::ostream& out, const ErrorCurve& curve) {
  out << "h,error\n";
  for (const ErrorPoint& p : curve.points) out << fmt(p.h) << ',' << fmt(p.error) << '\n';
}

void write_front_table_csv(std::ostream& out, const FrontErrorTable& table) {
  out << "N,eta_star,error\n";
  for (const FrontErrorRow& r : table.rows) {
    out << r.N << ',' << fmt(r.eta_star) << ',' << fmt(r.error) << '\n';
  }
}

void write_order_csv(std::ostream& out, std::span<const OrderEstimate> estimates) {
  out << "alpha,order\n";
  for (const OrderEstimate& e : estimates) out << e.alpha << ',' << fmt(e.order) << '\n';
}

void write_timing_csv(std::ostream& out, std::span<const TimingResult> timings) {
  out << "alpha,tau\n";
  for (const TimingResult& t : timings) out << t.alpha << ',' << fmt(t.tau) << '\n';
}

}  // namespace ekpme
