#include "ekpme/ekpme.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "ekpme/analysis.hpp"
#include "ekpme/diffusivity.hpp"
#include "ekpme/error.hpp"
#include "ekpme/solver.hpp"

struct ekpme_model {
  ekpme::DiffusivityModel model;
};

struct ekpme_outcome {
  ekpme::ShootingOutcome outcome;
};

struct ekpme_curve {
  ekpme::ErrorCurve curve;
};

struct ekpme_table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  double reference = std::nan("");
};

namespace {

thread_local std::string last_error;

ekpme_status status_of(ekpme::ErrorKind kind) {
  switch (kind) {
    case ekpme::ErrorKind::Domain: return EKPME_ERR_DOMAIN;
    case ekpme::ErrorKind::Index: return EKPME_ERR_INDEX;
    case ekpme::ErrorKind::Length: return EKPME_ERR_LENGTH;
    case ekpme::ErrorKind::Parse: return EKPME_ERR_PARSE;
    case ekpme::ErrorKind::Convergence: return EKPME_ERR_CONVERGENCE;
    case ekpme::ErrorKind::Io: return EKPME_ERR_IO;
  }
  return EKPME_ERR_INTERNAL;
}

ekpme_status fail(ekpme_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
ekpme_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return EKPME_OK;
  } catch (const ekpme::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EKPME_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EKPME_ERR_INTERNAL, e.what());
  }
}

#define EKPME_REQUIRE(ptr)                                               \
  do {                                                                   \
    if ((ptr) == nullptr) return fail(EKPME_ERR_NULL, #ptr " is NULL");  \
  } while (0)

ekpme::SolverConfig to_config(const ekpme_solver_config& c) {
  ekpme::SolverConfig cfg;
  cfg.alpha = c.alpha;
  cfg.A = c.A;
  cfg.B = c.B;
  cfg.N = c.N;
  cfg.rule = c.rule == EKPME_RULE_TRAPEZOID ? ekpme::Rule::Trapezoid : ekpme::Rule::Rectangle;
  cfg.tolerance = c.tolerance;
  cfg.max_iterations = c.max_iterations;
  cfg.scalar_tolerance = c.scalar_tolerance;
  if (c.regularize) cfg.regularization = ekpme::RegularizationOptions{c.reg_C, c.reg_delta};
  return cfg;
}

ekpme::Rule to_rule(ekpme_rule rule) {
  if (rule == EKPME_RULE_RECTANGLE) return ekpme::Rule::Rectangle;
  if (rule == EKPME_RULE_TRAPEZOID) return ekpme::Rule::Trapezoid;
  throw ekpme::DomainError("unknown quadrature rule");
}

std::string format_cell(const std::string& column, double v) {
  char buf[40];
  if (column == "N") {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  } else if (column == "alpha") {
    std::snprintf(buf, sizeof buf, "%g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.15e", v);
  }
  return buf;
}

std::ofstream open_output(const char* path) {
  std::ofstream out(path);
  if (!out) throw ekpme::IoError(std::string("cannot open '") + path + "' for writing");
  return out;
}

}  // namespace

extern "C" {

const char* ekpme_version(void) { return "0.3.0"; }

const char* ekpme_last_error(void) { return last_error.c_str(); }

const char* ekpme_status_name(ekpme_status status) {
  switch (status) {
    case EKPME_OK: return "ok";
    case EKPME_ERR_DOMAIN: return "domain error";
    case EKPME_ERR_INDEX: return "index error";
    case EKPME_ERR_LENGTH: return "length mismatch";
    case EKPME_ERR_PARSE: return "parse error";
    case EKPME_ERR_CONVERGENCE: return "convergence failure";
    case EKPME_ERR_IO: return "i/o error";
    case EKPME_ERR_NULL: return "null argument";
    case EKPME_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ekpme_solver_config_init(ekpme_solver_config* config, double alpha) {
  if (config == nullptr) return;
  const ekpme::SolverConfig d = ekpme::SolverConfig::standard(alpha, 256);
  config->alpha = d.alpha;
  config->A = d.A;
  config->B = d.B;
  config->N = d.N;
  config->rule = EKPME_RULE_RECTANGLE;
  config->tolerance = d.tolerance;
  config->max_iterations = d.max_iterations;
  config->scalar_tolerance = d.scalar_tolerance;
  config->regularize = 0;
  config->reg_C = 1.0;
  config->reg_delta = 0.5;
}

ekpme_status ekpme_solver_config_validate(const ekpme_solver_config* config) {
  EKPME_REQUIRE(config);
  return guarded([&] { to_config(*config).validate(); });
}

ekpme_status ekpme_model_parse(const char* spec, ekpme_model** out) {
  EKPME_REQUIRE(spec);
  EKPME_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new ekpme_model{ekpme::parse_diffusivity(spec)}; });
}

void ekpme_model_free(ekpme_model* model) { delete model; }

ekpme_status ekpme_model_D(const ekpme_model* model, double u, double* out) {
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  return guarded([&] { *out = model->model.D(u); });
}

ekpme_status ekpme_model_K(const ekpme_model* model, double u, double* out) {
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  return guarded([&] { *out = model->model.K(u); });
}

ekpme_status ekpme_model_K_inverse(const ekpme_model* model, double y, double* out) {
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  return guarded([&] { *out = model->model.K_inverse(y); });
}

ekpme_status ekpme_model_admissible(const ekpme_model* model, int* admissible, double* value) {
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(admissible);
  return guarded([&] {
    const ekpme::Admissibility a = ekpme::check_admissible(model->model);
    *admissible = a.admissible ? 1 : 0;
    if (value != nullptr) *value = a.value;
  });
}

ekpme_status ekpme_model_describe(const ekpme_model* model, char* buffer, size_t capacity) {
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(buffer);
  if (capacity == 0) return fail(EKPME_ERR_LENGTH, "buffer capacity is zero");
  return guarded([&] {
    const std::string text = model->model.spec();
    const std::size_t n = std::min(text.size(), capacity - 1);
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
    if (n < text.size()) throw ekpme::LengthError("description truncated");
  });
}

ekpme_status ekpme_shoot(const ekpme_solver_config* config, const ekpme_model* model, double mass,
                         ekpme_outcome** out) {
  EKPME_REQUIRE(config);
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new ekpme_outcome{ekpme::shoot_front(mass, to_config(*config), model->model)};
  });
}

ekpme_status ekpme_step(const ekpme_solver_config* config, const ekpme_model* model,
                        double eta_star, ekpme_outcome** out) {
  EKPME_REQUIRE(config);
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    ekpme::ShootingOutcome o;
    o.profile = ekpme::step_profile(eta_star, to_config(*config), model->model);
    o.eta_star = eta_star;
    o.residual = std::nan("");
    *out = new ekpme_outcome{std::move(o)};
  });
}

void ekpme_outcome_free(ekpme_outcome* outcome) { delete outcome; }

ekpme_status ekpme_outcome_summary(const ekpme_outcome* outcome, double* eta_star,
                                   double* residual, int* iterations, int* clamped) {
  EKPME_REQUIRE(outcome);
  const ekpme::ShootingOutcome& o = outcome->outcome;
  if (eta_star) *eta_star = o.eta_star;
  if (residual) *residual = o.residual;
  if (iterations) *iterations = o.iterations;
  if (clamped) *clamped = o.profile.clamped;
  last_error.clear();
  return EKPME_OK;
}

ekpme_status ekpme_outcome_profile(const ekpme_outcome* outcome, double* values, size_t capacity,
                                   size_t* count) {
  EKPME_REQUIRE(outcome);
  const std::vector<double>& U = outcome->outcome.profile.values;
  if (count) *count = U.size();
  if (values == nullptr) return EKPME_OK;
  if (capacity < U.size()) {
    return fail(EKPME_ERR_LENGTH, "profile buffer holds " + std::to_string(capacity) +
                                      " values, need " + std::to_string(U.size()));
  }
  std::copy(U.begin(), U.end(), values);
  last_error.clear();
  return EKPME_OK;
}

ekpme_status ekpme_outcome_reconstruct(const ekpme_outcome* outcome, double x, double t,
                                       double* u) {
  EKPME_REQUIRE(outcome);
  EKPME_REQUIRE(u);
  return guarded([&] { *u = ekpme::reconstruct_pde_solution(outcome->outcome.profile, x, t); });
}

ekpme_status ekpme_outcome_write_csv(const ekpme_outcome* outcome, const char* profile_path,
                                     const char* summary_path) {
  EKPME_REQUIRE(outcome);
  return guarded([&] {
    if (profile_path != nullptr) {
      std::ofstream out = open_output(profile_path);
      ekpme::write_profile_csv(out, outcome->outcome.profile);
    }
    if (summary_path != nullptr) {
      std::ofstream out = open_output(summary_path);
      ekpme::write_summary_csv(out, outcome->outcome);
    }
  });
}

ekpme_status ekpme_apriori_bound(const ekpme_solver_config* config, const ekpme_model* model,
                                 double eta_star, double* out) {
  EKPME_REQUIRE(config);
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  return guarded([&] { *out = ekpme::apriori_bound(eta_star, to_config(*config), model->model); });
}

ekpme_status ekpme_ek_error_curve(double alpha, double mu, const double* h, size_t count,
                                  ekpme_rule rule, ekpme_curve** out) {
  EKPME_REQUIRE(h);
  EKPME_REQUIRE(out);
  *out = nullptr;
  if (count == 0) return fail(EKPME_ERR_LENGTH, "empty h list");
  return guarded([&] {
    *out = new ekpme_curve{ekpme::ek_error_curve(alpha, mu, {h, count}, to_rule(rule))};
  });
}

void ekpme_curve_free(ekpme_curve* curve) { delete curve; }

size_t ekpme_curve_size(const ekpme_curve* curve) {
  return curve == nullptr ? 0 : curve->curve.points.size();
}

ekpme_status ekpme_curve_point(const ekpme_curve* curve, size_t index, double* h, double* error) {
  EKPME_REQUIRE(curve);
  if (index >= curve->curve.points.size()) {
    return fail(EKPME_ERR_INDEX, "curve point " + std::to_string(index) + " out of range");
  }
  if (h) *h = curve->curve.points[index].h;
  if (error) *error = curve->curve.points[index].error;
  last_error.clear();
  return EKPME_OK;
}

ekpme_status ekpme_curve_slope(const ekpme_curve* curve, double* slope, int* available) {
  EKPME_REQUIRE(curve);
  EKPME_REQUIRE(slope);
  EKPME_REQUIRE(available);
  *available = curve->curve.slope.has_value() ? 1 : 0;
  *slope = curve->curve.slope.value_or(std::nan(""));
  last_error.clear();
  return EKPME_OK;
}

ekpme_status ekpme_curve_write_csv(const ekpme_curve* curve, const char* path) {
  EKPME_REQUIRE(curve);
  EKPME_REQUIRE(path);
  return guarded([&] {
    std::ofstream out = open_output(path);
    ekpme::write_error_curve_csv(out, curve->curve);
  });
}

ekpme_status ekpme_aitken_order(double v_N, double v_2N, double v_4N, double* out) {
  EKPME_REQUIRE(out);
  return guarded([&] { *out = ekpme::aitken_order(v_N, v_2N, v_4N); });
}

ekpme_status ekpme_order_sweep(const double* alphas, size_t count, const ekpme_model* model,
                               double mass, int base_N, int threads, ekpme_table** out) {
  EKPME_REQUIRE(alphas);
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const auto estimates = ekpme::order_sweep({alphas, count}, model->model, mass, base_N, threads);
    auto* table = new ekpme_table{{"alpha", "order"}, {}, std::nan("")};
    for (const auto& e : estimates) table->rows.push_back({e.alpha, e.order});
    *out = table;
  });
}

ekpme_status ekpme_front_errors(const int* N_list, size_t count, double alpha,
                                const ekpme_model* model, double mass, const double* reference,
                                int threads, ekpme_table** out) {
  EKPME_REQUIRE(N_list);
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    std::optional<double> ref;
    if (reference != nullptr) ref = *reference;
    const auto result =
        ekpme::front_error_table({N_list, count}, alpha, model->model, mass, ref, threads);
    auto* table = new ekpme_table{{"N", "eta_star", "error"}, {}, result.reference};
    for (const auto& r : result.rows) {
      table->rows.push_back({static_cast<double>(r.N), r.eta_star, r.error});
    }
    *out = table;
  });
}

ekpme_status ekpme_time_ratios(const double* alphas, size_t count, const ekpme_model* model,
                               double mass, int N, ekpme_table** out) {
  EKPME_REQUIRE(alphas);
  EKPME_REQUIRE(model);
  EKPME_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto* table = new ekpme_table{{"alpha", "tau"}, {}, std::nan("")};
    try {
      for (size_t k = 0; k < count; ++k) {
        const auto t = ekpme::time_ratio(alphas[k], model->model, N, mass);
        table->rows.push_back({t.alpha, t.tau});
      }
    } catch (...) {
      delete table;
      throw;
    }
    *out = table;
  });
}

void ekpme_table_free(ekpme_table* table) { delete table; }

size_t ekpme_table_rows(const ekpme_table* table) { return table == nullptr ? 0 : table->rows.size(); }

size_t ekpme_table_columns(const ekpme_table* table) {
  return table == nullptr ? 0 : table->columns.size();
}

const char* ekpme_table_column_name(const ekpme_table* table, size_t column) {
  if (table == nullptr || column >= table->columns.size()) return nullptr;
  return table->columns[column].c_str();
}

ekpme_status ekpme_table_get(const ekpme_table* table, size_t row, size_t column, double* out) {
  EKPME_REQUIRE(table);
  EKPME_REQUIRE(out);
  if (row >= table->rows.size() || column >= table->columns.size()) {
    return fail(EKPME_ERR_INDEX, "table cell (" + std::to_string(row) + ", " +
                                     std::to_string(column) + ") out of range");
  }
  *out = table->rows[row][column];
  last_error.clear();
  return EKPME_OK;
}

ekpme_status ekpme_table_reference(const ekpme_table* table, double* out) {
  EKPME_REQUIRE(table);
  EKPME_REQUIRE(out);
  *out = table->reference;
  last_error.clear();
  return EKPME_OK;
}

ekpme_status ekpme_table_write_csv(const ekpme_table* table, const char* path) {
  EKPME_REQUIRE(table);
  EKPME_REQUIRE(path);
  return guarded([&] {
    std::ofstream out = open_output(path);
    for (size_t c = 0; c < table->columns.size(); ++c) {
      out << (c ? "," : "") << table->columns[c];
    }
    out << '\n';
    for (const auto& row : table->rows) {
      for (size_t c = 0; c < row.size(); ++c) {
        out << (c ? "," : "") << format_cell(table->columns[c], row[c]);
      }
      out << '\n';
    }
  });
}

}  // extern "C"
