// ekpme command line front end. Talks to the solver exclusively through the C API.

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ekpme/ekpme.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

// Raised for invalid input; the message already names the flag.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when the library reports a failure; exit code depends on the status.
struct LibraryError : std::runtime_error {
  LibraryError(ekpme_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  ekpme_status status;
};

void check(ekpme_status status, const std::string& context) {
  if (status == EKPME_OK) return;
  std::string message = context + ": " + ekpme_last_error();
  if (status == EKPME_ERR_DOMAIN || status == EKPME_ERR_PARSE) throw UsageError(message);
  throw LibraryError(status, message);
}

template <class Handle, void (*Free)(Handle*)>
struct Owned {
  Handle* ptr = nullptr;
  Owned() = default;
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  ~Owned() { Free(ptr); }
};

using Model = Owned<ekpme_model, ekpme_model_free>;
using Outcome = Owned<ekpme_outcome, ekpme_outcome_free>;
using Curve = Owned<ekpme_curve, ekpme_curve_free>;
using Table = Owned<ekpme_table, ekpme_table_free>;

double parse_number(const std::string& text, const std::string& flag) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw UsageError(flag + ": '" + text + "' is not a number");
  }
  return v;
}

int parse_int(const std::string& text, const std::string& flag) {
  const double v = parse_number(text, flag);
  if (v != std::floor(v) || std::fabs(v) > 1e9) {
    throw UsageError(flag + ": '" + text + "' is not an integer");
  }
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const std::string& part : split(text, ',')) out.push_back(parse_number(trim(part), flag));
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

// "2^-k" or a plain number.
double parse_spacing(const std::string& text, const std::string& flag) {
  if (text.rfind("2^", 0) == 0) return std::ldexp(1.0, parse_int(text.substr(2), flag));
  return parse_number(text, flag);
}

// "2^-4..2^-9" (every power in between) or a comma list of spacings.
std::vector<double> parse_h_spec(const std::string& text) {
  const std::string flag = "--h";
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::string a = trim(text.substr(0, dots));
    const std::string b = trim(text.substr(dots + 2));
    if (a.rfind("2^", 0) != 0 || b.rfind("2^", 0) != 0) {
      throw UsageError(flag + ": ranges must have the form 2^-a..2^-b");
    }
    const int ka = parse_int(a.substr(2), flag);
    const int kb = parse_int(b.substr(2), flag);
    const int step = ka <= kb ? 1 : -1;
    for (int k = ka;; k += step) {
      out.push_back(std::ldexp(1.0, k));
      if (k == kb) break;
    }
  } else {
    for (const std::string& part : split(text, ',')) out.push_back(parse_spacing(trim(part), flag));
  }
  for (double h : out) {
    if (!(h > 0.0 && h < 1.0)) throw UsageError(flag + ": spacing must lie in (0,1)");
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

void require_alpha(double alpha, const std::string& flag = "--alpha") {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError(flag + ": alpha must lie in (0,1]");
}

void require_positive(double v, const std::string& flag) {
  if (!(v > 0.0)) throw UsageError(flag + ": must be positive");
}

ekpme_rule parse_rule(const std::string& text) {
  if (text == "rect") return EKPME_RULE_RECTANGLE;
  if (text == "trap") return EKPME_RULE_TRAPEZOID;
  throw UsageError("--rule: expected 'rect' or 'trap', got '" + text + "'");
}

void load_model(const std::string& spec, Model& model) {
  if (ekpme_model_parse(spec.c_str(), &model.ptr) != EKPME_OK) {
    throw UsageError("--diff: " + std::string(ekpme_last_error()));
  }
}

std::string file_tag(const std::string& spec) {
  std::string tag;
  for (char c : spec) tag += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return tag;
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

int threads_from_env() {
  const char* value = std::getenv("EKPME_THREADS");
  if (value == nullptr || *value == '\0') return 0;
  const int n = parse_int(value, "EKPME_THREADS");
  if (n < 0) throw UsageError("EKPME_THREADS: must be non-negative");
  return n;
}

// ---------------------------------------------------------------------------

struct SolveFlags {
  double alpha = 0.5;
  std::string diff = "power:m=1";
  double mass = 1.0;
  int n = 256;
  std::string rule = "rect";
  double eps = 1e-8;
  std::string out = "profile.csv";
  std::string summary;
  std::optional<double> A;
  std::optional<double> B;
  std::string regularize;
};

int run_solve(const SolveFlags& f) {
  require_alpha(f.alpha);
  require_positive(f.mass, "--mass");
  if (f.n < 4) throw UsageError("--n: must be at least 4");
  if (!(f.eps > 0.0 && f.eps < 1.0)) throw UsageError("--eps: must lie in (0,1)");
  const ekpme_rule rule = parse_rule(f.rule);
  if (rule == EKPME_RULE_TRAPEZOID && f.alpha >= 1.0) {
    throw UsageError("--rule: trapezoid rule requires alpha < 1");
  }

  ekpme_solver_config config;
  ekpme_solver_config_init(&config, f.alpha);
  config.N = f.n;
  config.rule = rule;
  config.tolerance = f.eps;
  if (f.A) config.A = *f.A;
  if (f.B) {
    require_positive(*f.B, "--B");
    config.B = *f.B;
  }
  if (!f.regularize.empty()) {
    config.regularize = 1;
    for (const std::string& part : split(f.regularize, ',')) {
      const auto eq = part.find('=');
      const std::string key = trim(part.substr(0, eq));
      if (eq == std::string::npos) throw UsageError("--regularize: expected C=<f>,delta=<f>");
      const double v = parse_number(trim(part.substr(eq + 1)), "--regularize");
      if (key == "C") {
        config.reg_C = v;
      } else if (key == "delta") {
        config.reg_delta = v;
      } else {
        throw UsageError("--regularize: unknown key '" + key + "'");
      }
    }
  }
  if (ekpme_solver_config_validate(&config) != EKPME_OK) {
    throw UsageError(std::string("invalid configuration: ") + ekpme_last_error());
  }

  Model model;
  load_model(f.diff, model);
  Outcome outcome;
  check(ekpme_shoot(&config, model.ptr, f.mass, &outcome.ptr), "solve");
  check(ekpme_outcome_write_csv(outcome.ptr, f.out.c_str(),
                                f.summary.empty() ? nullptr : f.summary.c_str()),
        "writing output");

  double eta_star = 0.0, residual = 0.0;
  int iterations = 0, clamped = 0;
  check(ekpme_outcome_summary(outcome.ptr, &eta_star, &residual, &iterations, &clamped), "summary");
  if (clamped > 0) {
    std::cerr << "warning: " << clamped << " negative right-hand sides were clamped to zero\n";
  }
  std::printf("eta_star,residual,iterations\n%.15e,%.15e,%d\n", eta_star, residual, iterations);
  return kExitOk;
}

struct EkErrorFlags {
  double alpha = 0.5;
  double mu = 2.0;
  std::string h = "2^-4..2^-9";
  std::string rule = "both";
  std::string out_dir = ".";
};

int run_ek_error(const EkErrorFlags& f) {
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw UsageError("--alpha: alpha must lie in (0,1)");
  require_positive(f.mu, "--mu");
  const std::vector<double> h = parse_h_spec(f.h);
  std::vector<ekpme_rule> rules;
  if (f.rule == "both") {
    rules = {EKPME_RULE_RECTANGLE, EKPME_RULE_TRAPEZOID};
  } else {
    rules = {parse_rule(f.rule)};
  }

  const std::string summary_path = join_path(f.out_dir, "ek_error_summary.csv");
  std::ofstream summary(summary_path);
  if (!summary) throw LibraryError(EKPME_ERR_IO, "cannot open '" + summary_path + "'");
  summary << "rule,slope\n";
  std::printf("rule,slope\n");
  for (ekpme_rule rule : rules) {
    const char* name = rule == EKPME_RULE_RECTANGLE ? "rect" : "trap";
    Curve curve;
    check(ekpme_ek_error_curve(f.alpha, f.mu, h.data(), h.size(), rule, &curve.ptr), "ek-error");
    const std::string path = join_path(f.out_dir, std::string("ek_error_") + name + ".csv");
    check(ekpme_curve_write_csv(curve.ptr, path.c_str()), "writing output");
    double slope = 0.0;
    int available = 0;
    check(ekpme_curve_slope(curve.ptr, &slope, &available), "slope");
    char text[40];
    if (available) {
      std::snprintf(text, sizeof text, "%.6f", slope);
    } else {
      std::snprintf(text, sizeof text, "n/a");
    }
    summary << name << ',' << text << '\n';
    std::printf("%s,%s\n", name, text);
  }
  return kExitOk;
}

struct OrderFlags {
  std::string alpha_list = "0.1,0.25,0.5,0.75,0.9";
  std::string diff;
  double mass = 1.0;
  int n_base = 300;
  std::string out_dir = ".";
};

int run_order(const OrderFlags& f) {
  const std::vector<double> alphas = parse_number_list(f.alpha_list, "--alpha-list");
  for (double a : alphas) require_alpha(a, "--alpha-list");
  require_positive(f.mass, "--mass");
  if (f.n_base < 4) throw UsageError("--n-base: must be at least 4");
  const std::vector<std::string> specs =
      f.diff.empty() ? std::vector<std::string>{"power:m=1", "exp"} : std::vector<std::string>{f.diff};
  const int threads = threads_from_env();

  for (const std::string& spec : specs) {
    Model model;
    load_model(spec, model);
    Table table;
    check(ekpme_order_sweep(alphas.data(), alphas.size(), model.ptr, f.mass, f.n_base, threads,
                            &table.ptr),
          "order sweep for " + spec);
    const std::string path = join_path(f.out_dir, "order_" + file_tag(spec) + ".csv");
    check(ekpme_table_write_csv(table.ptr, path.c_str()), "writing output");
    std::printf("order for %s\n", spec.c_str());
    for (size_t r = 0; r < ekpme_table_rows(table.ptr); ++r) {
      double alpha = 0.0, order = 0.0;
      check(ekpme_table_get(table.ptr, r, 0, &alpha), "table");
      check(ekpme_table_get(table.ptr, r, 1, &order), "table");
      std::printf("  alpha=%g order=%.4f\n", alpha, order);
    }
  }
  return kExitOk;
}

struct FrontFlags {
  double alpha = 1.0;
  std::string diff = "power:m=1";
  double mass = 1.0;
  std::string n_list = "10,50,100,200,500,1000";
  std::string ref = "auto";
  std::string out = "front.csv";
};

int run_front(const FrontFlags& f) {
  require_alpha(f.alpha);
  require_positive(f.mass, "--mass");
  std::vector<int> grids;
  for (const std::string& part : split(f.n_list, ',')) {
    const int n = parse_int(trim(part), "--n-list");
    if (n < 4) throw UsageError("--n-list: every N must be at least 4");
    grids.push_back(n);
  }
  if (grids.empty()) throw UsageError("--n-list: empty list");
  std::optional<double> reference;
  if (f.ref != "auto") {
    reference = parse_number(f.ref, "--ref");
    require_positive(*reference, "--ref");
  }

  Model model;
  load_model(f.diff, model);
  Table table;
  check(ekpme_front_errors(grids.data(), grids.size(), f.alpha, model.ptr, f.mass,
                           reference ? &*reference : nullptr, threads_from_env(), &table.ptr),
        "front errors");
  check(ekpme_table_write_csv(table.ptr, f.out.c_str()), "writing output");
  double ref = 0.0;
  check(ekpme_table_reference(table.ptr, &ref), "table");
  std::printf("reference %.15f%s\n", ref, reference ? "" : " (extrapolated)");
  for (size_t r = 0; r < ekpme_table_rows(table.ptr); ++r) {
    double n = 0.0, eta = 0.0, err = 0.0;
    check(ekpme_table_get(table.ptr, r, 0, &n), "table");
    check(ekpme_table_get(table.ptr, r, 1, &eta), "table");
    check(ekpme_table_get(table.ptr, r, 2, &err), "table");
    std::printf("  N=%d eta_star=%.12f error=%.3e\n", static_cast<int>(n), eta, err);
  }
  return kExitOk;
}

struct BenchFlags {
  int n = 256;
  std::string alpha_list = "0.1,0.5,0.9";
  std::string diff = "power:m=2";
  double mass = 1.0;
  std::string out = "bench.csv";
};

int run_bench(const BenchFlags& f) {
  const std::vector<double> alphas = parse_number_list(f.alpha_list, "--alpha-list");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw UsageError("--alpha-list: alpha must lie in (0,1) for timing");
  }
  if (f.n < 4) throw UsageError("--n: must be at least 4");
  require_positive(f.mass, "--mass");
  Model model;
  load_model(f.diff, model);
  Table table;
  check(ekpme_time_ratios(alphas.data(), alphas.size(), model.ptr, f.mass, f.n, &table.ptr),
        "timing");
  check(ekpme_table_write_csv(table.ptr, f.out.c_str()), "writing output");
  for (size_t r = 0; r < ekpme_table_rows(table.ptr); ++r) {
    double alpha = 0.0, tau = 0.0;
    check(ekpme_table_get(table.ptr, r, 0, &alpha), "table");
    check(ekpme_table_get(table.ptr, r, 1, &tau), "table");
    std::printf("alpha=%g tau=%.2f\n", alpha, tau);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

// `key = value` lines from ekpme.conf; `#` starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::ifstream in(path);
  if (!in) return entries;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

int run(int argc, char** argv) {
  CLI::App app{"Self-similar solutions of the time-fractional porous medium equation", "ekpme"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", ekpme_version());

  SolveFlags solve;
  auto* s = app.add_subcommand("solve", "Shoot for the wetting front and write the profile");
  s->add_option("--alpha", solve.alpha, "Order alpha in (0,1]")->capture_default_str();
  s->add_option("--diff", solve.diff, "Diffusivity: power:m=<float> or exp")->capture_default_str();
  s->add_option("--mass", solve.mass, "Boundary value M = U(0)")->capture_default_str();
  s->add_option("--n", solve.n, "Number of grid intervals N")->capture_default_str();
  s->add_option("--rule", solve.rule, "Quadrature: rect or trap")->capture_default_str();
  s->add_option("--eps", solve.eps, "Shooting tolerance on |U(0) - M|")->capture_default_str();
  s->add_option("--out", solve.out, "Profile CSV path")->capture_default_str();
  s->add_option("--summary", solve.summary, "Optional summary CSV path");
  s->add_option("--A", solve.A, "Override A (default 1 - alpha)");
  s->add_option("--B", solve.B, "Override B (default alpha/2)");
  s->add_option("--regularize", solve.regularize, "Floor max(D, eps(h)): C=<f>,delta=<f>");

  EkErrorFlags ek;
  auto* e = app.add_subcommand("ek-error", "EK discretization error against the analytic pair");
  e->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  e->add_option("--alpha", ek.alpha, "Order alpha in (0,1)")->capture_default_str();
  e->add_option("--mu", ek.mu, "Exponent of the test function")->capture_default_str();
  e->add_option("--h", ek.h, "Spacings: 2^-a..2^-b or a comma list")->capture_default_str();
  e->add_option("--rule", ek.rule, "rect, trap or both")->capture_default_str();
  e->add_option("--out-dir", ek.out_dir, "Directory for the CSV files")->capture_default_str();

  OrderFlags order;
  auto* o = app.add_subcommand("order", "Aitken order estimates of the front position");
  o->add_option("--alpha-list", order.alpha_list, "Comma separated alphas")->capture_default_str();
  o->add_option("--diff", order.diff, "Diffusivity (default: power:m=1 and exp)");
  o->add_option("--mass", order.mass, "Boundary value M")->capture_default_str();
  o->add_option("--n-base", order.n_base, "Base N of the N, 2N, 4N ladder")->capture_default_str();
  o->add_option("--out-dir", order.out_dir, "Directory for the CSV files")->capture_default_str();

  FrontFlags front;
  auto* fr = app.add_subcommand("front", "Front position errors over a list of N");
  fr->add_option("--alpha", front.alpha, "Order alpha in (0,1]")->capture_default_str();
  fr->add_option("--diff", front.diff, "Diffusivity")->capture_default_str();
  fr->add_option("--mass", front.mass, "Boundary value M")->capture_default_str();
  fr->add_option("--n-list", front.n_list, "Comma separated N values")->capture_default_str();
  fr->add_option("--ref", front.ref, "Reference front: auto or a number")->capture_default_str();
  fr->add_option("--out", front.out, "CSV path")->capture_default_str();

  BenchFlags bench;
  auto* b = app.add_subcommand("bench", "Timing ratio trapezoid / rectangle");
  b->add_option("--n", bench.n, "Number of grid intervals N")->capture_default_str();
  b->add_option("--alpha-list", bench.alpha_list, "Comma separated alphas")->capture_default_str();
  b->add_option("--diff", bench.diff, "Diffusivity")->capture_default_str();
  b->add_option("--mass", bench.mass, "Boundary value M")->capture_default_str();
  b->add_option("--out", bench.out, "CSV path")->capture_default_str();

  // Config file entries go right after the subcommand name so that explicit
  // flags, which come later, take precedence.
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty()) {
    if (CLI::App* sub = app.get_subcommand_no_throw(args.front()); sub != nullptr) {
      std::set<std::string> known;
      for (CLI::App* each : {s, e, o, fr, b}) {
        for (const CLI::Option* opt : each->get_options()) {
          for (const std::string& name : opt->get_lnames()) known.insert(name);
        }
      }
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config("ekpme.conf")) {
        if (known.count(key) == 0) throw UsageError("ekpme.conf: unknown key '" + key + "'");
        if (sub->get_option_no_throw("--" + key) != nullptr) {
          injected.push_back("--" + key);
          injected.push_back(value);
        }
      }
      args.insert(args.begin() + 1, injected.begin(), injected.end());
    }
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }

  if (s->parsed()) return run_solve(solve);
  if (e->parsed()) return run_ek_error(ek);
  if (o->parsed()) return run_order(order);
  if (fr->parsed()) return run_front(front);
  return run_bench(bench);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.status == EKPME_ERR_IO ? kExitUsage : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
