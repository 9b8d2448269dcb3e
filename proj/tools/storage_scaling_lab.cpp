// storage-scaling-lab: simulate the block model, evaluate closed-form risk,
// fit the (n, L) scaling surface, optimize storage splits, and emit
// compression plans. CSV/JSON in, CSV/JSON out; every run is reproducible
// from its flags and seed.

#include <CLI11.hpp>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sslab/data_plan.hpp"
#include "sslab/deterministic_equivalent.hpp"
#include "sslab/errors.hpp"
#include "sslab/multiscale_model.hpp"
#include "sslab/observation_grid.hpp"
#include "sslab/ridge.hpp"
#include "sslab/scaling_fit.hpp"
#include "sslab/storage_optimizer.hpp"
#include "sslab/version.hpp"

namespace {

std::string format_double(double value) {
  char buffer[40];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string provenance(std::uint64_t seed) {
  std::ostringstream out;
  out << "storage-scaling-lab " << sslab::kVersion << " seed=" << seed;
  return out.str();
}

sslab::LambdaPolicy parse_lambda_policy(const std::string& text) {
  if (text == "oracle") return sslab::LambdaPolicy::oracle_grid();
  if (text == "theorem") return sslab::LambdaPolicy::theorem_schedule();
  if (text == "boundary") return sslab::LambdaPolicy::boundary_schedule();
  if (text == "matched") return sslab::LambdaPolicy::matched_schedule();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc() && ptr == text.data() + text.size())
    return sslab::LambdaPolicy::fixed(value);
  throw sslab::DomainError(
      "lambda policy must be 'oracle', 'theorem', 'boundary', 'matched', or a fixed value");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw sslab::ParseError("cannot open output file: " + path);
  out << text;
  if (!out) throw sslab::ParseError("failed writing output file: " + path);
}

struct SimulateArgs {
  std::string config_path, out_path;
  std::vector<int> n_list, m_list;
  int replicates = 50;
  std::string lambda_policy = "oracle";
  std::optional<std::uint64_t> seed;
  bool zero_signal = false;
  unsigned threads = 0;
};

int run_simulate(const SimulateArgs& args) {
  const sslab::SpectrumConfig config = sslab::load_spectrum_config(args.config_path);
  const std::uint64_t seed = args.seed.value_or(config.seed);
  const sslab::LambdaPolicy policy = parse_lambda_policy(args.lambda_policy);
  const sslab::BlockVector zero = sslab::zero_signal(config);
  const sslab::ObservationGrid grid =
      sslab::sweep(config, args.n_list, args.m_list, policy, args.replicates, seed,
                   args.zero_signal ? &zero : nullptr, args.threads);
  sslab::store_grid(grid, args.out_path, provenance(seed));
  return 0;
}

struct TheoryArgs {
  std::string config_path, out_path;
  std::vector<int> n_list, m_list;
  std::optional<double> lambda;
};

int run_theory(const TheoryArgs& args) {
  const sslab::SpectrumConfig config = sslab::load_spectrum_config(args.config_path);
  const std::vector<double> norms = sslab::pinned_theta_sq_norms(config);
  const sslab::LambdaPolicy oracle = sslab::LambdaPolicy::oracle_grid();

  std::ostringstream out;
  out << "# " << provenance(config.seed) << "\n";
  out << "n,L,lambda,lambda_star,dof,bias,variance,tail,total,status\n";
  for (int n : args.n_list) {
    for (int m : args.m_list) {
      const auto L = sslab::total_dim(config.q, m + 1);
      try {
        const sslab::EquivalentRisk risk =
            args.lambda ? sslab::predicted_error(config, norms, n, m, *args.lambda)
                        : sslab::predicted_error_best(config, norms, n, m, oracle);
        out << n << ',' << L << ',' << format_double(risk.lambda) << ','
            << format_double(risk.lambda_star) << ',' << format_double(risk.dof) << ','
            << format_double(risk.bias) << ',' << format_double(risk.variance) << ','
            << format_double(risk.tail) << ',' << format_double(risk.total) << ",ok\n";
      } catch (const sslab::DegenerateDof&) {
        // n <= D(m): the closed form is outside its validity region.
        std::string lambda_star, dof_text;
        if (args.lambda) {
          const double ls = sslab::solve_lambda_star(config, n, m, *args.lambda);
          lambda_star = format_double(ls);
          dof_text = format_double(sslab::dof(config, m, ls));
        }
        out << n << ',' << L << ',' << (args.lambda ? format_double(*args.lambda) : "") << ','
            << lambda_star << ',' << dof_text << ",,,"
            << format_double(sslab::tail_term(config, m)) << ",,degenerate\n";
      }
    }
  }
  write_file(args.out_path, out.str());
  return 0;
}

struct FitArgs {
  std::string grid_path, out_path;
  bool unweighted = false;
};

int run_fit(const FitArgs& args) {
  const sslab::ObservationGrid grid = sslab::load_grid(args.grid_path);
  sslab::FitOptions options;
  options.use_weights = !args.unweighted;
  const sslab::FitReport report = sslab::fit(grid, options);

  nlohmann::json doc;
  doc["provenance"] = {{"tool", "storage-scaling-lab"}, {"version", sslab::kVersion}, {"seed", 0}};
  doc["params"] = {{"err_star", report.params.err_star}, {"A", report.params.A},
                   {"B", report.params.B},               {"alpha", report.params.alpha},
                   {"beta", report.params.beta}};
  doc["rss"] = report.rss;
  doc["r_squared"] = report.r_squared;
  doc["n_obs"] = report.n_obs;
  doc["converged"] = report.converged;
  doc["starts_tried"] = report.starts_tried;
  write_file(args.out_path, doc.dump(2) + "\n");
  return 0;
}

sslab::ScalingLawParams load_fit_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sslab::ParseError("cannot open fit file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw sslab::ParseError(std::string("fit JSON: ") + e.what());
  }
  if (!doc.contains("params") || !doc["params"].is_object())
    throw sslab::ParseError("fit JSON: missing 'params' object");
  const auto& params_doc = doc["params"];
  static const char* kFields[] = {"err_star", "A", "B", "alpha", "beta"};
  for (const auto& [key, value] : params_doc.items()) {
    bool known = false;
    for (const char* f : kFields) known = known || key == f;
    if (!known) throw sslab::ParseError("fit JSON: unknown params key '" + key + "'");
  }
  sslab::ScalingLawParams params;
  try {
    params.err_star = params_doc.at("err_star").get<double>();
    params.A = params_doc.at("A").get<double>();
    params.B = params_doc.at("B").get<double>();
    params.alpha = params_doc.at("alpha").get<double>();
    params.beta = params_doc.at("beta").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw sslab::ParseError(std::string("fit JSON: ") + e.what());
  }
  params.validate();
  return params;
}

struct OptimizeArgs {
  std::string fit_path, out_path;
  std::vector<double> budgets;
  std::optional<double> fixed_level;
  std::optional<double> original_format;
};

int run_optimize(const OptimizeArgs& args) {
  const sslab::ScalingLawParams params = load_fit_params(args.fit_path);
  std::ostringstream out;
  out << "# " << provenance(0) << "\n";
  out << "s,n_star,L_star,n_int,predicted_err,scheme\n";
  const auto emit = [&](const sslab::Allocation& alloc) {
    out << format_double(alloc.s) << ',' << format_double(alloc.n_star) << ','
        << format_double(alloc.L_star) << ',' << alloc.n_int << ','
        << format_double(alloc.predicted_err) << ',' << sslab::scheme_name(alloc.scheme) << "\n";
  };
  for (double s : args.budgets) {
    emit(sslab::optimal_allocation(params, s));
    if (args.fixed_level) emit(sslab::fixed_level_plan(params, s, *args.fixed_level));
    if (args.original_format) emit(sslab::original_format_plan(params, s, *args.original_format));
  }
  write_file(args.out_path, out.str());
  return 0;
}

struct PlanArgs {
  std::string catalog_path, out_path;
  double budget = 0.0;
  std::uint64_t seed = 0;
  double fraction = 1.0;
  double level_min = 0.0;
  double level_max = 15.0;
};

int run_plan(const PlanArgs& args) {
  const sslab::ItemCatalog catalog = sslab::load_catalog(args.catalog_path);
  std::vector<std::string> subset;
  if (args.fraction < 1.0) {
    subset = sslab::stratified_subset(catalog, args.fraction, args.seed);
  } else {
    subset.reserve(catalog.items.size());
    for (const auto& item : catalog.items) subset.push_back(item.id);
  }
  const sslab::CompressionPlan plan = sslab::randomized_levels(
      catalog, subset, args.budget, args.level_min, args.level_max, args.seed);
  sslab::store_plan(plan, args.out_path, provenance(args.seed));
  return 0;
}

int run_exponents(const std::string& config_path) {
  const sslab::SpectrumConfig config = sslab::load_spectrum_config(config_path);
  const auto [alpha, beta] = sslab::theoretical_exponents(config);
  std::cout << "alpha = " << format_double(alpha) << "\n";
  std::cout << "beta = " << format_double(beta) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storage scaling laws: simulation, closed-form risk, fitting, and allocation"};
  app.require_subcommand(1);

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand(
      "simulate-sweep", "Monte Carlo ridge error over an (n, m) grid, written as CSV");
  simulate->add_option("config", simulate_args.config_path, "model config JSON")->required();
  simulate->add_option("--n-list", simulate_args.n_list, "sample counts")
      ->required()
      ->delimiter(',');
  simulate->add_option("--m-list", simulate_args.m_list, "truncation levels")
      ->required()
      ->delimiter(',');
  simulate->add_option("--replicates", simulate_args.replicates, "replicates per cell");
  simulate->add_option("--lambda-policy", simulate_args.lambda_policy,
                       "'oracle', 'theorem', 'boundary', 'matched', or a fixed value");
  simulate->add_option("--seed", simulate_args.seed, "override the config seed");
  simulate->add_option("--threads", simulate_args.threads, "worker threads (0 = auto)");
  simulate->add_flag("--zero-signal", simulate_args.zero_signal, "simulate with theta = 0");
  simulate->add_option("--out", simulate_args.out_path, "output grid CSV")->required();

  TheoryArgs theory_args;
  auto* theory = app.add_subcommand("predict-theory",
                                    "closed-form risk prediction over an (n, m) grid");
  theory->add_option("config", theory_args.config_path, "model config JSON")->required();
  theory->add_option("--n-list", theory_args.n_list, "sample counts")->required()->delimiter(',');
  theory->add_option("--m-list", theory_args.m_list, "truncation levels")
      ->required()
      ->delimiter(',');
  theory->add_option("--lambda", theory_args.lambda,
                     "fixed regularization (default: oracle grid minimum)");
  theory->add_option("--out", theory_args.out_path, "output CSV")->required();

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit the scaling surface to a grid CSV");
  fit_cmd->add_option("grid", fit_args.grid_path, "observation grid CSV")->required();
  fit_cmd->add_flag("--unweighted", fit_args.unweighted, "ignore stderr weights");
  fit_cmd->add_option("--out", fit_args.out_path, "output fit JSON")->required();

  OptimizeArgs optimize_args;
  auto* optimize = app.add_subcommand("optimize", "storage-optimal allocations per budget");
  optimize->add_option("fit", optimize_args.fit_path, "fit JSON")->required();
  optimize->add_option("--budgets", optimize_args.budgets, "storage budgets")
      ->required()
      ->delimiter(',');
  optimize->add_option("--fixed-level", optimize_args.fixed_level,
                       "also emit a fixed bytes-per-example baseline");
  optimize->add_option("--original-format", optimize_args.original_format,
                       "also emit an original-format baseline");
  optimize->add_option("--out", optimize_args.out_path, "output allocation CSV")->required();

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan-randomized",
                                  "randomized rank-to-level compression plan under a budget");
  plan->add_option("catalog", plan_args.catalog_path, "item catalog CSV")->required();
  plan->add_option("--budget", plan_args.budget, "target bytes")->required();
  plan->add_option("--seed", plan_args.seed, "permutation seed");
  plan->add_option("--fraction", plan_args.fraction, "stratified subset fraction (default 1)");
  plan->add_option("--level-min", plan_args.level_min, "initial minimum level");
  plan->add_option("--level-max", plan_args.level_max, "level cap");
  plan->add_option("--out", plan_args.out_path, "output plan CSV")->required();

  std::string exponents_config;
  auto* exponents = app.add_subcommand("exponents", "print the model-implied scaling exponents");
  exponents->add_option("config", exponents_config, "model config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(simulate_args);
    if (theory->parsed()) return run_theory(theory_args);
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (optimize->parsed()) return run_optimize(optimize_args);
    if (plan->parsed()) return run_plan(plan_args);
    if (exponents->parsed()) return run_exponents(exponents_config);
  } catch (const sslab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == sslab::ErrorKind::user_input ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
