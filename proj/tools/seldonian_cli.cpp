// seldonian: command-line front end for data generation, single fits,
// multi-trial experiments and the oracle cross-checks.
//
// Exit codes: 0 success, 1 usage error, 2 data/parse/IO error,
// 3 oracle-check failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "seldonian/baselines.hpp"
#include "seldonian/csv.hpp"
#include "seldonian/experiment.hpp"
#include "seldonian/regression.hpp"
#include "seldonian/synthgen.hpp"

using namespace seldonian;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kOracleFailed = 3;

struct SharedFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t trials = 0;
  std::vector<std::size_t> m;
  double delta = 0.05;
  double eps = 0.1;
  double lambda = 4.9;
  double b = 6.0;
  std::vector<std::string> algo;
  std::size_t threads = 1;
  bool timing = false;
  std::string kind;
};

struct Options {
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* m = nullptr;
  CLI::Option* delta = nullptr;
  CLI::Option* eps = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* b = nullptr;
  CLI::Option* algo = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* kind = nullptr;
};

Options add_experiment_flags(CLI::App* app, SharedFlags& f, bool with_algo) {
  Options o;
  app->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  o.seed = app->add_option("--seed", f.seed, "master seed");
  o.out = app->add_option("--out", f.out, "trial CSV path (summary goes beside it)");
  o.trials = app->add_option("--trials", f.trials, "trials per m")->check(CLI::PositiveNumber);
  o.m = app->add_option("--m", f.m, "sample sizes, comma separated")->delimiter(',');
  o.delta = app->add_option("--delta", f.delta, "admissible failure probability");
  o.eps = app->add_option("--eps", f.eps, "discrimination tolerance");
  o.threads = app->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--timing", f.timing, "record wall time per trial (breaks byte determinism)");
  if (with_algo) {
    o.lambda = app->add_option("--lambda", f.lambda, "penalty weight for sclr / qndlr-lambda");
    o.b = app->add_option("--b", f.b, "Hoeffding range for ndlr");
    o.algo = app->add_option("--algo", f.algo, "ls|sclr|ndlr|qndlr|qndlr-lambda|alg11")
                 ->delimiter(',');
    o.kind = app->add_option("--kind", f.kind, "regression-sweep|lambda-sweep");
  }
  return o;
}

ExperimentConfig build_config(const SharedFlags& f, const Options& o, ExperimentKind default_kind) {
  ExperimentConfig cfg;
  cfg.kind = default_kind;
  if (default_kind == ExperimentKind::rl_sweep) {
    cfg.trials = 200;
    cfg.m_values = {30, 180};
  }
  if (!f.config.empty()) cfg = load_config(f.config);
  if (default_kind == ExperimentKind::rl_sweep) cfg.kind = ExperimentKind::rl_sweep;
  if (o.kind && o.kind->count()) cfg.kind = parse_kind(f.kind);
  if (o.seed->count()) cfg.seed = f.seed;
  if (o.out->count()) cfg.out = f.out;
  if (o.trials->count()) cfg.trials = f.trials;
  if (o.m->count()) cfg.m_values = f.m;
  if (o.delta->count()) cfg.delta = f.delta;
  if (o.eps->count()) cfg.epsilon = f.eps;
  if (o.threads->count()) cfg.threads = f.threads;
  if (o.lambda && o.lambda->count()) cfg.lambda = f.lambda;
  if (o.b && o.b->count()) cfg.range = f.b;
  if (o.algo && o.algo->count()) {
    cfg.algorithms.clear();
    for (const auto& a : f.algo) cfg.algorithms.push_back(parse_algorithm(a));
  }
  if (f.timing) cfg.record_wall_time = true;
  return cfg;
}

int run_and_report(const ExperimentConfig& cfg) {
  if (cfg.out.empty()) {
    auto result = run_experiment(cfg);
    write_trials_csv(std::cout, result);
    std::cerr << "\n";
    write_summary_csv(std::cerr, result);
    return 0;
  }
  auto result = run_experiment_to_files(cfg);
  write_summary_csv(std::cout, result);
  return 0;
}

void print_theta(std::ostream& out, const Weights& theta) {
  for (std::size_t k = 0; k < theta.size(); ++k) out << (k ? "," : "") << format_double(theta[k]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seldonian regression and policy-selection toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate the illustrative dataset as CSV");
  std::size_t synth_m = 1000;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--m", synth_m, "rows")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--out", synth_out, "output path (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit one algorithm to a CSV dataset");
  std::string fit_data;
  std::string fit_algo = "qndlr";
  double fit_delta = 0.05, fit_eps = 0.1, fit_lambda = 4.9, fit_b = 6.0;
  std::uint64_t fit_seed = 0;
  fit->add_option("--data", fit_data, "dataset CSV (f1..fk,y,t)")->required();
  fit->add_option("--algo", fit_algo, "ls|sclr|ndlr|qndlr|qndlr-lambda|alg11");
  fit->add_option("--delta", fit_delta);
  fit->add_option("--eps", fit_eps);
  fit->add_option("--lambda", fit_lambda);
  fit->add_option("--b", fit_b, "Hoeffding range for ndlr");
  fit->add_option("--seed", fit_seed, "search seed");

  // experiment / rl-experiment
  auto* exp = app.add_subcommand("experiment", "multi-trial regression sweep");
  SharedFlags exp_flags;
  const Options exp_opts = add_experiment_flags(exp, exp_flags, true);
  auto* rl = app.add_subcommand("rl-experiment", "multi-trial policy-selection sweep on the toy environment");
  SharedFlags rl_flags;
  const Options rl_opts = add_experiment_flags(rl, rl_flags, false);

  // oracle-check
  auto* oracle = app.add_subcommand("oracle-check", "analytic versus Monte Carlo cross-checks");
  std::uint64_t oracle_seed = 0;
  oracle->add_option("--seed", oracle_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*synth) {
      const Dataset d = gen_illustrative({synth_m, synth_seed});
      if (synth_out.empty()) {
        write_dataset_csv(std::cout, d);
      } else {
        std::ofstream out(synth_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + synth_out);
        write_dataset_csv(out, d);
      }
      return 0;
    }

    if (*fit) {
      const Algorithm algo = parse_algorithm(fit_algo);
      const Dataset d = ingest_csv(fit_data);
      SearchConfig search;
      search.seed = fit_seed;
      std::optional<Weights> theta;
      std::vector<double> bounds;
      switch (algo) {
        case Algorithm::ls: theta = least_squares(d).theta; break;
        case Algorithm::sclr: theta = sclr(d, fit_lambda, search); break;
        default: {
          RegressionOutcome out;
          if (algo == Algorithm::ndlr) {
            out = ndlr(d, fit_delta, fit_eps, fit_b, search);
          } else if (algo == Algorithm::qndlr) {
            out = qndlr(d, fit_delta, fit_eps, 0.0, search);
          } else if (algo == Algorithm::qndlr_lambda) {
            out = qndlr(d, fit_delta, fit_eps, fit_lambda, search);
          } else {
            auto cs = absolute_error_difference_constraints(fit_eps, fit_delta);
            auto ps = absolute_prediction_difference_constraints(fit_eps, fit_delta);
            cs.insert(cs.end(), ps.begin(), ps.end());
            out = quasi_seldonian_general(d, cs, negative_mse_utility(0.0), search);
          }
          theta = out.solution;
          bounds = out.safety_bounds;
          if (!out.diagnostic.empty()) std::cerr << out.diagnostic << "\n";
        }
      }
      if (!theta) {
        std::cout << "NSF\n";
      } else {
        std::cout << "theta=";
        print_theta(std::cout, *theta);
        std::cout << "\n";
      }
      if (!bounds.empty()) {
        std::cout << "safety_bounds=";
        print_theta(std::cout, bounds);
        std::cout << "\n";
      }
      return 0;
    }

    if (*exp) return run_and_report(build_config(exp_flags, exp_opts, ExperimentKind::regression_sweep));
    if (*rl) return run_and_report(build_config(rl_flags, rl_opts, ExperimentKind::rl_sweep));

    if (*oracle) {
      bool ok = true;
      for (const auto& c : oracle_check(oracle_seed)) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << format_double(c.measured)
                  << " required " << c.requirement << "\n";
        ok = ok && c.pass;
      }
      return ok ? 0 : kOracleFailed;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
