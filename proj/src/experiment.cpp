#include "seldonian/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "json.hpp"

#include "seldonian/baselines.hpp"
#include "seldonian/bounds.hpp"
#include "seldonian/csv.hpp"
#include "seldonian/random.hpp"
#include "seldonian/regression.hpp"
#include "seldonian/synthgen.hpp"

namespace seldonian {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::pair<Algorithm, const char*> kAlgorithmNames[] = {
    {Algorithm::ls, "ls"},       {Algorithm::sclr, "sclr"},
    {Algorithm::ndlr, "ndlr"},   {Algorithm::qndlr, "qndlr"},
    {Algorithm::qndlr_lambda, "qndlr-lambda"}, {Algorithm::alg11, "alg11"},
};

const std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::regression_sweep, "regression-sweep"},
    {ExperimentKind::lambda_sweep, "lambda-sweep"},
    {ExperimentKind::rl_sweep, "rl-sweep"},
    {ExperimentKind::oracle_check, "oracle-check"},
};

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  throw std::invalid_argument("unknown experiment kind");
}

std::string to_string(Algorithm algo) {
  for (const auto& [a, name] : kAlgorithmNames) {
    if (a == algo) return name;
  }
  throw std::invalid_argument("unknown algorithm");
}

ExperimentKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw std::invalid_argument("unknown experiment kind: " + std::string(name));
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kAlgorithmNames) {
    if (name == n) return a;
  }
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (kind == ExperimentKind::oracle_check) return;
  if (m_values.empty()) throw std::invalid_argument("no m values");
  for (auto m : m_values) {
    if (m < 10) throw std::invalid_argument("every m must be at least 10");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(range > 0.0)) throw std::invalid_argument("range b must be positive");
  if (!(barrier_range >= 0.0)) throw std::invalid_argument("barrier range must be non-negative");
  if (kind == ExperimentKind::regression_sweep && algorithms.empty()) {
    throw std::invalid_argument("no algorithms selected");
  }
  if (kind == ExperimentKind::lambda_sweep) {
    if (lambdas.empty()) throw std::invalid_argument("empty lambda grid");
    for (double l : lambdas) {
      if (!(l >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    }
  }
  if (!(search.candidate_fraction > 0.0 && search.candidate_fraction < 1.0)) {
    throw std::invalid_argument("candidate fraction must lie in (0, 1)");
  }
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
}

ExperimentConfig parse_config(std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

  ExperimentConfig cfg;
  try {
    if (j.contains("kind")) cfg.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("algorithms")) {
      cfg.algorithms.clear();
      for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (j.contains("m_values")) cfg.m_values = j.at("m_values").get<std::vector<std::size_t>>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<std::size_t>();
    if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
    if (j.contains("lambdas")) cfg.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (j.contains("range")) cfg.range = j.at("range").get<double>();
    if (j.contains("barrier_range")) cfg.barrier_range = j.at("barrier_range").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<std::size_t>();
    if (j.contains("record_wall_time")) cfg.record_wall_time = j.at("record_wall_time").get<bool>();
    if (j.contains("search")) {
      const auto& s = j.at("search");
      auto& o = cfg.search;
      if (s.contains("candidate_fraction")) o.candidate_fraction = s.at("candidate_fraction").get<double>();
      if (s.contains("max_evaluations")) o.max_evaluations = s.at("max_evaluations").get<std::size_t>();
      if (s.contains("restarts")) o.restarts = s.at("restarts").get<std::size_t>();
      if (s.contains("value_tolerance")) o.value_tolerance = s.at("value_tolerance").get<double>();
      if (s.contains("step_tolerance")) o.step_tolerance = s.at("step_tolerance").get<double>();
      if (s.contains("initial_step")) o.initial_step = s.at("initial_step").get<double>();
      if (s.contains("shuffle")) o.shuffle = s.at("shuffle").get<bool>();
      if (s.contains("barrier")) o.barrier = s.at("barrier").get<double>();
    }
    if (j.contains("environment")) {
      const auto& e = j.at("environment");
      auto& p = cfg.environment;
      if (e.contains("base")) p.base = e.at("base").get<double>();
      if (e.contains("slope_p1")) p.slope_p1 = e.at("slope_p1").get<double>();
      if (e.contains("slope_p2")) p.slope_p2 = e.at("slope_p2").get<double>();
      if (e.contains("noise_sd")) p.noise_sd = e.at("noise_sd").get<double>();
      if (e.contains("samples_per_day")) p.samples_per_day = e.at("samples_per_day").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct RegressionJob {
  std::string label;
  Algorithm algo;
  double lambda;
};

std::vector<RegressionJob> regression_jobs(const ExperimentConfig& cfg) {
  std::vector<RegressionJob> jobs;
  if (cfg.kind == ExperimentKind::lambda_sweep) {
    for (double l : cfg.lambdas) jobs.push_back({"sclr(" + format_double(l) + ")", Algorithm::sclr, l});
  } else {
    for (auto a : cfg.algorithms) jobs.push_back({to_string(a), a, cfg.lambda});
  }
  return jobs;
}

void fill_regression_truth(TrialRecord& rec, const Dataset& d, double epsilon) {
  if (!rec.found) return;
  rec.true_d = true_disc_stat(rec.theta);
  rec.true_mse = true_mse(rec.theta);
  rec.violation = std::abs(*rec.true_d) > epsilon;
  if (d.count_type0() > 0 && d.count_type1() > 0) rec.sample_d = sample_disc_stat(rec.theta, d);
}

TrialRecord run_regression_job(const RegressionJob& job, const Dataset& d,
                               const ExperimentConfig& cfg, std::uint64_t search_seed) {
  TrialRecord rec;
  rec.algo = job.label;
  SearchConfig search = cfg.search;
  search.seed = search_seed;
  const auto start = Clock::now();

  auto take = [&rec](const RegressionOutcome& out) {
    rec.found = out.found();
    if (out.found()) rec.theta = *out.solution;
    if (!out.safety_bounds.empty()) {
      rec.safety_bound = *std::max_element(out.safety_bounds.begin(), out.safety_bounds.end());
    }
  };

  switch (job.algo) {
    case Algorithm::ls:
      rec.theta = least_squares(d).theta;
      rec.found = true;
      break;
    case Algorithm::sclr:
      rec.theta = sclr(d, job.lambda, search);
      rec.found = true;
      break;
    case Algorithm::ndlr:
      take(ndlr(d, cfg.delta, cfg.epsilon, cfg.range, search));
      break;
    case Algorithm::qndlr:
      take(qndlr(d, cfg.delta, cfg.epsilon, 0.0, search, cfg.barrier_range));
      break;
    case Algorithm::qndlr_lambda:
      take(qndlr(d, cfg.delta, cfg.epsilon, job.lambda, search, cfg.barrier_range));
      break;
    case Algorithm::alg11: {
      auto constraints = absolute_error_difference_constraints(cfg.epsilon, cfg.delta);
      auto pred = absolute_prediction_difference_constraints(cfg.epsilon, cfg.delta);
      constraints.insert(constraints.end(), pred.begin(), pred.end());
      take(quasi_seldonian_general(d, constraints, negative_mse_utility(0.0), search));
      break;
    }
  }
  if (cfg.record_wall_time) rec.wall_ms = elapsed_ms(start);
  fill_regression_truth(rec, d, cfg.epsilon);
  return rec;
}

// Runs `work(job)` for job in [0, count) over a bounded pool; each job writes
// only its own slot, so the result order never depends on scheduling.
template <typename Work>
void for_each_job(std::size_t count, std::size_t threads, Work&& work) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t m, std::size_t trial) {
  return derive_seed(derive_seed(master, m), trial);
}

std::vector<TrialRecord> run_regression(const ExperimentConfig& cfg) {
  const auto jobs = regression_jobs(cfg);
  const std::size_t per_m = cfg.trials;
  const std::size_t total = cfg.m_values.size() * per_m;
  std::vector<std::vector<TrialRecord>> slots(total);

  for_each_job(total, cfg.threads, [&](std::size_t i) {
    const std::size_t m = cfg.m_values[i / per_m];
    const std::size_t trial = i % per_m;
    const std::uint64_t seed = trial_seed(cfg.seed, m, trial);
    const Dataset d = gen_illustrative({m, seed});
    auto& out = slots[i];
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      TrialRecord rec = run_regression_job(jobs[j], d, cfg, derive_seed(seed, j));
      rec.trial = trial;
      rec.m = m;
      out.push_back(std::move(rec));
    }
  });

  std::vector<TrialRecord> records;
  records.reserve(total * jobs.size());
  for (auto& s : slots) {
    for (auto& r : s) records.push_back(std::move(r));
  }
  return records;
}

std::vector<TrialRecord> run_rl(const ExperimentConfig& cfg) {
  const ToyEnvironment env(cfg.environment);
  const BoxDistribution behavior = env.admissible();
  const RLProblem problem(behavior, tiled_candidates(behavior), {cfg.delta});

  std::vector<double> cand_r, cand_r1;
  for (const auto& c : problem.candidates()) {
    cand_r.push_back(env.expected_return(c));
    cand_r1.push_back(env.expected_constraint_return(c));
  }
  const double behavior_r = env.expected_return(behavior);
  const double behavior_r1 = env.expected_constraint_return(behavior);

  const std::size_t per_m = cfg.trials;
  const std::size_t total = cfg.m_values.size() * per_m;
  std::vector<std::array<TrialRecord, 2>> slots(total);

  for_each_job(total, cfg.threads, [&](std::size_t i) {
    const std::size_t m = cfg.m_values[i / per_m];
    const std::size_t trial = i % per_m;
    Rng rng(trial_seed(cfg.seed, m, trial));
    const auto episodes = env.sample_batch(behavior, m, rng);

    auto record = [&](const char* name, auto&& select) {
      TrialRecord rec;
      rec.trial = trial;
      rec.m = m;
      rec.algo = name;
      const auto start = Clock::now();
      const RLOutcome out = select(episodes, problem);
      if (cfg.record_wall_time) rec.wall_ms = elapsed_ms(start);
      rec.behavior_r1 = behavior_r1;
      rec.found = out.found();
      if (out.found()) {
        const std::size_t k = *out.chosen;
        rec.index = k;
        rec.true_r = cand_r[k];
        rec.true_r1 = cand_r1[k];
        rec.violation = cand_r1[k] < behavior_r1;
      }
      return rec;
    };
    slots[i][0] = record("quasi-seldonian", [](auto& e, auto& p) { return quasi_seldonian_rl(e, p); });
    slots[i][1] = record("unconstrained", [](auto& e, auto& p) { return unconstrained_rl(e, p); });
  });
  (void)behavior_r;

  std::vector<TrialRecord> records;
  records.reserve(total * 2);
  for (auto& s : slots) {
    for (auto& r : s) records.push_back(std::move(r));
  }
  return records;
}

double mean_or_nan(double sum, std::size_t n) { return n ? sum / static_cast<double>(n) : kNaN; }

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& trials) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<std::string, std::size_t>, std::size_t> where;
  struct Sums {
    double mse = 0, abs_d = 0, d = 0, r = 0, r1 = 0;
    std::size_t n_mse = 0, n_d = 0, n_r = 0, n_r1 = 0;
  };
  std::vector<Sums> sums;

  for (const auto& t : trials) {
    auto key = std::make_pair(t.algo, t.m);
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, rows.size()).first;
      SummaryRow row;
      row.algo = t.algo;
      row.m = t.m;
      rows.push_back(row);
      sums.emplace_back();
    }
    auto& row = rows[it->second];
    auto& s = sums[it->second];
    ++row.trials;
    if (!t.found) continue;
    ++row.solutions;
    if (t.violation) ++row.violations;
    if (t.true_mse) { s.mse += *t.true_mse; ++s.n_mse; }
    if (t.true_d) { s.d += *t.true_d; s.abs_d += std::abs(*t.true_d); ++s.n_d; }
    if (t.true_r) { s.r += *t.true_r; ++s.n_r; }
    if (t.true_r1) { s.r1 += *t.true_r1; ++s.n_r1; }
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    const auto& s = sums[i];
    row.solution_rate = static_cast<double>(row.solutions) / static_cast<double>(row.trials);
    row.violation_rate = static_cast<double>(row.violations) / static_cast<double>(row.trials);
    row.violation_rate_returned = mean_or_nan(static_cast<double>(row.violations), row.solutions);
    row.mean_true_mse = mean_or_nan(s.mse, s.n_mse);
    row.mean_true_abs_d = mean_or_nan(s.abs_d, s.n_d);
    row.mean_true_d = mean_or_nan(s.d, s.n_d);
    row.mean_true_r = mean_or_nan(s.r, s.n_r);
    row.mean_true_r1 = mean_or_nan(s.r1, s.n_r1);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.kind = cfg.kind;
  switch (cfg.kind) {
    case ExperimentKind::regression_sweep:
    case ExperimentKind::lambda_sweep:
      result.trials = run_regression(cfg);
      break;
    case ExperimentKind::rl_sweep:
      result.trials = run_rl(cfg);
      break;
    case ExperimentKind::oracle_check:
      throw std::invalid_argument("oracle-check is not a trial experiment");
  }
  result.summary = summarize(result.trials);
  return result;
}

std::filesystem::path summary_path(const std::filesystem::path& trials_path) {
  auto p = trials_path;
  p.replace_filename(trials_path.stem().string() + ".summary.csv");
  return p;
}

ExperimentResult run_experiment_to_files(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.out.empty()) throw std::invalid_argument("no output path");
  std::ofstream trials_out(cfg.out, std::ios::binary | std::ios::trunc);
  if (!trials_out) throw std::runtime_error("cannot write " + cfg.out.string());
  const auto spath = summary_path(cfg.out);
  std::ofstream summary_out(spath, std::ios::binary | std::ios::trunc);
  if (!summary_out) throw std::runtime_error("cannot write " + spath.string());

  auto result = run_experiment(cfg);
  write_trials_csv(trials_out, result);
  write_summary_csv(summary_out, result);
  trials_out.flush();
  summary_out.flush();
  if (!trials_out || !summary_out) throw std::runtime_error("write failed");
  return result;
}

void write_trials_csv(std::ostream& out, const ExperimentResult& result) {
  if (result.kind == ExperimentKind::rl_sweep) {
    out << "trial,m,algo,outcome,index,true_r,true_r1,behavior_r1,violation,wall_ms\n";
    for (const auto& t : result.trials) {
      out << t.trial << ',' << t.m << ',' << t.algo << ',' << (t.found ? "solution" : "nsf") << ','
          << (t.index ? std::to_string(*t.index) : "") << ',' << opt_cell(t.true_r) << ','
          << opt_cell(t.true_r1) << ',' << opt_cell(t.behavior_r1) << ',' << (t.violation ? 1 : 0)
          << ',' << format_double(t.wall_ms) << '\n';
    }
    return;
  }
  std::size_t width = 0;
  for (const auto& t : result.trials) width = std::max(width, t.theta.size());
  out << "trial,m,algo,outcome";
  for (std::size_t k = 0; k < width; ++k) out << ",theta" << (k + 1);
  out << ",true_d,true_mse,wall_ms,sample_d,safety_bound\n";
  for (const auto& t : result.trials) {
    out << t.trial << ',' << t.m << ',' << t.algo << ',' << (t.found ? "solution" : "nsf");
    for (std::size_t k = 0; k < width; ++k) {
      out << ',';
      if (t.found && k < t.theta.size()) out << format_double(t.theta[k]);
    }
    out << ',' << opt_cell(t.true_d) << ',' << opt_cell(t.true_mse) << ','
        << format_double(t.wall_ms) << ',' << opt_cell(t.sample_d) << ','
        << opt_cell(t.safety_bound) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "algo,m,trials,solutions,solution_rate,violations,violation_rate,"
         "violation_rate_returned,mean_true_mse,mean_true_abs_d,mean_true_d,mean_true_r,"
         "mean_true_r1\n";
  for (const auto& s : result.summary) {
    out << s.algo << ',' << s.m << ',' << s.trials << ',' << s.solutions << ','
        << format_double(s.solution_rate) << ',' << s.violations << ','
        << format_double(s.violation_rate) << ',' << format_double(s.violation_rate_returned) << ','
        << format_double(s.mean_true_mse) << ',' << format_double(s.mean_true_abs_d) << ','
        << format_double(s.mean_true_d) << ',' << format_double(s.mean_true_r) << ','
        << format_double(s.mean_true_r1) << '\n';
  }
}

namespace {

OracleCheck check_near(std::string name, double measured, double expected, double tol) {
  std::ostringstream req;
  req << "|x - " << format_double(expected) << "| <= " << format_double(tol);
  return {std::move(name), measured, req.str(), std::abs(measured - expected) <= tol};
}

OracleCheck check_at_least(std::string name, double measured, double floor) {
  return {std::move(name), measured, ">= " + format_double(floor), measured >= floor};
}

// Argmin of true_mse: a coarse grid over [-2, 2]^2, then shrinking local grids.
Weights grid_argmin_true_mse() {
  Weights best{0.0, 0.0};
  double best_v = true_mse(best);
  double step = 0.01;
  double lo0 = -2.0, lo1 = -2.0;
  std::size_t n = 401;
  for (int round = 0; round < 6; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Weights th{lo0 + step * static_cast<double>(i), lo1 + step * static_cast<double>(j)};
        const double v = true_mse(th);
        if (v < best_v) {
          best_v = v;
          best = th;
        }
      }
    }
    lo0 = best[0] - step;
    lo1 = best[1] - step;
    step /= 10.0;
    n = 21;
  }
  return best;
}

}  // namespace

std::vector<OracleCheck> oracle_check(std::uint64_t seed) {
  std::vector<OracleCheck> report;
  Rng master(seed);

  // 2/3 is not representable, so "exact" means up to one rounding step.
  report.push_back(check_near("true_disc_stat(2/3,0)", true_disc_stat(bayes_optimal()), -2.0 / 3.0, 1e-15));
  {
    const auto th = grid_argmin_true_mse();
    const double dist = std::hypot(th[0] - 2.0 / 3.0, th[1]);
    report.push_back({"argmin true_mse distance to (2/3,0)", dist, "<= 0.001", dist <= 1e-3});
  }
  {
    struct Probe { double conf; std::size_t dof; double value; };
    const Probe probes[] = {
        {0.95, 1, 6.3138}, {0.975, 10, 2.2281}, {0.95, 5, 2.0150}, {0.99, 20, 2.5280},
        {0.975, 30, 2.0423}, {0.95, 120, 1.6577}, {0.995, 2, 9.9248}, {0.9, 3, 1.6377},
    };
    double worst = 0.0;
    for (const auto& p : probes) worst = std::max(worst, std::abs(t_quantile(p.conf, p.dof) - p.value));
    report.push_back({"t-quantile probes max abs error", worst, "< 0.001", worst < 1e-3});
  }
  for (double delta : {0.05, 0.1}) {
    Rng rng = master.split(delta < 0.075 ? 1 : 2);
    const std::size_t reps = 10000, n = 20;
    std::size_t covered = 0;
    std::vector<double> z(n);
    for (std::size_t r = 0; r < reps; ++r) {
      for (auto& v : z) v = rng.uniform();
      if (hoeffding_upper(z, 1.0, delta) >= 0.5) ++covered;
    }
    report.push_back(check_at_least("hoeffding coverage delta=" + format_double(delta),
                                    static_cast<double>(covered) / reps, 1.0 - delta));
  }
  {
    Rng rng = master.split(3);
    const std::size_t reps = 10000, n = 30;
    std::size_t misses = 0;
    std::vector<double> z(n);
    for (std::size_t r = 0; r < reps; ++r) {
      for (auto& v : z) v = rng.normal(1.0, 2.0);
      if (t_upper(z, 0.05) < 1.0) ++misses;
    }
    report.push_back(check_near("t-bound miss rate delta=0.05", static_cast<double>(misses) / reps,
                                0.05, 0.015));
  }
  {
    // Five policies, uniform behavior, candidate mass on three of them.
    const double behavior = 0.2;
    const double cand[5] = {0.0, 0.2, 0.3, 0.5, 0.0};
    const double mean_ret[5] = {-1.0, 0.5, 2.0, -0.5, 3.0};
    const double overlap = 0.6;
    double truth = 0.0;
    for (int p = 0; p < 5; ++p) truth += cand[p] * mean_ret[p];

    Rng rng = master.split(4);
    const std::size_t reps = 10000, n = 20;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t used = 0;
    std::vector<WeightedReturn> samples(n);
    while (used < reps) {
      bool any = false;
      for (auto& s : samples) {
        const int p = static_cast<int>(rng.uniform() * 5.0);
        s = {cand[p], behavior, rng.normal(mean_ret[p], 1.0)};
        any = any || cand[p] != 0.0;
      }
      if (!any) continue;
      const double est = in_support_importance_estimate(samples, overlap);
      sum += est;
      sum_sq += est * est;
      ++used;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum_sq / reps - mean * mean) / (reps - 1));
    report.push_back(check_near("discrete importance estimate mean", mean, truth, 3.0 * se));
  }
  {
    const std::size_t m = 1000000;
    const Dataset d = gen_illustrative({m, derive_seed(seed, 5)});
    double t1 = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, y0 = 0;
    std::size_t n0 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = d.x(i)[0], y = d.y(i);
      t1 += d.t(i);
      sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
      if (d.t(i) == 0) { y0 += y; ++n0; }
    }
    const double md = static_cast<double>(m);
    const double cov = sxy / md - sx / md * sy / md;
    const double vx = sxx / md - sx / md * sx / md;
    const double vy = syy / md - sy / md * sy / md;
    report.push_back(check_near("synthgen P(T=1)", t1 / md, 0.5, 0.005));
    report.push_back(check_near("synthgen E[Y|T=0]", y0 / static_cast<double>(n0), 1.0, 0.01));
    report.push_back(check_near("synthgen corr(X,Y)", cov / std::sqrt(vx * vy), 2.0 / std::sqrt(6.0), 0.005));
    const Weights th{0.5, 0.3};
    report.push_back(check_near("true_mse vs sample at (0.5,0.3)", sample_mse(th, d), true_mse(th), 0.02));
  }
  {
    const ToyEnvironment env;
    const Policy p{0.3, 0.6};
    Rng rng = master.split(6);
    const std::size_t n = 40000;
    double s = 0, ss = 0, s1 = 0, ss1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto e = env.episode(p, rng);
      s += e.ret; ss += e.ret * e.ret;
      s1 += e.constraint_returns[0]; ss1 += e.constraint_returns[0] * e.constraint_returns[0];
    }
    const double nd = static_cast<double>(n);
    const double se = std::sqrt((ss / nd - (s / nd) * (s / nd)) / nd);
    const double se1 = std::sqrt((ss1 / nd - (s1 / nd) * (s1 / nd)) / nd);
    report.push_back(check_near("toy env E[r] at (0.3,0.6)", s / nd, env.expected_return(p), 4.0 * se));
    report.push_back(check_near("toy env E[r1] at (0.3,0.6)", s1 / nd,
                                env.expected_constraint_return(p), 4.0 * se1));
  }
  return report;
}

}  // namespace seldonian
