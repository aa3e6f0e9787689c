// Command-line front end: instance generation, policy runs, oracles, stochastic
// models, sweeps and figure tables.
//
// Exit codes: 0 ok, 1 usage, 2 validation or input error, 3 oracle budget.

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "capprov/engine.hpp"
#include "capprov/experiment.hpp"
#include "capprov/instances.hpp"
#include "capprov/io.hpp"
#include "capprov/oracle.hpp"
#include "capprov/policies.hpp"
#include "capprov/stochastic.hpp"

using namespace capprov;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kBudget = 3 };

// Writes to the named file, or stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ParseError("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size()) throw SpecError("`" + item + "` is not a number");
    out.push_back(v);
  }
  return out;
}

nlohmann::json to_json(const StochasticCostEstimate& e) {
  return {{"mean_occupancy", e.mean_occupancy}, {"switch_cost_rate", e.switch_cost_rate},
          {"total", e.total},                   {"ci_halfwidth", e.ci_halfwidth},
          {"samples", e.samples},               {"horizon", e.horizon},
          {"truncation", e.truncation},         {"ci_wide", e.ci_wide},
          {"overflow", e.overflow}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity provisioning laboratory: online server-count policies, offline optima and stochastic models"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string output;
  bool verbose = false;

  // gen
  auto* gen = app.add_subcommand("gen", "Write a generated instance in the `t w` text format");
  std::string gen_spec;
  gen->add_option("spec", gen_spec, "Generator spec, e.g. batch:N=4 or random:rate=5,T=100")->required();
  gen->add_option("--seed", seed, "Seed for random generators");
  gen->add_option("-o,--output", output, "Output file (stdout by default)");

  // run
  auto* run = app.add_subcommand("run", "Run policies on an instance and report costs");
  ExperimentConfig cfg;
  std::vector<std::string> oracles;
  std::string csv_path, json_path;
  run->add_option("--instance", cfg.instance, "Generator spec or instance file")->required();
  run->add_option("--policy", cfg.policies, "Policy spec, repeatable (e.g. quad_alg:beta=1)")->required();
  run->add_option("--model", cfg.model, "Cost model, e.g. quad:alpha=1 or linear:alpha=0.5");
  run->add_option("--oracle", oracles, "dp and/or dual")->check(CLI::IsMember({"dp", "dual"}));
  run->add_option("--beta", cfg.dual_beta, "beta of the dual certificate");
  run->add_option("--seed", cfg.seed, "Seed for random instances");
  run->add_option("--repetitions", cfg.repetitions, "Seeds seed..seed+n-1 for random instances");
  run->add_option("--csv", csv_path, "Write the CSV report here");
  run->add_option("--json", json_path, "Write the JSON report here (stdout when neither output is given)");
  run->add_flag("-v,--verbose", verbose, "Stream per-slot JSON events to stderr");

  // opt
  auto* opt = app.add_subcommand("opt", "Offline optimum by dynamic programming");
  std::string opt_instance, opt_model = "quad:alpha=1", trace_path;
  std::int64_t t_cap = 0, s_cap = 0;
  opt->add_option("--instance", opt_instance, "Generator spec or instance file")->required();
  opt->add_option("--model", opt_model, "Cost model");
  opt->add_option("--seed", seed, "Seed for random instances");
  opt->add_option("--t-cap", t_cap, "Horizon (default: last arrival + total work)");
  opt->add_option("--s-cap", s_cap, "Largest server count (default: job count)");
  opt->add_option("--trace", trace_path, "Write the optimal trace CSV here");

  // dual
  auto* dual = app.add_subcommand("dual", "Dual certificate of quad_alg");
  std::string dual_instance;
  double dual_alpha = 1.0, dual_beta = 2.177;
  dual->add_option("--instance", dual_instance, "Generator spec or instance file")->required();
  dual->add_option("--alpha", dual_alpha, "Switching weight");
  dual->add_option("--beta", dual_beta, "quad_alg beta");
  dual->add_option("--seed", seed, "Seed for random instances");

  // stochastic
  auto* sto = app.add_subcommand("stochastic", "Continuous-time birth-death models");
  std::string sto_policy = "alg1", sto_mode = "analytic";
  double lambda = 1.0, sto_alpha = 1.0, c1 = 1.0, c2 = 1.0;
  std::int64_t events = 1'000'000, cycles = 2000;
  sto->add_option("--policy", sto_policy, "alg1, alg2 or alg3")->check(CLI::IsMember({"alg1", "alg2", "alg3"}));
  sto->add_option("--lambda", lambda, "Arrival rate");
  sto->add_option("--alpha", sto_alpha, "Switching weight");
  sto->add_option("--mode", sto_mode, "analytic or simulate")->check(CLI::IsMember({"analytic", "simulate"}));
  sto->add_option("--seed", seed, "RNG seed");
  sto->add_option("--events", events, "Event budget for CTMC simulation");
  sto->add_option("--cycles", cycles, "Cycle budget for the gated policy");
  sto->add_option("--c1", c1, "Gated policy: U = ceil(c1 lambda^(2/3))");
  sto->add_option("--c2", c2, "Gated policy: mu = lambda + c2 lambda^(1/3)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Grid studies: a_gamma ratios or gated-policy scaling");
  std::string family = "a_gamma", gammas = "0,0.25,0.5", alphas = "16,81,256", lambdas = "100,1000,10000,100000";
  std::int64_t sweep_n = 16, sweep_t = 1;
  double sweep_alpha = 1.0;
  sweep->add_option("--family", family, "a_gamma or alg3")->check(CLI::IsMember({"a_gamma", "alg3"}));
  sweep->add_option("--gammas", gammas, "Comma-separated gamma grid");
  sweep->add_option("--alphas", alphas, "Comma-separated alpha grid");
  sweep->add_option("--N", sweep_n, "Jobs per arrival slot");
  sweep->add_option("--T", sweep_t, "Arrival slots (1 gives sigma1, more gives sigma2)");
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda grid");
  sweep->add_option("--alpha", sweep_alpha, "Switching weight for alg3");
  sweep->add_option("--c1", c1, "Gated policy c1");
  sweep->add_option("--c2", c2, "Gated policy c2");
  sweep->add_option("--seed", seed, "Unused by deterministic sweeps; accepted for uniformity");
  sweep->add_option("-o,--output", output, "Output CSV");

  // reproduce-figure
  auto* fig = app.add_subcommand("reproduce-figure", "Normalized-cost table of one figure");
  std::string figure_id, rates;
  int seed_count = 3;
  std::int64_t horizon = 2000;
  fig->add_option("--figure", figure_id, "Figure id")->required()->check(CLI::IsMember(figure_ids()));
  fig->add_option("--seed", seed, "First seed");
  fig->add_option("--seeds", seed_count, "Number of seeds averaged");
  fig->add_option("--T", horizon, "Arrival horizon in slots");
  fig->add_option("--rates", rates, "Comma-separated arrival rates (figure default if empty)");
  fig->add_option("-o,--output", output, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const auto instance = generate(parse_generator(gen_spec), seed);
      Output out(output);
      write_instance(out.stream(), instance);
    } else if (*run) {
      cfg.oracle_dp = std::find(oracles.begin(), oracles.end(), "dp") != oracles.end();
      cfg.oracle_dual = std::find(oracles.begin(), oracles.end(), "dual") != oracles.end();
      cfg.dp_budget = dp_budget_from_env();
      if (verbose) {
        const auto model = parse_model(cfg.model);
        const auto instance = load_instance(cfg.instance, cfg.seed);
        SimOptions opts;
        opts.event_stream = &std::cerr;
        for (const auto& p : cfg.policies) simulate(instance, parse_policy(p, model.alpha), opts);
      }
      const auto report = run_experiment(cfg);
      if (!csv_path.empty()) {
        Output out(csv_path);
        write_report_csv(out.stream(), report);
      }
      if (!json_path.empty() || csv_path.empty()) {
        Output out(json_path);
        out.stream() << to_json(report).dump(2) << '\n';
      }
      for (const auto& ir : report.instances)
        if (!ir.opt_error.empty()) std::cerr << "oracle: " << ir.opt_error << '\n';
      if (report.budget_exceeded) return kBudget;
    } else if (*opt) {
      const auto model = parse_model(opt_model);
      const auto instance = load_instance(opt_instance, seed);
      DpConfig dp;
      dp.work_budget = dp_budget_from_env();
      if (t_cap > 0) dp.t_cap = t_cap;
      if (s_cap > 0) dp.s_cap = s_cap;
      const auto res = dp_opt(instance, model, dp);
      auto j = to_json(res.breakdown, model);
      j["cost"] = res.cost;
      j["instance"] = instance.id();
      std::cout << j.dump(2) << '\n';
      if (!trace_path.empty()) {
        Output out(trace_path);
        write_trace_csv(out.stream(), res.trace);
      }
    } else if (*dual) {
      const auto instance = load_instance(dual_instance, seed);
      const auto cert = dual_lower_bound(instance, dual_alpha, dual_beta);
      if (cert.degenerate) std::cerr << "warning: 4 beta^2 <= 9, the bound is not positive\n";
      std::cout << to_json(cert).dump(2) << '\n';
    } else if (*sto) {
      StochasticCostEstimate est;
      if (sto_policy == "alg3") {
        const auto params = Alg3Params::from_scaling(lambda, c1, c2);
        if (sto_mode == "analytic") {
          est = alg3_renewal_cost(lambda, sto_alpha, params);
        } else {
          Alg3Options o;
          o.cycles = cycles;
          o.seed = seed;
          est = simulate_alg3(lambda, sto_alpha, params, o);
        }
        auto j = to_json(est);
        j["U"] = params.U;
        j["mu"] = params.mu;
        j["asymptotic_bound"] = alg3_asymptotic_bound(lambda, sto_alpha, c1, c2);
        std::cout << j.dump(2) << '\n';
      } else {
        const auto policy = sto_policy == "alg1" ? alg1() : alg2(sto_alpha);
        if (sto_mode == "analytic") {
          est = analytic_cost(lambda, sto_alpha, policy);
        } else {
          CtmcOptions o;
          o.events = events;
          o.seed = seed;
          est = simulate_ctmc(lambda, sto_alpha, policy, o);
        }
        std::cout << to_json(est).dump(2) << '\n';
      }
    } else if (*sweep) {
      const auto table = family == "alg3"
                             ? sweep_alg3(split_numbers(lambdas), sweep_alpha, c1, c2)
                             : sweep_gamma(split_numbers(gammas), split_numbers(alphas), sweep_n, sweep_t,
                                           dp_budget_from_env());
      Output out(output);
      write_sweep_csv(out.stream(), table);
    } else if (*fig) {
      const auto table = reproduce_figure(figure_id, seed, seed_count, horizon, split_numbers(rates));
      Output out(output);
      write_figure_csv(out.stream(), table);
    }
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetError& e) {
    std::cerr << "oracle budget: " << e.what() << '\n';
    return kBudget;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
