#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capprov/core.hpp"
#include "capprov/oracle.hpp"

namespace capprov {

/// `quad:alpha=1`, `linear:alpha=0.5,theta=0.1` (also `quadratic`, `lin`).
CostModel parse_model(std::string_view spec);

/// A generator spec (`batch:N=4`) or a path to an instance file.
ArrivalInstance load_instance(const std::string& spec_or_path, std::uint64_t seed = 1);

/// DP work budget: $CAPPROV_DP_BUDGET when set, else the library default.
double dp_budget_from_env();

struct ExperimentConfig {
  std::string instance;
  std::vector<std::string> policies;
  std::string model = "quad:alpha=1";
  bool oracle_dp = false;
  bool oracle_dual = false;
  double dual_beta = 2.177;
  std::uint64_t seed = 1;
  int repetitions = 1;
  double dp_budget = DpConfig{}.work_budget;
};

struct PolicyResult {
  std::string policy;
  CostBreakdown cost;
  std::optional<double> ratio;  // cost / opt
  std::string error;
};

struct InstanceReport {
  std::string instance_id;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  std::vector<PolicyResult> policies;
  std::optional<double> opt_cost;
  std::string opt_error;
  std::optional<DualCertificate> dual;
  std::string dual_error;
};

struct ExperimentReport {
  CostModel model;
  std::vector<InstanceReport> instances;
  bool budget_exceeded = false;
};

/// Runs every policy on the instance (one per repetition for seeded generators).
/// Oracle failures are recorded per instance, never thrown.
ExperimentReport run_experiment(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const DualCertificate& cert);
/// Columns: instance,seed,policy,flow_time,switching_cost,energy_cost,total,opt_cost,ratio,error.
void write_report_csv(std::ostream& out, const ExperimentReport& report);

struct FigureCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct FigureTable {
  std::string id;
  CostModel model;
  std::int64_t horizon = 0;
  int seeds = 0;
  std::vector<std::string> columns;          // policy names
  std::vector<double> rates;
  std::vector<std::vector<double>> values;   // [rate][column]: mean of (flow + alpha * switching) / T
  std::vector<std::vector<double>> per_job;  // [rate][column]: mean flow per job, for reference
  std::vector<FigureCheck> checks;

  bool all_passed() const;
};

std::vector<std::string> figure_ids();

/**
 * Runs the policies of one figure on `seed_count` Poisson-slotted instances per rate
 * (seeds seed, seed+1, ...), averages the normalized cost, and evaluates the
 * figure's ordering checks. Empty `rates` selects the figure's own rates.
 */
FigureTable reproduce_figure(std::string_view id, std::uint64_t seed, int seed_count, std::int64_t horizon,
                             std::vector<double> rates = {});

/// Columns: figure,rate,policy,normalized_cost,flow_per_job; checks follow as `# check` lines.
void write_figure_csv(std::ostream& out, const FigureTable& table);

struct SweepTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<FigureCheck> checks;
};

/// a_gamma over a (gamma, alpha) grid on sigma1(N) (T = 1) or sigma2(N, T), ratio against dp_opt.
SweepTable sweep_gamma(const std::vector<double>& gammas, const std::vector<double>& alphas, std::int64_t N,
                       std::int64_t T, double dp_budget = DpConfig{}.work_budget, std::size_t max_cells = 4096);

/// Gated-policy renewal costs over a lambda grid, with the fitted log-log slope.
SweepTable sweep_alg3(const std::vector<double>& lambdas, double alpha, double c1, double c2,
                      std::size_t max_cells = 4096);

void write_sweep_csv(std::ostream& out, const SweepTable& table);

}  // namespace capprov
