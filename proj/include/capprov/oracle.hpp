#pragma once

#include <optional>
#include <span>
#include <vector>

#include "capprov/core.hpp"

namespace capprov {

class UnsupportedInstance : public Error {
 public:
  using Error::Error;
};

/// Raised when an oracle would exceed its work budget; `required` is the estimate.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, double required) : Error(what), required_(required) {}
  double required() const { return required_; }

 private:
  double required_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct DpConfig {
  /// Largest server count explored. Defaults to the number of jobs.
  std::optional<std::int64_t> s_cap;
  /// Last slot of the search horizon. Defaults to last arrival + total work.
  std::optional<Slot> t_cap;
  /// Upper bound on elementary transition evaluations.
  double work_budget = 2.0e9;
};

struct OptResult {
  double cost = 0.0;
  ScheduleTrace trace;
  CostBreakdown breakdown;
};

/// Exact offline optimum for unit-size jobs by dynamic programming over
/// (slot, jobs left, previous server count). Ties go to smaller server counts.
OptResult dp_opt(const ArrivalInstance& instance, const CostModel& model, const DpConfig& config = {});

/// Estimated transition count dp_opt would evaluate.
double dp_work_estimate(const ArrivalInstance& instance, const CostModel& model, const DpConfig& config = {});

/// Brute-force minimum over every server-count sequence of length t_cap.
/// Only for tiny instances (<= 6 jobs, t_cap <= 8).
double exhaustive_opt(const ArrivalInstance& instance, const CostModel& model, Slot t_cap);

/// Increase in quad_alg's flow time caused by job j, with every job of larger id removed.
double delta_flow(const ArrivalInstance& instance, JobId j, double alpha, double beta);

struct DualCertificate {
  std::vector<double> lambdas;      // lambda_j = delta_j F / w_j
  std::int64_t flow_alg = 0;        // quad_alg flow time on the full instance
  double alpha = 1.0;
  double beta = 1.0;
  double bound = 0.0;               // F (4 beta^2 - 9) / (4 beta^2)
  double per_pair_slack = 0.0;      // max_{j,t} lambda_j - (t - a_j)/w_j - (3/beta) sqrt(alpha_eff n(t))
  JobId worst_job = 0;
  Slot worst_slot = 0;
  bool degenerate = false;          // 4 beta^2 <= 9: bound is not positive
};

DualCertificate dual_lower_bound(const ArrivalInstance& instance, double alpha, double beta);

/// Objective of the batch problem over horizon H = profile.size():
/// H n - sum_i s(i)(H + 1 - i) + alpha sum_{i=1}^{H+1} (s(i) - s(i-1))^2 with s(0) = s(H+1) = 0.
/// Adding n gives the slot-accounted cost (flow + alpha * switching).
double burst_objective(std::span<const double> profile, double n, double alpha);

struct SolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 200000;
};

struct ConvexSolveResult {
  std::vector<double> profile;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Minimizes burst_objective over {s >= 0, sum s = n} by accelerated projected gradient.
ConvexSolveResult convex_batch_solve(double n, int horizon, double alpha, const SolverOptions& options = {});

/// Euclidean projection onto {x >= 0, sum x = total}.
void project_simplex(std::span<double> x, double total);

}  // namespace capprov
