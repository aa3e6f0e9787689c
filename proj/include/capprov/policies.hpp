#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "capprov/core.hpp"
#include "capprov/engine.hpp"

namespace capprov {

struct PolicyParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
};

/// ceil(x) that absorbs floating-point noise just above an integer (e.g. sqrt(3)^2).
std::int64_t ceil_count(double x);

// Decision rules. Each returns a server count in [0, n(t)] and 0 when idle.

std::int64_t full_parallel(const ObservableState& state);
std::int64_t balance_value(const ObservableState& state, double alpha);
std::int64_t balance_delta(const ObservableState& state, double alpha);
std::int64_t sqrt_online(const ObservableState& state, double alpha);
std::int64_t lg(const ObservableState& state, double alpha);
std::int64_t a_gamma(const ObservableState& state, double alpha, double gamma);
std::int64_t quad_alg(const ObservableState& state, double alpha, double beta);
std::int64_t quad_balance(const ObservableState& state, double alpha);
/// min(k, n(t)): the constant-count reference schedule.
std::int64_t fixed_count(const ObservableState& state, std::int64_t k);
/// ceil(n(t) / divisor), e.g. divisor 2 for s = n/2.
std::int64_t divided(const ObservableState& state, double divisor);

// Factories producing engine policies with canonical names.

Policy make_full_parallel();
Policy make_balance_value(double alpha);
Policy make_balance_delta(double alpha);
Policy make_sqrt_online(double alpha);
Policy make_lg(double alpha);
Policy make_a_gamma(double alpha, double gamma);
Policy make_quad_alg(double alpha, double beta);
Policy make_quad_balance(double alpha);
Policy make_fixed_count(std::int64_t k);
Policy make_divided(double divisor);

struct PolicySpec {
  std::string name;
  std::map<std::string, double> params;
};

/// Splits `name(k=v,...)` or `name:k=v,...` without interpreting it.
PolicySpec parse_policy_spec(std::string_view spec);

/**
 * Builds a policy from a registry string such as `quad_alg(beta=1.732)`,
 * `quad_alg:beta=2`, `lg` or `a_gamma:gamma=0.25`. Parameters not given take
 * alpha from `model_alpha`. Throws Error for unknown names or parameters.
 */
Policy parse_policy(std::string_view spec, double model_alpha);

/// Registry names accepted by parse_policy.
std::vector<std::string> policy_names();

// Offline batch solutions.

/// A (possibly fractional) speed profile s(1..H) for a batch at slot 1 and its fluid cost.
struct SpeedProfile {
  std::vector<double> speeds;
  double flow = 0.0;
  double switching = 0.0;  // unweighted
  double cost = 0.0;
};

/// Fluid cost of serving a batch of `n` work units with the given profile:
/// n(t) = n - sum_{i<t} s(i); switching includes the rise from 0 and the final drop.
SpeedProfile evaluate_batch_profile(std::vector<double> speeds, double n, const CostModel& model);

/// The constant-speed linear-cost optimum for N unit jobs: s_max = sqrt(N(N-1)) / (2 sqrt(alpha))
/// held while work remains, then the remainder in one slot.
double batch_linear_speed(std::int64_t jobs, double alpha);
SpeedProfile batch_linear_offline(std::int64_t jobs, double alpha);

struct BatchQuadSolution {
  std::vector<double> profile;       // the returned profile
  std::vector<double> closed_form;   // raw closed-form profile
  std::vector<double> solver;        // numeric convex optimum
  double multiplier = 0.0;           // the closed form's lambda*
  bool closed_form_feasible = false; // nonnegative and sums to n
  bool closed_form_matches = false;  // agrees with the solver
  double closed_form_deviation = 0.0;
  double objective = 0.0;            // burst objective of `profile`
};

/// Closed-form batch profile for horizon H cross-checked against the convex solver.
BatchQuadSolution batch_quad_continuous(double n, int horizon);
/// The closed-form profile alone, with its multiplier.
std::vector<double> batch_quad_closed_form(double n, int horizon, double* multiplier = nullptr);

struct HorizonSearchResult {
  int horizon = 0;
  double cost = 0.0;  // n + burst objective: fluid flow plus alpha-weighted switching
  std::vector<double> profile;
};

HorizonSearchResult batch_quad_horizon_search(double n, double alpha);

}  // namespace capprov
