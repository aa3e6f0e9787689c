#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "capprov/core.hpp"

namespace capprov {

class NonErgodicError : public Error {
 public:
  using Error::Error;
};

/// The truncated chain still carries more tail mass than the tolerance.
class TailError : public Error {
 public:
  TailError(const std::string& what, double tail) : Error(what), tail_(tail) {}
  double tail() const { return tail_; }

 private:
  double tail_;
};

enum class ServiceModel { Multiserver, SingleServerSpeedScaling };

/// Service rate mu_i as a function of the occupancy i, with mu_0 = 0.
class MarkovPolicy {
 public:
  using Rates = std::function<double(std::int64_t)>;

  /// Validates mu_0 = 0, finiteness and nonnegativity, and mu_i <= i under the multiserver model
  /// for every i up to 4096.
  MarkovPolicy(std::string name, Rates rates, ServiceModel model);

  const std::string& name() const { return name_; }
  ServiceModel model() const { return model_; }
  double rate(std::int64_t i) const { return i <= 0 ? 0.0 : rates_(i); }

 private:
  std::string name_;
  Rates rates_;
  ServiceModel model_;
};

/// mu_i = i.
MarkovPolicy alg1();
/// mu_i = i / cbrt(4 alpha), single-server speed scaling.
MarkovPolicy alg2(double alpha);

struct StochasticCostEstimate {
  double mean_occupancy = 0.0;
  double switch_cost_rate = 0.0;  // unweighted
  double total = 0.0;             // mean_occupancy + alpha * switch_cost_rate
  double ci_halfwidth = 0.0;      // 0 for analytic results
  std::int64_t samples = 0;       // events or cycles simulated
  double horizon = 0.0;           // simulated time
  std::int64_t truncation = 0;    // chain truncation used by analytic results
  bool ci_wide = false;           // CI target missed within the budget
  bool overflow = false;          // a busy period hit the per-cycle event guard
};

struct StationaryDistribution {
  std::vector<double> pi;  // pi[0..n_max]
  double tail = 0.0;       // geometric estimate of the mass beyond n_max
};

/**
 * Birth-death stationary law by detailed balance, computed in log space.
 * Without `n_max` the truncation doubles until the tail estimate is below 1e-12;
 * with it, a larger tail raises TailError. The tail estimate assumes the rates
 * are nondecreasing beyond the cutoff.
 */
StationaryDistribution stationary_distribution(double lambda, const MarkovPolicy& policy,
                                               std::optional<std::int64_t> n_max = std::nullopt);

/// E[N] + 2 alpha sum_i lambda pi_i (mu_{i+1} - mu_i)^2 over the certified truncation.
StochasticCostEstimate analytic_cost(double lambda, double alpha, const MarkovPolicy& policy);

struct CtmcOptions {
  std::int64_t events = 1'000'000;
  std::uint64_t seed = 1;
  int batches = 30;
  double warmup_fraction = 0.01;
  double ci_target = 0.02;  // relative half-width
};

/// Event-driven simulation of the birth-death chain with batch-means CI.
StochasticCostEstimate simulate_ctmc(double lambda, double alpha, const MarkovPolicy& policy,
                                     const CtmcOptions& options = {});

struct Alg3Params {
  std::int64_t U = 1;
  double mu = 1.0;

  /// U = ceil(c1 lambda^theta1), mu = lambda + c2 lambda^theta2.
  static Alg3Params from_scaling(double lambda, double c1, double c2, double theta1 = 2.0 / 3.0,
                                 double theta2 = 1.0 / 3.0);
};

struct Alg3Options {
  std::int64_t cycles = 20000;
  std::uint64_t seed = 1;
  int batches = 30;
  std::int64_t max_events_per_cycle = 100'000'000;
  double ci_target = 0.02;
};

/// Regenerative simulation of the gated policy: idle until U jobs, then speed mu until empty.
StochasticCostEstimate simulate_alg3(double lambda, double alpha, const Alg3Params& params,
                                     const Alg3Options& options = {});

/// Exact renewal-reward cost of the gated policy with M/M/1 busy periods:
/// E[I] = U/lambda, E[B] = U/(mu - lambda), two quadratic jumps of mu per cycle.
StochasticCostEstimate alg3_renewal_cost(double lambda, double alpha, const Alg3Params& params);

/// (c1 + 1/c2 + 2 alpha c2/c1) lambda^(2/3).
double alg3_asymptotic_bound(double lambda, double alpha, double c1, double c2);

/// Least-squares slope of log(cost) against log(lambda).
double scaling_exponent(std::span<const std::pair<double, double>> samples);

/// Two-sided 97.5% Student-t quantile (Cornish-Fisher expansion, exact as df grows).
double student_t_975(int df);

}  // namespace capprov
