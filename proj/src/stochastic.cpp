#include "capprov/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace capprov {

MarkovPolicy::MarkovPolicy(std::string name, Rates rates, ServiceModel model)
    : name_(std::move(name)), rates_(std::move(rates)), model_(model) {
  if (!rates_) throw DomainError("policy " + name_ + " has no rate function");
  const double mu0 = rates_(0);
  if (mu0 != 0.0) throw DomainError("policy " + name_ + ": mu_0 must be 0");
  for (std::int64_t i = 1; i <= 4096; ++i) {
    const double mu = rates_(i);
    if (!std::isfinite(mu) || mu < 0.0)
      throw DomainError("policy " + name_ + ": mu_" + std::to_string(i) + " is negative or not finite");
    if (model_ == ServiceModel::Multiserver && mu > static_cast<double>(i) * (1.0 + 1e-12))
      throw DomainError("policy " + name_ + ": multiserver rate mu_" + std::to_string(i) + " exceeds " +
                        std::to_string(i));
  }
}

MarkovPolicy alg1() {
  return MarkovPolicy("alg1", [](std::int64_t i) { return static_cast<double>(i); }, ServiceModel::Multiserver);
}

MarkovPolicy alg2(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  const double k = std::cbrt(4.0 * alpha);
  return MarkovPolicy(
      "alg2", [k](std::int64_t i) { return static_cast<double>(i) / k; }, ServiceModel::SingleServerSpeedScaling);
}

StationaryDistribution stationary_distribution(double lambda, const MarkovPolicy& policy,
                                               std::optional<std::int64_t> n_max) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  constexpr double kTail = 1e-12;
  constexpr std::int64_t kLimit = std::int64_t{1} << 24;
  std::int64_t cut = n_max.value_or(64);
  if (cut < 1) throw DomainError("n_max must be >= 1");

  for (;;) {
    std::vector<double> logw(static_cast<std::size_t>(cut) + 1, 0.0);
    for (std::int64_t i = 1; i <= cut; ++i) {
      const double mu = policy.rate(i);
      if (!(mu > 0.0))
        throw NonErgodicError("policy " + policy.name() + " has zero service rate at occupancy " + std::to_string(i));
      logw[static_cast<std::size_t>(i)] = logw[static_cast<std::size_t>(i - 1)] + std::log(lambda / mu);
    }
    const double peak = *std::max_element(logw.begin(), logw.end());
    StationaryDistribution out;
    out.pi.resize(logw.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) z += out.pi[i] = std::exp(logw[i] - peak);
    for (double& p : out.pi) p /= z;

    const double mu_next = policy.rate(cut + 1);
    const double r = mu_next > 0.0 ? lambda / mu_next : std::numeric_limits<double>::infinity();
    out.tail = r < 1.0 ? out.pi.back() * r / (1.0 - r) : std::numeric_limits<double>::infinity();
    if (out.tail < kTail) return out;
    if (n_max || cut >= kLimit)
      throw TailError("truncation at " + std::to_string(cut) + " leaves tail mass " + std::to_string(out.tail),
                      out.tail);
    cut *= 2;
  }
}

StochasticCostEstimate analytic_cost(double lambda, double alpha, const MarkovPolicy& policy) {
  const auto dist = stationary_distribution(lambda, policy);
  StochasticCostEstimate est;
  est.truncation = static_cast<std::int64_t>(dist.pi.size()) - 1;
  for (std::size_t i = 0; i < dist.pi.size(); ++i) {
    const auto k = static_cast<std::int64_t>(i);
    const double jump = policy.rate(k + 1) - policy.rate(k);
    est.mean_occupancy += static_cast<double>(i) * dist.pi[i];
    est.switch_cost_rate += 2.0 * lambda * dist.pi[i] * jump * jump;
  }
  est.total = est.mean_occupancy + alpha * est.switch_cost_rate;
  return est;
}

double student_t_975(int df) {
  if (df < 1) throw DomainError("degrees of freedom must be >= 1");
  const double z = 1.959963984540054;
  const double v = df;
  const double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z, z9 = z7 * z * z;
  return z + (z3 + z) / (4 * v) + (5 * z5 + 16 * z3 + 3 * z) / (96 * v * v) +
         (3 * z7 + 19 * z5 + 17 * z3 - 15 * z) / (384 * v * v * v) +
         (79 * z9 + 776 * z7 + 1482 * z5 - 1920 * z3 - 945 * z) / (92160 * v * v * v * v);
}

namespace {

double batch_halfwidth(const std::vector<double>& values) {
  const auto b = static_cast<double>(values.size());
  if (values.size() < 2) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= b;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return student_t_975(static_cast<int>(values.size()) - 1) * std::sqrt(ss / (b - 1.0) / b);
}

}  // namespace

StochasticCostEstimate simulate_ctmc(double lambda, double alpha, const MarkovPolicy& policy,
                                     const CtmcOptions& options) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (options.batches < 30) throw DomainError("at least 30 batches are required");
  if (options.events < options.batches) throw DomainError("event budget smaller than the batch count");
  if (!(policy.rate(1) > 0.0)) throw NonErgodicError("policy " + policy.name() + " never serves");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::int64_t n = 0;
  double mu = 0.0;

  auto step = [&](double& area, double& switching) {
    const double total_rate = lambda + mu;
    const double dt = std::exponential_distribution<double>(total_rate)(rng);
    area += static_cast<double>(n) * dt;
    if (unit(rng) * total_rate < lambda) {
      ++n;
    } else {
      --n;
    }
    const double next = policy.rate(n);
    if (n > 0 && !(next > 0.0))
      throw NonErgodicError("policy " + policy.name() + " has zero service rate at occupancy " + std::to_string(n));
    switching += (next - mu) * (next - mu);
    mu = next;
    return dt;
  };

  const auto warmup = static_cast<std::int64_t>(options.warmup_fraction * static_cast<double>(options.events));
  double scratch_a = 0.0, scratch_s = 0.0;
  for (std::int64_t e = 0; e < warmup; ++e) step(scratch_a, scratch_s);

  const std::int64_t per_batch = options.events / options.batches;
  std::vector<double> batch_cost;
  batch_cost.reserve(static_cast<std::size_t>(options.batches));
  StochasticCostEstimate est;
  double area = 0.0, switching = 0.0, time = 0.0;
  for (int b = 0; b < options.batches; ++b) {
    double a = 0.0, s = 0.0, tb = 0.0;
    for (std::int64_t e = 0; e < per_batch; ++e) tb += step(a, s);
    batch_cost.push_back((a + alpha * s) / tb);
    area += a;
    switching += s;
    time += tb;
  }
  est.samples = per_batch * options.batches;
  est.horizon = time;
  est.mean_occupancy = area / time;
  est.switch_cost_rate = switching / time;
  est.total = est.mean_occupancy + alpha * est.switch_cost_rate;
  est.ci_halfwidth = batch_halfwidth(batch_cost);
  est.ci_wide = est.ci_halfwidth > options.ci_target * std::abs(est.total);
  return est;
}

Alg3Params Alg3Params::from_scaling(double lambda, double c1, double c2, double theta1, double theta2) {
  if (!(lambda > 0.0) || !(c1 > 0.0) || !(c2 > 0.0)) throw DomainError("lambda, c1 and c2 must be positive");
  if (!(theta1 <= 1.0) || !(theta2 < 1.0)) throw DomainError("need theta1 <= 1 and theta2 < 1");
  Alg3Params p;
  p.U = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(c1 * std::pow(lambda, theta1) - 1e-9)));
  p.mu = lambda + c2 * std::pow(lambda, theta2);
  return p;
}

namespace {

void check_alg3(double lambda, const Alg3Params& params) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (params.U < 1) throw DomainError("U must be >= 1");
  if (!(params.mu > lambda)) throw DomainError("mu must exceed lambda");
}

}  // namespace

StochasticCostEstimate simulate_alg3(double lambda, double alpha, const Alg3Params& params,
                                     const Alg3Options& options) {
  check_alg3(lambda, params);
  if (options.batches < 30) throw DomainError("at least 30 batches are required");
  if (options.cycles < options.batches) throw DomainError("cycle budget smaller than the batch count");

  std::mt19937_64 rng(options.seed);
  std::exponential_distribution<double> idle_clock(lambda);
  std::exponential_distribution<double> busy_clock(lambda + params.mu);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double cycle_switching = 2.0 * params.mu * params.mu;

  StochasticCostEstimate est;
  const std::int64_t per_batch = options.cycles / options.batches;
  std::vector<double> batch_cost;
  double area = 0.0, switching = 0.0, time = 0.0;
  for (int b = 0; b < options.batches; ++b) {
    double ab = 0.0, sb = 0.0, tb = 0.0;
    for (std::int64_t c = 0; c < per_batch; ++c) {
      for (std::int64_t k = 0; k < params.U; ++k) {
        const double dt = idle_clock(rng);
        ab += static_cast<double>(k) * dt;
        tb += dt;
      }
      std::int64_t n = params.U;
      std::int64_t events = 0;
      while (n > 0) {
        if (++events > options.max_events_per_cycle) {
          est.overflow = true;
          break;
        }
        const double dt = busy_clock(rng);
        ab += static_cast<double>(n) * dt;
        tb += dt;
        n += unit(rng) * (lambda + params.mu) < lambda ? 1 : -1;
      }
      sb += cycle_switching;
    }
    batch_cost.push_back((ab + alpha * sb) / tb);
    area += ab;
    switching += sb;
    time += tb;
  }
  est.samples = per_batch * options.batches;
  est.horizon = time;
  est.mean_occupancy = area / time;
  est.switch_cost_rate = switching / time;
  est.total = est.mean_occupancy + alpha * est.switch_cost_rate;
  est.ci_halfwidth = batch_halfwidth(batch_cost);
  est.ci_wide = est.ci_halfwidth > options.ci_target * std::abs(est.total);
  return est;
}

StochasticCostEstimate alg3_renewal_cost(double lambda, double alpha, const Alg3Params& params) {
  check_alg3(lambda, params);
  const double U = static_cast<double>(params.U);
  const double mu = params.mu;
  const double gap = mu - lambda;
  const double idle_time = U / lambda;
  const double idle_area = U * (U - 1.0) / (2.0 * lambda);
  // Each drop of one level is a single-customer busy period: mean 1/gap, area mu/gap^2 above the floor.
  const double busy_time = U / gap;
  const double busy_area = U * (U - 1.0) / (2.0 * gap) + U * mu / (gap * gap);
  const double cycle = idle_time + busy_time;
  StochasticCostEstimate est;
  est.horizon = cycle;
  est.mean_occupancy = (idle_area + busy_area) / cycle;
  est.switch_cost_rate = 2.0 * mu * mu / cycle;
  est.total = est.mean_occupancy + alpha * est.switch_cost_rate;
  return est;
}

double alg3_asymptotic_bound(double lambda, double alpha, double c1, double c2) {
  return (c1 + 1.0 / c2 + 2.0 * alpha * c2 / c1) * std::pow(lambda, 2.0 / 3.0);
}

double scaling_exponent(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 4) throw DomainError("scaling_exponent needs at least 4 samples");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [lambda, cost] : samples) {
    if (!(lambda > 0.0) || !(cost > 0.0)) throw DomainError("scaling_exponent needs positive rates and costs");
    lo = std::min(lo, lambda);
    hi = std::max(hi, lambda);
  }
  if (hi / lo < 100.0 * (1.0 - 1e-12)) throw DomainError("rates must span at least two decades");
  const auto m = static_cast<double>(samples.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [lambda, cost] : samples) {
    const double x = std::log(lambda), y = std::log(cost);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace capprov
