#include "capprov/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>

#include "capprov/engine.hpp"
#include "capprov/policies.hpp"

namespace capprov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_unit(const ArrivalInstance& instance, const char* who) {
  if (!instance.unit_sizes())
    throw UnsupportedInstance(std::string(who) + " supports unit-size jobs only");
}

struct DpShape {
  std::int64_t jobs = 0;
  std::int64_t s_cap = 0;
  Slot t_cap = 0;
};

DpShape dp_shape(const ArrivalInstance& instance, const DpConfig& config) {
  DpShape shape;
  shape.jobs = static_cast<std::int64_t>(instance.size());
  shape.s_cap = config.s_cap.value_or(shape.jobs);
  shape.t_cap = config.t_cap.value_or(instance.last_arrival() + instance.total_work());
  if (shape.s_cap < 1) throw DomainError("s_cap must be >= 1");
  if (shape.t_cap < instance.last_arrival()) throw DomainError("t_cap is before the last arrival");
  return shape;
}

// Row-major table indexed by (remaining r, previous servers s).
struct Layer {
  std::int64_t width = 0;
  std::vector<double> g;
  double& at(std::int64_t r, std::int64_t s) { return g[static_cast<std::size_t>(r * width + s)]; }
  double at(std::int64_t r, std::int64_t s) const { return g[static_cast<std::size_t>(r * width + s)]; }
};

// h(x) = min_y g(y) + alpha |x - y| in two passes; ties keep the smaller y.
void distance_transform(std::span<const double> g, double alpha, std::span<double> h, std::span<std::int32_t> arg) {
  const auto m = g.size();
  for (std::size_t i = 0; i < m; ++i) {
    h[i] = g[i];
    arg[i] = static_cast<std::int32_t>(i);
    if (i > 0 && h[i - 1] + alpha <= h[i]) {
      h[i] = h[i - 1] + alpha;
      arg[i] = arg[i - 1];
    }
  }
  for (std::size_t i = m - 1; i-- > 0;) {
    const double cand = h[i + 1] + alpha;
    if (cand < h[i] || (cand == h[i] && arg[i + 1] < arg[i])) {
      h[i] = cand;
      arg[i] = arg[i + 1];
    }
  }
}

}  // namespace

double dp_work_estimate(const ArrivalInstance& instance, const CostModel& model, const DpConfig& config) {
  const auto shape = dp_shape(instance, config);
  const double states = static_cast<double>(shape.jobs + 1) * static_cast<double>(shape.s_cap + 1);
  const double per_state = model.switching == SwitchingKind::Linear ? 3.0 : static_cast<double>(shape.s_cap + 1);
  return static_cast<double>(shape.t_cap) * states * per_state;
}

OptResult dp_opt(const ArrivalInstance& instance, const CostModel& model, const DpConfig& config) {
  require_unit(instance, "dp_opt");
  OptResult out;
  out.trace.policy_name = "opt";
  out.trace.instance_id = instance.id();
  if (instance.empty()) return out;

  const auto shape = dp_shape(instance, config);
  const double work = dp_work_estimate(instance, model, config);
  if (work > config.work_budget) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "dp_opt needs about %.3g transitions, budget is %.3g", work, config.work_budget);
    throw BudgetError(msg, work);
  }

  const std::int64_t N = shape.jobs;
  const std::int64_t S = shape.s_cap;
  const auto T = static_cast<std::size_t>(shape.t_cap);
  const bool linear = model.switching == SwitchingKind::Linear;

  // choice[t][r * (S+1) + s] = server count of slot t-1 on the best path into (r, s) after slot t.
  std::vector<std::vector<std::int32_t>> choice(T);
  Layer prev{S + 1, std::vector<double>(static_cast<std::size_t>((N + 1) * (S + 1)), kInf)};
  prev.at(0, 0) = 0.0;
  std::int64_t arrived = 0;

  std::vector<double> h(static_cast<std::size_t>(S + 1));
  std::vector<std::int32_t> harg(static_cast<std::size_t>(S + 1));

  for (std::size_t ti = 0; ti < T; ++ti) {
    const Slot t = static_cast<Slot>(ti + 1);
    const std::int64_t a = instance.count_at(t);
    arrived += a;
    Layer next{S + 1, std::vector<double>(prev.g.size(), kInf)};
    auto& ch = choice[ti];
    ch.assign(prev.g.size(), -1);

    for (std::int64_t r_prev = 0; r_prev + a <= N && r_prev <= arrived - a; ++r_prev) {
      const std::span<const double> row(prev.g.data() + r_prev * (S + 1), static_cast<std::size_t>(S + 1));
      if (std::all_of(row.begin(), row.end(), [](double v) { return v == kInf; })) continue;
      const std::int64_t n_t = r_prev + a;
      const std::int64_t top = std::min(n_t, S);
      if (linear) {
        distance_transform(row, model.alpha, h, harg);
      } else {
        for (std::int64_t x = 0; x <= top; ++x) {
          double best = kInf;
          std::int32_t arg = -1;
          for (std::int64_t y = 0; y <= S; ++y) {
            if (row[static_cast<std::size_t>(y)] == kInf) continue;
            const double d = static_cast<double>(x - y);
            const double v = row[static_cast<std::size_t>(y)] + model.alpha * d * d;
            if (v < best) {
              best = v;
              arg = static_cast<std::int32_t>(y);
            }
          }
          h[static_cast<std::size_t>(x)] = best;
          harg[static_cast<std::size_t>(x)] = arg;
        }
      }
      for (std::int64_t x = 0; x <= top; ++x) {
        const double v = h[static_cast<std::size_t>(x)];
        if (v == kInf) continue;
        const std::int64_t r = n_t - x;
        next.at(r, x) = v + static_cast<double>(n_t);
        ch[static_cast<std::size_t>(r * (S + 1) + x)] = harg[static_cast<std::size_t>(x)];
      }
    }
    prev = std::move(next);
  }

  double best = kInf;
  std::int64_t s_last = -1;
  for (std::int64_t s = 0; s <= S; ++s) {
    const double v = prev.at(0, s);
    if (v == kInf) continue;
    const double total = v + model.alpha * model.switching_cost(0.0, static_cast<double>(s));
    if (total < best) {
      best = total;
      s_last = s;
    }
  }
  if (s_last < 0) throw DomainError("no schedule completes every job by t_cap");

  // Walk back through the choices: state after slot t is (r, s); r before slot t follows from n_t.
  std::vector<std::int64_t> servers(T);
  std::int64_t r = 0;
  std::int64_t s = s_last;
  for (std::size_t ti = T; ti-- > 0;) {
    servers[ti] = s;
    const std::int64_t n_t = r + s;
    const std::int32_t s_prev = choice[ti][static_cast<std::size_t>(r * (S + 1) + s)];
    r = n_t - instance.count_at(static_cast<Slot>(ti + 1));
    s = s_prev;
  }

  out.trace = replay(instance, servers, "opt");
  out.breakdown = cost_of_trace(instance, out.trace, model);
  if (std::abs(out.breakdown.total - (best + model.theta * static_cast<double>(N))) >
      1e-9 * std::max(1.0, best))
    throw Error("dp_opt: rebuilt trace does not reproduce the table cost");
  out.cost = best + model.theta * static_cast<double>(N);
  return out;
}

double exhaustive_opt(const ArrivalInstance& instance, const CostModel& model, Slot t_cap) {
  require_unit(instance, "exhaustive_opt");
  if (instance.size() > 6 || t_cap > 8) throw DomainError("exhaustive_opt is limited to 6 jobs and t_cap 8");
  if (instance.empty()) return 0.0;
  if (t_cap < instance.last_arrival()) throw DomainError("t_cap is before the last arrival");

  std::vector<std::int64_t> arrivals(static_cast<std::size_t>(t_cap) + 1, 0);
  for (const auto& job : instance.jobs()) ++arrivals[static_cast<std::size_t>(job.arrival)];

  double best = kInf;
  // Plain recursion over every s(t) in [0, n(t)], costs summed directly.
  std::function<void(Slot, std::int64_t, std::int64_t, double)> visit = [&](Slot t, std::int64_t left,
                                                                          std::int64_t s_prev, double acc) {
    if (t > t_cap) {
      if (left == 0) {
        const double d = static_cast<double>(s_prev);
        const double c = model.switching == SwitchingKind::Linear ? d : d * d;
        best = std::min(best, acc + model.alpha * c);
      }
      return;
    }
    const std::int64_t n = left + arrivals[static_cast<std::size_t>(t)];
    for (std::int64_t s = 0; s <= n; ++s) {
      const double d = static_cast<double>(s - s_prev);
      const double c = model.switching == SwitchingKind::Linear ? std::abs(d) : d * d;
      visit(t + 1, n - s, s, acc + static_cast<double>(n) + model.alpha * c + model.theta * static_cast<double>(s));
    }
  };
  visit(1, 0, 0, 0.0);
  return best;
}

namespace {

std::int64_t quad_alg_flow(const ArrivalInstance& instance, double alpha, double beta) {
  SimOptions opts;
  opts.record_served = false;
  return simulate(instance, make_quad_alg(alpha, beta), opts).flow_time();
}

}  // namespace

double delta_flow(const ArrivalInstance& instance, JobId j, double alpha, double beta) {
  if (j >= instance.size()) throw DomainError("job index out of range");
  if (!instance.equal_sizes()) throw UnsupportedInstance("delta_flow requires equal job sizes");
  const auto with = quad_alg_flow(instance.prefix(j + 1), alpha, beta);
  const auto without = quad_alg_flow(instance.prefix(j), alpha, beta);
  return static_cast<double>(with - without);
}

DualCertificate dual_lower_bound(const ArrivalInstance& instance, double alpha, double beta) {
  if (!instance.equal_sizes()) throw UnsupportedInstance("dual_lower_bound requires equal job sizes");
  DualCertificate cert;
  cert.alpha = alpha;
  cert.beta = beta;
  const double b2 = 4.0 * beta * beta;
  cert.degenerate = b2 <= 9.0;

  SimOptions opts;
  opts.record_served = false;
  const auto trace = simulate(instance, make_quad_alg(alpha, beta), opts);
  cert.flow_alg = trace.flow_time();
  cert.bound = static_cast<double>(cert.flow_alg) * (b2 - 9.0) / b2;

  // Prefix flows give every delta in one pass.
  const auto jobs = instance.jobs();
  cert.lambdas.resize(jobs.size());
  std::int64_t prev_flow = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto f = quad_alg_flow(instance.prefix(j + 1), alpha, beta);
    cert.lambdas[j] = static_cast<double>(f - prev_flow) / static_cast<double>(jobs[j].size);
    prev_flow = f;
  }

  const auto occupancy = trace.occupancy();
  const double coef = 3.0 / beta * std::sqrt(std::max(alpha, 1.0));
  cert.per_pair_slack = -kInf;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    for (Slot t = jobs[j].arrival; t <= trace.departures[j]; ++t) {
      const double n = static_cast<double>(occupancy[static_cast<std::size_t>(t - 1)]);
      const double v = cert.lambdas[j] - static_cast<double>(t - jobs[j].arrival) / static_cast<double>(jobs[j].size) -
                       coef * std::sqrt(n);
      if (v > cert.per_pair_slack) {
        cert.per_pair_slack = v;
        cert.worst_job = j;
        cert.worst_slot = t;
      }
    }
  }
  if (jobs.empty()) cert.per_pair_slack = 0.0;
  return cert;
}

double burst_objective(std::span<const double> profile, double n, double alpha) {
  const auto H = static_cast<double>(profile.size());
  double obj = H * n;
  double prev = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    obj -= profile[i] * (H - static_cast<double>(i));
    const double d = profile[i] - prev;
    obj += alpha * d * d;
    prev = profile[i];
  }
  return obj + alpha * prev * prev;
}

void project_simplex(std::span<double> x, double total) {
  if (x.empty()) return;
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double cand = (cum - total) / static_cast<double>(k + 1);
    if (u[k] - cand > 0.0) tau = cand;
  }
  for (double& v : x) v = std::max(v - tau, 0.0);
}

namespace {

void burst_gradient(std::span<const double> s, double alpha, std::span<double> grad) {
  const auto H = s.size();
  for (std::size_t i = 0; i < H; ++i) {
    const double left = i > 0 ? s[i - 1] : 0.0;
    const double right = i + 1 < H ? s[i + 1] : 0.0;
    grad[i] = -static_cast<double>(H - i) + 2.0 * alpha * (2.0 * s[i] - left - right);
  }
}

double kkt_residual(std::span<const double> s, double n, double alpha) {
  std::vector<double> g(s.size());
  burst_gradient(s, alpha, g);
  std::vector<double> y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) y[i] = s[i] - g[i];
  project_simplex(y, n);
  double r = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) r = std::max(r, std::abs(s[i] - y[i]));
  return r;
}

// Thomas algorithm for a symmetric tridiagonal system with diagonal d and off-diagonal e.
std::vector<double> solve_tridiagonal(std::vector<double> d, std::vector<double> e, std::vector<double> b) {
  const auto m = d.size();
  for (std::size_t i = 1; i < m; ++i) {
    const double w = e[i - 1] / d[i - 1];
    d[i] -= w * e[i - 1];
    b[i] -= w * b[i - 1];
  }
  std::vector<double> x(m);
  x[m - 1] = b[m - 1] / d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = (b[i] - e[i] * x[i + 1]) / d[i];
  return x;
}

// Solves the equality-constrained problem exactly on the current support.
bool polish(std::vector<double>& s, double n, double alpha) {
  const auto H = s.size();
  const double cut = 1e-12 * std::max(1.0, n);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < H; ++i)
    if (s[i] > cut) idx.push_back(i);
  if (idx.empty()) return false;
  const auto m = idx.size();
  std::vector<double> d(m, 4.0 * alpha), e(m > 0 ? m - 1 : 0), c(m), one(m, 1.0);
  for (std::size_t k = 0; k + 1 < m; ++k) e[k] = idx[k + 1] == idx[k] + 1 ? -2.0 * alpha : 0.0;
  for (std::size_t k = 0; k < m; ++k) c[k] = static_cast<double>(H - idx[k]);
  const auto x = solve_tridiagonal(d, e, c);
  const auto y = solve_tridiagonal(d, e, one);
  const double sx = std::accumulate(x.begin(), x.end(), 0.0);
  const double sy = std::accumulate(y.begin(), y.end(), 0.0);
  const double nu = (n - sx) / sy;
  std::vector<double> out(H, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double v = x[k] + nu * y[k];
    if (v < 0.0) return false;
    out[idx[k]] = v;
  }
  s = std::move(out);
  return true;
}

}  // namespace

ConvexSolveResult convex_batch_solve(double n, int horizon, double alpha, const SolverOptions& options) {
  if (!(n >= 0.0) || !std::isfinite(n)) throw DomainError("batch size must be >= 0");
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  const auto H = static_cast<std::size_t>(horizon);
  ConvexSolveResult res;
  res.profile.assign(H, n / static_cast<double>(H));
  if (n == 0.0 || H == 1) {
    res.objective = burst_objective(res.profile, n, alpha);
    return res;
  }

  const double step = 1.0 / (8.0 * alpha);
  std::vector<double> x = res.profile, y = x, x_prev = x, grad(H);
  double momentum = 1.0;
  double residual = kInf;
  for (int it = 1; it <= options.max_iterations; ++it) {
    burst_gradient(y, alpha, grad);
    x_prev = x;
    for (std::size_t i = 0; i < H; ++i) x[i] = y[i] - step * grad[i];
    project_simplex(x, n);
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    for (std::size_t i = 0; i < H; ++i) y[i] = x[i] + (momentum - 1.0) / next * (x[i] - x_prev[i]);
    momentum = next;
    res.iterations = it;

    if (it % 50 == 0 || it == options.max_iterations) {
      residual = kkt_residual(x, n, alpha);
      std::vector<double> p = x;
      if (polish(p, n, alpha)) {
        const double pr = kkt_residual(p, n, alpha);
        if (pr <= options.tolerance) {
          x = std::move(p);
          residual = pr;
          break;
        }
      }
      if (residual <= options.tolerance * 1e-2) break;
      // Restart momentum when the objective stops improving along y.
      if (burst_objective(x, n, alpha) > burst_objective(x_prev, n, alpha)) {
        momentum = 1.0;
        y = x;
      }
    }
  }
  res.profile = std::move(x);
  res.kkt_residual = residual;
  res.objective = burst_objective(res.profile, n, alpha);
  if (!(residual <= options.tolerance))
    throw SolverError("convex_batch_solve did not reach the KKT tolerance", residual);
  return res;
}

}  // namespace capprov
