#include "capprov/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "capprov/oracle.hpp"

namespace capprov {

std::int64_t ceil_count(double x) {
  if (!(x > 0.0)) return 0;
  const double c = std::ceil(x - 1e-9 * std::max(1.0, x));
  return c >= 9.0e18 ? std::numeric_limits<std::int64_t>::max() : static_cast<std::int64_t>(c);
}

namespace {

std::int64_t clamp_to_n(std::int64_t s, std::int64_t n) { return std::clamp<std::int64_t>(s, 0, n); }

}  // namespace

std::int64_t full_parallel(const ObservableState& state) { return state.n(); }

std::int64_t balance_value(const ObservableState& state, double alpha) {
  const auto n = state.n();
  if (n == 0) return 0;
  return clamp_to_n(ceil_count(static_cast<double>(n) / alpha), n);
}

// Always moves up while work is outstanding; the magnitude rule alone leaves the direction open.
std::int64_t balance_delta(const ObservableState& state, double alpha) {
  const auto n = state.n();
  if (n == 0) return 0;
  return clamp_to_n(state.s_prev() + ceil_count(static_cast<double>(n) / alpha), n);
}

std::int64_t sqrt_online(const ObservableState& state, double alpha) {
  const auto n = state.n();
  if (n == 0) return 0;
  return clamp_to_n(std::max<std::int64_t>(1, ceil_count(static_cast<double>(n) / std::sqrt(alpha))), n);
}

std::int64_t lg(const ObservableState& state, double alpha) {
  const auto n = state.n();
  if (n == 0) return 0;
  const auto target = ceil_count(static_cast<double>(n) / std::pow(alpha, 0.25));
  if (state.s_prev() > target) return std::min(state.s_prev(), n);
  return std::min(target, n);
}

std::int64_t a_gamma(const ObservableState& state, double alpha, double gamma) {
  const auto n = state.n();
  if (n == 0) return 0;
  return clamp_to_n(ceil_count(static_cast<double>(n) / std::pow(alpha, gamma)), n);
}

std::int64_t quad_alg(const ObservableState& state, double alpha, double beta) {
  const auto n = state.n();
  if (n == 0) return 0;
  const double a = std::max(alpha, 1.0);
  return std::min(ceil_count(beta * std::sqrt(static_cast<double>(n) / a)), n);
}

std::int64_t quad_balance(const ObservableState& state, double alpha) {
  const auto n = state.n();
  if (n == 0) return 0;
  return clamp_to_n(state.s_prev() + ceil_count(std::sqrt(static_cast<double>(n) / alpha)), n);
}

std::int64_t fixed_count(const ObservableState& state, std::int64_t k) { return clamp_to_n(k, state.n()); }

std::int64_t divided(const ObservableState& state, double divisor) {
  const auto n = state.n();
  if (n == 0) return 0;
  return clamp_to_n(ceil_count(static_cast<double>(n) / divisor), n);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

template <class F>
Policy wrap(std::string name, F f) {
  return Policy{std::move(name), [f](const ObservableState& s) { return static_cast<double>(f(s)); }};
}

}  // namespace

Policy make_full_parallel() { return wrap("full_parallel", [](const ObservableState& s) { return full_parallel(s); }); }

Policy make_balance_value(double alpha) {
  require_positive(alpha, "alpha");
  return wrap("balance_value(alpha=" + fmt(alpha) + ")",
              [alpha](const ObservableState& s) { return balance_value(s, alpha); });
}

Policy make_balance_delta(double alpha) {
  require_positive(alpha, "alpha");
  return wrap("balance_delta(alpha=" + fmt(alpha) + ")",
              [alpha](const ObservableState& s) { return balance_delta(s, alpha); });
}

Policy make_sqrt_online(double alpha) {
  require_positive(alpha, "alpha");
  return wrap("sqrt_online(alpha=" + fmt(alpha) + ")",
              [alpha](const ObservableState& s) { return sqrt_online(s, alpha); });
}

Policy make_lg(double alpha) {
  require_positive(alpha, "alpha");
  return wrap("lg(alpha=" + fmt(alpha) + ")", [alpha](const ObservableState& s) { return lg(s, alpha); });
}

Policy make_a_gamma(double alpha, double gamma) {
  require_positive(alpha, "alpha");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be >= 0");
  return wrap("a_gamma(alpha=" + fmt(alpha) + ",gamma=" + fmt(gamma) + ")",
              [alpha, gamma](const ObservableState& s) { return a_gamma(s, alpha, gamma); });
}

Policy make_quad_alg(double alpha, double beta) {
  require_positive(alpha, "alpha");
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw DomainError("quad_alg needs beta >= 1");
  return wrap("quad_alg(alpha=" + fmt(alpha) + ",beta=" + fmt(beta) + ")",
              [alpha, beta](const ObservableState& s) { return quad_alg(s, alpha, beta); });
}

Policy make_quad_balance(double alpha) {
  require_positive(alpha, "alpha");
  return wrap("quad_balance(alpha=" + fmt(alpha) + ")",
              [alpha](const ObservableState& s) { return quad_balance(s, alpha); });
}

Policy make_fixed_count(std::int64_t k) {
  if (k < 1) throw DomainError("fixed count must be >= 1");
  return wrap("fixed(k=" + std::to_string(k) + ")", [k](const ObservableState& s) { return fixed_count(s, k); });
}

Policy make_divided(double divisor) {
  require_positive(divisor, "divisor");
  return wrap("divided(d=" + fmt(divisor) + ")",
              [divisor](const ObservableState& s) { return divided(s, divisor); });
}

namespace {

std::map<std::string, double> parse_params(std::string_view text) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = text.substr(pos, comma - pos);
    pos = comma + 1;
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw SpecError("policy parameter `" + std::string(item) + "` needs key=value");
    std::string key(item.substr(0, eq));
    std::string value(item.substr(eq + 1));
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size())
      throw SpecError("policy parameter `" + key + "` has non-numeric value `" + value + "`");
    out[key] = v;
  }
  return out;
}

}  // namespace

std::vector<std::string> policy_names() {
  return {"full_parallel", "balance_value", "balance_delta", "sqrt_online", "lg",
          "a_gamma",       "quad_alg",      "quad_balance",  "fixed",       "divided"};
}

PolicySpec parse_policy_spec(std::string_view spec) {
  std::string_view name = spec;
  std::string_view args;
  if (auto open = spec.find('('); open != std::string_view::npos) {
    if (spec.back() != ')') throw SpecError("policy spec `" + std::string(spec) + "`: missing `)`");
    name = spec.substr(0, open);
    args = spec.substr(open + 1, spec.size() - open - 2);
  } else if (auto colon = spec.find(':'); colon != std::string_view::npos) {
    name = spec.substr(0, colon);
    args = spec.substr(colon + 1);
  }
  return {std::string(name), parse_params(args)};
}

Policy parse_policy(std::string_view spec, double model_alpha) {
  auto [name, params] = parse_policy_spec(spec);
  auto take = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    double v = it->second;
    params.erase(it);
    return v;
  };
  const double alpha = take("alpha", model_alpha);
  Policy p;
  const std::string& n = name;
  if (n == "full_parallel" || n == "A_f") {
    p = make_full_parallel();
  } else if (n == "balance_value" || n == "bal1") {
    p = make_balance_value(alpha);
  } else if (n == "balance_delta" || n == "bal2") {
    p = make_balance_delta(alpha);
  } else if (n == "sqrt_online") {
    p = make_sqrt_online(alpha);
  } else if (n == "lg") {
    p = make_lg(alpha);
  } else if (n == "a_gamma") {
    p = make_a_gamma(alpha, take("gamma", 0.25));
  } else if (n == "quad_alg") {
    p = make_quad_alg(alpha, take("beta", 1.0));
  } else if (n == "quad_balance") {
    p = make_quad_balance(alpha);
  } else if (n == "fixed") {
    p = make_fixed_count(static_cast<std::int64_t>(take("k", 1.0)));
  } else if (n == "divided") {
    p = make_divided(take("d", 2.0));
  } else {
    throw SpecError("unknown policy `" + n + "`");
  }
  if (!params.empty()) throw SpecError("policy `" + n + "` does not take parameter `" + params.begin()->first + "`");
  return p;
}

SpeedProfile evaluate_batch_profile(std::vector<double> speeds, double n, const CostModel& model) {
  SpeedProfile p;
  double remaining = n;
  double prev = 0.0;
  double served = 0.0;
  for (double s : speeds) {
    p.flow += remaining;
    p.switching += model.switching_cost(s, prev);
    remaining -= s;
    served += s;
    prev = s;
  }
  p.switching += model.switching_cost(0.0, prev);
  p.cost = p.flow + model.alpha * p.switching + model.theta * served;
  p.speeds = std::move(speeds);
  return p;
}

double batch_linear_speed(std::int64_t jobs, double alpha) {
  require_positive(alpha, "alpha");
  const auto N = static_cast<double>(jobs);
  return std::sqrt(N * (N - 1.0)) / (2.0 * std::sqrt(alpha));
}

SpeedProfile batch_linear_offline(std::int64_t jobs, double alpha) {
  const CostModel model = CostModel::linear(alpha);
  if (jobs <= 0) return evaluate_batch_profile({}, 0.0, model);
  const double s_max = batch_linear_speed(jobs, alpha);
  std::vector<double> speeds;
  double remaining = static_cast<double>(jobs);
  if (s_max > 0.0) {
    while (remaining > s_max * (1.0 + 1e-12)) {
      speeds.push_back(s_max);
      remaining -= s_max;
    }
  }
  if (remaining > 0.0) speeds.push_back(remaining);
  return evaluate_batch_profile(std::move(speeds), static_cast<double>(jobs), model);
}

std::vector<double> batch_quad_closed_form(double n, int horizon, double* multiplier) {
  const double H = horizon;
  const double lambda = 24.0 * n / (H * (H + 1.0) * (H + 2.0)) + (3.0 * H - 2.0) * (H + 1.0) / (H + 2.0);
  if (multiplier) *multiplier = lambda;
  std::vector<double> s(static_cast<std::size_t>(horizon));
  const double s1 = 0.25 * (n * lambda - H * (H - 1.0) / 2.0);
  s[0] = s1;
  for (int i = 2; i <= horizon; ++i) {
    const double step = s1 - lambda * (i - 1) / 2.0 - (i - 1) * (H + 1.0 - i / 2.0) / 2.0;
    s[static_cast<std::size_t>(i - 1)] = s[static_cast<std::size_t>(i - 2)] + step;
  }
  return s;
}

BatchQuadSolution batch_quad_continuous(double n, int horizon) {
  if (!(n >= 0.0) || !std::isfinite(n)) throw DomainError("batch size must be >= 0");
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  BatchQuadSolution out;
  out.closed_form = batch_quad_closed_form(n, horizon, &out.multiplier);
  out.solver = convex_batch_solve(n, horizon, 1.0).profile;

  double sum = 0.0;
  double min_entry = 0.0;
  for (double v : out.closed_form) {
    sum += v;
    min_entry = std::min(min_entry, v);
  }
  const double scale = std::max(1.0, n);
  out.closed_form_feasible = std::abs(sum - n) <= 1e-8 * scale && min_entry >= -1e-9 * scale;
  for (std::size_t i = 0; i < out.solver.size(); ++i)
    out.closed_form_deviation = std::max(out.closed_form_deviation, std::abs(out.closed_form[i] - out.solver[i]));
  out.closed_form_matches = out.closed_form_feasible && out.closed_form_deviation <= 1e-6 * scale;
  out.profile = out.closed_form_matches ? out.closed_form : out.solver;
  out.objective = burst_objective(out.profile, n, 1.0);
  return out;
}

HorizonSearchResult batch_quad_horizon_search(double n, double alpha) {
  require_positive(alpha, "alpha");
  if (!(n >= 0.0) || !std::isfinite(n)) throw DomainError("batch size must be >= 0");
  HorizonSearchResult best;
  if (n == 0.0) return best;
  const double a = std::max(alpha, 1.0);
  const int h_max = static_cast<int>(std::ceil(3.0 * std::sqrt(a * n)) + std::ceil(n));
  best.cost = std::numeric_limits<double>::infinity();
  for (int h = 1; h <= h_max; ++h) {
    auto sol = convex_batch_solve(n, h, alpha);
    const double cost = sol.objective + n;
    if (cost < best.cost - 1e-12 * std::max(1.0, cost)) {
      best.cost = cost;
      best.horizon = h;
      best.profile = std::move(sol.profile);
    }
  }
  return best;
}

}  // namespace capprov
