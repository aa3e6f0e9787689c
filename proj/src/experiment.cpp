#include "capprov/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "capprov/engine.hpp"
#include "capprov/instances.hpp"
#include "capprov/io.hpp"
#include "capprov/policies.hpp"
#include "capprov/stochastic.hpp"

namespace capprov {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

CostModel parse_model(std::string_view spec) {
  std::string_view name = spec;
  std::string_view args;
  if (auto colon = spec.find(':'); colon != std::string_view::npos) {
    name = spec.substr(0, colon);
    args = spec.substr(colon + 1);
  }
  SwitchingKind kind;
  if (name == "quad" || name == "quadratic") {
    kind = SwitchingKind::Quadratic;
  } else if (name == "linear" || name == "lin") {
    kind = SwitchingKind::Linear;
  } else {
    throw SpecError("unknown cost model `" + std::string(name) + "`");
  }
  double alpha = 1.0, theta = 0.0;
  std::size_t pos = 0;
  while (pos < args.size()) {
    auto comma = args.find(',', pos);
    if (comma == std::string_view::npos) comma = args.size();
    const std::string item(args.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw SpecError("model parameter `" + item + "` needs key=value");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size())
      throw SpecError("model parameter `" + item + "` is not numeric");
    if (key == "alpha") {
      alpha = v;
    } else if (key == "theta") {
      theta = v;
    } else {
      throw SpecError("unknown model parameter `" + key + "`");
    }
  }
  return CostModel(kind, alpha, theta);
}

ArrivalInstance load_instance(const std::string& spec_or_path, std::uint64_t seed) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec_or_path, ec)) return read_instance_file(spec_or_path);
  return generate(parse_generator(spec_or_path), seed);
}

double dp_budget_from_env() {
  if (const char* env = std::getenv("CAPPROV_DP_BUDGET")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && *end == '\0' && v > 0.0) return v;
    throw SpecError(std::string("CAPPROV_DP_BUDGET is not a positive number: ") + env);
  }
  return DpConfig{}.work_budget;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.policies.empty()) throw SpecError("at least one policy is required");
  if (config.repetitions < 1) throw SpecError("repetitions must be >= 1");
  ExperimentReport report;
  report.model = parse_model(config.model);
  const double alpha = report.model.alpha;

  std::vector<Policy> policies;
  for (const auto& spec : config.policies) {
    const auto parsed = parse_policy_spec(spec);
    if (auto it = parsed.params.find("alpha"); it != parsed.params.end() && it->second != alpha)
      throw SpecError("policy `" + spec + "` uses alpha " + num(it->second) + " but the cost model has " + num(alpha));
    policies.push_back(parse_policy(spec, alpha));
  }

  const bool seeded = config.instance.rfind("random", 0) == 0;
  const int reps = seeded ? config.repetitions : 1;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    const auto instance = load_instance(config.instance, seed);
    InstanceReport ir;
    ir.instance_id = instance.id();
    ir.jobs = instance.size();
    ir.seed = seed;

    if (config.oracle_dp) {
      try {
        DpConfig dp;
        dp.work_budget = config.dp_budget;
        ir.opt_cost = dp_opt(instance, report.model, dp).cost;
      } catch (const BudgetError& e) {
        ir.opt_error = e.what();
        report.budget_exceeded = true;
      } catch (const UnsupportedInstance& e) {
        ir.opt_error = e.what();
      }
    }
    if (config.oracle_dual) {
      try {
        ir.dual = dual_lower_bound(instance, alpha, config.dual_beta);
      } catch (const UnsupportedInstance& e) {
        ir.dual_error = e.what();
      }
    }

    SimOptions opts;
    opts.record_served = false;
    for (const auto& policy : policies) {
      PolicyResult pr;
      pr.policy = policy.name;
      try {
        pr.cost = run_policy(instance, policy, report.model, opts).cost;
        if (ir.opt_cost) pr.ratio = *ir.opt_cost > 0.0 ? pr.cost.total / *ir.opt_cost : 1.0;
      } catch (const PolicyFault& e) {
        pr.error = e.what();
      } catch (const StallError& e) {
        pr.error = e.what();
      }
      ir.policies.push_back(std::move(pr));
    }
    report.instances.push_back(std::move(ir));
  }
  return report;
}

nlohmann::json to_json(const DualCertificate& cert) {
  return {{"lambdas", cert.lambdas},
          {"flow_alg", cert.flow_alg},
          {"alpha", cert.alpha},
          {"beta", cert.beta},
          {"bound", cert.bound},
          {"per_pair_slack", cert.per_pair_slack},
          {"worst_job", cert.worst_job},
          {"worst_slot", cert.worst_slot},
          {"degenerate", cert.degenerate}};
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json out;
  out["model"] = {{"switching_kind", to_string(report.model.switching)},
                  {"alpha", report.model.alpha},
                  {"theta", report.model.theta}};
  out["budget_exceeded"] = report.budget_exceeded;
  out["instances"] = nlohmann::json::array();
  for (const auto& ir : report.instances) {
    nlohmann::json j{{"instance", ir.instance_id}, {"jobs", ir.jobs}, {"seed", ir.seed}};
    if (ir.opt_cost) j["opt_cost"] = *ir.opt_cost;
    if (!ir.opt_error.empty()) j["opt_error"] = ir.opt_error;
    if (ir.dual) j["dual"] = to_json(*ir.dual);
    if (!ir.dual_error.empty()) j["dual_error"] = ir.dual_error;
    j["policies"] = nlohmann::json::array();
    for (const auto& pr : ir.policies) {
      nlohmann::json p = to_json(pr.cost, report.model);
      p["policy"] = pr.policy;
      if (pr.ratio) p["ratio"] = *pr.ratio;
      if (!pr.error.empty()) p["error"] = pr.error;
      j["policies"].push_back(std::move(p));
    }
    out["instances"].push_back(std::move(j));
  }
  return out;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "instance,seed,policy,flow_time,switching_cost,energy_cost,total,opt_cost,ratio,error\n";
  for (const auto& ir : report.instances) {
    for (const auto& pr : ir.policies) {
      out << csv_field(ir.instance_id) << ',' << ir.seed << ',' << csv_field(pr.policy) << ',' << pr.cost.flow_time
          << ',' << num(pr.cost.switching_cost) << ',' << num(pr.cost.energy_cost) << ',' << num(pr.cost.total) << ','
          << (ir.opt_cost ? num(*ir.opt_cost) : "") << ',' << (pr.ratio ? num(*pr.ratio) : "") << ','
          << csv_field(pr.error.empty() ? ir.opt_error : pr.error) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Figures

namespace {

struct FigureDef {
  std::string id;
  CostModel model;
  std::vector<std::string> policies;
  std::vector<double> rates;
};

std::vector<FigureDef> figure_defs() {
  const std::vector<double> low = {5, 10, 15, 20};
  const std::vector<std::string> quad = {"quad_alg:beta=1", "quad_alg:beta=1.7320508075688772", "quad_alg:beta=2",
                                         "quad_alg:beta=4", "quad_balance"};
  return {
      {"linear_a1", CostModel::linear(1), {"full_parallel", "balance_delta", "divided:d=2"}, low},
      {"linear_a2", CostModel::linear(2), {"balance_value", "balance_delta", "lg"}, low},
      {"linear_a4", CostModel::linear(4), {"balance_value", "balance_delta", "lg"}, low},
      {"quad_a1", CostModel::quadratic(1), quad, low},
      {"quad_a2", CostModel::quadratic(2), quad, low},
      {"quad_extreme",
       CostModel::quadratic(2),
       {"quad_alg:beta=1.7320508075688772", "quad_alg:beta=2", "quad_alg:beta=4", "quad_balance"},
       {1000}},
  };
}

std::string rate_label(double r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

void add_figure_checks(FigureTable& t) {
  auto col = [&](std::size_t r, std::size_t c) { return t.values[r][c]; };
  for (std::size_t r = 0; r < t.rates.size(); ++r) {
    const std::string at = " at rate " + rate_label(t.rates[r]);
    if (t.id == "linear_a1") {
      const double fp = col(r, 0), bal = col(r, 1), half = col(r, 2);
      const double gap = std::abs(fp - bal) / std::min(fp, bal);
      t.checks.push_back({"s=n and Balance within 5%" + at, gap <= 0.05, "relative gap " + num(gap)});
      t.checks.push_back({"s=n and Balance below s=n/2" + at, fp < half && bal < half,
                          num(fp) + ", " + num(bal) + " vs " + num(half)});
    } else if (t.id == "linear_a2" || t.id == "linear_a4") {
      const double bv = col(r, 0), bd = col(r, 1), lgv = col(r, 2);
      t.checks.push_back({"n/alpha^(1/4) <= both Balance baselines" + at, lgv <= bv && lgv <= bd,
                          num(lgv) + " vs " + num(bv) + ", " + num(bd)});
    } else if (t.id == "quad_a1" || t.id == "quad_a2") {
      bool mono = true;
      for (std::size_t c = 1; c + 1 < t.columns.size(); ++c) mono = mono && col(r, c) <= col(r, c - 1);
      t.checks.push_back({"cost nonincreasing in beta" + at, mono,
                          num(col(r, 0)) + " -> " + num(col(r, t.columns.size() - 2))});
    } else if (t.id == "quad_extreme") {
      const double ratio = col(r, 1) / col(r, 3);
      t.checks.push_back({"beta=2 / Balance < 2" + at, ratio < 2.0, "ratio " + num(ratio)});
    }
  }
}

}  // namespace

bool FigureTable::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const FigureCheck& c) { return c.passed; });
}

std::vector<std::string> figure_ids() {
  std::vector<std::string> ids;
  for (const auto& d : figure_defs()) ids.push_back(d.id);
  return ids;
}

FigureTable reproduce_figure(std::string_view id, std::uint64_t seed, int seed_count, std::int64_t horizon,
                             std::vector<double> rates) {
  const auto defs = figure_defs();
  auto it = std::find_if(defs.begin(), defs.end(), [&](const FigureDef& d) { return d.id == id; });
  if (it == defs.end()) throw SpecError("unknown figure `" + std::string(id) + "`");
  if (seed_count < 1) throw SpecError("need at least one seed");
  if (horizon < 1) throw SpecError("horizon must be >= 1");

  FigureTable t;
  t.id = it->id;
  t.model = it->model;
  t.horizon = horizon;
  t.seeds = seed_count;
  t.rates = rates.empty() ? it->rates : std::move(rates);
  std::vector<Policy> policies;
  for (const auto& spec : it->policies) {
    policies.push_back(parse_policy(spec, t.model.alpha));
    t.columns.push_back(policies.back().name);
  }

  SimOptions opts;
  opts.record_served = false;
  for (double rate : t.rates) {
    std::vector<double> sum(policies.size(), 0.0), per_job(policies.size(), 0.0);
    for (int k = 0; k < seed_count; ++k) {
      const auto instance = random_slotted(rate, horizon, seed + static_cast<std::uint64_t>(k));
      for (std::size_t c = 0; c < policies.size(); ++c) {
        const auto cost = run_policy(instance, policies[c], t.model, opts).cost;
        sum[c] += (static_cast<double>(cost.flow_time) + t.model.alpha * cost.switching_cost) /
                  static_cast<double>(horizon);
        per_job[c] += instance.empty() ? 0.0
                                       : static_cast<double>(cost.flow_time) / static_cast<double>(instance.size());
      }
    }
    for (std::size_t c = 0; c < policies.size(); ++c) {
      sum[c] /= seed_count;
      per_job[c] /= seed_count;
    }
    t.values.push_back(std::move(sum));
    t.per_job.push_back(std::move(per_job));
  }
  add_figure_checks(t);
  return t;
}

void write_figure_csv(std::ostream& out, const FigureTable& table) {
  out << "figure,rate,policy,normalized_cost,flow_per_job\n";
  for (std::size_t r = 0; r < table.rates.size(); ++r)
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << table.id << ',' << num(table.rates[r]) << ',' << csv_field(table.columns[c]) << ','
          << num(table.values[r][c]) << ',' << num(table.per_job[r][c]) << '\n';
  for (const auto& check : table.checks)
    out << "# check," << (check.passed ? "PASS" : "FAIL") << ',' << csv_field(check.name) << ','
        << csv_field(check.detail) << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps

SweepTable sweep_gamma(const std::vector<double>& gammas, const std::vector<double>& alphas, std::int64_t N,
                       std::int64_t T, double dp_budget, std::size_t max_cells) {
  const std::size_t cells = gammas.size() * alphas.size();
  if (cells > max_cells) throw BudgetError("sweep grid has " + std::to_string(cells) + " cells", double(cells));
  SweepTable table;
  table.header = {"gamma", "alpha", "instance", "cost", "opt_cost", "ratio"};
  const auto instance = T <= 1 ? sigma1(N) : sigma2(N, T);
  SimOptions opts;
  opts.record_served = false;
  std::vector<double> opt(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    DpConfig dp;
    dp.work_budget = dp_budget;
    opt[a] = dp_opt(instance, CostModel::linear(alphas[a]), dp).cost;
  }
  for (double g : gammas) {
    std::vector<double> ratios;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const auto model = CostModel::linear(alphas[a]);
      const auto cost = run_policy(instance, make_a_gamma(alphas[a], g), model, opts).cost.total;
      ratios.push_back(cost / opt[a]);
      table.rows.push_back({num(g), num(alphas[a]), instance.id(), num(cost), num(opt[a]), num(cost / opt[a])});
    }
    bool increasing = true;
    for (std::size_t a = 1; a < ratios.size(); ++a) increasing = increasing && ratios[a] > ratios[a - 1];
    table.checks.push_back({"ratio increasing in alpha for gamma=" + num(g), increasing,
                            ratios.empty() ? "" : num(ratios.front()) + " -> " + num(ratios.back())});
  }
  return table;
}

SweepTable sweep_alg3(const std::vector<double>& lambdas, double alpha, double c1, double c2, std::size_t max_cells) {
  if (lambdas.size() > max_cells)
    throw BudgetError("sweep grid has " + std::to_string(lambdas.size()) + " cells", double(lambdas.size()));
  SweepTable table;
  table.header = {"lambda", "U", "mu", "cost", "mean_occupancy", "switch_cost_rate", "asymptotic_bound"};
  std::vector<std::pair<double, double>> samples;
  for (double l : lambdas) {
    const auto p = Alg3Params::from_scaling(l, c1, c2);
    const auto est = alg3_renewal_cost(l, alpha, p);
    samples.emplace_back(l, est.total);
    table.rows.push_back({num(l), std::to_string(p.U), num(p.mu), num(est.total), num(est.mean_occupancy),
                          num(est.switch_cost_rate), num(alg3_asymptotic_bound(l, alpha, c1, c2))});
  }
  if (samples.size() >= 4) {
    try {
      const double slope = scaling_exponent(samples);
      table.checks.push_back({"log-log slope in [0.57, 0.77]", slope >= 0.57 && slope <= 0.77, "slope " + num(slope)});
    } catch (const DomainError& e) {
      table.checks.push_back({"log-log slope", false, e.what()});
    }
  }
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
  }
  for (const auto& check : table.checks)
    out << "# check," << (check.passed ? "PASS" : "FAIL") << ',' << csv_field(check.name) << ','
        << csv_field(check.detail) << '\n';
}

}  // namespace capprov
