#include <doctest.h>

#include <cmath>
#include <deque>

#include "capprov/engine.hpp"
#include "capprov/instances.hpp"
#include "capprov/oracle.hpp"
#include "capprov/policies.hpp"
#include "corpus.hpp"

using namespace capprov;

namespace {

// Policy decision on a state with n unit jobs and the given previous count.
template <class F>
std::int64_t decide(F&& rule, std::int64_t n, std::int64_t s_prev = 0) {
  std::deque<OutstandingJob> jobs;
  for (std::int64_t i = 0; i < n; ++i) jobs.push_back({static_cast<JobId>(i), 1, 1});
  return rule(ObservableState(1, s_prev, jobs, {}));
}

std::int64_t at(const std::vector<std::int64_t>& v, Slot t) {
  return t >= 1 && t <= static_cast<Slot>(v.size()) ? v[static_cast<std::size_t>(t - 1)] : 0;
}

}  // namespace

TEST_SUITE("policies") {
  TEST_CASE("ceil_count absorbs rounding noise") {
    CHECK(ceil_count(3.0) == 3);
    CHECK(ceil_count(std::sqrt(3.0) * std::sqrt(3.0)) == 3);
    CHECK(ceil_count(3.01) == 4);
    CHECK(ceil_count(0.0) == 0);
  }

  TEST_CASE("full_parallel") {
    CHECK(decide(full_parallel, 5) == 5);
    CHECK(decide(full_parallel, 0) == 0);
    CHECK(decide(full_parallel, 17) == 17);
  }

  TEST_CASE("balance_value") {
    auto r = [](double a) { return [a](const ObservableState& s) { return balance_value(s, a); }; };
    CHECK(decide(r(4), 10) == 3);
    CHECK(decide(r(4), 0) == 0);
    CHECK(decide(r(1), 10) == 10);
  }

  TEST_CASE("balance_delta") {
    auto r = [](double a) { return [a](const ObservableState& s) { return balance_delta(s, a); }; };
    CHECK(decide(r(5), 10, 2) == 4);
    CHECK(decide(r(5), 0, 2) == 0);
    CHECK(decide(r(2), 4, 8) == 4);
  }

  TEST_CASE("sqrt_online") {
    auto r = [](double a) { return [a](const ObservableState& s) { return sqrt_online(s, a); }; };
    CHECK(decide(r(9), 9) == 3);
    CHECK(decide(r(100), 1) == 1);
    CHECK(decide(r(9), 0) == 0);
  }

  TEST_CASE("lg") {
    auto r = [](double a) { return [a](const ObservableState& s) { return lg(s, a); }; };
    CHECK(decide(r(16), 16, 1) == 8);
    CHECK(decide(r(16), 16, 10) == 10);
    CHECK(decide(r(16), 0, 10) == 0);
    CHECK(decide(r(16), 4, 10) == 4);
  }

  TEST_CASE("a_gamma") {
    auto r = [](double a, double g) { return [a, g](const ObservableState& s) { return a_gamma(s, a, g); }; };
    CHECK(decide(r(16, 0.25), 8) == 4);
    CHECK(decide(r(16, 0.0), 8) == 8);
    CHECK(decide(r(16, 0.25), 0) == 0);
  }

  TEST_CASE("quad_alg") {
    auto r = [](double a, double b) { return [a, b](const ObservableState& s) { return quad_alg(s, a, b); }; };
    CHECK(decide(r(3, std::sqrt(3.0)), 12) == 4);
    CHECK(decide(r(0.5, 1), 4) == 2);
    CHECK(decide(r(1, 1), 0) == 0);
    CHECK(decide(r(1, 4), 3) == 3);
    CHECK_THROWS(make_quad_alg(1, 0.5));
  }

  TEST_CASE("quad_balance") {
    auto r = [](double a) { return [a](const ObservableState& s) { return quad_balance(s, a); }; };
    CHECK(decide(r(1), 9, 0) == 3);
    CHECK(decide(r(1), 4, 5) == 4);
    CHECK(decide(r(1), 0, 5) == 0);
  }

  TEST_CASE("fixed and divided references") {
    CHECK(decide([](const ObservableState& s) { return fixed_count(s, 4); }, 10) == 4);
    CHECK(decide([](const ObservableState& s) { return fixed_count(s, 4); }, 3) == 3);
    CHECK(decide([](const ObservableState& s) { return divided(s, 2); }, 5) == 3);
  }

  TEST_CASE("registry parses both spellings") {
    CHECK(parse_policy("quad_alg(beta=1.732)", 1).name == parse_policy("quad_alg:beta=1.732", 1).name);
    CHECK(parse_policy("lg", 4).name == make_lg(4).name);
    CHECK(parse_policy("A_f", 1).name == make_full_parallel().name);
    CHECK(parse_policy("fixed(k=3)", 1).name == make_fixed_count(3).name);
    auto spec = parse_policy_spec("a_gamma:gamma=0.25,alpha=16");
    CHECK(spec.name == "a_gamma");
    CHECK(spec.params.at("gamma") == 0.25);
    CHECK(spec.params.at("alpha") == 16);
    CHECK_THROWS_AS(parse_policy("nope", 1), Error);
    CHECK_THROWS_AS(parse_policy("quad_alg:bogus=1", 1), Error);
    CHECK_THROWS_AS(parse_policy("quad_alg(beta=1", 1), SpecError);
    for (const auto& name : policy_names()) CHECK_NOTHROW(parse_policy(name, 2));
  }

  TEST_CASE("batch makespan bound, and one slot when the batch fits") {
    SimOptions o;
    o.record_served = false;
    for (double alpha : {0.5, 1.0, 2.0, 4.0, 9.0})
      for (double beta : {1.0, std::sqrt(3.0), 2.177})
        for (int n = 1; n <= 400; ++n) {
          const auto span = simulate(batch(n), make_quad_alg(alpha, beta), o).makespan();
          const double a = std::max(alpha, 1.0);
          if (beta * std::sqrt(n / a) >= n) {
            CHECK(span == 1);
          } else {
            CHECK(span <= std::ceil(3 * std::sqrt(a * n) / beta - 1e-9));
          }
        }
  }

  TEST_CASE("quad_alg occupancy is monotone under adding a final arrival") {
    std::mt19937_64 rng(3);
    for (const auto& inst : testing::random_corpus(150, 17, 10, 10))
      for (double alpha : {0.5, 2.0})
        for (double beta : {1.0, 2.177}) {
          std::vector<Job> jobs(inst.jobs().begin(), inst.jobs().end());
          jobs.push_back({inst.last_arrival() + std::uniform_int_distribution<Slot>(0, 3)(rng), 1});
          const auto n_small = simulate(inst, make_quad_alg(alpha, beta)).occupancy();
          const auto n_big = simulate(ArrivalInstance(jobs), make_quad_alg(alpha, beta)).occupancy();
          const Slot H = static_cast<Slot>(std::max(n_small.size(), n_big.size()));
          for (Slot t = 1; t <= H; ++t) CHECK(at(n_small, t) <= at(n_big, t));
        }
  }

  TEST_CASE("delta flow is at most the sojourn of the added job") {
    for (const auto& inst : testing::random_corpus(80, 23, 10, 10))
      for (double alpha : {0.5, 1.0, 3.0})
        for (JobId j = 0; j < inst.size(); ++j) {
          const auto tr = simulate(inst.prefix(j + 1), make_quad_alg(alpha, 2.0));
          const double sojourn = static_cast<double>(tr.departures[j] - inst.job(j).arrival + 1);
          CHECK(delta_flow(inst, j, alpha, 2.0) <= sojourn);
        }
  }

  TEST_CASE("lg per-slot potential inequality against the optimal schedule") {
    // With Phi = alpha (s_o - s) + alpha^(1/4) (W - W_o), W the remaining work:
    // n + alpha (s - s_prev)^+ + dPhi <= alpha^(1/4) n_o + alpha |ds_o| + alpha (s_prev - s)^+.
    for (const auto& inst : testing::random_corpus(120, 31, 10, 10))
      for (double alpha : {2.0, 4.0, 16.0}) {
        const auto model = CostModel::linear(alpha);
        const auto alg = simulate(inst, make_lg(alpha));
        const auto opt = dp_opt(inst, model).trace;
        const auto s = alg.server_counts(), n = alg.occupancy();
        const auto so = opt.server_counts(), no = opt.occupancy();
        const double q = std::pow(alpha, 0.25);
        const Slot H = std::max(alg.horizon(), opt.horizon()) + 1;
        double lhs_sum = 0.0, rhs_sum = 0.0;
        for (Slot t = 1; t <= H; ++t) {
          const double st = at(s, t), sp = at(s, t - 1), sot = at(so, t), sop = at(so, t - 1);
          const double d_phi1 = alpha * ((sot - sop) - (st - sp));
          const double d_phi2 = q * (sot - st);  // arrivals cancel between the two schedules
          const double lhs = at(n, t) + alpha * std::max(0.0, st - sp) + d_phi1 + d_phi2;
          const double rhs = q * at(no, t) + alpha * std::abs(sot - sop) + alpha * std::max(0.0, sp - st);
          CHECK(lhs <= rhs + 1e-9);
          lhs_sum += lhs;
          rhs_sum += rhs;
        }
        CHECK(lhs_sum <= rhs_sum + 1e-9);
      }
  }

  TEST_CASE("linear batch offline speed") {
    CHECK(batch_linear_speed(1, 3) == 0);
    CHECK(batch_linear_speed(100, 1) == doctest::Approx(std::sqrt(9900.0) / 2));
    const auto one = batch_linear_offline(1, 0.5);
    REQUIRE(one.speeds.size() == 1);
    CHECK(one.speeds[0] == 1);
    CHECK(batch_linear_offline(0, 1).speeds.empty());
  }

  TEST_CASE("linear batch offline cost is within one slot of the integral optimum") {
    for (int N : {4, 20, 100}) {
      const auto model = CostModel::linear(1);
      const double fluid = batch_linear_offline(N, 1).cost;
      const double dp = dp_opt(batch(N), model).cost;
      CHECK(fluid <= dp + batch_linear_speed(N, 1) + 1e-9);
    }
  }

  TEST_CASE("fluid batch cost of a one-slot profile") {
    auto p = evaluate_batch_profile({1.0}, 1.0, CostModel::quadratic(2));
    CHECK(p.flow == 1);
    CHECK(p.switching == 2);
    CHECK(p.cost == 5);
  }

  TEST_CASE("batch quad continuous returns a feasible profile") {
    const auto zero = batch_quad_continuous(0, 4);
    for (double v : zero.profile) CHECK(v == 0);
    const auto sol = batch_quad_continuous(4, 6);
    double sum = 0.0;
    for (double v : sol.profile) {
      CHECK(v >= 0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(4).epsilon(1e-10));
    CHECK(sol.objective == doctest::Approx(burst_objective(sol.solver, 4, 1)).epsilon(1e-10));
    CHECK_THROWS_AS(batch_quad_continuous(-1, 3), DomainError);
    CHECK_THROWS_AS(batch_quad_continuous(1, 0), DomainError);
  }

  TEST_CASE("closed form multiplier") {
    for (int H : {1, 2, 5, 9}) {
      double lambda = 0.0;
      batch_quad_closed_form(10, H, &lambda);
      const double expected = 24.0 * 10 / (H * (H + 1.0) * (H + 2.0)) + (3.0 * H - 2) * (H + 1.0) / (H + 2.0);
      CHECK(lambda == doctest::Approx(expected));
    }
  }

  TEST_CASE("horizon search picks the best horizon") {
    CHECK(batch_quad_horizon_search(0, 1).cost == 0);
    // One job: H = 1 costs 1 + 2 alpha; a grid over the two-slot split gives an independent bound.
    const auto one = batch_quad_horizon_search(1, 1);
    double best2 = 1e300;
    for (int k = 0; k <= 1000; ++k) {
      const double a = k / 1000.0;
      // flow (2 - a) plus switching 0 -> a -> 1 - a -> 0
      best2 = std::min(best2, (2 - a) + a * a + (1 - 2 * a) * (1 - 2 * a) + (1 - a) * (1 - a));
    }
    CHECK(one.cost <= 3 + 1e-12);
    CHECK(one.cost <= best2 + 1e-9);
    double sum = 0.0;
    for (double v : one.profile) sum += v;
    CHECK(sum == doctest::Approx(1));
  }

  TEST_CASE("horizon search on 16 jobs sits between the dual bound and quad_alg") {
    const auto res = batch_quad_horizon_search(16, 1);
    const auto cert = dual_lower_bound(batch(16), 1, 2.177);
    const auto alg = run_policy(batch(16), make_quad_alg(1, 2.177), CostModel::quadratic(1)).cost.total;
    CHECK(cert.bound <= res.cost);
    CHECK(res.cost <= alg);
  }
}
