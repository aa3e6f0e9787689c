#include <doctest.h>

#include <cmath>
#include <numeric>

#include "capprov/engine.hpp"
#include "capprov/instances.hpp"
#include "capprov/oracle.hpp"
#include "capprov/policies.hpp"
#include "corpus.hpp"

using namespace capprov;

namespace {

// Minimum of the batch objective by enumerating supports and solving each
// equality-constrained KKT system with dense Gaussian elimination.
double support_enumeration_min(double n, int H, double alpha, std::vector<double>* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << H); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < H; ++i)
      if (mask & (1u << i)) S.push_back(i);
    const int m = static_cast<int>(S.size());
    // unknowns s_S and nu: Q_SS s + nu 1 = c_S, 1^T s = n, with Q = 2 alpha tridiag(-1, 2, -1)
    std::vector<std::vector<double>> A(m + 1, std::vector<double>(m + 2, 0.0));
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const int d = std::abs(S[r] - S[c]);
        A[r][c] = d == 0 ? 4 * alpha : d == 1 ? -2 * alpha : 0.0;
      }
      A[r][m] = 1.0;
      A[r][m + 1] = H - S[r];
      A[m][r] = 1.0;
    }
    A[m][m + 1] = n;
    bool singular = false;
    for (int col = 0; col <= m && !singular; ++col) {
      int piv = col;
      for (int r = col + 1; r <= m; ++r)
        if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
      if (std::abs(A[piv][col]) < 1e-14) {
        singular = true;
        break;
      }
      std::swap(A[piv], A[col]);
      for (int r = 0; r <= m; ++r) {
        if (r == col) continue;
        const double f = A[r][col] / A[col][col];
        for (int c = col; c <= m + 1; ++c) A[r][c] -= f * A[col][c];
      }
    }
    if (singular) continue;
    std::vector<double> s(H, 0.0);
    bool feasible = true;
    for (int r = 0; r < m; ++r) {
      s[S[r]] = A[r][m + 1] / A[r][r];
      if (s[S[r]] < -1e-12) feasible = false;
    }
    if (!feasible) continue;
    for (double& v : s) v = std::max(v, 0.0);
    double obj = H * n, prev = 0.0;
    for (int i = 0; i < H; ++i) {
      obj -= s[i] * (H - i) - alpha * (s[i] - prev) * (s[i] - prev);
      prev = s[i];
    }
    obj += alpha * prev * prev;
    if (obj < best) {
      best = obj;
      if (argmin) *argmin = s;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("dp examples") {
    CHECK(dp_opt(batch(1), CostModel::quadratic(1)).cost == 3);
    const auto two = dp_opt(batch(2), CostModel::quadratic(1));
    CHECK(two.cost == 5);
    CHECK(two.trace.server_counts() == std::vector<std::int64_t>{1, 1});
    CHECK(dp_opt(batch(2), CostModel::linear(1)).cost == 5);
    CHECK(dp_opt(ArrivalInstance{}, CostModel::linear(1)).cost == 0);
  }

  TEST_CASE("exhaustive examples") {
    CHECK(exhaustive_opt(batch(1), CostModel::quadratic(1), 2) == 3);
    CHECK(exhaustive_opt(batch(2), CostModel::quadratic(1), 3) == 5);
    CHECK(exhaustive_opt(batch(2), CostModel::linear(1), 3) == 5);
    CHECK(exhaustive_opt(ArrivalInstance{}, CostModel::linear(1), 3) == 0);
    CHECK(exhaustive_opt(batch(1), CostModel::linear(0.5), 3) == 2);
    CHECK_THROWS_AS(exhaustive_opt(batch(7), CostModel::linear(1), 4), Error);
    CHECK_THROWS_AS(exhaustive_opt(batch(2), CostModel::linear(1), 9), Error);
  }

  TEST_CASE("dp matches exhaustive on random tiny instances") {
    for (const auto& inst : testing::random_corpus(80, 41, 5, 4))
      for (auto kind : {SwitchingKind::Linear, SwitchingKind::Quadratic})
        for (double alpha : {0.3, 1.0, 2.5}) {
          DpConfig cfg;
          cfg.t_cap = 8;
          CHECK(dp_opt(inst, CostModel(kind, alpha), cfg).cost ==
                doctest::Approx(exhaustive_opt(inst, CostModel(kind, alpha), 8)).epsilon(1e-12));
        }
  }

  TEST_CASE("dp rejects what it cannot solve") {
    CHECK_THROWS_AS(dp_opt(batch(2, 3), CostModel::linear(1)), UnsupportedInstance);
    DpConfig tiny;
    tiny.work_budget = 10;
    try {
      dp_opt(batch(30), CostModel::quadratic(1), tiny);
      FAIL("expected a budget error");
    } catch (const BudgetError& e) {
      CHECK(e.required() > 10);
      CHECK(e.required() == dp_work_estimate(batch(30), CostModel::quadratic(1), tiny));
    }
  }

  TEST_CASE("dp trace is valid and its cost replays") {
    for (const auto& inst : testing::random_corpus(60, 43))
      for (auto model : {CostModel::linear(2, 0.1), CostModel::quadratic(0.7)}) {
        const auto res = dp_opt(inst, model);
        REQUIRE(validate_trace(inst, res.trace).ok());
        CHECK(cost_of_trace(inst, res.trace, model).total == doctest::Approx(res.cost));
      }
  }

  TEST_CASE("dp is no worse than any policy") {
    for (const auto& inst : testing::random_corpus(60, 47))
      for (double alpha : {0.5, 2.0, 8.0}) {
        for (auto model : {CostModel::linear(alpha), CostModel::quadratic(alpha)}) {
          const double opt = dp_opt(inst, model).cost;
          for (const auto& p : {make_full_parallel(), make_lg(alpha), make_quad_alg(alpha, 1.0),
                                make_balance_delta(alpha), make_sqrt_online(alpha), make_fixed_count(1)})
            CHECK(opt <= run_policy(inst, p, model).cost.total + 1e-9);
        }
      }
  }

  TEST_CASE("quadratic optimum dominates the linear optimum") {
    for (const auto& inst : testing::random_corpus(60, 53))
      for (double alpha : {0.5, 1.0, 4.0})
        CHECK(dp_opt(inst, CostModel::linear(alpha)).cost <= dp_opt(inst, CostModel::quadratic(alpha)).cost + 1e-9);
  }

  TEST_CASE("optimum is invariant under shifting every arrival") {
    for (const auto& inst : testing::random_corpus(40, 59, 8, 6)) {
      std::vector<Job> shifted;
      for (const auto& j : inst.jobs()) shifted.push_back({j.arrival + 3, 1});
      for (auto model : {CostModel::linear(1.5), CostModel::quadratic(1.5)})
        CHECK(dp_opt(inst, model).cost == doctest::Approx(dp_opt(ArrivalInstance(shifted), model).cost));
    }
  }

  TEST_CASE("delta flow of a lone job") {
    CHECK(delta_flow(batch(1), 0, 1, 1) == 1);
    CHECK_THROWS(delta_flow(batch(2), 5, 1, 1));
  }

  TEST_CASE("delta flow of the last job of a batch is at most its sojourn") {
    for (int n = 1; n <= 30; ++n) {
      const auto tr = simulate(batch(n), make_quad_alg(1, 1));
      CHECK(delta_flow(batch(n), static_cast<JobId>(n - 1), 1, 1) <= static_cast<double>(tr.departures.back()));
    }
  }

  TEST_CASE("delta flows telescope to the flow time on batches") {
    for (int n : {1, 5, 17}) {
      double sum = 0.0;
      for (JobId j = 0; j < static_cast<JobId>(n); ++j) sum += delta_flow(batch(n), j, 2, 2.177);
      CHECK(sum == static_cast<double>(simulate(batch(n), make_quad_alg(2, 2.177)).flow_time()));
    }
  }

  TEST_CASE("dual certificate arithmetic") {
    const double beta = std::sqrt(3.0);
    CHECK(40 * (4 * beta * beta - 9) / (4 * beta * beta) == doctest::Approx(10));
    for (const auto& inst : testing::random_corpus(30, 61)) {
      const auto cert = dual_lower_bound(inst, 1.5, beta);
      CHECK(cert.bound == doctest::Approx(cert.flow_alg * 0.25));
      CHECK(cert.flow_alg == static_cast<double>(simulate(inst, make_quad_alg(1.5, beta)).flow_time()));
      for (JobId j = 0; j < inst.size(); ++j) CHECK(cert.lambdas[j] == delta_flow(inst, j, 1.5, beta));
    }
    const auto flat = dual_lower_bound(batch(4), 1, 1.4);
    CHECK(flat.degenerate);
    CHECK(flat.bound <= 0);
  }

  TEST_CASE("weak duality on a batch of four") {
    const auto cert = dual_lower_bound(batch(4), 1, std::sqrt(3.0));
    CHECK(cert.bound <= dp_opt(batch(4), CostModel::quadratic(1)).cost);
    CHECK(cert.per_pair_slack <= 0);
  }

  TEST_CASE("simplex projection matches a bisection on the threshold") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 2);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x(1 + trial % 9);
      for (double& v : x) v = g(rng);
      const double total = 0.5 + trial % 4;
      std::vector<double> y = x;
      project_simplex(y, total);
      double lo = -100, hi = 100;
      for (int it = 0; it < 200; ++it) {
        const double tau = 0.5 * (lo + hi);
        double s = 0.0;
        for (double v : x) s += std::max(v - tau, 0.0);
        (s > total ? lo : hi) = tau;
      }
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(std::max(x[i] - lo, 0.0)).epsilon(1e-9));
    }
  }

  TEST_CASE("convex batch solver agrees with support enumeration") {
    for (double n : {0.5, 1.0, 4.0, 10.0, 30.0})
      for (int H = 1; H <= 8; ++H)
        for (double alpha : {0.5, 1.0, 3.0}) {
          std::vector<double> ref;
          const double best = support_enumeration_min(n, H, alpha, &ref);
          const auto res = convex_batch_solve(n, H, alpha);
          CHECK(res.objective == doctest::Approx(best).epsilon(1e-9));
          CHECK(res.kkt_residual <= 1e-8);
          CHECK(std::accumulate(res.profile.begin(), res.profile.end(), 0.0) == doctest::Approx(n).epsilon(1e-12));
          for (int i = 0; i < H; ++i) CHECK(res.profile[i] == doctest::Approx(ref[i]).epsilon(1e-6));
        }
  }

  TEST_CASE("convex batch solver edge cases") {
    const auto zero = convex_batch_solve(0, 5, 1);
    for (double v : zero.profile) CHECK(v == 0);
    const auto one = convex_batch_solve(1, 1, 1);
    CHECK(one.profile == std::vector<double>{1.0});
    CHECK(one.objective + 1 == dp_opt(batch(1), CostModel::quadratic(1)).cost);
    CHECK_THROWS_AS(convex_batch_solve(1, 0, 1), DomainError);
  }
}
