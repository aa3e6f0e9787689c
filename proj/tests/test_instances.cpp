#include <doctest.h>

#include <cmath>

#include "capprov/engine.hpp"
#include "capprov/instances.hpp"
#include "capprov/policies.hpp"

using namespace capprov;

TEST_SUITE("instances") {
  TEST_CASE("batch") {
    CHECK(batch(1).size() == 1);
    CHECK(batch(100).count_at(1) == 100);
    CHECK(batch(0).empty());
    CHECK(batch(3, 4).total_work() == 12);
  }

  TEST_CASE("periodic") {
    const auto one = periodic(2, 1);
    CHECK(one.size() == 2);
    CHECK(one.count_at(2) == 2);
    CHECK(periodic(4, 3).size() == 12);
    CHECK(periodic(4, 3).count_at(6) == 4);
    CHECK(periodic(4, 3).count_at(5) == 0);
    CHECK(periodic(4, 0).empty());
    CHECK_THROWS_AS(periodic(3, 2), DomainError);
  }

  TEST_CASE("sigma instances") {
    CHECK(sigma1(5).count_at(1) == 5);
    CHECK(sigma2(3, 4).size() == 12);
    const auto a = sigma2(6, 1), b = sigma1(6);
    REQUIRE(a.size() == b.size());
    for (JobId j = 0; j < a.size(); ++j) CHECK(a.job(j).arrival == b.job(j).arrival);
  }

  TEST_CASE("random slotted is reproducible with the requested mean load") {
    const auto a = random_slotted(5, 1000, 9), b = random_slotted(5, 1000, 9);
    REQUIRE(a.size() == b.size());
    for (JobId j = 0; j < a.size(); ++j) CHECK(a.job(j).arrival == b.job(j).arrival);
    CHECK(random_slotted(5, 0, 1).empty());
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto inst = random_slotted(5, 1000, seed);
      CHECK(std::abs(static_cast<double>(inst.size()) / 1000 - 5) <= 0.5);
      CHECK(inst.unit_sizes());
      CHECK(inst.last_arrival() <= 1000);
    }
  }

  TEST_CASE("generator specs") {
    CHECK(generate(parse_generator("batch:N=4")).size() == 4);
    CHECK(generate(parse_generator("periodic(x=4,k=50)")).size() == 200);
    CHECK(generate(parse_generator("sigma2:N=3,T=4")).size() == 12);
    const auto r1 = generate(parse_generator("random:rate=5,T=100,seed=3"));
    const auto r2 = generate(parse_generator("random_slotted:rate=5,T=100"), 3);
    CHECK(r1.size() == r2.size());
    CHECK(generate(parse_generator("batch:N=4")).id() == "batch:N=4,w=1");
    CHECK_THROWS_AS(parse_generator("wave:N=3"), SpecError);
    CHECK_THROWS_AS(parse_generator("batch:N"), SpecError);
    CHECK_THROWS_AS(generate(parse_generator("batch:w=2")), SpecError);
  }

  TEST_CASE("gamma policy on repeated batches settles at its fixed point") {
    // leftover m after service follows m' = m + N - ceil((m + N) / q), fixed point (q - 1) N
    for (double alpha : {16.0, 81.0})
      for (double gamma : {0.25, 0.5}) {
        const std::int64_t N = 20;
        const auto tr = simulate(sigma2(N, 200), make_a_gamma(alpha, gamma));
        const double q = std::pow(alpha, gamma);
        for (Slot t = 150; t <= 200; ++t) {
          const auto& slot = tr.slots[static_cast<std::size_t>(t - 1)];
          CHECK(std::abs(static_cast<double>(slot.n - slot.s) - (q - 1) * N) <= N);
        }
      }
  }
}
