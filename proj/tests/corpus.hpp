#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "capprov/core.hpp"

namespace capprov::testing {

// Seeded random unit-job instances: 1..max_jobs jobs spread uniformly over slots 1..T, T in 1..max_T.
inline std::vector<ArrivalInstance> random_corpus(std::size_t count, std::uint64_t seed, int max_jobs = 10,
                                                  int max_T = 10) {
  std::mt19937_64 rng(seed);
  std::vector<ArrivalInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int jobs = std::uniform_int_distribution<int>(1, max_jobs)(rng);
    const int T = std::uniform_int_distribution<int>(1, max_T)(rng);
    std::uniform_int_distribution<int> slot(1, T);
    std::vector<Job> list;
    for (int j = 0; j < jobs; ++j) list.push_back({slot(rng), 1});
    out.emplace_back(std::move(list), T, "corpus#" + std::to_string(i));
  }
  return out;
}

}  // namespace capprov::testing
