#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "capprov/core.hpp"

namespace capprov {

enum class GeneratorKind { Batch, Periodic, Sigma1, Sigma2, RandomSlotted };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Batch;
  std::map<std::string, double> params;
};

/// N jobs of size w at slot 1.
ArrivalInstance batch(std::int64_t N, std::int64_t w = 1);
/// x unit jobs at each of the slots 2, 4, ..., 2k. x must be even.
ArrivalInstance periodic(std::int64_t x, std::int64_t k);
/// N unit jobs at slot 1.
ArrivalInstance sigma1(std::int64_t N);
/// N unit jobs at each of the slots 1..T.
ArrivalInstance sigma2(std::int64_t N, std::int64_t T);
/// Poisson(rate) unit jobs in each of the slots 1..T, drawn from mt19937_64(seed).
ArrivalInstance random_slotted(double rate, std::int64_t T, std::uint64_t seed);

/// Parses `kind:key=value,...` (also `kind(key=value,...)`), e.g. `batch:N=4`, `periodic:x=4,k=50`,
/// `random:rate=5,T=1000,seed=3`. Throws Error on malformed specs.
GeneratorSpec parse_generator(std::string_view spec);
ArrivalInstance generate(const GeneratorSpec& spec, std::uint64_t default_seed = 1);

}  // namespace capprov
