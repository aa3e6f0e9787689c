#include "capprov/instances.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

namespace capprov {

namespace {

void require_nonnegative(std::int64_t v, const char* what) {
  if (v < 0) throw DomainError(std::string(what) + " must be >= 0");
}

}  // namespace

ArrivalInstance batch(std::int64_t N, std::int64_t w) {
  require_nonnegative(N, "N");
  if (w < 1) throw DomainError("job size must be >= 1");
  return ArrivalInstance(std::vector<Job>(static_cast<std::size_t>(N), Job{1, w}), 1,
                         "batch:N=" + std::to_string(N) + ",w=" + std::to_string(w));
}

ArrivalInstance periodic(std::int64_t x, std::int64_t k) {
  require_nonnegative(x, "x");
  require_nonnegative(k, "k");
  if (x % 2 != 0) throw DomainError("periodic needs an even x");
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(x * k));
  for (std::int64_t i = 1; i <= k; ++i)
    for (std::int64_t c = 0; c < x; ++c) jobs.push_back({2 * i, 1});
  return ArrivalInstance(std::move(jobs), 2 * k, "periodic:x=" + std::to_string(x) + ",k=" + std::to_string(k));
}

ArrivalInstance sigma1(std::int64_t N) {
  require_nonnegative(N, "N");
  return ArrivalInstance(std::vector<Job>(static_cast<std::size_t>(N), Job{1, 1}), 1,
                         "sigma1:N=" + std::to_string(N));
}

ArrivalInstance sigma2(std::int64_t N, std::int64_t T) {
  require_nonnegative(N, "N");
  require_nonnegative(T, "T");
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(N * T));
  for (std::int64_t t = 1; t <= T; ++t)
    for (std::int64_t c = 0; c < N; ++c) jobs.push_back({t, 1});
  return ArrivalInstance(std::move(jobs), T, "sigma2:N=" + std::to_string(N) + ",T=" + std::to_string(T));
}

ArrivalInstance random_slotted(double rate, std::int64_t T, std::uint64_t seed) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("rate must be positive");
  require_nonnegative(T, "T");
  std::mt19937_64 rng(seed);
  std::poisson_distribution<std::int64_t> load(rate);
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(rate * static_cast<double>(T) * 1.1) + 16);
  for (std::int64_t t = 1; t <= T; ++t) {
    const auto count = load(rng);
    for (std::int64_t c = 0; c < count; ++c) jobs.push_back({t, 1});
  }
  std::ostringstream id;
  id << "random:rate=" << rate << ",T=" << T << ",seed=" << seed;
  return ArrivalInstance(std::move(jobs), T, id.str());
}

GeneratorSpec parse_generator(std::string_view spec) {
  std::string_view name = spec;
  std::string_view args;
  if (auto open = spec.find('('); open != std::string_view::npos) {
    if (spec.back() != ')') throw SpecError("instance spec `" + std::string(spec) + "`: missing `)`");
    name = spec.substr(0, open);
    args = spec.substr(open + 1, spec.size() - open - 2);
  } else if (auto colon = spec.find(':'); colon != std::string_view::npos) {
    name = spec.substr(0, colon);
    args = spec.substr(colon + 1);
  }
  GeneratorSpec out;
  const std::string n(name);
  if (n == "batch") {
    out.kind = GeneratorKind::Batch;
  } else if (n == "periodic") {
    out.kind = GeneratorKind::Periodic;
  } else if (n == "sigma1") {
    out.kind = GeneratorKind::Sigma1;
  } else if (n == "sigma2") {
    out.kind = GeneratorKind::Sigma2;
  } else if (n == "random" || n == "random_slotted") {
    out.kind = GeneratorKind::RandomSlotted;
  } else {
    throw SpecError("unknown instance generator `" + n + "`");
  }
  std::size_t pos = 0;
  while (pos < args.size()) {
    auto comma = args.find(',', pos);
    if (comma == std::string_view::npos) comma = args.size();
    const std::string item(args.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw SpecError("instance parameter `" + item + "` needs key=value");
    const std::string value = item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size())
      throw SpecError("instance parameter `" + item + "` is not numeric");
    out.params[item.substr(0, eq)] = v;
  }
  return out;
}

namespace {

std::int64_t integer_param(const GeneratorSpec& spec, const std::string& key, std::optional<std::int64_t> fallback) {
  auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    if (!fallback) throw SpecError("instance spec is missing `" + key + "`");
    return *fallback;
  }
  if (it->second != std::floor(it->second)) throw SpecError("instance parameter `" + key + "` must be an integer");
  return static_cast<std::int64_t>(it->second);
}

}  // namespace

ArrivalInstance generate(const GeneratorSpec& spec, std::uint64_t default_seed) {
  switch (spec.kind) {
    case GeneratorKind::Batch:
      return batch(integer_param(spec, "N", std::nullopt), integer_param(spec, "w", 1));
    case GeneratorKind::Periodic:
      return periodic(integer_param(spec, "x", std::nullopt), integer_param(spec, "k", std::nullopt));
    case GeneratorKind::Sigma1:
      return sigma1(integer_param(spec, "N", std::nullopt));
    case GeneratorKind::Sigma2:
      return sigma2(integer_param(spec, "N", std::nullopt), integer_param(spec, "T", std::nullopt));
    case GeneratorKind::RandomSlotted: {
      auto it = spec.params.find("rate");
      if (it == spec.params.end()) throw SpecError("instance spec is missing `rate`");
      const auto seed = integer_param(spec, "seed", static_cast<std::int64_t>(default_seed));
      return random_slotted(it->second, integer_param(spec, "T", std::nullopt), static_cast<std::uint64_t>(seed));
    }
  }
  throw SpecError("unknown generator kind");
}

}  // namespace capprov
