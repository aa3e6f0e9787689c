#include "capprov/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace capprov {

ArrivalInstance::ArrivalInstance(std::vector<Job> jobs, std::optional<Slot> horizon_hint, std::string id)
    : jobs_(std::move(jobs)), horizon_hint_(horizon_hint), id_(std::move(id)) {
  for (std::size_t j = 0; j < jobs_.size(); ++j) {
    if (jobs_[j].arrival < 1 || jobs_[j].size < 1) {
      ValidationResult r;
      r.violated = Invariant::NegativeCount;
      r.slot = jobs_[j].arrival;
      r.job = j;
      r.message = "job records need slot >= 1 and size >= 1";
      throw ValidationError(std::move(r));
    }
    total_work_ += jobs_[j].size;
  }
  std::stable_sort(jobs_.begin(), jobs_.end(),
                   [](const Job& a, const Job& b) { return a.arrival < b.arrival; });
}

namespace {

auto slot_range(std::span<const Job> jobs, Slot t) {
  auto lo = std::lower_bound(jobs.begin(), jobs.end(), t,
                             [](const Job& j, Slot v) { return j.arrival < v; });
  auto hi = std::upper_bound(lo, jobs.end(), t, [](Slot v, const Job& j) { return v < j.arrival; });
  return std::pair{lo, hi};
}

}  // namespace

std::int64_t ArrivalInstance::work_at(Slot t) const {
  auto [lo, hi] = slot_range(jobs_, t);
  std::int64_t w = 0;
  for (auto it = lo; it != hi; ++it) w += it->size;
  return w;
}

std::int64_t ArrivalInstance::count_at(Slot t) const {
  auto [lo, hi] = slot_range(jobs_, t);
  return hi - lo;
}

std::int64_t ArrivalInstance::max_slot_arrivals() const {
  std::int64_t best = 0;
  std::size_t i = 0;
  while (i < jobs_.size()) {
    std::size_t k = i;
    while (k < jobs_.size() && jobs_[k].arrival == jobs_[i].arrival) ++k;
    best = std::max<std::int64_t>(best, static_cast<std::int64_t>(k - i));
    i = k;
  }
  return best;
}

bool ArrivalInstance::unit_sizes() const {
  return std::all_of(jobs_.begin(), jobs_.end(), [](const Job& j) { return j.size == 1; });
}

bool ArrivalInstance::equal_sizes() const {
  return std::all_of(jobs_.begin(), jobs_.end(), [&](const Job& j) { return j.size == jobs_.front().size; });
}

ArrivalInstance ArrivalInstance::prefix(std::size_t count) const {
  count = std::min(count, jobs_.size());
  return ArrivalInstance(std::vector<Job>(jobs_.begin(), jobs_.begin() + static_cast<std::ptrdiff_t>(count)),
                         horizon_hint_, id_);
}

ArrivalInstance ArrivalInstance::without(JobId j) const {
  std::vector<Job> rest;
  rest.reserve(jobs_.size());
  for (std::size_t k = 0; k < jobs_.size(); ++k)
    if (k != j) rest.push_back(jobs_[k]);
  return ArrivalInstance(std::move(rest), horizon_hint_, id_);
}

std::string to_string(SwitchingKind kind) { return kind == SwitchingKind::Linear ? "linear" : "quadratic"; }

CostModel::CostModel(SwitchingKind kind, double alpha_, double theta_)
    : switching(kind), alpha(alpha_), theta(theta_) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("cost model: alpha must be positive and finite");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw Error("cost model: theta must be nonnegative");
}

double CostModel::switching_cost(double s, double s_prev) const {
  const double d = s - s_prev;
  return switching == SwitchingKind::Linear ? std::abs(d) : d * d;
}

std::vector<std::int64_t> ScheduleTrace::server_counts() const {
  std::vector<std::int64_t> out;
  out.reserve(slots.size());
  for (const auto& r : slots) out.push_back(r.s);
  return out;
}

std::vector<std::int64_t> ScheduleTrace::occupancy() const {
  std::vector<std::int64_t> out;
  out.reserve(slots.size());
  for (const auto& r : slots) out.push_back(r.n);
  return out;
}

std::int64_t ScheduleTrace::flow_time() const {
  std::int64_t f = 0;
  for (const auto& r : slots) f += r.n;
  return f;
}

Slot ScheduleTrace::makespan() const {
  for (auto it = slots.rbegin(); it != slots.rend(); ++it)
    if (it->s > 0) return it->t;
  return 0;
}

std::string to_string(Invariant inv) {
  switch (inv) {
    case Invariant::None: return "none";
    case Invariant::SlotOrder: return "slot_order";
    case Invariant::NegativeCount: return "negative_count";
    case Invariant::ServersExceedOccupancy: return "servers_exceed_occupancy";
    case Invariant::WorkNeutrality: return "work_neutrality";
    case Invariant::ServedCountMismatch: return "served_count_mismatch";
    case Invariant::InvalidServedJob: return "invalid_served_job";
    case Invariant::OccupancyMismatch: return "occupancy_mismatch";
    case Invariant::IncompleteJob: return "incomplete_job";
    case Invariant::DepartureMismatch: return "departure_mismatch";
  }
  return "unknown";
}

namespace {

std::string describe(const ValidationResult& r) {
  std::ostringstream os;
  os << "trace invariant violated: " << to_string(r.violated) << " at slot " << r.slot;
  if (r.job) os << " (job " << *r.job << ")";
  if (!r.message.empty()) os << ": " << r.message;
  return os.str();
}

ValidationResult fail(Invariant inv, Slot t, std::optional<JobId> job, std::string msg) {
  ValidationResult r;
  r.violated = inv;
  r.slot = t;
  r.job = job;
  r.message = std::move(msg);
  return r;
}

// Checks that need only the trace itself.
ValidationResult check_intrinsic(const SlotRecord& rec, std::size_t index) {
  if (rec.t != static_cast<Slot>(index + 1))
    return fail(Invariant::SlotOrder, rec.t, std::nullopt, "slots must be contiguous from 1");
  if (rec.n < 0 || rec.s < 0) return fail(Invariant::NegativeCount, rec.t, std::nullopt, "");
  if (rec.s > rec.n)
    return fail(Invariant::ServersExceedOccupancy, rec.t, std::nullopt,
                "s=" + std::to_string(rec.s) + " > n=" + std::to_string(rec.n));
  return {};
}

}  // namespace

ValidationError::ValidationError(ValidationResult result) : Error(describe(result)), result_(std::move(result)) {}

ValidationResult validate_trace(const ArrivalInstance& instance, const ScheduleTrace& trace) {
  const auto jobs = instance.jobs();
  std::vector<std::int64_t> remaining(jobs.size());
  std::vector<Slot> completed(jobs.size(), 0);
  for (std::size_t j = 0; j < jobs.size(); ++j) remaining[j] = jobs[j].size;

  std::int64_t served_total = 0;
  std::int64_t arrived_work = 0;
  std::int64_t arrived_jobs = 0;
  std::int64_t departed_before = 0;  // jobs completed in slots < t
  std::size_t next = 0;
  std::vector<char> seen(jobs.size(), 0);

  for (std::size_t i = 0; i < trace.slots.size(); ++i) {
    const auto& rec = trace.slots[i];
    if (auto r = check_intrinsic(rec, i); !r) return r;
    const Slot t = rec.t;
    while (next < jobs.size() && jobs[next].arrival <= t) {
      arrived_work += jobs[next].size;
      ++arrived_jobs;
      ++next;
    }
    served_total += rec.s;
    if (served_total > arrived_work)
      return fail(Invariant::WorkNeutrality, t, std::nullopt,
                  "cumulative service " + std::to_string(served_total) + " exceeds arrived work " +
                      std::to_string(arrived_work));
    if (static_cast<std::int64_t>(rec.served.size()) != rec.s)
      return fail(Invariant::ServedCountMismatch, t, std::nullopt,
                  std::to_string(rec.served.size()) + " jobs listed for s=" + std::to_string(rec.s));
    for (JobId j : rec.served) {
      if (j >= jobs.size()) return fail(Invariant::InvalidServedJob, t, j, "unknown job id");
      if (jobs[j].arrival > t) return fail(Invariant::InvalidServedJob, t, j, "served before arrival");
      if (remaining[j] <= 0) return fail(Invariant::InvalidServedJob, t, j, "served after completion");
      if (seen[j]) return fail(Invariant::InvalidServedJob, t, j, "served twice in one slot");
      seen[j] = 1;
    }
    if (rec.n != arrived_jobs - departed_before)
      return fail(Invariant::OccupancyMismatch, t, std::nullopt,
                  "n=" + std::to_string(rec.n) + " but " + std::to_string(arrived_jobs - departed_before) +
                      " jobs are outstanding");
    for (JobId j : rec.served) {
      seen[j] = 0;
      if (--remaining[j] == 0) {
        completed[j] = t;
        ++departed_before;
      }
    }
  }
  const Slot end = trace.horizon();
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (remaining[j] > 0)
      return fail(Invariant::IncompleteJob, end, j,
                  std::to_string(remaining[j]) + " units of work left at the end of the trace");
  if (trace.departures.size() != jobs.size())
    return fail(Invariant::DepartureMismatch, end, std::nullopt, "departure list has wrong length");
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (trace.departures[j] != completed[j] || trace.departures[j] < jobs[j].arrival)
      return fail(Invariant::DepartureMismatch, trace.departures[j], j,
                  "recorded d_j=" + std::to_string(trace.departures[j]) + ", service ends in slot " +
                      std::to_string(completed[j]));
  return {};
}

CostBreakdown cost_of_counts(std::span<const std::int64_t> occupancy, std::span<const std::int64_t> servers,
                             const CostModel& model) {
  CostBreakdown c;
  std::int64_t prev = 0;
  std::int64_t served = 0;
  for (std::size_t i = 0; i < servers.size(); ++i) {
    c.flow_time += occupancy[i];
    c.switching_cost += model.switching_cost(static_cast<double>(servers[i]), static_cast<double>(prev));
    served += servers[i];
    prev = servers[i];
  }
  c.switching_cost += model.switching_cost(0.0, static_cast<double>(prev));
  c.energy_cost = model.theta * static_cast<double>(served);
  c.total = static_cast<double>(c.flow_time) + model.alpha * c.switching_cost + c.energy_cost;
  return c;
}

CostBreakdown cost_of_trace(const ScheduleTrace& trace, const CostModel& model) {
  for (std::size_t i = 0; i < trace.slots.size(); ++i)
    if (auto r = check_intrinsic(trace.slots[i], i); !r) throw ValidationError(std::move(r));
  const auto n = trace.occupancy();
  const auto s = trace.server_counts();
  return cost_of_counts(n, s, model);
}

CostBreakdown cost_of_trace(const ArrivalInstance& instance, const ScheduleTrace& trace, const CostModel& model) {
  if (auto r = validate_trace(instance, trace); !r) throw ValidationError(std::move(r));
  return cost_of_trace(trace, model);
}

}  // namespace capprov
