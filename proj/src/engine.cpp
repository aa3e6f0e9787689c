#include "capprov/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include <json.hpp>

namespace capprov {

namespace {

bool srpt_before(const OutstandingJob& a, const OutstandingJob& b) {
  return std::tie(a.remaining, a.arrival, a.id) < std::tie(b.remaining, b.arrival, b.id);
}

// Outstanding jobs kept in SRPT order. Serving the first k jobs one unit each
// keeps the order intact, so only arrivals need a sorted insert.
class JobPool {
 public:
  void add(JobId id, const Job& job) {
    OutstandingJob o{id, job.arrival, job.size};
    if (jobs_.empty() || !srpt_before(o, jobs_.back())) {
      jobs_.push_back(o);
    } else {
      jobs_.insert(std::upper_bound(jobs_.begin(), jobs_.end(), o, srpt_before), o);
    }
  }

  // Serves the first k jobs; returns the ids served, marks completions.
  template <class OnServe, class OnDepart>
  void serve(std::int64_t k, OnServe&& on_serve, OnDepart&& on_depart) {
    const auto count = static_cast<std::size_t>(std::min<std::int64_t>(k, size()));
    for (std::size_t i = 0; i < count; ++i) {
      on_serve(jobs_[i].id);
      --jobs_[i].remaining;
    }
    while (!jobs_.empty() && jobs_.front().remaining == 0) {
      on_depart(jobs_.front().id);
      jobs_.pop_front();
    }
  }

  std::int64_t size() const { return static_cast<std::int64_t>(jobs_.size()); }
  bool empty() const { return jobs_.empty(); }
  const std::deque<OutstandingJob>& view() const { return jobs_; }

 private:
  std::deque<OutstandingJob> jobs_;
};

std::int64_t checked_request(double request, const Policy& policy, Slot t) {
  if (!std::isfinite(request))
    throw PolicyFault("policy " + policy.name + " returned a non-finite value at slot " + std::to_string(t));
  if (request <= 0.0) return 0;
  if (request != std::floor(request))
    throw PolicyFault("policy " + policy.name + " returned non-integral " + std::to_string(request) +
                      " at slot " + std::to_string(t));
  if (request > 9.0e18) return INT64_MAX;
  return static_cast<std::int64_t>(request);
}

}  // namespace

std::vector<JobId> srpt_select(std::span<const OutstandingJob> outstanding, std::int64_t k) {
  std::vector<OutstandingJob> order(outstanding.begin(), outstanding.end());
  const auto count = static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(order.size())));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), srpt_before);
  std::vector<JobId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ids.push_back(order[i].id);
  return ids;
}

ScheduleTrace simulate(const ArrivalInstance& instance, const Policy& policy, const SimOptions& options) {
  ScheduleTrace trace;
  trace.policy_name = policy.name;
  trace.instance_id = instance.id();
  const auto jobs = instance.jobs();
  trace.departures.assign(jobs.size(), 0);

  const std::int64_t stall_limit = instance.total_work() + instance.last_arrival();
  std::int64_t stalled = 0;
  JobPool pool;
  std::size_t next = 0;
  std::int64_t s_prev = 0;

  for (Slot t = 1; next < jobs.size() || !pool.empty(); ++t) {
    for (; next < jobs.size() && jobs[next].arrival == t; ++next) pool.add(next, jobs[next]);

    SlotRecord rec;
    rec.t = t;
    rec.n = pool.size();
    if (rec.n > 0) {
      const ObservableState state(t, s_prev, pool.view(), trace.slots);
      const std::int64_t request = checked_request(policy(state), policy, t);
      rec.s = std::min(request, rec.n);
      if (rec.s == 0) {
        if (++stalled >= stall_limit)
          throw StallError("policy " + policy.name + " kept zero servers with work outstanding for " +
                           std::to_string(stalled) + " slots");
      } else {
        stalled = 0;
      }
    }
    if (options.record_served) rec.served.reserve(static_cast<std::size_t>(rec.s));
    pool.serve(
        rec.s,
        [&](JobId j) {
          if (options.record_served) rec.served.push_back(j);
        },
        [&](JobId j) { trace.departures[j] = t; });

    if (options.event_stream) {
      nlohmann::json ev{{"t", rec.t}, {"n", rec.n}, {"s", rec.s}, {"policy", policy.name}};
      if (options.record_served) ev["served"] = rec.served;
      *options.event_stream << ev.dump() << '\n';
    }
    s_prev = rec.s;
    trace.slots.push_back(std::move(rec));
  }
  return trace;
}

PolicyRun run_policy(const ArrivalInstance& instance, const Policy& policy, const CostModel& model,
                     const SimOptions& options) {
  PolicyRun run;
  run.trace = simulate(instance, policy, options);
  run.cost = cost_of_trace(run.trace, model);
  return run;
}

ScheduleTrace replay(const ArrivalInstance& instance, std::span<const std::int64_t> servers, std::string name) {
  ScheduleTrace trace;
  trace.policy_name = std::move(name);
  trace.instance_id = instance.id();
  const auto jobs = instance.jobs();
  trace.departures.assign(jobs.size(), 0);
  JobPool pool;
  std::size_t next = 0;
  for (std::size_t i = 0; i < servers.size(); ++i) {
    const Slot t = static_cast<Slot>(i + 1);
    for (; next < jobs.size() && jobs[next].arrival == t; ++next) pool.add(next, jobs[next]);
    SlotRecord rec;
    rec.t = t;
    rec.n = pool.size();
    rec.s = std::clamp<std::int64_t>(servers[i], 0, rec.n);
    pool.serve(rec.s, [&](JobId j) { rec.served.push_back(j); }, [&](JobId j) { trace.departures[j] = t; });
    trace.slots.push_back(std::move(rec));
  }
  if (next < jobs.size() || !pool.empty()) {
    ValidationResult r;
    r.violated = Invariant::IncompleteJob;
    r.slot = static_cast<Slot>(servers.size());
    r.job = pool.empty() ? next : pool.view().front().id;
    r.message = "schedule ends with work outstanding";
    throw ValidationError(std::move(r));
  }
  while (!trace.slots.empty() && trace.slots.back().n == 0) trace.slots.pop_back();
  return trace;
}

}  // namespace capprov
