#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "capprov/core.hpp"

namespace capprov {

struct OutstandingJob {
  JobId id = 0;
  Slot arrival = 0;
  std::int64_t remaining = 0;
};

/// Everything a causal policy may look at in slot t. References are valid only
/// for the duration of the policy call.
class ObservableState {
 public:
  ObservableState(Slot t, std::int64_t s_prev, const std::deque<OutstandingJob>& outstanding,
                  std::span<const SlotRecord> history)
      : t_(t), s_prev_(s_prev), outstanding_(&outstanding), history_(history) {}

  Slot t() const { return t_; }
  std::int64_t n() const { return static_cast<std::int64_t>(outstanding_->size()); }
  std::int64_t s_prev() const { return s_prev_; }
  /// Outstanding jobs in SRPT order.
  const std::deque<OutstandingJob>& outstanding() const { return *outstanding_; }
  std::span<const SlotRecord> history() const { return history_; }

 private:
  Slot t_;
  std::int64_t s_prev_;
  const std::deque<OutstandingJob>* outstanding_;
  std::span<const SlotRecord> history_;
};

/// A named rule mapping the observable state to a requested server count.
/// The request must be a finite, integral value; ceiling happens in the policy.
struct Policy {
  std::string name;
  std::function<double(const ObservableState&)> decide;

  double operator()(const ObservableState& state) const { return decide(state); }
};

class PolicyFault : public Error {
 public:
  using Error::Error;
};

class StallError : public Error {
 public:
  using Error::Error;
};

/// Ids of the min(k, |outstanding|) jobs with the shortest remaining work,
/// ties by arrival slot then id.
std::vector<JobId> srpt_select(std::span<const OutstandingJob> outstanding, std::int64_t k);

struct SimOptions {
  bool record_served = true;
  /// One JSON object per slot when set.
  std::ostream* event_stream = nullptr;
};

ScheduleTrace simulate(const ArrivalInstance& instance, const Policy& policy, const SimOptions& options = {});

struct PolicyRun {
  ScheduleTrace trace;
  CostBreakdown cost;
};

PolicyRun run_policy(const ArrivalInstance& instance, const Policy& policy, const CostModel& model,
                     const SimOptions& options = {});

/// Executes a fixed server-count schedule with SRPT job selection, clamping each
/// count to the outstanding count. Trailing idle slots are dropped. Throws
/// ValidationError if work is left when the schedule ends.
ScheduleTrace replay(const ArrivalInstance& instance, std::span<const std::int64_t> servers,
                     std::string name = "replay");

}  // namespace capprov
