#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace capprov {

using Slot = std::int64_t;
using JobId = std::size_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A malformed policy, instance or model spec string.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A job record: arrival slot a_j >= 1 and integral size w_j >= 1.
struct Job {
  Slot arrival = 1;
  std::int64_t size = 1;
};

/**
 * The full arrival schedule of an instance.
 *
 * Jobs are stable-sorted by arrival slot on construction, so the job id of a
 * record is its position in that order and same-slot arrivals keep their
 * input order.
 */
class ArrivalInstance {
 public:
  ArrivalInstance() = default;
  explicit ArrivalInstance(std::vector<Job> jobs, std::optional<Slot> horizon_hint = std::nullopt,
                           std::string id = {});

  std::span<const Job> jobs() const { return jobs_; }
  const Job& job(JobId j) const { return jobs_.at(j); }
  std::size_t size() const { return jobs_.size(); }
  bool empty() const { return jobs_.empty(); }

  /// Largest arrival slot, 0 for the empty instance.
  Slot last_arrival() const { return jobs_.empty() ? 0 : jobs_.back().arrival; }
  std::int64_t total_work() const { return total_work_; }
  /// w(t): total size of jobs arriving in slot t.
  std::int64_t work_at(Slot t) const;
  /// Number of jobs arriving in slot t.
  std::int64_t count_at(Slot t) const;
  std::int64_t max_slot_arrivals() const;

  bool unit_sizes() const;
  bool equal_sizes() const;

  std::optional<Slot> horizon_hint() const { return horizon_hint_; }
  const std::string& id() const { return id_; }

  /// The first `count` jobs by id.
  ArrivalInstance prefix(std::size_t count) const;
  /// The instance with job j removed (later ids shift down by one).
  ArrivalInstance without(JobId j) const;

 private:
  std::vector<Job> jobs_;
  std::optional<Slot> horizon_hint_;
  std::string id_;
  std::int64_t total_work_ = 0;
};

enum class SwitchingKind { Linear, Quadratic };

std::string to_string(SwitchingKind kind);

/// Switching-cost family with weight alpha and optional energy weight theta.
struct CostModel {
  SwitchingKind switching = SwitchingKind::Quadratic;
  double alpha = 1.0;
  double theta = 0.0;

  CostModel() = default;
  CostModel(SwitchingKind kind, double alpha, double theta = 0.0);

  static CostModel linear(double alpha, double theta = 0.0) { return {SwitchingKind::Linear, alpha, theta}; }
  static CostModel quadratic(double alpha, double theta = 0.0) {
    return {SwitchingKind::Quadratic, alpha, theta};
  }

  /// Unweighted c(s, s_prev).
  double switching_cost(double s, double s_prev) const;
};

struct SlotRecord {
  Slot t = 0;
  std::int64_t n = 0;  // outstanding jobs at the start of the slot (after arrivals)
  std::int64_t s = 0;  // active servers
  std::vector<JobId> served;
};

struct ScheduleTrace {
  std::vector<SlotRecord> slots;  // contiguous, slots[i].t == i + 1
  std::vector<Slot> departures;   // d_j: slot in which job j completes
  std::string policy_name;
  std::string instance_id;

  Slot horizon() const { return static_cast<Slot>(slots.size()); }
  std::vector<std::int64_t> server_counts() const;
  std::vector<std::int64_t> occupancy() const;
  std::int64_t flow_time() const;
  /// Last slot with a nonzero server count, 0 if none.
  Slot makespan() const;
};

struct CostBreakdown {
  std::int64_t flow_time = 0;
  double switching_cost = 0.0;  // unweighted sum of c(s(t), s(t-1)), incl. the final drop to 0
  double energy_cost = 0.0;
  double total = 0.0;
};

enum class Invariant {
  None,
  SlotOrder,
  NegativeCount,
  ServersExceedOccupancy,
  WorkNeutrality,
  ServedCountMismatch,
  InvalidServedJob,
  OccupancyMismatch,
  IncompleteJob,
  DepartureMismatch,
};

std::string to_string(Invariant inv);

struct ValidationResult {
  Invariant violated = Invariant::None;
  Slot slot = 0;
  std::optional<JobId> job;
  std::string message;

  bool ok() const { return violated == Invariant::None; }
  explicit operator bool() const { return ok(); }
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationResult result);
  const ValidationResult& result() const { return result_; }

 private:
  ValidationResult result_;
};

/// Checks every trace invariant against the instance; reports the first violation.
ValidationResult validate_trace(const ArrivalInstance& instance, const ScheduleTrace& trace);

/// Cost over the trace alone. Checks the instance-free invariants (slot order, counts, s <= n).
CostBreakdown cost_of_trace(const ScheduleTrace& trace, const CostModel& model);
/// Full validation against the instance, then cost. Throws ValidationError.
CostBreakdown cost_of_trace(const ArrivalInstance& instance, const ScheduleTrace& trace,
                            const CostModel& model);

/// Cost of a bare server-count sequence and its occupancy (s(0) = 0, final drop charged).
CostBreakdown cost_of_counts(std::span<const std::int64_t> occupancy, std::span<const std::int64_t> servers,
                             const CostModel& model);

}  // namespace capprov
