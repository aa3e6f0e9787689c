#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "capprov/core.hpp"

namespace capprov {

class ParseError : public Error {
 public:
  using Error::Error;
};

// Instance text format: one `t w` record per line, `#` starts a comment.
ArrivalInstance read_instance(std::istream& in, std::string id = {});
ArrivalInstance read_instance_file(const std::string& path);
void write_instance(std::ostream& out, const ArrivalInstance& instance);

// Trace CSV: header `t,n,s,served_ids`, served ids separated by ';'.
void write_trace_csv(std::ostream& out, const ScheduleTrace& trace);
/// Departures are rebuilt from the last slot in which each job is served.
ScheduleTrace read_trace_csv(std::istream& in, std::size_t job_count);

nlohmann::json to_json(const CostBreakdown& cost, const CostModel& model);

}  // namespace capprov
