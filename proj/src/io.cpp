#include "capprov/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace capprov {

ArrivalInstance read_instance(std::istream& in, std::string id) {
  std::vector<Job> jobs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Slot t = 0;
    std::int64_t w = 0;
    if (!(ls >> t)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError("instance line " + std::to_string(lineno) + ": expected `t w`");
    }
    if (!(ls >> w)) throw ParseError("instance line " + std::to_string(lineno) + ": missing size");
    std::string extra;
    if (ls >> extra) throw ParseError("instance line " + std::to_string(lineno) + ": trailing tokens");
    if (t < 1 || w < 1) throw ParseError("instance line " + std::to_string(lineno) + ": slot and size must be >= 1");
    jobs.push_back({t, w});
  }
  return ArrivalInstance(std::move(jobs), std::nullopt, std::move(id));
}

ArrivalInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path);
  return read_instance(in, path);
}

void write_instance(std::ostream& out, const ArrivalInstance& instance) {
  out << "# t w\n";
  for (const auto& j : instance.jobs()) out << j.arrival << ' ' << j.size << '\n';
}

void write_trace_csv(std::ostream& out, const ScheduleTrace& trace) {
  out << "t,n,s,served_ids\n";
  for (const auto& r : trace.slots) {
    out << r.t << ',' << r.n << ',' << r.s << ',';
    for (std::size_t i = 0; i < r.served.size(); ++i) {
      if (i) out << ';';
      out << r.served[i];
    }
    out << '\n';
  }
}

ScheduleTrace read_trace_csv(std::istream& in, std::size_t job_count) {
  ScheduleTrace trace;
  trace.departures.assign(job_count, 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("t,", 0) == 0)) continue;
    std::istringstream ls(line);
    std::string field;
    SlotRecord rec;
    try {
      std::getline(ls, field, ',');
      rec.t = std::stoll(field);
      std::getline(ls, field, ',');
      rec.n = std::stoll(field);
      std::getline(ls, field, ',');
      rec.s = std::stoll(field);
    } catch (const std::exception&) {
      throw ParseError("trace line " + std::to_string(lineno) + ": malformed numeric field");
    }
    if (std::getline(ls, field)) {
      std::istringstream ids(field);
      std::string tok;
      while (std::getline(ids, tok, ';')) {
        if (tok.empty()) continue;
        JobId j = std::stoull(tok);
        rec.served.push_back(j);
        if (j < job_count) trace.departures[j] = rec.t;
      }
    }
    trace.slots.push_back(std::move(rec));
  }
  return trace;
}

nlohmann::json to_json(const CostBreakdown& cost, const CostModel& model) {
  return nlohmann::json{{"flow_time", cost.flow_time},
                        {"switching_cost", cost.switching_cost},
                        {"energy_cost", cost.energy_cost},
                        {"total", cost.total},
                        {"alpha", model.alpha},
                        {"switching_kind", to_string(model.switching)}};
}

}  // namespace capprov
