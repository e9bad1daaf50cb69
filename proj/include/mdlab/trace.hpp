#ifndef MDLAB_TRACE_HPP
#define MDLAB_TRACE_HPP

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace mdlab {

/// One event of an online run. "phase" marks an edge being used to connect a
/// pair (the edge's counter lifecycle starts over). sign is +1/-1 for the
/// bipartite algorithm's two forests, 0 otherwise.
struct TraceEvent {
  enum class Kind { Arrival, Buy, Match, Phase };
  Kind kind = Kind::Arrival;
  double t = 0.0;
  int vertex = -1;  // leaf for arrivals, edge's child vertex for buy/phase
  int a = -1, b = -1;  // matched request ids
  int sign = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind) {
      case Kind::Arrival:
        j["kind"] = "arrival";
        j["t"] = t;
        j["vertex"] = vertex;
        j["id"] = a;
        break;
      case Kind::Buy:
        j["kind"] = "buy";
        j["t"] = t;
        j["vertex"] = vertex;
        if (sign != 0) j["sign"] = sign;
        break;
      case Kind::Match:
        j["kind"] = "match";
        j["t"] = t;
        j["pair"] = {a, b};
        break;
      case Kind::Phase:
        j["kind"] = "phase";
        j["t"] = t;
        j["vertex"] = vertex;
        if (sign != 0) j["sign"] = sign;
        break;
    }
    return j;
  }
};

inline void write_trace_jsonl(const std::vector<TraceEvent>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const TraceEvent& e : trace) out << e.to_json().dump() << '\n';
}

/// Thrown when a runtime invariant of an online algorithm fails.
struct InvariantViolation : std::logic_error {
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace mdlab

#endif
