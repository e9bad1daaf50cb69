#ifndef MDLAB_INSTANCE_HPP
#define MDLAB_INSTANCE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mdlab/metric.hpp"

namespace mdlab {

/// A request: point index, arrival time, and polarity (0 in the unpolarized
/// problem, +1/-1 in the bipartite one).
struct Request {
  int point = 0;
  double arrival = 0.0;
  int polarity = 0;
};

struct Instance {
  FiniteMetric metric;
  std::vector<Request> requests;

  int m() const { return static_cast<int>(requests.size()); }

  bool is_bipartite() const {
    for (const Request& r : requests)
      if (r.polarity == 0) return false;
    return !requests.empty();
  }

  /// arrivals nondecreasing, even m, points in range, polarities balanced if present
  void validate() const {
    if (m() % 2 != 0) throw std::invalid_argument("instance must have an even number of requests");
    int bal = 0, polarized = 0;
    for (int i = 0; i < m(); ++i) {
      const Request& r = requests[i];
      if (r.point < 0 || r.point >= metric.size())
        throw std::invalid_argument("request point out of range");
      if (i > 0 && r.arrival < requests[i - 1].arrival - kDistTol)
        throw std::invalid_argument("request arrivals must be nondecreasing");
      if (r.polarity != 0 && r.polarity != 1 && r.polarity != -1)
        throw std::invalid_argument("polarity must be -1, 0 or +1");
      bal += r.polarity;
      polarized += r.polarity != 0;
    }
    if (polarized != 0 && polarized != m())
      throw std::invalid_argument("either all or no requests must carry a polarity");
    if (polarized != 0 && bal != 0)
      throw std::invalid_argument("bipartite instance must be balanced");
  }
};

enum class CostSemantics { Online, Offline };

/// A perfect matching of the requests together with its two cost components.
/// Online semantics: delay of a pair matched at time tau is (tau - t_i) +
/// (tau - t_j). Offline semantics: the pair is served at max(t_i, t_j) and
/// its delay is |t_i - t_j|.
struct Schedule {
  struct Pair {
    int i = -1, j = -1;
    double match_time = 0.0;
  };
  std::vector<Pair> pairs;
  double connection_cost = 0.0;
  double delay_cost = 0.0;
  CostSemantics semantics = CostSemantics::Offline;

  double total() const { return connection_cost + delay_cost; }
};

inline void validate_schedule(const Schedule& s, const Instance& inst) {
  std::vector<char> seen(inst.m(), 0);
  if (static_cast<int>(s.pairs.size()) * 2 != inst.m())
    throw std::invalid_argument("schedule is not a perfect matching");
  for (const Schedule::Pair& p : s.pairs) {
    if (p.i < 0 || p.i >= inst.m() || p.j < 0 || p.j >= inst.m() || p.i == p.j)
      throw std::invalid_argument("schedule pair index out of range");
    if (seen[p.i] || seen[p.j])
      throw std::invalid_argument("schedule matches a request twice");
    seen[p.i] = seen[p.j] = 1;
    const Request& a = inst.requests[p.i];
    const Request& b = inst.requests[p.j];
    if (a.polarity != 0 && a.polarity + b.polarity != 0)
      throw std::invalid_argument("schedule pairs requests of equal polarity");
    if (p.match_time < std::max(a.arrival, b.arrival) - kDistTol)
      throw std::invalid_argument("pair served before both requests arrived");
  }
}

/// Builds an offline schedule from a list of pairs, serving each pair the
/// moment its later request arrives.
inline Schedule make_offline_schedule(const Instance& inst,
                                      const std::vector<std::pair<int, int>>& pairs) {
  Schedule s;
  s.semantics = CostSemantics::Offline;
  for (auto [i, j] : pairs) {
    const Request& a = inst.requests[i];
    const Request& b = inst.requests[j];
    s.pairs.push_back({i, j, std::max(a.arrival, b.arrival)});
    s.connection_cost += inst.metric(a.point, b.point);
    s.delay_cost += std::abs(a.arrival - b.arrival);
  }
  validate_schedule(s, inst);
  return s;
}

}  // namespace mdlab

#endif
