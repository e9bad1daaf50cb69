#ifndef MDLAB_OFFLINE_OPT_HPP
#define MDLAB_OFFLINE_OPT_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mdlab/instance.hpp"

namespace mdlab {

/// Offline cost of serving requests i and j together: connection distance
/// plus the wait |t_i - t_j| the earlier one spends on the later one.
inline double pair_cost(const Instance& inst, int i, int j) {
  if (i < 0 || j < 0 || i >= inst.m() || j >= inst.m() || i == j)
    throw std::invalid_argument("pair_cost: bad request indices");
  const Request& a = inst.requests[i];
  const Request& b = inst.requests[j];
  return inst.metric(a.point, b.point) + std::abs(a.arrival - b.arrival);
}

/// requests may share a pair unless both carry the same nonzero polarity
inline bool pairable(const Instance& inst, int i, int j) {
  return inst.requests[i].polarity * inst.requests[j].polarity <= 0;
}

/// Exact minimum-cost perfect matching by dynamic programming over request
/// subsets: the lowest-index unmatched request is paired with every allowed
/// partner. Time and memory grow as 2^m, hence the cap.
inline Schedule exact_opt_subsets(const Instance& inst, int cap = 22) {
  inst.validate();
  const int m = inst.m();
  if (m > cap) throw std::invalid_argument("exact_opt_subsets: instance above the subset cap");
  std::vector<std::pair<int, int>> chosen;
  if (m > 0) {
    std::vector<double> cost(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        cost[i * m + j] = pairable(inst, i, j) ? pair_cost(inst, i, j)
                                               : std::numeric_limits<double>::infinity();
    const std::uint32_t full = (m == 32 ? ~0u : (1u << m) - 1);
    std::vector<double> dp(full + 1, std::numeric_limits<double>::infinity());
    std::vector<std::int8_t> choice(full + 1, -1);
    dp[0] = 0.0;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      if (std::popcount(mask) % 2 != 0) continue;
      const int i = std::countr_zero(mask);
      const std::uint32_t rest = mask & (mask - 1);  // mask minus lowest bit
      for (std::uint32_t bits = rest; bits != 0; bits &= bits - 1) {
        const int j = std::countr_zero(bits);
        const double c = dp[mask ^ (1u << i) ^ (1u << j)] + cost[i * m + j];
        if (c < dp[mask]) {
          dp[mask] = c;
          choice[mask] = static_cast<std::int8_t>(j);
        }
      }
    }
    if (!std::isfinite(dp[full]))
      throw std::runtime_error("exact_opt_subsets: no feasible perfect matching");
    for (std::uint32_t mask = full; mask != 0;) {
      const int i = std::countr_zero(mask);
      const int j = choice[mask];
      chosen.emplace_back(i, j);
      mask ^= (1u << i) | (1u << j);
    }
  }
  return make_offline_schedule(inst, chosen);
}

/// Exact min-cost assignment of positive to negative requests under
/// pair_cost, by shortest augmenting paths with dual potentials (cubic in
/// the number of pairs). Handles any even m.
inline Schedule bipartite_opt_assignment(const Instance& inst) {
  inst.validate();
  if (inst.m() > 0 && !inst.is_bipartite())
    throw std::invalid_argument("bipartite_opt_assignment expects a polarized instance");
  std::vector<int> pos, neg;
  for (int i = 0; i < inst.m(); ++i)
    (inst.requests[i].polarity > 0 ? pos : neg).push_back(i);
  const int k = static_cast<int>(pos.size());
  std::vector<double> cost(static_cast<std::size_t>(k) * k, 0.0);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) cost[a * k + b] = pair_cost(inst, pos[a], neg[b]);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0), minv(k + 1, 0.0);
  std::vector<int> row_of(k + 1, 0), way(k + 1, 0);
  std::vector<char> used(k + 1, 0);
  for (int a = 1; a <= k; ++a) {
    row_of[0] = a;
    int j0 = 0;
    minv.assign(k + 1, inf);
    used.assign(k + 1, 0);
    do {
      used[j0] = 1;
      const int a0 = row_of[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost[(a0 - 1) * k + (j - 1)] - u[a0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<int, int>> chosen;
  for (int j = 1; j <= k; ++j) chosen.emplace_back(pos[row_of[j] - 1], neg[j - 1]);
  return make_offline_schedule(inst, chosen);
}

/// Feasible upper-bound matching: repeatedly take the cheapest available
/// pair, ties broken by (cost, i, j). Quadratic memory; meant for moderate m.
inline Schedule greedy_heuristic(const Instance& inst) {
  inst.validate();
  const int m = inst.m();
  struct Cand {
    double c;
    int i, j;
  };
  std::vector<Cand> cands;
  cands.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (pairable(inst, i, j)) cands.push_back({pair_cost(inst, i, j), i, j});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.c != b.c) return a.c < b.c;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<char> taken(m, 0);
  std::vector<std::pair<int, int>> chosen;
  for (const Cand& c : cands) {
    if (taken[c.i] || taken[c.j]) continue;
    taken[c.i] = taken[c.j] = 1;
    chosen.emplace_back(c.i, c.j);
  }
  if (static_cast<int>(chosen.size()) * 2 != m)
    throw std::runtime_error("greedy_heuristic: no feasible perfect matching");
  return make_offline_schedule(inst, chosen);
}

}  // namespace mdlab

#endif
