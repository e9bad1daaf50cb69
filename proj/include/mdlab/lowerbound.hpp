#ifndef MDLAB_LOWERBOUND_HPP
#define MDLAB_LOWERBOUND_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdlab/instance.hpp"
#include "mdlab/offline_opt.hpp"
#include "mdlab/rng.hpp"
#include "mdlab/trace.hpp"

namespace mdlab {

// Adversarial phased instances on the line metric. Phase i places one
// request on each point of S_i = {k * stride_i / n : k = 1..n_i}, waits t_i,
// and recurses with n_{i+1} = 2*floor(a/t_i) points; every S_{i+1} keeps
// every q-th point of S_i (q = floor(n_i/n_{i+1})), truncated to exactly
// n_{i+1} points, so all S_i stay evenly spaced and nested. The bipartite
// variant alternates polarities left to right, phase i starting with sign
// s_i, with the sign tuple chosen to minimize the integral of |csur|.

struct LBPhase {
  int count = 0;          // n_i: requests in the phase
  double wait = 0.0;      // t_i: pause after the phase
  double y = 0.0;         // the uniform sample behind t_i
  double spacing = 0.0;   // d_i: gap between consecutive phase points
  long long stride = 1;   // k-th phase point (1-based) is line index k*stride - 1
  double arrival = 0.0;   // absolute time the phase arrives
  int sign = 0;           // s_i in the bipartite variant, 0 otherwise
  int first_id = 0;       // id of the phase's first request
};

struct LBParams {
  int n = 0;
  int r = 0;
  double rho = 0.0;
  double a = 0.0;
  std::vector<LBPhase> phases;
  double sign_integral = 0.0;     // bipartite: achieved integral of |csur|
  bool signs_exhaustive = false;  // bipartite: true if every tuple was tried
  double opt_upper_bound = 0.0;   // a-priori bound on the adversary's cost
};

struct LBInstance {
  Instance instance;
  LBParams params;
};

struct LBRule {
  int r = 0;
  double rho = 0.0;
  double a = 0.0;
};

/// r = floor(sqrt(ln n)/2), rho = e^r, a = 1/r
inline LBRule lb_rule_mpmd(int n) {
  const int r = static_cast<int>(std::floor(std::sqrt(std::log(static_cast<double>(n))) / 2.0));
  return {r, std::exp(static_cast<double>(r)), r > 0 ? 1.0 / r : 0.0};
}

/// r = floor((ln n)^(2/3)/4), rho = e^sqrt(r), a = 1/sqrt(r)
inline LBRule lb_rule_mbpmd(int n) {
  const int r =
      static_cast<int>(std::floor(std::pow(std::log(static_cast<double>(n)), 2.0 / 3.0) / 4.0));
  return {r, std::exp(std::sqrt(static_cast<double>(r))),
          r > 0 ? 1.0 / std::sqrt(static_cast<double>(r)) : 0.0};
}

/// generation needs r >= 1 and rho^{2r} <= n/4 (point supply for r+1 phases)
inline bool lb_feasible(int n, const LBRule& rule) {
  return n >= 2 && n % 2 == 0 && rule.r >= 1 &&
         std::pow(rule.rho, 2.0 * rule.r) <= n / 4.0 + kDistTol;
}

inline int min_n_mpmd() {
  for (int n = 4;; n += 2)
    if (lb_feasible(n, lb_rule_mpmd(n))) return n;
}

inline int min_n_mbpmd() {
  for (int n = 4;; n += 2)
    if (lb_feasible(n, lb_rule_mbpmd(n))) return n;
}

enum class SignMode { Auto, Exhaustive, Sampled };

struct SignSearchResult {
  std::vector<int> signs;
  double integral = 0.0;
  bool exhaustive = false;
};

namespace detail {

struct CsurEvent {
  double coord;
  int phase;
  int parity;  // 0 for the leftmost point of its phase, then alternating
};

inline std::vector<CsurEvent> csur_events(const std::vector<std::vector<double>>& phase_points) {
  std::vector<CsurEvent> ev;
  for (int i = 0; i < static_cast<int>(phase_points.size()); ++i)
    for (int k = 0; k < static_cast<int>(phase_points[i].size()); ++k)
      ev.push_back({phase_points[i][k], i, k & 1});
  std::sort(ev.begin(), ev.end(), [](const CsurEvent& a, const CsurEvent& b) {
    if (a.coord != b.coord) return a.coord < b.coord;
    if (a.phase != b.phase) return a.phase < b.phase;
    return a.parity < b.parity;
  });
  return ev;
}

/// integral over [0,1] of |csur(x)| for one sign tuple, by an exact sweep
/// over the piecewise-constant cumulative surplus
inline double sweep_integral(const std::vector<CsurEvent>& ev, const std::vector<int>& signs) {
  double total = 0.0;
  long long run = 0;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    run += ev[k].parity == 0 ? signs[ev[k].phase] : -signs[ev[k].phase];
    const double next = k + 1 < ev.size() ? ev[k + 1].coord : 1.0;
    if (next > ev[k].coord) total += std::llabs(run) * (next - ev[k].coord);
  }
  return total;
}

}  // namespace detail

/// integral of |csur| when phase i alternates signs starting with signs[i]
/// at its leftmost point; each phase's points must be sorted ascending
inline double csur_integral(const std::vector<std::vector<double>>& phase_points,
                            const std::vector<int>& signs) {
  if (signs.size() != phase_points.size())
    throw std::invalid_argument("csur_integral: one sign per phase required");
  for (const auto& pts : phase_points)
    if (!std::is_sorted(pts.begin(), pts.end()))
      throw std::invalid_argument("csur_integral: phase points must be sorted");
  return detail::sweep_integral(detail::csur_events(phase_points), signs);
}

/// Picks the sign tuple minimizing the integral of |csur|. Exhaustive mode
/// tries all 2^phases tuples (phases <= 16); sampled mode takes the best of
/// `samples` seeded draws, or goes exhaustive when that is no more work.
/// Auto means exhaustive up to 16 phases, sampled beyond.
inline SignSearchResult choose_signs(const std::vector<std::vector<double>>& phase_points,
                                     SignMode mode, Rng& rng, int samples = 256) {
  const int p = static_cast<int>(phase_points.size());
  if (p < 1 || p > 62) throw std::invalid_argument("choose_signs: bad phase count");
  if (mode == SignMode::Exhaustive && p > 16)
    throw std::invalid_argument("choose_signs: exhaustive search capped at 16 phases");
  if (mode == SignMode::Auto) mode = p <= 16 ? SignMode::Exhaustive : SignMode::Sampled;
  const bool exhaustive =
      mode == SignMode::Exhaustive ||
      (p <= 16 && (1LL << p) <= static_cast<long long>(samples));

  const std::vector<detail::CsurEvent> ev = detail::csur_events(phase_points);
  auto tuple_of = [p](std::uint64_t mask) {
    std::vector<int> s(p);
    for (int i = 0; i < p; ++i) s[i] = (mask >> i) & 1 ? -1 : 1;
    return s;
  };

  SignSearchResult best;
  best.integral = std::numeric_limits<double>::infinity();
  best.exhaustive = exhaustive;
  const std::uint64_t trials = exhaustive ? (1ULL << p) : static_cast<std::uint64_t>(samples);
  for (std::uint64_t k = 0; k < trials; ++k) {
    const std::uint64_t mask = exhaustive ? k : rng.below(1ULL << p);
    const std::vector<int> signs = tuple_of(mask);
    const double val = detail::sweep_integral(ev, signs);
    if (val < best.integral) {
      best.integral = val;
      best.signs = signs;
    }
  }
  return best;
}

namespace detail {

inline void reject_if_unsupported(int n, const LBRule& rule, int min_n, const char* what) {
  if (!lb_feasible(n, rule))
    throw std::invalid_argument(std::string(what) + ": n must be even and at least " +
                                std::to_string(min_n) + ", got " + std::to_string(n));
}

/// the shared phased layout: spatial and temporal structure of all phases
inline LBParams phased_layout(int n, const LBRule& rule, Rng& rng) {
  LBParams params;
  params.n = n;
  params.r = rule.r;
  params.rho = rule.rho;
  params.a = rule.a;
  long long count = n, stride = 1;
  double arrival = 0.0;
  int next_id = 0;
  for (int i = 0; i <= rule.r; ++i) {
    LBPhase ph;
    ph.count = static_cast<int>(count);
    ph.y = rng.uniform01();
    ph.wait = rule.a * std::pow(rule.rho, 1.0 + ph.y) / static_cast<double>(count);
    ph.spacing = static_cast<double>(stride) / n;
    ph.stride = stride;
    ph.arrival = arrival;
    ph.first_id = next_id;
    next_id += ph.count;

    const double lo = rule.a * rule.rho / count, hi = rule.a * rule.rho * rule.rho / count;
    if (ph.wait < lo - kDistTol * lo || ph.wait > hi + kDistTol * hi)
      throw InvariantViolation("phase wait left its supported interval");
    if (count % 2 != 0) throw InvariantViolation("odd phase size");
    if (count * stride > n) throw InvariantViolation("phase points left the unit interval");
    // spacing never degrades below the recursion's floor
    const double floor_i = std::pow(1.0 - 2.0 / rule.rho, i);
    if (count * ph.spacing < floor_i - kDistTol ||
        floor_i < 1.0 - 2.0 * rule.r / rule.rho - kDistTol)
      throw InvariantViolation("phase spacing fell below its floor");
    params.phases.push_back(ph);

    const long long n_next =
        2 * static_cast<long long>(std::floor(rule.a / ph.wait));
    const long long bound_lo =
        2 * static_cast<long long>(std::floor(count / (rule.rho * rule.rho)));
    const long long bound_hi = 2 * static_cast<long long>(std::floor(count / rule.rho));
    if (n_next < bound_lo || n_next > bound_hi)
      throw InvariantViolation("next phase size outside its supported interval");
    if (i < rule.r) {
      if (n_next < 2) throw InvariantViolation("phase ran out of points");
      stride *= count / n_next;  // floor(n_i / n_{i+1})
      count = n_next;
    }
    arrival += ph.wait;
  }
  return params;
}

inline std::vector<std::vector<double>> phase_coordinates(const LBParams& params) {
  std::vector<std::vector<double>> pts;
  for (const LBPhase& ph : params.phases) {
    std::vector<double> row(ph.count);
    for (int k = 1; k <= ph.count; ++k)
      row[k - 1] = static_cast<double>(k * ph.stride) / params.n;
    pts.push_back(std::move(row));
  }
  return pts;
}

}  // namespace detail

/// Phased adversarial MPMD instance on the n-point line; rejects n below the
/// smallest size whose parameters support r >= 1 phases.
inline LBInstance gen_mpmd_lb(int n, std::uint64_t seed) {
  const LBRule rule = lb_rule_mpmd(n);
  detail::reject_if_unsupported(n, rule, min_n_mpmd(), "gen_mpmd_lb");
  Rng rng(seed);
  LBInstance out;
  out.params = detail::phased_layout(n, rule, rng);
  out.params.opt_upper_bound = 2.0 * rule.a * rule.r + 1.0;
  out.instance.metric = line_metric(n);
  for (const LBPhase& ph : out.params.phases)
    for (int k = 1; k <= ph.count; ++k)
      out.instance.requests.push_back(
          {static_cast<int>(k * ph.stride - 1), ph.arrival, 0});
  out.instance.validate();
  return out;
}

/// Bipartite variant: same layout, polarities alternating left to right
/// within each phase, phase i starting with the chosen s_i.
inline LBInstance gen_mbpmd_lb(int n, std::uint64_t seed, SignMode mode = SignMode::Auto,
                               int samples = 256) {
  const LBRule rule = lb_rule_mbpmd(n);
  detail::reject_if_unsupported(n, rule, min_n_mbpmd(), "gen_mbpmd_lb");
  Rng rng(seed);
  LBInstance out;
  out.params = detail::phased_layout(n, rule, rng);

  const SignSearchResult found = choose_signs(detail::phase_coordinates(out.params), mode, rng, samples);
  out.params.sign_integral = found.integral;
  out.params.signs_exhaustive = found.exhaustive;
  if (found.exhaustive &&
      found.integral > std::sqrt(static_cast<double>(rule.r + 1)) + kDistTol)
    throw InvariantViolation("best sign tuple above the random-walk bound");

  double delay_bound = 0.0;
  for (std::size_t i = 0; i < out.params.phases.size(); ++i) {
    out.params.phases[i].sign = found.signs[i];
    delay_bound += out.params.phases[i].count * out.params.phases[i].arrival;
  }
  out.params.opt_upper_bound = found.integral + delay_bound;

  out.instance.metric = line_metric(n);
  for (const LBPhase& ph : out.params.phases)
    for (int k = 1; k <= ph.count; ++k)
      out.instance.requests.push_back({static_cast<int>(k * ph.stride - 1), ph.arrival,
                                       k % 2 == 1 ? ph.sign : -ph.sign});
  out.instance.validate();
  return out;
}

/// signed number of requests located in [0, x]
inline long long cumulative_surplus(const Instance& inst, double x) {
  if (!inst.metric.is_line())
    throw std::invalid_argument("cumulative_surplus needs a line-metric instance");
  long long run = 0;
  for (const Request& r : inst.requests)
    if (line_coordinate(inst.metric.size(), r.point) <= x + kDistTol) run += r.polarity;
  return run;
}

/// integral over [0,1] of |csur(x)| computed directly from the instance
inline double csur_integral_of_instance(const Instance& inst) {
  if (!inst.metric.is_line())
    throw std::invalid_argument("csur_integral_of_instance needs a line-metric instance");
  const int n = inst.metric.size();
  std::vector<std::pair<double, int>> ev;
  for (const Request& r : inst.requests) ev.emplace_back(line_coordinate(n, r.point), r.polarity);
  std::sort(ev.begin(), ev.end());
  double total = 0.0;
  long long run = 0;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    run += ev[k].second;
    const double next = k + 1 < ev.size() ? ev[k + 1].first : 1.0;
    if (next > ev[k].first) total += std::llabs(run) * (next - ev[k].first);
  }
  return total;
}

/// The cross-phase backward solution: each phase-i request pairs with the
/// same-point phase-(i-1) request where possible (connection 0, delay
/// t_{i-1} each), and leftover phase-0 requests pair left to right
/// (connection at most 1). Total cost is asserted <= 2ar + 1.
inline Schedule adversary_solution_mpmd(const LBInstance& lb) {
  const Instance& inst = lb.instance;
  const LBParams& par = lb.params;
  std::vector<char> paired(inst.m(), 0);
  std::vector<std::pair<int, int>> pairs;
  for (int i = par.r; i >= 1; --i) {
    const LBPhase& cur = par.phases[i];
    const LBPhase& prev = par.phases[i - 1];
    const long long q = cur.stride / prev.stride;
    double phase_delay = 0.0;
    for (int k = 1; k <= cur.count; ++k) {
      const int u = cur.first_id + k - 1;
      if (paired[u]) continue;
      const int v = prev.first_id + static_cast<int>(k * q) - 1;
      if (paired[v] || inst.requests[u].point != inst.requests[v].point)
        throw InvariantViolation("phase nesting broken: no same-point partner below");
      paired[u] = paired[v] = 1;
      pairs.emplace_back(u, v);
      phase_delay += cur.arrival - prev.arrival;
    }
    if (phase_delay > 2.0 * par.a + kDistTol)
      throw InvariantViolation("cross-phase delay above 2a");
  }
  std::vector<int> leftover;
  for (int u = 0; u < par.phases[0].count; ++u)
    if (!paired[u]) leftover.push_back(u);  // already in ascending point order
  if (leftover.size() % 2 != 0) throw InvariantViolation("odd number of leftover requests");
  double leftover_conn = 0.0;
  for (std::size_t k = 0; k + 1 < leftover.size(); k += 2) {
    pairs.emplace_back(leftover[k], leftover[k + 1]);
    leftover_conn +=
        inst.metric(inst.requests[leftover[k]].point, inst.requests[leftover[k + 1]].point);
  }
  if (leftover_conn > 1.0 + kDistTol)
    throw InvariantViolation("leftover connection above unit cost");

  Schedule s = make_offline_schedule(inst, pairs);
  if (s.total() > par.opt_upper_bound + kDistTol)
    throw InvariantViolation("adversary solution above its certified bound");
  return s;
}

/// The sorted bipartite solution: k-th positive to k-th negative in left to
/// right order. Its connection cost equals the integral of |csur| exactly
/// (asserted), and its delay is at most the sum of all arrival times.
inline Schedule adversary_solution_mbpmd(const Instance& inst) {
  inst.validate();
  if (!inst.is_bipartite())
    throw std::invalid_argument("adversary_solution_mbpmd expects a polarized instance");
  if (!inst.metric.is_line())
    throw std::invalid_argument("adversary_solution_mbpmd expects the line metric");
  std::vector<int> pos, neg;
  std::vector<int> order(inst.m());
  for (int i = 0; i < inst.m(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (inst.requests[a].point != inst.requests[b].point)
      return inst.requests[a].point < inst.requests[b].point;
    return a < b;
  });
  for (int u : order) (inst.requests[u].polarity > 0 ? pos : neg).push_back(u);

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t k = 0; k < pos.size(); ++k) pairs.emplace_back(pos[k], neg[k]);
  Schedule s = make_offline_schedule(inst, pairs);

  const double integral = csur_integral_of_instance(inst);
  if (std::abs(s.connection_cost - integral) > kDistTol * std::max(1.0, integral))
    throw InvariantViolation("sorted pairing does not meet the surplus integral");
  double arrivals = 0.0;
  for (const Request& r : inst.requests) arrivals += r.arrival;
  if (s.delay_cost > arrivals + kDistTol)
    throw InvariantViolation("adversary delay above the sum of arrival times");
  return s;
}

}  // namespace mdlab

#endif
