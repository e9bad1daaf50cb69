#ifndef MDLAB_ONLINE_MBPMD_HPP
#define MDLAB_ONLINE_MBPMD_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "mdlab/instance.hpp"
#include "mdlab/trace.hpp"
#include "mdlab/tree.hpp"

namespace mdlab {

/// rho = pending request counts by polarity, zeta = total rate at which all
/// counters in the state rise; the running state keeps rho <= zeta for both
/// polarities at every quiescent instant.
struct SnapshotSummary {
  int rho_plus = 0;
  int rho_minus = 0;
  long long zeta = 0;
};

// Online algorithm for bipartite min-cost perfect matching with delays on a
// tree. sur(u) is the number of positive minus negative pending requests in
// the subtree of u. Two forests F+ and F- grow independently: z+_u rises at
// rate sur(u) while sur(u) > 0 and e_u is outside F+, and e_u enters F+ the
// moment z+_u reaches 2*d_u (symmetrically for z-_u with rate -sur(u)). A
// positive request at a and a negative one at b are connected as soon as the
// path a -> lca lies in F+ and b -> lca lies in F-; the whole a -> b path
// then leaves both forests and those vertices' counters reset to 0. Shadow
// counters accumulate the same growth but never reset; their final values
// are the y+-/y- totals the diagnostics bound. Zero-weight edges sit in both
// forests permanently with counters pinned at the threshold.
class MbpmdTreeState {
 public:
  // the state only references the tree; a temporary would dangle
  MbpmdTreeState(RootedTree&&, bool = false, bool = true) = delete;

  explicit MbpmdTreeState(const RootedTree& tree, bool record_trace = false,
                          bool paranoid = true)
      : tree_(&tree), record_trace_(record_trace), paranoid_(paranoid) {
    if (!points_at_leaves(tree))
      throw std::invalid_argument("requests must live at leaves (augment_leaves first)");
    const int n = tree.vertex_count();
    sur_.assign(n, 0);
    z_p_.assign(n, 0.0);
    z_m_.assign(n, 0.0);
    shadow_p_.assign(n, 0.0);
    shadow_m_.assign(n, 0.0);
    bought_p_.assign(n, 0);
    bought_m_.assign(n, 0);
    pinned_.assign(n, 0);
    pending_at_.assign(n, {});
    for (int v = 0; v < n; ++v)
      if (v != tree.root() && tree.edge_weight(v) <= kDistTol)
        pinned_[v] = bought_p_[v] = bought_m_[v] = 1;
  }

  double now() const { return now_; }
  double z_plus(int u) const { return z_p_[u]; }
  double z_minus(int u) const { return z_m_[u]; }
  bool bought_plus(int u) const { return bought_p_[u] != 0; }
  bool bought_minus(int u) const { return bought_m_[u] != 0; }
  int sur(int u) const { return sur_[u]; }
  int pending_total() const { return static_cast<int>(pending_ids_.size()); }
  const std::vector<double>& shadow_y_plus() const { return shadow_p_; }
  const std::vector<double>& shadow_y_minus() const { return shadow_m_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const RootedTree& tree() const { return *tree_; }
  const std::vector<Schedule::Pair>& matched_pairs() const { return matched_; }
  double connection_cost() const { return connection_; }
  double delay_cost() const { return delay_; }

  /// rho+/rho-/zeta of the current snapshot, by direct summation
  SnapshotSummary snapshot_summary() const {
    SnapshotSummary s;
    for (int id : pending_ids_) (pol_of_[id] > 0 ? s.rho_plus : s.rho_minus) += 1;
    for (int u = 0; u < tree_->vertex_count(); ++u) {
      if (!bought_p_[u]) s.zeta += std::max(sur_[u], 0);
      if (!bought_m_[u]) s.zeta += std::max(-sur_[u], 0);
    }
    return s;
  }

  /// time until the earliest counter reaches its threshold, if any is running
  std::optional<double> next_trigger() const {
    double best = std::numeric_limits<double>::infinity();
    for (int u = 0; u < tree_->vertex_count(); ++u) {
      if (u == tree_->root()) continue;
      const double cap = 2.0 * tree_->edge_weight(u);
      if (const int rp = rate_plus(u); rp > 0)
        best = std::min(best, (cap - z_p_[u]) / rp);
      if (const int rm = rate_minus(u); rm > 0)
        best = std::min(best, (cap - z_m_[u]) / rm);
    }
    if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
    return best;
  }

  /// Advances time to target. Counters integrate piecewise-linearly: rates
  /// change only at buy/match/arrival events, so each segment's trigger
  /// times are exact closed forms. Simultaneous triggers (within kDistTol)
  /// are bought together, then one matching cascade runs.
  void advance_to(double target) {
    if (target < now_ - kDistTol) throw std::invalid_argument("time went backwards");
    const int n = tree_->vertex_count();
    trig_p_.assign(n, std::numeric_limits<double>::infinity());
    trig_m_.assign(n, std::numeric_limits<double>::infinity());
    while (true) {
      double trigger_at = std::numeric_limits<double>::infinity();
      for (int u = 0; u < n; ++u) {
        trig_p_[u] = trig_m_[u] = std::numeric_limits<double>::infinity();
        if (u == tree_->root()) continue;
        const double cap = 2.0 * tree_->edge_weight(u);
        if (const int rp = rate_plus(u); rp > 0) trig_p_[u] = now_ + (cap - z_p_[u]) / rp;
        if (const int rm = rate_minus(u); rm > 0) trig_m_[u] = now_ + (cap - z_m_[u]) / rm;
        trigger_at = std::min({trigger_at, trig_p_[u], trig_m_[u]});
      }
      const double step = std::min(target, trigger_at);
      if (step > now_) {
        const double delta = step - now_;
        for (int u = 0; u < n; ++u) {
          if (const int rp = rate_plus(u); rp > 0) {
            z_p_[u] += delta * rp;
            shadow_p_[u] += delta * rp;
          }
          if (const int rm = rate_minus(u); rm > 0) {
            z_m_[u] += delta * rm;
            shadow_m_[u] += delta * rm;
          }
        }
        now_ = step;
      }
      if (trigger_at > target + kDistTol) break;
      bool any = false;
      for (int u = 0; u < n; ++u) {
        if (trig_p_[u] <= now_ + kDistTol) {
          z_p_[u] = 2.0 * tree_->edge_weight(u);  // snap; kills float drift
          buy(u, +1);
          any = true;
        }
        if (trig_m_[u] <= now_ + kDistTol) {
          z_m_[u] = 2.0 * tree_->edge_weight(u);
          buy(u, -1);
          any = true;
        }
      }
      if (!any) throw InvariantViolation("trigger fired with no due edge");
      try_match();
      check_invariants();
    }
  }

  void on_request(int id, int point, double time, int polarity) {
    advance_to(time);
    insert({id}, {point}, {polarity}, time);
    try_match();
    check_invariants();
  }

  /// Simultaneous arrivals: insert the whole group, then one matching cascade.
  void on_request_batch(const std::vector<int>& ids, const std::vector<int>& points,
                        const std::vector<int>& polarities, double time) {
    advance_to(time);
    insert(ids, points, polarities, time);
    try_match();
    check_invariants();
  }

  /// Connects every currently matchable (+,-) pair, repeatedly taking the
  /// pair that minimizes (smaller id, larger id) lexicographically. A pair
  /// is matchable iff some common ancestor is reached from the positive leaf
  /// through F+ and from the negative leaf through F-.
  void try_match() {
    if (pending_ids_.empty()) return;
    rebuild_reach();
    auto it = pending_ids_.begin();
    while (it != pending_ids_.end()) {
      const int i = *it;
      const int j = best_partner(i);
      if (j >= 0) {
        if (j < i) throw InvariantViolation("match scan order violated");
        connect(i, j);
        rebuild_reach();
        it = pending_ids_.upper_bound(i);
      } else {
        ++it;
      }
    }
  }

 private:
  int rate_plus(int u) const { return (!bought_p_[u] && sur_[u] > 0) ? sur_[u] : 0; }
  int rate_minus(int u) const { return (!bought_m_[u] && sur_[u] < 0) ? -sur_[u] : 0; }

  void buy(int u, int sign) {
    (sign > 0 ? bought_p_ : bought_m_)[u] = 1;
    if (record_trace_) trace_.push_back({TraceEvent::Kind::Buy, now_, u, -1, -1, sign});
  }

  void insert(const std::vector<int>& ids, const std::vector<int>& points,
              const std::vector<int>& polarities, double time) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const int leaf = tree_->vertex_of_point(points[k]);
      if (leaf < 0 || !tree_->is_leaf(leaf))
        throw std::invalid_argument("request point is not mapped to a leaf");
      if (polarities[k] != 1 && polarities[k] != -1)
        throw std::invalid_argument("bipartite request needs polarity +1 or -1");
      const int id = ids[k];
      leaf_of_.resize(std::max(leaf_of_.size(), static_cast<std::size_t>(id) + 1), -1);
      arrival_of_.resize(leaf_of_.size(), 0.0);
      pol_of_.resize(leaf_of_.size(), 0);
      leaf_of_[id] = leaf;
      arrival_of_[id] = time;
      pol_of_[id] = polarities[k];
      pending_at_[leaf].push_back(id);
      pending_ids_.insert(id);
      if (record_trace_)
        trace_.push_back({TraceEvent::Kind::Arrival, time, leaf, id, -1, polarities[k]});
    }
    if (ids.size() <= 4) {
      for (std::size_t k = 0; k < ids.size(); ++k)
        for (int v = tree_->vertex_of_point(points[k]);; v = tree_->parent(v)) {
          sur_[v] += polarities[k];
          if (v == tree_->root()) break;
        }
    } else {
      recompute_surpluses();
    }
  }

  void connect(int i, int j) {
    if (pol_of_[i] * pol_of_[j] != -1)
      throw InvariantViolation("matched pair with equal polarities");
    const int pos = pol_of_[i] > 0 ? i : j;
    const int neg = pol_of_[i] > 0 ? j : i;
    const int a = leaf_of_[pos], b = leaf_of_[neg];
    const int meet = tree_->lca(a, b);

    erase_pending(i);
    erase_pending(j);
    connection_ += tree_->root_distance(a) + tree_->root_distance(b) -
                   2.0 * tree_->root_distance(meet);
    delay_ += (now_ - arrival_of_[i]) + (now_ - arrival_of_[j]);
    matched_.push_back({std::min(i, j), std::max(i, j), now_});
    if (record_trace_)
      trace_.push_back({TraceEvent::Kind::Match, now_, -1, std::min(i, j), std::max(i, j), 0});

    // the positive side must stand in F+, the negative side in F-; the whole
    // path then leaves both forests and its counters restart from zero
    for (int side : {a, b}) {
      const std::vector<char>& need = side == a ? bought_p_ : bought_m_;
      for (int v = side; v != meet; v = tree_->parent(v)) {
        if (!need[v]) throw InvariantViolation("matched pair without a bought path");
        if (record_trace_) trace_.push_back({TraceEvent::Kind::Phase, now_, v, -1, -1, 0});
        bought_p_[v] = bought_m_[v] = pinned_[v];
        z_p_[v] = 0.0;
        z_m_[v] = 0.0;
      }
    }
    for (int v = a; v != meet; v = tree_->parent(v)) sur_[v] -= 1;
    for (int v = b; v != meet; v = tree_->parent(v)) sur_[v] += 1;
  }

  /// smallest matchable opposite-polarity partner of i, -1 if none
  int best_partner(int i) const {
    const int a = leaf_of_[i];
    const std::vector<int>& opposite_min = pol_of_[i] > 0 ? minneg_ : minpos_;
    const std::vector<char>& own_forest = pol_of_[i] > 0 ? bought_p_ : bought_m_;
    int best = std::numeric_limits<int>::max();
    for (int v = a;; v = tree_->parent(v)) {
      best = std::min(best, opposite_min[v]);
      if (v == tree_->root() || !own_forest[v]) break;
    }
    return best == std::numeric_limits<int>::max() ? -1 : best;
  }

  /// minpos_[v] (minneg_[v]) = smallest positive (negative) pending id whose
  /// leaf reaches v through bought F+ (F-) edges
  void rebuild_reach() {
    const int n = tree_->vertex_count();
    minpos_.assign(n, std::numeric_limits<int>::max());
    minneg_.assign(n, std::numeric_limits<int>::max());
    const std::vector<int>& order = tree_->top_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int u = *it;
      for (int id : pending_at_[u]) {
        std::vector<int>& mine = pol_of_[id] > 0 ? minpos_ : minneg_;
        mine[u] = std::min(mine[u], id);
      }
      if (u != tree_->root()) {
        const int p = tree_->parent(u);
        if (bought_p_[u]) minpos_[p] = std::min(minpos_[p], minpos_[u]);
        if (bought_m_[u]) minneg_[p] = std::min(minneg_[p], minneg_[u]);
      }
    }
  }

  void erase_pending(int id) {
    pending_ids_.erase(id);
    auto& vec = pending_at_[leaf_of_[id]];
    vec.erase(std::find(vec.begin(), vec.end(), id));
  }

  void recompute_surpluses() {
    const std::vector<int>& order = tree_->top_order();
    std::vector<int> s(tree_->vertex_count(), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int u = *it;
      for (int id : pending_at_[u]) s[u] += pol_of_[id];
      if (u != tree_->root()) s[tree_->parent(u)] += s[u];
    }
    for (int u = 0; u < tree_->vertex_count(); ++u) sur_[u] = s[u];
  }

  // Invariants checked at every quiescent instant: surpluses agree with a
  // recount; counters stay in [0, 2d_u] with bought edges frozen exactly at
  // the threshold; shadows dominate counters; pending counts of both signs
  // stay below the total counter-growth rate zeta; and the snapshot is
  // valid, i.e. no matchable opposite pair remains.
  void check_invariants() {
    if (!paranoid_) return;
    const int n = tree_->vertex_count();
    std::vector<int> s(n, 0);
    const std::vector<int>& order = tree_->top_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int u = *it;
      for (int id : pending_at_[u]) s[u] += pol_of_[id];
      if (u != tree_->root()) s[tree_->parent(u)] += s[u];
    }
    for (int u = 0; u < n; ++u) {
      if (s[u] != sur_[u]) throw InvariantViolation("surplus out of date");
      if (z_p_[u] < -kDistTol || z_m_[u] < -kDistTol)
        throw InvariantViolation("negative counter");
      if (shadow_p_[u] < z_p_[u] - kDistTol || shadow_m_[u] < z_m_[u] - kDistTol)
        throw InvariantViolation("shadow counter fell behind its counter");
      if (u == tree_->root()) continue;
      const double cap = 2.0 * tree_->edge_weight(u);
      const double slack = kDistTol * std::max(1.0, cap);
      if (z_p_[u] > cap + slack || z_m_[u] > cap + slack)
        throw InvariantViolation("counter beyond its threshold");
      if (pinned_[u] && (!bought_p_[u] || !bought_m_[u]))
        throw InvariantViolation("zero-weight edge left a forest");
      if (!pinned_[u]) {
        if (bought_p_[u] && std::abs(z_p_[u] - cap) > slack)
          throw InvariantViolation("bought edge frozen off its threshold");
        if (bought_m_[u] && std::abs(z_m_[u] - cap) > slack)
          throw InvariantViolation("bought edge frozen off its threshold");
      }
    }
    const SnapshotSummary snap = snapshot_summary();
    if (snap.rho_plus > snap.zeta || snap.rho_minus > snap.zeta)
      throw InvariantViolation("pending requests exceed total counter rate");
    rebuild_reach();
    for (int id : pending_ids_)
      if (best_partner(id) >= 0)
        throw InvariantViolation("matchable pair left pending at quiescence");
  }

  const RootedTree* tree_;
  bool record_trace_;
  bool paranoid_;
  double now_ = 0.0;
  double connection_ = 0.0;
  double delay_ = 0.0;
  std::vector<int> sur_;
  std::vector<double> z_p_, z_m_;
  std::vector<double> shadow_p_, shadow_m_;
  std::vector<double> trig_p_, trig_m_;  // scratch: per-segment trigger times
  std::vector<char> bought_p_, bought_m_, pinned_;
  std::vector<std::vector<int>> pending_at_;
  std::set<int> pending_ids_;
  std::vector<int> leaf_of_;
  std::vector<int> pol_of_;
  std::vector<double> arrival_of_;
  std::vector<int> minpos_, minneg_;  // scratch: reach maps
  std::vector<Schedule::Pair> matched_;
  std::vector<TraceEvent> trace_;
};

struct MbpmdRunResult {
  RootedTree tree;
  Schedule schedule;  // online semantics, connection in tree distances
  std::vector<double> y_plus, y_minus;  // final shadow totals per vertex
  std::vector<TraceEvent> trace;
};

/// Runs the bipartite tree algorithm on a balanced polarized instance.
/// Points at internal vertices are moved to zero-weight child leaves first.
inline MbpmdRunResult run_mbpmd_tree(const Instance& inst, const RootedTree& tree,
                                     bool record_trace = false, bool paranoid = true) {
  inst.validate();
  if (!inst.is_bipartite())
    throw std::invalid_argument("run_mbpmd_tree expects a polarized instance");
  MbpmdRunResult out;
  out.tree = points_at_leaves(tree) ? tree : augment_leaves(tree);

  MbpmdTreeState s(out.tree, record_trace, paranoid);
  const int m = inst.m();
  int i = 0;
  while (i < m) {
    int j = i;
    std::vector<int> ids, points, pols;
    while (j < m && inst.requests[j].arrival - inst.requests[i].arrival <= kDistTol) {
      ids.push_back(j);
      points.push_back(inst.requests[j].point);
      pols.push_back(inst.requests[j].polarity);
      ++j;
    }
    s.on_request_batch(ids, points, pols, inst.requests[i].arrival);
    i = j;
  }
  long long guard = 64LL * m + 16LL * out.tree.vertex_count() + 4096;
  while (s.pending_total() > 0) {
    std::optional<double> dt = s.next_trigger();
    if (!dt) throw InvariantViolation("pending requests with no running counter");
    s.advance_to(s.now() + *dt);
    if (--guard < 0) throw InvariantViolation("watchdog: run did not terminate");
  }

  out.schedule.pairs = s.matched_pairs();
  out.schedule.connection_cost = s.connection_cost();
  out.schedule.delay_cost = s.delay_cost();
  out.schedule.semantics = CostSemantics::Online;
  validate_schedule(out.schedule, inst);
  out.y_plus = s.shadow_y_plus();
  out.y_minus = s.shadow_y_minus();
  out.trace = s.trace();
  return out;
}

struct BVertexDiag {
  int u = -1;
  double y_plus = 0.0, y_minus = 0.0;
  double x = 0.0, xp = 0.0;
  bool ok = true;
};

struct MbpmdDiagnosis {
  std::vector<BVertexDiag> rows;
  double sum_y = 0.0, sum_x_xp = 0.0;
  double sol_connection_tree = 0.0, sol_delay = 0.0;
  int height = 0;
  bool per_vertex_ok = true;   // y+_u + y-_u <= 4 (x_u + x'_u)
  bool aggregate_ok = true;    // sum (x_u + x'_u) <= SOL_d + h SOL_t
  bool connection_ok = true;   // ALG_d <= sum (y+ + y-) / 2
  bool delay_ok = true;        // ALG_t <= 2 sum (y+ + y-)
  bool competitive_ok = true;  // ALG <= 10 SOL_d + 10 h SOL_t
  bool all_ok() const {
    return per_vertex_ok && aggregate_ok && connection_ok && delay_ok && competitive_ok;
  }
};

/// Checks the run's per-vertex and aggregate guarantees against any feasible
/// reference solution of the same instance. All connection costs are taken
/// in the tree metric the run used.
inline MbpmdDiagnosis diagnose_mbpmd(const MbpmdRunResult& run, const Instance& inst,
                                     const Schedule& sol, double tol = 1e-6) {
  validate_schedule(sol, inst);
  const RootedTree& t = run.tree;
  const int n = t.vertex_count();
  std::vector<double> x(n, 0.0), xp(n, 0.0);
  double sol_d = 0.0, sol_t = 0.0;
  for (const Schedule::Pair& p : sol.pairs) {
    const Request& ri = inst.requests[p.i];
    const Request& rj = inst.requests[p.j];
    const int a = t.vertex_of_point(ri.point), b = t.vertex_of_point(rj.point);
    const int meet = t.lca(a, b);
    const double wait = std::abs(ri.arrival - rj.arrival);
    sol_t += wait;
    sol_d += t.root_distance(a) + t.root_distance(b) - 2.0 * t.root_distance(meet);
    const int earlier = ri.arrival <= rj.arrival ? a : b;
    for (int v = earlier;; v = t.parent(v)) {
      x[v] += wait;
      if (v == t.root()) break;
    }
    for (int side : {a, b})
      for (int v = side; v != meet; v = t.parent(v)) xp[v] += t.edge_weight(v);
  }

  MbpmdDiagnosis d;
  d.height = t.height();
  d.sol_connection_tree = sol_d;
  d.sol_delay = sol_t;
  for (int u = 0; u < n; ++u) {
    BVertexDiag row{u, run.y_plus[u], run.y_minus[u], x[u], xp[u], true};
    row.ok = row.y_plus + row.y_minus <= 4.0 * (row.x + row.xp) + tol;
    d.per_vertex_ok = d.per_vertex_ok && row.ok;
    d.sum_y += row.y_plus + row.y_minus;
    d.sum_x_xp += row.x + row.xp;
    d.rows.push_back(row);
  }
  d.aggregate_ok = d.sum_x_xp <= sol_d + d.height * sol_t + tol;
  d.connection_ok = run.schedule.connection_cost <= 0.5 * d.sum_y + tol;
  d.delay_ok = run.schedule.delay_cost <= 2.0 * d.sum_y + tol;
  d.competitive_ok =
      run.schedule.total() <= 10.0 * sol_d + 10.0 * d.height * sol_t + tol;
  return d;
}

}  // namespace mdlab

#endif
