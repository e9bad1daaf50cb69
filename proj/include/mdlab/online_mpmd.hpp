#ifndef MDLAB_ONLINE_MPMD_HPP
#define MDLAB_ONLINE_MPMD_HPP

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

// Online algorithm for min-cost perfect matching with delays on a tree.
//
// A vertex u is odd iff the number of pending requests in its subtree is odd.
// Every vertex owns a counter z_u that rises at rate 1 while u is odd and its
// parent edge is not bought (the root has no parent edge and never saturates;
// its counter still rises while it is odd). The moment z_u reaches the next
// integral multiple of 2*d_u the edge e_u is bought into the forest F and z_u
// freezes; counters are never reset, so after e_u leaves F the next threshold
// is the next multiple. Two pending requests are connected as soon as the
// tree path between their leaves lies in F, which happens exactly when they
// share an F-component; the path's edges then leave F. Zero-weight edges act
// as bought from the start and never leave F (the d -> 0 limit).
class MpmdTreeState {
 public:
  // the state only references the tree; a temporary would dangle
  MpmdTreeState(RootedTree&&, bool = false, bool = true) = delete;

  explicit MpmdTreeState(const RootedTree& tree, bool record_trace = false,
                         bool paranoid = true)
      : tree_(&tree), record_trace_(record_trace), paranoid_(paranoid) {
    if (!points_at_leaves(tree))
      throw std::invalid_argument("requests must live at leaves (augment_leaves first)");
    const int n = tree.vertex_count();
    z_.assign(n, 0.0);
    odd_.assign(n, 0);
    bought_.assign(n, 0);
    pinned_.assign(n, 0);
    cnt_.assign(n, 0);
    pending_at_.assign(n, {});
    for (int v = 0; v < n; ++v)
      if (v != tree.root() && tree.edge_weight(v) <= kDistTol) pinned_[v] = bought_[v] = 1;
  }

  double now() const { return now_; }
  double z(int u) const { return z_[u]; }
  bool bought(int u) const { return bought_[u] != 0; }
  bool odd(int u) const { return odd_[u] != 0; }
  int pending_total() const { return static_cast<int>(pending_ids_.size()); }
  const std::vector<double>& shadow_y() const { return z_; }  // never reset
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const RootedTree& tree() const { return *tree_; }
  const std::vector<Schedule::Pair>& matched_pairs() const { return matched_; }
  double connection_cost() const { return connection_; }
  double delay_cost() const { return delay_; }

  /// time until the earliest counter reaches its threshold, if any is running
  std::optional<double> next_trigger() const {
    double best = std::numeric_limits<double>::infinity();
    for (int u = 0; u < tree_->vertex_count(); ++u)
      if (u != tree_->root() && odd_[u] && !bought_[u])
        best = std::min(best, next_multiple(u) - z_[u]);
    if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
    return best;
  }

  /// Advances time to target, buying edges and connecting requests as
  /// counters hit thresholds. Simultaneous triggers (within kDistTol) are
  /// bought together and followed by one matching cascade.
  void advance_to(double target) {
    if (target < now_ - kDistTol) throw std::invalid_argument("time went backwards");
    const int n = tree_->vertex_count();
    thresh_.assign(n, 0.0);
    while (true) {
      // thresholds are captured before moving time: once z_u is advanced onto
      // its threshold, next_multiple(u) already names the following multiple
      double trigger_at = std::numeric_limits<double>::infinity();
      for (int u = 0; u < n; ++u)
        if (u != tree_->root() && odd_[u] && !bought_[u]) {
          thresh_[u] = next_multiple(u);
          trigger_at = std::min(trigger_at, now_ + (thresh_[u] - z_[u]));
        }
      const double step = std::min(target, trigger_at);
      if (step > now_) {
        const double delta = step - now_;
        for (int u = 0; u < n; ++u)
          if (odd_[u] && !bought_[u]) z_[u] += delta;  // root included
        now_ = step;
      }
      if (trigger_at > target + kDistTol) break;
      // buy everything due at this instant, then match to quiescence
      bool any = false;
      for (int u = 0; u < n; ++u) {
        if (u == tree_->root() || !odd_[u] || bought_[u]) continue;
        if (thresh_[u] - z_[u] <= kDistTol) {
          z_[u] = thresh_[u];  // snap; kills float drift
          buy(u);
          any = true;
        }
      }
      if (!any) throw InvariantViolation("trigger fired with no due edge");
      try_match();
      check_invariants();
    }
  }

  void on_request(int id, int point, double time) {
    advance_to(time);
    insert({id}, {point}, time);
    try_match();
    check_invariants();
  }

  /// Simultaneous arrivals: insert the whole group, then one matching cascade.
  void on_request_batch(const std::vector<int>& ids, const std::vector<int>& points,
                        double time) {
    advance_to(time);
    insert(ids, points, time);
    try_match();
    check_invariants();
  }

  /// Connects every currently connectable pair, repeatedly taking the pair
  /// that minimizes (smaller id, larger id) lexicographically.
  void try_match() {
    auto it = pending_ids_.begin();
    while (it != pending_ids_.end()) {
      const int i = *it;
      const int root = comp_root(leaf_of_[i]);
      if (cnt_[root] >= 2) {
        connect(i, root);
        it = pending_ids_.upper_bound(i);
      } else {
        ++it;
      }
    }
  }

 private:
  double next_multiple(int u) const {
    const double step = 2.0 * tree_->edge_weight(u);
    return (std::floor(z_[u] / step + 1e-9) + 1.0) * step;
  }

  int comp_root(int v) const {
    while (v != tree_->root() && bought_[v]) v = tree_->parent(v);
    return v;
  }

  void buy(int u) {
    bought_[u] = 1;
    const int merged = comp_root(tree_->parent(u));
    cnt_[merged] += cnt_[u];
    cnt_[u] = 0;
    if (record_trace_) trace_.push_back({TraceEvent::Kind::Buy, now_, u, -1, -1, 0});
  }

  void insert(const std::vector<int>& ids, const std::vector<int>& points, double time) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const int leaf = tree_->vertex_of_point(points[k]);
      if (leaf < 0 || !tree_->is_leaf(leaf))
        throw std::invalid_argument("request point is not mapped to a leaf");
      const int id = ids[k];
      leaf_of_.resize(std::max(leaf_of_.size(), static_cast<std::size_t>(id) + 1), -1);
      arrival_of_.resize(leaf_of_.size(), 0.0);
      leaf_of_[id] = leaf;
      arrival_of_[id] = time;
      pending_at_[leaf].push_back(id);
      pending_ids_.insert(id);
      cnt_[comp_root(leaf)] += 1;
      if (record_trace_) trace_.push_back({TraceEvent::Kind::Arrival, time, leaf, id, -1, 0});
    }
    if (ids.size() <= 4) {
      for (std::size_t k = 0; k < ids.size(); ++k)
        for (int v = tree_->vertex_of_point(points[k]);; v = tree_->parent(v)) {
          odd_[v] ^= 1;
          if (v == tree_->root()) break;
        }
    } else {
      recompute_parities();
    }
  }

  /// match the two smallest pending ids in the component rooted at `root`
  /// (the smaller must be `i`, the scan cursor)
  void connect(int i, int root) {
    int lo = -1, hi = -1;
    gather_two_smallest(root, lo, hi);
    if (lo != i) throw InvariantViolation("match scan order violated");
    const int a = leaf_of_[lo], b = leaf_of_[hi];
    const int meet = tree_->lca(a, b);

    erase_pending(lo);
    erase_pending(hi);
    connection_ += tree_->root_distance(a) + tree_->root_distance(b) -
                   2.0 * tree_->root_distance(meet);
    delay_ += (now_ - arrival_of_[lo]) + (now_ - arrival_of_[hi]);
    matched_.push_back({lo, hi, now_});
    if (record_trace_) trace_.push_back({TraceEvent::Kind::Match, now_, -1, lo, hi, 0});

    const int cnt_old = cnt_[root];
    std::vector<int> new_roots;
    for (int side : {a, b})
      for (int v = side; v != meet; v = tree_->parent(v)) {
        if (!bought_[v]) throw InvariantViolation("matched pair without a bought path");
        odd_[v] ^= 1;
        if (record_trace_) trace_.push_back({TraceEvent::Kind::Phase, now_, v, -1, -1, 0});
        if (!pinned_[v]) {
          bought_[v] = 0;
          new_roots.push_back(v);
        }
      }
    if (cnt_old == 2) {
      cnt_[root] = 0;
      for (int v : new_roots) cnt_[v] = 0;
    } else {
      cnt_[root] = recount(root);
      for (int v : new_roots) cnt_[v] = recount(v);
    }
  }

  void gather_two_smallest(int root, int& lo, int& hi) const {
    lo = hi = std::numeric_limits<int>::max();
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int id : pending_at_[v]) {
        if (id < lo) {
          hi = lo;
          lo = id;
        } else if (id < hi) {
          hi = id;
        }
      }
      for (int c : tree_->children(v))
        if (bought_[c]) stack.push_back(c);
    }
    if (hi == std::numeric_limits<int>::max())
      throw InvariantViolation("component count disagrees with contents");
  }

  int recount(int root) const {
    int total = 0;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      total += static_cast<int>(pending_at_[v].size());
      for (int c : tree_->children(v))
        if (bought_[c]) stack.push_back(c);
    }
    return total;
  }

  void erase_pending(int id) {
    pending_ids_.erase(id);
    auto& vec = pending_at_[leaf_of_[id]];
    vec.erase(std::find(vec.begin(), vec.end(), id));
  }

  void recompute_parities() {
    const std::vector<int>& order = tree_->top_order();
    std::vector<int> sub(tree_->vertex_count(), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int u = *it;
      sub[u] += static_cast<int>(pending_at_[u].size());
      if (u != tree_->root()) sub[tree_->parent(u)] += sub[u];
    }
    for (int u = 0; u < tree_->vertex_count(); ++u) odd_[u] = sub[u] & 1;
  }

  // Invariants checked at every quiescent instant: parity flags agree with a
  // recount; an odd non-leaf vertex has an odd child and an even non-leaf
  // vertex never has exactly one; each F-component holds at most one pending
  // request and the component counters agree; frozen counters of bought
  // edges sit on a multiple of their threshold.
  void check_invariants() const {
    if (!paranoid_) return;
    const int n = tree_->vertex_count();
    std::vector<int> sub(n, 0);
    const std::vector<int>& order = tree_->top_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int u = *it;
      sub[u] += static_cast<int>(pending_at_[u].size());
      if (u != tree_->root()) sub[tree_->parent(u)] += sub[u];
    }
    for (int u = 0; u < n; ++u) {
      if ((sub[u] & 1) != odd_[u]) throw InvariantViolation("parity flag out of date");
      if (!tree_->is_leaf(u)) {
        int odd_children = 0;
        for (int c : tree_->children(u)) odd_children += odd_[c];
        if (odd_[u] && odd_children < 1)
          throw InvariantViolation("odd non-leaf vertex without an odd child");
        if (!odd_[u] && odd_children == 1)
          throw InvariantViolation("even non-leaf vertex with exactly one odd child");
      }
      if (z_[u] < -kDistTol) throw InvariantViolation("negative counter");
      if (u != tree_->root()) {
        if (pinned_[u] && !bought_[u]) throw InvariantViolation("zero-weight edge left the forest");
        if (bought_[u] && !pinned_[u]) {
          const double step = 2.0 * tree_->edge_weight(u);
          const double k = std::round(z_[u] / step);
          if (std::abs(z_[u] - k * step) > kDistTol * std::max(1.0, std::abs(z_[u])))
            throw InvariantViolation("bought edge frozen off a threshold multiple");
        }
      }
    }
    std::vector<int> recnt(n, 0);
    for (int id : pending_ids_) recnt[comp_root(leaf_of_[id])] += 1;
    for (int u = 0; u < n; ++u) {
      if (recnt[u] > 1)
        throw InvariantViolation("an F-component holds two pending requests at quiescence");
      if (comp_root(u) == u && recnt[u] != cnt_[u])
        throw InvariantViolation("component counter out of date");
    }
  }

  const RootedTree* tree_;
  bool record_trace_;
  bool paranoid_;
  double now_ = 0.0;
  double connection_ = 0.0;
  double delay_ = 0.0;
  std::vector<double> z_;
  std::vector<double> thresh_;  // scratch: per-segment captured thresholds
  std::vector<char> odd_, bought_, pinned_;
  std::vector<int> cnt_;
  std::vector<std::vector<int>> pending_at_;
  std::set<int> pending_ids_;
  std::vector<int> leaf_of_;
  std::vector<double> arrival_of_;
  std::vector<Schedule::Pair> matched_;
  std::vector<TraceEvent> trace_;
};

struct MpmdRunResult {
  RootedTree tree;  // the tree the run used (augmented if needed)
  Schedule schedule;  // online semantics, connection in tree distances
  std::vector<double> y;  // final counter values per tree vertex
  std::vector<TraceEvent> trace;
};

/// Runs the tree algorithm on an unpolarized instance. Every request point
/// must be mapped in the tree; points at internal vertices are moved to
/// zero-weight child leaves first.
inline MpmdRunResult run_mpmd_tree(const Instance& inst, const RootedTree& tree,
                                   bool record_trace = false, bool paranoid = true) {
  inst.validate();
  if (inst.is_bipartite())
    throw std::invalid_argument("run_mpmd_tree expects an unpolarized instance");
  MpmdRunResult out;
  out.tree = points_at_leaves(tree) ? tree : augment_leaves(tree);

  MpmdTreeState s(out.tree, record_trace, paranoid);
  const int m = inst.m();
  int i = 0;
  while (i < m) {
    int j = i;
    std::vector<int> ids, points;
    while (j < m && inst.requests[j].arrival - inst.requests[i].arrival <= kDistTol) {
      ids.push_back(j);
      points.push_back(inst.requests[j].point);
      ++j;
    }
    s.on_request_batch(ids, points, inst.requests[i].arrival);
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
  out.y = s.shadow_y();
  out.trace = s.trace();
  return out;
}

struct VertexDiag {
  int u = -1;
  double y = 0.0;   // the algorithm's final counter
  double x = 0.0;   // reference solution's delay incurred inside T_u
  double xp = 0.0;  // d_u * number of reference pairs crossing e_u
  bool ok = true;
};

struct MpmdDiagnosis {
  std::vector<VertexDiag> rows;
  double sum_y = 0.0, sum_x_xp = 0.0;
  double sol_connection_tree = 0.0, sol_delay = 0.0;
  int height = 0;
  bool per_vertex_ok = true;   // y_u <= 2 (x_u + x'_u)
  bool aggregate_ok = true;    // sum (x_u + x'_u) <= SOL_d + h SOL_t
  bool connection_ok = true;   // ALG_d <= sum_u y_u / 2
  bool delay_ok = true;        // ALG_t <= 2 sum_u y_u
  bool competitive_ok = true;  // ALG <= 5 SOL_d + 5 h SOL_t
  bool all_ok() const {
    return per_vertex_ok && aggregate_ok && connection_ok && delay_ok && competitive_ok;
  }
};

/// Checks the run's per-vertex and aggregate guarantees against any feasible
/// reference solution of the same instance. All connection costs are taken
/// in the tree metric the run used.
inline MpmdDiagnosis diagnose_mpmd(const MpmdRunResult& run, const Instance& inst,
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

  MpmdDiagnosis d;
  d.height = t.height();
  d.sol_connection_tree = sol_d;
  d.sol_delay = sol_t;
  for (int u = 0; u < n; ++u) {
    VertexDiag row{u, run.y[u], x[u], xp[u], true};
    row.ok = row.y <= 2.0 * (row.x + row.xp) + tol;
    d.per_vertex_ok = d.per_vertex_ok && row.ok;
    d.sum_y += row.y;
    d.sum_x_xp += row.x + row.xp;
    d.rows.push_back(row);
  }
  d.aggregate_ok = d.sum_x_xp <= sol_d + d.height * sol_t + tol;
  d.connection_ok = run.schedule.connection_cost <= 0.5 * d.sum_y + tol;
  d.delay_ok = run.schedule.delay_cost <= 2.0 * d.sum_y + tol;
  d.competitive_ok =
      run.schedule.total() <= 5.0 * sol_d + 5.0 * d.height * sol_t + tol;
  return d;
}

}  // namespace mdlab

#endif
