#ifndef MDLAB_TREE_HPP
#define MDLAB_TREE_HPP

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mdlab/metric.hpp"

namespace mdlab {

/// Rooted tree with nonnegative edge weights. parent[root] == root; the root
/// has no parent edge, so weight[root] is ignored (kept at 0, never used as a
/// numeric stand-in for "infinite"). point_of[v] maps a vertex to the metric
/// point it carries, or -1.
class RootedTree {
 public:
  RootedTree() = default;

  RootedTree(std::vector<int> parent, std::vector<double> weight,
             std::vector<int> point_of) {
    const int n = static_cast<int>(parent.size());
    if (static_cast<int>(weight.size()) != n || static_cast<int>(point_of.size()) != n)
      throw std::invalid_argument("tree arrays must have equal length");
    parent_ = std::move(parent);
    weight_ = std::move(weight);
    point_of_ = std::move(point_of);
    root_ = -1;
    for (int v = 0; v < n; ++v) {
      if (parent_[v] == v) {
        if (root_ >= 0) throw std::invalid_argument("tree has more than one root");
        root_ = v;
      } else if (parent_[v] < 0 || parent_[v] >= n) {
        throw std::invalid_argument("parent index out of range");
      }
      if (v != root_ && weight_[v] < 0.0)
        throw std::invalid_argument("negative edge weight");
    }
    if (root_ < 0) throw std::invalid_argument("tree has no root");
    weight_[root_] = 0.0;
    build_derived();
  }

  int vertex_count() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  int parent(int v) const { return parent_[v]; }
  bool is_leaf(int v) const { return children_[v].empty(); }
  const std::vector<int>& children(int v) const { return children_[v]; }
  const std::vector<int>& parents() const { return parent_; }
  const std::vector<double>& weights() const { return weight_; }
  const std::vector<int>& points() const { return point_of_; }

  /// weight of the edge from v to its parent; the root has no such edge
  double edge_weight(int v) const {
    if (v == root_) throw std::logic_error("root has no parent edge");
    return weight_[v];
  }

  int depth(int v) const { return depth_[v]; }          // edges from root
  double root_distance(int v) const { return rdist_[v]; }
  int point_of(int v) const { return point_of_[v]; }

  /// vertex carrying point p, or -1
  int vertex_of_point(int p) const {
    return p >= 0 && p < static_cast<int>(vertex_by_point_.size()) ? vertex_by_point_[p]
                                                                   : -1;
  }

  /// number of vertices on the longest root-to-vertex path
  int height() const {
    int h = 0;
    for (int v = 0; v < vertex_count(); ++v) h = std::max(h, depth_[v] + 1);
    return h;
  }

  int lca(int u, int v) const {
    while (u != v) {
      if (depth_[u] < depth_[v]) std::swap(u, v);
      u = parent_[u];
    }
    return u;
  }

  double distance(int u, int v) const {
    const int a = lca(u, v);
    return rdist_[u] + rdist_[v] - 2.0 * rdist_[a];
  }

  /// vertices in a topological order (parents before children)
  const std::vector<int>& top_order() const { return order_; }

  bool operator==(const RootedTree& o) const {
    return parent_ == o.parent_ && weight_ == o.weight_ && point_of_ == o.point_of_;
  }

 private:
  void build_derived() {
    const int n = vertex_count();
    children_.assign(n, {});
    for (int v = 0; v < n; ++v)
      if (v != root_) children_[parent_[v]].push_back(v);
    depth_.assign(n, 0);
    rdist_.assign(n, 0.0);
    order_.clear();
    order_.reserve(n);
    order_.push_back(root_);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const int u = order_[i];
      for (int c : children_[u]) {
        depth_[c] = depth_[u] + 1;
        rdist_[c] = rdist_[u] + weight_[c];
        order_.push_back(c);
      }
    }
    if (static_cast<int>(order_.size()) != n)
      throw std::invalid_argument("parent pointers contain a cycle");
    int maxp = -1;
    for (int v = 0; v < n; ++v) maxp = std::max(maxp, point_of_[v]);
    vertex_by_point_.assign(maxp + 1, -1);
    for (int v = 0; v < n; ++v)
      if (point_of_[v] >= 0) {
        if (vertex_by_point_[point_of_[v]] >= 0)
          throw std::invalid_argument("point mapped by two vertices");
        vertex_by_point_[point_of_[v]] = v;
      }
  }

  std::vector<int> parent_;
  std::vector<double> weight_;
  std::vector<int> point_of_;
  std::vector<std::vector<int>> children_;
  std::vector<int> depth_;
  std::vector<double> rdist_;
  std::vector<int> order_;
  std::vector<int> vertex_by_point_;
  int root_ = -1;
};

/// True iff every mapped vertex is a leaf.
inline bool points_at_leaves(const RootedTree& t) {
  for (int v = 0; v < t.vertex_count(); ++v)
    if (t.point_of(v) >= 0 && !t.is_leaf(v)) return false;
  return true;
}

/// Gives every mapped internal vertex a zero-weight child leaf carrying its
/// point. Point-to-point distances are preserved exactly.
inline RootedTree augment_leaves(const RootedTree& t) {
  const int n = t.vertex_count();
  std::vector<int> parent(t.parents());
  std::vector<double> weight(t.weights());
  std::vector<int> point(t.points());
  for (int v = 0; v < n; ++v) {
    if (t.point_of(v) >= 0 && !t.is_leaf(v)) {
      parent.push_back(v);
      weight.push_back(0.0);
      point.push_back(t.point_of(v));
      point[v] = -1;
    }
  }
  return RootedTree(std::move(parent), std::move(weight), std::move(point));
}

/// The n-point line metric as a path tree rooted at the middle point; edge
/// weights are the 1/n spacing. Internal vertices still carry their points,
/// so runs apply augment_leaves first.
inline RootedTree path_tree_for_line(int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("path_tree_for_line requires even n >= 2");
  const int mid = n / 2;
  std::vector<int> parent(n), point(n);
  std::vector<double> weight(n, 1.0 / n);
  for (int v = 0; v < n; ++v) {
    point[v] = v;
    parent[v] = v < mid ? v + 1 : (v > mid ? v - 1 : v);
  }
  weight[mid] = 0.0;
  return RootedTree(std::move(parent), std::move(weight), std::move(point));
}

/// Metric on the mapped points given by tree distances.
inline FiniteMetric tree_metric(const RootedTree& t, int n_points) {
  std::vector<double> flat(static_cast<std::size_t>(n_points) * n_points, 0.0);
  for (int p = 0; p < n_points; ++p) {
    const int u = t.vertex_of_point(p);
    if (u < 0) throw std::invalid_argument("point not mapped in tree");
    for (int q = 0; q < n_points; ++q) {
      const int v = t.vertex_of_point(q);
      flat[static_cast<std::size_t>(p) * n_points + q] = p == q ? 0.0 : t.distance(u, v);
    }
  }
  return FiniteMetric::from_flat(n_points, std::move(flat));
}

}  // namespace mdlab

#endif
