#ifndef MDLAB_EMBED_HPP
#define MDLAB_EMBED_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mdlab/metric.hpp"
#include "mdlab/rng.hpp"
#include "mdlab/tree.hpp"

namespace mdlab {

enum class EmbedMode { FrtOnly, FrtReduce };

inline const char* embed_mode_name(EmbedMode m) {
  return m == EmbedMode::FrtOnly ? "frt-only" : "frt+reduce";
}

inline EmbedMode embed_mode_from_name(const std::string& s) {
  if (s == "frt-only") return EmbedMode::FrtOnly;
  if (s == "frt+reduce") return EmbedMode::FrtReduce;
  throw std::invalid_argument("unknown embedding mode: " + s);
}

struct EmbeddingSample {
  RootedTree tree;
  std::uint64_t seed = 0;
  double beta = 0.0;
  std::vector<int> perm;
};

/// Random 2-HST over the metric points. Distances are normalized so the
/// smallest off-diagonal entry is 1; level-i clusters are balls of radius
/// beta * 2^(i-1) carved around the points in a random permutation order,
/// beta drawn from [1,2) with density 1/(beta ln 2). Edge weights are the
/// standard diameter labels: an internal vertex at level i hangs from its
/// level-(i+1) parent by 2^i, and a leaf carries the full remaining label 2,
/// so every leaf lies at distance exactly 2^i from its level-i ancestor
/// (rescaled back to original units on output). The output never contracts
/// a distance: a pair split below level i is at most beta * 2^i apart, and
/// its tree distance is 2^(i+1) > beta * 2^i.
inline EmbeddingSample frt_embed(const FiniteMetric& metric, std::uint64_t seed) {
  require_valid_metric(metric);
  const int n = metric.size();
  EmbeddingSample out;
  out.seed = seed;
  Rng rng(seed);
  out.perm = rng.permutation(n);
  out.beta = std::exp2(rng.uniform01());  // inverse CDF of 1/(x ln 2) on [1,2)

  if (n == 1) {
    out.tree = RootedTree({0}, {0.0}, {0});
    return out;
  }

  double scale = std::numeric_limits<double>::infinity(), diam = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      scale = std::min(scale, metric(i, j));
      diam = std::max(diam, metric(i, j));
    }
  const double ndiam = diam / scale;  // normalized diameter, >= 1
  int top = 1;
  while (std::exp2(top) < ndiam - kDistTol) ++top;

  // clusters as point lists; one tree vertex per (level, cluster)
  std::vector<int> parent{0};
  std::vector<double> weight{0.0};
  std::vector<int> point{-1};
  std::vector<std::vector<int>> frontier;  // clusters at the current level
  std::vector<int> frontier_vertex{0};
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  frontier.push_back(std::move(all));

  std::vector<char> taken(n, 0);
  for (int level = top; level >= 1; --level) {
    const double radius = out.beta * std::exp2(level - 2);  // child level is level-1
    // level-1 children are the leaves; they carry the whole remaining label
    const double w = (level == 1 ? 2.0 : std::exp2(level - 1)) * scale;
    std::vector<std::vector<int>> next;
    std::vector<int> next_vertex;
    for (std::size_t c = 0; c < frontier.size(); ++c) {
      for (int p : frontier[c]) taken[p] = 0;
      for (int center : out.perm) {
        std::vector<int> piece;
        for (int p : frontier[c])
          if (!taken[p] && metric(p, center) / scale <= radius) piece.push_back(p);
        if (piece.empty()) continue;
        for (int p : piece) taken[p] = 1;
        const int v = static_cast<int>(parent.size());
        parent.push_back(frontier_vertex[c]);
        weight.push_back(w);
        point.push_back(level == 1 ? piece[0] : -1);
        if (level == 1 && piece.size() != 1)
          throw std::logic_error("level-0 cluster is not a singleton");
        next.push_back(std::move(piece));
        next_vertex.push_back(v);
      }
    }
    frontier = std::move(next);
    frontier_vertex = std::move(next_vertex);
  }
  out.tree = RootedTree(std::move(parent), std::move(weight), std::move(point));
  return out;
}

/// Replaces every maximal chain of single-child internal vertices by one edge
/// carrying the chain's total weight. If the chain starts at the root and
/// ends above a branching vertex, the tree is re-rooted there; a pure path
/// keeps its root above the single leaf. Leaf-to-leaf distances are
/// preserved exactly. Requires points mapped at leaves only.
inline RootedTree contract_chains(const RootedTree& t) {
  if (!points_at_leaves(t))
    throw std::invalid_argument("contract_chains requires points at leaves only (augment_leaves first)");
  int new_root = t.root();
  while (t.children(new_root).size() == 1) new_root = t.children(new_root)[0];
  if (t.is_leaf(new_root) && new_root != t.root()) new_root = t.root();  // pure path

  // keep: new_root, every branching vertex below it, every leaf below it
  const int n = t.vertex_count();
  std::vector<char> keep(n, 0);
  std::vector<int> stack{new_root};
  std::vector<int> kept;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == new_root || t.children(u).size() >= 2 || t.is_leaf(u)) {
      keep[u] = 1;
      kept.push_back(u);
    }
    for (int c : t.children(u)) stack.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<int> index(n, -1);
  for (std::size_t i = 0; i < kept.size(); ++i) index[kept[i]] = static_cast<int>(i);

  std::vector<int> parent(kept.size());
  std::vector<double> weight(kept.size(), 0.0);
  std::vector<int> point(kept.size(), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const int u = kept[i];
    point[i] = t.point_of(u);
    if (u == new_root) {
      parent[i] = static_cast<int>(i);
      continue;
    }
    int a = t.parent(u);
    double w = t.edge_weight(u);
    while (!keep[a]) {
      w += t.edge_weight(a);
      a = t.parent(a);
    }
    parent[i] = index[a];
    weight[i] = w;
  }
  return RootedTree(std::move(parent), std::move(weight), std::move(point));
}

/// Height reduction for chain-contracted trees. With l(u) the number of
/// leaves under u, retains the root, all leaves, and every u whose dyadic
/// class floor(log2 l(u)) drops below its parent's; each retained vertex
/// reattaches to its nearest retained proper ancestor by an edge of the exact
/// original path weight. Output height <= ceil(log2 n_leaves) + 2, and no
/// leaf-to-leaf distance shrinks.
inline RootedTree reduce_height(const RootedTree& t) {
  const int n = t.vertex_count();
  if (n <= 2) return t;  // single leaf, or root above a single leaf
  for (int v = 0; v < n; ++v)
    if (!t.is_leaf(v) && t.children(v).size() == 1)
      throw std::invalid_argument("reduce_height requires a chain-contracted tree (vertex " +
                                  std::to_string(v) + " has a single child)");
  if (!points_at_leaves(t))
    throw std::invalid_argument("reduce_height requires points at leaves only");

  std::vector<int> leaves(n, 0);
  const std::vector<int>& order = t.top_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int u = *it;
    if (t.is_leaf(u)) leaves[u] = 1;
    if (u != t.root()) leaves[t.parent(u)] += leaves[u];
  }
  auto cls = [&](int u) { return std::ilogb(static_cast<double>(leaves[u])); };

  std::vector<char> keep(n, 0);
  std::vector<int> kept;
  for (int u : order)
    if (u == t.root() || t.is_leaf(u) || cls(u) < cls(t.parent(u))) {
      keep[u] = 1;
      kept.push_back(u);  // order[] is topological, so parents come first
    }
  std::vector<int> index(n, -1);
  for (std::size_t i = 0; i < kept.size(); ++i) index[kept[i]] = static_cast<int>(i);

  std::vector<int> parent(kept.size());
  std::vector<double> weight(kept.size(), 0.0);
  std::vector<int> point(kept.size(), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const int u = kept[i];
    point[i] = t.point_of(u);
    if (u == t.root()) {
      parent[i] = static_cast<int>(i);
      continue;
    }
    int a = t.parent(u);
    while (!keep[a]) a = t.parent(a);
    parent[i] = index[a];
    weight[i] = t.root_distance(u) - t.root_distance(a);
  }
  return RootedTree(std::move(parent), std::move(weight), std::move(point));
}

/// frt_embed, then contract_chains, then (in frt+reduce mode) reduce_height.
inline EmbeddingSample sample_embedding(const FiniteMetric& metric, std::uint64_t seed,
                                        EmbedMode mode) {
  EmbeddingSample s = frt_embed(metric, seed);
  s.tree = contract_chains(s.tree);
  if (mode == EmbedMode::FrtReduce) s.tree = reduce_height(s.tree);
  return s;
}

struct DistortionReport {
  struct Row {
    int x = 0, y = 0;
    double mean_stretch = 0.0;
  };
  std::vector<Row> rows;
  double max_mean_stretch = 0.0;  // the empirical distortion
};

/// Mean stretch d_T(x,y)/d(x,y) per pair over independent samples; the
/// report's maximum over pairs is the empirical distortion.
inline DistortionReport measure_distortion(const FiniteMetric& metric, EmbedMode mode,
                                           int trials, std::uint64_t seed) {
  const int n = metric.size();
  if (n < 2) throw std::invalid_argument("measure_distortion requires n >= 2");
  if (trials < 1) throw std::invalid_argument("measure_distortion requires trials >= 1");
  std::vector<double> sum(static_cast<std::size_t>(n) * n, 0.0);
  for (int t = 0; t < trials; ++t) {
    EmbeddingSample s = sample_embedding(metric, child_seed(seed, t), mode);
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y)
        sum[static_cast<std::size_t>(x) * n + y] +=
            s.tree.distance(s.tree.vertex_of_point(x), s.tree.vertex_of_point(y)) / metric(x, y);
  }
  DistortionReport rep;
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      DistortionReport::Row row;
      row.x = x;
      row.y = y;
      row.mean_stretch = sum[static_cast<std::size_t>(x) * n + y] / trials;
      rep.max_mean_stretch = std::max(rep.max_mean_stretch, row.mean_stretch);
      rep.rows.push_back(row);
    }
  return rep;
}

}  // namespace mdlab

#endif
