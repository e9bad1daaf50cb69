#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mdlab/embed.hpp"
#include "mdlab/metric.hpp"
#include "mdlab/rng.hpp"

using namespace mdlab;

namespace {

// independent oracle: recompute every pair distance through the sampled tree
double min_pair_slack(const RootedTree& t, const FiniteMetric& m) {
  double slack = std::numeric_limits<double>::infinity();
  for (int x = 0; x < m.size(); ++x)
    for (int y = x + 1; y < m.size(); ++y) {
      const double dt = t.distance(t.vertex_of_point(x), t.vertex_of_point(y));
      slack = std::min(slack, dt - m(x, y));
    }
  return slack;
}

FiniteMetric uniform_metric(int n) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 1.0));
  for (int i = 0; i < n; ++i) rows[i][i] = 0.0;
  return FiniteMetric(rows);
}

}  // namespace

TEST_CASE("frt sample of a 1-point metric is a single leaf", "[embed]") {
  const EmbeddingSample s = frt_embed(FiniteMetric(std::vector<std::vector<double>>{{0.0}}), 3);
  CHECK(s.tree.vertex_count() == 1);
  CHECK(s.tree.point_of(s.tree.root()) == 0);
}

TEST_CASE("frt samples never contract", "[embed]") {
  const FiniteMetric two({{0, 1}, {1, 0}});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EmbeddingSample s = frt_embed(two, seed);
    CHECK(min_pair_slack(s.tree, two) >= -1e-9);
    CHECK(s.beta >= 1.0);
    CHECK(s.beta < 2.0);
  }
}

TEST_CASE("uniform 4-point stretch stays finite over many seeds", "[embed]") {
  const FiniteMetric m = uniform_metric(4);
  double mean_max_stretch = 0.0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const EmbeddingSample s = frt_embed(m, child_seed(11, trial));
    REQUIRE(min_pair_slack(s.tree, m) >= -1e-9);
    double worst = 0.0;
    for (int x = 0; x < 4; ++x)
      for (int y = x + 1; y < 4; ++y)
        worst = std::max(worst, s.tree.distance(s.tree.vertex_of_point(x),
                                                s.tree.vertex_of_point(y)) /
                                    m(x, y));
    mean_max_stretch += worst / trials;
  }
  CHECK(mean_max_stretch >= 1.0);
  CHECK(mean_max_stretch < 64.0);  // far looser than the O(log n) target
}

TEST_CASE("frt trees are 2-HSTs after scaling", "[embed]") {
  // min distance 1, so the scale factor is 1 and weights are bare labels
  const FiniteMetric m({{0, 1, 4, 2}, {1, 0, 3.5, 1.5}, {4, 3.5, 0, 2.5}, {2, 1.5, 2.5, 0}});
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const RootedTree t = frt_embed(m, seed).tree;
    double leaf_depth = -1.0;
    for (int v = 0; v < t.vertex_count(); ++v) {
      if (v == t.root()) continue;
      if (t.is_leaf(v)) {
        // a leaf carries the whole label of its level-1 parent
        CHECK(t.edge_weight(v) == Catch::Approx(2.0));
        // all leaves sit at the same depth, an exact power of two
        const double depth = t.root_distance(v);
        if (leaf_depth < 0.0) leaf_depth = depth;
        CHECK(depth == Catch::Approx(leaf_depth));
        CHECK(std::exp2(std::round(std::log2(depth))) == Catch::Approx(depth));
      } else if (t.parent(v) != t.root()) {
        // internal edges halve level by level
        CHECK(t.edge_weight(v) == Catch::Approx(t.edge_weight(t.parent(v)) / 2.0));
      }
    }
  }
}

TEST_CASE("chain contraction sums weights and keeps leaf distances", "[embed]") {
  // no single-child internals: untouched
  const RootedTree star({0, 0, 0}, {0.0, 1.0, 1.0}, {-1, 0, 1});
  CHECK(contract_chains(star) == star);

  // root -a(2)- leaf(1) collapses to one edge of weight 3
  const RootedTree path({0, 0, 1}, {0.0, 2.0, 1.0}, {-1, -1, 0});
  const RootedTree c = contract_chains(path);
  REQUIRE(c.vertex_count() == 2);
  CHECK(c.edge_weight(1) == Catch::Approx(3.0));
  CHECK(c.point_of(1) == 0);

  const FiniteMetric m({{0, 1, 4, 2}, {1, 0, 3.5, 1.5}, {4, 3.5, 0, 2.5}, {2, 1.5, 2.5, 0}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RootedTree raw = frt_embed(m, seed).tree;
    const RootedTree cc = contract_chains(raw);
    CHECK(contract_chains(cc) == cc);  // idempotent
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) {
        const double before = raw.distance(raw.vertex_of_point(x), raw.vertex_of_point(y));
        const double after = cc.distance(cc.vertex_of_point(x), cc.vertex_of_point(y));
        CHECK(after == Catch::Approx(before).margin(1e-9));
      }
  }
}

TEST_CASE("height reduction keeps small balanced trees intact", "[embed]") {
  const RootedTree solo({0}, {0.0}, {0});
  CHECK(reduce_height(solo) == solo);

  // balanced binary over 4 leaves: leaf-count classes drop on every edge
  const RootedTree bal({0, 0, 0, 1, 1, 2, 2}, {0, 2, 2, 1, 1, 1, 1}, {-1, -1, -1, 0, 1, 2, 3});
  CHECK(reduce_height(bal) == bal);
}

TEST_CASE("height reduction flattens a caterpillar", "[embed]") {
  // spine s0..s6; s0..s5 carry one leaf each, s6 carries two: 8 leaves
  std::vector<int> parent{0};
  std::vector<double> weight{0.0};
  std::vector<int> point{-1};
  int next_point = 0;
  int prev_spine = 0;
  for (int i = 1; i <= 6; ++i) {  // spine vertices s1..s6
    parent.push_back(prev_spine);
    weight.push_back(1.0);
    point.push_back(-1);
    prev_spine = static_cast<int>(parent.size()) - 1;
  }
  std::vector<int> spine{0, 1, 2, 3, 4, 5, 6};
  for (int i = 0; i <= 5; ++i) {
    parent.push_back(spine[i]);
    weight.push_back(0.5);
    point.push_back(next_point++);
  }
  parent.push_back(spine[6]);
  weight.push_back(0.5);
  point.push_back(next_point++);
  parent.push_back(spine[6]);
  weight.push_back(0.25);
  point.push_back(next_point++);
  const RootedTree cat(parent, weight, point);
  REQUIRE(cat.height() == 8);

  const RootedTree red = reduce_height(cat);
  CHECK(red.height() <= 5);  // ceil(log2 8) + 2
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      const double before = cat.distance(cat.vertex_of_point(x), cat.vertex_of_point(y));
      const double after = red.distance(red.vertex_of_point(x), red.vertex_of_point(y));
      CHECK(after >= before - 1e-9);
    }
}

TEST_CASE("height reduction rejects chains", "[embed]") {
  const RootedTree chain({0, 0, 1}, {0.0, 2.0, 1.0}, {-1, -1, 0});
  CHECK_THROWS(reduce_height(chain));
}

TEST_CASE("composed pipeline is non-contracting with bounded height", "[embed]") {
  const FiniteMetric two({{0, 3}, {3, 0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (EmbedMode mode : {EmbedMode::FrtOnly, EmbedMode::FrtReduce}) {
      const EmbeddingSample s = sample_embedding(two, seed, mode);
      CHECK(min_pair_slack(s.tree, two) >= -1e-9);
    }
  }

  const FiniteMetric line = line_metric(64);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EmbeddingSample s = sample_embedding(line, seed, EmbedMode::FrtReduce);
    CHECK(s.tree.height() <= 14);  // 2*ceil(log2 64) + 2
    CHECK(min_pair_slack(s.tree, line) >= -1e-9);

    // frt-only height tracks the level ladder: ceil(log2 aspect) + 2
    const EmbeddingSample raw = sample_embedding(line, seed, EmbedMode::FrtOnly);
    const int levels = static_cast<int>(std::ceil(std::log2(aspect_ratio(line)))) + 2;
    CHECK(raw.tree.height() <= levels);
    CHECK(min_pair_slack(raw.tree, line) >= -1e-9);
  }
}

TEST_CASE("identical metric, seed, and mode give identical trees", "[embed]") {
  const FiniteMetric m({{0, 1, 4, 2}, {1, 0, 3.5, 1.5}, {4, 3.5, 0, 2.5}, {2, 1.5, 2.5, 0}});
  for (EmbedMode mode : {EmbedMode::FrtOnly, EmbedMode::FrtReduce}) {
    const EmbeddingSample a = sample_embedding(m, 42, mode);
    const EmbeddingSample b = sample_embedding(m, 42, mode);
    CHECK(a.tree == b.tree);
    CHECK(a.beta == b.beta);
    CHECK(a.perm == b.perm);
  }
}

TEST_CASE("distortion measurement reports per-pair mean stretch", "[embed]") {
  const DistortionReport two = measure_distortion(FiniteMetric({{0, 1}, {1, 0}}),
                                                  EmbedMode::FrtReduce, 10, 5);
  REQUIRE(two.rows.size() == 1);
  CHECK(two.max_mean_stretch >= 1.0);

  const DistortionReport uni = measure_distortion(uniform_metric(4), EmbedMode::FrtOnly, 1000, 5);
  REQUIRE(uni.rows.size() == 6);
  CHECK(uni.max_mean_stretch >= 1.0);
  for (const auto& row : uni.rows) CHECK(row.mean_stretch >= 1.0 - 1e-12);

  CHECK_THROWS(measure_distortion(FiniteMetric(std::vector<std::vector<double>>{{0.0}}), EmbedMode::FrtOnly, 1, 1));
}
