#ifndef MDLAB_IO_HPP
#define MDLAB_IO_HPP

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "mdlab/instance.hpp"
#include "mdlab/tree.hpp"

namespace mdlab {

using json = nlohmann::json;

// Instance file: {"n": int, "dist": [[...]] | {"line": n},
//                 "requests": [{"p": int, "t": float, "b": int|null}, ...]}
// Tree file:     {"parent": [...], "weight": [...], "leaf_map": {"leaf": point}}

struct LoadedInstance {
  Instance instance;
  std::vector<int> alias;  // original point -> point after duplicate collapsing
};

inline json instance_to_json(const Instance& inst) {
  json j;
  j["n"] = inst.metric.size();
  if (inst.metric.is_line()) {
    j["dist"] = json{{"line", inst.metric.size()}};
  } else {
    json rows = json::array();
    for (int i = 0; i < inst.metric.size(); ++i) {
      json row = json::array();
      for (int k = 0; k < inst.metric.size(); ++k) row.push_back(inst.metric(i, k));
      rows.push_back(std::move(row));
    }
    j["dist"] = std::move(rows);
  }
  json reqs = json::array();
  for (const Request& r : inst.requests) {
    json q;
    q["p"] = r.point;
    q["t"] = r.arrival;
    if (r.polarity == 0)
      q["b"] = nullptr;
    else
      q["b"] = r.polarity;
    reqs.push_back(std::move(q));
  }
  j["requests"] = std::move(reqs);
  return j;
}

/// Parses an instance; duplicate metric points are collapsed and requests
/// remapped through the returned alias table.
inline LoadedInstance instance_from_json(const json& j) {
  FiniteMetric metric;
  const int n = j.at("n").get<int>();
  if (j.at("dist").is_object()) {
    const int ln = j.at("dist").at("line").get<int>();
    if (ln != n) throw std::invalid_argument("line size disagrees with n");
    metric = line_metric(ln);
  } else {
    auto rows = j.at("dist").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != n)
      throw std::invalid_argument("dist size disagrees with n");
    metric = FiniteMetric(rows);
  }
  require_valid_metric(metric, /*allow_duplicates=*/true);
  CollapseResult col = collapse_duplicates(metric);
  require_valid_metric(col.metric);

  LoadedInstance out;
  out.alias = col.alias;
  out.instance.metric = std::move(col.metric);
  for (const json& q : j.at("requests")) {
    Request r;
    r.point = out.alias.at(q.at("p").get<int>());
    r.arrival = q.at("t").get<double>();
    r.polarity = q.contains("b") && !q.at("b").is_null() ? q.at("b").get<int>() : 0;
    out.instance.requests.push_back(r);
  }
  out.instance.validate();
  return out;
}

inline json tree_to_json(const RootedTree& t) {
  json j;
  j["parent"] = t.parents();
  j["weight"] = t.weights();
  json leaf_map = json::object();
  for (int v = 0; v < t.vertex_count(); ++v)
    if (t.point_of(v) >= 0) leaf_map[std::to_string(v)] = t.point_of(v);
  j["leaf_map"] = std::move(leaf_map);
  return j;
}

inline RootedTree tree_from_json(const json& j) {
  auto parent = j.at("parent").get<std::vector<int>>();
  auto weight = j.at("weight").get<std::vector<double>>();
  std::vector<int> point(parent.size(), -1);
  for (auto it = j.at("leaf_map").begin(); it != j.at("leaf_map").end(); ++it)
    point.at(std::stoul(it.key())) = it.value().get<int>();
  return RootedTree(std::move(parent), std::move(weight), std::move(point));
}

inline json schedule_to_json(const Schedule& s) {
  json j;
  json pairs = json::array();
  for (const Schedule::Pair& p : s.pairs)
    pairs.push_back(json{{"i", p.i}, {"j", p.j}, {"t", p.match_time}});
  j["pairs"] = std::move(pairs);
  j["connection_cost"] = s.connection_cost;
  j["delay_cost"] = s.delay_cost;
  j["total"] = s.total();
  j["semantics"] = s.semantics == CostSemantics::Online ? "online" : "offline";
  return j;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void save_json_file(const std::string& path, const json& j, int indent = 2) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(indent) << '\n';
}

}  // namespace mdlab

#endif
