#ifndef MDLAB_HARNESS_HPP
#define MDLAB_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdlab/embed.hpp"
#include "mdlab/instance.hpp"
#include "mdlab/io.hpp"
#include "mdlab/lowerbound.hpp"
#include "mdlab/offline_opt.hpp"
#include "mdlab/online_mbpmd.hpp"
#include "mdlab/online_mpmd.hpp"
#include "mdlab/rng.hpp"

namespace mdlab {

enum class Family { LineLb, RandomEuclidean, RandomTree, FromFile };
enum class Algorithm { MpmdTree, MbpmdTree };
enum class EmbedPipeline { None, FrtOnly, FrtReduce };
enum class SolverChoice { Auto, Subsets, Assignment, Greedy, Adversary };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::LineLb: return "line-lb";
    case Family::RandomEuclidean: return "random-euclidean";
    case Family::RandomTree: return "random-tree";
    default: return "file";
  }
}

inline Family family_from_name(const std::string& s) {
  if (s == "line-lb") return Family::LineLb;
  if (s == "random-euclidean") return Family::RandomEuclidean;
  if (s == "random-tree") return Family::RandomTree;
  if (s == "file") return Family::FromFile;
  throw std::invalid_argument("unknown family: " + s);
}

inline const char* algorithm_name(Algorithm a) {
  return a == Algorithm::MpmdTree ? "mpmd-tree" : "mbpmd-tree";
}

inline Algorithm algorithm_from_name(const std::string& s) {
  if (s == "mpmd-tree") return Algorithm::MpmdTree;
  if (s == "mbpmd-tree") return Algorithm::MbpmdTree;
  throw std::invalid_argument("unknown algorithm: " + s);
}

inline const char* embed_pipeline_name(EmbedPipeline e) {
  switch (e) {
    case EmbedPipeline::None: return "none";
    case EmbedPipeline::FrtOnly: return "frt-only";
    default: return "frt+reduce";
  }
}

inline EmbedPipeline embed_pipeline_from_name(const std::string& s) {
  if (s == "none") return EmbedPipeline::None;
  if (s == "frt-only") return EmbedPipeline::FrtOnly;
  if (s == "frt+reduce") return EmbedPipeline::FrtReduce;
  throw std::invalid_argument("unknown embed mode: " + s);
}

inline const char* solver_name(SolverChoice s) {
  switch (s) {
    case SolverChoice::Auto: return "auto";
    case SolverChoice::Subsets: return "subsets";
    case SolverChoice::Assignment: return "assignment";
    case SolverChoice::Greedy: return "greedy";
    default: return "adversary";
  }
}

inline SolverChoice solver_from_name(const std::string& s) {
  if (s == "auto") return SolverChoice::Auto;
  if (s == "subsets") return SolverChoice::Subsets;
  if (s == "assignment") return SolverChoice::Assignment;
  if (s == "greedy") return SolverChoice::Greedy;
  if (s == "adversary") return SolverChoice::Adversary;
  throw std::invalid_argument("unknown solver: " + s);
}

struct ExperimentConfig {
  Family family = Family::RandomTree;
  Algorithm algorithm = Algorithm::MpmdTree;
  EmbedPipeline embed = EmbedPipeline::None;
  int n = 8;        // metric points (line / Euclidean families)
  int m = 12;       // request budget per trial (random families)
  int trials = 1;
  std::uint64_t seed = 0;
  SolverChoice solver = SolverChoice::Auto;
  int subset_cap = 22;
  std::string instance_file;  // family "file"
  std::string out;            // CLI output hint

  void validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (m < 2 || m % 2 != 0) throw std::invalid_argument("config: m must be even and >= 2");
    if (solver == SolverChoice::Subsets && m > subset_cap)
      throw std::invalid_argument("config: subset solver capped at m <= " +
                                  std::to_string(subset_cap));
    if (family == Family::FromFile && instance_file.empty())
      throw std::invalid_argument("config: family 'file' needs instance_file");
    if (family == Family::RandomEuclidean && embed == EmbedPipeline::None)
      throw std::invalid_argument("config: random-euclidean needs an embedding mode");
  }
};

using nlohmann::json;

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["family"] = family_name(c.family);
  j["algorithm"] = algorithm_name(c.algorithm);
  j["embed"] = embed_pipeline_name(c.embed);
  j["n"] = c.n;
  j["m"] = c.m;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["solver"] = solver_name(c.solver);
  j["subset_cap"] = c.subset_cap;
  j["instance_file"] = c.instance_file;
  j["out"] = c.out;
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  // a typo'd key would otherwise silently fall back to the default value
  static const char* known[] = {"family", "algorithm", "embed",      "n",
                                "m",      "trials",    "seed",       "solver",
                                "subset_cap", "instance_file", "out"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw std::invalid_argument("config: unknown key '" + item.key() + "'");
  }
  ExperimentConfig c;
  if (j.contains("family")) c.family = family_from_name(j.at("family").get<std::string>());
  if (j.contains("algorithm"))
    c.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  if (j.contains("embed")) c.embed = embed_pipeline_from_name(j.at("embed").get<std::string>());
  if (j.contains("n")) c.n = j.at("n").get<int>();
  if (j.contains("m")) c.m = j.at("m").get<int>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("solver")) c.solver = solver_from_name(j.at("solver").get<std::string>());
  if (j.contains("subset_cap")) c.subset_cap = j.at("subset_cap").get<int>();
  if (j.contains("instance_file")) c.instance_file = j.at("instance_file").get<std::string>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  return c;
}

/// Minimal flat TOML: `key = value` lines with #-comments; values are
/// quoted strings, booleans, or numbers. Enough for experiment configs.
inline json flat_toml_to_json(const std::string& text) {
  json j = json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key or value");
    if (val.front() == '"' && val.back() == '"' && val.size() >= 2) {
      j[key] = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      j[key] = val == "true";
    } else if (val.find_first_of(".eE") != std::string::npos) {
      j[key] = std::stod(val);
    } else {
      j[key] = std::stoll(val);
    }
  }
  return j;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const bool toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  return config_from_json(toml ? flat_toml_to_json(buf.str()) : json::parse(buf.str()));
}

/// FNV-1a over the canonical config serialization
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string s = config_to_json(c).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  double alg_cost = 0.0;        // connection in the original metric + delay
  double alg_connection = 0.0;  // original-metric connection
  double alg_connection_tree = 0.0;
  double alg_delay = 0.0;
  double sol_cost = 0.0;
  double sol_connection = 0.0;
  double sol_delay = 0.0;
  std::string sol_kind;  // exact OPT or an upper bound; labels the ratio
  double ratio = 0.0;    // alg_cost / sol_cost, 0 when degenerate
  bool degenerate = false;
  bool invariants_ok = true;
  int height = 0;  // height of the tree the run used
};

struct Report {
  ExperimentConfig config;
  std::string hash;
  std::vector<TrialRow> trials;
  double mean_ratio = 0.0, max_ratio = 0.0, stddev_ratio = 0.0;
  int degenerate_trials = 0;
  int failed_invariants = 0;
  bool all_ok = true;
};

inline json report_to_json(const Report& r) {
  json j;
  j["config"] = config_to_json(r.config);
  j["config_hash"] = r.hash;
  json rows = json::array();
  for (const TrialRow& t : r.trials) {
    json row;
    row["trial"] = t.trial;
    row["seed"] = t.seed;
    row["alg_cost"] = t.alg_cost;
    row["alg_connection"] = t.alg_connection;
    row["alg_connection_tree"] = t.alg_connection_tree;
    row["alg_delay"] = t.alg_delay;
    row["sol_cost"] = t.sol_cost;
    row["sol_connection"] = t.sol_connection;
    row["sol_delay"] = t.sol_delay;
    row["sol_kind"] = t.sol_kind;
    row["ratio"] = t.ratio;
    row["degenerate"] = t.degenerate;
    row["invariants_ok"] = t.invariants_ok;
    row["height"] = t.height;
    rows.push_back(std::move(row));
  }
  j["trials"] = std::move(rows);
  j["mean_ratio"] = r.mean_ratio;
  j["max_ratio"] = r.max_ratio;
  j["stddev_ratio"] = r.stddev_ratio;
  j["degenerate_trials"] = r.degenerate_trials;
  j["failed_invariants"] = r.failed_invariants;
  j["all_ok"] = r.all_ok;
  return j;
}

inline Report report_from_json(const json& j) {
  Report r;
  r.config = config_from_json(j.at("config"));
  r.hash = j.at("config_hash").get<std::string>();
  for (const json& row : j.at("trials")) {
    TrialRow t;
    t.trial = row.at("trial").get<int>();
    t.seed = row.at("seed").get<std::uint64_t>();
    t.alg_cost = row.at("alg_cost").get<double>();
    t.alg_connection = row.at("alg_connection").get<double>();
    t.alg_connection_tree = row.at("alg_connection_tree").get<double>();
    t.alg_delay = row.at("alg_delay").get<double>();
    t.sol_cost = row.at("sol_cost").get<double>();
    t.sol_connection = row.at("sol_connection").get<double>();
    t.sol_delay = row.at("sol_delay").get<double>();
    t.sol_kind = row.at("sol_kind").get<std::string>();
    t.ratio = row.at("ratio").get<double>();
    t.degenerate = row.at("degenerate").get<bool>();
    t.invariants_ok = row.at("invariants_ok").get<bool>();
    t.height = row.at("height").get<int>();
    r.trials.push_back(std::move(t));
  }
  r.mean_ratio = j.at("mean_ratio").get<double>();
  r.max_ratio = j.at("max_ratio").get<double>();
  r.stddev_ratio = j.at("stddev_ratio").get<double>();
  r.degenerate_trials = j.at("degenerate_trials").get<int>();
  r.failed_invariants = j.at("failed_invariants").get<int>();
  r.all_ok = j.at("all_ok").get<bool>();
  return r;
}

/// uniform points in the unit square
inline FiniteMetric random_euclidean_metric(int n, Rng& rng) {
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.uniform01();
    y[i] = rng.uniform01();
  }
  std::vector<double> flat(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      flat[static_cast<std::size_t>(i) * n + j] = std::hypot(x[i] - x[j], y[i] - y[j]);
  return FiniteMetric::from_flat(n, std::move(flat));
}

/// Random tree with at most max_leaves leaves, height (in vertices) at most
/// max_height, edge weights uniform in [w_lo, w_hi]; points sit on leaves.
inline RootedTree random_leafy_tree(Rng& rng, int max_leaves = 16, int max_height = 5,
                                    double w_lo = 0.1, double w_hi = 10.0) {
  const int extra = rng.int_in(1, max_leaves);
  std::vector<int> parent{0};
  std::vector<double> weight{0.0};
  std::vector<int> depth{0};
  for (int v = 1; v <= extra; ++v) {
    int p = 0;
    for (int tries = 0; tries < 64; ++tries) {
      const int cand = static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
      if (depth[cand] + 2 <= max_height) {
        p = cand;
        break;
      }
    }
    parent.push_back(p);
    weight.push_back(rng.uniform(w_lo, w_hi));
    depth.push_back(depth[p] + 1);
  }
  std::vector<char> has_child(extra + 1, 0);
  for (int v = 1; v <= extra; ++v) has_child[parent[v]] = 1;
  std::vector<int> point(extra + 1, -1);
  int np = 0;
  for (int v = 0; v <= extra; ++v)
    if (!has_child[v]) point[v] = np++;
  return RootedTree(std::move(parent), std::move(weight), std::move(point));
}

namespace detail {

inline int point_count(const RootedTree& t) {
  int np = 0;
  for (int v = 0; v < t.vertex_count(); ++v) np = std::max(np, t.point_of(v) + 1);
  return np;
}

inline std::vector<Request> random_requests(Rng& rng, int points, int m_budget, bool bipartite) {
  const int pairs = rng.int_in(1, m_budget / 2);
  const int m = 2 * pairs;
  std::vector<double> times(m);
  for (double& t : times) t = rng.uniform(0.0, 10.0);
  std::sort(times.begin(), times.end());
  std::vector<int> pol(m, 0);
  if (bipartite) {
    for (int i = 0; i < m; ++i) pol[i] = i < pairs ? 1 : -1;
    rng.shuffle(pol);
  }
  std::vector<Request> reqs(m);
  for (int i = 0; i < m; ++i)
    reqs[i] = {static_cast<int>(rng.below(static_cast<std::uint64_t>(points))), times[i], pol[i]};
  return reqs;
}

inline double original_connection(const Instance& inst, const std::vector<Schedule::Pair>& pairs) {
  double c = 0.0;
  for (const Schedule::Pair& p : pairs)
    c += inst.metric(inst.requests[p.i].point, inst.requests[p.j].point);
  return c;
}

}  // namespace detail

/// One trial: build the instance and tree, run the online algorithm on the
/// tree while charging its connections in the original metric, solve the
/// reference side, and record costs plus every diagnostic's verdict.
inline TrialRow run_trial(const ExperimentConfig& cfg, int trial, bool paranoid = true) {
  const std::uint64_t cs = child_seed(cfg.seed, static_cast<std::uint64_t>(trial));
  Rng rng(cs);
  TrialRow row;
  row.trial = trial;
  row.seed = cs;

  const bool bipartite = cfg.algorithm == Algorithm::MbpmdTree;
  Instance inst;
  RootedTree tree;
  bool have_lb = false;
  LBInstance lb;

  switch (cfg.family) {
    case Family::RandomTree: {
      tree = random_leafy_tree(rng);
      const int np = detail::point_count(tree);
      inst.metric = tree_metric(tree, np);
      inst.requests = detail::random_requests(rng, np, cfg.m, bipartite);
      break;
    }
    case Family::RandomEuclidean: {
      inst.metric = random_euclidean_metric(cfg.n, rng);
      inst.requests = detail::random_requests(rng, cfg.n, cfg.m, bipartite);
      break;
    }
    case Family::LineLb: {
      lb = bipartite ? gen_mbpmd_lb(cfg.n, cs) : gen_mpmd_lb(cfg.n, cs);
      inst = lb.instance;
      have_lb = true;
      break;
    }
    case Family::FromFile: {
      inst = instance_from_json(load_json_file(cfg.instance_file)).instance;
      break;
    }
  }
  inst.validate();
  if (bipartite && !inst.is_bipartite())
    throw std::invalid_argument("mbpmd-tree needs a polarized instance");
  if (!bipartite && inst.is_bipartite())
    throw std::invalid_argument("mpmd-tree needs an unpolarized instance");

  if (cfg.embed == EmbedPipeline::None) {
    if (cfg.family == Family::RandomTree) {
      // tree already built
    } else if (inst.metric.is_line()) {
      tree = path_tree_for_line(inst.metric.size());
    } else {
      throw std::invalid_argument("this family needs an embedding mode (metric is not a tree)");
    }
  } else {
    const EmbedMode mode =
        cfg.embed == EmbedPipeline::FrtOnly ? EmbedMode::FrtOnly : EmbedMode::FrtReduce;
    tree = sample_embedding(inst.metric, child_seed(cs, 1), mode).tree;
  }

  // reference solution
  SolverChoice sv = cfg.solver;
  if (sv == SolverChoice::Auto) {
    if (have_lb)
      sv = SolverChoice::Adversary;
    else if (bipartite)
      sv = SolverChoice::Assignment;
    else if (inst.m() <= cfg.subset_cap)
      sv = SolverChoice::Subsets;
    else
      sv = SolverChoice::Greedy;
  }
  Schedule sol;
  switch (sv) {
    case SolverChoice::Subsets:
      sol = exact_opt_subsets(inst, cfg.subset_cap);
      row.sol_kind = "subsets";
      break;
    case SolverChoice::Assignment:
      sol = bipartite_opt_assignment(inst);
      row.sol_kind = "assignment";
      break;
    case SolverChoice::Greedy:
      sol = greedy_heuristic(inst);
      row.sol_kind = "greedy";
      break;
    case SolverChoice::Adversary:
      if (!have_lb) throw std::invalid_argument("adversary solver needs the line-lb family");
      sol = bipartite ? adversary_solution_mbpmd(inst) : adversary_solution_mpmd(lb);
      row.sol_kind = "adversary";
      break;
    default:
      throw std::logic_error("unresolved solver choice");
  }
  row.sol_cost = sol.total();
  row.sol_connection = sol.connection_cost;
  row.sol_delay = sol.delay_cost;

  // online run on the tree; connections charged in the original metric
  if (bipartite) {
    MbpmdRunResult run = run_mbpmd_tree(inst, tree, false, paranoid);
    row.alg_connection_tree = run.schedule.connection_cost;
    row.alg_connection = detail::original_connection(inst, run.schedule.pairs);
    row.alg_delay = run.schedule.delay_cost;
    row.height = run.tree.height();
    row.invariants_ok = diagnose_mbpmd(run, inst, sol).all_ok();
  } else {
    MpmdRunResult run = run_mpmd_tree(inst, tree, false, paranoid);
    row.alg_connection_tree = run.schedule.connection_cost;
    row.alg_connection = detail::original_connection(inst, run.schedule.pairs);
    row.alg_delay = run.schedule.delay_cost;
    row.height = run.tree.height();
    row.invariants_ok = diagnose_mpmd(run, inst, sol).all_ok();
  }
  if (row.alg_connection > row.alg_connection_tree + 1e-6)
    throw InvariantViolation("original-metric connection above the tree connection");
  row.alg_cost = row.alg_connection + row.alg_delay;
  row.degenerate = row.sol_cost <= kDistTol;
  row.ratio = row.degenerate ? 0.0 : row.alg_cost / row.sol_cost;
  return row;
}

inline Report run_experiment(const ExperimentConfig& cfg, bool paranoid = true) {
  cfg.validate();
  Report rep;
  rep.config = cfg;
  rep.hash = config_hash(cfg);
  for (int t = 0; t < cfg.trials; ++t) rep.trials.push_back(run_trial(cfg, t, paranoid));

  double sum = 0.0, sumsq = 0.0;
  int counted = 0;
  for (const TrialRow& t : rep.trials) {
    rep.degenerate_trials += t.degenerate;
    rep.failed_invariants += !t.invariants_ok;
    if (t.degenerate) continue;
    sum += t.ratio;
    sumsq += t.ratio * t.ratio;
    rep.max_ratio = std::max(rep.max_ratio, t.ratio);
    ++counted;
  }
  if (counted > 0) {
    rep.mean_ratio = sum / counted;
    const double var = std::max(0.0, sumsq / counted - rep.mean_ratio * rep.mean_ratio);
    rep.stddev_ratio = std::sqrt(var);
  }
  rep.all_ok = rep.failed_invariants == 0;
  return rep;
}

inline void emit_report(const Report& r, const std::string& format, const std::string& path) {
  if (r.trials.empty()) throw std::invalid_argument("emit_report: no trials");
  if (format == "json") {
    save_json_file(path, report_to_json(r));
    return;
  }
  if (format != "csv") throw std::invalid_argument("emit_report: format must be json or csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "trial,seed,alg_cost,alg_connection,alg_connection_tree,alg_delay,"
         "sol_cost,sol_connection,sol_delay,sol_kind,ratio,degenerate,invariants_ok,height\n";
  out.precision(17);
  for (const TrialRow& t : r.trials) {
    out << t.trial << ',' << t.seed << ',' << t.alg_cost << ',' << t.alg_connection << ','
        << t.alg_connection_tree << ',' << t.alg_delay << ',' << t.sol_cost << ','
        << t.sol_connection << ',' << t.sol_delay << ',' << t.sol_kind << ',' << t.ratio << ','
        << (t.degenerate ? 1 : 0) << ',' << (t.invariants_ok ? 1 : 0) << ',' << t.height << '\n';
  }
  out << "aggregate,mean_ratio," << r.mean_ratio << '\n';
  out << "aggregate,max_ratio," << r.max_ratio << '\n';
  out << "aggregate,stddev_ratio," << r.stddev_ratio << '\n';
  out << "aggregate,degenerate_trials," << r.degenerate_trials << '\n';
  out << "aggregate,failed_invariants," << r.failed_invariants << '\n';
  if (!out) throw std::runtime_error("failed writing report: " + path);
}

struct RatioTrendRow {
  int n = 0;
  int r = 0;
  double denominator = 0.0;  // mean a-priori bound on the adversary's cost
  double mean_alg_cost = 0.0;
  double mean_ratio = 0.0;
};

struct RatioTrend {
  std::vector<RatioTrendRow> rows;
  bool nondecreasing = true;
};

/// Mean competitive ratio of the tree algorithm on the phased line family,
/// per n, against the construction's a-priori cost bound. The same seeds are
/// reused across the n values so the phase randomness cancels in the trend.
inline RatioTrend ratio_trend(Algorithm alg, const std::vector<int>& ns, int seeds,
                              std::uint64_t base_seed, bool paranoid = true) {
  if (seeds < 1) throw std::invalid_argument("ratio_trend: seeds must be >= 1");
  RatioTrend out;
  for (int n : ns) {
    RatioTrendRow row;
    row.n = n;
    double sum_alg = 0.0, sum_ratio = 0.0, sum_denom = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t cs = child_seed(base_seed, static_cast<std::uint64_t>(s));
      const bool bipartite = alg == Algorithm::MbpmdTree;
      LBInstance lb = bipartite ? gen_mbpmd_lb(n, cs) : gen_mpmd_lb(n, cs);
      row.r = lb.params.r;
      // the adversary schedule also re-asserts its own bound
      const Schedule adv =
          bipartite ? adversary_solution_mbpmd(lb.instance) : adversary_solution_mpmd(lb);
      const RootedTree tree = path_tree_for_line(n);
      double alg_cost = 0.0;
      if (bipartite) {
        MbpmdRunResult run = run_mbpmd_tree(lb.instance, tree, false, paranoid);
        alg_cost = detail::original_connection(lb.instance, run.schedule.pairs) +
                   run.schedule.delay_cost;
      } else {
        MpmdRunResult run = run_mpmd_tree(lb.instance, tree, false, paranoid);
        alg_cost = detail::original_connection(lb.instance, run.schedule.pairs) +
                   run.schedule.delay_cost;
      }
      if (adv.total() > lb.params.opt_upper_bound + kDistTol)
        throw InvariantViolation("adversary above its a-priori bound");
      sum_alg += alg_cost;
      sum_ratio += alg_cost / lb.params.opt_upper_bound;
      sum_denom += lb.params.opt_upper_bound;
    }
    row.mean_alg_cost = sum_alg / seeds;
    row.mean_ratio = sum_ratio / seeds;
    row.denominator = sum_denom / seeds;
    out.rows.push_back(row);
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (out.rows[i].mean_ratio + 1e-12 < out.rows[i - 1].mean_ratio) out.nondecreasing = false;
  return out;
}

inline json ratio_trend_to_json(const RatioTrend& t) {
  json j;
  json rows = json::array();
  for (const RatioTrendRow& r : t.rows) {
    json row;
    row["n"] = r.n;
    row["r"] = r.r;
    row["denominator"] = r.denominator;
    row["mean_alg_cost"] = r.mean_alg_cost;
    row["mean_ratio"] = r.mean_ratio;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["nondecreasing"] = t.nondecreasing;
  return j;
}

}  // namespace mdlab

#endif
