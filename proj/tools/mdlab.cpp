// mdlab: generate, embed, solve, and benchmark matching-with-delays instances.
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdlab/harness.hpp"
#include "mdlab/trace.hpp"

namespace {

using nlohmann::json;
using namespace mdlab;

std::string out_path(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos) return name;
  const char* dir = std::getenv("MDLAB_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return name;
  std::string d(dir);
  if (d.back() != '/') d += '/';
  return d + name;
}

FiniteMetric load_metric(const std::string& path) {
  const json j = load_json_file(path);
  if (j.contains("requests")) return instance_from_json(j).instance.metric;
  json wrapper;
  wrapper["dist"] = j.at("dist");
  if (j.contains("n")) wrapper["n"] = j.at("n");
  else if (j.at("dist").is_object()) wrapper["n"] = j.at("dist").at("line");
  else wrapper["n"] = j.at("dist").size();
  wrapper["requests"] = json::array();
  return instance_from_json(wrapper).instance.metric;
}

json params_to_json(const LBParams& p) {
  json j;
  j["n"] = p.n;
  j["r"] = p.r;
  j["rho"] = p.rho;
  j["a"] = p.a;
  j["sign_integral"] = p.sign_integral;
  j["signs_exhaustive"] = p.signs_exhaustive;
  j["opt_upper_bound"] = p.opt_upper_bound;
  json phases = json::array();
  for (const LBPhase& ph : p.phases) {
    json row;
    row["count"] = ph.count;
    row["wait"] = ph.wait;
    row["y"] = ph.y;
    row["spacing"] = ph.spacing;
    row["stride"] = ph.stride;
    row["arrival"] = ph.arrival;
    row["sign"] = ph.sign;
    row["first_id"] = ph.first_id;
    phases.push_back(std::move(row));
  }
  j["phases"] = std::move(phases);
  return j;
}

std::string sidecar_path(const std::string& inst_path) {
  const std::string suffix = ".json";
  if (inst_path.size() > suffix.size() &&
      inst_path.compare(inst_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return inst_path.substr(0, inst_path.size() - suffix.size()) + ".params.json";
  return inst_path + ".params.json";
}

RootedTree tree_for(const Instance& inst, const std::string& tree_file,
                    const std::string& embed_mode, std::uint64_t embed_seed) {
  if (!tree_file.empty()) return tree_from_json(load_json_file(tree_file));
  if (embed_mode == "none") {
    if (inst.metric.is_line()) return path_tree_for_line(inst.metric.size());
    throw std::invalid_argument("metric is not a tree: pass --tree or --embed-mode");
  }
  const EmbedMode mode = embed_mode == "frt-only" ? EmbedMode::FrtOnly : EmbedMode::FrtReduce;
  return sample_embedding(inst.metric, embed_seed, mode).tree;
}

int cmd_gen(const std::string& family, int n, std::uint64_t seed, const std::string& out,
            const std::string& sign_mode, int samples) {
  LBInstance lb;
  if (family == "mpmd-lb") {
    lb = gen_mpmd_lb(n, seed);
  } else if (family == "mbpmd-lb") {
    SignMode m = SignMode::Auto;
    if (sign_mode == "exhaustive") m = SignMode::Exhaustive;
    else if (sign_mode == "sampled") m = SignMode::Sampled;
    lb = gen_mbpmd_lb(n, seed, m, samples);
  } else {
    throw std::invalid_argument("gen: family must be mpmd-lb or mbpmd-lb");
  }
  const std::string inst_path = out_path(out);
  save_json_file(inst_path, instance_to_json(lb.instance));
  save_json_file(sidecar_path(inst_path), params_to_json(lb.params));
  std::cout << "wrote " << inst_path << " (" << lb.instance.m() << " requests, r=" << lb.params.r
            << ", bound=" << lb.params.opt_upper_bound << ")\n";
  return 0;
}

int cmd_embed(const std::string& metric_file, const std::string& mode_name, std::uint64_t seed,
              const std::string& out) {
  const FiniteMetric metric = load_metric(metric_file);
  const EmbedMode mode = mode_name == "frt-only" ? EmbedMode::FrtOnly : EmbedMode::FrtReduce;
  const EmbeddingSample s = sample_embedding(metric, seed, mode);
  const std::string path = out_path(out);
  json j = tree_to_json(s.tree);
  j["beta"] = s.beta;
  j["seed"] = s.seed;
  save_json_file(path, j);
  std::cout << "wrote " << path << " (" << s.tree.vertex_count() << " vertices, height "
            << s.tree.height() << ")\n";
  return 0;
}

int cmd_distortion(const std::string& metric_file, const std::string& mode_name, int trials,
                   std::uint64_t seed, const std::string& out) {
  const FiniteMetric metric = load_metric(metric_file);
  const EmbedMode mode = mode_name == "frt-only" ? EmbedMode::FrtOnly : EmbedMode::FrtReduce;
  const DistortionReport rep = measure_distortion(metric, mode, trials, seed);
  const std::string path = out_path(out);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(17);
  f << "x,y,mean_stretch\n";
  for (const auto& row : rep.rows) f << row.x << ',' << row.y << ',' << row.mean_stretch << '\n';
  f << "aggregate,max_mean_stretch," << rep.max_mean_stretch << '\n';
  if (!f) throw std::runtime_error("failed writing " + path);
  std::cout << "wrote " << path << " (max mean stretch " << rep.max_mean_stretch << ")\n";
  return 0;
}

int cmd_run(const std::string& alg, const std::string& instance_file,
            const std::string& tree_file, const std::string& embed_mode, std::uint64_t embed_seed,
            const std::string& trace_file, const std::string& out) {
  const Instance inst = instance_from_json(load_json_file(instance_file)).instance;
  const RootedTree tree = tree_for(inst, tree_file, embed_mode, embed_seed);
  const bool want_trace = !trace_file.empty();
  Schedule sched;
  std::vector<TraceEvent> trace;
  if (alg == "mpmd-tree") {
    MpmdRunResult run = run_mpmd_tree(inst, tree, want_trace, true);
    sched = std::move(run.schedule);
    trace = std::move(run.trace);
  } else if (alg == "mbpmd-tree") {
    MbpmdRunResult run = run_mbpmd_tree(inst, tree, want_trace, true);
    sched = std::move(run.schedule);
    trace = std::move(run.trace);
  } else {
    throw std::invalid_argument("run: --alg must be mpmd-tree or mbpmd-tree");
  }
  if (want_trace) write_trace_jsonl(trace, out_path(trace_file));
  if (!out.empty()) save_json_file(out_path(out), schedule_to_json(sched));
  std::cout << "connection=" << sched.connection_cost << " delay=" << sched.delay_cost
            << " total=" << sched.total() << "\n";
  return 0;
}

int cmd_opt(const std::string& instance_file, const std::string& solver, const std::string& out) {
  const Instance inst = instance_from_json(load_json_file(instance_file)).instance;
  Schedule sol;
  if (solver == "subsets") sol = exact_opt_subsets(inst);
  else if (solver == "assignment") sol = bipartite_opt_assignment(inst);
  else if (solver == "greedy") sol = greedy_heuristic(inst);
  else throw std::invalid_argument("opt: --solver must be subsets, assignment, or greedy");
  if (!out.empty()) save_json_file(out_path(out), schedule_to_json(sol));
  std::cout << "connection=" << sol.connection_cost << " delay=" << sol.delay_cost
            << " total=" << sol.total() << "\n";
  return 0;
}

int cmd_bench(const std::string& config_file, ExperimentConfig overrides,
              const std::vector<std::string>& set_flags, const std::string& format,
              const std::string& trend_ns, int trend_seeds) {
  ExperimentConfig cfg;
  if (!config_file.empty()) cfg = load_config_file(config_file);
  auto touched = [&](const std::string& k) {
    return std::find(set_flags.begin(), set_flags.end(), k) != set_flags.end();
  };
  if (touched("family")) cfg.family = overrides.family;
  if (touched("alg")) cfg.algorithm = overrides.algorithm;
  if (touched("embed")) cfg.embed = overrides.embed;
  if (touched("n")) cfg.n = overrides.n;
  if (touched("m")) cfg.m = overrides.m;
  if (touched("trials")) cfg.trials = overrides.trials;
  if (touched("seed")) cfg.seed = overrides.seed;
  if (touched("solver")) cfg.solver = overrides.solver;
  if (touched("instance")) cfg.instance_file = overrides.instance_file;
  if (touched("out")) cfg.out = overrides.out;

  if (!trend_ns.empty()) {
    std::vector<int> ns;
    std::stringstream ss(trend_ns);
    std::string tok;
    while (std::getline(ss, tok, ',')) ns.push_back(std::stoi(tok));
    const RatioTrend t = ratio_trend(cfg.algorithm, ns, trend_seeds, cfg.seed);
    if (!cfg.out.empty()) save_json_file(out_path(cfg.out), ratio_trend_to_json(t));
    for (const RatioTrendRow& row : t.rows)
      std::cout << "n=" << row.n << " r=" << row.r << " mean_ratio=" << row.mean_ratio << "\n";
    std::cout << (t.nondecreasing ? "trend: nondecreasing\n" : "trend: NOT nondecreasing\n");
    return t.nondecreasing ? 0 : 2;
  }

  const Report rep = run_experiment(cfg);
  if (!cfg.out.empty()) emit_report(rep, format, out_path(cfg.out));
  std::cout << "trials=" << rep.trials.size() << " mean_ratio=" << rep.mean_ratio
            << " max_ratio=" << rep.max_ratio << " degenerate=" << rep.degenerate_trials
            << " failed_invariants=" << rep.failed_invariants << "\n";
  return rep.all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matching-with-delays laboratory"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate an adversarial line instance");
  std::string gen_family, gen_out = "inst.json", gen_sign_mode = "auto";
  int gen_n = 256, gen_samples = 256;
  std::uint64_t gen_seed = 0;
  gen->add_option("--family", gen_family, "mpmd-lb | mbpmd-lb")->required();
  gen->add_option("--n", gen_n, "line points (even)");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "instance output path");
  gen->add_option("--sign-mode", gen_sign_mode, "auto | exhaustive | sampled");
  gen->add_option("--samples", gen_samples, "sampled sign tuples");

  // embed
  auto* emb = app.add_subcommand("embed", "sample a tree embedding of a metric");
  std::string emb_metric, emb_mode = "frt+reduce", emb_out = "tree.json";
  std::uint64_t emb_seed = 0;
  emb->add_option("--metric", emb_metric, "metric or instance JSON")->required();
  emb->add_option("--mode", emb_mode, "frt-only | frt+reduce");
  emb->add_option("--seed", emb_seed, "rng seed");
  emb->add_option("--out", emb_out, "tree output path");

  // distortion
  auto* dis = app.add_subcommand("distortion", "measure empirical embedding stretch");
  std::string dis_metric, dis_mode = "frt+reduce", dis_out = "distortion.csv";
  int dis_trials = 32;
  std::uint64_t dis_seed = 0;
  dis->add_option("--metric", dis_metric, "metric or instance JSON")->required();
  dis->add_option("--mode", dis_mode, "frt-only | frt+reduce");
  dis->add_option("--trials", dis_trials, "embedding samples");
  dis->add_option("--seed", dis_seed, "rng seed");
  dis->add_option("--out", dis_out, "CSV output path");

  // run
  auto* run = app.add_subcommand("run", "run an online algorithm on an instance");
  std::string run_alg, run_instance, run_tree, run_embed = "none", run_trace, run_out;
  std::uint64_t run_embed_seed = 0;
  run->add_option("--alg", run_alg, "mpmd-tree | mbpmd-tree")->required();
  run->add_option("--instance", run_instance, "instance JSON")->required();
  run->add_option("--tree", run_tree, "tree JSON (skips embedding)");
  run->add_option("--embed-mode", run_embed, "none | frt-only | frt+reduce");
  run->add_option("--embed-seed", run_embed_seed, "embedding seed");
  run->add_option("--trace", run_trace, "JSONL event trace output");
  run->add_option("--out", run_out, "schedule output path");

  // opt
  auto* opt = app.add_subcommand("opt", "solve an instance offline");
  std::string opt_instance, opt_solver = "subsets", opt_out;
  opt->add_option("--instance", opt_instance, "instance JSON")->required();
  opt->add_option("--solver", opt_solver, "subsets | assignment | greedy");
  opt->add_option("--out", opt_out, "schedule output path");

  // bench
  auto* ben = app.add_subcommand("bench", "run a benchmark experiment");
  std::string ben_config, ben_format = "json", ben_family, ben_alg, ben_embed, ben_solver;
  std::string ben_instance, ben_out, ben_trend_ns;
  int ben_n = 0, ben_m = 0, ben_trials = 0, ben_trend_seeds = 50;
  std::uint64_t ben_seed = 0;
  ben->add_option("--config", ben_config, "JSON or TOML config file");
  ben->add_option("--family", ben_family, "line-lb | random-euclidean | random-tree | file");
  ben->add_option("--alg", ben_alg, "mpmd-tree | mbpmd-tree");
  ben->add_option("--embed", ben_embed, "none | frt-only | frt+reduce");
  ben->add_option("--n", ben_n, "metric points");
  ben->add_option("--m", ben_m, "request budget");
  ben->add_option("--trials", ben_trials, "trial count");
  ben->add_option("--seed", ben_seed, "base seed");
  ben->add_option("--solver", ben_solver, "auto | subsets | assignment | greedy | adversary");
  ben->add_option("--instance", ben_instance, "instance file (family 'file')");
  ben->add_option("--out", ben_out, "report output path");
  ben->add_option("--format", ben_format, "json | csv");
  ben->add_option("--trend-ns", ben_trend_ns, "comma list of n: ratio trend mode");
  ben->add_option("--trend-seeds", ben_trend_seeds, "seeds per n in trend mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_family, gen_n, gen_seed, gen_out, gen_sign_mode,
                                      gen_samples);
    if (emb->parsed()) return cmd_embed(emb_metric, emb_mode, emb_seed, emb_out);
    if (dis->parsed()) return cmd_distortion(dis_metric, dis_mode, dis_trials, dis_seed, dis_out);
    if (run->parsed())
      return cmd_run(run_alg, run_instance, run_tree, run_embed, run_embed_seed, run_trace,
                     run_out);
    if (opt->parsed()) return cmd_opt(opt_instance, opt_solver, opt_out);
    if (ben->parsed()) {
      ExperimentConfig ov;
      std::vector<std::string> touched;
      if (ben->count("--family")) { ov.family = mdlab::family_from_name(ben_family); touched.push_back("family"); }
      if (ben->count("--alg")) { ov.algorithm = mdlab::algorithm_from_name(ben_alg); touched.push_back("alg"); }
      if (ben->count("--embed")) { ov.embed = mdlab::embed_pipeline_from_name(ben_embed); touched.push_back("embed"); }
      if (ben->count("--n")) { ov.n = ben_n; touched.push_back("n"); }
      if (ben->count("--m")) { ov.m = ben_m; touched.push_back("m"); }
      if (ben->count("--trials")) { ov.trials = ben_trials; touched.push_back("trials"); }
      if (ben->count("--seed")) { ov.seed = ben_seed; touched.push_back("seed"); }
      if (ben->count("--solver")) { ov.solver = mdlab::solver_from_name(ben_solver); touched.push_back("solver"); }
      if (ben->count("--instance")) { ov.instance_file = ben_instance; touched.push_back("instance"); }
      if (ben->count("--out")) { ov.out = ben_out; touched.push_back("out"); }
      return cmd_bench(ben_config, ov, touched, ben_format, ben_trend_ns, ben_trend_seeds);
    }
  } catch (const mdlab::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
