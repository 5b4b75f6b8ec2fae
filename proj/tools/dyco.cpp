// Copyright 2026 The dyco Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "dyco/error.hpp"
#include "dyco/graph.hpp"
#include "dyco/gwlab.hpp"
#include "dyco/oracle.hpp"
#include "dyco/report.hpp"
#include "dyco/solver.hpp"

namespace fs = std::filesystem;
using namespace dyco;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitInvariant = 4;

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

graph::Point to_point(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) throw InvalidArgument(std::string(flag) + " expects x,y");
  return {v[0], v[1]};
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  return out;
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
  std::string problem = "maxcut";
  std::string input;
  std::string output = "instance.json";
  int snapshots = 0;
  double fraction = 0.1;
  std::vector<double> start, end;
  bool no_rounding = false;
  std::vector<long long> random;  // n,m
  std::uint64_t seed = 0;
};

void setup_build(CLI::App& app, BuildArgs& a) {
  app.add_option("--problem", a.problem, "Problem: maxcut, mis or tsp")
      ->check(CLI::IsMember({"maxcut", "mis", "tsp"}));
  app.add_option("--input", a.input, "Temporal edge list (maxcut/mis) or TSPLIB file (tsp)");
  app.add_option("--random", a.random, "Synthetic Erdos-Renyi edge list instead of --input: nodes,edges")
      ->delimiter(',')
      ->expected(2);
  app.add_option("--seed", a.seed, "Seed for --random");
  app.add_option("-o,--output", a.output, "Instance JSON to write")->capture_default_str();
  app.add_option("--snapshots", a.snapshots, "Number of snapshots T (default 10, or 5 for tsp)");
  app.add_option("--fraction", a.fraction, "Edge fraction added per snapshot")->capture_default_str();
  app.add_option("--start", a.start, "Moving-node start x,y (tsp; default lower-left corner)")->delimiter(',');
  app.add_option("--end", a.end, "Moving-node end x,y (tsp; default upper-right corner)")->delimiter(',');
  app.add_flag("--no-rounding", a.no_rounding, "Continuous EUC_2D distances instead of TSPLIB nint");
}

int run_build(const BuildArgs& a) {
  const Problem problem = parse_problem(a.problem);
  graph::DynamicInstance inst;
  if (problem == Problem::Tsp) {
    if (a.input.empty()) throw InvalidArgument("tsp needs --input <file.tsp>");
    const auto nodes = graph::parse_tsplib_file(a.input);
    graph::Point lo{nodes.coords[0]}, hi{nodes.coords[0]};
    for (const auto& p : nodes.coords) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const auto start = a.start.empty() ? lo : to_point(a.start, "--start");
    const auto end = a.end.empty() ? hi : to_point(a.end, "--end");
    graph::DistanceOptions opts;
    opts.round_euclidean = !a.no_rounding;
    inst = graph::build_moving_node_instance(nodes, start, end, a.snapshots ? a.snapshots : 5, opts);
  } else {
    graph::TemporalEdgeList edges;
    if (!a.random.empty()) {
      edges = graph::random_temporal_graph(static_cast<int>(a.random[0]), static_cast<std::size_t>(a.random[1]),
                                           a.seed);
    } else if (!a.input.empty()) {
      edges = graph::ingest_temporal_edges_file(a.input);
    } else {
      throw InvalidArgument("need --input or --random");
    }
    const int T = a.snapshots ? a.snapshots : 10;
    inst = problem == Problem::Mis ? graph::build_deletion_snapshots(edges, T, a.fraction, problem)
                                   : graph::build_growth_snapshots(edges, T, a.fraction, problem);
  }
  graph::save_instance(inst, a.output);
  std::cout << "snapshot nodes edges\n";
  for (std::size_t t = 0; t < inst.size(); ++t)
    std::cout << t + 1 << ' ' << inst.snapshots[t].node_count << ' ' << inst.snapshots[t].edge_count() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleArgs {
  std::string instance;
  std::string cache = "oracle.json";
  std::uint64_t seed = 0;
  bool include_first = false;
};

void setup_oracle(CLI::App& app, OracleArgs& a) {
  app.add_option("--instance", a.instance, "Instance JSON")->required();
  app.add_option("--cache", a.cache, "Oracle cache JSON, read if present and updated")->capture_default_str();
  app.add_option("--seed", a.seed, "Seed for the MaxCut reference search on large components");
  app.add_flag("--include-first", a.include_first, "Also solve snapshot 1");
}

oracle::Cache fetch_optima(const graph::DynamicInstance& inst, const std::string& path, bool include_first,
                           std::uint64_t seed, std::size_t* computed = nullptr) {
  oracle::Cache cache;
  const auto hash = oracle::instance_hash(inst);
  if (!path.empty() && fs::exists(path)) {
    cache = oracle::load_cache(path);
    if (cache.instance_hash != hash) {
      std::cerr << "warning: oracle cache " << path << " belongs to another instance, recomputing\n";
      cache = {};
    }
  }
  const std::size_t n = oracle::fill_cache(cache, inst, include_first, seed);
  if (computed) *computed = n;
  if (!path.empty() && n > 0) oracle::save_cache(cache, path);
  return cache;
}

int run_oracle(const OracleArgs& a) {
  const auto inst = graph::load_instance(a.instance);
  std::size_t computed = 0;
  const auto start = std::chrono::steady_clock::now();
  const auto cache = fetch_optima(inst, a.cache, a.include_first, a.seed, &computed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "snapshot optimum exact\n";
  for (const auto& [t, s] : cache.snapshots) std::cout << t << ' ' << s.value << ' ' << (s.exact ? "yes" : "no") << '\n';
  std::cout << "computed " << computed << " snapshot(s) in " << secs << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string instance;
  std::string config;
  std::string output = "solve-out";
  std::string strategy = "sp";
  std::string sp_subset = "full";
  std::string conv = "gcn";
  std::string repair = "max-violations";
  std::vector<int> budgets;
  solver::SolveSchedule sched;
  bool reset_adam = false;
  bool apr = false;
  bool no_relaxed = false;
  std::string oracle_cache;
  int jobs = default_jobs();
};

void setup_solve(CLI::App& app, SolveArgs& a) {
  auto& s = a.sched;
  app.add_option("--instance", a.instance, "Instance JSON")->required();
  app.add_option("--config", a.config, "Schedule JSON; explicit flags override it");
  app.add_option("-o,--output", a.output, "Output directory for trace.json and budgets.csv")->capture_default_str();
  app.add_option("--strategy", a.strategy, "static, warm or sp")
      ->check(CLI::IsMember({"static", "warm", "sp"}))
      ->capture_default_str();
  app.add_option("--sp-subset", a.sp_subset, "Shrink-and-perturb subset: emb, gnn or full")
      ->check(CLI::IsMember({"emb", "gnn", "full"}))
      ->capture_default_str();
  app.add_option("--epoch-max", s.epoch_max, "Epochs on snapshot 1")->capture_default_str();
  app.add_option("--epoch-ws", s.epoch_ws, "Epochs on each later snapshot")->capture_default_str();
  app.add_option("--budgets", a.budgets, "Comma-separated epoch budgets to evaluate (ascending, <= epoch-ws)")
      ->delimiter(',');
  app.add_option("--lr", s.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--lambda-shrink", s.shrink, "Shrink coefficient")->capture_default_str();
  app.add_option("--lambda-perturb", s.perturb, "Perturb coefficient")->capture_default_str();
  app.add_option("--sigma", s.sigma, "Standard deviation of the perturbation noise")->capture_default_str();
  app.add_option("--seed", s.seed, "Base seed")->capture_default_str();
  app.add_option("--reps", s.repetitions, "Repetitions (medians and means reported)")->capture_default_str();
  app.add_option("--jobs", a.jobs, "Worker threads for repetitions (default: logical cores)");
  app.add_option("--conv", a.conv, "Convolution: gcn or sage")
      ->check(CLI::IsMember({"gcn", "sage"}))
      ->capture_default_str();
  app.add_option("--d-emb", s.d_emb, "Embedding width")->capture_default_str();
  app.add_option("--d-hidden", s.d_hidden, "Hidden width")->capture_default_str();
  app.add_option("--penalty", s.penalty, "QUBO penalty (default: 2 for mis, 2 max distance for tsp)");
  app.add_option("--threshold", s.threshold, "Rounding threshold")->capture_default_str();
  app.add_option("--repair", a.repair, "MIS repair rule: max-violations, max-degree or random")
      ->check(CLI::IsMember({"max-violations", "max-degree", "random"}))
      ->capture_default_str();
  app.add_option("--beam-width", s.beam_width, "TSP decoding: 1 greedy, >1 beam search")->capture_default_str();
  app.add_option("--checkpoint-every", s.checkpoint_every, "TSP best-checkpoint interval in epochs (0 = off)")
      ->capture_default_str();
  app.add_flag("--keep-adam-state", s.keep_adam_state, "Keep Adam moments of perturbed tensors at SP boundaries");
  app.add_flag("--reset-adam", a.reset_adam, "Reset all Adam moments between snapshots");
  app.add_flag("--apr", a.apr, "Compute optima and report approximation ratios");
  app.add_option("--oracle-cache", a.oracle_cache, "Oracle cache JSON used with --apr");
  app.add_flag("--no-relaxed", a.no_relaxed, "Omit relaxed outputs from trace.json");
}

int run_solve(CLI::App& app, SolveArgs& a) {
  solver::SolveSchedule sched;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw InvalidArgument("cannot open '" + a.config + "'");
    try {
      sched = solver::schedule_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(a.config + ": " + e.what());
    }
  }
  auto given = [&](const char* flag) { return a.config.empty() || app.count(flag) > 0; };
  const auto& s = a.sched;
  if (given("--strategy")) sched.strategy = solver::parse_strategy(a.strategy);
  if (given("--sp-subset")) sched.sp_subset = nn::parse_subset(a.sp_subset);
  if (given("--conv")) sched.conv = nn::parse_conv(a.conv);
  if (given("--repair")) sched.repair = decode::parse_repair_rule(a.repair);
  if (given("--epoch-max")) sched.epoch_max = s.epoch_max;
  if (given("--epoch-ws")) sched.epoch_ws = s.epoch_ws;
  if (given("--lr")) sched.lr = s.lr;
  if (given("--lambda-shrink")) sched.shrink = s.shrink;
  if (given("--lambda-perturb")) sched.perturb = s.perturb;
  if (given("--sigma")) sched.sigma = s.sigma;
  if (given("--seed")) sched.seed = s.seed;
  if (given("--reps")) sched.repetitions = s.repetitions;
  if (given("--d-emb")) sched.d_emb = s.d_emb;
  if (given("--d-hidden")) sched.d_hidden = s.d_hidden;
  if (given("--penalty")) sched.penalty = s.penalty;
  if (given("--threshold")) sched.threshold = s.threshold;
  if (given("--beam-width")) sched.beam_width = s.beam_width;
  if (given("--checkpoint-every")) sched.checkpoint_every = s.checkpoint_every;
  if (app.count("--keep-adam-state")) sched.keep_adam_state = true;
  if (a.reset_adam) sched.carry_adam_state = false;
  sched.validate();
  if (a.jobs < 1) throw InvalidArgument("--jobs must be >= 1");

  const auto inst = graph::load_instance(a.instance);
  std::vector<double> optima;
  if (a.apr) {
    const auto cache = fetch_optima(inst, a.oracle_cache, inst.size() == 1, sched.seed);
    optima = report::optima_from_cache(cache, oracle::instance_hash(inst), inst.size(), inst.size() > 1 ? 2 : 1);
  }
  const auto prep = solver::prepare(inst, sched.conv, sched.penalty);
  const auto traces = solver::run_repetitions(prep, sched, a.budgets, a.jobs);
  const auto doc = report::solve_document(traces, sched, a.budgets, inst, !a.no_relaxed);

  const fs::path dir(a.output);
  fs::create_directories(dir);
  open_output(dir / "trace.json") << doc.dump() << '\n';
  const auto runs = report::runs_from_document(doc);
  {
    auto out = open_output(dir / "budgets.csv");
    report::write_budget_csv(out, runs, a.apr ? &optima : nullptr);
  }
  std::cout << "wrote " << (dir / "trace.json").string() << " and " << (dir / "budgets.csv").string() << '\n';
  if (a.apr) {
    std::cout << "budget mean_apr median_apr\n";
    for (std::size_t b = 0; b < runs.budgets.size(); ++b) {
      const auto aprs = report::apr_by_repetition(runs, optima, b);
      std::cout << runs.budgets[b] << ' ' << report::mean(aprs) << ' ' << report::median(aprs) << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gwlab

struct GwArgs {
  std::string mode = "perturb";
  int cycle = 0;
  int complete = 0;
  std::string instance;
  int snapshot = 1;
  std::string x0 = "ones";
  std::vector<double> lambdas = {0.0, 0.1, 0.3, 0.5, 1.0};
  int perturbations = 200;
  int rounding_trials = 100;
  int sdp_iters = 20000;
  std::uint64_t seed = 0;
  std::string output;
};

void setup_gwlab(CLI::App& app, GwArgs& a) {
  app.add_option("--mode", a.mode, "perturb (lambda sweep), warmstart (sweep with SDP re-solve) or round")
      ->check(CLI::IsMember({"perturb", "warmstart", "round"}))
      ->capture_default_str();
  app.add_option("--cycle", a.cycle, "Use the cycle graph C_n");
  app.add_option("--complete", a.complete, "Use the complete graph K_n");
  app.add_option("--instance", a.instance, "Use a snapshot of an instance JSON");
  app.add_option("--snapshot", a.snapshot, "Snapshot index for --instance (1-based)")->capture_default_str();
  app.add_option("--x0", a.x0, "Starting point: ones, identity or sdp")
      ->check(CLI::IsMember({"ones", "identity", "sdp"}))
      ->capture_default_str();
  app.add_option("--lambdas", a.lambdas, "Comma-separated perturbation scales")->delimiter(',');
  app.add_option("--perturbations", a.perturbations, "Perturbation draws per lambda")->capture_default_str();
  app.add_option("--rounding-trials", a.rounding_trials, "Hyperplane roundings per draw")->capture_default_str();
  app.add_option("--sdp-iters", a.sdp_iters, "Iteration cap of the SDP ascent")->capture_default_str();
  app.add_option("--seed", a.seed, "Seed")->capture_default_str();
  app.add_option("-o,--output", a.output, "CSV path (default: stdout)");
}

int run_gwlab(const GwArgs& a) {
  graph::GraphSnapshot g;
  if ((a.cycle > 0) + (a.complete > 0) + !a.instance.empty() != 1)
    throw InvalidArgument("pick exactly one of --cycle, --complete, --instance");
  if (a.cycle > 0) {
    if (a.cycle < 3) throw InvalidArgument("--cycle needs n >= 3");
    std::vector<graph::Edge> e;
    for (int i = 0; i < a.cycle; ++i) e.push_back({i, (i + 1) % a.cycle});
    g = graph::make_snapshot(a.cycle, e);
  } else if (a.complete > 0) {
    std::vector<graph::Edge> e;
    for (int i = 0; i < a.complete; ++i)
      for (int j = i + 1; j < a.complete; ++j) e.push_back({i, j});
    g = graph::make_snapshot(a.complete, e);
  } else {
    const auto inst = graph::load_instance(a.instance);
    if (a.snapshot < 1 || a.snapshot > static_cast<int>(inst.size())) throw InvalidArgument("--snapshot out of range");
    g = inst.snapshots[a.snapshot - 1];
  }
  const int n = g.node_count;
  gwlab::SdpOptions sdp;
  sdp.iters = a.sdp_iters;
  sdp.seed = a.seed;

  if (a.mode == "round") {
    const auto res = gwlab::solve_gw_sdp(g, sdp);
    const double opt = oracle::exact_maxcut(g).value;
    const auto rounded = gwlab::gw_round(g, res.x, a.rounding_trials, a.seed);
    std::cout << "sdp_objective " << res.objective << "\ndual_bound " << gwlab::sdp_dual_bound(g, res.x)
              << "\nconverged " << (res.converged ? "yes" : "no") << "\noptimal_cut " << opt << "\nmean_cut "
              << rounded.mean_cut() << "\nbest_cut " << rounded.best_cut << "\nratio "
              << rounded.mean_cut() / opt << '\n';
    return 0;
  }

  gwlab::Matrix x0;
  if (a.x0 == "ones") {
    x0 = gwlab::Matrix::Ones(n, n);
  } else if (a.x0 == "identity") {
    x0 = gwlab::Matrix::Identity(n, n);
  } else {
    x0 = gwlab::solve_gw_sdp(g, sdp).x;
  }
  gwlab::ExperimentConfig cfg;
  cfg.lambdas = a.lambdas;
  cfg.perturbations = a.perturbations;
  cfg.rounding_trials = a.rounding_trials;
  cfg.seed = a.seed;
  cfg.sdp = sdp;
  const auto rows = a.mode == "perturb" ? gwlab::perturbation_experiment(g, x0, cfg)
                                        : gwlab::warmstart_sdp_experiment(g, x0, cfg);
  if (a.output.empty()) {
    gwlab::write_experiment_csv(std::cout, rows);
  } else {
    auto out = open_output(a.output);
    gwlab::write_experiment_csv(out, rows);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> traces;
  std::string cache;
  std::string output = "report";
};

void setup_report(CLI::App& app, ReportArgs& a) {
  app.add_option("--trace", a.traces, "trace.json from dyco solve (repeatable, one per method)")->required();
  app.add_option("--oracle-cache", a.cache, "Oracle cache JSON for the instance")->required();
  app.add_option("-o,--output", a.output, "Output directory")->capture_default_str();
}

int run_report(const ReportArgs& a) {
  std::vector<report::MethodRuns> runs;
  for (const auto& path : a.traces) runs.push_back(report::load_runs(path));
  const auto cache = oracle::load_cache(a.cache);
  const auto table = report::build_table(runs, cache);
  const fs::path dir(a.output);
  fs::create_directories(dir);
  {
    auto out = open_output(dir / "table_mean.csv");
    report::write_table_csv(out, table, report::Statistic::Mean);
  }
  {
    auto out = open_output(dir / "table_median.csv");
    report::write_table_csv(out, table, report::Statistic::Median);
  }
  {
    auto out = open_output(dir / "snapshots.csv");
    report::write_snapshot_csv(out, runs, cache);
  }
  std::cout << "mean ApR\n";
  report::write_table_csv(std::cout, table, report::Statistic::Mean);
  std::cout << "median ApR\n";
  report::write_table_csv(std::cout, table, report::Statistic::Median);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyco: dynamic combinatorial optimization with instance-specific GNNs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dyco 0.1.0");

  BuildArgs build_args;
  OracleArgs oracle_args;
  SolveArgs solve_args;
  GwArgs gw_args;
  ReportArgs report_args;
  auto* build = app.add_subcommand("build", "Build a snapshot sequence from an edge list or TSPLIB file");
  auto* oracle_cmd = app.add_subcommand("oracle", "Compute and cache per-snapshot optima");
  auto* solve = app.add_subcommand("solve", "Run a solving strategy and write its trace");
  auto* gw = app.add_subcommand("gwlab", "Goemans-Williamson rounding and perturbation experiments");
  auto* rep = app.add_subcommand("report", "Merge traces and oracle caches into ApR tables");
  setup_build(*build, build_args);
  setup_oracle(*oracle_cmd, oracle_args);
  setup_solve(*solve, solve_args);
  setup_gwlab(*gw, gw_args);
  setup_report(*rep, report_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*build) return run_build(build_args);
    if (*oracle_cmd) return run_oracle(oracle_args);
    if (*solve) return run_solve(*solve, solve_args);
    if (*gw) return run_gwlab(gw_args);
    if (*rep) return run_report(report_args);
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitUsage;
}
