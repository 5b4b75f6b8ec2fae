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
#include "dyco/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "dyco/error.hpp"
#include "dyco/oracle.hpp"

namespace dyco::solver {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Static:
      return "static";
    case Strategy::Warm:
      return "warm";
    case Strategy::Sp:
      return "sp";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "static") return Strategy::Static;
  if (s == "warm") return Strategy::Warm;
  if (s == "sp") return Strategy::Sp;
  throw InvalidArgument("unknown strategy '" + std::string(s) + "'");
}

void SolveSchedule::validate() const {
  if (epoch_max < 1 || epoch_ws < 1) throw InvalidArgument("epoch budgets must be >= 1");
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  if (d_emb < 1 || d_hidden < 1) throw InvalidArgument("model dimensions must be positive");
  if (beam_width < 1) throw InvalidArgument("beam width must be >= 1");
  if (checkpoint_every < 0) throw InvalidArgument("checkpoint interval must be >= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("rounding threshold must lie in (0, 1)");
  if (strategy == Strategy::Sp) {
    if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("shrink coefficient must lie in (0, 1)");
    if (!(perturb > 0.0 && perturb < 1.0)) throw InvalidArgument("perturb coefficient must lie in (0, 1)");
    if (!(sigma >= 0.0)) throw InvalidArgument("noise scale must be nonnegative");
  }
}

nlohmann::json to_json(const SolveSchedule& s) {
  return {{"strategy", to_string(s.strategy)},
          {"sp_subset", nn::to_string(s.sp_subset)},
          {"epoch_max", s.epoch_max},
          {"epoch_ws", s.epoch_ws},
          {"lr", s.lr},
          {"lambda_shrink", s.shrink},
          {"lambda_perturb", s.perturb},
          {"sigma", s.sigma},
          {"seed", s.seed},
          {"repetitions", s.repetitions},
          {"conv", nn::to_string(s.conv)},
          {"d_emb", s.d_emb},
          {"d_hidden", s.d_hidden},
          {"carry_adam_state", s.carry_adam_state},
          {"keep_adam_state", s.keep_adam_state},
          {"penalty", s.penalty},
          {"threshold", s.threshold},
          {"repair", decode::to_string(s.repair)},
          {"beam_width", s.beam_width},
          {"checkpoint_every", s.checkpoint_every}};
}

SolveSchedule schedule_from_json(const nlohmann::json& j) {
  SolveSchedule s;
  try {
    if (j.contains("strategy")) s.strategy = parse_strategy(j.at("strategy").get<std::string>());
    if (j.contains("sp_subset")) s.sp_subset = nn::parse_subset(j.at("sp_subset").get<std::string>());
    if (j.contains("conv")) s.conv = nn::parse_conv(j.at("conv").get<std::string>());
    if (j.contains("repair")) s.repair = decode::parse_repair_rule(j.at("repair").get<std::string>());
    s.epoch_max = j.value("epoch_max", s.epoch_max);
    s.epoch_ws = j.value("epoch_ws", s.epoch_ws);
    s.lr = j.value("lr", s.lr);
    s.shrink = j.value("lambda_shrink", s.shrink);
    s.perturb = j.value("lambda_perturb", s.perturb);
    s.sigma = j.value("sigma", s.sigma);
    s.seed = j.value("seed", s.seed);
    s.repetitions = j.value("repetitions", s.repetitions);
    s.d_emb = j.value("d_emb", s.d_emb);
    s.d_hidden = j.value("d_hidden", s.d_hidden);
    s.carry_adam_state = j.value("carry_adam_state", s.carry_adam_state);
    s.keep_adam_state = j.value("keep_adam_state", s.keep_adam_state);
    s.penalty = j.value("penalty", s.penalty);
    s.threshold = j.value("threshold", s.threshold);
    s.beam_width = j.value("beam_width", s.beam_width);
    s.checkpoint_every = j.value("checkpoint_every", s.checkpoint_every);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed schedule: ") + e.what());
  }
  s.validate();
  return s;
}

const BudgetCut& SnapshotTrace::cut(int epochs) const {
  for (const auto& c : cuts)
    if (c.epochs == epochs) return c;
  throw InvalidArgument("snapshot " + std::to_string(index) + " has no cut at " + std::to_string(epochs) +
                        " epochs");
}

PreparedInstance prepare(const graph::DynamicInstance& inst, nn::ConvKind conv, double penalty) {
  inst.validate();
  PreparedInstance prep;
  prep.instance = &inst;
  for (const auto& g : inst.snapshots) {
    prep.qubos.push_back(qubo::build_qubo(inst.problem, g, penalty));
    prep.operators.push_back(nn::GraphOperator::build(conv, g));
  }
  return prep;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t repetition_seed(std::uint64_t seed, int rep) {
  return seed ^ (static_cast<std::uint64_t>(rep) << 32);
}

}  // namespace

std::uint64_t init_seed(std::uint64_t seed, int rep, int snapshot) {
  return splitmix64(repetition_seed(seed, rep) ^ static_cast<std::uint64_t>(snapshot));
}

std::uint64_t noise_seed(std::uint64_t seed, int rep, int snapshot) {
  return splitmix64(splitmix64(repetition_seed(seed, rep) ^ static_cast<std::uint64_t>(snapshot)) ^
                    0x5eed5eed5eed5eedULL);
}

decode::DiscreteSolution decode_output(const PreparedInstance& prep, std::size_t snapshot,
                                       std::span<const double> relaxed, const SolveSchedule& sched) {
  const auto& q = prep.qubos[snapshot];
  decode::DiscreteSolution sol;
  sol.kind = prep.problem();
  switch (prep.problem()) {
    case Problem::MaxCut:
      sol.payload = decode::round_binary(relaxed, sched.threshold);
      break;
    case Problem::Mis:
      sol.payload = decode::repair_mis(q.graph, decode::round_binary(relaxed, sched.threshold), sched.repair);
      break;
    case Problem::Tsp: {
      const decode::TourProbs probs{relaxed, q.distances.n};
      sol.payload = sched.beam_width > 1 ? decode::decode_tour_beam(probs, sched.beam_width)
                                         : decode::decode_tour_greedy(probs);
      break;
    }
  }
  sol.objective = qubo::natural_objective(q, sol.payload);
  return sol;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nn::ModelConfig model_config(const PreparedInstance& prep, const SolveSchedule& sched, std::uint64_t seed) {
  const auto& first = prep.instance->snapshots.front();
  nn::ModelConfig cfg;
  cfg.nodes = first.node_count;
  cfg.d_emb = sched.d_emb;
  cfg.d_hidden = sched.d_hidden;
  cfg.d_out = prep.problem() == Problem::Tsp ? first.node_count : 1;
  cfg.kind = sched.conv;
  cfg.seed = seed;
  return cfg;
}

bool better(Problem p, double candidate, double incumbent) {
  return p == Problem::Tsp ? candidate < incumbent : candidate > incumbent;
}

// Optimizes one snapshot for `epochs` updates, recording the cuts (ascending).
SnapshotTrace optimize_snapshot(nn::ModelState& model, const PreparedInstance& prep, std::size_t t, int epochs,
                                std::span<const int> cuts, const SolveSchedule& sched,
                                const EpochObserver& observer) {
  SnapshotTrace trace;
  trace.index = static_cast<int>(t) + 1;
  trace.losses.reserve(static_cast<std::size_t>(epochs) + 1);
  trace.cumulative_seconds.reserve(static_cast<std::size_t>(epochs) + 1);
  const auto& q = prep.qubos[t];
  const auto& op = prep.operators[t];
  const nn::AdamConfig adam{sched.lr};
  const bool checkpoints = prep.problem() == Problem::Tsp && sched.checkpoint_every > 0;

  nn::ForwardTape tape;
  nn::Gradients grads = nn::zero_gradients(model);
  std::vector<double> grad_out(static_cast<std::size_t>(q.dim()));
  std::optional<decode::DiscreteSolution> best;
  double excluded = 0.0;  // time spent decoding budget cuts, not charged
  std::size_t next_cut = 0;
  const auto start = Clock::now();

  for (int e = 0;; ++e) {
    nn::forward(model, op, tape);
    const double loss = qubo::qubo_loss_and_grad(q, tape.out.data, grad_out);
    trace.losses.push_back(loss);
    if (checkpoints && e > 0 && e % sched.checkpoint_every == 0) {
      auto sol = decode_output(prep, t, tape.out.data, sched);
      if (!best || better(prep.problem(), sol.objective, best->objective)) best = std::move(sol);
    }
    trace.cumulative_seconds.push_back(seconds_since(start) - excluded);
    while (next_cut < cuts.size() && cuts[next_cut] == e) {
      const auto decode_start = Clock::now();
      BudgetCut cut;
      cut.epochs = e;
      cut.seconds = trace.cumulative_seconds.back();
      cut.loss = loss;
      cut.relaxed = tape.out.data;
      cut.solution = decode_output(prep, t, tape.out.data, sched);
      if (checkpoints && best && better(prep.problem(), best->objective, cut.solution.objective))
        cut.solution = *best;
      trace.cuts.push_back(std::move(cut));
      ++next_cut;
      excluded += seconds_since(decode_start);
    }
    if (e == epochs) break;
    nn::backward(model, tape, grad_out, grads);
    nn::adam_step(model, grads, adam);
#ifndef NDEBUG
    if (!model.all_finite()) throw InvariantError("non-finite parameters after an update");
#endif
    if (observer) observer(trace.index, e + 1, model);
  }
  return trace;
}

std::vector<int> checked_cuts(std::span<const int> budgets, int limit) {
  std::vector<int> cuts(budgets.begin(), budgets.end());
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] < 0) throw InvalidArgument("budgets must be nonnegative");
    if (i > 0 && cuts[i] <= cuts[i - 1]) throw InvalidArgument("budgets must be strictly ascending");
  }
  if (!cuts.empty() && cuts.back() > limit)
    throw InvalidArgument("largest budget " + std::to_string(cuts.back()) + " exceeds epoch_ws " +
                          std::to_string(limit));
  return cuts;
}

SolveTrace new_trace(const SolveSchedule& sched, int rep) {
  SolveTrace trace;
  trace.strategy = sched.strategy;
  trace.sp_subset = sched.sp_subset;
  trace.repetition = rep;
  trace.seed = sched.seed;
  return trace;
}

void reset_adam(nn::ModelState& model) {
  for (auto& p : model.params) {
    std::fill(p.m.data.begin(), p.m.data.end(), 0.0);
    std::fill(p.v.data.begin(), p.v.data.end(), 0.0);
    p.step = 0;
  }
}

SolveTrace run_static(const PreparedInstance& prep, const SolveSchedule& sched, int rep, int epochs_later,
                      std::span<const int> cuts_later, const EpochObserver& observer,
                      const FirstSnapshot* first = nullptr) {
  SolveTrace trace = new_trace(sched, rep);
  for (std::size_t t = 0; t < prep.size(); ++t) {
    if (t == 0 && first) {
      trace.snapshots.push_back(first->trace);
      continue;
    }
    auto model = nn::init_model(model_config(prep, sched, init_seed(sched.seed, rep, static_cast<int>(t) + 1)));
    if (t == 0) {
      const int cut[] = {sched.epoch_max};
      trace.snapshots.push_back(optimize_snapshot(model, prep, t, sched.epoch_max, cut, sched, observer));
    } else {
      trace.snapshots.push_back(optimize_snapshot(model, prep, t, epochs_later, cuts_later, sched, observer));
    }
  }
  return trace;
}

// Snapshot 1 from a fresh init; returns the final model.
nn::ModelState run_first(const PreparedInstance& prep, const SolveSchedule& sched, int rep, SolveTrace& trace,
                         const EpochObserver& observer) {
  auto model = nn::init_model(model_config(prep, sched, init_seed(sched.seed, rep, 1)));
  const int cut[] = {sched.epoch_max};
  trace.snapshots.push_back(optimize_snapshot(model, prep, 0, sched.epoch_max, cut, sched, observer));
  return model;
}

// Snapshots 2..T starting from `model` (the state after snapshot 1).
void run_chain(nn::ModelState model, const PreparedInstance& prep, const SolveSchedule& sched, int rep,
               int epochs, std::span<const int> cuts, std::vector<SnapshotTrace>& out,
               const EpochObserver& observer) {
  for (std::size_t t = 1; t < prep.size(); ++t) {
    const int snapshot = static_cast<int>(t) + 1;
    if (!sched.carry_adam_state) reset_adam(model);
    if (sched.strategy == Strategy::Sp) {
      nn::ShrinkPerturbConfig sp;
      sp.shrink = sched.shrink;
      sp.perturb = sched.perturb;
      sp.sigma = sched.sigma;
      sp.subset = sched.sp_subset;
      sp.keep_adam_state = sched.keep_adam_state;
      sp.seed = noise_seed(sched.seed, rep, snapshot);
      nn::shrink_perturb(model, sp);
    }
    out.push_back(optimize_snapshot(model, prep, t, epochs, cuts, sched, observer));
  }
}

SolveTrace run_dynamic(const PreparedInstance& prep, const SolveSchedule& sched, int rep,
                       const EpochObserver& observer) {
  SolveTrace trace = new_trace(sched, rep);
  auto model = run_first(prep, sched, rep, trace, observer);
  const int cut[] = {sched.epoch_ws};
  run_chain(std::move(model), prep, sched, rep, sched.epoch_ws, cut, trace.snapshots, observer);
  return trace;
}

}  // namespace

SolveTrace solve_static(const PreparedInstance& prep, const SolveSchedule& sched, int rep,
                        const EpochObserver& observer) {
  sched.validate();
  if (sched.strategy != Strategy::Static) throw InvalidArgument("solve_static needs the static strategy");
  const int cut[] = {sched.epoch_ws};
  return run_static(prep, sched, rep, sched.epoch_ws, cut, observer);
}

SolveTrace solve_warm(const PreparedInstance& prep, const SolveSchedule& sched, int rep,
                      const EpochObserver& observer) {
  sched.validate();
  if (sched.strategy != Strategy::Warm) throw InvalidArgument("solve_warm needs the warm strategy");
  return run_dynamic(prep, sched, rep, observer);
}

SolveTrace solve_sp(const PreparedInstance& prep, const SolveSchedule& sched, int rep,
                    const EpochObserver& observer) {
  sched.validate();
  if (sched.strategy != Strategy::Sp) throw InvalidArgument("solve_sp needs the sp strategy");
  return run_dynamic(prep, sched, rep, observer);
}

SolveTrace solve(const PreparedInstance& prep, const SolveSchedule& sched, int rep, const EpochObserver& observer) {
  switch (sched.strategy) {
    case Strategy::Static:
      return solve_static(prep, sched, rep, observer);
    case Strategy::Warm:
      return solve_warm(prep, sched, rep, observer);
    case Strategy::Sp:
      return solve_sp(prep, sched, rep, observer);
  }
  throw InvalidArgument("unknown strategy");
}

FirstSnapshot optimize_first(const PreparedInstance& prep, const SolveSchedule& sched, int rep) {
  sched.validate();
  SolveTrace trace;
  auto model = run_first(prep, sched, rep, trace, {});
  return {std::move(trace.snapshots.front()), std::move(model)};
}

SolveTrace run_budget_sweep(const PreparedInstance& prep, const SolveSchedule& sched, std::span<const int> budgets,
                            int rep, const FirstSnapshot* first) {
  sched.validate();
  const auto cuts = checked_cuts(budgets, sched.epoch_ws);
  if (first) {
    const auto expected = model_config(prep, sched, init_seed(sched.seed, rep, 1));
    const auto& got = first->model.config;
    if (got.nodes != expected.nodes || got.d_emb != expected.d_emb || got.d_hidden != expected.d_hidden ||
        got.d_out != expected.d_out || got.kind != expected.kind || got.seed != expected.seed ||
        first->trace.losses.size() != static_cast<std::size_t>(sched.epoch_max) + 1)
      throw InvalidArgument("shared snapshot 1 does not match the schedule");
  }
  if (cuts.empty()) {
    if (!first) return solve(prep, sched, rep);
    const int cut[] = {sched.epoch_ws};
    return run_budget_sweep(prep, sched, cut, rep, first);
  }
  if (sched.strategy == Strategy::Static) return run_static(prep, sched, rep, cuts.back(), cuts, {}, first);

  SolveTrace trace = new_trace(sched, rep);
  nn::ModelState after_first;
  if (first) {
    trace.snapshots.push_back(first->trace);
    after_first = first->model;
  } else {
    after_first = run_first(prep, sched, rep, trace, {});
  }
  for (std::size_t t = 1; t < prep.size(); ++t) trace.snapshots.push_back({static_cast<int>(t) + 1, {}, {}, {}});
  for (int budget : cuts) {
    std::vector<SnapshotTrace> chain;
    const int cut[] = {budget};
    run_chain(after_first, prep, sched, rep, budget, cut, chain, {});
    for (std::size_t k = 0; k < chain.size(); ++k) {
      auto& dst = trace.snapshots[k + 1];
      dst.cuts.push_back(std::move(chain[k].cuts.front()));
      dst.losses = std::move(chain[k].losses);
      dst.cumulative_seconds = std::move(chain[k].cumulative_seconds);
    }
  }
  return trace;
}

std::vector<SolveTrace> run_repetitions(const PreparedInstance& prep, const SolveSchedule& sched,
                                        std::span<const int> budgets, int jobs) {
  sched.validate();
  (void)checked_cuts(budgets, sched.epoch_ws);
  std::vector<SolveTrace> out(static_cast<std::size_t>(sched.repetitions));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int rep = next++; rep < sched.repetitions; rep = next++) {
      try {
        out[rep] = budgets.empty() ? solve(prep, sched, rep) : run_budget_sweep(prep, sched, budgets, rep);
      } catch (...) {
        errors[rep] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, sched.repetitions);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

nlohmann::json to_json(const SolveTrace& trace, bool include_relaxed) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : trace.snapshots) {
    nlohmann::json cuts = nlohmann::json::array();
    for (const auto& c : s.cuts) {
      nlohmann::json cj = {{"epochs", c.epochs},
                           {"seconds", c.seconds},
                           {"loss", c.loss},
                           {"solution", decode::to_json(c.solution)}};
      if (include_relaxed) cj["relaxed"] = c.relaxed;
      cuts.push_back(std::move(cj));
    }
    snaps.push_back({{"index", s.index}, {"cuts", std::move(cuts)}, {"losses", s.losses}});
  }
  return {{"strategy", to_string(trace.strategy)},
          {"sp_subset", nn::to_string(trace.sp_subset)},
          {"repetition", trace.repetition},
          {"seed", trace.seed},
          {"snapshots", std::move(snaps)}};
}

std::vector<double> objectives_at(const SolveTrace& trace, int budget) {
  std::vector<double> out;
  for (std::size_t t = 0; t < trace.snapshots.size(); ++t) {
    const auto& s = trace.snapshots[t];
    if (s.cuts.empty()) throw InvalidArgument("snapshot without recorded cuts");
    out.push_back(t == 0 ? s.cuts.back().solution.objective : s.cut(budget).solution.objective);
  }
  return out;
}

double mean_apr(const SolveTrace& trace, std::span<const double> optima, int budget) {
  const auto achieved = objectives_at(trace, budget);
  if (optima.size() != achieved.size()) throw InvalidArgument("need one optimum per snapshot");
  // Snapshot 1 is identical across strategies and left out, unless it is the only one.
  const std::size_t skip = achieved.size() > 1 ? 1 : 0;
  return oracle::mean_apr(std::span(achieved).subspan(skip), optima.subspan(skip));
}

}  // namespace dyco::solver
