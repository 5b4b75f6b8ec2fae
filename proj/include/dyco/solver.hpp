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
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dyco/decode.hpp"
#include "dyco/graph.hpp"
#include "dyco/nn.hpp"
#include "dyco/qubo.hpp"

namespace dyco::solver {

enum class Strategy { Static, Warm, Sp };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct SolveSchedule {
  Strategy strategy = Strategy::Sp;
  nn::SpSubset sp_subset = nn::SpSubset::Full;
  /// Epochs on snapshot 1.
  int epoch_max = 3000;
  /// Epochs on every later snapshot.
  int epoch_ws = 3000;
  double lr = 1e-3;
  double shrink = 0.4;
  double perturb = 0.1;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  int repetitions = 1;

  nn::ConvKind conv = nn::ConvKind::Gcn;
  int d_emb = 512;
  int d_hidden = 256;

  /// Warm/SP: carry Adam moments into the next snapshot. SP additionally
  /// needs keep_adam_state to keep moments of perturbed tensors.
  bool carry_adam_state = true;
  bool keep_adam_state = false;

  /// QUBO penalty; <= 0 picks the problem default (2 for MIS, 2 max w for TSP).
  double penalty = 0.0;
  double threshold = 0.5;
  decode::RepairRule repair = decode::RepairRule::MaxViolations;
  /// TSP decoding: 1 = greedy, > 1 = beam search of that width.
  int beam_width = 1;
  /// TSP best-checkpoint mode: decode every this many epochs and keep the
  /// best tour (0 = decode only at the budget cut).
  int checkpoint_every = 0;

  void validate() const;
};

nlohmann::json to_json(const SolveSchedule& s);
SolveSchedule schedule_from_json(const nlohmann::json& j);

/// Decoded solution at one budget cut of one snapshot.
struct BudgetCut {
  int epochs = 0;
  /// Optimization time to reach the cut, including checkpoint decoding.
  double seconds = 0.0;
  double loss = 0.0;
  std::vector<double> relaxed;
  decode::DiscreteSolution solution;
};

struct SnapshotTrace {
  int index = 0;  // 1-based
  std::vector<BudgetCut> cuts;
  /// Loss of every forward pass; losses[e] is evaluated after e updates.
  std::vector<double> losses;
  std::vector<double> cumulative_seconds;

  const BudgetCut& cut(int epochs) const;
};

struct SolveTrace {
  Strategy strategy = Strategy::Static;
  nn::SpSubset sp_subset = nn::SpSubset::Full;
  int repetition = 0;
  std::uint64_t seed = 0;
  std::vector<SnapshotTrace> snapshots;
};

/// QUBOs and message-passing operators for every snapshot, built once.
struct PreparedInstance {
  const graph::DynamicInstance* instance = nullptr;
  std::vector<qubo::QuboInstance> qubos;
  std::vector<nn::GraphOperator> operators;

  Problem problem() const noexcept { return instance->problem; }
  std::size_t size() const noexcept { return qubos.size(); }
};

PreparedInstance prepare(const graph::DynamicInstance& inst, nn::ConvKind conv, double penalty = 0.0);

/// Called after every parameter update: (snapshot index 1-based, epoch, model).
using EpochObserver = std::function<void(int, int, const nn::ModelState&)>;

/// Seeds derived for repetition `rep`: model init for snapshot t and SP noise.
std::uint64_t init_seed(std::uint64_t seed, int rep, int snapshot);
std::uint64_t noise_seed(std::uint64_t seed, int rep, int snapshot);

/// Decodes a relaxed output into a feasible solution with its natural objective.
decode::DiscreteSolution decode_output(const PreparedInstance& prep, std::size_t snapshot,
                                       std::span<const double> relaxed, const SolveSchedule& sched);

/// Fresh init per snapshot. Snapshot 1 runs epoch_max epochs, the rest epoch_ws.
SolveTrace solve_static(const PreparedInstance& prep, const SolveSchedule& sched, int rep = 0,
                        const EpochObserver& observer = {});

/// Snapshot t >= 2 starts from the final parameters of snapshot t - 1.
SolveTrace solve_warm(const PreparedInstance& prep, const SolveSchedule& sched, int rep = 0,
                      const EpochObserver& observer = {});

/// As solve_warm, with shrink-and-perturb applied before each snapshot t >= 2.
SolveTrace solve_sp(const PreparedInstance& prep, const SolveSchedule& sched, int rep = 0,
                    const EpochObserver& observer = {});

/// Dispatches on sched.strategy.
SolveTrace solve(const PreparedInstance& prep, const SolveSchedule& sched, int rep = 0,
                 const EpochObserver& observer = {});

/// Decoded solutions at each budget (ascending, each <= epoch_ws). A budget b
/// is what a schedule with epoch_ws = b produces: static snapshots are solved
/// independently, so one run with cuts serves every budget; warm and SP
/// chains are rerun per budget from a shared snapshot-1 state.
/// Snapshot 1 optimized for epoch_max from its seeded init. Every strategy
/// computes the same snapshot 1 for a given seed, repetition and model shape,
/// so one result can be shared between sweeps.
struct FirstSnapshot {
  SnapshotTrace trace;
  nn::ModelState model;
};

FirstSnapshot optimize_first(const PreparedInstance& prep, const SolveSchedule& sched, int rep = 0);

/// `first`, when given, replaces the snapshot 1 optimization; it must come from
/// optimize_first with a compatible schedule (InvalidArgument otherwise).
SolveTrace run_budget_sweep(const PreparedInstance& prep, const SolveSchedule& sched,
                            std::span<const int> budgets, int rep = 0, const FirstSnapshot* first = nullptr);

/// Repetitions on up to `jobs` threads, ordered by repetition index.
std::vector<SolveTrace> run_repetitions(const PreparedInstance& prep, const SolveSchedule& sched,
                                        std::span<const int> budgets, int jobs);

nlohmann::json to_json(const SolveTrace& trace, bool include_relaxed = true);

/// Natural objectives per snapshot (index 0 = snapshot 1) at a budget; for
/// snapshot 1 the single epoch_max cut is used.
std::vector<double> objectives_at(const SolveTrace& trace, int budget);

/// Mean ApR over snapshots 2..T at a budget. `optima` is indexed like
/// objectives_at.
double mean_apr(const SolveTrace& trace, std::span<const double> optima, int budget);

}  // namespace dyco::solver
