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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dyco/solver.hpp"
#include "support.hpp"

namespace dyco::testing {

/// A small growth instance: random events on n nodes split into T snapshots.
inline graph::DynamicInstance small_growth(int n, std::size_t edges, int snapshots, std::uint64_t seed) {
  const auto events = graph::random_temporal_graph(n, edges, seed);
  return graph::build_growth_snapshots(events, snapshots, 1.0 / snapshots);
}

inline solver::SolveSchedule small_schedule(solver::Strategy strategy, int epochs) {
  solver::SolveSchedule s;
  s.strategy = strategy;
  s.epoch_max = epochs;
  s.epoch_ws = epochs;
  s.d_emb = 16;
  s.d_hidden = 8;
  s.seed = 5;
  return s;
}

inline bool same_trace(const solver::SolveTrace& a, const solver::SolveTrace& b) {
  if (a.snapshots.size() != b.snapshots.size()) return false;
  for (std::size_t t = 0; t < a.snapshots.size(); ++t) {
    const auto& x = a.snapshots[t];
    const auto& y = b.snapshots[t];
    if (x.losses != y.losses || x.cuts.size() != y.cuts.size()) return false;
    for (std::size_t c = 0; c < x.cuts.size(); ++c) {
      if (x.cuts[c].epochs != y.cuts[c].epochs || x.cuts[c].loss != y.cuts[c].loss ||
          x.cuts[c].relaxed != y.cuts[c].relaxed || x.cuts[c].solution.payload != y.cuts[c].solution.payload ||
          x.cuts[c].solution.objective != y.cuts[c].solution.objective)
        return false;
    }
  }
  return true;
}

/// All three strategies on a one-snapshot instance give identical traces.
inline bool strategies_agree_on_single_snapshot(Problem problem, std::uint64_t seed) {
  graph::DynamicInstance inst;
  inst.problem = problem;
  if (problem == Problem::Tsp)
    inst.snapshots = {graph::complete_graph(random_distances(6, seed))};
  else
    inst.snapshots = {random_graph(10, 0.3, seed)};
  auto sched = small_schedule(solver::Strategy::Static, 40);
  if (problem == Problem::Tsp) sched.conv = nn::ConvKind::Sage;
  const auto prep = solver::prepare(inst, sched.conv);
  const auto a = solver::solve(prep, sched);
  sched.strategy = solver::Strategy::Warm;
  const auto b = solver::solve(prep, sched);
  sched.strategy = solver::Strategy::Sp;
  const auto c = solver::solve(prep, sched);
  return same_trace(a, b) && same_trace(a, c);
}

/// Largest relative parameter difference between warm start and SP driven to
/// its warm limit (shrink near 1, perturbation and noise zero, moments kept),
/// taken over every tensor and every epoch from snapshot 2's first onward.
inline double warm_limit_deviation(std::uint64_t seed) {
  const auto inst = small_growth(12, 30, 3, seed);
  auto warm = small_schedule(solver::Strategy::Warm, 30);
  warm.seed = seed;
  auto sp = warm;
  sp.strategy = solver::Strategy::Sp;
  sp.shrink = 1.0 - 1e-6;
  sp.perturb = 1e-9;
  sp.sigma = 0.0;
  sp.keep_adam_state = true;
  const auto prep = solver::prepare(inst, warm.conv);

  std::vector<nn::ModelState> warm_states;
  solver::solve(prep, warm, 0, [&](int t, int, const nn::ModelState& m) {
    if (t >= 2) warm_states.push_back(m);
  });
  double worst = 0.0;
  std::size_t k = 0;
  solver::solve(prep, sp, 0, [&](int t, int, const nn::ModelState& m) {
    if (t < 2) return;
    if (k >= warm_states.size()) {
      worst = INFINITY;
      return;
    }
    const auto& w = warm_states[k++];
    for (std::size_t p = 0; p < m.params.size(); ++p) {
      const auto& a = m.params[p].value;
      const auto& b = w.params[p].value;
      const double scale = std::max(b.frobenius(), 1e-12);
      double diff = 0.0;
      for (std::size_t i = 0; i < a.data.size(); ++i) diff += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
      worst = std::max(worst, std::sqrt(diff) / scale);
    }
  });
  if (k != warm_states.size()) return INFINITY;
  return worst;
}

/// Two identical runs of every strategy produce bit-identical traces.
inline bool runs_are_reproducible(std::uint64_t seed) {
  const auto inst = small_growth(12, 30, 3, seed);
  for (auto strategy : {solver::Strategy::Static, solver::Strategy::Warm, solver::Strategy::Sp}) {
    auto sched = small_schedule(strategy, 25);
    sched.seed = seed;
    const auto prep = solver::prepare(inst, sched.conv);
    const std::vector<int> budgets{10, 25};
    if (!same_trace(solver::run_budget_sweep(prep, sched, budgets), solver::run_budget_sweep(prep, sched, budgets)))
      return false;
  }
  return true;
}

}  // namespace dyco::testing
