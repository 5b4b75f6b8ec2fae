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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dyco/graph.hpp"

namespace dyco::oracle {

/// Optimal (or best known) value with a witness. For MaxCut/MIS the witness
/// is a 0/1 node vector, for TSP a tour.
struct Solution {
  double value = 0.0;
  std::vector<int> witness;
  bool exact = true;
};

inline constexpr int kMaxCutEnumerationLimit = 26;
inline constexpr int kMisEnumerationLimit = 26;
inline constexpr int kMisBranchAndBoundLimit = 64;
inline constexpr int kHeldKarpLimit = 18;

/// Gray-code enumeration of the 2^(n-1) cuts. CapacityError beyond 26 nodes.
Solution exact_maxcut(const graph::GraphSnapshot& g);

/// Exact per connected component when possible (bipartite components are cut
/// completely, components up to 26 nodes are enumerated); larger
/// non-bipartite components fall back to multi-start tabu search and the
/// result is flagged inexact.
Solution reference_maxcut(const graph::GraphSnapshot& g, std::uint64_t seed = 0, int restarts = 64);

/// Multi-start 1-flip tabu search; best cut found.
Solution tabu_maxcut(const graph::GraphSnapshot& g, std::uint64_t seed, int restarts, int iterations);

/// Exhaustive subset enumeration, up to 26 nodes.
Solution exact_mis_exhaustive(const graph::GraphSnapshot& g);

/// Branch and bound with greedy clique-cover bounds, up to 64 nodes.
Solution exact_mis(const graph::GraphSnapshot& g);

/// Held-Karp dynamic program, up to 18 nodes. Tour starts at node 0.
Solution exact_tsp_held_karp(const graph::DistanceMatrix& dist);

/// Exact optimum for one snapshot of the given problem (reference_maxcut for
/// MaxCut).
Solution solve_snapshot(Problem problem, const graph::GraphSnapshot& g, std::uint64_t seed = 0);

/// One pass in node order; each node joins the side that cuts more weight to
/// already placed neighbors (ties to side 0). Returns the cut value.
double greedy_cut_baseline(const graph::GraphSnapshot& g);
std::vector<int> greedy_cut_assignment(const graph::GraphSnapshot& g);

/// Nearest neighbor from node 0 (ties to the lower id); closed-tour length.
double greedy_tour_baseline(const graph::DistanceMatrix& dist);
std::vector<int> greedy_tour(const graph::DistanceMatrix& dist);

/// achieved / optimum. InvalidArgument on a zero optimum.
double approximation_ratio(double achieved, double optimum);

/// Mean of achieved[t] / optima[t]. MaxCut/MIS ratios are <= 1 (higher is
/// better), TSP ratios are >= 1 (lower is better).
double mean_apr(std::span<const double> achieved, std::span<const double> optima);

// ---------------------------------------------------------------------------
// Oracle cache: {instance_hash, problem, snapshots: {"<t>": {optimal, witness, exact}}}

struct Cache {
  std::string instance_hash;
  Problem problem = Problem::MaxCut;
  std::map<int, Solution> snapshots;  // 1-based snapshot index
};

std::string instance_hash(const graph::DynamicInstance& inst);

/// Fills every missing snapshot (all snapshots when `include_first`, else 2..T).
/// Returns the number of snapshots computed.
std::size_t fill_cache(Cache& cache, const graph::DynamicInstance& inst, bool include_first = true,
                       std::uint64_t seed = 0);

void save_cache(const Cache& cache, const std::string& path);
Cache load_cache(const std::string& path);

}  // namespace dyco::oracle
