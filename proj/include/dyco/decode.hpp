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
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dyco/graph.hpp"

namespace dyco::decode {

/// MaxCut: 0/1 side per node. MIS: 0/1 membership, violation-free.
/// TSP: payload[v] is the node visited at step v.
struct DiscreteSolution {
  Problem kind = Problem::MaxCut;
  std::vector<int> payload;
  double objective = 0.0;
};

/// x_i >= threshold -> 1.
std::vector<int> round_binary(std::span<const double> x, double threshold = 0.5);

enum class RepairRule {
  /// Remove the selected node with the most violated incident edges; ties to
  /// the lower id.
  MaxViolations,
  /// Remove the violating node of largest degree; ties to the lower id.
  MaxDegree,
  /// Remove a uniformly random endpoint of a violated edge.
  Random,
};

std::string_view to_string(RepairRule r);
RepairRule parse_repair_rule(std::string_view s);

/// Removal-only repair. Result is a subset of `selected` with no violated edge.
std::vector<int> repair_mis(const graph::GraphSnapshot& g, std::span<const int> selected,
                            RepairRule rule = RepairRule::MaxViolations, std::uint64_t seed = 0);

/// Row-major n x n view: probs[i * n + v] = P(node i at step v).
struct TourProbs {
  std::span<const double> values;
  int n = 0;
  double at(int node, int step) const { return values[static_cast<std::size_t>(node) * n + step]; }
};

/// Sum over steps of log(clamp(p, 1e-12, 1 - 1e-12)).
double tour_log_score(const TourProbs& probs, std::span<const int> tour);

/// Step by step, the unvisited node with the largest probability; ties to the
/// lower id.
std::vector<int> decode_tour_greedy(const TourProbs& probs);

/// Beam search over partial tours, expanding the top `width` unvisited nodes of
/// each partial and keeping the `width` best partials by log score. The result
/// is the best over beam widths 1..width, so the score never decreases as the
/// width grows and width 1 is exactly the greedy decode.
std::vector<int> decode_tour_beam(const TourProbs& probs, int width);

/// A single beam pass of exactly `width`.
std::vector<int> beam_pass(const TourProbs& probs, int width);

nlohmann::json to_json(const DiscreteSolution& s);

}  // namespace dyco::decode
