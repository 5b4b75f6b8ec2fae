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
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dyco/graph.hpp"
#include "dyco/nn.hpp"
#include "dyco/qubo.hpp"

namespace dyco::testing {

/// Erdos-Renyi style graph with edge probability p.
inline graph::GraphSnapshot random_graph(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<graph::Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng)) edges.push_back({u, v});
  return graph::make_snapshot(n, std::move(edges));
}

inline graph::DistanceMatrix random_distances(int n, std::uint64_t seed, int max_coord = 100) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(0, max_coord);
  graph::TspNodeSet nodes;
  for (int i = 0; i < n; ++i) nodes.coords.push_back({double(coord(rng)), double(coord(rng))});
  return graph::distance_matrix(nodes);
}

/// x^T Q x accumulated in extended precision. The penalty terms of the TSP
/// encoding cancel heavily, and double accumulation would swamp small
/// difference quotients with rounding noise.
inline long double quadratic_form(const qubo::QuboInstance& q, std::span<const double> x) {
  long double sum = 0.0L;
  for (const auto& e : q.entries()) {
    const long double term = static_cast<long double>(e.value) * x[e.row] * x[e.col];
    sum += e.row == e.col ? term : 2.0L * term;
  }
  return sum;
}

inline long double model_loss(const nn::ModelState& model, const nn::GraphOperator& op, const qubo::QuboInstance& q) {
  const auto tape = nn::forward(model, op);
  return quadratic_form(q, tape.out.data);
}

/// Shortest tour by enumerating every permutation with node 0 fixed first.
inline double brute_force_tour(const graph::DistanceMatrix& dist) {
  std::vector<int> perm(dist.n);
  for (int i = 0; i < dist.n; ++i) perm[i] = i;
  double best = qubo::tour_length(dist, perm);
  while (std::next_permutation(perm.begin() + 1, perm.end())) best = std::min(best, qubo::tour_length(dist, perm));
  return best;
}

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

/// Central differences of the QUBO loss through the model against backward().
/// Relative error is |a - f| / max(|a|, |f|, floor).
inline GradCheck check_gradients(nn::ModelState model, const nn::GraphOperator& op, const qubo::QuboInstance& q,
                                 double h = 1e-5, double floor = 1e-6) {
  auto tape = nn::forward(model, op);
  const auto grad_out = qubo::qubo_grad(q, tape.out.data);
  auto grads = nn::zero_gradients(model);
  nn::backward(model, tape, grad_out, grads);

  GradCheck result;
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    auto& values = model.params[p].value.data;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      model.touch();
      const long double up = model_loss(model, op, q);
      values[i] = saved - h;
      model.touch();
      const long double down = model_loss(model, op, q);
      values[i] = saved;
      model.touch();
      const double fd = static_cast<double>((up - down) / (2 * h));
      const double an = grads[p].data[i];
      const double denom = std::max({std::abs(an), std::abs(fd), floor});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(an - fd) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace dyco::testing
