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
#include "dyco/decode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "dyco/error.hpp"

namespace dyco::decode {

std::vector<int> round_binary(std::span<const double> x, double threshold) {
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] >= threshold ? 1 : 0;
  return out;
}

std::string_view to_string(RepairRule r) {
  switch (r) {
    case RepairRule::MaxViolations:
      return "max-violations";
    case RepairRule::MaxDegree:
      return "max-degree";
    case RepairRule::Random:
      return "random";
  }
  return "?";
}

RepairRule parse_repair_rule(std::string_view s) {
  if (s == "max-violations") return RepairRule::MaxViolations;
  if (s == "max-degree") return RepairRule::MaxDegree;
  if (s == "random") return RepairRule::Random;
  throw InvalidArgument("unknown repair rule '" + std::string(s) + "'");
}

std::vector<int> repair_mis(const graph::GraphSnapshot& g, std::span<const int> selected,
                            RepairRule rule, std::uint64_t seed) {
  if (selected.size() != static_cast<std::size_t>(g.node_count))
    throw InvalidArgument("selection length does not match node count");
  std::vector<int> s(selected.begin(), selected.end());
  for (int& v : s) v = v != 0 ? 1 : 0;
  const auto adj = g.adjacency();
  std::vector<int> violations(s.size(), 0);
  for (const auto& e : g.edges)
    if (s[e.u] && s[e.v]) {
      ++violations[e.u];
      ++violations[e.v];
    }
  std::mt19937_64 rng(seed);

  auto remove = [&](int node) {
    s[node] = 0;
    for (int nb : adj[node])
      if (s[nb]) --violations[nb];
    violations[node] = 0;
  };

  while (true) {
    int pick = -1;
    if (rule == RepairRule::Random) {
      std::vector<int> candidates;
      for (std::size_t i = 0; i < s.size(); ++i)
        if (violations[i] > 0) candidates.push_back(static_cast<int>(i));
      if (candidates.empty()) break;
      pick = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (violations[i] == 0) continue;
        const auto key = [&](std::size_t v) {
          return rule == RepairRule::MaxViolations ? violations[v] : static_cast<int>(adj[v].size());
        };
        if (pick < 0 || key(i) > key(static_cast<std::size_t>(pick))) pick = static_cast<int>(i);
      }
      if (pick < 0) break;
    }
    remove(pick);
  }
  return s;
}

namespace {

constexpr double kClamp = 1e-12;

double log_prob(double p) { return std::log(std::clamp(p, kClamp, 1.0 - kClamp)); }

void check_probs(const TourProbs& probs) {
  if (probs.n <= 0 || probs.values.size() != static_cast<std::size_t>(probs.n) * probs.n)
    throw InvalidArgument("tour probabilities must be an n x n matrix");
}

}  // namespace

double tour_log_score(const TourProbs& probs, std::span<const int> tour) {
  double score = 0.0;
  for (std::size_t v = 0; v < tour.size(); ++v) score += log_prob(probs.at(tour[v], static_cast<int>(v)));
  return score;
}

std::vector<int> decode_tour_greedy(const TourProbs& probs) {
  check_probs(probs);
  const int n = probs.n;
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<int> tour;
  tour.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (visited[i]) continue;
      if (best < 0 || probs.at(i, v) > probs.at(best, v)) best = i;
    }
    visited[best] = 1;
    tour.push_back(best);
  }
  return tour;
}

std::vector<int> beam_pass(const TourProbs& probs, int width) {
  check_probs(probs);
  if (width < 1) throw InvalidArgument("beam width must be >= 1");
  const int n = probs.n;
  struct Partial {
    std::vector<int> tour;
    std::vector<char> visited;
    double score = 0.0;
  };
  std::vector<Partial> beam(1);
  beam[0].visited.assign(static_cast<std::size_t>(n), 0);

  struct Candidate {
    std::size_t parent;
    int node;
    double score;
  };
  std::vector<Candidate> pool;
  std::vector<int> options;
  for (int v = 0; v < n; ++v) {
    pool.clear();
    for (std::size_t b = 0; b < beam.size(); ++b) {
      options.clear();
      for (int i = 0; i < n; ++i)
        if (!beam[b].visited[i]) options.push_back(i);
      const auto keep = std::min<std::size_t>(options.size(), static_cast<std::size_t>(width));
      std::partial_sort(options.begin(), options.begin() + static_cast<std::ptrdiff_t>(keep), options.end(),
                        [&](int a, int c) {
                          const double pa = probs.at(a, v), pc = probs.at(c, v);
                          return pa != pc ? pa > pc : a < c;
                        });
      for (std::size_t k = 0; k < keep; ++k)
        pool.push_back({b, options[k], beam[b].score + log_prob(probs.at(options[k], v))});
    }
    // Stable: equal scores keep generation order (parent rank, then node rank).
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Candidate& a, const Candidate& c) { return a.score > c.score; });
    pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(width)));
    std::vector<Partial> next;
    next.reserve(pool.size());
    for (const auto& c : pool) {
      Partial p = beam[c.parent];
      p.tour.push_back(c.node);
      p.visited[c.node] = 1;
      p.score = c.score;
      next.push_back(std::move(p));
    }
    beam = std::move(next);
  }
  return beam.front().tour;
}

std::vector<int> decode_tour_beam(const TourProbs& probs, int width) {
  if (width < 1) throw InvalidArgument("beam width must be >= 1");
  std::vector<int> best = decode_tour_greedy(probs);
  double best_score = tour_log_score(probs, best);
  for (int w = 2; w <= width; ++w) {
    auto tour = beam_pass(probs, w);
    const double score = tour_log_score(probs, tour);
    if (score > best_score) {
      best_score = score;
      best = std::move(tour);
    }
  }
  return best;
}

nlohmann::json to_json(const DiscreteSolution& s) {
  return {{"kind", to_string(s.kind)}, {"payload", s.payload}, {"natural_objective", s.objective}};
}

}  // namespace dyco::decode
