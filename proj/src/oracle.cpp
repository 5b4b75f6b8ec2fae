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
#include "dyco/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

#include <nlohmann/json.hpp>

#include "dyco/error.hpp"

namespace dyco::oracle {

namespace {

struct WeightedAdj {
  std::vector<std::vector<std::pair<int, double>>> nbrs;
};

WeightedAdj weighted_adjacency(const graph::GraphSnapshot& g) {
  WeightedAdj adj;
  adj.nbrs.resize(static_cast<std::size_t>(g.node_count));
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    adj.nbrs[g.edges[k].u].push_back({g.edges[k].v, g.weights[k]});
    adj.nbrs[g.edges[k].v].push_back({g.edges[k].u, g.weights[k]});
  }
  return adj;
}

double cut_of(const graph::GraphSnapshot& g, const std::vector<int>& side) {
  double c = 0.0;
  for (std::size_t k = 0; k < g.edges.size(); ++k)
    if (side[g.edges[k].u] != side[g.edges[k].v]) c += g.weights[k];
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// MaxCut

Solution exact_maxcut(const graph::GraphSnapshot& g) {
  const int n = g.node_count;
  if (n > kMaxCutEnumerationLimit)
    throw CapacityError("exact MaxCut enumeration supports at most " +
                        std::to_string(kMaxCutEnumerationLimit) + " nodes, got " + std::to_string(n));
  Solution best{0.0, std::vector<int>(static_cast<std::size_t>(n), 0), true};
  if (n <= 1 || g.edges.empty()) return best;

  const auto adj = weighted_adjacency(g);
  // Node n-1 stays on side 0; the Gray code walks the other n-1 nodes.
  std::vector<int> side(static_cast<std::size_t>(n), 0);
  double cut = 0.0;
  std::uint64_t best_code = 0;
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t i = 1; i < count; ++i) {
    const int k = std::countr_zero(i);
    double delta = 0.0;
    for (const auto& [nb, w] : adj.nbrs[k]) delta += side[nb] == side[k] ? w : -w;
    side[k] ^= 1;
    cut += delta;
    if (cut > best.value) {
      best.value = cut;
      best_code = i ^ (i >> 1);
    }
  }
  for (int v = 0; v + 1 < n; ++v) best.witness[v] = static_cast<int>((best_code >> v) & 1U);
  best.value = cut_of(g, best.witness);
  return best;
}

Solution tabu_maxcut(const graph::GraphSnapshot& g, std::uint64_t seed, int restarts, int iterations) {
  const int n = g.node_count;
  Solution best{0.0, std::vector<int>(static_cast<std::size_t>(n), 0), false};
  if (n <= 1 || g.edges.empty()) return best;
  const auto adj = weighted_adjacency(g);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> jitter(0, std::max(1, n / 10));

  std::vector<int> side(static_cast<std::size_t>(n));
  std::vector<double> gain(static_cast<std::size_t>(n));
  std::vector<long long> tabu_until(static_cast<std::size_t>(n));
  for (int r = 0; r < restarts; ++r) {
    for (auto& s : side) s = coin(rng) ? 1 : 0;
    double cut = cut_of(g, side);
    for (int v = 0; v < n; ++v) {
      gain[v] = 0.0;
      for (const auto& [nb, w] : adj.nbrs[v]) gain[v] += side[nb] == side[v] ? w : -w;
    }
    std::fill(tabu_until.begin(), tabu_until.end(), -1);
    if (cut > best.value) {
      best.value = cut;
      best.witness = side;
    }
    for (long long it = 0; it < iterations; ++it) {
      int pick = -1;
      for (int v = 0; v < n; ++v) {
        const bool allowed = tabu_until[v] < it || cut + gain[v] > best.value;
        if (allowed && (pick < 0 || gain[v] > gain[pick])) pick = v;
      }
      if (pick < 0) break;
      cut += gain[pick];
      side[pick] ^= 1;
      gain[pick] = -gain[pick];
      for (const auto& [nb, w] : adj.nbrs[pick]) gain[nb] += side[nb] == side[pick] ? 2.0 * w : -2.0 * w;
      tabu_until[pick] = it + n / 10 + 1 + jitter(rng);
      if (cut > best.value + 1e-12) {
        best.value = cut;
        best.witness = side;
      }
    }
  }
  best.value = cut_of(g, best.witness);
  return best;
}

Solution reference_maxcut(const graph::GraphSnapshot& g, std::uint64_t seed, int restarts) {
  const int n = g.node_count;
  Solution out{0.0, std::vector<int>(static_cast<std::size_t>(n), 0), true};
  const auto adj = g.adjacency();
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int comp_count = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> members{s};
    comp[s] = comp_count;
    // BFS 2-coloring doubles as the bipartiteness test.
    std::vector<int>& side = out.witness;
    side[s] = 0;
    bool bipartite = true;
    for (std::size_t head = 0; head < members.size(); ++head) {
      const int v = members[head];
      for (int nb : adj[v]) {
        if (comp[nb] < 0) {
          comp[nb] = comp_count;
          side[nb] = 1 - side[v];
          members.push_back(nb);
        } else if (side[nb] == side[v]) {
          bipartite = false;
        }
      }
    }
    ++comp_count;
    if (bipartite || members.size() == 1) continue;

    std::sort(members.begin(), members.end());
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
    graph::GraphSnapshot sub;
    sub.node_count = static_cast<int>(members.size());
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      if (comp[g.edges[k].u] != comp_count - 1) continue;
      sub.edges.push_back({local[g.edges[k].u], local[g.edges[k].v]});
      sub.weights.push_back(g.weights[k]);
    }
    Solution part = sub.node_count <= kMaxCutEnumerationLimit
                        ? exact_maxcut(sub)
                        : tabu_maxcut(sub, seed + static_cast<std::uint64_t>(s), restarts, 50 * sub.node_count);
    out.exact = out.exact && part.exact;
    for (std::size_t i = 0; i < members.size(); ++i) side[members[i]] = part.witness[i];
  }
  out.value = cut_of(g, out.witness);
  return out;
}

// ---------------------------------------------------------------------------
// MIS

Solution exact_mis_exhaustive(const graph::GraphSnapshot& g) {
  const int n = g.node_count;
  if (n > kMisEnumerationLimit)
    throw CapacityError("exhaustive MIS supports at most " + std::to_string(kMisEnumerationLimit) + " nodes");
  const auto adj = g.adjacency();
  std::vector<int> in(static_cast<std::size_t>(n), 0);
  long long size = 0, violations = 0, best_size = 0;
  std::uint64_t best_code = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < count; ++i) {
    const int k = std::countr_zero(i);
    long long touching = 0;
    for (int nb : adj[k]) touching += in[nb];
    if (in[k]) {
      in[k] = 0;
      --size;
      violations -= touching;
    } else {
      in[k] = 1;
      ++size;
      violations += touching;
    }
    if (violations == 0 && size > best_size) {
      best_size = size;
      best_code = i ^ (i >> 1);
    }
  }
  Solution out{static_cast<double>(best_size), std::vector<int>(static_cast<std::size_t>(n), 0), true};
  for (int v = 0; v < n; ++v) out.witness[v] = static_cast<int>((best_code >> v) & 1U);
  return out;
}

namespace {

// Maximum clique on the complement graph, bitsets of up to 64 nodes. A greedy
// coloring of the complement (a clique cover of g) bounds the set size.
class MisSearch {
 public:
  explicit MisSearch(const graph::GraphSnapshot& g) : n_(g.node_count), compl_(static_cast<std::size_t>(n_)) {
    const std::uint64_t all = n_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1;
    for (int v = 0; v < n_; ++v) compl_[v] = all & ~(std::uint64_t{1} << v);
    for (const auto& e : g.edges) {
      compl_[e.u] &= ~(std::uint64_t{1} << e.v);
      compl_[e.v] &= ~(std::uint64_t{1} << e.u);
    }
  }

  std::uint64_t run() {
    const std::uint64_t all = n_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1;
    expand(0, 0, all);
    return best_set_;
  }

 private:
  void expand(std::uint64_t current, int size, std::uint64_t candidates) {
    // Color classes: vertices pairwise non-adjacent in the complement.
    std::vector<int> order;
    std::vector<int> colors;
    std::uint64_t uncolored = candidates;
    int color = 0;
    while (uncolored) {
      ++color;
      std::uint64_t avail = uncolored;
      while (avail) {
        const int v = std::countr_zero(avail);
        avail &= avail - 1;
        avail &= ~compl_[v];
        uncolored &= ~(std::uint64_t{1} << v);
        order.push_back(v);
        colors.push_back(color);
      }
    }
    for (int idx = static_cast<int>(order.size()) - 1; idx >= 0; --idx) {
      if (size + colors[idx] <= best_size_) return;
      const int v = order[idx];
      const std::uint64_t bit = std::uint64_t{1} << v;
      const std::uint64_t next = candidates & compl_[v];
      if (next == 0) {
        if (size + 1 > best_size_) {
          best_size_ = size + 1;
          best_set_ = current | bit;
        }
      } else {
        expand(current | bit, size + 1, next);
      }
      candidates &= ~bit;
    }
  }

  int n_;
  std::vector<std::uint64_t> compl_;
  int best_size_ = 0;
  std::uint64_t best_set_ = 0;
};

}  // namespace

Solution exact_mis(const graph::GraphSnapshot& g) {
  const int n = g.node_count;
  if (n > kMisBranchAndBoundLimit)
    throw CapacityError("MIS branch and bound supports at most " + std::to_string(kMisBranchAndBoundLimit) +
                        " nodes, got " + std::to_string(n));
  Solution out{0.0, std::vector<int>(static_cast<std::size_t>(n), 0), true};
  if (n == 0) return out;
  const std::uint64_t set = MisSearch(g).run();
  for (int v = 0; v < n; ++v) out.witness[v] = static_cast<int>((set >> v) & 1U);
  out.value = static_cast<double>(std::popcount(set));
  return out;
}

// ---------------------------------------------------------------------------
// TSP

Solution exact_tsp_held_karp(const graph::DistanceMatrix& dist) {
  const int n = dist.n;
  if (n > kHeldKarpLimit)
    throw CapacityError("Held-Karp supports at most " + std::to_string(kHeldKarpLimit) + " nodes, got " +
                        std::to_string(n));
  if (n < 1) throw InvalidArgument("empty distance matrix");
  Solution out;
  if (n <= 3) {
    out.witness.resize(static_cast<std::size_t>(n));
    std::iota(out.witness.begin(), out.witness.end(), 0);
    out.value = 0.0;
    for (int v = 0; v < n; ++v) out.value += dist(out.witness[v], out.witness[(v + 1) % n]);
    return out;
  }
  // Subsets of nodes 1..n-1; dp[mask][j] = shortest path 0 -> ... -> j covering mask.
  const int m = n - 1;
  const std::size_t subsets = std::size_t{1} << m;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(subsets * m, inf);
  std::vector<std::int8_t> parent(subsets * m, -1);
  for (int j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = dist(0, j + 1);
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const double here = dp[mask * m + j];
      if (here == inf) continue;
      for (int k = 0; k < m; ++k) {
        if (mask & (std::size_t{1} << k)) continue;
        const std::size_t next = mask | (std::size_t{1} << k);
        const double cand = here + dist(j + 1, k + 1);
        if (cand < dp[next * m + k]) {
          dp[next * m + k] = cand;
          parent[next * m + k] = static_cast<std::int8_t>(j);
        }
      }
    }
  }
  const std::size_t full = subsets - 1;
  int last = 0;
  double best = inf;
  for (int j = 0; j < m; ++j) {
    const double cand = dp[full * m + j] + dist(j + 1, 0);
    if (cand < best) {
      best = cand;
      last = j;
    }
  }
  std::vector<int> rev;
  std::size_t mask = full;
  for (int j = last; j >= 0;) {
    rev.push_back(j + 1);
    const int p = parent[mask * m + j];
    mask &= ~(std::size_t{1} << j);
    j = p;
  }
  out.witness.push_back(0);
  out.witness.insert(out.witness.end(), rev.rbegin(), rev.rend());
  out.value = 0.0;
  for (int v = 0; v < n; ++v) out.value += dist(out.witness[v], out.witness[(v + 1) % n]);
  return out;
}

Solution solve_snapshot(Problem problem, const graph::GraphSnapshot& g, std::uint64_t seed) {
  switch (problem) {
    case Problem::MaxCut:
      return reference_maxcut(g, seed);
    case Problem::Mis:
      return g.node_count <= kMisEnumerationLimit ? exact_mis_exhaustive(g) : exact_mis(g);
    case Problem::Tsp:
      return exact_tsp_held_karp(graph::distance_matrix(g));
  }
  throw InvalidArgument("unknown problem");
}

// ---------------------------------------------------------------------------
// Baselines and ratios

std::vector<int> greedy_cut_assignment(const graph::GraphSnapshot& g) {
  const auto adj = weighted_adjacency(g);
  std::vector<int> side(static_cast<std::size_t>(g.node_count), -1);
  for (int v = 0; v < g.node_count; ++v) {
    double to_zero = 0.0, to_one = 0.0;  // weight cut if v joins side 0 / side 1
    for (const auto& [nb, w] : adj.nbrs[v]) {
      if (side[nb] == 1) to_zero += w;
      if (side[nb] == 0) to_one += w;
    }
    side[v] = to_one > to_zero ? 1 : 0;
  }
  return side;
}

double greedy_cut_baseline(const graph::GraphSnapshot& g) { return cut_of(g, greedy_cut_assignment(g)); }

std::vector<int> greedy_tour(const graph::DistanceMatrix& dist) {
  const int n = dist.n;
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<int> tour{0};
  visited[0] = 1;
  for (int step = 1; step < n; ++step) {
    const int cur = tour.back();
    int best = -1;
    for (int j = 0; j < n; ++j)
      if (!visited[j] && (best < 0 || dist(cur, j) < dist(cur, best))) best = j;
    visited[best] = 1;
    tour.push_back(best);
  }
  return tour;
}

double greedy_tour_baseline(const graph::DistanceMatrix& dist) {
  const auto tour = greedy_tour(dist);
  double len = 0.0;
  for (std::size_t v = 0; v < tour.size(); ++v) len += dist(tour[v], tour[(v + 1) % tour.size()]);
  return len;
}

double approximation_ratio(double achieved, double optimum) {
  if (optimum == 0.0) throw InvalidArgument("approximation ratio undefined for a zero optimum");
  return achieved / optimum;
}

double mean_apr(std::span<const double> achieved, std::span<const double> optima) {
  if (achieved.size() != optima.size() || achieved.empty())
    throw InvalidArgument("mean ApR needs matching, nonempty value lists");
  double sum = 0.0;
  for (std::size_t t = 0; t < achieved.size(); ++t) sum += approximation_ratio(achieved[t], optima[t]);
  return sum / static_cast<double>(achieved.size());
}

// ---------------------------------------------------------------------------
// Cache

std::string instance_hash(const graph::DynamicInstance& inst) {
  // FNV-1a over the canonical JSON dump.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : graph::to_json(inst).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t fill_cache(Cache& cache, const graph::DynamicInstance& inst, bool include_first,
                       std::uint64_t seed) {
  const auto hash = instance_hash(inst);
  if (cache.instance_hash != hash) {
    cache = Cache{hash, inst.problem, {}};
  }
  std::size_t computed = 0;
  for (std::size_t t = include_first ? 0 : 1; t < inst.snapshots.size(); ++t) {
    const int key = static_cast<int>(t) + 1;
    if (cache.snapshots.count(key)) continue;
    cache.snapshots[key] = solve_snapshot(inst.problem, inst.snapshots[t], seed + t);
    ++computed;
  }
  return computed;
}

void save_cache(const Cache& cache, const std::string& path) {
  nlohmann::json snaps = nlohmann::json::object();
  for (const auto& [t, s] : cache.snapshots)
    snaps[std::to_string(t)] = {{"optimal", s.value}, {"witness", s.witness}, {"exact", s.exact}};
  const nlohmann::json j = {{"instance_hash", cache.instance_hash},
                            {"problem", to_string(cache.problem)},
                            {"snapshots", std::move(snaps)}};
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

Cache load_cache(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  Cache cache;
  try {
    const auto j = nlohmann::json::parse(in);
    cache.instance_hash = j.at("instance_hash").get<std::string>();
    cache.problem = parse_problem(j.at("problem").get<std::string>());
    for (const auto& [key, s] : j.at("snapshots").items()) {
      cache.snapshots[std::stoi(key)] = {s.at("optimal").get<double>(), s.at("witness").get<std::vector<int>>(),
                                         s.value("exact", true)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed oracle cache: ") + e.what());
  }
  return cache;
}

}  // namespace dyco::oracle
