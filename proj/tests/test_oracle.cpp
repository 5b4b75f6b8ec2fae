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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dyco/error.hpp"
#include "dyco/oracle.hpp"
#include "dyco/qubo.hpp"
#include "support.hpp"

using namespace dyco;
using namespace dyco::oracle;

namespace {

graph::GraphSnapshot cycle(int n) {
  std::vector<graph::Edge> e;
  for (int i = 0; i < n; ++i) e.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
  return graph::make_snapshot(n, e);
}

graph::DistanceMatrix from_points(std::vector<graph::Point> pts, bool round = true) {
  graph::TspNodeSet nodes;
  nodes.coords = std::move(pts);
  return graph::distance_matrix(nodes, {.round_euclidean = round});
}

}  // namespace

TEST_CASE("exact MaxCut on small graphs") {
  CHECK(exact_maxcut(graph::make_snapshot(3, {{0, 1}, {1, 2}, {0, 2}})).value == 2);
  CHECK(exact_maxcut(cycle(5)).value == 4);
  CHECK(exact_maxcut(cycle(6)).value == 6);
  CHECK(exact_maxcut(graph::make_snapshot(4, {})).value == 0);
  const auto s = exact_maxcut(cycle(5));
  CHECK(qubo::cut_value(cycle(5), s.witness) == 4);
  CHECK(s.exact);
}

TEST_CASE("exact MIS on small graphs") {
  CHECK(exact_mis(graph::make_snapshot(2, {{0, 1}})).value == 1);
  CHECK(exact_mis(cycle(5)).value == 2);
  CHECK(exact_mis(graph::make_snapshot(6, {})).value == 6);
  CHECK(exact_mis_exhaustive(cycle(7)).value == 3);
}

TEST_CASE("MIS branch and bound agrees with enumeration") {
  for (int seed = 0; seed < 25; ++seed) {
    const auto g = testing::random_graph(14, 0.25, seed);
    const auto a = exact_mis(g), b = exact_mis_exhaustive(g);
    CHECK(a.value == b.value);
    CHECK(qubo::violated_edges(g, a.witness) == 0);
    int size = 0;
    for (int x : a.witness) size += x;
    CHECK(size == a.value);
  }
}

TEST_CASE("Held-Karp small fixtures") {
  CHECK(exact_tsp_held_karp(from_points({{0, 0}, {3, 0}, {0, 4}})).value == 12);
  CHECK(exact_tsp_held_karp(from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, false)).value == doctest::Approx(4.0));
  CHECK(exact_tsp_held_karp(from_points({{0, 0}})).value == 0);
  CHECK(exact_tsp_held_karp(from_points({{0, 0}, {3, 4}})).value == 10);
}

TEST_CASE("Held-Karp equals permutation enumeration") {
  for (int seed = 0; seed < 10; ++seed) {
    const auto dist = testing::random_distances(3 + seed % 6, seed);
    const auto hk = exact_tsp_held_karp(dist);
    CHECK(hk.value == testing::brute_force_tour(dist));
    CHECK(qubo::tour_length(dist, hk.witness) == hk.value);
  }
}

TEST_CASE("burma14 optimum") {
  const auto nodes = graph::parse_tsplib_file(std::string(DYCO_TEST_DATA) + "/burma14.tsp");
  CHECK(exact_tsp_held_karp(graph::distance_matrix(nodes)).value == 3323);
  CHECK(greedy_tour_baseline(graph::distance_matrix(nodes)) == 4048);
}

TEST_CASE("nearest neighbour is never better than the optimum") {
  bool strictly_worse = false;
  for (int seed = 0; seed < 20; ++seed) {
    const auto dist = testing::random_distances(8, 100 + seed);
    const double nn = greedy_tour_baseline(dist);
    const double opt = exact_tsp_held_karp(dist).value;
    CHECK(nn >= opt);
    strictly_worse = strictly_worse || nn > opt;
    CHECK(qubo::is_permutation(greedy_tour(dist), 8));
  }
  CHECK(strictly_worse);
}

TEST_CASE("greedy cut baseline") {
  CHECK(greedy_cut_baseline(graph::make_snapshot(3, {{0, 1}, {1, 2}, {0, 2}})) == 2);
  CHECK(greedy_cut_baseline(graph::make_snapshot(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}})) == 4);
  for (int seed = 0; seed < 10; ++seed) {
    const auto g = testing::random_graph(12, 0.4, seed);
    const double greedy = greedy_cut_baseline(g);
    CHECK(greedy <= exact_maxcut(g).value);
    CHECK(2 * greedy >= static_cast<double>(g.edge_count()));
  }
}

TEST_CASE("reference MaxCut for large graphs is a lower bound with a valid witness") {
  const auto g = testing::random_graph(40, 0.2, 9);
  const auto s = solve_snapshot(Problem::MaxCut, g, 1);
  CHECK_FALSE(s.exact);
  CHECK(qubo::cut_value(g, s.witness) == s.value);
  CHECK(s.value >= greedy_cut_baseline(g));
  const auto small = testing::random_graph(12, 0.4, 9);
  CHECK(solve_snapshot(Problem::MaxCut, small).value == exact_maxcut(small).value);
}

TEST_CASE("capacity limits") {
  CHECK_THROWS_AS(exact_maxcut(graph::make_snapshot(kMaxCutEnumerationLimit + 1, {})), CapacityError);
  CHECK_THROWS_AS(exact_mis_exhaustive(graph::make_snapshot(kMisEnumerationLimit + 1, {})), CapacityError);
  CHECK_THROWS_AS(exact_mis(graph::make_snapshot(kMisBranchAndBoundLimit + 1, {})), CapacityError);
  CHECK_THROWS_AS(exact_tsp_held_karp(testing::random_distances(kHeldKarpLimit + 1, 1)), CapacityError);
}

TEST_CASE("approximation ratios") {
  const std::vector<double> cut{8, 9}, cut_opt{10, 10};
  CHECK(mean_apr(cut, cut_opt) == doctest::Approx(0.85));
  const std::vector<double> tour{105, 110}, tour_opt{100, 100};
  CHECK(mean_apr(tour, tour_opt) == doctest::Approx(1.075));
  CHECK_THROWS_AS(approximation_ratio(1, 0), InvalidArgument);
  CHECK_THROWS_AS(mean_apr(cut, std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("oracle cache round trip") {
  graph::DynamicInstance inst;
  inst.problem = Problem::MaxCut;
  inst.snapshots = {cycle(5), cycle(6)};
  Cache cache;
  CHECK(fill_cache(cache, inst) == 2);
  CHECK(fill_cache(cache, inst) == 0);
  CHECK(cache.snapshots.at(1).value == 4);
  CHECK(cache.instance_hash == instance_hash(inst));

  const auto path = (std::filesystem::temp_directory_path() / "dyco_oracle_cache_test.json").string();
  save_cache(cache, path);
  const auto loaded = load_cache(path);
  std::filesystem::remove(path);
  CHECK(loaded.instance_hash == cache.instance_hash);
  CHECK(loaded.snapshots.at(2).value == 6);
  CHECK(loaded.snapshots.at(2).witness == cache.snapshots.at(2).witness);

  Cache partial;
  CHECK(fill_cache(partial, inst, false) == 1);
  CHECK(partial.snapshots.count(1) == 0);
  CHECK_THROWS_AS(load_cache("/nonexistent/oracle.json"), ParseError);
}

TEST_CASE("instance hash depends on content") {
  graph::DynamicInstance a;
  a.snapshots = {cycle(5)};
  auto b = a;
  b.snapshots[0].weights[0] = 2.0;
  CHECK(instance_hash(a) == instance_hash(a));
  CHECK(instance_hash(a) != instance_hash(b));
}
