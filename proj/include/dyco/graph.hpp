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
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace dyco {

enum class Problem { MaxCut, Mis, Tsp };

std::string_view to_string(Problem p);
Problem parse_problem(std::string_view s);

namespace graph {

struct Edge {
  int u = 0;
  int v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One timestamped graph. Edges are undirected, 0-based and unique.
struct GraphSnapshot {
  int node_count = 0;
  std::vector<Edge> edges;
  std::vector<double> weights;

  /// Throws InvariantError on self-loops, duplicates, out-of-range endpoints,
  /// negative weights or a weights/edges length mismatch.
  void validate() const;

  std::size_t edge_count() const noexcept { return edges.size(); }

  /// Adjacency lists; neighbor order follows edge order.
  std::vector<std::vector<int>> adjacency() const;

  friend bool operator==(const GraphSnapshot&, const GraphSnapshot&) = default;
};

GraphSnapshot make_snapshot(int node_count, std::vector<Edge> edges);

/// Dense n x n distance matrix, row-major.
struct DistanceMatrix {
  int n = 0;
  std::vector<double> d;

  double operator()(int i, int j) const noexcept {
    return d[static_cast<std::size_t>(i) * n + j];
  }
  double& operator()(int i, int j) noexcept {
    return d[static_cast<std::size_t>(i) * n + j];
  }
  double max_entry() const noexcept;
};

/// Complete-graph snapshot whose edge weights are the distances.
GraphSnapshot complete_graph(const DistanceMatrix& dist);

/// Inverse of complete_graph. Throws if the snapshot is not complete.
DistanceMatrix distance_matrix(const GraphSnapshot& g);

struct DynamicInstance {
  Problem problem = Problem::MaxCut;
  std::vector<GraphSnapshot> snapshots;

  std::size_t size() const noexcept { return snapshots.size(); }
  void validate() const;
};

struct TemporalEdge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
  double timestamp = 0.0;
  friend bool operator==(const TemporalEdge&, const TemporalEdge&) = default;
};

struct TemporalEdgeList {
  int node_count = 0;
  std::vector<TemporalEdge> events;
  friend bool operator==(const TemporalEdgeList&, const TemporalEdgeList&) = default;
};

/// Reads a KONECT-style `u v [w] [ts]` list. Events are sorted by timestamp
/// (stable), self-loops and later duplicates of an undirected pair are dropped,
/// and node ids are remapped densely in order of first appearance.
TemporalEdgeList ingest_temporal_edges(std::istream& in);
TemporalEdgeList ingest_temporal_edges_file(const std::string& path);

/// Writes `u v w ts` lines that ingest back to an identical list.
void write_temporal_edges(std::ostream& out, const TemporalEdgeList& edges);

/// Number of edges in snapshot t (1-based): round-half-up of t * fraction * |E|,
/// with the last snapshot forced to the cumulative target.
std::vector<std::size_t> growth_sizes(std::size_t total_edges, int snapshots,
                                      double fraction_per_step);

DynamicInstance build_growth_snapshots(const TemporalEdgeList& edges, int snapshots,
                                       double fraction_per_step,
                                       Problem problem = Problem::MaxCut);

/// Reverse of the growth sequence: snapshot 1 is the largest graph.
DynamicInstance build_deletion_snapshots(const TemporalEdgeList& edges, int snapshots,
                                         double fraction_per_step,
                                         Problem problem = Problem::Mis);

/// Erdos-Renyi style random temporal edge list with `edge_count` distinct edges
/// arriving in random order. Used for synthetic benchmarks.
TemporalEdgeList random_temporal_graph(int node_count, std::size_t edge_count,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// TSP

enum class Metric { Euc2D, Geo };

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct TspNodeSet {
  std::string name;
  Metric metric = Metric::Euc2D;
  std::vector<Point> coords;
};

struct DistanceOptions {
  /// TSPLIB nint() rounding for EUC_2D. GEO distances are always integral.
  bool round_euclidean = true;
};

double tsplib_distance(Metric metric, const Point& a, const Point& b,
                       const DistanceOptions& opts = {});

DistanceMatrix distance_matrix(const TspNodeSet& nodes, const DistanceOptions& opts = {});

TspNodeSet parse_tsplib(std::istream& in);
TspNodeSet parse_tsplib_file(const std::string& path);

/// Appends a node that moves on the segment start -> end, one position per
/// snapshot. The moving node takes the last index.
DynamicInstance build_moving_node_instance(const TspNodeSet& base, Point start, Point end,
                                           int snapshots, const DistanceOptions& opts = {});

// ---------------------------------------------------------------------------
// Serialization: {problem, T, snapshots: [{n, edges: [[i, j, w], ...]}]}

nlohmann::json to_json(const DynamicInstance& inst);
DynamicInstance instance_from_json(const nlohmann::json& j);

void save_instance(const DynamicInstance& inst, const std::string& path);
DynamicInstance load_instance(const std::string& path);

}  // namespace graph
}  // namespace dyco
