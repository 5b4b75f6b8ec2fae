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
#include "dyco/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dyco/error.hpp"
#include "dyco/log.hpp"

namespace dyco {

std::string_view to_string(Problem p) {
  switch (p) {
    case Problem::MaxCut:
      return "maxcut";
    case Problem::Mis:
      return "mis";
    case Problem::Tsp:
      return "tsp";
  }
  return "?";
}

Problem parse_problem(std::string_view s) {
  if (s == "maxcut") return Problem::MaxCut;
  if (s == "mis") return Problem::Mis;
  if (s == "tsp") return Problem::Tsp;
  throw InvalidArgument("unknown problem '" + std::string(s) + "'");
}

namespace graph {

namespace {

std::uint64_t pair_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

}  // namespace

void GraphSnapshot::validate() const {
  if (node_count < 0) throw InvariantError("negative node count");
  if (weights.size() != edges.size())
    throw InvariantError("weights length does not match edge count");
  std::set<std::uint64_t> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [u, v] = edges[k];
    if (u < 0 || v < 0 || u >= node_count || v >= node_count)
      throw InvariantError("edge endpoint out of range");
    if (u == v) throw InvariantError("self-loop on node " + std::to_string(u));
    if (!seen.insert(pair_key(u, v)).second)
      throw InvariantError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k]))
      throw InvariantError("edge weight must be finite and nonnegative");
  }
}

std::vector<std::vector<int>> GraphSnapshot::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
  for (const auto& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

GraphSnapshot make_snapshot(int node_count, std::vector<Edge> edges) {
  GraphSnapshot g;
  g.node_count = node_count;
  g.weights.assign(edges.size(), 1.0);
  g.edges = std::move(edges);
  g.validate();
  return g;
}

double DistanceMatrix::max_entry() const noexcept {
  double m = 0.0;
  for (double x : d) m = std::max(m, x);
  return m;
}

GraphSnapshot complete_graph(const DistanceMatrix& dist) {
  GraphSnapshot g;
  g.node_count = dist.n;
  for (int i = 0; i < dist.n; ++i) {
    for (int j = i + 1; j < dist.n; ++j) {
      g.edges.push_back({i, j});
      g.weights.push_back(dist(i, j));
    }
  }
  return g;
}

DistanceMatrix distance_matrix(const GraphSnapshot& g) {
  const auto n = static_cast<std::size_t>(g.node_count);
  if (g.edges.size() != n * (n - 1) / 2)
    throw InvalidArgument("TSP snapshot is not a complete graph");
  DistanceMatrix dist{g.node_count, std::vector<double>(n * n, 0.0)};
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto [u, v] = g.edges[k];
    dist(u, v) = g.weights[k];
    dist(v, u) = g.weights[k];
  }
  return dist;
}

void DynamicInstance::validate() const {
  if (snapshots.empty()) throw InvariantError("dynamic instance needs at least one snapshot");
  for (const auto& s : snapshots) s.validate();
  if (problem == Problem::Tsp) {
    const auto& first = snapshots.front();
    for (const auto& s : snapshots) {
      if (s.node_count != first.node_count || s.edges != first.edges)
        throw InvariantError("TSP snapshots must share node and edge sets");
    }
    (void)distance_matrix(first);
  }
}

// ---------------------------------------------------------------------------
// Temporal edge lists

TemporalEdgeList ingest_temporal_edges(std::istream& in) {
  struct Raw {
    long long u, v;
    double w, ts;
  };
  std::vector<Raw> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '%' || line[first] == '#') continue;

    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.size() < 2 || tokens.size() > 4)
      throw ParseError("expected 'u v [weight] [timestamp]'", line_no);

    auto to_number = [&](const std::string& tok) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(value))
        throw ParseError("non-numeric token '" + tok + "'", line_no);
      return value;
    };
    auto to_id = [&](const std::string& tok) {
      const double value = to_number(tok);
      if (value != std::floor(value)) throw ParseError("node id '" + tok + "' is not an integer", line_no);
      return static_cast<long long>(value);
    };

    Raw r{to_id(tokens[0]), to_id(tokens[1]), 1.0, static_cast<double>(raw.size())};
    if (tokens.size() >= 3) r.w = to_number(tokens[2]);
    if (tokens.size() == 4) r.ts = to_number(tokens[3]);
    raw.push_back(r);
  }
  if (raw.empty()) throw ParseError("empty temporal edge list");

  std::stable_sort(raw.begin(), raw.end(),
                   [](const Raw& a, const Raw& b) { return a.ts < b.ts; });

  TemporalEdgeList out;
  std::unordered_map<long long, int> ids;
  std::set<std::pair<long long, long long>> seen;
  auto dense = [&](long long id) {
    auto [it, inserted] = ids.try_emplace(id, static_cast<int>(ids.size()));
    return it->second;
  };
  for (const auto& r : raw) {
    if (r.u == r.v) continue;
    if (!seen.insert(std::minmax(r.u, r.v)).second) continue;
    const int u = dense(r.u);
    const int v = dense(r.v);
    out.events.push_back({u, v, r.w, r.ts});
  }
  out.node_count = static_cast<int>(ids.size());
  return out;
}

TemporalEdgeList ingest_temporal_edges_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return ingest_temporal_edges(in);
}

void write_temporal_edges(std::ostream& out, const TemporalEdgeList& edges) {
  const auto old_precision = out.precision(17);
  for (const auto& e : edges.events) out << e.u << ' ' << e.v << ' ' << e.weight << ' ' << e.timestamp << '\n';
  out.precision(old_precision);
}

std::vector<std::size_t> growth_sizes(std::size_t total_edges, int snapshots,
                                      double fraction_per_step) {
  if (snapshots < 1) throw InvalidArgument("number of snapshots must be >= 1");
  if (!(fraction_per_step > 0.0 && fraction_per_step <= 1.0))
    throw InvalidArgument("fraction per step must lie in (0, 1]");
  if (fraction_per_step * snapshots < 1.0 - 1e-9)
    throw InvalidArgument("fraction per step times snapshots must be >= 1");

  const double total = static_cast<double>(total_edges);
  std::vector<std::size_t> sizes;
  for (int t = 1; t <= snapshots; ++t) {
    // Round half up; the epsilon absorbs representation error such as 24.4999...
    const double target = std::floor(t * fraction_per_step * total + 0.5 + 1e-9);
    sizes.push_back(static_cast<std::size_t>(std::clamp(target, 0.0, total)));
  }
  sizes.back() = total_edges;
  return sizes;
}

namespace {

GraphSnapshot prefix_snapshot(const TemporalEdgeList& edges, std::size_t count) {
  GraphSnapshot g;
  g.node_count = edges.node_count;
  g.edges.reserve(count);
  for (std::size_t k = 0; k < count; ++k) g.edges.push_back({edges.events[k].u, edges.events[k].v});
  g.weights.assign(count, 1.0);
  return g;
}

}  // namespace

DynamicInstance build_growth_snapshots(const TemporalEdgeList& edges, int snapshots,
                                       double fraction_per_step, Problem problem) {
  const auto sizes = growth_sizes(edges.events.size(), snapshots, fraction_per_step);
  DynamicInstance inst;
  inst.problem = problem;
  for (auto count : sizes) inst.snapshots.push_back(prefix_snapshot(edges, count));
  inst.validate();
  return inst;
}

DynamicInstance build_deletion_snapshots(const TemporalEdgeList& edges, int snapshots,
                                         double fraction_per_step, Problem problem) {
  auto inst = build_growth_snapshots(edges, snapshots, fraction_per_step, problem);
  std::reverse(inst.snapshots.begin(), inst.snapshots.end());
  return inst;
}

TemporalEdgeList random_temporal_graph(int node_count, std::size_t edge_count,
                                       std::uint64_t seed) {
  const auto max_edges = static_cast<std::size_t>(node_count) * (node_count - 1) / 2;
  if (node_count < 2 || edge_count > max_edges)
    throw InvalidArgument("cannot place that many edges on that many nodes");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, node_count - 1);
  std::set<std::uint64_t> seen;
  TemporalEdgeList out;
  out.node_count = node_count;
  while (out.events.size() < edge_count) {
    const int u = pick(rng);
    const int v = pick(rng);
    if (u == v || !seen.insert(pair_key(u, v)).second) continue;
    out.events.push_back({u, v, 1.0, static_cast<double>(out.events.size())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// TSPLIB

namespace {

// TSPLIB's reference implementation uses this truncated constant.
constexpr double kTsplibPi = 3.141592;
constexpr double kEarthRadius = 6378.388;

double geo_radians(double coord) {
  const double deg = std::trunc(coord);
  const double min = coord - deg;
  return kTsplibPi * (deg + 5.0 * min / 3.0) / 180.0;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double tsplib_distance(Metric metric, const Point& a, const Point& b,
                       const DistanceOptions& opts) {
  if (metric == Metric::Euc2D) {
    const double d = std::hypot(a.x - b.x, a.y - b.y);
    return opts.round_euclidean ? std::floor(d + 0.5) : d;
  }
  const double lat_i = geo_radians(a.x), lon_i = geo_radians(a.y);
  const double lat_j = geo_radians(b.x), lon_j = geo_radians(b.y);
  const double q1 = std::cos(lon_i - lon_j);
  const double q2 = std::cos(lat_i - lat_j);
  const double q3 = std::cos(lat_i + lat_j);
  const double arg = std::clamp(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0);
  return std::floor(kEarthRadius * std::acos(arg) + 1.0);
}

DistanceMatrix distance_matrix(const TspNodeSet& nodes, const DistanceOptions& opts) {
  const int n = static_cast<int>(nodes.coords.size());
  DistanceMatrix dist{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = tsplib_distance(nodes.metric, nodes.coords[i], nodes.coords[j], opts);
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

TspNodeSet parse_tsplib(std::istream& in) {
  TspNodeSet out;
  bool have_metric = false;
  bool in_coords = false;
  bool have_section = false;
  long long dimension = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line == "EOF") break;
    if (in_coords) {
      std::istringstream fields(line);
      long long index = 0;
      Point p;
      if (!(fields >> index >> p.x >> p.y)) {
        // A new keyword ends the section.
        if (std::isalpha(static_cast<unsigned char>(line[0]))) {
          in_coords = false;
        } else {
          throw ParseError("malformed NODE_COORD_SECTION entry", line_no);
        }
      } else {
        out.coords.push_back(p);
        continue;
      }
    }
    if (line.rfind("NODE_COORD_SECTION", 0) == 0) {
      in_coords = true;
      have_section = true;
      continue;
    }
    const auto colon = line.find(':');
    const std::string key = trim(line.substr(0, colon));
    const std::string value = colon == std::string::npos ? std::string{} : trim(line.substr(colon + 1));
    if (key == "NAME") {
      out.name = value;
    } else if (key == "DIMENSION") {
      try {
        dimension = std::stoll(value);
      } catch (const std::exception&) {
        throw ParseError("bad DIMENSION '" + value + "'", line_no);
      }
    } else if (key == "EDGE_WEIGHT_TYPE") {
      if (value == "EUC_2D") {
        out.metric = Metric::Euc2D;
      } else if (value == "GEO") {
        out.metric = Metric::Geo;
      } else {
        throw UnsupportedFormat("unsupported EDGE_WEIGHT_TYPE '" + value + "'", line_no);
      }
      have_metric = true;
    } else if (key == "EDGE_WEIGHT_SECTION" || key == "DISPLAY_DATA_SECTION") {
      throw UnsupportedFormat("unsupported section '" + key + "'", line_no);
    }
  }
  if (!have_metric) throw ParseError("missing EDGE_WEIGHT_TYPE");
  if (!have_section) throw ParseError("missing NODE_COORD_SECTION");
  if (dimension >= 0 && static_cast<std::size_t>(dimension) != out.coords.size())
    throw ParseError("DIMENSION " + std::to_string(dimension) + " does not match " +
                     std::to_string(out.coords.size()) + " coordinates");
  if (out.coords.size() < 3) throw ParseError("a TSP instance needs at least 3 nodes");
  return out;
}

TspNodeSet parse_tsplib_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_tsplib(in);
}

DynamicInstance build_moving_node_instance(const TspNodeSet& base, Point start, Point end,
                                           int snapshots, const DistanceOptions& opts) {
  if (snapshots < 2) throw InvalidArgument("moving-node instances need at least 2 snapshots");
  if (base.coords.size() < 3) throw InvalidArgument("base node set needs at least 3 nodes");

  auto [min_x, max_x] = std::minmax_element(base.coords.begin(), base.coords.end(),
                                            [](auto& a, auto& b) { return a.x < b.x; });
  auto [min_y, max_y] = std::minmax_element(base.coords.begin(), base.coords.end(),
                                            [](auto& a, auto& b) { return a.y < b.y; });
  for (const Point& p : {start, end}) {
    if (p.x < min_x->x || p.x > max_x->x || p.y < min_y->y || p.y > max_y->y)
      log_warning("moving-node endpoint lies outside the bounding box of the base nodes");
  }

  DynamicInstance inst;
  inst.problem = Problem::Tsp;
  TspNodeSet nodes = base;
  nodes.coords.push_back(start);
  for (int t = 0; t < snapshots; ++t) {
    const double s = static_cast<double>(t) / (snapshots - 1);
    nodes.coords.back() = {start.x + s * (end.x - start.x), start.y + s * (end.y - start.y)};
    inst.snapshots.push_back(complete_graph(distance_matrix(nodes, opts)));
  }
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const DynamicInstance& inst) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : inst.snapshots) {
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t k = 0; k < s.edges.size(); ++k)
      edges.push_back({s.edges[k].u, s.edges[k].v, s.weights[k]});
    snaps.push_back({{"n", s.node_count}, {"edges", std::move(edges)}});
  }
  return {{"problem", to_string(inst.problem)},
          {"T", inst.snapshots.size()},
          {"snapshots", std::move(snaps)}};
}

DynamicInstance instance_from_json(const nlohmann::json& j) {
  DynamicInstance inst;
  try {
    inst.problem = parse_problem(j.at("problem").get<std::string>());
    for (const auto& s : j.at("snapshots")) {
      GraphSnapshot g;
      g.node_count = s.at("n").get<int>();
      for (const auto& e : s.at("edges")) {
        g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        g.weights.push_back(e.at(2).get<double>());
      }
      inst.snapshots.push_back(std::move(g));
    }
    if (j.contains("T") && j.at("T").get<std::size_t>() != inst.snapshots.size())
      throw ParseError("T does not match the number of snapshots");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance JSON: ") + e.what());
  }
  try {
    inst.validate();
  } catch (const InvariantError& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
  return inst;
}

void save_instance(const DynamicInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << to_json(inst).dump() << '\n';
}

DynamicInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return instance_from_json(j);
}

}  // namespace graph
}  // namespace dyco
