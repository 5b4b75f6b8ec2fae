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
#include "dyco/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "dyco/error.hpp"

namespace dyco::qubo {

QuboInstance::QuboInstance(int dim, std::vector<Entry> upper, Problem problem, double penalty,
                           double offset)
    : dim_(dim), problem_(problem), penalty_(penalty), offset_(offset), upper_(std::move(upper)) {
  std::sort(upper_.begin(), upper_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> counts(static_cast<std::size_t>(dim_) + 1, 0);
  for (const auto& e : upper_) {
    if (e.row > e.col || e.row < 0 || e.col >= dim_) throw InvariantError("non-canonical QUBO entry");
    ++counts[e.row + 1];
    if (e.row != e.col) ++counts[e.col + 1];
  }
  for (int i = 0; i < dim_; ++i) counts[i + 1] += counts[i];
  row_ptr_ = counts;
  col_.resize(row_ptr_.back());
  val_.resize(row_ptr_.back());
  std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
  for (const auto& e : upper_) {
    col_[fill[e.row]] = e.col;
    val_[fill[e.row]++] = e.value;
    if (e.row != e.col) {
      col_[fill[e.col]] = e.row;
      val_[fill[e.col]++] = e.value;
    }
  }
}

double QuboInstance::at(int i, int j) const {
  for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
    if (col_[k] == j) return val_[k];
  return 0.0;
}

void QuboInstance::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < dim_; ++i) {
    double acc = 0.0;
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
    y[i] = acc;
  }
}

namespace {

// Accumulates canonical entries; a contribution c to the bilinear term
// x_a x_b (a != b) is stored as c / 2 on the symmetric pair.
class Builder {
 public:
  void diagonal(int i, double c) { map_[{i, i}] += c; }
  void pair(int a, int b, double c) {
    if (a > b) std::swap(a, b);
    map_[{a, b}] += 0.5 * c;
  }
  void symmetric(int a, int b, double q) {
    if (a > b) std::swap(a, b);
    map_[{a, b}] += q;
  }
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(map_.size());
    for (const auto& [key, value] : map_)
      if (value != 0.0) out.push_back({key.first, key.second, value});
    return out;
  }

 private:
  std::map<std::pair<int, int>, double> map_;
};

}  // namespace

QuboInstance build_maxcut_qubo(const graph::GraphSnapshot& g) {
  Builder b;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto [u, v] = g.edges[k];
    const double w = g.weights[k];
    b.symmetric(u, v, w);
    b.diagonal(u, -w);
    b.diagonal(v, -w);
  }
  QuboInstance q(g.node_count, b.entries(), Problem::MaxCut, 0.0, 0.0);
  q.graph = g;
  return q;
}

QuboInstance build_mis_qubo(const graph::GraphSnapshot& g, double m) {
  if (!(m > 0.0)) throw InvalidArgument("MIS penalty must be positive");
  Builder b;
  for (int i = 0; i < g.node_count; ++i) b.diagonal(i, -1.0);
  for (const auto& e : g.edges) b.symmetric(e.u, e.v, 0.5 * m);
  QuboInstance q(g.node_count, b.entries(), Problem::Mis, m, 0.0);
  q.graph = g;
  return q;
}

double default_tsp_penalty(const graph::DistanceMatrix& dist) { return 2.0 * dist.max_entry(); }

QuboInstance build_tsp_qubo(const graph::DistanceMatrix& dist, double m) {
  if (!(m > 0.0)) throw InvalidArgument("TSP penalty must be positive");
  const int n = dist.n;
  if (n < 2) throw InvalidArgument("TSP needs at least 2 nodes");
  for (int i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0) throw InvalidArgument("distance matrix must have a zero diagonal");
    for (int j = 0; j < n; ++j) {
      if (dist(i, j) < 0.0 || !std::isfinite(dist(i, j)))
        throw InvalidArgument("distances must be finite and nonnegative");
      if (dist(i, j) != dist(j, i)) throw InvalidArgument("distance matrix must be symmetric");
    }
  }
  auto idx = [n](int node, int step) { return node * n + step; };

  Builder b;
  // Tour: sum over ordered pairs i != j of w_ij X_{i,v} X_{j,v+1}.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || dist(i, j) == 0.0) continue;
      for (int v = 0; v < n; ++v) b.pair(idx(i, v), idx(j, (v + 1) % n), dist(i, j));
    }
  // m (1 - sum_v X_iv)^2 per node and m (1 - sum_i X_iv)^2 per step. On
  // binaries X^2 = X, so the -2m linear term and +m square term share the
  // diagonal; the constant m per squared term becomes the offset.
  for (int a = 0; a < n; ++a) {
    for (int s = 0; s < n; ++s) {
      b.diagonal(idx(a, s), -2.0 * m);
      for (int s2 = s + 1; s2 < n; ++s2) {
        b.pair(idx(a, s), idx(a, s2), 2.0 * m);  // same node, two steps
        b.pair(idx(s, a), idx(s2, a), 2.0 * m);  // same step, two nodes
      }
    }
  }
  QuboInstance q(n * n, b.entries(), Problem::Tsp, m, 2.0 * m * n);
  q.distances = dist;
  return q;
}

QuboInstance build_qubo(Problem problem, const graph::GraphSnapshot& g, double penalty) {
  switch (problem) {
    case Problem::MaxCut:
      return build_maxcut_qubo(g);
    case Problem::Mis:
      return build_mis_qubo(g, penalty > 0.0 ? penalty : 2.0);
    case Problem::Tsp: {
      const auto dist = graph::distance_matrix(g);
      return build_tsp_qubo(dist, penalty > 0.0 ? penalty : default_tsp_penalty(dist));
    }
  }
  throw InvalidArgument("unknown problem");
}

namespace {

void check_dim(const QuboInstance& q, std::size_t size) {
  if (size != static_cast<std::size_t>(q.dim()))
    throw InvalidArgument("assignment length " + std::to_string(size) +
                          " does not match QUBO dimension " + std::to_string(q.dim()));
}

}  // namespace

double qubo_loss_and_grad(const QuboInstance& q, std::span<const double> x,
                          std::span<double> grad) {
  check_dim(q, x.size());
  check_dim(q, grad.size());
  q.multiply(x, grad);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    loss += x[i] * grad[i];
    grad[i] *= 2.0;
  }
  return loss + q.offset();
}

double qubo_loss(const QuboInstance& q, std::span<const double> x) {
  check_dim(q, x.size());
  std::vector<double> qx(x.size());
  q.multiply(x, qx);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) loss += x[i] * qx[i];
  return loss + q.offset();
}

std::vector<double> qubo_grad(const QuboInstance& q, std::span<const double> x) {
  check_dim(q, x.size());
  std::vector<double> g(x.size());
  q.multiply(x, g);
  for (auto& v : g) v *= 2.0;
  return g;
}

double cut_value(const graph::GraphSnapshot& g, std::span<const int> side) {
  double cut = 0.0;
  for (std::size_t k = 0; k < g.edges.size(); ++k)
    if ((side[g.edges[k].u] != 0) != (side[g.edges[k].v] != 0)) cut += g.weights[k];
  return cut;
}

std::size_t violated_edges(const graph::GraphSnapshot& g, std::span<const int> selected) {
  std::size_t count = 0;
  for (const auto& e : g.edges)
    if (selected[e.u] && selected[e.v]) ++count;
  return count;
}

bool is_permutation(std::span<const int> tour, int n) {
  if (tour.size() != static_cast<std::size_t>(n)) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v : tour) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

double tour_length(const graph::DistanceMatrix& dist, std::span<const int> tour) {
  if (!is_permutation(tour, dist.n)) throw InvalidArgument("tour is not a permutation");
  double len = 0.0;
  for (std::size_t v = 0; v < tour.size(); ++v) len += dist(tour[v], tour[(v + 1) % tour.size()]);
  return len;
}

std::vector<double> tour_to_assignment(std::span<const int> tour) {
  const auto n = tour.size();
  std::vector<double> x(n * n, 0.0);
  for (std::size_t v = 0; v < n; ++v) x[static_cast<std::size_t>(tour[v]) * n + v] = 1.0;
  return x;
}

double natural_objective(const QuboInstance& q, std::span<const int> x) {
  switch (q.problem()) {
    case Problem::MaxCut:
      check_dim(q, x.size());
      return cut_value(q.graph, x);
    case Problem::Mis: {
      check_dim(q, x.size());
      if (violated_edges(q.graph, x) != 0)
        throw InvalidArgument("MIS assignment has violated edges; repair it first");
      double size = 0.0;
      for (int v : x) size += v != 0 ? 1.0 : 0.0;
      return size;
    }
    case Problem::Tsp:
      return tour_length(q.distances, x);
  }
  throw InvalidArgument("unknown problem");
}

void export_coo(const QuboInstance& q, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << q.dim() << ' ' << q.entries().size() << '\n';
  for (const auto& e : q.entries()) out << e.row << ' ' << e.col << ' ' << e.value << '\n';
  out.precision(old_precision);
}

}  // namespace dyco::qubo
