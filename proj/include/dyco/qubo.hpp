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

#include <iosfwd>
#include <span>
#include <vector>

#include "dyco/graph.hpp"

namespace dyco::qubo {

/// Canonical upper-triangle entry (row <= col) of a symmetric Q.
struct Entry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Sparse symmetric QUBO matrix plus what is needed to recover the natural
/// objective. Immutable once built; evaluation is reentrant.
class QuboInstance {
 public:
  QuboInstance() = default;
  QuboInstance(int dim, std::vector<Entry> upper, Problem problem, double penalty,
               double offset);

  int dim() const noexcept { return dim_; }
  Problem problem() const noexcept { return problem_; }
  double penalty() const noexcept { return penalty_; }
  /// Constant added to x^T Q x so that losses match the full objective.
  double offset() const noexcept { return offset_; }
  std::span<const Entry> entries() const noexcept { return upper_; }
  std::size_t nnz() const noexcept { return col_.size(); }

  /// Q(i, j) by lookup; O(row length).
  double at(int i, int j) const;

  /// y = Q x using the mirrored CSR form.
  void multiply(std::span<const double> x, std::span<double> y) const;

  // Natural-objective metadata.
  graph::GraphSnapshot graph;     // MaxCut / MIS
  graph::DistanceMatrix distances;  // TSP

 private:
  int dim_ = 0;
  Problem problem_ = Problem::MaxCut;
  double penalty_ = 0.0;
  double offset_ = 0.0;
  std::vector<Entry> upper_;
  // Full symmetric CSR.
  std::vector<std::size_t> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

/// Q_ij = Q_ji = w per edge, Q_ii = -sum of incident weights.
QuboInstance build_maxcut_qubo(const graph::GraphSnapshot& g);

/// Q_ii = -1, Q_ij = Q_ji = m / 2 per edge.
QuboInstance build_mis_qubo(const graph::GraphSnapshot& g, double m = 2.0);

/// Row-major flattening X[i][v] -> i * n + v. The tour term counts both
/// travel directions; the (1 - sum)^2 constants are carried as offset 2 m n.
QuboInstance build_tsp_qubo(const graph::DistanceMatrix& dist, double m);

/// Default TSP penalty: twice the largest distance.
double default_tsp_penalty(const graph::DistanceMatrix& dist);

/// Builds the QUBO for one snapshot of the given problem. `penalty` <= 0
/// selects the problem default.
QuboInstance build_qubo(Problem problem, const graph::GraphSnapshot& g, double penalty = 0.0);

/// x^T Q x + offset.
double qubo_loss(const QuboInstance& q, std::span<const double> x);

/// 2 Q x.
std::vector<double> qubo_grad(const QuboInstance& q, std::span<const double> x);

/// Loss and gradient in one sparse pass.
double qubo_loss_and_grad(const QuboInstance& q, std::span<const double> x,
                          std::span<double> grad);

/// MaxCut/MIS: `x` is a 0/1 node vector. TSP: `x` is the tour (node at each
/// step). Returns cut size, independent-set size or tour length.
double natural_objective(const QuboInstance& q, std::span<const int> x);

double cut_value(const graph::GraphSnapshot& g, std::span<const int> side);
std::size_t violated_edges(const graph::GraphSnapshot& g, std::span<const int> selected);
double tour_length(const graph::DistanceMatrix& dist, std::span<const int> tour);
bool is_permutation(std::span<const int> tour, int n);

/// One-hot matrix for a tour, flattened row-major.
std::vector<double> tour_to_assignment(std::span<const int> tour);

/// Coordinate text: "N nnz" then one "i j value" line per canonical entry.
void export_coo(const QuboInstance& q, std::ostream& out);

}  // namespace dyco::qubo
