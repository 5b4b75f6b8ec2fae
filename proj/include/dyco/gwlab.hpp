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
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dyco/graph.hpp"

namespace dyco::gwlab {

using Matrix = Eigen::MatrixXd;

/// Weighted graph Laplacian.
Matrix laplacian(const graph::GraphSnapshot& g);

/// (1/4) Tr(L X).
double sdp_objective(const Matrix& laplacian, const Matrix& x);

/// True when X is symmetric, min eigenvalue >= -tol and |X_ii - 1| <= tol.
bool is_feasible(const Matrix& x, double tol = 1e-8);

struct SdpOptions {
  int iters = 20000;
  /// Stop once an accepted step improves the objective by less than tol.
  double tol = 1e-13;
  std::uint64_t seed = 0;
  /// Starting point; a random unit-vector factor when empty.
  std::optional<Matrix> init;
};

struct SdpResult {
  Matrix x;
  double objective = 0.0;
  int iterations = 0;
  /// False when the iteration cap was hit before the tolerance.
  bool converged = false;
};

/// Maximizes (1/4) Tr(L X) over unit-diagonal PSD matrices with X = V V^T,
/// V square, by gradient ascent with row renormalization and a backtracked
/// step. InvalidArgument when g has no edges.
SdpResult solve_gw_sdp(const graph::GraphSnapshot& g, const SdpOptions& opts = {});

/// Upper bound on the SDP optimum certified from X through the dual:
/// y_i = (C X)_ii, S = Diag(y) - C, bound = sum(y) - n lambda_min(S).
double sdp_dual_bound(const graph::GraphSnapshot& g, const Matrix& x);

/// Rows Y_i with Y Y^T = X, from an eigendecomposition. Eigenvalues below
/// 1e-9 max(1, lambda_max) are treated as zero.
Matrix factor(const Matrix& x);

struct RoundResult {
  double best_cut = 0.0;
  std::vector<int> best_assignment;
  /// Cut value -> number of trials producing it.
  std::map<double, int> histogram;
  int trials = 0;

  double mean_cut() const;
  int count(double cut) const;
};

/// Hyperplane rounding: side_i = sign(Y_i . r) for r ~ N(0, I), sign(0) = +1.
RoundResult gw_round(const graph::GraphSnapshot& g, const Matrix& x, int trials, std::uint64_t seed);

struct ProjectOptions {
  int max_sweeps = 10000;
  double tol = 1e-9;
};

/// Nearest unit-diagonal PSD matrix by Dykstra's alternating projections.
Matrix project_feasible(const Matrix& m, const ProjectOptions& opts = {});

/// Z = (A + A^T) / 2 with A_ij ~ N(0, 1).
Matrix sample_goe(int n, std::uint64_t seed);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wilson_interval(long successes, long trials, double z = 1.96);

struct ExperimentConfig {
  std::vector<double> lambdas = {0.0, 0.1, 0.3, 0.5, 1.0};
  int perturbations = 200;
  int rounding_trials = 100;
  std::uint64_t seed = 0;
  /// Optimal cut; computed by exact enumeration when empty.
  std::optional<double> optimum;
  ProjectOptions projection;
  /// Used by warmstart_sdp_experiment for the re-solve.
  SdpOptions sdp;
};

struct ExperimentRow {
  double lambda = 0.0;
  long trials = 0;
  long successes = 0;
  double p_hat = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

/// For each lambda: draw Z, round Proj(X0 + lambda Z) and count rounds that hit
/// the optimal cut. The lambda = 0 row rounds X0 itself.
std::vector<ExperimentRow> perturbation_experiment(const graph::GraphSnapshot& g, const Matrix& x0,
                                                   const ExperimentConfig& cfg);

/// As perturbation_experiment, but re-solves the SDP from Proj(X_init + lambda Z)
/// before rounding.
std::vector<ExperimentRow> warmstart_sdp_experiment(const graph::GraphSnapshot& g, const Matrix& x_init,
                                                    const ExperimentConfig& cfg);

/// CSV with header lambda,trials,successes,p_hat,wilson_lo,wilson_hi.
void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);

}  // namespace dyco::gwlab
