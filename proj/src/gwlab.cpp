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
#include "dyco/gwlab.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "dyco/error.hpp"
#include "dyco/oracle.hpp"

namespace dyco::gwlab {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t draw_seed(std::uint64_t seed, std::size_t row, int draw) {
  return mix(mix(seed ^ (static_cast<std::uint64_t>(row) << 40)) ^ static_cast<std::uint64_t>(draw));
}

Matrix symmetrize(const Matrix& m) { return (m + m.transpose()) / 2.0; }

Matrix project_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

void normalize_rows(Matrix& v) {
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double norm = v.row(i).norm();
    if (norm > 0.0) {
      v.row(i) /= norm;
    } else {
      v.row(i).setZero();
      v(i, 0) = 1.0;
    }
  }
}

double factor_objective(const Matrix& lap, const Matrix& v, Matrix& lv) {
  lv.noalias() = lap * v;
  return 0.25 * v.cwiseProduct(lv).sum();
}

}  // namespace

Matrix laplacian(const graph::GraphSnapshot& g) {
  Matrix lap = Matrix::Zero(g.node_count, g.node_count);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto [u, v] = g.edges[k];
    const double w = g.weights.empty() ? 1.0 : g.weights[k];
    lap(u, u) += w;
    lap(v, v) += w;
    lap(u, v) -= w;
    lap(v, u) -= w;
  }
  return lap;
}

double sdp_objective(const Matrix& lap, const Matrix& x) { return 0.25 * lap.cwiseProduct(x).sum(); }

bool is_feasible(const Matrix& x, double tol) {
  if (x.rows() != x.cols()) return false;
  if ((x - x.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (std::abs(x(i, i) - 1.0) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(x), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol;
}

SdpResult solve_gw_sdp(const graph::GraphSnapshot& g, const SdpOptions& opts) {
  g.validate();
  if (g.edges.empty()) throw InvalidArgument("SDP relaxation needs at least one edge");
  if (opts.iters < 1) throw InvalidArgument("SDP iteration count must be >= 1");
  const int n = g.node_count;
  const Matrix lap = laplacian(g);

  Matrix v;
  if (opts.init) {
    if (opts.init->rows() != n || opts.init->cols() != n) throw InvalidArgument("SDP init has the wrong size");
    v = factor(*opts.init);
  } else {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    v.resize(n, n);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  }
  normalize_rows(v);

  Matrix lv(n, n), trial(n, n), trial_lv(n, n);
  double f = factor_objective(lap, v, lv);
  double step = 1.0;
  SdpResult res;
  for (res.iterations = 0; res.iterations < opts.iters; ++res.iterations) {
    trial = v + (0.5 * step) * lv;
    normalize_rows(trial);
    const double f_trial = factor_objective(lap, trial, trial_lv);
    if (f_trial > f) {
      const double gain = f_trial - f;
      v.swap(trial);
      lv.swap(trial_lv);
      f = f_trial;
      step = std::min(step * 2.0, 1e6);
      if (gain < opts.tol * std::max(1.0, std::abs(f))) {
        res.converged = true;
        break;
      }
    } else {
      step /= 2.0;
      if (step < 1e-14) {
        res.converged = true;
        break;
      }
    }
  }
  res.x = v * v.transpose();
  res.objective = sdp_objective(lap, res.x);
  return res;
}

double sdp_dual_bound(const graph::GraphSnapshot& g, const Matrix& x) {
  const Matrix c = 0.25 * laplacian(g);
  const Eigen::VectorXd y = (c * x).diagonal();
  const Matrix s = Matrix(y.asDiagonal()) - c;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  return y.sum() - static_cast<double>(g.node_count) * eig.eigenvalues().minCoeff();
}

Matrix factor(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(x));
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-9 * std::max(1.0, lambda.maxCoeff());
  Eigen::VectorXd root(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) root(i) = lambda(i) < cutoff ? 0.0 : std::sqrt(lambda(i));
  return eig.eigenvectors() * root.asDiagonal();
}

double RoundResult::mean_cut() const {
  if (trials == 0) return 0.0;
  double sum = 0.0;
  for (const auto& [cut, n] : histogram) sum += cut * n;
  return sum / trials;
}

int RoundResult::count(double cut) const {
  int total = 0;
  for (const auto& [value, n] : histogram)
    if (std::abs(value - cut) <= 1e-9 * std::max(1.0, std::abs(cut))) total += n;
  return total;
}

RoundResult gw_round(const graph::GraphSnapshot& g, const Matrix& x, int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("rounding needs at least one trial");
  if (x.rows() != g.node_count || x.cols() != g.node_count) throw InvalidArgument("SDP point has the wrong size");
  const Matrix y = factor(x);
  const int n = g.node_count;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd r(n), proj(n);
  std::vector<int> side(static_cast<std::size_t>(n));

  RoundResult res;
  res.trials = trials;
  for (int t = 0; t < trials; ++t) {
    for (int i = 0; i < n; ++i) r(i) = normal(rng);
    proj.noalias() = y * r;
    for (int i = 0; i < n; ++i) side[i] = proj(i) >= 0.0 ? 1 : 0;
    double cut = 0.0;
    for (std::size_t k = 0; k < g.edges.size(); ++k)
      if (side[g.edges[k].u] != side[g.edges[k].v]) cut += g.weights.empty() ? 1.0 : g.weights[k];
    ++res.histogram[cut];
    if (res.best_assignment.empty() || cut > res.best_cut) {
      res.best_cut = cut;
      res.best_assignment = side;
    }
  }
  return res;
}

Matrix project_feasible(const Matrix& m, const ProjectOptions& opts) {
  if (m.rows() != m.cols()) throw InvalidArgument("projection needs a square matrix");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw InvalidArgument("projection needs a symmetric matrix");
  const Eigen::Index n = m.rows();
  Matrix x = symmetrize(m);
  Matrix correction = Matrix::Zero(n, n);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const Matrix shifted = x + correction;
    Matrix y = project_psd(shifted);
    correction = shifted - y;
    y.diagonal().setOnes();
    const double change = (y - x).norm();
    x.swap(y);
    if (change < opts.tol) break;
  }
  // Clean up the residual infeasibility left by the stopping tolerance.
  Matrix p = project_psd(x);
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p(i, i) > 1e-300)) throw InvariantError("projection produced a zero diagonal entry");
    scale(i) = 1.0 / std::sqrt(p(i, i));
  }
  p = scale.asDiagonal() * p * scale.asDiagonal();
  p = symmetrize(p);
  p.diagonal().setOnes();
  return p;
}

Matrix sample_goe(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("matrix size must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  return (a + a.transpose()) / 2.0;
}

Interval wilson_interval(long successes, long trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials) throw InvalidArgument("invalid binomial counts");
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval iv{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) iv.lo = 0.0;
  if (successes == trials) iv.hi = 1.0;
  return iv;
}

namespace {

template <typename Prepare>
std::vector<ExperimentRow> run_experiment(const graph::GraphSnapshot& g, const Matrix& start,
                                          const ExperimentConfig& cfg, Prepare&& prepare) {
  if (cfg.perturbations < 1 || cfg.rounding_trials < 1) throw InvalidArgument("trial counts must be positive");
  if (start.rows() != g.node_count || start.cols() != g.node_count)
    throw InvalidArgument("starting point has the wrong size");
  const double optimum = cfg.optimum ? *cfg.optimum : oracle::exact_maxcut(g).value;
  std::vector<ExperimentRow> rows;
  for (std::size_t k = 0; k < cfg.lambdas.size(); ++k) {
    const double lambda = cfg.lambdas[k];
    if (!(lambda >= 0.0)) throw InvalidArgument("perturbation scales must be nonnegative");
    ExperimentRow row;
    row.lambda = lambda;
    for (int d = 0; d < cfg.perturbations; ++d) {
      const std::uint64_t s = draw_seed(cfg.seed, k, d);
      Matrix x = start;
      if (lambda > 0.0) x = project_feasible(start + lambda * sample_goe(g.node_count, s), cfg.projection);
      const Matrix point = prepare(x, s);
      const auto rounded = gw_round(g, point, cfg.rounding_trials, mix(s));
      row.trials += rounded.trials;
      row.successes += rounded.count(optimum);
    }
    row.p_hat = static_cast<double>(row.successes) / static_cast<double>(row.trials);
    const auto iv = wilson_interval(row.successes, row.trials);
    row.wilson_lo = iv.lo;
    row.wilson_hi = iv.hi;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<ExperimentRow> perturbation_experiment(const graph::GraphSnapshot& g, const Matrix& x0,
                                                   const ExperimentConfig& cfg) {
  return run_experiment(g, x0, cfg, [](const Matrix& x, std::uint64_t) { return x; });
}

std::vector<ExperimentRow> warmstart_sdp_experiment(const graph::GraphSnapshot& g, const Matrix& x_init,
                                                    const ExperimentConfig& cfg) {
  return run_experiment(g, x_init, cfg, [&](const Matrix& x, std::uint64_t s) {
    SdpOptions opts = cfg.sdp;
    opts.init = x;
    opts.seed = s;
    return solve_gw_sdp(g, opts).x;
  });
}

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << "lambda,trials,successes,p_hat,wilson_lo,wilson_hi\n";
  const auto old = out.precision(10);
  for (const auto& r : rows)
    out << r.lambda << ',' << r.trials << ',' << r.successes << ',' << r.p_hat << ',' << r.wilson_lo << ','
        << r.wilson_hi << '\n';
  out.precision(old);
}

}  // namespace dyco::gwlab
