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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyco/graph.hpp"

namespace dyco::nn {

enum class ConvKind { Gcn, Sage };
enum class ParamGroup { Embedding, Gnn };
/// Which parameters shrink-and-perturb touches.
enum class SpSubset { Emb, Gnn, Full };

std::string_view to_string(ConvKind k);
ConvKind parse_conv(std::string_view s);
std::string_view to_string(SpSubset s);
SpSubset parse_subset(std::string_view s);

/// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<std::size_t>(r) * c, 0.0);
  }
  /// Like resize, but leaves the contents unspecified.
  void reshape(int r, int c) {
    rows = r;
    cols = c;
    data.resize(static_cast<std::size_t>(r) * c);
  }
  std::size_t size() const noexcept { return data.size(); }
  double* row(int i) noexcept { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const noexcept { return data.data() + static_cast<std::size_t>(i) * cols; }
  double& operator()(int i, int j) noexcept { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const noexcept { return data[static_cast<std::size_t>(i) * cols + j]; }
  double frobenius() const noexcept;
};

/// Sparse message-passing operator for one snapshot, CSR.
/// GCN: D^-1/2 (A + I) D^-1/2. SAGE: row-normalized neighbor mean (empty rows
/// for isolated nodes).
class GraphOperator {
 public:
  static GraphOperator build(ConvKind kind, const graph::GraphSnapshot& g);

  ConvKind kind() const noexcept { return kind_; }
  int nodes() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return col_.size(); }

  /// y = A x (y is resized).
  void apply(const Matrix& x, Matrix& y) const;
  /// y = A^T x.
  void apply_transpose(const Matrix& x, Matrix& y) const;
  Matrix dense() const;

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const int> cols() const noexcept { return col_; }
  std::span<const double> values() const noexcept { return val_; }

 private:
  ConvKind kind_ = ConvKind::Gcn;
  int n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

struct Parameter {
  std::string name;
  ParamGroup group = ParamGroup::Gnn;
  Matrix value;
  // Adam moments and per-tensor step count (reset independently by SP).
  Matrix m;
  Matrix v;
  std::int64_t step = 0;
};

struct ModelConfig {
  int nodes = 0;
  int d_emb = 512;
  int d_hidden = 256;
  /// 1 for MaxCut / MIS, n for TSP.
  int d_out = 1;
  ConvKind kind = ConvKind::Gcn;
  std::uint64_t seed = 0;
};

/// Learnable parameters: embedding table, two convolution layers, Adam state.
/// Layout of `params`: embedding first, then conv1 tensors, then conv2 tensors.
class ModelState {
 public:
  ModelConfig config;
  std::vector<Parameter> params;

  /// Changes whenever parameters change; tapes remember it.
  std::uint64_t version() const noexcept { return version_; }
  void touch() noexcept;

  const Parameter& param(std::string_view name) const;
  Parameter& param(std::string_view name);
  std::size_t parameter_count() const noexcept;
  bool all_finite() const noexcept;

 private:
  std::uint64_t version_ = 0;
};

ModelState init_model(const ModelConfig& config);

/// Cached activations of one forward pass.
struct ForwardTape {
  std::uint64_t version = 0;
  const GraphOperator* op = nullptr;
  Matrix z1;   // conv1 pre-activation
  Matrix h1;   // relu(z1)
  Matrix out;  // sigmoid output, n x d_out
  // Scratch reused across calls.
  Matrix proj;
  Matrix proj2;
};

/// embedding -> conv1 -> ReLU -> conv2 -> sigmoid. Output is tape.out,
/// flattened row-major (node-major for TSP).
void forward(const ModelState& model, const GraphOperator& op, ForwardTape& tape);

/// Convenience overload returning a fresh tape.
ForwardTape forward(const ModelState& model, const GraphOperator& op);

/// Gradients aligned with ModelState::params.
using Gradients = std::vector<Matrix>;

Gradients zero_gradients(const ModelState& model);

/// Reverse pass for d loss / d output (flattened like tape.out). Throws
/// InvalidArgument if the tape is stale (parameters changed since forward).
void backward(const ModelState& model, const ForwardTape& tape, std::span<const double> grad_out,
              Gradients& grads);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Refuses (InvalidArgument) to apply non-finite gradients.
void adam_step(ModelState& model, const Gradients& grads, const AdamConfig& cfg);

struct ShrinkPerturbConfig {
  double shrink = 0.4;
  double perturb = 0.1;
  double sigma = 1.0;
  SpSubset subset = SpSubset::Full;
  /// Adam moments of perturbed tensors are zeroed unless set.
  bool keep_adam_state = false;
  std::uint64_t seed = 0;
};

/// theta <- shrink * theta + perturb * eps, eps ~ N(0, sigma^2), on the subset.
void shrink_perturb(ModelState& model, const ShrinkPerturbConfig& cfg);

bool in_subset(ParamGroup group, SpSubset subset) noexcept;

/// JSON checkpoint: config, every tensor with its shape and Adam state, and an
/// opaque RNG state string.
void save_checkpoint(const ModelState& model, std::ostream& out, const std::string& rng_state = {});
ModelState load_checkpoint(std::istream& in, std::string* rng_state = nullptr);

}  // namespace dyco::nn
