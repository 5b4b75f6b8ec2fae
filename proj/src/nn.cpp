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
#include "dyco/nn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dyco/error.hpp"
#include "dyco/simd/kernels.hpp"

namespace dyco::nn {

std::string_view to_string(ConvKind k) { return k == ConvKind::Gcn ? "gcn" : "sage"; }

ConvKind parse_conv(std::string_view s) {
  if (s == "gcn") return ConvKind::Gcn;
  if (s == "sage") return ConvKind::Sage;
  throw InvalidArgument("unknown convolution '" + std::string(s) + "'");
}

std::string_view to_string(SpSubset s) {
  switch (s) {
    case SpSubset::Emb:
      return "emb";
    case SpSubset::Gnn:
      return "gnn";
    case SpSubset::Full:
      return "full";
  }
  return "?";
}

SpSubset parse_subset(std::string_view s) {
  if (s == "emb") return SpSubset::Emb;
  if (s == "gnn") return SpSubset::Gnn;
  if (s == "full") return SpSubset::Full;
  throw InvalidArgument("unknown SP subset '" + std::string(s) + "'");
}

double Matrix::frobenius() const noexcept {
  double s = 0.0;
  for (double x : data) s += x * x;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// GraphOperator

GraphOperator GraphOperator::build(ConvKind kind, const graph::GraphSnapshot& g) {
  GraphOperator op;
  op.kind_ = kind;
  op.n_ = g.node_count;
  const auto adj = g.adjacency();
  op.row_ptr_.assign(static_cast<std::size_t>(op.n_) + 1, 0);
  if (kind == ConvKind::Gcn) {
    // Degrees of A + I.
    std::vector<double> inv_sqrt(static_cast<std::size_t>(op.n_));
    for (int i = 0; i < op.n_; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(adj[i].size() + 1));
    for (int i = 0; i < op.n_; ++i) {
      std::vector<int> row = adj[i];
      row.push_back(i);
      std::sort(row.begin(), row.end());
      for (int j : row) {
        op.col_.push_back(j);
        op.val_.push_back(inv_sqrt[i] * inv_sqrt[j]);
      }
      op.row_ptr_[i + 1] = op.col_.size();
    }
  } else {
    for (int i = 0; i < op.n_; ++i) {
      std::vector<int> row = adj[i];
      std::sort(row.begin(), row.end());
      for (int j : row) {
        op.col_.push_back(j);
        op.val_.push_back(1.0 / static_cast<double>(row.size()));
      }
      op.row_ptr_[i + 1] = op.col_.size();
    }
  }
  return op;
}

void GraphOperator::apply(const Matrix& x, Matrix& y) const {
  if (x.rows != n_) throw InvalidArgument("operator / feature row mismatch");
  y.resize(n_, x.cols);
  const int c = x.cols;
  for (int i = 0; i < n_; ++i) {
    double* yi = y.row(i);
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const double w = val_[k];
      const double* xj = x.row(col_[k]);
      for (int t = 0; t < c; ++t) yi[t] += w * xj[t];
    }
  }
}

void GraphOperator::apply_transpose(const Matrix& x, Matrix& y) const {
  if (x.rows != n_) throw InvalidArgument("operator / feature row mismatch");
  y.resize(n_, x.cols);
  const int c = x.cols;
  for (int i = 0; i < n_; ++i) {
    const double* xi = x.row(i);
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const double w = val_[k];
      double* yj = y.row(col_[k]);
      for (int t = 0; t < c; ++t) yj[t] += w * xi[t];
    }
  }
}

Matrix GraphOperator::dense() const {
  Matrix d(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_[k]) += val_[k];
  return d;
}

// ---------------------------------------------------------------------------
// ModelState

namespace {

std::atomic<std::uint64_t> g_version{0};

}  // namespace

void ModelState::touch() noexcept { version_ = ++g_version; }

const Parameter& ModelState::param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw InvalidArgument("no parameter named '" + std::string(name) + "'");
}

Parameter& ModelState::param(std::string_view name) {
  return const_cast<Parameter&>(static_cast<const ModelState&>(*this).param(name));
}

std::size_t ModelState::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

bool ModelState::all_finite() const noexcept {
  for (const auto& p : params)
    for (double x : p.value.data)
      if (!std::isfinite(x)) return false;
  return true;
}

namespace {

Parameter make_param(std::string name, ParamGroup group, int rows, int cols) {
  Parameter p;
  p.name = std::move(name);
  p.group = group;
  p.value = Matrix(rows, cols);
  p.m = Matrix(rows, cols);
  p.v = Matrix(rows, cols);
  return p;
}

void fill_uniform(Matrix& m, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& x : m.data) x = dist(rng);
}

void glorot(Matrix& m, std::mt19937_64& rng) {
  fill_uniform(m, std::sqrt(6.0 / (m.rows + m.cols)), rng);
}

void add_conv(ModelState& model, const std::string& prefix, int in, int out) {
  if (model.config.kind == ConvKind::Gcn) {
    model.params.push_back(make_param(prefix + ".weight", ParamGroup::Gnn, in, out));
  } else {
    model.params.push_back(make_param(prefix + ".weight_self", ParamGroup::Gnn, in, out));
    model.params.push_back(make_param(prefix + ".weight_neigh", ParamGroup::Gnn, in, out));
  }
  model.params.push_back(make_param(prefix + ".bias", ParamGroup::Gnn, 1, out));
}

// Indices into params for one conv layer.
struct ConvSlots {
  std::size_t weight;        // GCN weight or SAGE self weight
  std::size_t weight_neigh;  // SAGE only
  std::size_t bias;
};

ConvSlots conv_slots(const ModelState& model, int layer) {
  if (model.config.kind == ConvKind::Gcn) {
    const std::size_t base = layer == 1 ? 1 : 3;
    return {base, 0, base + 1};
  }
  const std::size_t base = layer == 1 ? 1 : 4;
  return {base, base + 1, base + 2};
}

void check_shapes(const ModelState& model) {
  const std::size_t expected = model.config.kind == ConvKind::Gcn ? 5 : 7;
  if (model.params.size() != expected) throw InvariantError("model parameter layout is inconsistent");
}

}  // namespace

ModelState init_model(const ModelConfig& config) {
  if (config.nodes <= 0 || config.d_emb <= 0 || config.d_hidden <= 0 || config.d_out <= 0)
    throw InvalidArgument("model dimensions must be positive");
  ModelState model;
  model.config = config;
  model.params.push_back(make_param("embedding", ParamGroup::Embedding, config.nodes, config.d_emb));
  add_conv(model, "conv1", config.d_emb, config.d_hidden);
  add_conv(model, "conv2", config.d_hidden, config.d_out);

  std::mt19937_64 rng(config.seed);
  fill_uniform(model.params[0].value, 1.0 / std::sqrt(static_cast<double>(config.d_emb)), rng);
  for (std::size_t i = 1; i < model.params.size(); ++i) {
    if (model.params[i].name.find(".bias") == std::string::npos) glorot(model.params[i].value, rng);
  }
  model.touch();
  return model;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

void gemm(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, Matrix& c, bool accumulate) {
  const int m = trans_a ? a.cols : a.rows;
  const int k = trans_a ? a.rows : a.cols;
  const int n = trans_b ? b.rows : b.cols;
  if ((trans_b ? b.cols : b.rows) != k) throw InvariantError("gemm inner dimension mismatch");
  if (!accumulate) c.reshape(m, n);
  simd::active().gemm(m, n, k, a.data.data(), a.cols, trans_a, b.data.data(), b.cols, trans_b,
                      c.data.data(), c.cols, accumulate);
}

void add_bias(Matrix& z, const Matrix& bias) {
  for (int i = 0; i < z.rows; ++i) {
    double* zi = z.row(i);
    for (int j = 0; j < z.cols; ++j) zi[j] += bias.data[j];
  }
}

void column_sums(const Matrix& g, Matrix& out) {
  std::fill(out.data.begin(), out.data.end(), 0.0);
  for (int i = 0; i < g.rows; ++i) {
    const double* gi = g.row(i);
    for (int j = 0; j < g.cols; ++j) out.data[j] += gi[j];
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// z = conv(h); scratch buffers come from the tape.
void conv_forward(const ModelState& model, const GraphOperator& op, int layer, const Matrix& h,
                  Matrix& z, Matrix& proj, Matrix& proj2) {
  const auto slots = conv_slots(model, layer);
  const auto& p = model.params;
  if (model.config.kind == ConvKind::Gcn) {
    gemm(h, false, p[slots.weight].value, false, proj, false);
    op.apply(proj, z);
  } else {
    gemm(h, false, p[slots.weight].value, false, z, false);
    gemm(h, false, p[slots.weight_neigh].value, false, proj, false);
    op.apply(proj, proj2);
    for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] += proj2.data[i];
  }
  add_bias(z, p[slots.bias].value);
}

// Given dL/dz, accumulates parameter gradients and (optionally) dL/dh.
void conv_backward(const ModelState& model, const GraphOperator& op, int layer, const Matrix& h,
                   const Matrix& grad_z, Gradients& grads, Matrix* grad_h) {
  const auto slots = conv_slots(model, layer);
  const auto& p = model.params;
  column_sums(grad_z, grads[slots.bias]);
  thread_local Matrix grad_proj;
  op.apply_transpose(grad_z, grad_proj);
  if (model.config.kind == ConvKind::Gcn) {
    gemm(h, true, grad_proj, false, grads[slots.weight], false);
    if (grad_h) gemm(grad_proj, false, p[slots.weight].value, true, *grad_h, false);
  } else {
    gemm(h, true, grad_z, false, grads[slots.weight], false);
    gemm(h, true, grad_proj, false, grads[slots.weight_neigh], false);
    if (grad_h) {
      gemm(grad_z, false, p[slots.weight].value, true, *grad_h, false);
      gemm(grad_proj, false, p[slots.weight_neigh].value, true, *grad_h, true);
    }
  }
}

}  // namespace

void forward(const ModelState& model, const GraphOperator& op, ForwardTape& tape) {
  check_shapes(model);
  if (op.nodes() != model.config.nodes)
    throw InvalidArgument("graph operator has " + std::to_string(op.nodes()) + " nodes, model has " +
                          std::to_string(model.config.nodes));
  if (op.kind() != model.config.kind) throw InvalidArgument("graph operator built for another layer kind");

  const Matrix& emb = model.params[0].value;
  conv_forward(model, op, 1, emb, tape.z1, tape.proj, tape.proj2);
  tape.h1.resize(tape.z1.rows, tape.z1.cols);
  for (std::size_t i = 0; i < tape.z1.data.size(); ++i) tape.h1.data[i] = std::max(tape.z1.data[i], 0.0);
  conv_forward(model, op, 2, tape.h1, tape.out, tape.proj, tape.proj2);
  for (double& x : tape.out.data) x = sigmoid(x);
  tape.version = model.version();
  tape.op = &op;
}

ForwardTape forward(const ModelState& model, const GraphOperator& op) {
  ForwardTape tape;
  forward(model, op, tape);
  return tape;
}

Gradients zero_gradients(const ModelState& model) {
  Gradients g;
  g.reserve(model.params.size());
  for (const auto& p : model.params) g.emplace_back(p.value.rows, p.value.cols);
  return g;
}

void backward(const ModelState& model, const ForwardTape& tape, std::span<const double> grad_out,
              Gradients& grads) {
  if (tape.op == nullptr || tape.version != model.version())
    throw InvalidArgument("stale forward tape: parameters changed since the forward pass");
  if (grad_out.size() != tape.out.size()) throw InvalidArgument("output gradient has the wrong length");
  if (grads.size() != model.params.size()) grads = zero_gradients(model);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const auto& shape = model.params[i].value;
    if (grads[i].rows != shape.rows || grads[i].cols != shape.cols) grads[i].resize(shape.rows, shape.cols);
  }

  const GraphOperator& op = *tape.op;
  thread_local Matrix grad_z2, grad_h1;
  grad_z2.reshape(tape.out.rows, tape.out.cols);
  for (std::size_t i = 0; i < grad_z2.data.size(); ++i) {
    const double y = tape.out.data[i];
    grad_z2.data[i] = grad_out[i] * y * (1.0 - y);
  }
  conv_backward(model, op, 2, tape.h1, grad_z2, grads, &grad_h1);
  for (std::size_t i = 0; i < grad_h1.data.size(); ++i)
    if (tape.z1.data[i] <= 0.0) grad_h1.data[i] = 0.0;
  conv_backward(model, op, 1, model.params[0].value, grad_h1, grads, &grads[0]);
}

// ---------------------------------------------------------------------------
// Optimizer and shrink-and-perturb

namespace {

// x * 0 is 0 for finite x and NaN otherwise; four partial sums keep the
// loop free of branches.
bool finite_values(const std::vector<double>& xs) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= xs.size(); i += 4)
    for (int l = 0; l < 4; ++l) acc[l] += xs[i + l] * 0.0;
  for (; i < xs.size(); ++i) acc[0] += xs[i] * 0.0;
  return acc[0] + acc[1] + acc[2] + acc[3] == 0.0;
}

}  // namespace

void adam_step(ModelState& model, const Gradients& grads, const AdamConfig& cfg) {
  if (!(cfg.lr >= 0.0)) throw InvalidArgument("learning rate must be nonnegative");
  if (grads.size() != model.params.size()) throw InvalidArgument("gradient count mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != model.params[i].value.size())
      throw InvalidArgument("gradient shape mismatch for " + model.params[i].name);
    if (!finite_values(grads[i].data)) throw InvalidArgument("non-finite gradient for " + model.params[i].name);
  }
  const auto& k = simd::active();
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto& p = model.params[i];
    ++p.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
    k.adam(p.value.size(), p.value.data.data(), p.m.data.data(), p.v.data.data(), grads[i].data.data(),
           cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2);
  }
  model.touch();
}

bool in_subset(ParamGroup group, SpSubset subset) noexcept {
  switch (subset) {
    case SpSubset::Emb:
      return group == ParamGroup::Embedding;
    case SpSubset::Gnn:
      return group == ParamGroup::Gnn;
    case SpSubset::Full:
      return true;
  }
  return false;
}

void shrink_perturb(ModelState& model, const ShrinkPerturbConfig& cfg) {
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) throw InvalidArgument("shrink coefficient must lie in (0, 1)");
  if (!(cfg.perturb > 0.0 && cfg.perturb < 1.0)) throw InvalidArgument("perturb coefficient must lie in (0, 1)");
  if (!(cfg.sigma >= 0.0)) throw InvalidArgument("noise scale must be nonnegative");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto& k = simd::active();
  std::vector<double> noise;
  for (auto& p : model.params) {
    if (!in_subset(p.group, cfg.subset)) continue;
    noise.resize(p.value.size());
    for (double& e : noise) e = cfg.sigma * normal(rng);
    k.axpby(noise.size(), cfg.shrink, p.value.data.data(), cfg.perturb, noise.data());
    if (!cfg.keep_adam_state) {
      std::fill(p.m.data.begin(), p.m.data.end(), 0.0);
      std::fill(p.v.data.begin(), p.v.data.end(), 0.0);
      p.step = 0;
    }
  }
  model.touch();
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const ModelState& model, std::ostream& out, const std::string& rng_state) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.params) {
    params.push_back({{"name", p.name},
                      {"group", p.group == ParamGroup::Embedding ? "embedding" : "gnn"},
                      {"shape", {p.value.rows, p.value.cols}},
                      {"value", p.value.data},
                      {"adam_m", p.m.data},
                      {"adam_v", p.v.data},
                      {"step", p.step}});
  }
  const auto& c = model.config;
  nlohmann::json j = {{"format", "dyco-checkpoint-1"},
                      {"config",
                       {{"nodes", c.nodes},
                        {"d_emb", c.d_emb},
                        {"d_hidden", c.d_hidden},
                        {"d_out", c.d_out},
                        {"conv", to_string(c.kind)},
                        {"seed", c.seed}}},
                      {"params", std::move(params)},
                      {"rng_state", rng_state}};
  out << j.dump() << '\n';
}

ModelState load_checkpoint(std::istream& in, std::string* rng_state) {
  ModelState model;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format") != "dyco-checkpoint-1") throw ParseError("unknown checkpoint format");
    const auto& c = j.at("config");
    model.config = {c.at("nodes").get<int>(), c.at("d_emb").get<int>(), c.at("d_hidden").get<int>(),
                    c.at("d_out").get<int>(), parse_conv(c.at("conv").get<std::string>()),
                    c.at("seed").get<std::uint64_t>()};
    for (const auto& pj : j.at("params")) {
      const int rows = pj.at("shape").at(0).get<int>();
      const int cols = pj.at("shape").at(1).get<int>();
      Parameter p = make_param(pj.at("name").get<std::string>(),
                               pj.at("group") == "embedding" ? ParamGroup::Embedding : ParamGroup::Gnn, rows, cols);
      p.value.data = pj.at("value").get<std::vector<double>>();
      p.m.data = pj.at("adam_m").get<std::vector<double>>();
      p.v.data = pj.at("adam_v").get<std::vector<double>>();
      p.step = pj.at("step").get<std::int64_t>();
      const auto expected = static_cast<std::size_t>(rows) * cols;
      if (p.value.size() != expected || p.m.size() != expected || p.v.size() != expected)
        throw ParseError("tensor '" + p.name + "' does not match its shape");
      model.params.push_back(std::move(p));
    }
    if (rng_state) *rng_state = j.value("rng_state", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
  check_shapes(model);
  model.touch();
  return model;
}

}  // namespace dyco::nn
