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
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dyco/error.hpp"
#include "dyco/nn.hpp"
#include "dyco/qubo.hpp"
#include "support.hpp"

using namespace dyco;
using namespace dyco::nn;

namespace {

ModelConfig small_config(int n, ConvKind kind, std::uint64_t seed, int d_out = 1) {
  ModelConfig c;
  c.nodes = n;
  c.d_emb = 12;
  c.d_hidden = 7;
  c.d_out = d_out;
  c.kind = kind;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("init_model shapes follow the configuration") {
  ModelConfig c;
  c.nodes = 10;
  auto gcn = init_model(c);
  CHECK(gcn.param("embedding").value.rows == 10);
  CHECK(gcn.param("embedding").value.cols == 512);
  CHECK(gcn.param("conv1.weight").value.cols == 256);
  CHECK(gcn.param("conv2.weight").value.rows == 256);
  CHECK(gcn.param("conv2.bias").value.cols == 1);

  c.kind = ConvKind::Sage;
  auto sage = init_model(c);
  CHECK(sage.param("conv1.weight_self").value.rows == 512);
  CHECK(sage.param("conv1.weight_neigh").value.cols == 256);

  const double bound = 1.0 / std::sqrt(512.0);
  for (double x : gcn.param("embedding").value.data) CHECK(std::abs(x) <= bound);
  CHECK(gcn.param("embedding").m.frobenius() == 0.0);
}

TEST_CASE("init_model is deterministic under seed") {
  auto c = small_config(6, ConvKind::Gcn, 42);
  auto a = init_model(c), b = init_model(c);
  for (std::size_t i = 0; i < a.params.size(); ++i) CHECK(a.params[i].value.data == b.params[i].value.data);
  c.seed = 43;
  auto d = init_model(c);
  CHECK(a.params[0].value.data != d.params[0].value.data);
  c.d_emb = 0;
  CHECK_THROWS_AS(init_model(c), InvalidArgument);
}

TEST_CASE("GCN operator matches the dense normalization") {
  const auto g = testing::random_graph(15, 0.3, 3);
  const auto op = GraphOperator::build(ConvKind::Gcn, g);
  const auto dense = op.dense();
  std::vector<double> deg(15, 1.0);
  for (const auto& e : g.edges) {
    deg[e.u] += 1;
    deg[e.v] += 1;
  }
  const auto adj = g.adjacency();
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) {
      double a = (i == j) ? 1.0 : 0.0;
      for (int k : adj[i])
        if (k == j) a = 1.0;
      CHECK(dense(i, j) == doctest::Approx(a / std::sqrt(deg[i] * deg[j])).epsilon(1e-14));
    }
}

TEST_CASE("isolated nodes under GCN depend only on themselves") {
  const auto g = graph::make_snapshot(3, {{0, 1}});
  const auto dense = GraphOperator::build(ConvKind::Gcn, g).dense();
  CHECK(dense(2, 2) == 1.0);
  CHECK(dense(2, 0) == 0.0);
  const auto sage = GraphOperator::build(ConvKind::Sage, g).dense();
  CHECK(sage(2, 2) == 0.0);
  CHECK(sage(0, 1) == 1.0);
}

TEST_CASE("forward output lies in (0, 1)") {
  const auto g = testing::random_graph(9, 0.4, 1);
  for (auto kind : {ConvKind::Gcn, ConvKind::Sage}) {
    auto model = init_model(small_config(9, kind, 5));
    const auto tape = forward(model, GraphOperator::build(kind, g));
    CHECK(tape.out.rows == 9);
    for (double x : tape.out.data) {
      CHECK(x > 0.0);
      CHECK(x < 1.0);
    }
  }
}

TEST_CASE("forward rejects a mismatched operator") {
  const auto g = testing::random_graph(5, 0.5, 1);
  auto model = init_model(small_config(6, ConvKind::Gcn, 1));
  CHECK_THROWS_AS(forward(model, GraphOperator::build(ConvKind::Gcn, g)), InvalidArgument);
  auto model5 = init_model(small_config(5, ConvKind::Gcn, 1));
  CHECK_THROWS_AS(forward(model5, GraphOperator::build(ConvKind::Sage, g)), InvalidArgument);
}

TEST_CASE("gradients match central differences") {
  SUBCASE("GCN MaxCut") {
    const auto g = testing::random_graph(5, 0.6, 11);
    auto model = init_model(small_config(5, ConvKind::Gcn, 3));
    const auto r = testing::check_gradients(model, GraphOperator::build(ConvKind::Gcn, g), qubo::build_maxcut_qubo(g));
    CHECK(r.max_relative_error < 1e-4);
  }
  SUBCASE("SAGE MIS") {
    const auto g = testing::random_graph(7, 0.4, 12);
    auto model = init_model(small_config(7, ConvKind::Sage, 4));
    const auto r = testing::check_gradients(model, GraphOperator::build(ConvKind::Sage, g), qubo::build_mis_qubo(g));
    CHECK(r.max_relative_error < 1e-4);
  }
  SUBCASE("SAGE TSP") {
    const auto dist = testing::random_distances(4, 13, 10);
    const auto g = graph::complete_graph(dist);
    auto model = init_model(small_config(4, ConvKind::Sage, 5, 4));
    const auto q = qubo::build_tsp_qubo(dist, qubo::default_tsp_penalty(dist));
    const auto r = testing::check_gradients(model, GraphOperator::build(ConvKind::Sage, g), q);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("backward refuses a stale tape") {
  const auto g = testing::random_graph(5, 0.5, 2);
  const auto op = GraphOperator::build(ConvKind::Gcn, g);
  auto model = init_model(small_config(5, ConvKind::Gcn, 1));
  auto tape = forward(model, op);
  auto grads = zero_gradients(model);
  std::vector<double> grad_out(5, 1.0);
  backward(model, tape, grad_out, grads);
  adam_step(model, grads, {});
  CHECK_THROWS_AS(backward(model, tape, grad_out, grads), InvalidArgument);
  std::vector<double> short_grad(4, 1.0);
  tape = forward(model, op);
  CHECK_THROWS_AS(backward(model, tape, short_grad, grads), InvalidArgument);
}

TEST_CASE("first Adam step moves each parameter by about lr") {
  auto model = init_model(small_config(4, ConvKind::Gcn, 9));
  auto before = model;
  auto grads = zero_gradients(model);
  for (auto& gm : grads)
    for (std::size_t i = 0; i < gm.data.size(); ++i) gm.data[i] = (i % 2 ? 0.5 : -2.0);
  adam_step(model, grads, {.lr = 0.01});
  for (std::size_t p = 0; p < model.params.size(); ++p)
    for (std::size_t i = 0; i < grads[p].data.size(); ++i) {
      const double delta = model.params[p].value.data[i] - before.params[p].value.data[i];
      CHECK(delta == doctest::Approx(grads[p].data[i] > 0 ? -0.01 : 0.01).epsilon(1e-6));
    }
  CHECK(model.params[0].step == 1);
}

TEST_CASE("Adam with lr 0 changes nothing and refuses NaN") {
  auto model = init_model(small_config(4, ConvKind::Sage, 9));
  const auto before = model;
  auto grads = zero_gradients(model);
  for (auto& gm : grads)
    for (auto& x : gm.data) x = 1.0;
  adam_step(model, grads, {.lr = 0.0});
  for (std::size_t p = 0; p < model.params.size(); ++p) CHECK(model.params[p].value.data == before.params[p].value.data);
  grads[1].data[0] = std::nan("");
  CHECK_THROWS_AS(adam_step(model, grads, {}), InvalidArgument);
  CHECK(model.all_finite());
}

TEST_CASE("shrink-perturb with zero noise scales the subset by 0.4") {
  for (auto subset : {SpSubset::Emb, SpSubset::Gnn, SpSubset::Full}) {
    auto model = init_model(small_config(6, ConvKind::Sage, 21));
    const auto before = model;
    shrink_perturb(model, {.shrink = 0.4, .perturb = 0.1, .sigma = 0.0, .subset = subset});
    for (std::size_t p = 0; p < model.params.size(); ++p) {
      const auto& a = model.params[p].value.data;
      const auto& b = before.params[p].value.data;
      if (in_subset(model.params[p].group, subset)) {
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == 0.4 * b[i]);
      } else {
        CHECK(a == b);
      }
    }
  }
}

TEST_CASE("shrink-perturb resets Adam moments of the subset only") {
  const auto g = testing::random_graph(6, 0.5, 1);
  const auto op = GraphOperator::build(ConvKind::Gcn, g);
  const auto q = qubo::build_maxcut_qubo(g);
  auto model = init_model(small_config(6, ConvKind::Gcn, 2));
  for (int e = 0; e < 3; ++e) {
    auto tape = forward(model, op);
    auto grads = zero_gradients(model);
    backward(model, tape, qubo::qubo_grad(q, tape.out.data), grads);
    adam_step(model, grads, {});
  }
  auto kept = model;
  shrink_perturb(model, {.subset = SpSubset::Emb, .seed = 1});
  CHECK(model.param("embedding").m.frobenius() == 0.0);
  CHECK(model.param("embedding").step == 0);
  CHECK(model.param("conv1.weight").m.data == kept.param("conv1.weight").m.data);
  CHECK(model.param("conv1.weight").step == 3);

  shrink_perturb(kept, {.subset = SpSubset::Full, .keep_adam_state = true, .seed = 1});
  CHECK(kept.param("embedding").step == 3);
  CHECK(kept.param("embedding").m.frobenius() > 0.0);
}

TEST_CASE("shrink-perturb noise is seeded") {
  auto a = init_model(small_config(5, ConvKind::Gcn, 1));
  auto b = a, c = a;
  shrink_perturb(a, {.seed = 7});
  shrink_perturb(b, {.seed = 7});
  shrink_perturb(c, {.seed = 8});
  CHECK(a.params[0].value.data == b.params[0].value.data);
  CHECK(a.params[0].value.data != c.params[0].value.data);
  CHECK_THROWS_AS(shrink_perturb(a, {.shrink = 1.0}), InvalidArgument);
  CHECK_THROWS_AS(shrink_perturb(a, {.perturb = 0.0}), InvalidArgument);
}

TEST_CASE("parameter version changes on every update") {
  auto model = init_model(small_config(4, ConvKind::Gcn, 1));
  const auto v0 = model.version();
  shrink_perturb(model, {.seed = 1});
  CHECK(model.version() != v0);
}

TEST_CASE("checkpoint round trip is exact") {
  auto model = init_model(small_config(5, ConvKind::Sage, 17));
  auto grads = zero_gradients(model);
  for (auto& gm : grads)
    for (auto& x : gm.data) x = 0.3;
  adam_step(model, grads, {});
  std::stringstream ss;
  save_checkpoint(model, ss, "rng-state");
  std::string rng;
  const auto loaded = load_checkpoint(ss, &rng);
  CHECK(rng == "rng-state");
  CHECK(loaded.config.kind == ConvKind::Sage);
  REQUIRE(loaded.params.size() == model.params.size());
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    CHECK(loaded.params[p].name == model.params[p].name);
    CHECK(loaded.params[p].value.data == model.params[p].value.data);
    CHECK(loaded.params[p].m.data == model.params[p].m.data);
    CHECK(loaded.params[p].v.data == model.params[p].v.data);
    CHECK(loaded.params[p].step == model.params[p].step);
  }
  std::stringstream bad("{\"format\": \"other\"}");
  CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
}

TEST_CASE("names round trip") {
  CHECK(parse_conv("sage") == ConvKind::Sage);
  CHECK(to_string(parse_subset("gnn")) == "gnn");
  CHECK_THROWS_AS(parse_conv("gat"), InvalidArgument);
}
