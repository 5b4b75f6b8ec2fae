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
// Acceptance suite. Usage: acceptance [criterion...]; runs all when none given.
// Each criterion prints one [PASS]/[FAIL] line; the exit code is nonzero if
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dyco/gwlab.hpp"
#include "dyco/nn.hpp"
#include "dyco/oracle.hpp"
#include "dyco/qubo.hpp"
#include "dyco/report.hpp"
#include "dyco/solver.hpp"
#include "solver_checks.hpp"
#include "support.hpp"

using namespace dyco;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. QUBO losses equal natural objectives on binary points.
Outcome criterion1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  long mismatches = 0, checked = 0;
  for (int gi = 0; gi < 50; ++gi) {
    const int n = 2 + static_cast<int>(rng() % 15);
    const auto g = testing::random_graph(n, 0.2 + 0.6 * (gi % 5) / 4.0, 1000 + gi);
    const auto cut_q = qubo::build_maxcut_qubo(g);
    const auto mis_q = qubo::build_mis_qubo(g);
    for (int a = 0; a < 1000; ++a) {
      std::vector<int> x(n);
      std::vector<double> xr(n);
      for (int i = 0; i < n; ++i) xr[i] = x[i] = static_cast<int>(rng() & 1);
      const int size = std::accumulate(x.begin(), x.end(), 0);
      const double cut = qubo::cut_value(g, x);
      const double violations = static_cast<double>(qubo::violated_edges(g, x));
      mismatches += qubo::qubo_loss(cut_q, xr) != -cut;
      mismatches += qubo::qubo_loss(mis_q, xr) != -size + 2 * violations;
      checked += 2;
    }
  }
  long tours = 0;
  for (int n = 2; n <= 7; ++n) {
    for (int inst = 0; inst < 2; ++inst) {
      const auto dist = testing::random_distances(n, 50 * n + inst);
      const auto q = qubo::build_tsp_qubo(dist, qubo::default_tsp_penalty(dist));
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        const auto x = qubo::tour_to_assignment(perm);
        mismatches += qubo::qubo_loss(q, x) != qubo::tour_length(dist, perm);
        ++tours;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 60,
          fmt("%ld binary points and %ld tours, %ld mismatches, %.1f s", checked, tours, mismatches, secs)};
}

// 2. Analytic gradients against central differences.
Outcome criterion2() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t params = 0;
  for (int c = 0; c < 20; ++c) {
    const auto kind = c % 2 ? nn::ConvKind::Sage : nn::ConvKind::Gcn;
    const int n = 3 + c % 10;
    nn::ModelConfig cfg;
    cfg.nodes = n;
    cfg.d_emb = 24;
    cfg.d_hidden = 12;
    cfg.kind = kind;
    cfg.seed = 700 + c;
    qubo::QuboInstance q;
    graph::GraphSnapshot g;
    if (c % 3 != 2) {
      g = testing::random_graph(n, 0.4, 300 + c);
      if (g.edges.empty()) g = graph::make_snapshot(n, {{0, 1}});
    }
    switch (c % 3) {
      case 0:
        q = qubo::build_maxcut_qubo(g);
        break;
      case 1:
        q = qubo::build_mis_qubo(g);
        break;
      default: {
        const auto dist = testing::random_distances(std::min(n, 6), 300 + c, 20);
        g = graph::complete_graph(dist);
        cfg.nodes = cfg.d_out = dist.n;
        q = qubo::build_tsp_qubo(dist, qubo::default_tsp_penalty(dist));
      }
    }
    const auto model = nn::init_model(cfg);
    const auto r = testing::check_gradients(model, nn::GraphOperator::build(kind, g), q);
    worst = std::max(worst, r.max_relative_error);
    params += r.checked;
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 120,
          fmt("20 configurations, %zu parameters, max relative error %.2e, %.1f s", params, worst, secs)};
}

// 3. Shrink-and-perturb with zero noise.
Outcome criterion3() {
  long bad = 0, checked = 0;
  for (auto kind : {nn::ConvKind::Gcn, nn::ConvKind::Sage}) {
    for (auto subset : {nn::SpSubset::Emb, nn::SpSubset::Gnn, nn::SpSubset::Full}) {
      nn::ModelConfig cfg;
      cfg.nodes = 30;
      cfg.kind = kind;
      cfg.seed = 3;
      auto model = nn::init_model(cfg);
      const auto before = model;
      nn::shrink_perturb(model, {.shrink = 0.4, .perturb = 0.1, .sigma = 0.0, .subset = subset, .seed = 11});
      for (std::size_t p = 0; p < model.params.size(); ++p) {
        const auto& a = model.params[p].value.data;
        const auto& b = before.params[p].value.data;
        const bool inside = nn::in_subset(model.params[p].group, subset);
        for (std::size_t i = 0; i < a.size(); ++i) {
          bad += inside ? a[i] != 0.4 * b[i] : a[i] != b[i];
          ++checked;
        }
      }
    }
  }
  return {bad == 0, fmt("%ld entries over 6 (conv, subset) cases, %ld deviations", checked, bad)};
}

// 4. Exact oracles against enumeration.
Outcome criterion4() {
  const auto start = Clock::now();
  int hk_bad = 0, witness_bad = 0;
  for (int i = 0; i < 30; ++i) {
    const auto dist = testing::random_distances(3 + i % 7, 900 + i);
    const auto hk = oracle::exact_tsp_held_karp(dist);
    hk_bad += hk.value != testing::brute_force_tour(dist) || qubo::tour_length(dist, hk.witness) != hk.value;
  }
  for (int i = 0; i < 30; ++i) {
    const auto g = testing::random_graph(6 + i % 12, 0.35, 1900 + i);
    const auto cut = oracle::exact_maxcut(g);
    witness_bad += qubo::cut_value(g, cut.witness) != cut.value;
    const auto mis = oracle::exact_mis_exhaustive(g);
    const double size = std::accumulate(mis.witness.begin(), mis.witness.end(), 0.0);
    witness_bad += qubo::violated_edges(g, mis.witness) != 0 || size != mis.value;
    witness_bad += oracle::exact_mis(g).value != mis.value;
  }
  const auto burma = graph::parse_tsplib_file(std::string(DYCO_TEST_DATA) + "/burma14.tsp");
  const double burma_opt = oracle::exact_tsp_held_karp(graph::distance_matrix(burma)).value;
  const double secs = seconds_since(start);
  return {hk_bad == 0 && witness_bad == 0 && burma_opt == 3323 && secs < 300,
          fmt("Held-Karp mismatches %d/30, witness mismatches %d, burma14 %.0f (expected 3323), %.1f s", hk_bad,
              witness_bad, burma_opt, secs)};
}

// 5. Static, warm-start and SP(full) trends on a synthetic growth instance.
Outcome criterion5() {
  const auto start = Clock::now();
  const auto events = graph::random_temporal_graph(60, 300, 7);
  const auto inst = graph::build_growth_snapshots(events, 10, 0.1);
  std::vector<double> optima(inst.size());
  for (std::size_t t = 1; t < inst.size(); ++t)
    optima[t] = oracle::solve_snapshot(Problem::MaxCut, inst.snapshots[t], 1).value;

  // Half the default widths: the full 512/256 model needs about 21 minutes
  // for this workload on one core.
  solver::SolveSchedule sched;
  sched.epoch_max = 3000;
  sched.epoch_ws = 3000;
  sched.d_emb = 256;
  sched.d_hidden = 128;
  sched.seed = 2024;
  const std::vector<int> budgets{50, 3000};
  const auto prep = solver::prepare(inst, sched.conv);

  // apr[strategy][budget][seed]
  std::vector<std::vector<std::vector<double>>> apr(3, std::vector<std::vector<double>>(2));
  const solver::Strategy strategies[] = {solver::Strategy::Static, solver::Strategy::Warm, solver::Strategy::Sp};
  for (int rep = 0; rep < 5; ++rep) {
    const auto first = solver::optimize_first(prep, sched, rep);
    for (int s = 0; s < 3; ++s) {
      auto sc = sched;
      sc.strategy = strategies[s];
      const auto trace = solver::run_budget_sweep(prep, sc, budgets, rep, &first);
      for (int b = 0; b < 2; ++b) apr[s][b].push_back(solver::mean_apr(trace, optima, budgets[b]));
    }
    std::fprintf(stderr, "criterion 5: seed %d done, %.0f s\n", rep, seconds_since(start));
  }
  auto med = [&](int s, int b) { return report::median(apr[s][b]); };
  const double st50 = med(0, 0), wa50 = med(1, 0), sp50 = med(2, 0);
  const double st3k = med(0, 1), wa3k = med(1, 1), sp3k = med(2, 1);
  const bool a = wa50 >= st50;
  const bool b = st3k >= wa3k;
  const bool c = sp3k >= wa3k && sp3k >= st3k - 0.01;
  const double secs = seconds_since(start);
  return {a && b && c && secs < 1200,
          fmt("median ApR @50 static %.4f warm %.4f sp %.4f; @3000 static %.4f warm %.4f sp %.4f; "
              "(a) %s (b) %s (c) %s; %.0f s",
              st50, wa50, sp50, st3k, wa3k, sp3k, a ? "ok" : "violated", b ? "ok" : "violated",
              c ? "ok" : "violated", secs)};
}

// 6. End-to-end TSP on burma14 with a moving node.
Outcome criterion6() {
  const auto start = Clock::now();
  const auto nodes = graph::parse_tsplib_file(std::string(DYCO_TEST_DATA) + "/burma14.tsp");
  graph::Point lo = nodes.coords[0], hi = nodes.coords[0];
  for (const auto& p : nodes.coords) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const auto inst = graph::build_moving_node_instance(nodes, lo, hi, 5);
  std::vector<double> optima;
  for (const auto& g : inst.snapshots) optima.push_back(oracle::solve_snapshot(Problem::Tsp, g).value);

  solver::SolveSchedule sched;
  sched.strategy = solver::Strategy::Sp;
  sched.sp_subset = nn::SpSubset::Full;
  sched.conv = nn::ConvKind::Sage;
  sched.lr = 2e-4;
  sched.epoch_max = 10000;
  sched.epoch_ws = 10000;
  sched.checkpoint_every = 100;
  sched.seed = 2024;
  const auto prep = solver::prepare(inst, sched.conv);
  std::vector<double> aprs;
  for (int rep = 0; rep < 5; ++rep) {
    const auto trace = solver::solve(prep, sched, rep);
    aprs.push_back(solver::mean_apr(trace, optima, sched.epoch_ws));
  }
  const double m = report::median(aprs);
  return {m <= 1.25, fmt("median mean ApR %.4f over 5 seeds (min %.4f, max %.4f), %.0f s", m,
                         *std::min_element(aprs.begin(), aprs.end()), *std::max_element(aprs.begin(), aprs.end()),
                         seconds_since(start))};
}

// 7. Hyperplane rounding of the SDP optimum meets the 0.878 guarantee.
Outcome criterion7() {
  std::vector<graph::GraphSnapshot> graphs{
      graph::make_snapshot(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}})};
  for (int seed = 0; graphs.size() < 4; ++seed) {
    auto g = testing::random_graph(8 + seed % 3, 0.45, 7000 + seed);
    if (!g.edges.empty()) graphs.push_back(std::move(g));
  }
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const double opt = oracle::exact_maxcut(graphs[i]).value;
    const auto sdp = gwlab::solve_gw_sdp(graphs[i], {.seed = i});
    const auto r = gwlab::gw_round(graphs[i], sdp.x, 10000, 100 + i);
    const double ratio = r.mean_cut() / opt;
    pass = pass && r.mean_cut() >= 0.878 * opt - 0.01 * opt;
    detail += fmt("%sgraph %zu: E[cut]/c* = %.4f", i ? ", " : "", i, ratio);
  }
  return {pass, detail};
}

// 8. Perturbing the rank-one all-ones point on C5.
Outcome criterion8() {
  const auto start = Clock::now();
  const auto c5 = graph::make_snapshot(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  gwlab::ExperimentConfig cfg;
  cfg.seed = 8;
  const auto rows = gwlab::perturbation_experiment(c5, gwlab::Matrix::Ones(5, 5), cfg);
  bool zero_row = false, positive = false;
  std::string detail;
  for (const auto& r : rows) {
    if (r.lambda == 0.0) zero_row = r.successes == 0 && r.p_hat == 0.0;
    else if (r.p_hat > 0.0 && r.wilson_lo > 0.0) positive = true;
    detail += fmt("lambda %.1f p=%.4f [%.4f, %.4f]; ", r.lambda, r.p_hat, r.wilson_lo, r.wilson_hi);
  }
  const double secs = seconds_since(start);
  return {zero_row && positive && secs < 120, detail + fmt("%.1f s", secs)};
}

// 9. Equivalence and determinism.
Outcome criterion9() {
  bool same = true;
  for (auto p : {Problem::MaxCut, Problem::Mis, Problem::Tsp})
    for (std::uint64_t seed : {1, 2}) same = same && testing::strategies_agree_on_single_snapshot(p, seed);
  double deviation = 0.0;
  for (std::uint64_t seed : {3, 4, 5}) deviation = std::max(deviation, testing::warm_limit_deviation(seed));
  bool reproducible = true;
  for (std::uint64_t seed : {6, 7}) reproducible = reproducible && testing::runs_are_reproducible(seed);
  return {same && deviation < 1e-4 && reproducible,
          fmt("single-snapshot equivalence %s, warm-limit max relative deviation %.2e, bitwise reproducible %s",
              same ? "yes" : "no", deviation, reproducible ? "yes" : "no")};
}

const std::function<Outcome()> kCriteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                              criterion6, criterion7, criterion8, criterion9};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int c = 1; c <= 9; ++c) selected.push_back(c);
  int failures = 0;
  for (int c : selected) {
    if (c < 1 || c > 9) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    Outcome o;
    try {
      o = kCriteria[c - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", c, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
