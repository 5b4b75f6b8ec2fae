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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dyco/oracle.hpp"
#include "dyco/solver.hpp"

namespace dyco::report {

/// Solve output document: schedule, budgets, instance hash and one trace per
/// repetition.
nlohmann::json solve_document(const std::vector<solver::SolveTrace>& traces, const solver::SolveSchedule& sched,
                              const std::vector<int>& budgets, const graph::DynamicInstance& inst,
                              bool include_relaxed = true);

/// Objectives of one method, flattened from a solve document.
struct MethodRuns {
  std::string label;
  std::string instance_hash;
  Problem problem = Problem::MaxCut;
  int epoch_max = 0;
  std::vector<int> budgets;
  /// [rep][snapshot][budget]; snapshot 1 repeats its single epoch_max cut.
  std::vector<std::vector<std::vector<double>>> objectives;
  std::vector<std::vector<std::vector<double>>> seconds;

  std::size_t snapshot_count() const { return objectives.empty() ? 0 : objectives.front().size(); }
};

MethodRuns runs_from_document(const nlohmann::json& doc);
MethodRuns load_runs(const std::string& path);

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

/// Optimum per snapshot (index 0 = snapshot 1). InvalidArgument when the cache
/// belongs to another instance or lacks a snapshot in [first, T].
std::vector<double> optima_from_cache(const oracle::Cache& cache, const std::string& instance_hash,
                                      std::size_t snapshots, std::size_t first = 1);

/// Per-repetition mean ApR over snapshots 2..T at budget index b.
std::vector<double> apr_by_repetition(const MethodRuns& runs, const std::vector<double>& optima, std::size_t b);

enum class Statistic { Mean, Median };

struct Table {
  std::vector<int> budgets;
  std::vector<std::string> methods;
  /// [method][budget]
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> median;
};

/// One row per method, one column per budget. All runs must share budgets and
/// instance.
Table build_table(const std::vector<MethodRuns>& runs, const oracle::Cache& cache);

/// method,<budget>,<budget>,...
void write_table_csv(std::ostream& out, const Table& table, Statistic stat);

/// snapshot,method,budget_epochs,mean_apr,median_apr for snapshots 2..T.
void write_snapshot_csv(std::ostream& out, const std::vector<MethodRuns>& runs, const oracle::Cache& cache);

/// snapshot,budget_epochs,seconds,objective,apr with medians across
/// repetitions. The apr column is empty without optima.
void write_budget_csv(std::ostream& out, const MethodRuns& runs, const std::vector<double>* optima);

}  // namespace dyco::report
