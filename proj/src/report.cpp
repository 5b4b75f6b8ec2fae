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
#include "dyco/report.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dyco/error.hpp"

namespace dyco::report {

nlohmann::json solve_document(const std::vector<solver::SolveTrace>& traces, const solver::SolveSchedule& sched,
                              const std::vector<int>& budgets, const graph::DynamicInstance& inst,
                              bool include_relaxed) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : traces) list.push_back(solver::to_json(t, include_relaxed));
  const std::vector<int> cuts = budgets.empty() ? std::vector<int>{sched.epoch_ws} : budgets;
  return {{"format", "dyco-solve-1"},
          {"instance_hash", oracle::instance_hash(inst)},
          {"problem", to_string(inst.problem)},
          {"schedule", solver::to_json(sched)},
          {"budgets", cuts},
          {"traces", std::move(list)}};
}

MethodRuns runs_from_document(const nlohmann::json& doc) {
  MethodRuns runs;
  try {
    if (doc.value("format", "") != "dyco-solve-1") throw InvalidArgument("not a solve document");
    const auto& sched = doc.at("schedule");
    runs.label = sched.at("strategy").get<std::string>();
    if (runs.label == "sp") runs.label += "-" + sched.at("sp_subset").get<std::string>();
    runs.instance_hash = doc.at("instance_hash").get<std::string>();
    runs.problem = parse_problem(doc.at("problem").get<std::string>());
    runs.epoch_max = sched.at("epoch_max").get<int>();
    runs.budgets = doc.at("budgets").get<std::vector<int>>();
    for (const auto& trace : doc.at("traces")) {
      std::vector<std::vector<double>> obj, sec;
      const auto& snaps = trace.at("snapshots");
      for (std::size_t t = 0; t < snaps.size(); ++t) {
        const auto& cuts = snaps[t].at("cuts");
        if (cuts.empty()) throw InvalidArgument("snapshot without cuts");
        std::vector<double> o, s;
        for (int b : runs.budgets) {
          const nlohmann::json* hit = &cuts.back();
          if (t > 0) {
            hit = nullptr;
            for (const auto& c : cuts)
              if (c.at("epochs").get<int>() == b) hit = &c;
            if (!hit) throw InvalidArgument("missing cut at " + std::to_string(b) + " epochs");
          }
          o.push_back(hit->at("solution").at("natural_objective").get<double>());
          s.push_back(hit->at("seconds").get<double>());
        }
        obj.push_back(std::move(o));
        sec.push_back(std::move(s));
      }
      runs.objectives.push_back(std::move(obj));
      runs.seconds.push_back(std::move(sec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed solve document: ") + e.what());
  }
  if (runs.objectives.empty()) throw InvalidArgument("solve document has no traces");
  return runs;
}

MethodRuns load_runs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return runs_from_document(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::vector<double> optima_from_cache(const oracle::Cache& cache, const std::string& instance_hash,
                                      std::size_t snapshots, std::size_t first) {
  if (cache.instance_hash != instance_hash) throw InvalidArgument("oracle cache belongs to a different instance");
  std::vector<double> optima(snapshots, 0.0);
  for (std::size_t t = first; t <= snapshots; ++t) {
    const auto it = cache.snapshots.find(static_cast<int>(t));
    if (it == cache.snapshots.end())
      throw InvalidArgument("oracle cache lacks snapshot " + std::to_string(t));
    optima[t - 1] = it->second.value;
  }
  return optima;
}

std::vector<double> apr_by_repetition(const MethodRuns& runs, const std::vector<double>& optima, std::size_t b) {
  std::vector<double> out;
  for (const auto& rep : runs.objectives) {
    std::vector<double> achieved, opt;
    const std::size_t skip = rep.size() > 1 ? 1 : 0;
    for (std::size_t t = skip; t < rep.size(); ++t) {
      achieved.push_back(rep[t][b]);
      opt.push_back(optima.at(t));
    }
    out.push_back(oracle::mean_apr(achieved, opt));
  }
  return out;
}

Table build_table(const std::vector<MethodRuns>& runs, const oracle::Cache& cache) {
  if (runs.empty()) throw InvalidArgument("report needs at least one solve document");
  Table table;
  table.budgets = runs.front().budgets;
  for (const auto& r : runs) {
    if (r.budgets != table.budgets) throw InvalidArgument("solve documents use different budgets");
    if (r.instance_hash != runs.front().instance_hash) throw InvalidArgument("solve documents cover different instances");
    const auto optima = optima_from_cache(cache, r.instance_hash, r.snapshot_count(), r.snapshot_count() > 1 ? 2 : 1);
    table.methods.push_back(r.label);
    std::vector<double> means, medians;
    for (std::size_t b = 0; b < table.budgets.size(); ++b) {
      const auto aprs = apr_by_repetition(r, optima, b);
      means.push_back(mean(aprs));
      medians.push_back(median(aprs));
    }
    table.mean.push_back(std::move(means));
    table.median.push_back(std::move(medians));
  }
  return table;
}

void write_table_csv(std::ostream& out, const Table& table, Statistic stat) {
  const auto old = out.precision(6);
  out << "method";
  for (int b : table.budgets) out << ',' << b;
  out << '\n';
  const auto& values = stat == Statistic::Mean ? table.mean : table.median;
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    out << table.methods[m];
    for (double v : values[m]) out << ',' << std::fixed << v << std::defaultfloat;
    out << '\n';
  }
  out.precision(old);
}

void write_snapshot_csv(std::ostream& out, const std::vector<MethodRuns>& runs, const oracle::Cache& cache) {
  const auto old = out.precision(6);
  out << "snapshot,method,budget_epochs,mean_apr,median_apr\n";
  for (const auto& r : runs) {
    const std::size_t T = r.snapshot_count();
    const auto optima = optima_from_cache(cache, r.instance_hash, T, T > 1 ? 2 : 1);
    for (std::size_t t = T > 1 ? 1 : 0; t < T; ++t) {
      for (std::size_t b = 0; b < r.budgets.size(); ++b) {
        std::vector<double> ratios;
        for (const auto& rep : r.objectives) ratios.push_back(oracle::approximation_ratio(rep[t][b], optima[t]));
        out << t + 1 << ',' << r.label << ',' << r.budgets[b] << ',' << std::fixed << mean(ratios) << ','
            << median(ratios) << std::defaultfloat << '\n';
      }
    }
  }
  out.precision(old);
}

void write_budget_csv(std::ostream& out, const MethodRuns& runs, const std::vector<double>* optima) {
  const auto old = out.precision(10);
  out << "snapshot,budget_epochs,seconds,objective,apr\n";
  const std::size_t T = runs.snapshot_count();
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t nb = t == 0 ? 1 : runs.budgets.size();
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<double> secs, objs, ratios;
      for (std::size_t r = 0; r < runs.objectives.size(); ++r) {
        secs.push_back(runs.seconds[r][t][b]);
        objs.push_back(runs.objectives[r][t][b]);
        if (optima && (*optima)[t] != 0.0) ratios.push_back(oracle::approximation_ratio(objs.back(), (*optima)[t]));
      }
      out << t + 1 << ',' << (t == 0 ? runs.epoch_max : runs.budgets[b]) << ',' << median(secs) << ','
          << median(objs) << ',';
      if (!ratios.empty()) out << median(ratios);
      out << '\n';
    }
  }
  out.precision(old);
}

}  // namespace dyco::report
