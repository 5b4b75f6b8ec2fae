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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

class Sandbox {
 public:
  Sandbox() : dir_(fs::temp_directory_path() / ("dyco_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    const auto log = dir_ / "out.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" DYCO_CLI "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
};

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

const std::string kTiny = " --d-emb 8 --d-hidden 4 --epoch-max 10 --epoch-ws 10";

}  // namespace

TEST_CASE("help for every subcommand exits 0") {
  Sandbox box;
  CHECK(box.run("--help").code == 0);
  for (const char* sub : {"build", "oracle", "solve", "gwlab", "report"}) {
    const auto r = box.run(std::string(sub) + " --help");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "Usage"));
  }
}

TEST_CASE("usage errors exit 2") {
  Sandbox box;
  CHECK(box.run("").code == 2);
  CHECK(box.run("frobnicate").code == 2);
  CHECK(box.run("build --random 10,20 --bogus").code == 2);
  CHECK(box.run("build --problem knapsack --random 10,20").code == 2);
  CHECK(box.run("build --input missing.txt").code == 2);
  CHECK(box.run("oracle --instance missing.json").code == 2);
}

TEST_CASE("build, oracle, solve and report work end to end") {
  Sandbox box;
  auto r = box.run("build --random 12,30 --seed 1 --snapshots 3 --fraction 0.34 -o inst.json");
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "3 12 30"));
  CHECK(fs::exists(box.path("inst.json")));

  r = box.run("oracle --instance inst.json");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "computed 2 snapshot(s)"));
  r = box.run("oracle --instance inst.json");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "computed 0 snapshot(s)"));

  r = box.run("solve --instance inst.json --strategy warm --budgets 5,10 --apr -o warm" + kTiny);
  CHECK(r.code == 0);
  CHECK(fs::exists(box.path("warm/trace.json")));
  CHECK(fs::exists(box.path("warm/budgets.csv")));
  r = box.run("solve --instance inst.json --strategy static --budgets 5,10 -o static" + kTiny);
  CHECK(r.code == 0);

  r = box.run("report --trace warm/trace.json --trace static/trace.json --oracle-cache oracle.json -o rep");
  CHECK(r.code == 0);
  CHECK(fs::exists(box.path("rep/table_mean.csv")));
  CHECK(fs::exists(box.path("rep/table_median.csv")));
  CHECK(fs::exists(box.path("rep/snapshots.csv")));
}

TEST_CASE("solve validates its arguments") {
  Sandbox box;
  REQUIRE(box.run("build --random 10,20 --seed 2 --snapshots 2 --fraction 0.5 -o inst.json").code == 0);
  CHECK(box.run("solve --instance inst.json --budgets 10,5 -o s" + kTiny).code == 2);
  CHECK(box.run("solve --instance inst.json --budgets 50 -o s" + kTiny).code == 2);
  CHECK(box.run("solve --instance inst.json --strategy cold -o s" + kTiny).code == 2);
  CHECK(box.run("solve --instance inst.json --lr 0 -o s" + kTiny).code == 2);
  {
    std::ofstream cfg(box.path("cfg.json"));
    cfg << R"({"strategy": "sp", "sp_subset": "emb", "epoch_ws": 6, "d_emb": 8, "d_hidden": 4, "epoch_max": 6})";
  }
  CHECK(box.run("solve --instance inst.json --config cfg.json -o s").code == 0);
  std::ifstream trace(box.path("s/trace.json"));
  std::stringstream ss;
  ss << trace.rdbuf();
  CHECK(contains(ss.str(), "\"sp_subset\":\"emb\""));
}

TEST_CASE("malformed and invalid instances exit 2") {
  Sandbox box;
  {
    std::ofstream(box.path("trunc.json")) << "{";
    std::ofstream(box.path("loop.json"))
        << R"({"problem": "maxcut", "snapshots": [{"n": 3, "edges": [[1, 1, 1.0]]}]})";
  }
  CHECK(box.run("oracle --instance trunc.json").code == 2);
  const auto r = box.run("oracle --instance loop.json");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "self-loop"));
}

TEST_CASE("capacity errors exit 3") {
  Sandbox box;
  REQUIRE(box.run("build --problem mis --random 70,100 -o mis.json").code == 0);
  const auto r = box.run("oracle --instance mis.json");
  CHECK(r.code == 3);
  CHECK(contains(r.out, "at most"));
}

TEST_CASE("gwlab modes") {
  Sandbox box;
  auto r = box.run("gwlab --mode round --cycle 5 --rounding-trials 200");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "optimal_cut 4"));
  r = box.run("gwlab --mode perturb --cycle 5 --x0 ones --perturbations 10 --rounding-trials 10 -o p.csv");
  CHECK(r.code == 0);
  CHECK(fs::exists(box.path("p.csv")));
  CHECK(box.run("gwlab --mode nope --cycle 5").code == 2);
}
