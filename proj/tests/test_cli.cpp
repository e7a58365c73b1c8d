// Copyright 2026 The APQ Search Authors.
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
//
// End-to-end checks of the command-line surface. Each test drives the real
// binary in a scratch directory.

#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apq/cost_model.hpp"
#include "apq/dataset_io.hpp"
#include "apq/json_io.hpp"
#include "apq/predictor.hpp"
#include "apq/quantizer.hpp"
#include "apq/search_space.hpp"
#include "apq/tensor_io.hpp"

namespace apq {
namespace {

namespace fs = std::filesystem;

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("apq_cli_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

int run_cli(const std::string& args) {
  const std::string command =
      std::string(APQ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  return std::system(command.c_str());
}

std::string tiny_space_path() {
  return std::string(APQ_SPACES_DIR) + "/tiny.json";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  return lines;
}

TEST_CASE("gen-data writes the requested record count plus a header") {
  Scratch scratch;
  const std::string out = scratch.path("fp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() + " --fp 100 --out " +
                  out) == 0);
  REQUIRE(count_lines(out) == 101);
  REQUIRE(fs::exists(out + ".manifest.json"));
  const LoadedDataset dataset = load_dataset(out);
  REQUIRE(dataset.records.size() == 100);
  REQUIRE(dataset.space_fingerprint == space_fingerprint(tiny_space()));
}

TEST_CASE("gen-data reruns are byte-identical") {
  Scratch scratch;
  const std::string a = scratch.path("a.jsonl");
  const std::string b = scratch.path("b.jsonl");
  const std::string flags = "gen-data --space " + tiny_space_path() +
                            " --mp 40 40 10 --oracle-seed 3 ";
  REQUIRE(run_cli(flags + "--out " + a) == 0);
  REQUIRE(run_cli(flags + "--out " + b) == 0);
  REQUIRE(read_file(a) == read_file(b));
}

TEST_CASE("gen-data mp grouped structure holds") {
  Scratch scratch;
  const std::string out = scratch.path("mp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() +
                  " --mp 50 50 10 --out " + out) == 0);
  const LoadedDataset dataset = load_dataset(out);
  REQUIRE(dataset.records.size() == 100);
  std::map<std::string, int> grouped;
  for (std::size_t i = 50; i < 100; ++i) {
    ++grouped[arch_to_json(dataset.records[i].arch).dump()];
  }
  REQUIRE(grouped.size() == 5);
  for (const auto& [arch, count] : grouped) REQUIRE(count == 10);
}

TEST_CASE("gen-data requires exactly one dataset kind") {
  Scratch scratch;
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() + " --out " +
                  scratch.path("x.jsonl")) != 0);
}

TEST_CASE("train emits checkpoint and metrics with declared keys") {
  Scratch scratch;
  const std::string data = scratch.path("mp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() +
                  " --mp 150 150 10 --out " + data) == 0);
  const std::string ckpt = scratch.path("joint.ckpt");
  REQUIRE(run_cli("train --data " + data + " --out " + ckpt +
                  " --epochs 3 --seed 1") == 0);
  const LoadedPredictor predictor = load_predictor(ckpt);
  REQUIRE(predictor.variant == "joint");
  REQUIRE(predictor.space_fingerprint == space_fingerprint(tiny_space()));
  const Json metrics = Json::parse(read_file(ckpt + ".metrics.json"));
  REQUIRE(metrics.contains("final_mse"));
  REQUIRE(metrics.contains("pairwise_accuracy"));
  REQUIRE(metrics["final_mse"].is_number());
  REQUIRE(metrics["pairwise_accuracy"].is_number());
}

TEST_CASE("transfer training rejects a checkpoint from another space") {
  Scratch scratch;
  // Full-precision checkpoint for the default space.
  const std::string fp_ckpt = scratch.path("fp.ckpt");
  {
    const SearchSpaceConfig def = default_space();
    const EncodingLayout layout(def);
    save_predictor(init_params(layout.arch_dim, 0), "fp",
                   space_fingerprint(def), fp_ckpt);
  }
  const std::string data = scratch.path("mp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() +
                  " --mp 40 40 10 --out " + data) == 0);
  REQUIRE(run_cli("train --data " + data + " --out " + scratch.path("j.ckpt") +
                  " --space " + tiny_space_path() + " --transfer-from " +
                  fp_ckpt + " --epochs 1") != 0);
}

TEST_CASE("search respects the latency bound and is reproducible") {
  Scratch scratch;
  const std::string table = scratch.path("costs.json");
  REQUIRE(run_cli("gen-cost-table --space " + tiny_space_path() + " --out " +
                  table) == 0);

  const std::string fp_data = scratch.path("fp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() + " --fp 400 --out " +
                  fp_data) == 0);
  const std::string fp_ckpt = scratch.path("fp.ckpt");
  REQUIRE(run_cli("train --data " + fp_data + " --out " + fp_ckpt +
                  " --epochs 10 --seed 2") == 0);

  const std::string mp_data = scratch.path("mp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() +
                  " --mp 200 200 10 --out " + mp_data) == 0);
  const std::string joint_ckpt = scratch.path("joint.ckpt");
  REQUIRE(run_cli("train --data " + mp_data + " --out " + joint_ckpt +
                  " --space " + tiny_space_path() + " --transfer-from " +
                  fp_ckpt + " --epochs 5") == 0);

  // Pick a mid-range latency bound from the table.
  const SearchSpaceConfig space = tiny_space();
  const CostTable loaded = load_cost_table(table, space);
  const double floor_latency = min_achievable_cost(loaded, space).latency_ms;
  const double bound = floor_latency * 1.4;

  const std::string results_a = scratch.path("results_a.json");
  const std::string results_b = scratch.path("results_b.json");
  const std::string flags = "search --space " + tiny_space_path() +
                            " --predictor " + joint_ckpt + " --cost-table " +
                            table + " --max-latency-ms " +
                            std::to_string(bound) +
                            " --population 20 --top-k 5 --n-mutation 10 "
                            "--n-crossover 10 --iters 10 --seed 4 ";
  REQUIRE(run_cli(flags + "--out " + results_a) == 0);
  REQUIRE(run_cli(flags + "--out " + results_b) == 0);
  REQUIRE(read_file(results_a) == read_file(results_b));

  const Json results = Json::parse(read_file(results_a));
  REQUIRE(results["top_k"].size() == 5);
  for (const Json& candidate : results["top_k"]) {
    REQUIRE(candidate["latency_ms"].get<double>() <= bound);
  }
  double prev_best = 0.0;
  for (const Json& point : results["history"]) {
    REQUIRE(point["best"].get<double>() >= prev_best);
    prev_best = point["best"].get<double>();
  }
}

TEST_CASE("infeasible constraints exit with the cost floor in the message") {
  Scratch scratch;
  const std::string table = scratch.path("costs.json");
  REQUIRE(run_cli("gen-cost-table --space " + tiny_space_path() + " --out " +
                  table) == 0);
  const std::string data = scratch.path("mp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() +
                  " --mp 40 40 10 --out " + data) == 0);
  const std::string ckpt = scratch.path("joint.ckpt");
  REQUIRE(run_cli("train --data " + data + " --out " + ckpt + " --epochs 1") ==
          0);
  const std::string command =
      std::string(APQ_CLI_PATH) + " search --space " + tiny_space_path() +
      " --predictor " + ckpt + " --cost-table " + table +
      " --max-latency-ms 1e-6 --max-resample 50 --out " +
      scratch.path("r.json") + " 2> " + scratch.path("stderr.txt");
  REQUIRE(std::system(command.c_str()) != 0);
  const std::string message = read_file(scratch.path("stderr.txt"));
  REQUIRE(message.find("minimum achievable latency") != std::string::npos);
}

TEST_CASE("search without a cost table fails") {
  Scratch scratch;
  const std::string fp_data = scratch.path("fp.jsonl");
  REQUIRE(run_cli("gen-data --space " + tiny_space_path() + " --fp 50 --out " +
                  fp_data) == 0);
  const std::string ckpt = scratch.path("p.ckpt");
  REQUIRE(run_cli("train --data " + fp_data + " --out " + ckpt +
                  " --epochs 1") == 0);
  REQUIRE(run_cli("search --space " + tiny_space_path() + " --predictor " +
                  ckpt + " --cost-table " + scratch.path("missing.json") +
                  " --max-latency-ms 5 --out " + scratch.path("r.json")) != 0);
}

TEST_CASE("quantize round-trips tensor bytes deterministically") {
  Scratch scratch;
  const std::string input = scratch.path("tensor.bin");
  {
    Tensor tensor;
    tensor.shape = {64, 2};
    Rng rng(5);
    for (int i = 0; i < 128; ++i) {
      tensor.values.push_back(2.0 * rng.uniform_real() - 1.0);
    }
    save_tensor(tensor, input);
  }
  const std::string out_a = scratch.path("q_a.bin");
  const std::string out_b = scratch.path("q_b.bin");
  REQUIRE(run_cli("quantize --tensor " + input + " --bits 4 --calibrate --out " +
                  out_a) == 0);
  REQUIRE(run_cli("quantize --tensor " + input + " --bits 4 --calibrate --out " +
                  out_b) == 0);
  REQUIRE(read_file(out_a) == read_file(out_b));
  const Json report = Json::parse(read_file(out_a + ".report.json"));
  REQUIRE(report["chosen_v"].get<double>() > 0.0);
  const Tensor quantized = load_tensor(out_a);
  REQUIRE(quantized.shape == std::vector<std::int64_t>{64, 2});
  // Fixed clip path also works and reports the error bound.
  REQUIRE(run_cli("quantize --tensor " + input +
                  " --bits 8 --clip 0.5 --out " + scratch.path("q_c.bin")) ==
          0);
  const Json fixed = Json::parse(read_file(scratch.path("q_c.bin") +
                                           ".report.json"));
  const QuantScheme scheme{8, 0.5, QuantMode::kSymmetricWeights};
  REQUIRE(fixed["max_abs_error"].get<double>() <= quant_step(scheme) / 2 + 1e-9);
}

TEST_CASE("enumerate lists every pair of the tiny space") {
  Scratch scratch;
  const std::string out = scratch.path("pairs.jsonl");
  REQUIRE(run_cli("enumerate --space " + tiny_space_path() +
                  " --limit 100000 --out " + out) == 0);
  const SearchSpaceConfig space = tiny_space();
  const std::size_t expected =
      static_cast<std::size_t>(joint_cardinality(space));
  REQUIRE(count_lines(out) == expected + 1);
  // A limit below the cardinality is an error.
  REQUIRE(run_cli("enumerate --space " + tiny_space_path() +
                  " --limit 10 --out " + scratch.path("nope.jsonl")) != 0);
}

TEST_CASE("experiment-transfer emits the full CSV grid") {
  Scratch scratch;
  const std::string out_dir = scratch.path("exp");
  // Miniature settings: this checks plumbing, not the headline claim.
  REQUIRE(run_cli("experiment-transfer --space " + tiny_space_path() +
                  " --out " + out_dir +
                  " --budgets 40 80 --seeds 0 1 --fp-size 100 --test-size 60 "
                  "--policies-per-arch 10 --quiet") == 0);
  const std::string csv = read_file(out_dir + "/transfer_experiment.csv");
  std::size_t rows = 0;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  REQUIRE(line == "budget,seed,variant,pairwise_acc");
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  REQUIRE(rows == 2 * 2 * 2);
  REQUIRE(fs::exists(out_dir + "/summary.json"));
  REQUIRE(fs::exists(out_dir + "/manifest.json"));
}

}  // namespace
}  // namespace apq
