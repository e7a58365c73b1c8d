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
// Command-line surface for the joint architecture / pruning / quantization
// search pipeline: dataset generation against the synthetic oracle, predictor
// training and transfer, cost-table synthesis, constrained evolutionary
// search, the transfer ablation experiment, tensor quantization, and
// exhaustive enumeration of small spaces. Every command is deterministic
// given its flags and emits a manifest next to its outputs.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apq/cost_model.hpp"
#include "apq/dataset_io.hpp"
#include "apq/encoding.hpp"
#include "apq/errors.hpp"
#include "apq/evolution.hpp"
#include "apq/experiment.hpp"
#include "apq/json_io.hpp"
#include "apq/manifest.hpp"
#include "apq/oracle.hpp"
#include "apq/predictor.hpp"
#include "apq/quantizer.hpp"
#include "apq/search_space.hpp"
#include "apq/tensor_io.hpp"

namespace {

using apq::Json;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

bool g_quiet = false;

void say(const std::string& message) {
  if (!g_quiet) std::cerr << message << "\n";
}

apq::OracleConfig resolve_oracle_config(const std::string& oracle_config_path,
                                        std::optional<std::uint64_t> oracle_seed) {
  apq::OracleConfig cfg;
  if (!oracle_config_path.empty()) {
    std::ifstream in(oracle_config_path);
    if (!in) throw apq::IoError("cannot open oracle config: " + oracle_config_path);
    Json j;
    in >> j;
    cfg = apq::oracle_config_from_json(j);
  }
  if (oracle_seed) cfg.seed = *oracle_seed;
  cfg.check_valid();
  return cfg;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataOpts {
  std::string space_path;
  std::string out_path;
  std::vector<std::size_t> fp;  // [n]
  std::vector<std::size_t> mp;  // [n_random, n_grouped, policies_per_arch]
  std::string oracle_config_path;
  std::optional<std::uint64_t> oracle_seed;
  std::optional<std::uint64_t> sampling_seed;
};

int run_gen_data(const GenDataOpts& opts) {
  Timer timer;
  if (opts.fp.empty() == opts.mp.empty()) {
    throw apq::ConfigError("pass exactly one of --fp N or --mp NR NG K");
  }
  const apq::SearchSpaceConfig space = apq::load_space(opts.space_path);
  const apq::OracleConfig oracle_cfg =
      resolve_oracle_config(opts.oracle_config_path, opts.oracle_seed);
  apq::DatasetWriter writer(opts.out_path, apq::space_fingerprint(space),
                            oracle_cfg);
  const auto sink = [&writer](const apq::DatasetRecord& r) { writer.write(r); };
  Json counts;
  if (!opts.fp.empty()) {
    apq::gen_fp_dataset(oracle_cfg, space, opts.fp[0], sink, opts.sampling_seed);
    counts = Json{{"fp", opts.fp[0]}};
  } else {
    apq::gen_mp_dataset(oracle_cfg, space, opts.mp[0], opts.mp[1], opts.mp[2],
                        sink, opts.sampling_seed);
    counts = Json{{"mp_random", opts.mp[0]},
                  {"mp_grouped", opts.mp[1]},
                  {"policies_per_arch", opts.mp[2]}};
  }
  say("wrote " + std::to_string(writer.count()) + " records to " + opts.out_path);

  apq::RunManifest manifest;
  manifest.command = "gen-data";
  manifest.resolved_config =
      Json{{"space", opts.space_path},
           {"counts", counts},
           {"oracle_config", apq::oracle_config_to_json(oracle_cfg)},
           {"sampling_seed", opts.sampling_seed.has_value()
                                 ? Json(*opts.sampling_seed)
                                 : Json(nullptr)},
           {"out", opts.out_path}};
  manifest.input_fingerprints[opts.space_path] =
      apq::file_fingerprint(opts.space_path);
  manifest.wall_clock_seconds = timer.seconds();
  apq::write_manifest(manifest, opts.out_path + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// gen-cost-table

struct GenCostTableOpts {
  std::string space_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  apq::HardwareProfile profile;
};

int run_gen_cost_table(const GenCostTableOpts& opts) {
  Timer timer;
  const apq::SearchSpaceConfig space = apq::load_space(opts.space_path);
  const std::uint64_t seed = opts.seed.value_or(space.seed);
  const apq::CostTable table =
      apq::build_synthetic_table(space, opts.profile, seed);
  apq::save_cost_table(table, opts.out_path);
  say("wrote " + std::to_string(table.entries.size()) + " cost entries to " +
      opts.out_path);

  apq::RunManifest manifest;
  manifest.command = "gen-cost-table";
  manifest.resolved_config =
      Json{{"space", opts.space_path},
           {"seed", seed},
           {"hardware", Json{{"name", opts.profile.name},
                             {"alpha_latency", opts.profile.alpha_latency},
                             {"beta_latency", opts.profile.beta_latency},
                             {"alpha_energy", opts.profile.alpha_energy},
                             {"beta_energy", opts.profile.beta_energy},
                             {"jitter_rel", opts.profile.jitter_rel}}},
           {"out", opts.out_path}};
  manifest.input_fingerprints[opts.space_path] =
      apq::file_fingerprint(opts.space_path);
  manifest.wall_clock_seconds = timer.seconds();
  apq::write_manifest(manifest, opts.out_path + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string data_path;
  std::string out_path;
  std::string space_path;
  std::string transfer_from;
  apq::TrainConfig config;
  bool lr_given = false;
  bool epochs_given = false;
  double holdout_fraction = 0.1;
};

int run_train(TrainOpts opts) {
  Timer timer;
  const apq::LoadedDataset dataset = apq::load_dataset(opts.data_path);
  if (dataset.records.size() < 2) {
    throw apq::ConfigError("dataset has fewer than 2 records");
  }
  std::optional<apq::SearchSpaceConfig> space;
  if (!opts.space_path.empty()) {
    space = apq::load_space(opts.space_path);
    if (apq::space_fingerprint(*space) != dataset.space_fingerprint) {
      throw apq::ConfigError("dataset " + opts.data_path +
                             " was generated for a different space than " +
                             opts.space_path);
    }
  }

  const std::vector<apq::LabeledSample> all = dataset.samples();
  const std::size_t holdout =
      static_cast<std::size_t>(opts.holdout_fraction * all.size());
  const std::vector<apq::LabeledSample> train_set(all.begin(),
                                                  all.end() - holdout);
  const std::vector<apq::LabeledSample> holdout_set(all.end() - holdout,
                                                    all.end());
  const int input_dim = static_cast<int>(train_set.front().encoding.size());
  const std::string variant = dataset.mixed_precision() ? "joint" : "fp";

  apq::MlpParams init;
  if (!opts.transfer_from.empty()) {
    if (!space) {
      throw apq::ConfigError("--transfer-from requires --space");
    }
    const apq::LoadedPredictor fp = apq::load_predictor(opts.transfer_from);
    if (fp.space_fingerprint != dataset.space_fingerprint) {
      throw apq::ConfigError(
          "checkpoint " + opts.transfer_from +
          " belongs to a different space than the training dataset");
    }
    if (fp.variant != "fp") {
      throw apq::ConfigError("--transfer-from expects a full-precision checkpoint");
    }
    if (variant != "joint") {
      throw apq::ConfigError("transfer training needs a mixed-precision dataset");
    }
    init = apq::transfer_init(fp.params, *space);
    // Transfer fine-tuning defaults unless explicitly overridden.
    const apq::TrainConfig finetune = apq::transfer_finetune_config();
    if (!opts.lr_given) opts.config.learning_rate = finetune.learning_rate;
    if (!opts.epochs_given) opts.config.epochs = finetune.epochs;
  } else {
    init = apq::init_params(input_dim, opts.config.seed,
                            opts.config.weight_init_scale);
  }

  const apq::TrainResult trained = apq::train(init, train_set, opts.config);
  apq::save_predictor(trained.params, variant, dataset.space_fingerprint,
                      opts.out_path);

  Json metrics{{"final_mse", trained.final_mse},
               {"pairwise_accuracy", nullptr},
               {"variant", variant},
               {"input_dim", input_dim},
               {"train_records", train_set.size()},
               {"holdout_records", holdout_set.size()}};
  if (holdout_set.size() >= 2) {
    metrics["pairwise_accuracy"] =
        apq::pairwise_accuracy(trained.params, holdout_set);
  }
  {
    std::ofstream out(opts.out_path + ".metrics.json");
    if (!out) throw apq::IoError("cannot write metrics JSON");
    out << metrics.dump(2) << "\n";
  }
  say("final_mse=" + std::to_string(trained.final_mse) +
      (holdout_set.size() >= 2
           ? " holdout_pairwise=" +
                 std::to_string(metrics["pairwise_accuracy"].get<double>())
           : ""));

  apq::RunManifest manifest;
  manifest.command = "train";
  manifest.resolved_config =
      Json{{"data", opts.data_path},
           {"space", opts.space_path.empty() ? Json(nullptr)
                                             : Json(opts.space_path)},
           {"transfer_from", opts.transfer_from.empty()
                                 ? Json(nullptr)
                                 : Json(opts.transfer_from)},
           {"learning_rate", opts.config.learning_rate},
           {"batch_size", opts.config.batch_size},
           {"epochs", opts.config.epochs},
           {"weight_init_scale", opts.config.weight_init_scale},
           {"seed", opts.config.seed},
           {"holdout_fraction", opts.holdout_fraction},
           {"out", opts.out_path}};
  manifest.input_fingerprints[opts.data_path] =
      apq::file_fingerprint(opts.data_path);
  if (!opts.transfer_from.empty()) {
    manifest.input_fingerprints[opts.transfer_from] =
        apq::file_fingerprint(opts.transfer_from);
  }
  manifest.wall_clock_seconds = timer.seconds();
  apq::write_manifest(manifest, opts.out_path + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// search

struct SearchOpts {
  std::string space_path;
  std::string predictor_path;
  std::string cost_table_path;
  std::string out_path;
  apq::Constraint constraint;
  apq::EvolutionConfig config;
  bool seed_given = false;
  bool eval_oracle = false;
  std::string oracle_config_path;
  std::optional<std::uint64_t> oracle_seed;
};

int run_search(SearchOpts opts) {
  Timer timer;
  const apq::SearchSpaceConfig space = apq::load_space(opts.space_path);
  if (!opts.seed_given) opts.config.seed = space.seed;
  const apq::CostTable table =
      apq::load_cost_table(opts.cost_table_path, space);
  const apq::LoadedPredictor predictor =
      apq::load_predictor(opts.predictor_path);
  if (predictor.space_fingerprint != apq::space_fingerprint(space)) {
    throw apq::ConfigError("predictor " + opts.predictor_path +
                           " was trained for a different space");
  }
  if (predictor.variant != "joint") {
    throw apq::ConfigError(
        "search needs a quantization-aware (joint) predictor checkpoint");
  }
  opts.constraint.check_valid();

  apq::SearchResult result;
  try {
    result = apq::search(space, opts.constraint, table,
                         apq::predictor_scorer(predictor.params, space),
                         opts.config);
  } catch (const apq::InfeasibleConstraintError& e) {
    const apq::Costs floor = apq::min_achievable_cost(table, space);
    const double bitops_floor =
        apq::min_achievable_bitops(space, space.input_resolution);
    throw apq::InfeasibleConstraintError(
        std::string(e.what()) + "; minimum achievable latency is " +
        std::to_string(floor.latency_ms) + " ms, energy " +
        std::to_string(floor.energy_mJ) + " mJ, bitops " +
        std::to_string(bitops_floor) + " G");
  }

  std::optional<apq::Oracle> oracle;
  if (opts.eval_oracle) {
    oracle.emplace(resolve_oracle_config(opts.oracle_config_path,
                                         opts.oracle_seed),
                   space);
  }

  Json top = Json::array();
  for (const apq::Candidate& c : result.top_k) {
    Json entry{{"arch", apq::arch_to_json(c.arch)},
               {"policy", apq::policy_to_json(c.policy)},
               {"predicted_acc", c.predicted_accuracy},
               {"latency_ms", c.latency_ms},
               {"energy_mJ", c.energy_mJ},
               {"bitops_G", apq::bitops(space, c.arch, c.policy,
                                        space.input_resolution)}};
    if (oracle) {
      entry["oracle_acc"] = oracle->quant_accuracy(c.arch, c.policy);
    }
    top.push_back(std::move(entry));
  }
  Json history = Json::array();
  for (const apq::HistoryPoint& h : result.history) {
    history.push_back(Json{{"iter", h.iter}, {"best", h.best}, {"mean", h.mean}});
  }
  auto bound_json = [](const std::optional<double>& b) {
    return b ? Json(*b) : Json(nullptr);
  };
  const Json doc{
      {"space_fingerprint", apq::space_fingerprint(space)},
      {"hardware", table.hardware_name},
      {"config", Json{{"population_size", opts.config.population_size},
                      {"top_k", opts.config.top_k},
                      {"n_mutation", opts.config.n_mutation},
                      {"n_crossover", opts.config.n_crossover},
                      {"mutation_prob", opts.config.mutation_prob},
                      {"iter_max", opts.config.iter_max},
                      {"max_resample_attempts", opts.config.max_resample_attempts},
                      {"seed", opts.config.seed}}},
      {"constraint", Json{{"max_latency_ms", bound_json(opts.constraint.max_latency_ms)},
                          {"max_energy_mJ", bound_json(opts.constraint.max_energy_mJ)},
                          {"max_bitops_G", bound_json(opts.constraint.max_bitops_G)}}},
      {"top_k", std::move(top)},
      {"history", std::move(history)},
      {"scorer_evaluations", result.scorer_evaluations}};
  {
    std::ofstream out(opts.out_path);
    if (!out) throw apq::IoError("cannot write results: " + opts.out_path);
    out << doc.dump(2) << "\n";
  }
  say("best predicted accuracy " +
      std::to_string(result.top_k.front().predicted_accuracy) + " at " +
      std::to_string(result.top_k.front().latency_ms) + " ms");

  apq::RunManifest manifest;
  manifest.command = "search";
  manifest.resolved_config = doc["config"];
  manifest.resolved_config["constraint"] = doc["constraint"];
  manifest.resolved_config["space"] = opts.space_path;
  manifest.resolved_config["predictor"] = opts.predictor_path;
  manifest.resolved_config["cost_table"] = opts.cost_table_path;
  manifest.resolved_config["eval_oracle"] = opts.eval_oracle;
  manifest.resolved_config["out"] = opts.out_path;
  for (const std::string& path :
       {opts.space_path, opts.predictor_path, opts.cost_table_path}) {
    manifest.input_fingerprints[path] = apq::file_fingerprint(path);
  }
  manifest.wall_clock_seconds = timer.seconds();
  apq::write_manifest(manifest, opts.out_path + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// experiment-transfer

struct ExperimentOpts {
  std::string space_path;
  std::string out_dir;
  apq::TransferExperimentConfig config;
  std::string oracle_config_path;
  std::optional<std::uint64_t> oracle_seed;
};

int run_experiment_transfer(ExperimentOpts opts) {
  Timer timer;
  const apq::SearchSpaceConfig space = apq::load_space(opts.space_path);
  opts.config.oracle =
      resolve_oracle_config(opts.oracle_config_path, opts.oracle_seed);
  std::filesystem::create_directories(opts.out_dir);

  const apq::TransferExperimentResult result = apq::run_transfer_experiment(
      space, opts.config, [](const std::string& msg) { say(msg); });

  apq::write_transfer_csv(result,
                          opts.out_dir + "/transfer_experiment.csv");
  Json means = Json::array();
  for (const auto& [key, mean] : result.means) {
    means.push_back(Json{{"budget", key.first},
                         {"variant", key.second},
                         {"mean_pairwise_acc", mean}});
  }
  const Json summary{{"means", std::move(means)},
                     {"rows", result.rows.size()},
                     {"budgets", opts.config.budgets},
                     {"seeds", opts.config.seeds},
                     {"fp_train_size", opts.config.fp_train_size},
                     {"test_size", opts.config.test_size}};
  {
    std::ofstream out(opts.out_dir + "/summary.json");
    if (!out) throw apq::IoError("cannot write summary JSON");
    out << summary.dump(2) << "\n";
  }
  for (const auto& [key, mean] : result.means) {
    say("budget " + std::to_string(key.first) + " " + key.second + ": mean " +
        std::to_string(mean));
  }

  apq::RunManifest manifest;
  manifest.command = "experiment-transfer";
  manifest.resolved_config =
      Json{{"space", opts.space_path},
           {"oracle_config", apq::oracle_config_to_json(opts.config.oracle)},
           {"budgets", opts.config.budgets},
           {"seeds", opts.config.seeds},
           {"fp_train_size", opts.config.fp_train_size},
           {"test_size", opts.config.test_size},
           {"policies_per_arch", opts.config.policies_per_arch},
           {"out_dir", opts.out_dir}};
  manifest.input_fingerprints[opts.space_path] =
      apq::file_fingerprint(opts.space_path);
  manifest.wall_clock_seconds = timer.seconds();
  apq::write_manifest(manifest, opts.out_dir + "/manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// quantize

struct QuantizeOpts {
  std::string tensor_path;
  std::string out_path;
  int bits = 8;
  std::string mode = "weights";
  std::optional<double> clip;
  bool calibrate = false;
  apq::CalibConfig calib;
};

int run_quantize(const QuantizeOpts& opts) {
  Timer timer;
  if (opts.calibrate == opts.clip.has_value()) {
    throw apq::ConfigError("pass exactly one of --clip V or --calibrate");
  }
  const apq::Tensor tensor = apq::load_tensor(opts.tensor_path);
  const apq::QuantMode mode = opts.mode == "weights"
                                  ? apq::QuantMode::kSymmetricWeights
                                  : apq::QuantMode::kNonnegActivations;
  apq::CalibResult calib;
  if (opts.calibrate) {
    calib = apq::kl_calibrate(tensor.values, opts.bits, opts.calib, mode);
  } else {
    calib.clip = *opts.clip;
    calib.kl = apq::calibration_kl(tensor.values, opts.bits, opts.calib, mode,
                                   calib.clip);
  }
  const apq::QuantScheme scheme{opts.bits, calib.clip, mode};
  apq::Tensor quantized{tensor.shape, apq::quantize(tensor.values, scheme)};
  // Error against the clamped input: pure rounding error, excluding clipping.
  const double lo = mode == apq::QuantMode::kSymmetricWeights ? -calib.clip : 0.0;
  double max_abs_error = 0.0;
  for (std::size_t i = 0; i < tensor.values.size(); ++i) {
    const double clamped = std::min(std::max(tensor.values[i], lo), calib.clip);
    max_abs_error =
        std::max(max_abs_error, std::abs(quantized.values[i] - clamped));
  }
  apq::save_tensor(quantized, opts.out_path);
  const Json report{{"chosen_v", calib.clip},
                    {"kl", calib.kl},
                    {"max_abs_error", max_abs_error},
                    {"bits", opts.bits},
                    {"mode", opts.mode}};
  {
    std::ofstream out(opts.out_path + ".report.json");
    if (!out) throw apq::IoError("cannot write quantization report");
    out << report.dump(2) << "\n";
  }
  say("clip=" + std::to_string(calib.clip) + " kl=" + std::to_string(calib.kl) +
      " max_abs_error=" + std::to_string(max_abs_error));

  apq::RunManifest manifest;
  manifest.command = "quantize";
  manifest.resolved_config = Json{{"tensor", opts.tensor_path},
                                  {"bits", opts.bits},
                                  {"mode", opts.mode},
                                  {"calibrate", opts.calibrate},
                                  {"clip", opts.clip ? Json(*opts.clip) : Json(nullptr)},
                                  {"histogram_bins", opts.calib.histogram_bins},
                                  {"candidate_grid_size", opts.calib.candidate_grid_size},
                                  {"epsilon_smoothing", opts.calib.epsilon_smoothing},
                                  {"out", opts.out_path}};
  manifest.input_fingerprints[opts.tensor_path] =
      apq::file_fingerprint(opts.tensor_path);
  manifest.wall_clock_seconds = timer.seconds();
  apq::write_manifest(manifest, opts.out_path + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// enumerate

struct EnumerateOpts {
  std::string space_path;
  std::string out_path;
  std::uint64_t limit = 100000;
};

int run_enumerate(const EnumerateOpts& opts) {
  Timer timer;
  const apq::SearchSpaceConfig space = apq::load_space(opts.space_path);
  const apq::BigCount count = apq::joint_cardinality(space);
  if (count > apq::BigCount(opts.limit)) {
    throw apq::CardinalityOverflowError(
        "joint space holds " + count.str() + " pairs, more than the limit of " +
            std::to_string(opts.limit),
        count.str());
  }
  std::ofstream out(opts.out_path);
  if (!out) throw apq::IoError("cannot write enumeration: " + opts.out_path);
  out << Json{{"space_fingerprint", apq::space_fingerprint(space)},
              {"count", count.str()}}
             .dump()
      << "\n";
  apq::JointEnumerator it(space);
  apq::ArchSpec arch;
  apq::QuantPolicy policy;
  std::size_t written = 0;
  while (it.next(arch, policy)) {
    out << Json{{"arch", apq::arch_to_json(arch)},
                {"policy", apq::policy_to_json(policy)}}
               .dump()
        << "\n";
    ++written;
  }
  say("enumerated " + std::to_string(written) + " pairs");

  apq::RunManifest manifest;
  manifest.command = "enumerate";
  manifest.resolved_config = Json{{"space", opts.space_path},
                                  {"limit", opts.limit},
                                  {"out", opts.out_path}};
  manifest.input_fingerprints[opts.space_path] =
      apq::file_fingerprint(opts.space_path);
  manifest.wall_clock_seconds = timer.seconds();
  apq::write_manifest(manifest, opts.out_path + ".manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint architecture / pruning / quantization search engine"};
  app.require_subcommand(1);

  GenDataOpts gen_data;
  auto* cmd_gen_data = app.add_subcommand(
      "gen-data", "Generate a labeled dataset from the synthetic oracle");
  cmd_gen_data->add_option("--space", gen_data.space_path, "Space JSON file")
      ->required();
  cmd_gen_data->add_option("--out", gen_data.out_path, "Output JSONL path")
      ->required();
  cmd_gen_data->add_option("--fp", gen_data.fp,
                           "Full-precision dataset of N records")
      ->expected(1);
  cmd_gen_data->add_option(
      "--mp", gen_data.mp,
      "Mixed-precision dataset: N_RANDOM N_GROUPED POLICIES_PER_ARCH")
      ->expected(3);
  cmd_gen_data->add_option("--oracle-config", gen_data.oracle_config_path,
                           "Oracle config JSON");
  cmd_gen_data->add_option("--seed,--oracle-seed", gen_data.oracle_seed,
                           "Override the oracle seed");
  cmd_gen_data->add_option("--sampling-seed", gen_data.sampling_seed,
                           "Sampling stream seed (defaults to the oracle seed)");

  GenCostTableOpts gen_table;
  auto* cmd_gen_table = app.add_subcommand(
      "gen-cost-table", "Synthesize a per-layer latency/energy lookup table");
  cmd_gen_table->add_option("--space", gen_table.space_path, "Space JSON file")
      ->required();
  cmd_gen_table->add_option("--out", gen_table.out_path, "Output table path")
      ->required();
  cmd_gen_table->add_option("--seed", gen_table.seed,
                            "Jitter seed (defaults to the space seed)");
  cmd_gen_table->add_option("--hardware", gen_table.profile.name,
                            "Hardware profile name");
  cmd_gen_table->add_option("--alpha-latency", gen_table.profile.alpha_latency,
                            "ms per MAC at 8x8 bits");
  cmd_gen_table->add_option("--beta-latency", gen_table.profile.beta_latency,
                            "ms per kernel-size unit");
  cmd_gen_table->add_option("--alpha-energy", gen_table.profile.alpha_energy,
                            "mJ per MAC at 8x8 bits");
  cmd_gen_table->add_option("--beta-energy", gen_table.profile.beta_energy,
                            "mJ per kernel-size unit");
  cmd_gen_table->add_option("--jitter", gen_table.profile.jitter_rel,
                            "Relative jitter amplitude");

  TrainOpts train_opts;
  auto* cmd_train =
      app.add_subcommand("train", "Train an accuracy predictor on a dataset");
  cmd_train->add_option("--data", train_opts.data_path, "Dataset JSONL")
      ->required();
  cmd_train->add_option("--out", train_opts.out_path, "Checkpoint output path")
      ->required();
  cmd_train->add_option("--space", train_opts.space_path,
                        "Space JSON (required with --transfer-from)");
  cmd_train->add_option("--transfer-from", train_opts.transfer_from,
                        "Full-precision checkpoint to transfer from");
  auto* lr_opt = cmd_train->add_option("--lr", train_opts.config.learning_rate,
                                       "Learning rate");
  auto* epochs_opt =
      cmd_train->add_option("--epochs", train_opts.config.epochs, "Epochs");
  cmd_train->add_option("--batch-size", train_opts.config.batch_size,
                        "Mini-batch size");
  cmd_train->add_option("--init-scale", train_opts.config.weight_init_scale,
                        "Weight init scale multiplier");
  cmd_train->add_option("--seed", train_opts.config.seed, "Training seed");
  cmd_train->add_option("--holdout", train_opts.holdout_fraction,
                        "Held-out fraction for metrics");

  SearchOpts search_opts;
  auto* cmd_search = app.add_subcommand(
      "search", "Resource-constrained evolutionary search with a predictor");
  cmd_search->add_option("--space", search_opts.space_path, "Space JSON file")
      ->required();
  cmd_search
      ->add_option("--predictor", search_opts.predictor_path,
                   "Quantization-aware predictor checkpoint")
      ->required();
  cmd_search
      ->add_option("--cost-table", search_opts.cost_table_path,
                   "Cost table JSON")
      ->required();
  cmd_search->add_option("--out", search_opts.out_path, "Results JSON path")
      ->required();
  cmd_search->add_option("--max-latency-ms", search_opts.constraint.max_latency_ms,
                         "Latency budget (inclusive)");
  cmd_search->add_option("--max-energy-mj", search_opts.constraint.max_energy_mJ,
                         "Energy budget (inclusive)");
  cmd_search->add_option("--max-bitops-g", search_opts.constraint.max_bitops_G,
                         "BitOps budget (inclusive)");
  cmd_search->add_option("--population", search_opts.config.population_size,
                         "Population size");
  cmd_search->add_option("--top-k", search_opts.config.top_k, "Elite count");
  auto* n_mutation_opt =
      cmd_search->add_option("--n-mutation", search_opts.config.n_mutation,
                             "Mutants per generation (default population/2)");
  auto* n_crossover_opt = cmd_search->add_option(
      "--n-crossover", search_opts.config.n_crossover,
      "Crossover children per generation (default population/2)");
  cmd_search->add_option("--mutation-prob", search_opts.config.mutation_prob,
                         "Per-slot mutation probability");
  cmd_search->add_option("--iters", search_opts.config.iter_max,
                         "Evolution iterations");
  cmd_search->add_option("--max-resample",
                         search_opts.config.max_resample_attempts,
                         "Constraint resampling attempts");
  auto* search_seed_opt =
      cmd_search->add_option("--seed", search_opts.config.seed, "Search seed");
  cmd_search->add_flag("--eval-oracle", search_opts.eval_oracle,
                       "Append true oracle accuracy to each result");
  cmd_search->add_option("--oracle-config", search_opts.oracle_config_path,
                         "Oracle config JSON for --eval-oracle");
  cmd_search->add_option("--oracle-seed", search_opts.oracle_seed,
                         "Oracle seed for --eval-oracle");

  ExperimentOpts experiment;
  auto* cmd_experiment = app.add_subcommand(
      "experiment-transfer",
      "Predictor-transfer ablation: scratch vs transfer across data budgets");
  cmd_experiment->add_option("--space", experiment.space_path, "Space JSON file")
      ->required();
  cmd_experiment->add_option("--out", experiment.out_dir, "Output directory")
      ->required();
  cmd_experiment->add_option("--budgets", experiment.config.budgets,
                             "Mixed-precision data budgets");
  cmd_experiment->add_option("--seeds", experiment.config.seeds,
                             "Experiment seeds");
  cmd_experiment->add_option("--fp-size", experiment.config.fp_train_size,
                             "Full-precision pretraining dataset size");
  cmd_experiment->add_option("--test-size", experiment.config.test_size,
                             "Held-out test set size");
  cmd_experiment->add_option("--policies-per-arch",
                             experiment.config.policies_per_arch,
                             "Policies per architecture in the grouped block");
  cmd_experiment->add_option("--oracle-config", experiment.oracle_config_path,
                             "Oracle config JSON");
  cmd_experiment->add_option("--oracle-seed", experiment.oracle_seed,
                             "Override the oracle seed");

  QuantizeOpts quantize_opts;
  auto* cmd_quantize = app.add_subcommand(
      "quantize", "Linear-quantize a tensor file with optional KL calibration");
  cmd_quantize->add_option("--tensor", quantize_opts.tensor_path,
                           "Input tensor (f32 LE binary with .json sidecar)")
      ->required();
  cmd_quantize->add_option("--out", quantize_opts.out_path,
                           "Output tensor path")
      ->required();
  cmd_quantize->add_option("--bits", quantize_opts.bits, "Bitwidth")->required();
  cmd_quantize->add_option("--mode", quantize_opts.mode, "weights|activations")
      ->check(CLI::IsMember({"weights", "activations"}));
  cmd_quantize->add_option("--clip", quantize_opts.clip, "Fixed clip value");
  cmd_quantize->add_flag("--calibrate", quantize_opts.calibrate,
                         "Choose the clip by KL calibration");
  cmd_quantize->add_option("--bins", quantize_opts.calib.histogram_bins,
                           "Calibration histogram bins");
  cmd_quantize->add_option("--grid", quantize_opts.calib.candidate_grid_size,
                           "Calibration candidate grid size");
  cmd_quantize->add_option("--epsilon", quantize_opts.calib.epsilon_smoothing,
                           "Histogram smoothing epsilon");

  EnumerateOpts enumerate_opts;
  auto* cmd_enumerate = app.add_subcommand(
      "enumerate", "Exhaustively list all (arch, policy) pairs of a small space");
  cmd_enumerate->add_option("--space", enumerate_opts.space_path,
                            "Space JSON file")
      ->required();
  cmd_enumerate->add_option("--out", enumerate_opts.out_path, "Output JSONL")
      ->required();
  cmd_enumerate->add_option("--limit", enumerate_opts.limit,
                            "Maximum pair count");

  for (auto* cmd : app.get_subcommands({})) {
    cmd->add_flag("--quiet", g_quiet, "Suppress progress output");
  }

  CLI11_PARSE(app, argc, argv);

  train_opts.lr_given = lr_opt->count() > 0;
  train_opts.epochs_given = epochs_opt->count() > 0;
  search_opts.seed_given = search_seed_opt->count() > 0;
  if (n_mutation_opt->count() == 0) {
    search_opts.config.n_mutation = search_opts.config.population_size / 2;
  }
  if (n_crossover_opt->count() == 0) {
    search_opts.config.n_crossover = search_opts.config.population_size / 2;
  }

  try {
    if (*cmd_gen_data) return run_gen_data(gen_data);
    if (*cmd_gen_table) return run_gen_cost_table(gen_table);
    if (*cmd_train) return run_train(train_opts);
    if (*cmd_search) return run_search(search_opts);
    if (*cmd_experiment) return run_experiment_transfer(experiment);
    if (*cmd_quantize) return run_quantize(quantize_opts);
    if (*cmd_enumerate) return run_enumerate(enumerate_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
