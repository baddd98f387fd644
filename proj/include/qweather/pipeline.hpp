// Copyright 2026 The qweather Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file pipeline.hpp
 * @brief Experiment configuration and the fetch -> analyze -> train -> report
 * stages behind the command-line tool.
 *
 * Output tree under `out`:
 *
 *   analysis/{correlation,correlogram,describe}.csv, analysis/plan.json
 *   models/<tag>/manifest.json, models/<tag>/runs/<seed>/...
 *   report/<tag>/{violin,loss,mae}.{csv,svg}, report/comparison.{csv,svg}
 *   manifest.json
 *
 * Training of a model is skipped when its manifest records the same input
 * hash (config, dataset content, seeds) and every run directory is present.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qweather/ingest.hpp"
#include "qweather/preprocess.hpp"
#include "qweather/qnn.hpp"
#include "qweather/train.hpp"

namespace qweather::pipeline {

struct QnnMatrix {
  std::vector<qnn::Entangler> entanglers{qnn::Entangler::basic, qnn::Entangler::strong};
  std::vector<int> depths{1, 3, 5};
  qnn::Readout readout{qnn::Readout::first_qubit};
  bool hadamard_prelayer{false};
  double feature_scale{1.0};
  train::GradientMethod gradient{train::GradientMethod::adjoint};
  train::TrainConfig train{train::TrainConfig::qnn_defaults()};
};

struct RnnSetup {
  bool enabled{true};
  int hidden{256};
  /// Defaults to the plan's lag.
  std::optional<int> window;
  train::TrainConfig train{train::TrainConfig::rnn_defaults()};
};

struct ExperimentConfig {
  std::string name;
  /// Quantity name or parameter code, resolved through the catalog.
  std::string target;
  ingest::GeoPoint point;
  ingest::DateRange window;
  std::size_t horizon{14};
  std::optional<int> lag;
  int max_lag{preprocess::kDefaultMaxLag};
  double threshold{preprocess::kDefaultThreshold};
  /// Codes to download; empty means the whole catalog.
  std::vector<std::string> parameters;
  std::optional<std::filesystem::path> catalog;
  /// Local CSV used instead of the remote service.
  std::optional<std::filesystem::path> dataset;
  std::optional<int> expected_qubits;
  QnnMatrix qnn;
  RnnSetup rnn;
  std::uint64_t seed_base{42};
  std::filesystem::path output{"out"};
  std::optional<std::filesystem::path> cache;

  /// Parses YAML text. Relative `dataset` and `catalog` paths resolve against
  /// `base_dir`. Throws ConfigError.
  static ExperimentConfig parse(const std::string& yaml, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Throws ConfigError.
  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] ingest::ParameterCatalog load_catalog() const;
  [[nodiscard]] std::string target_code() const;
  /// Window extended backwards far enough for the lag search and lag column.
  [[nodiscard]] ingest::DateRange fetch_range() const;
};

struct RunOptions {
  bool offline{false};
  int jobs{1};
  std::optional<std::uint64_t> seed_base;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> cache_dir;
  /// Borrowed; used by fetch when set.
  ingest::HttpTransport* transport{nullptr};
  std::function<void(const std::string&)> log;
};

/// Config with command-line overrides applied.
struct Context {
  ExperimentConfig cfg;
  RunOptions opts;
  std::filesystem::path out;
  std::filesystem::path cache;

  Context(ExperimentConfig c, RunOptions o);
  void info(const std::string& msg) const;
};

struct ModelEntry {
  std::string tag;
  std::string model;       // QNN | RNN
  std::string experiment;  // "1", "2" or "-"
  std::string depth;       // or "-"
};

/// Model matrix in comparison-table order: experiment 1 depths, experiment 2
/// depths, then the RNN.
std::vector<ModelEntry> model_matrix(const ExperimentConfig& cfg);

struct Prepared {
  ingest::DailyDataset extended;
  std::string dataset_hash;
  preprocess::PlanResult plan;
  preprocess::SplitDataset split;
};

/// Populates the cache (or validates the local dataset) and returns the
/// extended table. Throws data-class errors.
ingest::DailyDataset cmd_fetch(const Context& ctx);
/// Writes analysis/*; returns the prepared split.
Prepared cmd_analyze(const Context& ctx);
/// Trains every model in the matrix. Returns the number of models trained
/// (0 when all were up to date).
int cmd_train(const Context& ctx);
void cmd_report(const Context& ctx);
void cmd_all(const Context& ctx);

/// Loads the data and plan without writing anything (cache only).
Prepared prepare(const Context& ctx, bool allow_network);

/// Wraps a stage so that any failure surfaces as an Error of the stage's
/// class with the stage name in the message.
void run_stage(const std::string& stage, const std::function<void()>& body);

}  // namespace qweather::pipeline
