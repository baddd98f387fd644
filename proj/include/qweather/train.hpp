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
 * @file train.hpp
 * @brief Seeded mini-batch Adam training for the QNN and RNN regressors,
 * repeated over seeds and aggregated.
 *
 * Loss is MSE on the standardized target. MAE is reported on the
 * standardized scale and accuracy is defined as 100 * (1 - MAE).
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qweather/date.hpp"
#include "qweather/preprocess.hpp"
#include "qweather/qnn.hpp"

namespace qweather::train {

struct TrainConfig {
  int epochs{30};
  double learning_rate{0.1};
  int batch_size{10};
  double validation_split{0.1};
  int runs{10};
  std::uint64_t seed_base{42};

  static TrainConfig qnn_defaults() { return {}; }
  static TrainConfig rnn_defaults() { return {500, 0.001, 10, 0.1, 10, 42}; }
  /// Throws ConfigError unless every field is in range (epochs may be 0).
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t{0};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};

  static AdamState zeros(std::size_t n);
};

/// In-place bias-corrected Adam update. Throws TrainingError if any gradient
/// is non-finite (parameters are left untouched in that case).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr);

inline double accuracy_pct(double mae) { return 100.0 * (1.0 - mae); }

struct EpochLoss {
  double train_loss;
  double val_loss;
};
using LossHistory = std::vector<EpochLoss>;

/// Model-agnostic view used by the training loop. Parameters travel as flat
/// vectors; samples are addressed by index.
class Learner {
 public:
  virtual ~Learner() = default;
  [[nodiscard]] virtual std::string tag() const = 0;
  [[nodiscard]] virtual std::size_t n_train() const = 0;
  [[nodiscard]] virtual std::size_t n_test() const = 0;
  [[nodiscard]] virtual double train_target(std::size_t i) const = 0;
  [[nodiscard]] virtual double test_target(std::size_t i) const = 0;
  [[nodiscard]] virtual std::vector<double> init_params(std::mt19937_64& rng) const = 0;
  /// Mean squared error over `batch` and its gradient.
  virtual double loss_and_gradient(std::span<const double> params, std::span<const std::size_t> batch,
                                   std::vector<double>& grad) const = 0;
  [[nodiscard]] virtual std::vector<double> predict_train(std::span<const double> params,
                                                          std::span<const std::size_t> idx) const = 0;
  [[nodiscard]] virtual std::vector<double> predict_test(std::span<const double> params) const = 0;
  [[nodiscard]] virtual nlohmann::json params_json(std::span<const double> params) const = 0;
  /// Interval containing every possible prediction, when one exists.
  [[nodiscard]] virtual std::optional<std::pair<double, double>> output_bound(std::span<const double>) const {
    return std::nullopt;
  }
};

enum class GradientMethod { adjoint, parameter_shift };

/// QNN over the feature rows of `data`; the learner keeps its own copy.
std::unique_ptr<Learner> make_qnn_learner(const preprocess::SplitDataset& data, const qnn::AnsatzSpec& spec,
                                          GradientMethod method = GradientMethod::adjoint);

/// RNN over windows of `window` consecutive rows; the first `window` training
/// rows have no full history and produce no sample.
std::unique_ptr<Learner> make_rnn_learner(const preprocess::SplitDataset& data, int hidden, int window);

struct RunReport {
  std::uint64_t seed{0};
  std::string model_tag;
  nlohmann::json final_params;
  std::vector<Date> test_dates;
  std::vector<double> predictions;         // standardized
  std::vector<double> predictions_native;  // target units
  std::vector<double> actuals;
  std::vector<double> actuals_native;
  LossHistory history;
  double mae{0.0};
  double mae_native{0.0};
  double accuracy_pct{0.0};
  std::size_t n_fit{0};
  std::size_t n_validation{0};
  std::optional<std::pair<double, double>> output_bound;
};

struct TrainHooks {
  /// Called with every batch of training sample indices before the update.
  std::function<void(int epoch, std::span<const std::size_t> batch)> on_batch;
};

/// Validation = chronologically last floor-complement of `validation_split`
/// of the training samples, never shuffled into batches. The remaining samples
/// are shuffled per epoch by the seeded generator.
RunReport train_model(const Learner& learner, const preprocess::SplitDataset& data, const TrainConfig& cfg,
                      std::uint64_t seed, const TrainHooks& hooks = {});

/// Number of validation samples for `n` training samples.
std::size_t validation_count(std::size_t n, double validation_split);

struct DayStats {
  double min, q1, median, q3, max, mean;
};

/// Linear-interpolation quantile of sorted data (numpy's default).
double quantile_sorted(std::span<const double> sorted, double q);
DayStats day_stats(std::vector<double> values);

struct ExperimentSummary {
  std::string model_tag;
  std::vector<Date> test_dates;
  std::vector<double> actuals_native;
  std::vector<DayStats> per_day_native;
  std::vector<double> mean_prediction;  // standardized
  LossHistory mean_history;
  double mean_mae{0.0};
  double mean_mae_native{0.0};
  double accuracy_pct{0.0};
};

/// Aggregates successful runs. Throws TrainingError if `runs` is empty or the
/// runs disagree on horizon or history length.
ExperimentSummary summarize(const std::vector<RunReport>& runs);

struct ExperimentResult {
  std::vector<RunReport> runs;
  /// Seeds that aborted, with their error messages.
  std::vector<std::pair<std::uint64_t, std::string>> failures;
  std::optional<ExperimentSummary> summary;
  [[nodiscard]] bool failed() const noexcept { return !failures.empty(); }
};

/// Runs seeds seed_base .. seed_base + runs - 1 on up to `jobs` threads. The
/// result does not depend on `jobs`.
ExperimentResult run_experiment(const Learner& learner, const preprocess::SplitDataset& data, const TrainConfig& cfg,
                                int jobs = 1);

/// `<dir>/history.csv`, `<dir>/predictions.csv`, `<dir>/params.json`.
void write_run_artifacts(const std::filesystem::path& dir, const RunReport& report);
/// Reads back what write_run_artifacts produced (params are not reloaded).
RunReport read_run_artifacts(const std::filesystem::path& dir);

}  // namespace qweather::train
