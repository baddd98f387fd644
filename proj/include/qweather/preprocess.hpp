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
 * @file preprocess.hpp
 * @brief Correlation-driven feature gating, lag features, z-score scaling and
 * chronological splitting.
 *
 * Standard deviations use the n-1 denominator throughout (kDdof).
 */
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qweather/ingest.hpp"

namespace qweather::preprocess {

using ingest::DailyDataset;
using ingest::DateRange;
using ingest::Series;

inline constexpr int kDdof = 1;
inline constexpr double kDefaultThreshold = 0.3;
inline constexpr int kDefaultMaxLag = 40;

/// Sample Pearson correlation over pairs where both sides are present.
/// Throws UndefinedCorrelationError when fewer than two pairs survive or
/// either surviving series is constant.
double pearson(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y);
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd rho;

  [[nodiscard]] std::size_t index(const std::string& name) const;
  [[nodiscard]] double at(const std::string& a, const std::string& b) const { return rho(index(a), index(b)); }
};

CorrelationMatrix correlation_matrix(const DailyDataset& data, const std::vector<std::string>& columns);

/// Non-target columns with |rho(col, target)| >= threshold, in matrix order.
std::vector<std::string> select_features(const CorrelationMatrix& m, const std::string& target,
                                         double threshold = kDefaultThreshold);

struct LagCorrelation {
  int lag;
  double rho;
};

/// rho_k = pearson(series[k:], series[:-k]) for k = 1..max_lag.
std::vector<LagCorrelation> lag_correlogram(const Series& series, int max_lag = kDefaultMaxLag);

/// Override if given (must be in [1, max lag of the correlogram]); otherwise
/// the argmax of rho_k, ties to the smallest k.
int choose_lag(const std::vector<LagCorrelation>& correlogram, std::optional<int> override_lag = std::nullopt);

std::string lag_column_name(const std::string& column, int lag_days);

/// Appends `<column>_lag<k>` holding the value from k days earlier. When
/// `window` is given every row inside it must end up defined, otherwise an
/// error reports how many extra days of history are needed.
DailyDataset add_lag_feature(const DailyDataset& data, const std::string& column, int lag_days,
                             const std::optional<DateRange>& window = std::nullopt);

struct FeaturePlan {
  std::string target;
  std::vector<std::string> features;
  int lag_days{0};
  double threshold{kDefaultThreshold};

  [[nodiscard]] std::string lag_column() const { return lag_column_name(target, lag_days); }
  /// Throws ValidationError if the plan breaks its invariants.
  void validate() const;
};

struct ColumnStats {
  std::string name;
  double mean{0.0};
  double std{1.0};
};

/// Per-column z-score transform x' = (x - mean) / std.
class Scaler {
 public:
  Scaler() = default;
  explicit Scaler(std::vector<ColumnStats> stats);

  /// Fits on the rows of `rows` (one column per name). Throws on zero variance.
  static Scaler fit(const Eigen::MatrixXd& rows, const std::vector<std::string>& names);

  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
  [[nodiscard]] Eigen::MatrixXd invert(const Eigen::MatrixXd& rows) const;
  [[nodiscard]] double apply_one(std::size_t column, double x) const;
  [[nodiscard]] double invert_one(std::size_t column, double z) const;

  [[nodiscard]] const std::vector<ColumnStats>& stats() const noexcept { return stats_; }
  [[nodiscard]] std::size_t index(const std::string& name) const;

 private:
  std::vector<ColumnStats> stats_;
};

struct SplitDataset {
  Eigen::MatrixXd x_train;
  Eigen::VectorXd y_train;
  Eigen::MatrixXd x_test;
  Eigen::VectorXd y_test;
  std::vector<Date> train_dates;
  std::vector<Date> test_dates;
  /// Feature columns first (plan order), target last. Fitted on train rows.
  Scaler scaler;
  double train_fraction{0.0};
  double test_fraction{0.0};

  [[nodiscard]] std::size_t n_features() const noexcept { return static_cast<std::size_t>(x_train.cols()); }
  /// Native-unit value of a standardized target.
  [[nodiscard]] double target_to_native(double z) const { return scaler.invert_one(scaler.stats().size() - 1, z); }
};

/// Last `horizon` rows become the test set. The scaler is fitted on the
/// training rows only and applied to both sets. Any missing value in a
/// selected column aborts with a ValidationError.
SplitDataset chronological_split(const DailyDataset& data, const FeaturePlan& plan, std::size_t horizon);

struct DescribeRow {
  std::string column;
  double mean;
  double std;
  double min;
  double max;
};

/// Whole-table descriptive statistics of the present values of each column.
std::vector<DescribeRow> describe(const DailyDataset& data, const std::vector<std::string>& columns);
std::string describe_csv(const std::vector<DescribeRow>& rows);

/// Full feature engineering for one target over a modeling window.
struct PlanResult {
  FeaturePlan plan;
  CorrelationMatrix matrix;
  std::vector<LagCorrelation> correlogram;
  /// Modeling window rows with the lag column appended.
  DailyDataset modeling;
};

/// `extended` must start at least `lag` days before `window.start`.
/// `candidates` empty means every non-target column in `extended`.
PlanResult build_plan(const DailyDataset& extended, const DateRange& window, const std::string& target,
                      double threshold, std::optional<int> lag_override, int max_lag = kDefaultMaxLag,
                      std::vector<std::string> candidates = {});

nlohmann::json to_json(const FeaturePlan& plan);
FeaturePlan feature_plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scaler& scaler);
Scaler scaler_from_json(const nlohmann::json& j);

}  // namespace qweather::preprocess
