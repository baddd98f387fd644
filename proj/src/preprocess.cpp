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

#include "qweather/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qweather/error.hpp"
#include "qweather/util.hpp"

namespace qweather::preprocess {

using nlohmann::json;

namespace {

double pearson_dense(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) throw UndefinedCorrelationError("pearson needs at least 2 paired observations, got " + std::to_string(n));
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("pearson undefined for a constant series");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double pearson(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: series lengths differ");
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(x.size());
  ys.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      xs.push_back(*x[i]);
      ys.push_back(*y[i]);
    }
  }
  return pearson_dense(xs, ys);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: series lengths differ");
  return pearson_dense(std::vector<double>(x.begin(), x.end()), std::vector<double>(y.begin(), y.end()));
}

std::size_t CorrelationMatrix::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw MissingParameterError(name, names);
  return static_cast<std::size_t>(it - names.begin());
}

CorrelationMatrix correlation_matrix(const DailyDataset& data, const std::vector<std::string>& columns) {
  CorrelationMatrix m;
  m.names = columns;
  const auto n = static_cast<Eigen::Index>(columns.size());
  m.rho.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = data.column(columns[static_cast<std::size_t>(i)]).values;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& b = data.column(columns[static_cast<std::size_t>(j)]).values;
      try {
        m.rho(i, j) = pearson(a, b);
      } catch (const UndefinedCorrelationError& e) {
        throw UndefinedCorrelationError("correlation(" + columns[static_cast<std::size_t>(i)] + ", " +
                                        columns[static_cast<std::size_t>(j)] + "): " + e.what());
      }
    }
  }
  return m;
}

std::vector<std::string> select_features(const CorrelationMatrix& m, const std::string& target, double threshold) {
  const std::size_t t = m.index(target);
  std::vector<std::string> out;
  for (std::size_t j = 0; j < m.names.size(); ++j) {
    if (j == t) continue;
    if (std::abs(m.rho(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j))) >= threshold) {
      out.push_back(m.names[j]);
    }
  }
  return out;
}

std::vector<LagCorrelation> lag_correlogram(const Series& series, int max_lag) {
  if (max_lag < 1) throw InvalidArgument("max_lag must be >= 1");
  if (series.size() <= static_cast<std::size_t>(max_lag) + 1) {
    throw InvalidArgument("series of length " + std::to_string(series.size()) + " too short for max_lag " +
                          std::to_string(max_lag));
  }
  std::vector<LagCorrelation> out;
  const std::span<const std::optional<double>> s(series);
  for (int k = 1; k <= max_lag; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    out.push_back({k, pearson(s.subspan(uk), s.first(s.size() - uk))});
  }
  return out;
}

int choose_lag(const std::vector<LagCorrelation>& correlogram, std::optional<int> override_lag) {
  if (correlogram.empty()) throw InvalidArgument("empty correlogram");
  if (override_lag) {
    const int max_lag = correlogram.back().lag;
    if (*override_lag < 1 || *override_lag > max_lag) {
      throw InvalidArgument("lag override " + std::to_string(*override_lag) + " outside [1, " +
                            std::to_string(max_lag) + "]");
    }
    return *override_lag;
  }
  auto best = correlogram.front();
  for (const auto& c : correlogram) {
    if (c.rho > best.rho) best = c;
  }
  return best.lag;
}

std::string lag_column_name(const std::string& column, int lag_days) {
  return column + "_lag" + std::to_string(lag_days);
}

DailyDataset add_lag_feature(const DailyDataset& data, const std::string& column, int lag_days,
                             const std::optional<DateRange>& window) {
  if (lag_days < 0) throw InvalidArgument("lag_days must be >= 0");
  const auto& src = data.column(column);
  const auto k = static_cast<std::size_t>(lag_days);
  Series lagged(data.size());
  for (std::size_t i = k; i < data.size(); ++i) lagged[i] = src.values[i - k];

  if (window) {
    const auto first = data.index_of(window->start);
    if (!first || !data.index_of(window->end)) {
      throw ValidationError("dataset does not cover window " + to_iso(window->start) + ".." + to_iso(window->end));
    }
    if (*first < k) {
      throw ValidationError("lag " + std::to_string(lag_days) + " on '" + column + "' needs " +
                            std::to_string(k - *first) + " more days of history before " + to_iso(window->start));
    }
  }
  return data.with_column({lag_column_name(column, lag_days), src.unit, std::move(lagged)});
}

void FeaturePlan::validate() const {
  if (features.empty()) throw ValidationError("feature plan has no features");
  if (std::find(features.begin(), features.end(), target) != features.end()) {
    throw ValidationError("target '" + target + "' listed among features");
  }
  if (std::find(features.begin(), features.end(), lag_column()) == features.end()) {
    throw ValidationError("lagged target column '" + lag_column() + "' missing from features");
  }
}

// --- scaler ----------------------------------------------------------------

Scaler::Scaler(std::vector<ColumnStats> stats) : stats_(std::move(stats)) {
  for (const auto& s : stats_) {
    if (!(s.std > 0.0) || !std::isfinite(s.std) || !std::isfinite(s.mean)) {
      throw ValidationError("scaler column '" + s.name + "' has non-positive or non-finite std");
    }
  }
}

Scaler Scaler::fit(const Eigen::MatrixXd& rows, const std::vector<std::string>& names) {
  if (static_cast<std::size_t>(rows.cols()) != names.size()) throw InvalidArgument("scaler: name count mismatch");
  if (rows.rows() < 2) throw ValidationError("scaler needs at least 2 rows");
  std::vector<ColumnStats> stats;
  const double n = static_cast<double>(rows.rows());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double mean = rows.col(j).sum() / n;
    const double ss = (rows.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / (n - kDdof));
    if (!(sd > 0.0)) throw ValidationError("zero variance in training column '" + names[static_cast<std::size_t>(j)] + "'");
    stats.push_back({names[static_cast<std::size_t>(j)], mean, sd});
  }
  return Scaler(std::move(stats));
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != stats_.size()) throw InvalidArgument("scaler: column count mismatch");
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const auto& s = stats_[static_cast<std::size_t>(j)];
    out.col(j) = (rows.col(j).array() - s.mean) / s.std;
  }
  return out;
}

Eigen::MatrixXd Scaler::invert(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != stats_.size()) throw InvalidArgument("scaler: column count mismatch");
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const auto& s = stats_[static_cast<std::size_t>(j)];
    out.col(j) = rows.col(j).array() * s.std + s.mean;
  }
  return out;
}

double Scaler::apply_one(std::size_t column, double x) const {
  const auto& s = stats_.at(column);
  return (x - s.mean) / s.std;
}

double Scaler::invert_one(std::size_t column, double z) const {
  const auto& s = stats_.at(column);
  return z * s.std + s.mean;
}

std::size_t Scaler::index(const std::string& name) const {
  for (std::size_t i = 0; i < stats_.size(); ++i) {
    if (stats_[i].name == name) return i;
  }
  throw MissingParameterError(name, [&] {
    std::vector<std::string> n;
    for (const auto& s : stats_) n.push_back(s.name);
    return n;
  }());
}

// --- split -----------------------------------------------------------------

SplitDataset chronological_split(const DailyDataset& data, const FeaturePlan& plan, std::size_t horizon) {
  plan.validate();
  const std::size_t n = data.size();
  if (horizon == 0) throw InvalidArgument("horizon must be >= 1");
  if (horizon >= n) {
    throw ValidationError("horizon " + std::to_string(horizon) + " leaves no training rows out of " +
                          std::to_string(n));
  }
  const std::size_t n_feat = plan.features.size();
  Eigen::MatrixXd native(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_feat + 1));
  std::vector<std::string> names = plan.features;
  names.push_back(plan.target);
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& col = data.column(names[j]);
    for (std::size_t i = 0; i < n; ++i) {
      if (!col.values[i]) {
        throw ValidationError("missing value in '" + names[j] + "' on " + to_iso(data.dates()[i]) +
                              " inside the modeling window");
      }
      native(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *col.values[i];
    }
  }

  const auto n_train = static_cast<Eigen::Index>(n - horizon);
  const auto n_test = static_cast<Eigen::Index>(horizon);
  SplitDataset out;
  out.scaler = Scaler::fit(native.topRows(n_train), names);
  const Eigen::MatrixXd z = out.scaler.apply(native);
  const auto nf = static_cast<Eigen::Index>(n_feat);
  out.x_train = z.topRows(n_train).leftCols(nf);
  out.y_train = z.topRows(n_train).col(nf);
  out.x_test = z.bottomRows(n_test).leftCols(nf);
  out.y_test = z.bottomRows(n_test).col(nf);
  out.train_dates.assign(data.dates().begin(), data.dates().begin() + n_train);
  out.test_dates.assign(data.dates().begin() + n_train, data.dates().end());
  out.train_fraction = static_cast<double>(n_train) / static_cast<double>(n);
  out.test_fraction = static_cast<double>(n_test) / static_cast<double>(n);
  return out;
}

std::vector<DescribeRow> describe(const DailyDataset& data, const std::vector<std::string>& columns) {
  std::vector<DescribeRow> rows;
  for (const auto& name : columns) {
    std::vector<double> v;
    for (const auto& x : data.column(name).values) {
      if (x) v.push_back(*x);
    }
    if (v.size() < 2) throw ValidationError("describe: column '" + name + "' has fewer than 2 values");
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    rows.push_back({name, mean, std::sqrt(ss / static_cast<double>(v.size() - kDdof)), *mn, *mx});
  }
  return rows;
}

std::string describe_csv(const std::vector<DescribeRow>& rows) {
  std::string out = "column,mean,std,min,max\n";
  for (const auto& r : rows) {
    out += r.column + "," + util::format_double(r.mean) + "," + util::format_double(r.std) + "," +
           util::format_double(r.min) + "," + util::format_double(r.max) + "\n";
  }
  return out;
}

PlanResult build_plan(const DailyDataset& extended, const DateRange& window, const std::string& target,
                      double threshold, std::optional<int> lag_override, int max_lag,
                      std::vector<std::string> candidates) {
  window.validate();
  const DailyDataset modeling_raw = extended.slice(window);
  if (candidates.empty()) {
    for (const auto& name : extended.names()) {
      if (name != target) candidates.push_back(name);
    }
  }
  // Matrix order follows the dataset's column order so the selection order is stable.
  std::vector<std::string> ordered;
  for (const auto& name : extended.names()) {
    if (name == target || std::find(candidates.begin(), candidates.end(), name) != candidates.end()) {
      ordered.push_back(name);
    }
  }
  if (std::find(ordered.begin(), ordered.end(), target) == ordered.end()) {
    throw MissingParameterError(target, extended.names());
  }

  PlanResult r;
  r.matrix = correlation_matrix(modeling_raw, ordered);
  r.correlogram = lag_correlogram(modeling_raw.column(target).values, max_lag);
  const int lag = choose_lag(r.correlogram, lag_override);
  r.plan.target = target;
  r.plan.threshold = threshold;
  r.plan.lag_days = lag;
  r.plan.features = select_features(r.matrix, target, threshold);
  r.plan.features.push_back(r.plan.lag_column());
  r.plan.validate();
  r.modeling = add_lag_feature(extended, target, lag, window).slice(window);
  return r;
}

json to_json(const FeaturePlan& plan) {
  return {{"target", plan.target},
          {"features", plan.features},
          {"lag_days", plan.lag_days},
          {"threshold", plan.threshold}};
}

FeaturePlan feature_plan_from_json(const json& j) {
  FeaturePlan p;
  p.target = j.at("target").get<std::string>();
  p.features = j.at("features").get<std::vector<std::string>>();
  p.lag_days = j.at("lag_days").get<int>();
  p.threshold = j.at("threshold").get<double>();
  p.validate();
  return p;
}

json to_json(const Scaler& scaler) {
  json cols = json::array();
  for (const auto& s : scaler.stats()) cols.push_back({{"name", s.name}, {"mean", s.mean}, {"std", s.std}});
  return {{"ddof", kDdof}, {"columns", cols}};
}

Scaler scaler_from_json(const json& j) {
  std::vector<ColumnStats> stats;
  for (const auto& c : j.at("columns")) {
    stats.push_back({c.at("name").get<std::string>(), c.at("mean").get<double>(), c.at("std").get<double>()});
  }
  return Scaler(std::move(stats));
}

}  // namespace qweather::preprocess
