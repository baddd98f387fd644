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
 * @file report.hpp
 * @brief CSV tables and hand-written SVG figures for forecast distributions,
 * loss curves and the MAE comparison.
 *
 * Every SVG is rendered from the parsed CSV text, never from in-memory run
 * state, so figures cannot drift from their data.
 */
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qweather/train.hpp"

namespace qweather::report {

struct ViolinDay {
  int day{0};
  double actual{0.0};
  std::vector<double> runs;
  double min{0.0};
  double q1{0.0};
  double median{0.0};
  double q3{0.0};
  double max{0.0};
};

struct ViolinSeries {
  std::vector<ViolinDay> days;
};

/// Native-unit predictions of every run per test day.
ViolinSeries violin_from_runs(const std::vector<train::RunReport>& runs);
/// `day,actual,run_1..run_k,min,q1,median,q3,max`
std::string violin_csv(const ViolinSeries& v);
ViolinSeries parse_violin_csv(std::string_view csv);
/// Gaussian KDE outline (Silverman bandwidth) plus box/whiskers per day and the
/// actual value as a marker. Fewer than two runs degrade to point markers.
std::string violin_svg(const ViolinSeries& v, const std::string& title);

/// Silverman's rule-of-thumb bandwidth; 0 for degenerate samples.
double silverman_bandwidth(std::vector<double> values);

/// `epoch,train_mean,val_mean`. Throws ReportError on empty input or
/// histories of different lengths.
std::string loss_csv(const std::vector<train::LossHistory>& histories);
train::LossHistory parse_loss_csv(std::string_view csv);
std::string loss_svg(const train::LossHistory& mean, const std::string& title);

struct ComparisonRow {
  std::string model;       // QNN | RNN
  std::string experiment;  // "1", "2" or "-"
  std::string depth;       // "1", "3", "5" or "-"
  double mae{0.0};
  double accuracy_pct{0.0};
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

/// `model,experiment,depth,mae,accuracy_pct`
std::string comparison_csv(const ComparisonTable& t);
ComparisonTable parse_comparison_csv(std::string_view csv);
/// QNN rows as bars grouped by experiment (dark: 1, light: 2); the RNN row,
/// if present, as a dashed horizontal rule.
std::string mae_svg(const ComparisonTable& t, const std::string& title);

/// Per-run MAE table for one configuration: `run,seed,mae,accuracy_pct,mae_native`
/// (the last in target units).
std::string run_mae_csv(const std::vector<train::RunReport>& runs);

/// Writes `<dir>/violin.{csv,svg}`, `<dir>/loss.{csv,svg}` and
/// `<dir>/mae.{csv,svg}` for one model configuration.
void emit_model_report(const std::filesystem::path& dir, const std::vector<train::RunReport>& runs,
                       const std::string& title);
/// Writes `<dir>/comparison.{csv,svg}`.
void emit_comparison(const std::filesystem::path& dir, const ComparisonTable& t, const std::string& title);

}  // namespace qweather::report
