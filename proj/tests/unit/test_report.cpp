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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <regex>

#include "../oracles.hpp"
#include "qweather/error.hpp"
#include "qweather/ingest.hpp"
#include "qweather/report.hpp"

using namespace qweather;
using namespace qweather::report;
namespace fs = std::filesystem;

namespace {

train::RunReport fake_run(std::uint64_t seed, std::size_t horizon, int epochs, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  train::RunReport r;
  r.seed = seed;
  r.model_tag = "qnn_exp1_d1";
  for (std::size_t d = 0; d < horizon; ++d) {
    r.test_dates.push_back(add_days(parse_iso_date("2024-04-17"), static_cast<long>(d)));
    r.predictions.push_back(g(rng));
    r.actuals.push_back(0.1 * static_cast<double>(d));
    r.predictions_native.push_back(26 + 2.6 * r.predictions.back());
    r.actuals_native.push_back(26 + 2.6 * r.actuals.back());
    r.mae += std::abs(r.predictions.back() - r.actuals.back()) / static_cast<double>(horizon);
  }
  r.accuracy_pct = 100 * (1 - r.mae);
  for (int e = 0; e < epochs; ++e) r.history.push_back({1.0 / (e + 1) + 0.01 * g(rng), 1.2 / (e + 1)});
  return r;
}

std::vector<train::RunReport> fake_runs(std::size_t k, std::size_t horizon = 14, int epochs = 30) {
  std::mt19937_64 rng(k * 1000 + horizon);
  std::vector<train::RunReport> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(fake_run(42 + i, horizon, epochs, rng));
  return out;
}

std::vector<double> rect_heights(const std::string& svg, const std::string& fill) {
  std::vector<double> out;
  const std::regex re("<rect [^>]*height=\"([0-9.]+)\" fill=\"" + fill + "\"");
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) out.push_back(std::stod((*it)[1]));
  return out;
}

}  // namespace

TEST_CASE("violin quantiles against the oracle") {
  const auto runs = fake_runs(10);
  const auto v = violin_from_runs(runs);
  REQUIRE(v.days.size() == 14);
  for (std::size_t d = 0; d < 14; ++d) {
    std::vector<double> col;
    for (const auto& r : runs) col.push_back(r.predictions_native[d]);
    const auto& day = v.days[d];
    CHECK(day.day == static_cast<int>(d + 1));
    CHECK(day.runs == col);
    CHECK(day.actual == runs[0].actuals_native[d]);
    CHECK(std::abs(day.min - oracle::quantile(col, 0.0)) <= 1e-12);
    CHECK(std::abs(day.q1 - oracle::quantile(col, 0.25)) <= 1e-12);
    CHECK(std::abs(day.median - oracle::quantile(col, 0.5)) <= 1e-12);
    CHECK(std::abs(day.q3 - oracle::quantile(col, 0.75)) <= 1e-12);
    CHECK(std::abs(day.max - oracle::quantile(col, 1.0)) <= 1e-12);
  }
}

TEST_CASE("violin csv round trip and layout") {
  const auto v = violin_from_runs(fake_runs(3, 5));
  const auto csv = violin_csv(v);
  CHECK(csv.rfind("day,actual,run_1,run_2,run_3,min,q1,median,q3,max\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const auto back = parse_violin_csv(csv);
  REQUIRE(back.days.size() == 5);
  CHECK(back.days[4].runs == v.days[4].runs);
  CHECK(back.days[2].median == v.days[2].median);
  CHECK(violin_csv(back) == csv);
  CHECK_THROWS_AS(parse_violin_csv("a,b\n1,2\n"), ReportError);
}

TEST_CASE("identical runs give a zero-width violin") {
  auto runs = fake_runs(1, 4);
  runs.push_back(runs[0]);
  runs.push_back(runs[0]);
  const auto v = violin_from_runs(runs);
  for (const auto& d : v.days) {
    CHECK(d.min == d.max);
    CHECK(d.q1 == d.q3);
  }
  CHECK(silverman_bandwidth(v.days[0].runs) == 0.0);
  const auto svg = violin_svg(v, "flat");
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
}

TEST_CASE("single run draws point markers") {
  const auto svg = violin_svg(violin_from_runs(fake_runs(1, 3)), "one");
  const std::regex dot("<circle [^>]*fill=\"#4477aa\"");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), dot), std::sregex_iterator()) == 3);
}

TEST_CASE("silverman bandwidth by hand") {
  // sd = sqrt(2.5), iqr = 2, n = 5: 0.9 * min(sd, iqr / 1.34) * 5^-0.2
  const std::vector<double> v{1, 2, 3, 4, 5};
  const double expect = 0.9 * std::min(std::sqrt(2.5), 2.0 / 1.34) * std::pow(5.0, -0.2);
  CHECK(std::abs(silverman_bandwidth(v) - expect) <= 1e-12);
  CHECK(silverman_bandwidth({7.0}) == 0.0);
}

TEST_CASE("loss csv averages histories") {
  const auto runs = fake_runs(4, 3, 6);
  std::vector<train::LossHistory> h;
  for (const auto& r : runs) h.push_back(r.history);
  const auto csv = loss_csv(h);
  CHECK(csv.rfind("epoch,train_mean,val_mean\n1,", 0) == 0);
  const auto mean = parse_loss_csv(csv);
  REQUIRE(mean.size() == 6);
  for (std::size_t e = 0; e < 6; ++e) {
    double tr = 0.0;
    for (const auto& r : runs) tr += r.history[e].train_loss / 4;
    CHECK(std::abs(mean[e].train_loss - tr) <= 1e-12);
  }
  const auto svg = loss_svg(mean, "loss");
  CHECK(svg.find("#1f5fbf") != std::string::npos);
  CHECK(svg.find("#cc3311") != std::string::npos);

  h.back().pop_back();
  CHECK_THROWS_AS(loss_csv(h), ReportError);
  CHECK_THROWS_AS(loss_csv({}), ReportError);
}

TEST_CASE("comparison csv and bar heights") {
  ComparisonTable t;
  t.rows = {{"QNN", "1", "1", 0.40, 60.0},
            {"QNN", "1", "3", 0.20, 80.0},
            {"QNN", "2", "1", 0.30, 70.0},
            {"RNN", "-", "-", 0.35, 65.0}};
  const auto csv = comparison_csv(t);
  CHECK(csv == "model,experiment,depth,mae,accuracy_pct\nQNN,1,1,0.4,60\nQNN,1,3,0.2,80\nQNN,2,1,0.3,70\nRNN,-,-,0.35,65\n");
  const auto back = parse_comparison_csv(csv);
  CHECK(comparison_csv(back) == csv);

  const auto svg = mae_svg(back, "cmp");
  const auto dark = rect_heights(svg, "#555555");
  const auto light = rect_heights(svg, "#bbbbbb");
  REQUIRE(dark.size() == 2);
  REQUIRE(light.size() == 1);
  // Bars are proportional to MAE on a zero-based axis.
  CHECK(std::abs(dark[0] / dark[1] - 2.0) <= 0.01);
  CHECK(std::abs(light[0] / dark[0] - 0.75) <= 0.01);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);

  t.rows.pop_back();
  CHECK(mae_svg(t, "no rnn").find("stroke-dasharray") == std::string::npos);
  CHECK_THROWS_AS(mae_svg({}, "empty"), ReportError);
}

TEST_CASE("per-run mae table") {
  const auto runs = fake_runs(3, 2, 1);
  const auto csv = run_mae_csv(runs);
  CHECK(csv.rfind("run,seed,mae,accuracy_pct,mae_native\n1,42,", 0) == 0);
  CHECK(csv.find("\n3,44,") != std::string::npos);
}

TEST_CASE("emitted reports are complete and byte-identical on rerun") {
  const auto dir = fs::temp_directory_path() / "qweather_test_report";
  fs::remove_all(dir);
  const auto runs = fake_runs(5, 14, 10);
  emit_model_report(dir / "a", runs, "title <a & b>");
  emit_model_report(dir / "b", runs, "title <a & b>");
  for (const char* f : {"violin.csv", "violin.svg", "loss.csv", "loss.svg", "mae.csv", "mae.svg"}) {
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(ingest::read_file(dir / "a" / f) == ingest::read_file(dir / "b" / f));
  }
  const auto svg = ingest::read_file(dir / "a" / "violin.svg");
  CHECK(svg.find("&lt;a &amp; b&gt;") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);

  ComparisonTable t;
  t.rows = {{"QNN", "1", "1", 0.4, 60.0}};
  emit_comparison(dir, t, "cmp");
  CHECK(fs::exists(dir / "comparison.csv"));
  CHECK(fs::exists(dir / "comparison.svg"));
  CHECK_THROWS_AS(emit_model_report(dir / "c", {}, "none"), ReportError);
}
