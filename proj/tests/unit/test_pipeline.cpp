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

#include <cstdlib>
#include <filesystem>

#include "qweather/error.hpp"
#include "qweather/pipeline.hpp"

using namespace qweather;
using namespace qweather::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path source_dir() {
  const char* s = std::getenv("QWEATHER_SOURCE_DIR");
  return s ? fs::path(s) : fs::current_path();
}

std::string small_config(const std::string& extra = "") {
  return "name: tiny\n"
         "target: temperature\n"
         "window: {start: 2023-05-01, end: 2024-04-30}\n"
         "horizon: 14\n"
         "features: {threshold: 0.3, max_lag: 40, lag: 28}\n"
         "qnn:\n"
         "  entanglers: [basic, strong]\n"
         "  depths: [1]\n"
         "  train: {epochs: 2, runs: 2}\n"
         "rnn:\n"
         "  hidden: 4\n"
         "  train: {epochs: 2, runs: 2}\n"
         "dataset: data/fixtures/synthetic_barreiras.csv\n" +
         extra;
}

ExperimentConfig parse_small(const std::string& extra = "") {
  return ExperimentConfig::parse(small_config(extra), source_dir());
}

RunOptions quiet(const fs::path& out, int jobs = 1) {
  RunOptions o;
  o.offline = true;
  o.jobs = jobs;
  o.out = out;
  o.log = [](const std::string&) {};
  return o;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::internal;
}

}  // namespace

TEST_CASE("shipped configs load and validate") {
  for (const char* name : {"temperature.config", "wind.config", "ci_temperature.config"}) {
    CAPTURE(name);
    const auto c = ExperimentConfig::load(source_dir() / "configs" / name);
    CHECK_NOTHROW(c.validate());
  }
  const auto t = ExperimentConfig::load(source_dir() / "configs/temperature.config");
  CHECK(t.target_code() == "T2M");
  CHECK(t.horizon == 14);
  CHECK(to_iso(t.fetch_range().start) == "2023-03-22");
  CHECK(t.qnn.train.epochs == 30);
  CHECK(t.rnn.train.epochs == 500);
  CHECK(t.rnn.hidden == 256);
  const auto w = ExperimentConfig::load(source_dir() / "configs/wind.config");
  CHECK(w.target_code() == "WS10M");
  CHECK(w.horizon == 5);
  CHECK(w.expected_qubits == 8);
}

TEST_CASE("config defaults and overrides") {
  const auto c = parse_small();
  CHECK(c.point.lat_deg == -12.15);
  CHECK(c.seed_base == 42);
  CHECK(c.qnn.train.learning_rate == 0.1);
  CHECK(c.qnn.train.batch_size == 10);
  CHECK(c.rnn.train.learning_rate == 0.001);
  CHECK(c.dataset->is_absolute());
  const auto m = model_matrix(c);
  REQUIRE(m.size() == 3);
  CHECK(m[0].tag == "qnn_exp1_d1");
  CHECK(m[1].tag == "qnn_exp2_d1");
  CHECK(m[2].tag == "rnn");
  CHECK(m[2].depth == "-");

  const auto j = c.to_json();
  CHECK(j.at("name") == "tiny");
  CHECK(parse_small().to_json() == j);
}

TEST_CASE("config errors are configuration class") {
  CHECK_THROWS_AS(ExperimentConfig::parse("name: [unclosed"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_small("colour: blue\n"), doctest::Contains("colour"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("- a\n- b\n"), ConfigError);
  auto bad = parse_small();
  bad.horizon = 366;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = parse_small();
  bad.qnn.depths = {0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = parse_small();
  bad.target = "soil";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = parse_small();
  bad.lag = 41;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  for (const char* h : {"horizon: -3", "horizon: soon", "horizon: 2.5"}) {
    auto text = small_config();
    text.replace(text.find("horizon: 14"), 11, h);
    CAPTURE(h);
    CHECK(kind_of([&] { ExperimentConfig::parse(text); }) == ErrorKind::config);
  }
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/x.config"), Error);
}

TEST_CASE("stage wrapper keeps classes and names the stage") {
  CHECK(kind_of([] { run_stage("train", [] { throw std::runtime_error("boom"); }); }) == ErrorKind::training);
  CHECK(kind_of([] { run_stage("fetch", [] { throw InvalidArgument("x"); }); }) == ErrorKind::data);
  CHECK(kind_of([] { run_stage("report", [] { throw ConfigError("x"); }); }) == ErrorKind::config);
  CHECK_THROWS_WITH(run_stage("analyze", [] { throw std::runtime_error("boom"); }), "analyze: boom");
}

TEST_CASE("offline run without cache fails as a data error") {
  auto c = parse_small();
  c.dataset.reset();
  const auto out = fs::temp_directory_path() / "qweather_test_pipeline_nocache";
  fs::remove_all(out);
  auto o = quiet(out);
  o.cache_dir = out / "empty_cache";
  const Context ctx(c, o);
  CHECK(kind_of([&] { run_stage("fetch", [&] { cmd_fetch(ctx); }); }) == ErrorKind::data);
}

TEST_CASE("full run writes the tree, skips on rerun and ignores the thread count") {
  const auto base = fs::temp_directory_path() / "qweather_test_pipeline_run";
  fs::remove_all(base);
  const auto c = parse_small();
  const Context one(c, quiet(base / "a", 1));
  cmd_all(one);
  for (const char* f : {"analysis/correlation.csv", "analysis/correlogram.csv", "analysis/describe.csv",
                        "analysis/plan.json", "manifest.json", "models/qnn_exp1_d1/manifest.json",
                        "models/qnn_exp1_d1/runs/42/history.csv", "models/rnn/runs/43/predictions.csv",
                        "report/qnn_exp2_d1/violin.svg", "report/rnn/loss.csv", "report/comparison.csv",
                        "report/comparison.svg"}) {
    CAPTURE(f);
    CHECK(fs::exists(base / "a" / f));
  }
  const auto cmp = ingest::read_file(base / "a/report/comparison.csv");
  CHECK(cmp.rfind("model,experiment,depth,mae,accuracy_pct\nQNN,1,1,", 0) == 0);

  CHECK(cmd_train(one) == 0);
  cmd_report(one);
  CHECK(ingest::read_file(base / "a/report/comparison.csv") == cmp);

  const Context three(c, quiet(base / "b", 3));
  cmd_all(three);
  CHECK(ingest::read_file(base / "b/report/comparison.csv") == cmp);

  // A feature count that differs from the configured qubit count is flagged.
  auto flagged = c;
  flagged.expected_qubits = 99;
  cmd_report(Context(flagged, quiet(base / "a", 1)));
  CHECK(ingest::read_file(base / "a/report/comparison.svg").find("config expects 99") != std::string::npos);

  // A changed seed base invalidates every model.
  auto o = quiet(base / "a", 1);
  o.seed_base = 7;
  CHECK(cmd_train(Context(c, o)) == 3);
  CHECK(fs::exists(base / "a/models/rnn/runs/8"));
}
