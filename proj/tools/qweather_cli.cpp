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

// qweather: fetch -> analyze -> train -> report driver over the C API.
//
// Exit codes: 0 ok, 2 config, 3 data, 4 training, 5 report.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>

#include "qweather.h"

namespace {

struct Flags {
  std::string config;
  bool offline{false};
  int jobs{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
  std::uint64_t seed_base{0};
  bool seed_set{false};
  std::string out;
};

void log_line(const char* msg, void*) { std::fprintf(stderr, "%s\n", msg); }

int exit_code(qwf_status s) {
  switch (s) {
    case QWF_OK:
      return 0;
    case QWF_ERR_CONFIG:
    case QWF_ERR_DATA:
    case QWF_ERR_TRAINING:
    case QWF_ERR_REPORT:
      return static_cast<int>(s);
    case QWF_ERR_INVALID_ARGUMENT:
      return 2;
    default:
      return 1;
  }
}

int run(const Flags& f, qwf_stage stage) {
  qwf_experiment* exp = nullptr;
  qwf_status s = qwf_experiment_open(f.config.c_str(), &exp);
  if (s != QWF_OK) {
    std::fprintf(stderr, "qweather: config: %s\n", qwf_last_error());
    return exit_code(s);
  }
  qwf_experiment_set_offline(exp, f.offline ? 1 : 0);
  qwf_experiment_set_log(exp, log_line, nullptr);
  if (f.seed_set) qwf_experiment_set_seed_base(exp, f.seed_base);
  if (!f.out.empty()) qwf_experiment_set_out_dir(exp, f.out.c_str());
  s = qwf_experiment_set_jobs(exp, f.jobs);
  if (s == QWF_OK) s = qwf_experiment_run(exp, stage);
  if (s != QWF_OK) std::fprintf(stderr, "qweather: %s\n", qwf_last_error());
  qwf_experiment_close(exp);
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum and recurrent weather forecasting study"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qwf_version());

  Flags f;
  qwf_stage stage = QWF_STAGE_ALL;
  const std::pair<const char*, qwf_stage> stages[] = {
      {"fetch", QWF_STAGE_FETCH},     {"analyze", QWF_STAGE_ANALYZE}, {"train", QWF_STAGE_TRAIN},
      {"report", QWF_STAGE_REPORT},   {"all", QWF_STAGE_ALL},
  };
  const char* help[] = {
      "Download (or validate) the daily dataset into the cache",
      "Correlation matrix, lag correlogram, feature plan and split",
      "Train every model in the matrix (skips up-to-date models)",
      "Write violin, loss and MAE tables and figures",
      "Run fetch, analyze, train and report",
  };
  for (std::size_t i = 0; i < std::size(stages); ++i) {
    auto* sub = app.add_subcommand(stages[i].first, help[i]);
    sub->add_option("--config", f.config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--offline", f.offline, "Never touch the network");
    sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed-base", f.seed_base, "First run seed (default from config, 42)")
        ->each([&f](const std::string&) { f.seed_set = true; });
    sub->add_option("--out", f.out, "Output directory (overrides config)");
    sub->callback([&stage, s = stages[i].second] { stage = s; });
  }
  app.footer("Environment: QWEATHER_CACHE_DIR overrides the cache directory.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return run(f, stage);
}
