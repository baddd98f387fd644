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

#include "qweather/pipeline.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "qweather/error.hpp"
#include "qweather/report.hpp"
#include "qweather/util.hpp"

namespace qweather::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bumped whenever a change alters trained numbers for identical inputs.
constexpr int kTrainingFormat = 1;

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, T fallback) {
  const auto n = node[key];
  if (!n || n.IsNull()) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> known) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError("'" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

train::TrainConfig parse_train(const YAML::Node& node, train::TrainConfig t) {
  check_keys(node, "train", {"epochs", "learning_rate", "batch_size", "validation_split", "runs"});
  if (!node) return t;
  t.epochs = scalar(node, "epochs", t.epochs);
  t.learning_rate = scalar(node, "learning_rate", t.learning_rate);
  t.batch_size = scalar(node, "batch_size", t.batch_size);
  t.validation_split = scalar(node, "validation_split", t.validation_split);
  t.runs = scalar(node, "runs", t.runs);
  return t;
}

json train_json(const train::TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"learning_rate", t.learning_rate},
          {"batch_size", t.batch_size},
          {"validation_split", t.validation_split},
          {"runs", t.runs},
          {"seed_base", t.seed_base}};
}

Date parse_date_key(const YAML::Node& node, const std::string& key) {
  if (!node[key]) throw ConfigError("window." + key + " is required");
  try {
    return parse_iso_date(node[key].as<std::string>());
  } catch (const Error& e) {
    throw ConfigError("window." + key + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() || base.empty() ? p : base / p; }

std::string stage_csv_correlogram(const std::vector<preprocess::LagCorrelation>& c) {
  std::string out = "lag,rho\n";
  for (const auto& l : c) out += std::to_string(l.lag) + "," + util::format_double(l.rho) + "\n";
  return out;
}

std::string stage_csv_matrix(const preprocess::CorrelationMatrix& m) {
  std::string out = "column";
  for (const auto& n : m.names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out += m.names[i];
    for (std::size_t j = 0; j < m.names.size(); ++j) {
      out += "," + util::format_double(m.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out += "\n";
  }
  return out;
}

ErrorKind stage_kind(const std::string& stage) {
  if (stage == "fetch" || stage == "analyze") return ErrorKind::data;
  if (stage == "train") return ErrorKind::training;
  if (stage == "report") return ErrorKind::report;
  return ErrorKind::config;
}

}  // namespace

// --- config ----------------------------------------------------------------------

namespace {

ExperimentConfig parse_root(const YAML::Node& root, const fs::path& base_dir) {
  if (!root.IsMap()) throw ConfigError("config must be a YAML mapping");
  check_keys(root, "config",
             {"name", "target", "location", "window", "horizon", "features", "expected_qubits", "qnn", "rnn",
              "seed_base", "output", "cache", "dataset"});

  ExperimentConfig c;
  c.name = scalar<std::string>(root, "name", "");
  c.target = scalar<std::string>(root, "target", "");

  if (const auto loc = root["location"]) {
    check_keys(loc, "location", {"lat", "lon"});
    c.point.lat_deg = scalar(loc, "lat", c.point.lat_deg);
    c.point.lon_deg = scalar(loc, "lon", c.point.lon_deg);
  }
  const auto win = root["window"];
  if (!win) throw ConfigError("window is required");
  check_keys(win, "window", {"start", "end"});
  c.window = {parse_date_key(win, "start"), parse_date_key(win, "end")};
  c.horizon = scalar<std::size_t>(root, "horizon", c.horizon);

  if (const auto f = root["features"]) {
    check_keys(f, "features", {"threshold", "max_lag", "lag", "parameters", "catalog"});
    c.threshold = scalar(f, "threshold", c.threshold);
    c.max_lag = scalar(f, "max_lag", c.max_lag);
    if (f["lag"] && !f["lag"].IsNull()) c.lag = scalar(f, "lag", 0);
    if (f["parameters"]) {
      try {
        c.parameters = f["parameters"].as<std::vector<std::string>>();
      } catch (const YAML::Exception&) {
        throw ConfigError("features.parameters must be a list of codes");
      }
    }
    if (f["catalog"] && !f["catalog"].IsNull()) c.catalog = resolve(base_dir, scalar<std::string>(f, "catalog", ""));
  }
  if (root["expected_qubits"] && !root["expected_qubits"].IsNull()) {
    c.expected_qubits = scalar(root, "expected_qubits", 0);
  }

  if (const auto q = root["qnn"]) {
    check_keys(q, "qnn", {"entanglers", "depths", "readout", "hadamard_prelayer", "feature_scale", "gradient", "train"});
    if (q["entanglers"]) {
      c.qnn.entanglers.clear();
      for (const auto& e : q["entanglers"]) {
        try {
          c.qnn.entanglers.push_back(qnn::entangler_from_string(e.as<std::string>()));
        } catch (const Error& err) {
          throw ConfigError(std::string("qnn.entanglers: ") + err.what());
        }
      }
    }
    if (q["depths"]) c.qnn.depths = q["depths"].as<std::vector<int>>();
    const auto readout = scalar<std::string>(q, "readout", "first_qubit");
    if (readout == "first_qubit") {
      c.qnn.readout = qnn::Readout::first_qubit;
    } else if (readout == "mean_all") {
      c.qnn.readout = qnn::Readout::mean_all;
    } else {
      throw ConfigError("qnn.readout must be first_qubit or mean_all");
    }
    c.qnn.hadamard_prelayer = scalar(q, "hadamard_prelayer", false);
    c.qnn.feature_scale = scalar(q, "feature_scale", 1.0);
    const auto grad = scalar<std::string>(q, "gradient", "adjoint");
    if (grad == "adjoint") {
      c.qnn.gradient = train::GradientMethod::adjoint;
    } else if (grad == "parameter_shift") {
      c.qnn.gradient = train::GradientMethod::parameter_shift;
    } else {
      throw ConfigError("qnn.gradient must be adjoint or parameter_shift");
    }
    c.qnn.train = parse_train(q["train"], c.qnn.train);
  }
  if (const auto r = root["rnn"]) {
    check_keys(r, "rnn", {"enabled", "hidden", "window", "train"});
    c.rnn.enabled = scalar(r, "enabled", true);
    c.rnn.hidden = scalar(r, "hidden", c.rnn.hidden);
    if (r["window"] && !r["window"].IsNull()) c.rnn.window = scalar(r, "window", 0);
    c.rnn.train = parse_train(r["train"], c.rnn.train);
  }
  c.seed_base = scalar<std::uint64_t>(root, "seed_base", c.seed_base);
  c.output = scalar<std::string>(root, "output", c.output.string());
  if (root["cache"] && !root["cache"].IsNull()) c.cache = scalar<std::string>(root, "cache", "");
  if (root["dataset"] && !root["dataset"].IsNull()) c.dataset = resolve(base_dir, scalar<std::string>(root, "dataset", ""));
  return c;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& yaml, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    c = parse_root(YAML::Load(yaml), base_dir);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = ingest::read_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse(text, path.parent_path());
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("name is required");
  if (name.find_first_of("/\\ ") != std::string::npos) throw ConfigError("name must not contain spaces or slashes");
  if (target.empty()) throw ConfigError("target is required");
  try {
    point.validate();
    window.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (horizon >= window.days()) throw ConfigError("horizon leaves no training rows inside the window");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("features.threshold must lie in [0, 1]");
  if (max_lag < 1) throw ConfigError("features.max_lag must be >= 1");
  if (lag && (*lag < 1 || *lag > max_lag)) throw ConfigError("features.lag must lie in [1, max_lag]");
  if (expected_qubits && *expected_qubits < 1) throw ConfigError("expected_qubits must be positive");
  for (int d : qnn.depths) {
    if (d < 1) throw ConfigError("qnn.depths entries must be >= 1");
  }
  if (!std::isfinite(qnn.feature_scale)) throw ConfigError("qnn.feature_scale must be finite");
  const bool any_qnn = !qnn.entanglers.empty() && !qnn.depths.empty();
  if (!any_qnn && !rnn.enabled) throw ConfigError("model matrix is empty");
  if (any_qnn) qnn.train.validate();
  if (rnn.enabled) {
    rnn.train.validate();
    if (rnn.hidden < 1) throw ConfigError("rnn.hidden must be >= 1");
    if (rnn.window && *rnn.window < 1) throw ConfigError("rnn.window must be >= 1");
  }
  (void)target_code();
}

ingest::ParameterCatalog ExperimentConfig::load_catalog() const {
  if (!catalog) return ingest::ParameterCatalog::builtin();
  try {
    return ingest::ParameterCatalog::load(*catalog);
  } catch (const Error& e) {
    throw ConfigError(std::string("parameter catalog: ") + e.what());
  }
}

std::string ExperimentConfig::target_code() const {
  try {
    return load_catalog().resolve(target);
  } catch (const MissingParameterError& e) {
    throw ConfigError(std::string("target: ") + e.what());
  }
}

ingest::DateRange ExperimentConfig::fetch_range() const {
  return ingest::extend_for_lag(window, std::max(max_lag, lag.value_or(0)));
}

json ExperimentConfig::to_json() const {
  json j;
  j["name"] = name;
  j["target"] = target;
  j["target_code"] = target_code();
  j["location"] = {{"lat", point.lat_deg}, {"lon", point.lon_deg}};
  j["window"] = {{"start", to_iso(window.start)}, {"end", to_iso(window.end)}};
  j["horizon"] = horizon;
  j["features"] = {{"threshold", threshold}, {"max_lag", max_lag}, {"parameters", parameters}};
  j["features"]["lag"] = lag ? json(*lag) : json(nullptr);
  j["expected_qubits"] = expected_qubits ? json(*expected_qubits) : json(nullptr);
  json ents = json::array();
  for (auto e : qnn.entanglers) ents.push_back(qnn::to_string(e));
  j["qnn"] = {{"entanglers", ents},
              {"depths", qnn.depths},
              {"readout", qnn.readout == qnn::Readout::first_qubit ? "first_qubit" : "mean_all"},
              {"hadamard_prelayer", qnn.hadamard_prelayer},
              {"feature_scale", qnn.feature_scale},
              {"gradient", qnn.gradient == train::GradientMethod::adjoint ? "adjoint" : "parameter_shift"},
              {"train", train_json(qnn.train)}};
  j["rnn"] = {{"enabled", rnn.enabled},
              {"hidden", rnn.hidden},
              {"window", rnn.window ? json(*rnn.window) : json(nullptr)},
              {"activation", "tanh"},
              {"head", "linear on last hidden state"},
              {"train", train_json(rnn.train)}};
  j["seed_base"] = seed_base;
  return j;
}

// --- context -----------------------------------------------------------------------

Context::Context(ExperimentConfig c, RunOptions o) : cfg(std::move(c)), opts(std::move(o)) {
  if (opts.seed_base) cfg.seed_base = *opts.seed_base;
  cfg.qnn.train.seed_base = cfg.seed_base;
  cfg.rnn.train.seed_base = cfg.seed_base;
  if (opts.jobs < 1) throw ConfigError("--jobs must be >= 1");
  out = opts.out ? *opts.out : cfg.output;
  if (opts.cache_dir) {
    cache = *opts.cache_dir;
  } else if (const char* env = std::getenv("QWEATHER_CACHE_DIR"); env && *env) {
    cache = env;
  } else if (cfg.cache) {
    cache = *cfg.cache;
  } else {
    cache = out / "cache";
  }
}

void Context::info(const std::string& msg) const {
  if (opts.log) opts.log(msg);
}

std::vector<ModelEntry> model_matrix(const ExperimentConfig& cfg) {
  std::vector<ModelEntry> m;
  for (auto ent : {qnn::Entangler::basic, qnn::Entangler::strong}) {
    if (std::find(cfg.qnn.entanglers.begin(), cfg.qnn.entanglers.end(), ent) == cfg.qnn.entanglers.end()) continue;
    const std::string exp = ent == qnn::Entangler::basic ? "1" : "2";
    std::vector<int> depths = cfg.qnn.depths;
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    for (int d : depths) m.push_back({"qnn_exp" + exp + "_d" + std::to_string(d), "QNN", exp, std::to_string(d)});
  }
  if (cfg.rnn.enabled) m.push_back({"rnn", "RNN", "-", "-"});
  return m;
}

void run_stage(const std::string& stage, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    const auto k = static_cast<int>(e.kind()) <= 5 ? e.kind() : stage_kind(stage);
    throw Error(k, stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(stage_kind(stage), stage + ": " + e.what());
  }
}

// --- stages ------------------------------------------------------------------------

namespace {

struct Loaded {
  ingest::DailyDataset data;
  std::string hash;
};

Loaded load_data(const Context& ctx, bool allow_network) {
  const auto range = ctx.cfg.fetch_range();
  if (ctx.cfg.dataset) {
    auto full = ingest::load_fixture(*ctx.cfg.dataset);
    return {full.slice(range), util::git_blob_sha1_hex(ingest::read_file(*ctx.cfg.dataset))};
  }
  ingest::Request req;
  req.point = ctx.cfg.point;
  req.range = range;
  const auto catalog = ctx.cfg.load_catalog();
  if (ctx.cfg.parameters.empty()) {
    req.params = catalog.codes();
  } else {
    for (const auto& p : ctx.cfg.parameters) req.params.push_back(catalog.resolve(p));
  }
  const auto target = ctx.cfg.target_code();
  if (std::find(req.params.begin(), req.params.end(), target) == req.params.end()) req.params.push_back(target);

  ingest::FetchOptions fo;
  fo.cache_dir = ctx.cache;
  fo.offline = ctx.opts.offline || !allow_network;
  fo.transport = ctx.opts.transport;
  fs::create_directories(ctx.cache);
  auto data = ingest::fetch_daily(req, fo);
  const auto csv = ingest::cache_csv_path(ctx.cache, req);
  return {std::move(data), util::git_blob_sha1_hex(ingest::read_file(csv))};
}

qnn::AnsatzSpec ansatz_for(const ExperimentConfig& cfg, const ModelEntry& m, int n_qubits) {
  qnn::AnsatzSpec s;
  s.n_qubits = n_qubits;
  s.depth = std::stoi(m.depth);
  s.entangler = m.experiment == "1" ? qnn::Entangler::basic : qnn::Entangler::strong;
  s.readout = cfg.qnn.readout;
  s.hadamard_prelayer = cfg.qnn.hadamard_prelayer;
  s.feature_scale = cfg.qnn.feature_scale;
  return s;
}

const train::TrainConfig& train_cfg(const ExperimentConfig& cfg, const ModelEntry& m) {
  return m.model == "RNN" ? cfg.rnn.train : cfg.qnn.train;
}

std::string input_hash(const json& manifest_inputs) { return util::sha256_hex(manifest_inputs.dump()); }

fs::path model_dir(const Context& ctx, const std::string& tag) { return ctx.out / "models" / tag; }

std::vector<std::uint64_t> seeds_of(const train::TrainConfig& t) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < t.runs; ++i) s.push_back(t.seed_base + static_cast<std::uint64_t>(i));
  return s;
}

json model_inputs(const Context& ctx, const Prepared& p, const ModelEntry& m) {
  json j;
  j["format"] = kTrainingFormat;
  j["config"] = ctx.cfg.to_json();
  j["model"] = m.tag;
  j["dataset_git_hash"] = p.dataset_hash;
  j["plan"] = preprocess::to_json(p.plan.plan);
  j["seeds"] = seeds_of(train_cfg(ctx.cfg, m));
  return j;
}

bool up_to_date(const Context& ctx, const ModelEntry& m, const std::string& hash,
                const std::vector<std::uint64_t>& seeds) {
  const auto path = model_dir(ctx, m.tag) / "manifest.json";
  if (!fs::exists(path)) return false;
  try {
    const auto j = json::parse(ingest::read_file(path));
    if (j.value("input_hash", "") != hash || j.value("status", "") != "complete") return false;
  } catch (const json::exception&) {
    return false;
  }
  for (auto s : seeds) {
    const auto run = model_dir(ctx, m.tag) / "runs" / std::to_string(s);
    for (const char* f : {"history.csv", "predictions.csv", "params.json"}) {
      if (!fs::exists(run / f)) return false;
    }
  }
  return true;
}

}  // namespace

Prepared prepare(const Context& ctx, bool allow_network) {
  Prepared p;
  auto loaded = load_data(ctx, allow_network);
  p.extended = std::move(loaded.data);
  p.dataset_hash = std::move(loaded.hash);
  p.plan = preprocess::build_plan(p.extended, ctx.cfg.window, ctx.cfg.target_code(), ctx.cfg.threshold, ctx.cfg.lag,
                                  ctx.cfg.max_lag);
  p.split = preprocess::chronological_split(p.plan.modeling, p.plan.plan, ctx.cfg.horizon);
  return p;
}

ingest::DailyDataset cmd_fetch(const Context& ctx) {
  ingest::DailyDataset out;
  run_stage("fetch", [&] {
    auto loaded = load_data(ctx, true);
    ctx.info("fetch: " + std::to_string(loaded.data.size()) + " days, " +
             std::to_string(loaded.data.columns().size()) + " parameters, dataset " + loaded.hash.substr(0, 12));
    out = std::move(loaded.data);
  });
  return out;
}

Prepared cmd_analyze(const Context& ctx) {
  Prepared p;
  run_stage("analyze", [&] {
    p = prepare(ctx, false);
    const auto dir = ctx.out / "analysis";
    fs::create_directories(dir);
    ingest::atomic_write(dir / "correlation.csv", stage_csv_matrix(p.plan.matrix));
    ingest::atomic_write(dir / "correlogram.csv", stage_csv_correlogram(p.plan.correlogram));
    auto cols = p.plan.plan.features;
    cols.insert(cols.begin(), p.plan.plan.target);
    ingest::atomic_write(dir / "describe.csv", preprocess::describe_csv(preprocess::describe(p.plan.modeling, cols)));
    json plan;
    plan["plan"] = preprocess::to_json(p.plan.plan);
    plan["scaler"] = preprocess::to_json(p.split.scaler);
    plan["n_train"] = p.split.x_train.rows();
    plan["n_test"] = p.split.x_test.rows();
    plan["n_qubits"] = p.split.n_features();
    plan["dataset_git_hash"] = p.dataset_hash;
    ingest::atomic_write(dir / "plan.json", plan.dump(2) + "\n");
    ctx.info("analyze: lag " + std::to_string(p.plan.plan.lag_days) + ", " + std::to_string(p.split.n_features()) +
             " features, split " + std::to_string(p.split.x_train.rows()) + "/" +
             std::to_string(p.split.x_test.rows()));
    if (ctx.cfg.expected_qubits && static_cast<std::size_t>(*ctx.cfg.expected_qubits) != p.split.n_features()) {
      ctx.info("analyze: warning: selected " + std::to_string(p.split.n_features()) + " features, config expects " +
               std::to_string(*ctx.cfg.expected_qubits) + " qubits");
    }
  });
  return p;
}

int cmd_train(const Context& ctx) {
  int trained = 0;
  Prepared p;
  run_stage("analyze", [&] { p = prepare(ctx, false); });
  run_stage("train", [&] {
    const int n = static_cast<int>(p.split.n_features());
    std::vector<std::string> failed;
    json index = json::array();
    for (const auto& m : model_matrix(ctx.cfg)) {
      const auto& tc = train_cfg(ctx.cfg, m);
      const auto inputs = model_inputs(ctx, p, m);
      const auto hash = input_hash(inputs);
      const auto seeds = seeds_of(tc);
      index.push_back({{"tag", m.tag}, {"input_hash", hash}});
      if (up_to_date(ctx, m, hash, seeds)) {
        ctx.info("train: " + m.tag + " up to date");
        continue;
      }
      std::unique_ptr<train::Learner> learner;
      json model_json;
      if (m.model == "RNN") {
        const int window = ctx.cfg.rnn.window.value_or(p.plan.plan.lag_days);
        learner = train::make_rnn_learner(p.split, ctx.cfg.rnn.hidden, window);
        model_json = {{"family", "rnn"}, {"cell", "elman"}, {"activation", "tanh"}, {"head", "linear"},
                      {"hidden", ctx.cfg.rnn.hidden}, {"window", window}, {"features", n}};
      } else {
        const auto spec = ansatz_for(ctx.cfg, m, n);
        learner = train::make_qnn_learner(p.split, spec, ctx.cfg.qnn.gradient);
        model_json = qnn::to_json(spec);
        model_json["family"] = "qnn";
      }
      ctx.info("train: " + m.tag + " (" + std::to_string(tc.runs) + " runs x " + std::to_string(tc.epochs) +
               " epochs, jobs " + std::to_string(ctx.opts.jobs) + ")");
      const auto result = train::run_experiment(*learner, p.split, tc, ctx.opts.jobs);
      const auto dir = model_dir(ctx, m.tag);
      fs::create_directories(dir);
      for (const auto& r : result.runs) train::write_run_artifacts(dir / "runs" / std::to_string(r.seed), r);

      json manifest = inputs;
      manifest["input_hash"] = hash;
      manifest["model_spec"] = model_json;
      manifest["scaler"] = preprocess::to_json(p.split.scaler);
      manifest["layout"] = {{"history", "runs/<seed>/history.csv"},
                            {"predictions", "runs/<seed>/predictions.csv"},
                            {"params", "runs/<seed>/params.json"}};
      manifest["status"] = result.failed() ? "failed" : "complete";
      json fails = json::array();
      for (const auto& [seed, msg] : result.failures) fails.push_back({{"seed", seed}, {"error", msg}});
      manifest["failures"] = fails;
      ingest::atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
      ++trained;
      if (result.failed()) {
        failed.push_back(m.tag + " (" + std::to_string(result.failures.size()) + " runs: " +
                         result.failures.front().second + ")");
      } else if (result.summary) {
        ctx.info("train: " + m.tag + " mean MAE " + util::format_double(result.summary->mean_mae));
      }
    }
    json top;
    top["config"] = ctx.cfg.to_json();
    top["dataset_git_hash"] = p.dataset_hash;
    top["plan"] = preprocess::to_json(p.plan.plan);
    top["scaler"] = preprocess::to_json(p.split.scaler);
    top["models"] = index;
    fs::create_directories(ctx.out);
    ingest::atomic_write(ctx.out / "manifest.json", top.dump(2) + "\n");
    if (!failed.empty()) {
      std::string msg = "runs aborted:";
      for (const auto& f : failed) msg += " " + f;
      throw TrainingError(msg);
    }
  });
  return trained;
}

void cmd_report(const Context& ctx) {
  run_stage("report", [&] {
    report::ComparisonTable table;
    std::string header = ctx.cfg.name + " (seed_base " + std::to_string(ctx.cfg.seed_base) + ")";
    const auto plan_path = ctx.out / "analysis" / "plan.json";
    if (ctx.cfg.expected_qubits && fs::exists(plan_path)) {
      const auto n = json::parse(ingest::read_file(plan_path)).value("n_qubits", 0);
      if (n != *ctx.cfg.expected_qubits) {
        header += " [" + std::to_string(n) + " qubits, config expects " + std::to_string(*ctx.cfg.expected_qubits) + "]";
        ctx.info("report: warning: feature count differs from expected_qubits");
      }
    }
    for (const auto& m : model_matrix(ctx.cfg)) {
      const auto dir = model_dir(ctx, m.tag);
      if (!fs::exists(dir / "manifest.json")) {
        throw ReportError("no run artifacts for " + m.tag + " under " + dir.string() + "; run 'train' first");
      }
      std::vector<train::RunReport> runs;
      for (auto seed : seeds_of(train_cfg(ctx.cfg, m))) {
        const auto run = dir / "runs" / std::to_string(seed);
        if (!fs::exists(run / "predictions.csv")) throw ReportError("missing run artifacts in " + run.string());
        runs.push_back(train::read_run_artifacts(run));
      }
      report::emit_model_report(ctx.out / "report" / m.tag, runs, m.tag + " - " + header);
      double mae = 0.0;
      for (const auto& r : runs) mae += r.mae;
      mae /= static_cast<double>(runs.size());
      table.rows.push_back({m.model, m.experiment, m.depth, mae, train::accuracy_pct(mae)});
    }
    report::emit_comparison(ctx.out / "report", table, "MAE comparison - " + header);
    ctx.info("report: " + std::to_string(table.rows.size()) + " models -> " + (ctx.out / "report").string());
  });
}

void cmd_all(const Context& ctx) {
  cmd_fetch(ctx);
  cmd_analyze(ctx);
  cmd_train(ctx);
  cmd_report(ctx);
}

}  // namespace qweather::pipeline
