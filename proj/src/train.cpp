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

#include "qweather/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "qweather/error.hpp"
#include "qweather/ingest.hpp"
#include "qweather/rnn.hpp"
#include "qweather/util.hpp"

namespace qweather::train {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(validation_split > 0.0 && validation_split < 1.0)) throw ConfigError("validation_split must be in (0, 1)");
  if (runs < 1) throw ConfigError("runs must be >= 1");
}

AdamState AdamState::zeros(std::size_t n) {
  AdamState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InvalidArgument("adam_step: size mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError("non-finite gradient at parameter " + std::to_string(i) + " (step " +
                          std::to_string(state.t + 1) + ")");
    }
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

// --- learners ----------------------------------------------------------------

namespace {

class QnnLearner final : public Learner {
 public:
  QnnLearner(const preprocess::SplitDataset& data, qnn::AnsatzSpec spec, GradientMethod method)
      : spec_(spec), method_(method), x_train_(data.x_train), y_train_(data.y_train), x_test_(data.x_test),
        y_test_(data.y_test) {
    spec_.validate();
    if (static_cast<Eigen::Index>(spec_.n_qubits) != data.x_train.cols()) {
      throw InvalidArgument("ansatz has " + std::to_string(spec_.n_qubits) + " qubits for " +
                            std::to_string(data.x_train.cols()) + " features");
    }
  }

  std::string tag() const override {
    return std::string("qnn_") + (spec_.entangler == qnn::Entangler::basic ? "exp1" : "exp2") + "_d" +
           std::to_string(spec_.depth);
  }
  std::size_t n_train() const override { return static_cast<std::size_t>(x_train_.rows()); }
  std::size_t n_test() const override { return static_cast<std::size_t>(x_test_.rows()); }
  double train_target(std::size_t i) const override { return y_train_(static_cast<Eigen::Index>(i)); }
  double test_target(std::size_t i) const override { return y_test_(static_cast<Eigen::Index>(i)); }

  std::vector<double> init_params(std::mt19937_64& rng) const override {
    return qnn::init_params(spec_, rng).flatten();
  }

  double loss_and_gradient(std::span<const double> flat, std::span<const std::size_t> batch,
                           std::vector<double>& grad) const override {
    const auto params = qnn::QnnParams::unflatten(spec_, flat);
    grad.assign(flat.size(), 0.0);
    double loss = 0.0;
    const double scale = 2.0 / static_cast<double>(batch.size());
    std::vector<double> features(static_cast<std::size_t>(spec_.n_qubits));
    for (const std::size_t i : batch) {
      row(x_train_, i, features);
      double pred = 0.0;
      std::vector<double> g;
      if (method_ == GradientMethod::adjoint) {
        g = qnn::gradient_adjoint(spec_, params, features, &pred);
      } else {
        g = qnn::gradient(spec_, params, features);
        pred = qnn::forward(spec_, params, features);
      }
      const double err = pred - train_target(i);
      loss += err * err;
      for (std::size_t k = 0; k < g.size(); ++k) grad[k] += scale * err * g[k];
    }
    return loss / static_cast<double>(batch.size());
  }

  std::vector<double> predict_train(std::span<const double> flat, std::span<const std::size_t> idx) const override {
    return predict(flat, x_train_, idx);
  }

  std::vector<double> predict_test(std::span<const double> flat) const override {
    std::vector<std::size_t> idx(n_test());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return predict(flat, x_test_, idx);
  }

  json params_json(std::span<const double> flat) const override {
    return {{"model", "qnn"},
            {"ansatz", qnn::to_json(spec_)},
            {"params", qnn::to_json(spec_, qnn::QnnParams::unflatten(spec_, flat))}};
  }

  std::optional<std::pair<double, double>> output_bound(std::span<const double> flat) const override {
    const auto p = qnn::QnnParams::unflatten(spec_, flat);
    return std::make_pair(p.b - std::abs(p.w), p.b + std::abs(p.w));
  }

 private:
  static void row(const Eigen::MatrixXd& x, std::size_t i, std::vector<double>& out) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::vector<double> predict(std::span<const double> flat, const Eigen::MatrixXd& x,
                              std::span<const std::size_t> idx) const {
    const auto params = qnn::QnnParams::unflatten(spec_, flat);
    std::vector<double> features(static_cast<std::size_t>(spec_.n_qubits));
    std::vector<double> out;
    out.reserve(idx.size());
    for (const std::size_t i : idx) {
      row(x, i, features);
      out.push_back(qnn::forward(spec_, params, features));
    }
    return out;
  }

  qnn::AnsatzSpec spec_;
  GradientMethod method_;
  Eigen::MatrixXd x_train_;
  Eigen::VectorXd y_train_;
  Eigen::MatrixXd x_test_;
  Eigen::VectorXd y_test_;
};

class RnnLearner final : public Learner {
 public:
  RnnLearner(const preprocess::SplitDataset& data, int hidden, int window)
      : hidden_(hidden), window_(window), features_(static_cast<int>(data.x_train.cols())) {
    if (hidden < 1) throw InvalidArgument("rnn hidden size must be >= 1");
    const auto n_train_rows = data.x_train.rows();
    if (window < 1 || window >= n_train_rows) {
      throw InvalidArgument("rnn window " + std::to_string(window) + " incompatible with " +
                            std::to_string(n_train_rows) + " training rows");
    }
    Eigen::MatrixXd x(n_train_rows + data.x_test.rows(), data.x_train.cols());
    x << data.x_train, data.x_test;
    Eigen::VectorXd y(x.rows());
    y << data.y_train, data.y_test;
    auto set = rnn::make_windows(x, y, window);
    for (std::size_t s = 0; s < set.windows.size(); ++s) {
      if (set.target_rows[s] < static_cast<std::size_t>(n_train_rows)) {
        train_windows_.push_back(std::move(set.windows[s]));
        train_targets_.push_back(set.targets[s]);
      } else {
        test_windows_.push_back(std::move(set.windows[s]));
        test_targets_.push_back(set.targets[s]);
      }
    }
  }

  std::string tag() const override { return "rnn"; }
  std::size_t n_train() const override { return train_windows_.size(); }
  std::size_t n_test() const override { return test_windows_.size(); }
  double train_target(std::size_t i) const override { return train_targets_[i]; }
  double test_target(std::size_t i) const override { return test_targets_[i]; }

  std::vector<double> init_params(std::mt19937_64& rng) const override {
    return rnn::init_params(hidden_, features_, rng).flatten();
  }

  double loss_and_gradient(std::span<const double> flat, std::span<const std::size_t> batch,
                           std::vector<double>& grad) const override {
    const auto params = rnn::RnnParams::unflatten(hidden_, features_, flat);
    rnn::RnnParams g;
    const double loss = rnn::batch_mse_gradient(params, gather(train_windows_, train_targets_, batch), g);
    grad = g.flatten();
    return loss;
  }

  std::vector<double> predict_train(std::span<const double> flat, std::span<const std::size_t> idx) const override {
    if (idx.empty()) return {};
    const auto params = rnn::RnnParams::unflatten(hidden_, features_, flat);
    const Eigen::VectorXd p = rnn::batch_forward(params, gather(train_windows_, train_targets_, idx));
    return {p.data(), p.data() + p.size()};
  }

  std::vector<double> predict_test(std::span<const double> flat) const override {
    const auto params = rnn::RnnParams::unflatten(hidden_, features_, flat);
    const Eigen::VectorXd p = rnn::batch_forward(params, rnn::make_batch(test_windows_, test_targets_));
    return {p.data(), p.data() + p.size()};
  }

  json params_json(std::span<const double> flat) const override {
    return {{"model", "rnn"},
            {"window", window_},
            {"params", rnn::to_json(rnn::RnnParams::unflatten(hidden_, features_, flat))}};
  }

 private:
  static rnn::Batch gather(const std::vector<rnn::Window>& windows, const std::vector<double>& targets,
                           std::span<const std::size_t> idx) {
    std::vector<rnn::Window> w;
    std::vector<double> t;
    w.reserve(idx.size());
    for (const std::size_t i : idx) {
      w.push_back(windows[i]);
      t.push_back(targets[i]);
    }
    return rnn::make_batch(w, t);
  }

  int hidden_;
  int window_;
  int features_;
  std::vector<rnn::Window> train_windows_;
  std::vector<double> train_targets_;
  std::vector<rnn::Window> test_windows_;
  std::vector<double> test_targets_;
};

/// Unbiased draw in [0, bound) from the raw generator output.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = 0;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

double mse(std::span<const double> pred, const std::vector<double>& target) {
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return pred.empty() ? 0.0 : s / static_cast<double>(pred.size());
}

}  // namespace

std::unique_ptr<Learner> make_qnn_learner(const preprocess::SplitDataset& data, const qnn::AnsatzSpec& spec,
                                          GradientMethod method) {
  return std::make_unique<QnnLearner>(data, spec, method);
}

std::unique_ptr<Learner> make_rnn_learner(const preprocess::SplitDataset& data, int hidden, int window) {
  return std::make_unique<RnnLearner>(data, hidden, window);
}

// --- training loop -------------------------------------------------------------

std::size_t validation_count(std::size_t n, double validation_split) {
  // Same rounding as a "fit on the first floor(n * (1 - split)) rows" rule.
  const auto n_fit = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - validation_split)));
  return n - n_fit;
}

RunReport train_model(const Learner& learner, const preprocess::SplitDataset& data, const TrainConfig& cfg,
                      std::uint64_t seed, const TrainHooks& hooks) {
  cfg.validate();
  const std::size_t n = learner.n_train();
  const std::size_t n_val = validation_count(n, cfg.validation_split);
  const std::size_t n_fit = n - n_val;
  if (n_fit == 0 || n_val == 0) {
    throw TrainingError("training set of " + std::to_string(n) + " samples cannot be split for validation");
  }
  if (learner.n_test() != data.test_dates.size()) {
    throw TrainingError("learner produced " + std::to_string(learner.n_test()) + " test samples for horizon " +
                        std::to_string(data.test_dates.size()));
  }

  std::mt19937_64 rng(seed);
  std::vector<double> params = learner.init_params(rng);
  AdamState adam = AdamState::zeros(params.size());

  std::vector<std::size_t> val_idx(n_val);
  std::iota(val_idx.begin(), val_idx.end(), n_fit);
  std::vector<double> val_targets;
  for (const auto i : val_idx) val_targets.push_back(learner.train_target(i));
  std::vector<std::size_t> order(n_fit);
  std::iota(order.begin(), order.end(), std::size_t{0});

  RunReport report;
  report.seed = seed;
  report.model_tag = learner.tag();
  report.n_fit = n_fit;
  report.n_validation = n_val;

  std::vector<double> grad;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n_fit; start += batch_size) {
      const std::span<const std::size_t> batch(order.data() + start, std::min(batch_size, n_fit - start));
      if (*std::max_element(batch.begin(), batch.end()) >= n_fit) {
        throw Error(ErrorKind::internal, "validation sample scheduled into a training batch");
      }
      if (hooks.on_batch) hooks.on_batch(epoch, batch);
      const double loss = learner.loss_and_gradient(params, batch, grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(n_batches + 1));
      }
      try {
        adam_step(params, grad, adam, cfg.learning_rate);
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(n_batches + 1));
      }
      loss_sum += loss;
      ++n_batches;
    }
    const double val_loss = mse(learner.predict_train(params, val_idx), val_targets);
    report.history.push_back({loss_sum / static_cast<double>(n_batches), val_loss});
  }

  report.final_params = learner.params_json(params);
  report.output_bound = learner.output_bound(params);
  report.test_dates = data.test_dates;
  report.predictions = learner.predict_test(params);
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < report.predictions.size(); ++i) {
    const double actual = learner.test_target(i);
    if (!std::isfinite(report.predictions[i])) throw TrainingError("non-finite test prediction");
    report.actuals.push_back(actual);
    report.actuals_native.push_back(data.target_to_native(actual));
    report.predictions_native.push_back(data.target_to_native(report.predictions[i]));
    abs_sum += std::abs(report.predictions[i] - actual);
  }
  const double h = static_cast<double>(report.predictions.size());
  report.mae = abs_sum / h;
  double native_sum = 0.0;
  for (std::size_t i = 0; i < report.predictions.size(); ++i) {
    native_sum += std::abs(report.predictions_native[i] - report.actuals_native[i]);
  }
  report.mae_native = native_sum / h;
  report.accuracy_pct = accuracy_pct(report.mae);
  return report;
}

// --- aggregation -----------------------------------------------------------------

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty set");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

DayStats day_stats(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75),
          values.back(), mean};
}

ExperimentSummary summarize(const std::vector<RunReport>& runs) {
  if (runs.empty()) throw TrainingError("no successful runs to summarize");
  const auto& first = runs.front();
  const std::size_t horizon = first.predictions.size();
  const std::size_t epochs = first.history.size();
  for (const auto& r : runs) {
    if (r.predictions.size() != horizon) throw TrainingError("runs disagree on horizon");
    if (r.history.size() != epochs) throw TrainingError("runs disagree on history length");
  }
  ExperimentSummary s;
  s.model_tag = first.model_tag;
  s.test_dates = first.test_dates;
  s.actuals_native = first.actuals_native;
  const double k = static_cast<double>(runs.size());
  for (std::size_t d = 0; d < horizon; ++d) {
    std::vector<double> native;
    double mean_std = 0.0;
    for (const auto& r : runs) {
      native.push_back(r.predictions_native[d]);
      mean_std += r.predictions[d];
    }
    s.per_day_native.push_back(day_stats(native));
    s.mean_prediction.push_back(mean_std / k);
  }
  for (std::size_t e = 0; e < epochs; ++e) {
    double tr = 0.0;
    double va = 0.0;
    for (const auto& r : runs) {
      tr += r.history[e].train_loss;
      va += r.history[e].val_loss;
    }
    s.mean_history.push_back({tr / k, va / k});
  }
  for (const auto& r : runs) {
    s.mean_mae += r.mae;
    s.mean_mae_native += r.mae_native;
  }
  s.mean_mae /= k;
  s.mean_mae_native /= k;
  s.accuracy_pct = accuracy_pct(s.mean_mae);
  return s;
}

ExperimentResult run_experiment(const Learner& learner, const preprocess::SplitDataset& data, const TrainConfig& cfg,
                                int jobs) {
  cfg.validate();
  const auto n_runs = static_cast<std::size_t>(cfg.runs);
  std::vector<std::optional<RunReport>> slots(n_runs);
  std::vector<std::string> errors(n_runs);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) {
      try {
        slots[i] = train_model(learner, data, cfg, cfg.seed_base + i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<int>(jobs, 1, cfg.runs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  ExperimentResult out;
  for (std::size_t i = 0; i < n_runs; ++i) {
    if (slots[i]) {
      out.runs.push_back(std::move(*slots[i]));
    } else {
      out.failures.emplace_back(cfg.seed_base + i, errors[i]);
    }
  }
  if (!out.runs.empty()) out.summary = summarize(out.runs);
  return out;
}

// --- artifacts -------------------------------------------------------------------

void write_run_artifacts(const fs::path& dir, const RunReport& r) {
  fs::create_directories(dir);
  std::string hist = "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    hist += std::to_string(e + 1) + "," + util::format_double(r.history[e].train_loss) + "," +
            util::format_double(r.history[e].val_loss) + "\n";
  }
  ingest::atomic_write(dir / "history.csv", hist);

  std::string pred = "day,date,actual,prediction,actual_native,prediction_native\n";
  for (std::size_t d = 0; d < r.predictions.size(); ++d) {
    pred += std::to_string(d + 1) + "," + to_iso(r.test_dates[d]) + "," + util::format_double(r.actuals[d]) + "," +
            util::format_double(r.predictions[d]) + "," + util::format_double(r.actuals_native[d]) + "," +
            util::format_double(r.predictions_native[d]) + "\n";
  }
  ingest::atomic_write(dir / "predictions.csv", pred);

  json meta = {{"seed", r.seed},
               {"model_tag", r.model_tag},
               {"mae", r.mae},
               {"mae_native", r.mae_native},
               {"accuracy_pct", r.accuracy_pct},
               {"n_fit", r.n_fit},
               {"n_validation", r.n_validation},
               {"final", r.final_params}};
  if (r.output_bound) meta["output_bound"] = {r.output_bound->first, r.output_bound->second};
  ingest::atomic_write(dir / "params.json", meta.dump() + "\n");
}

RunReport read_run_artifacts(const fs::path& dir) {
  RunReport r;
  const auto meta = json::parse(ingest::read_file(dir / "params.json"));
  r.seed = meta.at("seed").get<std::uint64_t>();
  r.model_tag = meta.at("model_tag").get<std::string>();
  r.n_fit = meta.at("n_fit").get<std::size_t>();
  r.n_validation = meta.at("n_validation").get<std::size_t>();

  auto lines = [&](const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(ingest::read_file(p));
    std::string line;
    std::getline(in, line);
    std::size_t no = 1;
    while (std::getline(in, line)) {
      ++no;
      std::vector<std::string> f;
      for (auto sv : util::split(line, ',')) f.emplace_back(sv);
      rows.push_back(std::move(f));
    }
    return rows;
  };
  auto num = [&](const std::string& s, const fs::path& p) {
    const auto v = util::parse_double(s);
    if (!v) throw ParseError("non-numeric field '" + s + "' in " + p.string());
    return *v;
  };

  const auto hist_path = dir / "history.csv";
  for (const auto& f : lines(hist_path)) {
    if (f.size() != 3) throw ParseError("malformed row in " + hist_path.string());
    r.history.push_back({num(f[1], hist_path), num(f[2], hist_path)});
  }
  const auto pred_path = dir / "predictions.csv";
  for (const auto& f : lines(pred_path)) {
    if (f.size() != 6) throw ParseError("malformed row in " + pred_path.string());
    r.test_dates.push_back(parse_iso_date(f[1]));
    r.actuals.push_back(num(f[2], pred_path));
    r.predictions.push_back(num(f[3], pred_path));
    r.actuals_native.push_back(num(f[4], pred_path));
    r.predictions_native.push_back(num(f[5], pred_path));
  }
  double a = 0.0;
  double an = 0.0;
  for (std::size_t d = 0; d < r.predictions.size(); ++d) {
    a += std::abs(r.predictions[d] - r.actuals[d]);
    an += std::abs(r.predictions_native[d] - r.actuals_native[d]);
  }
  if (!r.predictions.empty()) {
    r.mae = a / static_cast<double>(r.predictions.size());
    r.mae_native = an / static_cast<double>(r.predictions.size());
  }
  r.accuracy_pct = accuracy_pct(r.mae);
  return r;
}

}  // namespace qweather::train
