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
 * @file rnn.hpp
 * @brief Single-layer Elman network with a linear head, trained by BPTT.
 *
 *   h_0 = 0
 *   h_t = tanh(W_in x_t + W_rec h_{t-1} + b_h)
 *   y   = W_out h_W + b_out
 */
#pragma once

#include <Eigen/Dense>

#include <random>
#include <span>
#include <vector>

#include <json.hpp>

namespace qweather::rnn {

inline constexpr int kDefaultHidden = 256;

struct RnnParams {
  Eigen::MatrixXd w_in;   // hidden x features
  Eigen::MatrixXd w_rec;  // hidden x hidden
  Eigen::VectorXd b_h;    // hidden
  Eigen::RowVectorXd w_out;  // 1 x hidden
  double b_out{0.0};

  static RnnParams zeros(int hidden, int features);

  [[nodiscard]] int hidden() const noexcept { return static_cast<int>(w_rec.rows()); }
  [[nodiscard]] int features() const noexcept { return static_cast<int>(w_in.cols()); }
  [[nodiscard]] std::size_t n_params() const noexcept;

  /// Order: w_in, w_rec, b_h, w_out (each column-major), b_out.
  [[nodiscard]] std::vector<double> flatten() const;
  static RnnParams unflatten(int hidden, int features, std::span<const double> flat);
  /// Throws InvalidArgument on inconsistent shapes or non-finite entries.
  void validate() const;
};

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
RnnParams init_params(int hidden, int features, std::mt19937_64& rng);

/// One sample: rows are time steps, columns features.
using Window = Eigen::MatrixXd;

double rnn_forward(const RnnParams& params, const Window& window);

/// Exact gradient of (prediction - target)^2 by backpropagation through time.
RnnParams rnn_gradient(const RnnParams& params, const Window& window, double target, double* prediction = nullptr);

/// A batch laid out time-major: steps[t] is features x batch.
struct Batch {
  std::vector<Eigen::MatrixXd> steps;
  Eigen::VectorXd targets;

  [[nodiscard]] Eigen::Index size() const noexcept { return targets.size(); }
};

Batch make_batch(std::span<const Window> windows, std::span<const double> targets);

Eigen::VectorXd batch_forward(const RnnParams& params, const Batch& batch);

/// Mean squared error over the batch; writes its gradient into `grad`
/// (resized as needed).
double batch_mse_gradient(const RnnParams& params, const Batch& batch, RnnParams& grad);

/// Sample i predicts y[r] from rows r-W .. r-1 of x, for r = W .. rows-1.
struct WindowSet {
  std::vector<Window> windows;
  std::vector<double> targets;
  /// Row of x/y each sample predicts.
  std::vector<std::size_t> target_rows;
};

WindowSet make_windows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int window);

nlohmann::json to_json(const RnnParams& params);
RnnParams params_from_json(const nlohmann::json& j);

}  // namespace qweather::rnn
