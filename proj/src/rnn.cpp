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

#include "qweather/rnn.hpp"

#include <cmath>

#include "qweather/error.hpp"

namespace qweather::rnn {

using nlohmann::json;

RnnParams RnnParams::zeros(int hidden, int features) {
  if (hidden < 1 || features < 1) throw InvalidArgument("rnn dimensions must be positive");
  RnnParams p;
  p.w_in = Eigen::MatrixXd::Zero(hidden, features);
  p.w_rec = Eigen::MatrixXd::Zero(hidden, hidden);
  p.b_h = Eigen::VectorXd::Zero(hidden);
  p.w_out = Eigen::RowVectorXd::Zero(hidden);
  p.b_out = 0.0;
  return p;
}

std::size_t RnnParams::n_params() const noexcept {
  return static_cast<std::size_t>(w_in.size() + w_rec.size() + b_h.size() + w_out.size() + 1);
}

std::vector<double> RnnParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(n_params());
  auto append = [&flat](const auto& m) { flat.insert(flat.end(), m.data(), m.data() + m.size()); };
  append(w_in);
  append(w_rec);
  append(b_h);
  append(w_out);
  flat.push_back(b_out);
  return flat;
}

RnnParams RnnParams::unflatten(int hidden, int features, std::span<const double> flat) {
  RnnParams p = zeros(hidden, features);
  if (flat.size() != p.n_params()) {
    throw InvalidArgument("flat rnn vector has " + std::to_string(flat.size()) + " entries, expected " +
                          std::to_string(p.n_params()));
  }
  const double* src = flat.data();
  auto take = [&src](auto& m) {
    std::copy(src, src + m.size(), m.data());
    src += m.size();
  };
  take(p.w_in);
  take(p.w_rec);
  take(p.b_h);
  take(p.w_out);
  p.b_out = *src;
  return p;
}

void RnnParams::validate() const {
  const auto h = w_rec.rows();
  if (h < 1 || w_rec.cols() != h || w_in.rows() != h || w_in.cols() < 1 || b_h.size() != h || w_out.size() != h) {
    throw InvalidArgument("inconsistent rnn parameter shapes");
  }
  if (!w_in.allFinite() || !w_rec.allFinite() || !b_h.allFinite() || !w_out.allFinite() || !std::isfinite(b_out)) {
    throw InvalidArgument("non-finite rnn parameter");
  }
}

RnnParams init_params(int hidden, int features, std::mt19937_64& rng) {
  RnnParams p = RnnParams::zeros(hidden, features);
  auto fill = [&rng](Eigen::Ref<Eigen::MatrixXd> m, double bound) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        m(i, j) = (2.0 * u - 1.0) * bound;
      }
    }
  };
  fill(p.w_in, 1.0 / std::sqrt(static_cast<double>(features)));
  fill(p.w_rec, 1.0 / std::sqrt(static_cast<double>(hidden)));
  Eigen::MatrixXd out(1, hidden);
  fill(out, 1.0 / std::sqrt(static_cast<double>(hidden)));
  p.w_out = out.row(0);
  return p;
}

Batch make_batch(std::span<const Window> windows, std::span<const double> targets) {
  if (windows.empty() || windows.size() != targets.size()) throw InvalidArgument("make_batch: size mismatch");
  const auto steps = windows.front().rows();
  const auto features = windows.front().cols();
  const auto n = static_cast<Eigen::Index>(windows.size());
  Batch b;
  b.steps.assign(static_cast<std::size_t>(steps), Eigen::MatrixXd(features, n));
  b.targets.resize(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto& w = windows[static_cast<std::size_t>(s)];
    if (w.rows() != steps || w.cols() != features) throw InvalidArgument("make_batch: window shapes differ");
    for (Eigen::Index t = 0; t < steps; ++t) b.steps[static_cast<std::size_t>(t)].col(s) = w.row(t).transpose();
    b.targets(s) = targets[static_cast<std::size_t>(s)];
  }
  return b;
}

namespace {

void check_batch(const RnnParams& params, const Batch& batch) {
  if (batch.steps.empty()) throw InvalidArgument("rnn window must have at least one step");
  for (const auto& x : batch.steps) {
    if (x.rows() != params.w_in.cols() || x.cols() != batch.size()) {
      throw InvalidArgument("rnn input has " + std::to_string(x.rows()) + " features, network expects " +
                            std::to_string(params.w_in.cols()));
    }
  }
}

/// Hidden states h_1..h_W, each hidden x batch.
std::vector<Eigen::MatrixXd> unroll(const RnnParams& p, const Batch& batch) {
  std::vector<Eigen::MatrixXd> hs;
  hs.reserve(batch.steps.size());
  Eigen::MatrixXd a(p.hidden(), batch.size());
  for (std::size_t t = 0; t < batch.steps.size(); ++t) {
    a.noalias() = p.w_in * batch.steps[t];
    if (t > 0) a.noalias() += p.w_rec * hs.back();
    a.colwise() += p.b_h;
    hs.emplace_back(a.array().tanh());
  }
  return hs;
}

}  // namespace

Eigen::VectorXd batch_forward(const RnnParams& params, const Batch& batch) {
  check_batch(params, batch);
  const auto hs = unroll(params, batch);
  return (params.w_out * hs.back()).transpose().array() + params.b_out;
}

double batch_mse_gradient(const RnnParams& params, const Batch& batch, RnnParams& grad) {
  check_batch(params, batch);
  const auto hs = unroll(params, batch);
  const Eigen::VectorXd pred = (params.w_out * hs.back()).transpose().array() + params.b_out;
  const Eigen::VectorXd err = pred - batch.targets;
  const double n = static_cast<double>(batch.size());
  const double loss = err.squaredNorm() / n;

  if (grad.w_rec.rows() != params.hidden() || grad.w_in.cols() != params.features()) {
    grad = RnnParams::zeros(params.hidden(), params.features());
  }
  const Eigen::RowVectorXd dpred = (2.0 / n) * err.transpose();
  grad.w_out.noalias() = dpred * hs.back().transpose();
  grad.b_out = dpred.sum();
  grad.w_in.setZero();
  grad.w_rec.setZero();
  grad.b_h.setZero();

  Eigen::MatrixXd dh = params.w_out.transpose() * dpred;
  Eigen::MatrixXd da(params.hidden(), batch.size());
  for (std::size_t t = batch.steps.size(); t-- > 0;) {
    da = dh.array() * (1.0 - hs[t].array().square());
    grad.w_in.noalias() += da * batch.steps[t].transpose();
    grad.b_h += da.rowwise().sum();
    if (t > 0) {
      grad.w_rec.noalias() += da * hs[t - 1].transpose();
      dh.noalias() = params.w_rec.transpose() * da;
    }
  }
  return loss;
}

double rnn_forward(const RnnParams& params, const Window& window) {
  const Window w[] = {window};
  const double zero[] = {0.0};
  return batch_forward(params, make_batch(w, zero))(0);
}

RnnParams rnn_gradient(const RnnParams& params, const Window& window, double target, double* prediction) {
  const Window w[] = {window};
  const double y[] = {target};
  const Batch b = make_batch(w, y);
  RnnParams grad = RnnParams::zeros(params.hidden(), params.features());
  batch_mse_gradient(params, b, grad);
  if (prediction) *prediction = batch_forward(params, b)(0);
  return grad;
}

WindowSet make_windows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int window) {
  if (window < 1) throw InvalidArgument("window length must be >= 1");
  if (x.rows() != y.size()) throw InvalidArgument("make_windows: x/y row mismatch");
  WindowSet out;
  for (Eigen::Index r = window; r < x.rows(); ++r) {
    out.windows.emplace_back(x.middleRows(r - window, window));
    out.targets.push_back(y(r));
    out.target_rows.push_back(static_cast<std::size_t>(r));
  }
  return out;
}

json to_json(const RnnParams& params) {
  auto rows = [](const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> r(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
      out.push_back(r);
    }
    return out;
  };
  return {{"hidden", params.hidden()},
          {"features", params.features()},
          {"w_in", rows(params.w_in)},
          {"w_rec", rows(params.w_rec)},
          {"b_h", std::vector<double>(params.b_h.data(), params.b_h.data() + params.b_h.size())},
          {"w_out", std::vector<double>(params.w_out.data(), params.w_out.data() + params.w_out.size())},
          {"b_out", params.b_out}};
}

RnnParams params_from_json(const json& j) {
  const int hidden = j.at("hidden").get<int>();
  const int features = j.at("features").get<int>();
  RnnParams p = RnnParams::zeros(hidden, features);
  auto read_rows = [](const json& src, Eigen::MatrixXd& m) {
    if (src.size() != static_cast<std::size_t>(m.rows())) throw InvalidArgument("rnn json: row count mismatch");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto r = src[static_cast<std::size_t>(i)].get<std::vector<double>>();
      if (r.size() != static_cast<std::size_t>(m.cols())) throw InvalidArgument("rnn json: column count mismatch");
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = r[static_cast<std::size_t>(c)];
    }
  };
  read_rows(j.at("w_in"), p.w_in);
  read_rows(j.at("w_rec"), p.w_rec);
  const auto bh = j.at("b_h").get<std::vector<double>>();
  const auto wo = j.at("w_out").get<std::vector<double>>();
  if (bh.size() != static_cast<std::size_t>(hidden) || wo.size() != static_cast<std::size_t>(hidden)) {
    throw InvalidArgument("rnn json: bias/head size mismatch");
  }
  p.b_h = Eigen::Map<const Eigen::VectorXd>(bh.data(), hidden);
  p.w_out = Eigen::Map<const Eigen::RowVectorXd>(wo.data(), hidden);
  p.b_out = j.at("b_out").get<double>();
  p.validate();
  return p;
}

}  // namespace qweather::rnn
