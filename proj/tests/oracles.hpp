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

// Independent reference implementations used only by tests. Nothing here
// calls into the library's numerics.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "qweather/qsim.hpp"

namespace oracle {

using Cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat ry(double t) {
  Mat m(2, 2);
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

inline Mat rz(double t) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -t / 2);
  m(1, 1) = std::polar(1.0, t / 2);
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

/// I x ... x u (on qubit q) x ... x I with qubit 0 leftmost (most significant).
inline Mat embed(const Mat& u, int q, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int k = 0; k < n; ++k) out = kron(out, k == q ? u : Mat::Identity(2, 2));
  return out;
}

/// CNOT as |0><0|_c x I + |1><1|_c x X_t.
inline Mat cnot(int c, int t, int n) {
  Mat p0 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  Mat p1 = Mat::Zero(2, 2);
  p1(1, 1) = 1;
  Mat x = Mat::Zero(2, 2);
  x(0, 1) = 1;
  x(1, 0) = 1;
  Mat a = Mat::Identity(1, 1);
  Mat b = Mat::Identity(1, 1);
  for (int k = 0; k < n; ++k) {
    a = kron(a, k == c ? p0 : Mat::Identity(2, 2));
    b = kron(b, k == c ? p1 : (k == t ? x : Mat::Identity(2, 2)));
  }
  return a + b;
}

inline Mat gate_matrix(const qweather::qsim::GateOp& g, int n) {
  using qweather::qsim::GateKind;
  switch (g.kind) {
    case GateKind::RY:
      return embed(ry(g.angles[0]), g.target, n);
    case GateKind::RZ:
      return embed(rz(g.angles[0]), g.target, n);
    case GateKind::ROT:
      return embed(rz(g.angles[2]) * ry(g.angles[1]) * rz(g.angles[0]), g.target, n);
    case GateKind::CNOT:
      return cnot(g.control, g.target, n);
  }
  return {};
}

inline Eigen::VectorXcd run_dense(const std::vector<qweather::qsim::GateOp>& gates, int n) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  psi(0) = 1;
  for (const auto& g : gates) psi = gate_matrix(g, n) * psi;
  return psi;
}

inline double expval_z_dense(const Eigen::VectorXcd& psi, int q, int n) {
  Mat z = Mat::Zero(2, 2);
  z(0, 0) = 1;
  z(1, 1) = -1;
  return (psi.adjoint() * embed(z, q, n) * psi)(0).real();
}

inline std::vector<qweather::qsim::GateOp> random_circuit(std::mt19937_64& rng, int n, int n_gates) {
  using qweather::qsim::GateOp;
  std::uniform_real_distribution<double> ang(-4.0, 4.0);
  std::uniform_int_distribution<int> kind(0, n > 1 ? 3 : 2);
  std::uniform_int_distribution<int> qubit(0, n - 1);
  std::vector<GateOp> out;
  for (int i = 0; i < n_gates; ++i) {
    const int q = qubit(rng);
    switch (kind(rng)) {
      case 0:
        out.push_back(GateOp::ry(q, ang(rng)));
        break;
      case 1:
        out.push_back(GateOp::rz(q, ang(rng)));
        break;
      case 2:
        out.push_back(GateOp::rot(q, ang(rng), ang(rng), ang(rng)));
        break;
      default: {
        int t = qubit(rng);
        while (t == q) t = qubit(rng);
        out.push_back(GateOp::cnot(q, t));
      }
    }
  }
  return out;
}

/// Central finite difference of f over every coordinate of x.
inline std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : INFINITY;
}

/// Brute-force Pearson: textbook two-pass sums.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Quantile by sorting and interpolating between order statistics, written
/// from the (n-1)p definition.
inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace oracle
