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

#include <numbers>

#include "../oracles.hpp"
#include "qweather/error.hpp"
#include "qweather/qnn.hpp"

using namespace qweather;
using namespace qweather::qnn;
using qsim::GateKind;

namespace {

AnsatzSpec spec_of(Entangler e, int depth, int n) {
  AnsatzSpec s;
  s.entangler = e;
  s.depth = depth;
  s.n_qubits = n;
  return s;
}

std::vector<double> random_features(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace

TEST_CASE("gate count, basic d=1 n=2") {
  const auto spec = spec_of(Entangler::basic, 1, 2);
  QnnParams p{std::vector<double>(2, 0.1), std::vector<double>(6, 0.2), 1.0, 0.0};
  const double x[] = {0.3, -0.4};
  const auto gates = build_circuit(spec, p, x);
  REQUIRE(gates.size() == 8);
  int ry = 0, cnot = 0, rot = 0;
  for (const auto& g : gates) {
    ry += g.kind == GateKind::RY;
    cnot += g.kind == GateKind::CNOT;
    rot += g.kind == GateKind::ROT;
  }
  CHECK(ry == 4);
  CHECK(cnot == 2);
  CHECK(rot == 2);
  CHECK(gates[0].angles[0] == 0.3);
  CHECK(gates[1].angles[0] == -0.4);
}

TEST_CASE("gate structure and counts for every configuration") {
  for (auto e : {Entangler::basic, Entangler::strong}) {
    for (int d : {1, 3, 5}) {
      for (int n : {2, 4, 6, 8}) {
        const auto spec = spec_of(e, d, n);
        const std::size_t per = e == Entangler::basic ? 1 : 3;
        CHECK(spec.n_trainable() == per * d * n + 3 * n + 2);
        std::mt19937_64 rng(1);
        const auto p = init_params(spec, rng);
        const auto x = random_features(rng, n);
        const auto gates = build_circuit(spec, p, x);
        CHECK(gates.size() == static_cast<std::size_t>(n + d * 2 * n + n));
        // Strong layer l uses range r_l = (l mod (n-1)) + 1.
        if (e == Entangler::strong) {
          for (int l = 0; l < d; ++l) {
            const int r = (l % (n - 1)) + 1;
            for (int i = 0; i < n; ++i) {
              const auto& g = gates[static_cast<std::size_t>(n + l * 2 * n + n + i)];
              CHECK(g.kind == GateKind::CNOT);
              CHECK(g.control == i);
              CHECK(g.target == (i + r) % n);
            }
          }
        }
      }
    }
  }
  CHECK(spec_of(Entangler::strong, 3, 8).n_circuit_angles() == 96);
}

TEST_CASE("forward special cases") {
  const auto spec = spec_of(Entangler::strong, 2, 3);
  QnnParams zero{std::vector<double>(spec.n_layer_angles(), 0.0), std::vector<double>(9, 0.0), 1.0, 0.0};
  const double x0[] = {0.0, 0.0, 0.0};
  CHECK(forward(spec, zero, x0) == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(5);
  auto p = init_params(spec, rng);
  p.w = 0.0;
  p.b = 0.37;
  const auto x = random_features(rng, 3);
  CHECK(forward(spec, p, x) == 0.37);

  // Depth 0 on one qubit: encoding followed by an identity ROT.
  const auto one = spec_of(Entangler::basic, 0, 1);
  QnnParams q{{}, {0.0, 0.0, 0.0}, 1.0, 0.0};
  for (double v : {-1.3, 0.2, 2.9}) {
    const double f[] = {v};
    CHECK(std::abs(forward(one, q, f) - std::cos(v)) <= 1e-12);
  }
}

TEST_CASE("forward matches dense oracle and lies inside the readout bound") {
  std::mt19937_64 rng(99);
  for (auto e : {Entangler::basic, Entangler::strong}) {
    const auto spec = spec_of(e, 3, 4);
    auto p = init_params(spec, rng);
    p.w = -1.7;
    p.b = 0.4;
    const auto x = random_features(rng, 4);
    const auto psi = oracle::run_dense(build_circuit(spec, p, x), 4);
    const double ref = p.w * oracle::expval_z_dense(psi, 0, 4) + p.b;
    const double y = forward(spec, p, x);
    CHECK(std::abs(y - ref) <= 1e-12);
    CHECK(y >= p.b - std::abs(p.w));
    CHECK(y <= p.b + std::abs(p.w));
    CHECK(forward(spec, p, x) == y);  // bit-identical
  }
}

TEST_CASE("single rotation gradient is -sin") {
  // One qubit, no layers: final ROT(0, theta, 0) after a zero encoding is RY(theta).
  const auto spec = spec_of(Entangler::basic, 0, 1);
  for (double t : {0.0, std::numbers::pi / 3, std::numbers::pi / 2}) {
    QnnParams p{{}, {0.0, t, 0.0}, 1.0, 0.0};
    const double x[] = {0.0};
    const auto g = gradient(spec, p, x);
    CHECK(std::abs(g[1] - (-std::sin(t))) <= 1e-12);
    CHECK(g.back() == 1.0);
  }
}

TEST_CASE("parameter shift and adjoint agree with finite differences") {
  std::mt19937_64 rng(3);
  for (auto e : {Entangler::basic, Entangler::strong}) {
    for (int d : {1, 3, 5}) {
      const auto spec = spec_of(e, d, 4);
      auto p = init_params(spec, rng);
      p.w = 1.3;
      p.b = -0.2;
      const auto x = random_features(rng, 4);
      const auto f = [&](const std::vector<double>& flat) {
        return forward(spec, QnnParams::unflatten(spec, flat), x);
      };
      const auto fd = oracle::central_diff(f, p.flatten());
      const auto ps = gradient(spec, p, x);
      double y = 0.0;
      const auto adj = gradient_adjoint(spec, p, x, &y);
      CHECK(oracle::max_abs_diff(ps, fd) <= 1e-6);
      CHECK(oracle::max_abs_diff(adj, ps) <= 1e-12);
      CHECK(y == doctest::Approx(forward(spec, p, x)).epsilon(1e-14));
      CHECK(ps.back() == 1.0);
      CHECK(ps[ps.size() - 2] == doctest::Approx(expectation(spec, p, x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("mean readout and hadamard pre-layer gradients") {
  std::mt19937_64 rng(8);
  auto spec = spec_of(Entangler::strong, 2, 3);
  spec.readout = Readout::mean_all;
  spec.hadamard_prelayer = true;
  spec.feature_scale = 0.5;
  const auto p = init_params(spec, rng);
  const auto x = random_features(rng, 3);
  const auto fd = oracle::central_diff(
      [&](const std::vector<double>& flat) { return forward(spec, QnnParams::unflatten(spec, flat), x); }, p.flatten());
  CHECK(oracle::max_abs_diff(gradient(spec, p, x), fd) <= 1e-6);
  CHECK(oracle::max_abs_diff(gradient_adjoint(spec, p, x), fd) <= 1e-6);
}

TEST_CASE("initialization") {
  const auto spec = spec_of(Entangler::strong, 5, 8);
  std::mt19937_64 a(42), b(42);
  const auto pa = init_params(spec, a);
  const auto pb = init_params(spec, b);
  CHECK(pa.flatten() == pb.flatten());
  CHECK(pa.w == 1.0);
  CHECK(pa.b == 0.0);
  for (double v : pa.layer_angles) {
    CHECK(v >= 0.0);
    CHECK(v < 2 * std::numbers::pi);
  }
}

TEST_CASE("dimension and value checks") {
  const auto spec = spec_of(Entangler::basic, 1, 3);
  std::mt19937_64 rng(1);
  auto p = init_params(spec, rng);
  const double two[] = {0.1, 0.2};
  CHECK_THROWS_AS(build_circuit(spec, p, two), InvalidArgument);
  p.final_rot.pop_back();
  CHECK_THROWS_AS(p.validate(spec), InvalidArgument);
  CHECK_THROWS_AS(entangler_from_string("weak"), InvalidArgument);
}

TEST_CASE("json round trip with nested arrays") {
  const auto spec = spec_of(Entangler::strong, 3, 4);
  std::mt19937_64 rng(17);
  auto p = init_params(spec, rng);
  p.w = 0.75;
  p.b = -0.125;
  const auto j = to_json(spec, p);
  CHECK(j.at("layer_angles").size() == 3);
  CHECK(j.at("layer_angles")[0].size() == 4);
  CHECK(j.at("layer_angles")[0][0].size() == 3);
  CHECK(j.at("final_rot").size() == 4);
  const auto back = params_from_json(spec, nlohmann::json::parse(j.dump()));
  CHECK(back.flatten() == p.flatten());
}
