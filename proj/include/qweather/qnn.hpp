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
 * @file qnn.hpp
 * @brief Variational quantum regressor: R_y angle encoding, stacked
 * entangling layers, a final rotation layer and an affine readout on <Z>.
 *
 * Circuit, for n qubits and depth d:
 *
 *   RY(x_i) on every qubit i
 *   d times:
 *     basic:  RY(angle_{l,i}) on every qubit, then CNOT i -> (i+1) mod n
 *     strong: ROT(angle_{l,i,0..2}) on every qubit, then CNOT i -> (i+r_l) mod n
 *             with r_l = (l mod (n-1)) + 1
 *   ROT(final_i) on every qubit
 *
 * No CNOTs are emitted for a single qubit.
 */
#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "qweather/qsim.hpp"

namespace qweather::qnn {

enum class Entangler { basic, strong };
enum class Readout { first_qubit, mean_all };

const char* to_string(Entangler e);
Entangler entangler_from_string(const std::string& s);

struct AnsatzSpec {
  int n_qubits{1};
  int depth{1};
  Entangler entangler{Entangler::basic};
  Readout readout{Readout::first_qubit};
  /// Prepend a (non-trainable) Hadamard on every qubit before encoding.
  bool hadamard_prelayer{false};
  /// Encoding angle = feature_scale * standardized feature.
  double feature_scale{1.0};

  void validate() const;
  [[nodiscard]] std::size_t n_layer_angles() const noexcept;
  [[nodiscard]] std::size_t n_final_angles() const noexcept { return 3 * static_cast<std::size_t>(n_qubits); }
  [[nodiscard]] std::size_t n_circuit_angles() const noexcept { return n_layer_angles() + n_final_angles(); }
  /// Circuit angles plus the readout pair (w, b).
  [[nodiscard]] std::size_t n_trainable() const noexcept { return n_circuit_angles() + 2; }
};

struct QnnParams {
  std::vector<double> layer_angles;
  std::vector<double> final_rot;
  double w{1.0};
  double b{0.0};

  /// Order: layer angles, final rotations, w, b.
  [[nodiscard]] std::vector<double> flatten() const;
  static QnnParams unflatten(const AnsatzSpec& spec, std::span<const double> flat);
  /// Throws InvalidArgument on count mismatch or non-finite values.
  void validate(const AnsatzSpec& spec) const;
};

/// Angles i.i.d. uniform [0, 2pi), w = 1, b = 0.
QnnParams init_params(const AnsatzSpec& spec, std::mt19937_64& rng);

/// Gate list plus, for each gate, the flat circuit-angle index feeding each of
/// its angle slots (-1 when the slot is fixed, e.g. an encoding angle).
struct TaggedCircuit {
  std::vector<qsim::GateOp> gates;
  std::vector<std::array<int, 3>> slots;
};

TaggedCircuit build_tagged_circuit(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features);
std::vector<qsim::GateOp> build_circuit(const AnsatzSpec& spec, const QnnParams& params,
                                        std::span<const double> features);

/// Readout observable before the affine head.
double expectation(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features);
/// w * expectation + b.
double forward(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features);

/// d forward / d parameter in flatten() order, circuit angles via the
/// parameter-shift rule (f(t + pi/2) - f(t - pi/2)) / 2.
std::vector<double> gradient(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features);

/// Same partials via one forward and one reverse sweep (adjoint
/// differentiation). Optionally returns the forward value.
std::vector<double> gradient_adjoint(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features,
                                     double* prediction = nullptr);

nlohmann::json to_json(const AnsatzSpec& spec);
/// Nested arrays: layers x qubits (x 3 for strong), qubits x 3, readout {w, b}.
nlohmann::json to_json(const AnsatzSpec& spec, const QnnParams& params);
QnnParams params_from_json(const AnsatzSpec& spec, const nlohmann::json& j);

}  // namespace qweather::qnn
