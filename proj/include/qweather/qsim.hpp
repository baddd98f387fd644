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
 * @file qsim.hpp
 * @brief Exact double-precision statevector simulator.
 *
 * Conventions:
 *  - qubit 0 is the most significant bit of the basis index;
 *  - RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]];
 *  - RZ(t) = diag(exp(-i t/2), exp(+i t/2));
 *  - ROT(a, b, c) = RZ(c) RY(b) RZ(a), i.e. RZ(a) acts first.
 */
#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace qweather::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 24;

enum class GateKind { RY, RZ, ROT, CNOT };

struct GateOp {
  GateKind kind{GateKind::RY};
  int target{0};
  int control{-1};
  std::array<double, 3> angles{};

  static GateOp ry(int q, double theta) { return {GateKind::RY, q, -1, {theta, 0.0, 0.0}}; }
  static GateOp rz(int q, double theta) { return {GateKind::RZ, q, -1, {theta, 0.0, 0.0}}; }
  static GateOp rot(int q, double a, double b, double c) { return {GateKind::ROT, q, -1, {a, b, c}}; }
  static GateOp cnot(int control, int target) { return {GateKind::CNOT, target, control, {}}; }

  [[nodiscard]] int n_angles() const noexcept;
};

std::string to_string(const GateOp& g);

class StateVector {
 public:
  /// |0...0> on n qubits. Throws InvalidArgument unless 1 <= n <= kMaxQubits.
  explicit StateVector(int n_qubits);

  [[nodiscard]] int n_qubits() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return amps_.size(); }
  [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amps_; }
  [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amps_; }

  void apply(const GateOp& g);
  /// Applies the inverse of `g`.
  void apply_adjoint(const GateOp& g);

  void apply_ry(int q, double theta);
  void apply_rz(int q, double theta);
  void apply_rot(int q, double a, double b, double c);
  void apply_cnot(int control, int target);
  void apply_hadamard(int q);
  /// Pauli Y and Z, used to form generator-applied states for adjoint gradients.
  void apply_pauli_y(int q);
  void apply_pauli_z(int q);

  /// <Z_q> = sum_i (+1 if bit q of i is 0 else -1) |a_i|^2.
  [[nodiscard]] double expval_z(int q) const;
  [[nodiscard]] double norm_squared() const;
  /// <this|other>.
  [[nodiscard]] Complex inner(const StateVector& other) const;

  /// `index,re,im` rows with round-trip float formatting.
  [[nodiscard]] std::string dump_csv() const;

 private:
  void check_qubit(int q) const;
  [[nodiscard]] std::size_t stride(int q) const noexcept { return std::size_t{1} << (n_ - 1 - q); }

  int n_;
  std::vector<Complex> amps_;
};

inline StateVector zero_state(int n) { return StateVector(n); }

/// Value-semantics wrapper: returns the transformed state.
inline StateVector apply(StateVector s, const GateOp& g) {
  s.apply(g);
  return s;
}

inline double expval_z(const StateVector& s, int q) { return s.expval_z(q); }

/// Applies every gate in order.
void run(StateVector& s, std::span<const GateOp> gates);

}  // namespace qweather::qsim
