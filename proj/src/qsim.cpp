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

#include "qweather/qsim.hpp"

#include <cmath>
#include <utility>

#include "qweather/error.hpp"
#include "qweather/util.hpp"

namespace qweather::qsim {

int GateOp::n_angles() const noexcept {
  switch (kind) {
    case GateKind::RY:
    case GateKind::RZ:
      return 1;
    case GateKind::ROT:
      return 3;
    case GateKind::CNOT:
      return 0;
  }
  return 0;
}

std::string to_string(const GateOp& g) {
  switch (g.kind) {
    case GateKind::RY:
      return "RY(" + util::format_double(g.angles[0]) + ") q" + std::to_string(g.target);
    case GateKind::RZ:
      return "RZ(" + util::format_double(g.angles[0]) + ") q" + std::to_string(g.target);
    case GateKind::ROT:
      return "ROT(" + util::format_double(g.angles[0]) + "," + util::format_double(g.angles[1]) + "," +
             util::format_double(g.angles[2]) + ") q" + std::to_string(g.target);
    case GateKind::CNOT:
      return "CNOT q" + std::to_string(g.control) + "->q" + std::to_string(g.target);
  }
  return "?";
}

StateVector::StateVector(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw InvalidArgument("qubit count " + std::to_string(n_qubits) + " outside [1, " + std::to_string(kMaxQubits) +
                          "]");
  }
  amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

void StateVector::check_qubit(int q) const {
  if (q < 0 || q >= n_) {
    throw InvalidArgument("qubit index " + std::to_string(q) + " out of range for " + std::to_string(n_) + " qubits");
  }
}

void StateVector::apply_ry(int q, double theta) {
  check_qubit(q);
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  const std::size_t st = stride(q);
  for (std::size_t base = 0; base < amps_.size(); base += 2 * st) {
    for (std::size_t i = base; i < base + st; ++i) {
      const Complex a0 = amps_[i];
      const Complex a1 = amps_[i + st];
      amps_[i] = c * a0 - s * a1;
      amps_[i + st] = s * a0 + c * a1;
    }
  }
}

void StateVector::apply_rz(int q, double theta) {
  check_qubit(q);
  const Complex p0 = std::polar(1.0, -theta / 2);
  const Complex p1 = std::polar(1.0, theta / 2);
  const std::size_t st = stride(q);
  for (std::size_t base = 0; base < amps_.size(); base += 2 * st) {
    for (std::size_t i = base; i < base + st; ++i) {
      amps_[i] *= p0;
      amps_[i + st] *= p1;
    }
  }
}

void StateVector::apply_rot(int q, double a, double b, double c) {
  apply_rz(q, a);
  apply_ry(q, b);
  apply_rz(q, c);
}

void StateVector::apply_cnot(int control, int target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) throw InvalidArgument("CNOT control equals target (" + std::to_string(target) + ")");
  const std::size_t cs = stride(control);
  const std::size_t ts = stride(target);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if ((i & cs) && !(i & ts)) std::swap(amps_[i], amps_[i | ts]);
  }
}

void StateVector::apply_hadamard(int q) {
  check_qubit(q);
  const double r = 1.0 / std::sqrt(2.0);
  const std::size_t st = stride(q);
  for (std::size_t base = 0; base < amps_.size(); base += 2 * st) {
    for (std::size_t i = base; i < base + st; ++i) {
      const Complex a0 = amps_[i];
      const Complex a1 = amps_[i + st];
      amps_[i] = r * (a0 + a1);
      amps_[i + st] = r * (a0 - a1);
    }
  }
}

void StateVector::apply_pauli_y(int q) {
  check_qubit(q);
  const Complex i_unit{0.0, 1.0};
  const std::size_t st = stride(q);
  for (std::size_t base = 0; base < amps_.size(); base += 2 * st) {
    for (std::size_t i = base; i < base + st; ++i) {
      const Complex a0 = amps_[i];
      const Complex a1 = amps_[i + st];
      amps_[i] = -i_unit * a1;
      amps_[i + st] = i_unit * a0;
    }
  }
}

void StateVector::apply_pauli_z(int q) {
  check_qubit(q);
  const std::size_t st = stride(q);
  for (std::size_t base = 0; base < amps_.size(); base += 2 * st) {
    for (std::size_t i = base; i < base + st; ++i) amps_[i + st] = -amps_[i + st];
  }
}

void StateVector::apply(const GateOp& g) {
  switch (g.kind) {
    case GateKind::RY:
      apply_ry(g.target, g.angles[0]);
      return;
    case GateKind::RZ:
      apply_rz(g.target, g.angles[0]);
      return;
    case GateKind::ROT:
      apply_rot(g.target, g.angles[0], g.angles[1], g.angles[2]);
      return;
    case GateKind::CNOT:
      apply_cnot(g.control, g.target);
      return;
  }
}

void StateVector::apply_adjoint(const GateOp& g) {
  switch (g.kind) {
    case GateKind::RY:
      apply_ry(g.target, -g.angles[0]);
      return;
    case GateKind::RZ:
      apply_rz(g.target, -g.angles[0]);
      return;
    case GateKind::ROT:
      apply_rz(g.target, -g.angles[2]);
      apply_ry(g.target, -g.angles[1]);
      apply_rz(g.target, -g.angles[0]);
      return;
    case GateKind::CNOT:
      apply_cnot(g.control, g.target);
      return;
  }
}

double StateVector::expval_z(int q) const {
  check_qubit(q);
  const std::size_t st = stride(q);
  double e = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    const double p = std::norm(amps_[i]);
    e += (i & st) ? -p : p;
  }
  return e;
}

double StateVector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

Complex StateVector::inner(const StateVector& other) const {
  if (other.n_ != n_) throw InvalidArgument("inner product of states with different qubit counts");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
  return s;
}

std::string StateVector::dump_csv() const {
  std::string out = "index,re,im\n";
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    out += std::to_string(i) + "," + util::format_double(amps_[i].real()) + "," + util::format_double(amps_[i].imag()) +
           "\n";
  }
  return out;
}

void run(StateVector& s, std::span<const GateOp> gates) {
  for (const auto& g : gates) s.apply(g);
}

}  // namespace qweather::qsim
