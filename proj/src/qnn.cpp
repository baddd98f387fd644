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

#include "qweather/qnn.hpp"

#include <cmath>
#include <numbers>

#include "qweather/error.hpp"

namespace qweather::qnn {

using qsim::GateKind;
using qsim::GateOp;
using qsim::StateVector;
using nlohmann::json;

const char* to_string(Entangler e) { return e == Entangler::basic ? "basic" : "strong"; }

Entangler entangler_from_string(const std::string& s) {
  if (s == "basic") return Entangler::basic;
  if (s == "strong") return Entangler::strong;
  throw InvalidArgument("unknown entangler '" + s + "' (expected basic|strong)");
}

void AnsatzSpec::validate() const {
  if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) throw InvalidArgument("ansatz qubit count out of range");
  // depth 0 (encoding + final rotations only) is accepted for diagnostics.
  if (depth < 0) throw InvalidArgument("ansatz depth must be >= 0");
  if (!std::isfinite(feature_scale)) throw InvalidArgument("feature_scale must be finite");
}

std::size_t AnsatzSpec::n_layer_angles() const noexcept {
  const auto per_qubit = entangler == Entangler::basic ? std::size_t{1} : std::size_t{3};
  return static_cast<std::size_t>(depth) * static_cast<std::size_t>(n_qubits) * per_qubit;
}

std::vector<double> QnnParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(layer_angles.size() + final_rot.size() + 2);
  flat.insert(flat.end(), layer_angles.begin(), layer_angles.end());
  flat.insert(flat.end(), final_rot.begin(), final_rot.end());
  flat.push_back(w);
  flat.push_back(b);
  return flat;
}

QnnParams QnnParams::unflatten(const AnsatzSpec& spec, std::span<const double> flat) {
  if (flat.size() != spec.n_trainable()) {
    throw InvalidArgument("flat parameter vector has " + std::to_string(flat.size()) + " entries, ansatz needs " +
                          std::to_string(spec.n_trainable()));
  }
  const std::size_t nl = spec.n_layer_angles();
  const std::size_t nf = spec.n_final_angles();
  QnnParams p;
  p.layer_angles.assign(flat.begin(), flat.begin() + static_cast<long>(nl));
  p.final_rot.assign(flat.begin() + static_cast<long>(nl), flat.begin() + static_cast<long>(nl + nf));
  p.w = flat[nl + nf];
  p.b = flat[nl + nf + 1];
  return p;
}

void QnnParams::validate(const AnsatzSpec& spec) const {
  if (layer_angles.size() != spec.n_layer_angles()) {
    throw InvalidArgument("expected " + std::to_string(spec.n_layer_angles()) + " layer angles, got " +
                          std::to_string(layer_angles.size()));
  }
  if (final_rot.size() != spec.n_final_angles()) {
    throw InvalidArgument("expected " + std::to_string(spec.n_final_angles()) + " final rotation angles, got " +
                          std::to_string(final_rot.size()));
  }
  for (double v : flatten()) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite QNN parameter");
  }
}

QnnParams init_params(const AnsatzSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  // Explicit mapping of the raw 64-bit draw keeps runs identical across standard libraries.
  auto uniform_angle = [&rng] {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 2.0 * std::numbers::pi * u;
  };
  QnnParams p;
  p.layer_angles.resize(spec.n_layer_angles());
  for (auto& a : p.layer_angles) a = uniform_angle();
  p.final_rot.resize(spec.n_final_angles());
  for (auto& a : p.final_rot) a = uniform_angle();
  return p;
}

TaggedCircuit build_tagged_circuit(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features) {
  spec.validate();
  params.validate(spec);
  const int n = spec.n_qubits;
  if (features.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("ansatz has " + std::to_string(n) + " qubits but got " + std::to_string(features.size()) +
                          " features");
  }
  TaggedCircuit c;
  auto push = [&c](GateOp g, std::array<int, 3> slots = {-1, -1, -1}) {
    c.gates.push_back(g);
    c.slots.push_back(slots);
  };

  if (spec.hadamard_prelayer) {
    // H = RY(pi/2) Z, and Z = i RZ(pi): identical up to a global phase.
    for (int q = 0; q < n; ++q) {
      push(GateOp::rz(q, std::numbers::pi));
      push(GateOp::ry(q, std::numbers::pi / 2));
    }
  }
  for (int q = 0; q < n; ++q) push(GateOp::ry(q, spec.feature_scale * features[static_cast<std::size_t>(q)]));

  for (int l = 0; l < spec.depth; ++l) {
    if (spec.entangler == Entangler::basic) {
      for (int q = 0; q < n; ++q) {
        const int idx = l * n + q;
        push(GateOp::ry(q, params.layer_angles[static_cast<std::size_t>(idx)]), {idx, -1, -1});
      }
      if (n > 1) {
        for (int q = 0; q < n; ++q) push(GateOp::cnot(q, (q + 1) % n));
      }
    } else {
      for (int q = 0; q < n; ++q) {
        const int idx = (l * n + q) * 3;
        const auto& a = params.layer_angles;
        push(GateOp::rot(q, a[static_cast<std::size_t>(idx)], a[static_cast<std::size_t>(idx + 1)],
                         a[static_cast<std::size_t>(idx + 2)]),
             {idx, idx + 1, idx + 2});
      }
      if (n > 1) {
        const int r = (l % (n - 1)) + 1;
        for (int q = 0; q < n; ++q) push(GateOp::cnot(q, (q + r) % n));
      }
    }
  }

  const int offset = static_cast<int>(spec.n_layer_angles());
  for (int q = 0; q < n; ++q) {
    const int idx = offset + 3 * q;
    const auto& f = params.final_rot;
    push(GateOp::rot(q, f[static_cast<std::size_t>(3 * q)], f[static_cast<std::size_t>(3 * q + 1)],
                     f[static_cast<std::size_t>(3 * q + 2)]),
         {idx, idx + 1, idx + 2});
  }
  return c;
}

std::vector<GateOp> build_circuit(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features) {
  return build_tagged_circuit(spec, params, features).gates;
}

namespace {

double observable(const AnsatzSpec& spec, const StateVector& s) {
  if (spec.readout == Readout::first_qubit) return s.expval_z(0);
  double e = 0.0;
  for (int q = 0; q < spec.n_qubits; ++q) e += s.expval_z(q);
  return e / spec.n_qubits;
}

double run_observable(const AnsatzSpec& spec, std::span<const GateOp> gates) {
  StateVector s(spec.n_qubits);
  qsim::run(s, gates);
  return observable(spec, s);
}

/// O|psi> for the readout observable.
StateVector apply_observable(const AnsatzSpec& spec, const StateVector& psi) {
  if (spec.readout == Readout::first_qubit) {
    StateVector out = psi;
    out.apply_pauli_z(0);
    return out;
  }
  StateVector out = psi;
  auto acc = out.amplitudes();
  for (auto& a : acc) a = 0.0;
  for (int q = 0; q < spec.n_qubits; ++q) {
    StateVector t = psi;
    t.apply_pauli_z(q);
    const auto ta = t.amplitudes();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += ta[i] / static_cast<double>(spec.n_qubits);
  }
  return out;
}

/// Primitive rotation in the RZ/RY/CNOT decomposition, with its parameter slot.
struct Primitive {
  GateOp gate;
  int slot;
};

std::vector<Primitive> decompose(const TaggedCircuit& c) {
  std::vector<Primitive> out;
  out.reserve(c.gates.size() * 3);
  for (std::size_t k = 0; k < c.gates.size(); ++k) {
    const auto& g = c.gates[k];
    const auto& s = c.slots[k];
    if (g.kind == GateKind::ROT) {
      out.push_back({GateOp::rz(g.target, g.angles[0]), s[0]});
      out.push_back({GateOp::ry(g.target, g.angles[1]), s[1]});
      out.push_back({GateOp::rz(g.target, g.angles[2]), s[2]});
    } else {
      out.push_back({g, s[0]});
    }
  }
  return out;
}

}  // namespace

double expectation(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features) {
  const auto gates = build_circuit(spec, params, features);
  return run_observable(spec, gates);
}

double forward(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features) {
  return params.w * expectation(spec, params, features) + params.b;
}

std::vector<double> gradient(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features) {
  auto circuit = build_tagged_circuit(spec, params, features);
  const std::size_t n_angles = spec.n_circuit_angles();
  std::vector<double> grad(spec.n_trainable(), 0.0);

  for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
    for (int s = 0; s < 3; ++s) {
      const int idx = circuit.slots[k][static_cast<std::size_t>(s)];
      if (idx < 0) continue;
      auto& angle = circuit.gates[k].angles[static_cast<std::size_t>(s)];
      const double saved = angle;
      angle = saved + std::numbers::pi / 2;
      const double plus = run_observable(spec, circuit.gates);
      angle = saved - std::numbers::pi / 2;
      const double minus = run_observable(spec, circuit.gates);
      angle = saved;
      grad[static_cast<std::size_t>(idx)] = params.w * (plus - minus) / 2.0;
    }
  }
  grad[n_angles] = run_observable(spec, circuit.gates);
  grad[n_angles + 1] = 1.0;
  return grad;
}

std::vector<double> gradient_adjoint(const AnsatzSpec& spec, const QnnParams& params, std::span<const double> features,
                                     double* prediction) {
  const auto prims = decompose(build_tagged_circuit(spec, params, features));
  StateVector phi(spec.n_qubits);
  for (const auto& p : prims) phi.apply(p.gate);
  const double value = observable(spec, phi);
  StateVector lambda = apply_observable(spec, phi);

  const std::size_t n_angles = spec.n_circuit_angles();
  std::vector<double> grad(spec.n_trainable(), 0.0);
  // For U = exp(-i t G / 2): d<O>/dt = Im <lambda| G |phi>, both taken just after the gate.
  for (auto it = prims.rbegin(); it != prims.rend(); ++it) {
    if (it->slot >= 0) {
      StateVector mu = phi;
      if (it->gate.kind == GateKind::RY) {
        mu.apply_pauli_y(it->gate.target);
      } else {
        mu.apply_pauli_z(it->gate.target);
      }
      grad[static_cast<std::size_t>(it->slot)] = params.w * lambda.inner(mu).imag();
    }
    phi.apply_adjoint(it->gate);
    lambda.apply_adjoint(it->gate);
  }
  grad[n_angles] = value;
  grad[n_angles + 1] = 1.0;
  if (prediction) *prediction = params.w * value + params.b;
  return grad;
}

json to_json(const AnsatzSpec& spec) {
  return {{"n_qubits", spec.n_qubits},
          {"depth", spec.depth},
          {"entangler", to_string(spec.entangler)},
          {"readout", spec.readout == Readout::first_qubit ? "first_qubit" : "mean_all"},
          {"hadamard_prelayer", spec.hadamard_prelayer},
          {"feature_scale", spec.feature_scale}};
}

json to_json(const AnsatzSpec& spec, const QnnParams& params) {
  params.validate(spec);
  const auto n = static_cast<std::size_t>(spec.n_qubits);
  const std::size_t per = spec.entangler == Entangler::basic ? 1 : 3;
  json layers = json::array();
  for (std::size_t l = 0; l < static_cast<std::size_t>(spec.depth); ++l) {
    json layer = json::array();
    for (std::size_t q = 0; q < n; ++q) {
      const auto base = params.layer_angles.begin() + static_cast<long>((l * n + q) * per);
      if (per == 1) {
        layer.push_back(*base);
      } else {
        layer.push_back(std::vector<double>(base, base + 3));
      }
    }
    layers.push_back(layer);
  }
  json final_rot = json::array();
  for (std::size_t q = 0; q < n; ++q) {
    const auto base = params.final_rot.begin() + static_cast<long>(3 * q);
    final_rot.push_back(std::vector<double>(base, base + 3));
  }
  return {{"layer_angles", layers}, {"final_rot", final_rot}, {"readout", {{"w", params.w}, {"b", params.b}}}};
}

QnnParams params_from_json(const AnsatzSpec& spec, const json& j) {
  QnnParams p;
  for (const auto& layer : j.at("layer_angles")) {
    for (const auto& q : layer) {
      if (q.is_array()) {
        for (const auto& a : q) p.layer_angles.push_back(a.get<double>());
      } else {
        p.layer_angles.push_back(q.get<double>());
      }
    }
  }
  for (const auto& q : j.at("final_rot")) {
    for (const auto& a : q) p.final_rot.push_back(a.get<double>());
  }
  p.w = j.at("readout").at("w").get<double>();
  p.b = j.at("readout").at("b").get<double>();
  p.validate(spec);
  return p;
}

}  // namespace qweather::qnn
