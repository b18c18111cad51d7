// Copyright 2026 The gkpsim Authors
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

#pragma once

#include "gkpsim/linalg.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>

namespace gkpsim {

// Energy comb on a ring of energy indices n in [-(M-1)/2, (M-1)/2].
// sigma == 0 is the single-tooth sentinel.
struct CombSpec {
  int ring_size = 65;
  double sigma = 8.0;
  double phi = 0.0;
  int spacing = 1;

  int center() const { return (ring_size - 1) / 2; }

  void validate() const {
    if (ring_size < 1 || ring_size % 2 == 0) throw Error(ErrorKind::input, "ring size must be odd");
    if (sigma < 0.0) throw Error(ErrorKind::input, "comb width must be non-negative");
    if (spacing != 1 && spacing != 2) throw Error(ErrorKind::input, "comb spacing must be 1 or 2");
    if (ring_size < 8.0 * sigma + 1.0) throw Error(ErrorKind::input, "ring size must be at least 8*sigma + 1");
  }
};

// Smallest odd ring that satisfies the tail bound for a given width.
inline int ring_size_for(double sigma) {
  int m = static_cast<int>(std::ceil(8.0 * sigma + 1.0));
  return (m % 2 == 0) ? m + 1 : m;
}

inline StateVector comb_state(const CombSpec &spec) {
  spec.validate();
  const int M = spec.ring_size, c = spec.center();
  Vec v = Vec::Zero(M);
  if (spec.sigma == 0.0) {
    v(c) = 1.0;
    return StateVector({M}, v);
  }
  for (int i = 0; i < M; ++i) {
    int n = i - c;
    if (n % spec.spacing != 0) continue;
    v(i) = std::exp(-0.5 * n * n / (spec.sigma * spec.sigma)) * std::polar(1.0, spec.phi * n);
  }
  StateVector s({M}, v);
  return s.normalize();
}

enum class Boundary { periodic, truncated };

// Energy ladder b: |n> -> |n+1>. Periodic wraps the top index to the bottom.
inline Operator ladder(int ring_size, Boundary boundary) {
  if (ring_size < 1) throw Error(ErrorKind::input, "ring size must be positive");
  Mat b = Mat::Zero(ring_size, ring_size);
  for (int i = 0; i + 1 < ring_size; ++i) b(i + 1, i) = 1.0;
  if (boundary == Boundary::periodic) b(0, ring_size - 1) = 1.0;
  return Operator({ring_size}, b);
}

// |0>_e is the 2w comb, |1>_e = b |0>_e on the periodic ring.
inline std::pair<StateVector, StateVector> qubit_states(const CombSpec &spec) {
  if (spec.spacing != 2) throw Error(ErrorKind::input, "qubit basis needs a comb with spacing 2");
  StateVector zero = comb_state(spec);
  StateVector one({spec.ring_size}, ladder(spec.ring_size, Boundary::periodic).data * zero.amps);
  return {zero, one};
}

enum class Axis { X, Y, Z };

inline Mat pauli(Axis a) {
  Mat m(2, 2);
  switch (a) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, -kI, kI, 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

// R_x = exp(-i t X/2) (PINEM), R_z = exp(-i t Z/2) (drift).
inline Operator electron_rotation(Axis axis, double theta) {
  Mat m = std::cos(theta / 2) * Mat::Identity(2, 2) - kI * std::sin(theta / 2) * pauli(axis);
  return Operator({2}, m);
}

inline Operator hadamard() {
  Mat h(2, 2);
  h << 1, 1, 1, -1;
  return Operator({2}, h / std::sqrt(2.0));
}

// Hadamard from drift and PINEM: R_z(pi/2) R_x(pi/2) R_z(pi/2) = e^{-i pi/2} H.
inline Operator hadamard_euler() {
  Mat m = electron_rotation(Axis::Z, kPi / 2).data * electron_rotation(Axis::X, kPi / 2).data *
          electron_rotation(Axis::Z, kPi / 2).data;
  return Operator({2}, m);
}

// Comb-level drift: a parity-dependent phase e^{-i theta (-1)^n / 2}, which is
// R_z(theta) on the even/odd qubit sectors.
inline Operator comb_drift(int ring_size, double theta) {
  const int c = (ring_size - 1) / 2;
  Mat d = Mat::Zero(ring_size, ring_size);
  for (int i = 0; i < ring_size; ++i) {
    int n = i - c;
    d(i, i) = std::polar(1.0, -0.5 * theta * ((n % 2 == 0) ? 1.0 : -1.0));
  }
  return Operator({ring_size}, d);
}

// Comb-level PINEM: exp(-i theta (b + b^dag) / 4); (b + b^dag)/2 acts as X on
// wide combs.
inline Operator comb_pinem(int ring_size, double theta) {
  Mat b = ladder(ring_size, Boundary::periodic).data;
  Mat gen = (-kI * theta / 4.0) * (b + b.adjoint());
  return Operator({ring_size}, matexp(gen));
}

// Worst-case fidelity of a comb-level gate against the qubit rotation over
// the inputs |0>, |1>, |+>, |+i>.
inline double comb_gate_fidelity(Axis axis, double theta, double sigma) {
  CombSpec spec{ring_size_for(sigma), sigma, 0.0, 2};
  auto [z, o] = qubit_states(spec);
  Operator comb = axis == Axis::X ? comb_pinem(spec.ring_size, theta) : comb_drift(spec.ring_size, theta);
  Mat q = electron_rotation(axis, theta).data;
  const cplx ins[4][2] = {{1, 0}, {0, 1}, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}, {1 / std::sqrt(2.0), kI / std::sqrt(2.0)}};
  double worst = 1.0;
  for (auto &in : ins) {
    Vec e = in[0] * z.amps + in[1] * o.amps;
    Vec out = comb.data * e;
    cplx t0 = q(0, 0) * in[0] + q(0, 1) * in[1], t1 = q(1, 0) * in[0] + q(1, 1) * in[1];
    Vec ideal = t0 * z.amps + t1 * o.amps;
    worst = std::min(worst, std::norm(ideal.normalized().dot(out.normalized())));
  }
  return worst;
}

// Electron measurement bases: the computational Z basis, or |phi+-> =
// (e^{i phi/2}|0> +- e^{-i phi/2}|1>)/sqrt(2). Outcome 0 is |0> or |phi+>.
struct MeasureBasis {
  enum class Kind { Z, Phase };
  Kind kind = Kind::Z;
  double phi = 0.0;

  static MeasureBasis z() { return {Kind::Z, 0.0}; }
  static MeasureBasis phase(double p) { return {Kind::Phase, p}; }

  std::array<cplx, 2> vector(int outcome) const {
    if (kind == Kind::Z) return outcome == 0 ? std::array<cplx, 2>{1.0, 0.0} : std::array<cplx, 2>{0.0, 1.0};
    const double s = outcome == 0 ? 1.0 : -1.0, r = 1.0 / std::sqrt(2.0);
    return {r * std::polar(1.0, phi / 2), s * r * std::polar(1.0, -phi / 2)};
  }
};

struct ElectronBranch {
  int outcome = 0;
  double probability = 0.0;
  std::optional<StateVector> collapsed;  // photonic remainder, normalized
};

inline constexpr double kDegenerateBranch = 1e-14;

// Both measurement branches. Probabilities are relative to the current norm
// so they sum to one even when truncation has leaked weight.
inline std::array<ElectronBranch, 2> electron_branches(const StateVector &joint, const MeasureBasis &basis) {
  if (joint.dims.empty() || joint.dims[0] != 2) throw Error(ErrorKind::input, "electron qubit must be subsystem 0");
  Dims rest(joint.dims.begin() + 1, joint.dims.end());
  const Eigen::Index half = joint.size() / 2;
  const double total = joint.amps.squaredNorm();
  if (!(total > 0.0)) throw Error(ErrorKind::numerical, "measuring a null state");
  std::array<ElectronBranch, 2> out;
  for (int o = 0; o < 2; ++o) {
    auto v = basis.vector(o);
    Vec ph = std::conj(v[0]) * joint.amps.head(half) + std::conj(v[1]) * joint.amps.tail(half);
    double p = ph.squaredNorm() / total;
    out[o].outcome = o;
    out[o].probability = p;
    if (p >= kDegenerateBranch) out[o].collapsed = StateVector(rest, ph / std::sqrt(ph.squaredNorm()));
  }
  return out;
}

inline ElectronBranch project_electron(const StateVector &joint, const MeasureBasis &basis, int outcome) {
  auto br = electron_branches(joint, basis);
  if (!br[outcome].collapsed)
    throw Error(ErrorKind::degenerate_branch, "requested electron branch has probability below 1e-14");
  return br[outcome];
}

// Uniform double in [0,1) from the top 53 bits; platform independent.
inline double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline ElectronBranch measure_electron(const StateVector &joint, const MeasureBasis &basis, std::mt19937_64 &rng) {
  auto br = electron_branches(joint, basis);
  double u = uniform01(rng);
  int o = (u < br[0].probability) ? 0 : 1;
  if (!br[o].collapsed) o = 1 - o;
  return br[o];
}

// Attach a fresh electron qubit (a|0> + b|1>) as subsystem 0.
inline StateVector with_electron(const StateVector &photonic, cplx a, cplx b) {
  Dims d{2};
  d.insert(d.end(), photonic.dims.begin(), photonic.dims.end());
  Vec v(2 * photonic.size());
  v.head(photonic.size()) = a * photonic.amps;
  v.tail(photonic.size()) = b * photonic.amps;
  return StateVector(d, v);
}

}  // namespace gkpsim
