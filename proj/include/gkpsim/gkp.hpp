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

#include "gkpsim/electron.hpp"
#include "gkpsim/fock.hpp"

#include <string>

namespace gkpsim {

struct GkpCode {
  cplx a_x, a_y, a_z;
  double delta = 0.25;
  FockSpace fock;

  cplx lattice(Axis i) const {
    switch (i) {
      case Axis::X: return a_x;
      case Axis::Y: return a_y;
      case Axis::Z: return a_z;
    }
    return a_z;
  }
  int cutoff() const { return fock.cutoff; }
};

// Square lattice in the q = (a + a^dag)/sqrt(2) convention: D(a_x/2) shifts
// q by sqrt(pi), D(a_z/2) kicks p by sqrt(pi).
inline GkpCode square_code(double delta, const FockSpace &fock) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::input, "envelope delta must lie in (0, 1)");
  const double s = std::sqrt(2.0 * kPi);
  GkpCode c;
  c.a_x = cplx(s, 0.0);
  c.a_z = cplx(0.0, s);
  c.a_y = c.a_x + c.a_z;
  c.delta = delta;
  c.fock = fock;
  return c;
}

enum class Logical { zero, one, plus, minus };

inline const char *to_string(Logical l) {
  switch (l) {
    case Logical::zero: return "0";
    case Logical::one: return "1";
    case Logical::plus: return "+";
    case Logical::minus: return "-";
  }
  return "?";
}

namespace detail {

// exp(-delta^2 n) applied to the ideal comb sum_k |q = (2k + mu) sqrt(pi)>.
inline Vec gkp_comb(const GkpCode &code, int mu) {
  const int N = code.cutoff();
  const double sp = std::sqrt(kPi);
  const double reach = std::sqrt(2.0 * N + 1.0) + 10.0;
  std::vector<double> qs;
  for (int k = -static_cast<int>(reach / sp) - 2; k <= static_cast<int>(reach / sp) + 2; ++k) {
    int j = 2 * k + mu;
    if (std::abs(j * sp) <= reach) qs.push_back(j * sp);
  }
  Eigen::MatrixXd H = hermite_functions(N, qs);
  Vec c(N);
  for (int n = 0; n < N; ++n) c(n) = std::exp(-code.delta * code.delta * n) * H.row(n).sum();
  return c.normalized();
}

}  // namespace detail

inline StateVector gkp_state(const GkpCode &code, Logical logical) {
  const double d2 = code.delta * code.delta;
  if (code.cutoff() < 2.0 / d2)
    throw Error(ErrorKind::truncation, "cutoff " + std::to_string(code.cutoff()) + " too small for delta " +
                                           std::to_string(code.delta) + "; need at least 2/delta^2");
  if (code.cutoff() < 4.0 / d2) warn("cutoff below 4/delta^2; code states are visibly truncated");
  Vec z = detail::gkp_comb(code, 0), o = detail::gkp_comb(code, 1);
  Vec v;
  switch (logical) {
    case Logical::zero: v = z; break;
    case Logical::one: v = o; break;
    case Logical::plus: v = (z + o).normalized(); break;
    case Logical::minus: v = (z - o).normalized(); break;
  }
  return StateVector(code.fock.dims(), v);
}

// alpha|0_L> + beta|1_L>, renormalized.
inline StateVector gkp_superposition(const GkpCode &code, cplx alpha, cplx beta) {
  Vec v = alpha * gkp_state(code, Logical::zero).amps + beta * gkp_state(code, Logical::one).amps;
  return StateVector(code.fock.dims(), v.normalized());
}

enum class LogicalOp { X, Y, Z, SX, SY, SZ };

inline Operator logical_displacement(const GkpCode &code, LogicalOp which) {
  switch (which) {
    case LogicalOp::X: return displacement(code.fock, code.a_x / 2.0);
    case LogicalOp::Y: return displacement(code.fock, code.a_y / 2.0);
    case LogicalOp::Z: return displacement(code.fock, code.a_z / 2.0);
    case LogicalOp::SX: return displacement(code.fock, code.a_x);
    case LogicalOp::SY: return displacement(code.fock, code.a_y);
    case LogicalOp::SZ: return displacement(code.fock, code.a_z);
  }
  throw Error(ErrorKind::input, "unknown logical operator");
}

// D(b) = exp(i sqrt(2)|b| x_theta) with theta = atan2(-Re b, Im b). The
// Pauli D(a_i/2) is read out along x_theta with peaks spaced sqrt(2) pi/|a_i|.
struct BinGeometry {
  double theta;
  double spacing;
};

inline BinGeometry bin_geometry(const GkpCode &code, Axis i) {
  cplx a = code.lattice(i);
  return {std::atan2(-a.real(), a.imag()), std::sqrt(2.0) * kPi / std::abs(a)};
}

namespace detail {

// sum_k w_k int_{bin k} psi_m(x) psi_n(x) dx over bins of width `spacing`
// centered on k*spacing, with 64-point Gauss-Legendre per bin. Quadrature
// per bin matters: the weight is discontinuous at bin edges.
template <class Weight>
Eigen::MatrixXd binned_q_matrix(int N, double spacing, Weight w) {
  static const auto gl = [] {
    const int n = 64;
    std::vector<double> x(n), wt(n);
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), pp = 0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) < 1e-15) break;
      }
      x[i] = z;
      wt[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return std::make_pair(x, wt);
  }();
  const double reach = std::sqrt(2.0 * N + 1.0) + 8.0;
  const int K = static_cast<int>(std::ceil(reach / spacing)) + 1;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(N, N);
  for (int k = -K; k <= K; ++k) {
    double wk = w(k);
    if (wk == 0.0) continue;
    double lo = (k - 0.5) * spacing, hi = (k + 0.5) * spacing;
    std::vector<double> xs(gl.first.size());
    Eigen::VectorXd ws(gl.first.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = 0.5 * (hi - lo) * gl.first[i] + 0.5 * (hi + lo);
      ws(i) = 0.5 * (hi - lo) * gl.second[i];
    }
    Eigen::MatrixXd H = hermite_functions(N, xs);
    Z += wk * (H * ws.asDiagonal() * H.transpose());
  }
  return Z;
}

inline Mat rotate_quadrature_matrix(const Eigen::MatrixXd &Z, double theta) {
  const Eigen::Index N = Z.rows();
  Mat O(N, N);
  for (Eigen::Index m = 0; m < N; ++m)
    for (Eigen::Index n = 0; n < N; ++n) O(m, n) = std::polar(Z(m, n), (m - n) * theta);
  return O;
}

}  // namespace detail

// Binned ("sign") logical Pauli: +1 on even bins, -1 on odd bins along the
// readout quadrature. Agrees with D(a_i/2) in the ideal limit but stays a
// proper +-1 observable at finite delta.
inline Mat binned_pauli(const GkpCode &code, Axis i) {
  auto g = bin_geometry(code, i);
  auto Z = detail::binned_q_matrix(code.cutoff(), g.spacing, [](int k) { return (k % 2 == 0) ? 1.0 : -1.0; });
  return detail::rotate_quadrature_matrix(Z, g.theta);
}

// Projector onto the even (bit 0) bins of the readout quadrature.
inline Mat binned_even_projector(const GkpCode &code, Axis i) {
  auto g = bin_geometry(code, i);
  auto Z = detail::binned_q_matrix(code.cutoff(), g.spacing, [](int k) { return (k % 2 == 0) ? 1.0 : 0.0; });
  return detail::rotate_quadrature_matrix(Z, g.theta);
}

struct DecodeResult {
  int bit = 0;
  double confidence = 0.0;
  bool ambiguous = false;
};

inline constexpr double kAmbiguityMargin = 1e-3;

inline DecodeResult decode_from_mass(double p0, double total) {
  double p1 = total - p0;
  DecodeResult r;
  // Ties go to the lower bit.
  r.bit = (p1 > p0) ? 1 : 0;
  r.confidence = std::max(p0, p1) / total;
  r.ambiguous = r.confidence < 0.5 + kAmbiguityMargin;
  return r;
}

// Homodyne-style decode: integrate the readout quadrature over bins of width
// sqrt(pi) (Z reads q, X reads p); bins with even index vote for bit 0.
inline DecodeResult decode_logical(const StateVector &psi, const GkpCode &code, Axis basis) {
  if (basis == Axis::Y) throw Error(ErrorKind::input, "decode supports the X and Z bases");
  Mat P = binned_even_projector(code, basis);
  double p0 = psi.amps.dot(P * psi.amps).real();
  return decode_from_mass(p0, psi.amps.squaredNorm());
}

inline DecodeResult decode_logical(const Operator &rho, const GkpCode &code, Axis basis) {
  if (basis == Axis::Y) throw Error(ErrorKind::input, "decode supports the X and Z bases");
  Mat P = binned_even_projector(code, basis);
  double p0 = (P * rho.data).trace().real();
  return decode_from_mass(p0, rho.data.trace().real());
}

inline StateVector undo_frame(const StateVector &psi, const FockSpace &fock, cplx delta) {
  StateVector out = psi;
  if (delta != cplx(0.0, 0.0)) out.amps = displacement(fock, -delta).data * psi.amps;
  return out;
}

// Fidelity of D(-delta) psi against the target code state.
inline double logical_fidelity(const StateVector &psi, const GkpCode &code, Logical target, cplx frame = 0.0) {
  return fidelity(undo_frame(psi, code.fock, frame), gkp_state(code, target));
}

inline double logical_fidelity(const StateVector &psi, const StateVector &target, const FockSpace &fock, cplx frame = 0.0) {
  return fidelity(undo_frame(psi, fock, frame), target);
}

inline double logical_fidelity(const Operator &rho, const GkpCode &code, Logical target, cplx frame = 0.0) {
  Mat U = displacement(code.fock, -frame).data;
  return fidelity(Operator(rho.dims, U * rho.data * U.adjoint()), gkp_state(code, target));
}

// ---- multi-mode verification helpers ----

// Remove the tracked offsets: apply D(-delta_m) to each photonic mode m.
inline StateVector undo_frames(const StateVector &psi, const std::vector<cplx> &frames) {
  if (frames.size() != psi.dims.size()) throw Error(ErrorKind::input, "one frame offset per photonic mode expected");
  StateVector out = psi;
  for (std::size_t m = 0; m < frames.size(); ++m)
    if (frames[m] != cplx(0.0, 0.0)) apply_local(detail::displacement_kernel(psi.dims[m], -frames[m]), out, static_cast<int>(m));
  return out;
}

// Expectation of a logical Pauli string such as "XZI" built from binned
// Paulis, one letter per photonic mode.
inline double pauli_string_expectation(const StateVector &psi, const GkpCode &code, const std::string &paulis) {
  if (paulis.size() != psi.dims.size()) throw Error(ErrorKind::input, "Pauli string length must equal the mode count");
  StateVector t = psi;
  for (std::size_t m = 0; m < paulis.size(); ++m) {
    char c = paulis[m];
    if (c == 'I') continue;
    Axis ax = c == 'X' ? Axis::X : c == 'Y' ? Axis::Y : c == 'Z' ? Axis::Z : throw Error(ErrorKind::input, "bad Pauli letter");
    GkpCode mc = code;
    mc.fock = FockSpace(psi.dims[m], psi.dims[m] / 5);
    apply_local(binned_pauli(mc, ax), t, static_cast<int>(m));
  }
  return psi.amps.dot(t.amps).real() / psi.amps.squaredNorm();
}

// Logical two-qubit density matrix from the 16 binned Pauli expectations,
// clipped to the positive cone and renormalized.
inline Mat logical_tomography_2q(const StateVector &psi, const GkpCode &code) {
  const char L[4] = {'I', 'X', 'Y', 'Z'};
  const Axis A[4] = {Axis::X, Axis::X, Axis::Y, Axis::Z};
  Mat rho = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      std::string s{L[i], L[j]};
      double e = (i == 0 && j == 0) ? 1.0 : pauli_string_expectation(psi, code, s);
      Mat P1 = i == 0 ? Mat(Mat::Identity(2, 2)) : pauli(A[i]);
      Mat P2 = j == 0 ? Mat(Mat::Identity(2, 2)) : pauli(A[j]);
      rho += 0.25 * e * kron(Operator({2}, P1), Operator({2}, P2)).data;
    }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  ev /= ev.sum();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace gkpsim
