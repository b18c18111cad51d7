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

#include <limits>

namespace gkpsim {

enum class Representation { qubit, comb };

inline constexpr double kMaxCoupling = 6.0;

struct CouplingSpec {
  cplx g{0.0, 0.0};
  int target_mode = 1;
  Representation representation = Representation::qubit;

  void validate(double max_abs = kMaxCoupling) const {
    if (std::abs(g) > max_abs) throw Error(ErrorKind::input, "coupling magnitude exceeds configured maximum");
    if (target_mode < 1) throw Error(ErrorKind::input, "photonic modes are numbered from 1");
  }
};

namespace detail {

// Ring Fourier basis: column k is e^{2 pi i k n / M}/sqrt(M), an eigenvector
// of the periodic ladder with eigenvalue e^{-2 pi i k / M}.
inline Mat ring_fourier(int M) {
  Mat F(M, M);
  for (int n = 0; n < M; ++n)
    for (int k = 0; k < M; ++k) F(n, k) = std::polar(1.0 / std::sqrt(double(M)), 2.0 * kPi * k * n / M);
  return F;
}

inline cplx ring_eigenvalue(int M, int k) { return std::polar(1.0, -2.0 * kPi * k / M); }

}  // namespace detail

// S(g) = exp(g b a^dag - g^* b^dag a) on ring (x) Fock, by dense matrix
// exponential on a Fock space padded by `pad` levels, then cropped.
inline Operator scattering_matexp(cplx g, int ring_size, const FockSpace &fock, Boundary boundary, int pad = -1) {
  const int N = fock.cutoff, big = N + (pad < 0 ? N : pad);
  Operator b = ladder(ring_size, boundary);
  Operator a = annihilation(FockSpace(big, 0));
  Mat gen = kron(Operator({ring_size}, g * b.data), Operator({big}, a.data.adjoint())).data -
            kron(Operator({ring_size}, std::conj(g) * b.data.adjoint()), a).data;
  Mat full = matexp(gen);
  Mat S(ring_size * N, ring_size * N);
  for (int i = 0; i < ring_size; ++i)
    for (int j = 0; j < ring_size; ++j) S.block(i * N, j * N, N, N) = full.block(i * big, j * big, N, N);
  return Operator({ring_size, N}, S);
}

inline Operator scattering_exact(cplx g, int ring_size, const FockSpace &fock, Boundary boundary = Boundary::periodic) {
  if (boundary == Boundary::truncated) {
    warn("truncated ring has no Fourier fast path; using the matrix exponential");
    return scattering_matexp(g, ring_size, fock, boundary);
  }
  const int M = ring_size, N = fock.cutoff;
  check_budget(static_cast<std::size_t>(M * N) * static_cast<std::size_t>(M * N));
  Mat F = detail::ring_fourier(M);
  Mat S = Mat::Zero(M * N, M * N);
  for (int k = 0; k < M; ++k) {
    Mat Dk = detail::displacement_kernel(N, g * detail::ring_eigenvalue(M, k));
    Mat P = F.col(k) * F.col(k).adjoint();
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        if (P(i, j) != 0.0) S.block(i * N, j * N, N, N) += P(i, j) * Dk;
  }
  return Operator({M, N}, S);
}

// CD(g) = |+><+| (x) D(g) + |-><-| (x) D(-g), electron first.
inline Operator conditional_displacement(cplx g, const FockSpace &fock) {
  Mat plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  Operator Dp = displacement(fock, g), Dm = displacement(fock, -g);
  Mat cd = kron(Operator({2}, plus), Dp).data + kron(Operator({2}, minus), Dm).data;
  return Operator({2, fock.cutoff}, cd);
}

// Same operator from I (x) (D(g)+D(-g))/2 + X (x) (D(g)-D(-g))/2.
inline Operator conditional_displacement_sum_form(cplx g, const FockSpace &fock) {
  Mat Dp = displacement(fock, g).data, Dm = displacement(fock, -g).data;
  Mat cd = kron(Operator::identity({2}), Operator(fock.dims(), 0.5 * (Dp + Dm))).data +
           kron(Operator({2}, pauli(Axis::X)), Operator(fock.dims(), 0.5 * (Dp - Dm))).data;
  return Operator({2, fock.cutoff}, cd);
}

// exp(X (x) (g a^dag - g^* a)): the scattering generator with b -> X,
// exponentiated on a padded Fock space and cropped.
inline Operator conditional_displacement_matexp(cplx g, const FockSpace &fock, int pad = -1) {
  const int N = fock.cutoff, big = N + (pad < 0 ? N : pad);
  Mat a = annihilation(FockSpace(big, 0)).data;
  Mat full = matexp(kron(Operator({2}, pauli(Axis::X)), Operator({big}, g * a.adjoint() - std::conj(g) * a)).data);
  Mat cd(2 * N, 2 * N);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) cd.block(i * N, j * N, N, N) = full.block(i * big, j * big, N, N);
  return Operator({2, N}, cd);
}

// Apply CD(g) (qubit) or S(g) (comb) to one mode of a register whose
// subsystem 0 is the electron. Works branch-wise on the electron
// eigenbasis; no register-wide operator is built.
inline void apply_interaction(StateVector &state, const CouplingSpec &spec) {
  spec.validate();
  if (spec.target_mode >= static_cast<int>(state.dims.size()))
    throw Error(ErrorKind::input, "interaction target mode out of range");
  const int N = state.dims[spec.target_mode];
  const Eigen::Index E = state.dims[0];
  const Eigen::Index blk = state.size() / E;
  auto &cache = DisplacementCache::global();

  if (spec.representation == Representation::qubit) {
    if (E != 2) throw Error(ErrorKind::input, "qubit interaction needs a two-level electron");
    const double r = 1.0 / std::sqrt(2.0);
    Vec p = r * (state.amps.head(blk) + state.amps.tail(blk));
    Vec m = r * (state.amps.head(blk) - state.amps.tail(blk));
    Dims rest(state.dims.begin() + 1, state.dims.end());
    StateVector sp(rest, std::move(p)), sm(rest, std::move(m));
    apply_local(*cache.get(N, spec.g), sp, spec.target_mode - 1);
    apply_local(*cache.get(N, -spec.g), sm, spec.target_mode - 1);
    state.amps.head(blk) = r * (sp.amps + sm.amps);
    state.amps.tail(blk) = r * (sp.amps - sm.amps);
    return;
  }

  // Comb: rotate the ring index into the Fourier basis, displace each block
  // by g * lambda_k, rotate back.
  const int M = static_cast<int>(E);
  Mat F = detail::ring_fourier(M);
  Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(state.amps.data(), M, blk);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> four = F.adjoint() * view;
  Dims rest(state.dims.begin() + 1, state.dims.end());
  for (int k = 0; k < M; ++k) {
    StateVector s(rest, four.row(k).transpose());
    apply_local(detail::displacement_kernel(N, spec.g * detail::ring_eigenvalue(M, k)), s, spec.target_mode - 1);
    four.row(k) = s.amps.transpose();
  }
  view = F * four;
}

inline constexpr double kSigmaInfinity = std::numeric_limits<double>::infinity();

// Fidelity between the exact comb evolution S(g)(|0>_e (x) |vac>) and the
// conditional-displacement prediction embedded in comb space, per sigma.
// sigma = infinity uses a two-site ring where b is exactly X.
inline std::vector<double> comb_convergence(cplx g, const std::vector<double> &sigmas, const FockSpace &fock) {
  std::vector<double> out;
  const int N = fock.cutoff;
  Vec vac = Vec::Zero(N);
  vac(0) = 1.0;
  Vec dp = detail::displacement_kernel(N, g) * vac, dm = detail::displacement_kernel(N, -g) * vac;
  Vec even = 0.5 * (dp + dm), odd = 0.5 * (dp - dm);
  for (double sigma : sigmas) {
    Vec z, o;
    int M;
    if (std::isinf(sigma)) {
      M = 2;
      z = Vec::Zero(2);
      z(0) = 1.0;
      o = ladder(2, Boundary::periodic).data * z;
    } else {
      CombSpec spec{ring_size_for(sigma), sigma, 0.0, 2};
      auto [zs, os] = qubit_states(spec);
      M = spec.ring_size;
      z = zs.amps;
      o = os.amps;
    }
    StateVector joint({M, N}, Vec::Zero(M * N));
    for (int i = 0; i < M; ++i) joint.amps.segment(i * N, N) = z(i) * vac;
    apply_interaction(joint, CouplingSpec{g, 1, Representation::comb});
    Vec ideal(M * N);
    for (int i = 0; i < M; ++i) ideal.segment(i * N, N) = z(i) * even + o(i) * odd;
    out.push_back(std::norm(ideal.normalized().dot(joint.amps.normalized())));
  }
  return out;
}

}  // namespace gkpsim
