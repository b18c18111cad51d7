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
#include "gkpsim/log.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <tuple>

namespace gkpsim {

// Truncated single-mode Fock space. Operators are trusted only on the
// leading (cutoff - guard) block.
struct FockSpace {
  int cutoff = 150;
  int guard = 30;

  FockSpace() = default;
  explicit FockSpace(int n) : FockSpace(n, n / 5) {}
  FockSpace(int n, int g) : cutoff(n), guard(g) {
    if (cutoff < 4) throw Error(ErrorKind::input, "Fock cutoff must be at least 4");
    if (guard < 0 || 2 * guard >= cutoff) throw Error(ErrorKind::input, "guard band must satisfy 0 <= guard < cutoff/2");
  }

  int trusted() const { return cutoff - guard; }
  Dims dims() const { return {cutoff}; }
};

inline Operator annihilation(const FockSpace &s) {
  Mat a = Mat::Zero(s.cutoff, s.cutoff);
  for (int n = 1; n < s.cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(s.dims(), a);
}

inline Operator creation(const FockSpace &s) {
  auto a = annihilation(s);
  return Operator(s.dims(), a.data.adjoint());
}

inline Operator number_op(const FockSpace &s) {
  Mat n = Mat::Zero(s.cutoff, s.cutoff);
  for (int k = 0; k < s.cutoff; ++k) n(k, k) = static_cast<double>(k);
  return Operator(s.dims(), n);
}

inline Operator parity(const FockSpace &s) {
  Mat p = Mat::Zero(s.cutoff, s.cutoff);
  for (int k = 0; k < s.cutoff; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return Operator(s.dims(), p);
}

// Phase-space rotation exp(i theta a^dag a). exp(i pi n / 2) maps q -> -p.
inline Operator rotation(const FockSpace &s, double theta) {
  Mat r = Mat::Zero(s.cutoff, s.cutoff);
  for (int k = 0; k < s.cutoff; ++k) r(k, k) = std::polar(1.0, theta * k);
  // exact quarter turns avoid cos(pi/2) != 0 residue
  if (std::fmod(std::abs(theta), kPi / 2) == 0.0) {
    long q = std::lround(theta / (kPi / 2));
    static const cplx quarter[4] = {1.0, kI, -1.0, -kI};
    for (int k = 0; k < s.cutoff; ++k) r(k, k) = quarter[((q * k) % 4 + 4) % 4];
  }
  return Operator(s.dims(), r);
}

namespace detail {

// Displacement matrix from normalized associated-Laguerre recurrences.
// Phase powers are built by repeated multiplication so D(a)^dag == D(-a)
// holds bit for bit.
inline Mat displacement_kernel(int N, cplx alpha) {
  Mat D = Mat::Zero(N, N);
  const double r = std::abs(alpha);
  if (r == 0.0) return Mat::Identity(N, N);
  const double x = r * r;
  const cplx u = alpha / r;
  const cplx mu = -std::conj(u);
  std::vector<double> f(N);
  cplx ud = 1.0, vd = 1.0;
  for (int d = 0; d < N; ++d) {
    if (d > 0) {
      ud *= u;
      vd *= mu;
    }
    const int len = N - d;
    f[0] = std::exp(d * std::log(r) - 0.5 * x - 0.5 * std::lgamma(d + 1.0));
    if (len > 1) f[1] = (1.0 + d - x) * f[0] / std::sqrt(1.0 + d);
    for (int k = 1; k + 1 < len; ++k)
      f[k + 1] = ((2.0 * k + 1.0 + d - x) * f[k] - std::sqrt(double(k) * (k + d)) * f[k - 1]) /
                 std::sqrt((k + 1.0) * (k + 1.0 + d));
    for (int n = 0; n < len; ++n) {
      D(n + d, n) = ud * f[n];
      if (d > 0) D(n, n + d) = vd * f[n];
    }
  }
  return D;
}

}  // namespace detail

inline void check_displacement_range(const FockSpace &s, cplx alpha) {
  double r2 = std::norm(alpha);
  if (r2 > s.cutoff / 2.0) {
    int need = static_cast<int>(std::ceil(2.0 * r2));
    throw Error(ErrorKind::truncation, "|alpha|^2 = " + std::to_string(r2) + " exceeds cutoff/2; need cutoff >= " +
                                           std::to_string(need));
  }
  if (r2 > s.cutoff / 4.0) warn("|alpha|^2 above cutoff/4; displacement accuracy degrades near the truncation edge");
}

inline Operator displacement(const FockSpace &s, cplx alpha) {
  check_displacement_range(s, alpha);
  return Operator(s.dims(), detail::displacement_kernel(s.cutoff, alpha));
}

// Reference construction exp(alpha a^dag - alpha^* a). The generator is
// built on a padded space and cropped: exponentiating the generator at the
// target cutoff itself is off by ~1e-5 on the leading block once |alpha| ~ 2.
inline Operator displacement_matexp(const FockSpace &s, cplx alpha, int pad = -1) {
  const int big = s.cutoff + (pad < 0 ? s.cutoff : pad);
  auto a = annihilation(FockSpace(big, 0)).data;
  Mat gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return Operator(s.dims(), matexp(gen).topLeftCorner(s.cutoff, s.cutoff));
}

// Read-mostly cache keyed by (cutoff, alpha). Entries are inserted whole
// under the writer lock, so readers never see partial matrices.
class DisplacementCache {
 public:
  std::shared_ptr<const Mat> get(int cutoff, cplx alpha) {
    Key k{cutoff, alpha.real(), alpha.imag()};
    {
      std::shared_lock lock(mu_);
      auto it = map_.find(k);
      if (it != map_.end()) return it->second;
    }
    auto m = std::make_shared<const Mat>(detail::displacement_kernel(cutoff, alpha));
    std::unique_lock lock(mu_);
    if (map_.size() > kMaxEntries) map_.clear();
    return map_.emplace(k, m).first->second;
  }

  static DisplacementCache &global() {
    static DisplacementCache c;
    return c;
  }

 private:
  using Key = std::tuple<int, double, double>;
  static constexpr std::size_t kMaxEntries = 512;
  std::shared_mutex mu_;
  std::map<Key, std::shared_ptr<const Mat>> map_;
};

inline StateVector fock_state(const FockSpace &s, int n) {
  if (n < 0 || n >= s.cutoff) throw Error(ErrorKind::input, "Fock index out of range");
  return StateVector::basis(s.dims(), n);
}

inline StateVector coherent_state(const FockSpace &s, cplx alpha) {
  check_displacement_range(s, alpha);
  Vec v(s.cutoff);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < s.cutoff; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  StateVector psi(s.dims(), v);
  return psi.normalize();
}

// Hermite functions psi_n(x) = <x|n> for n < N, one row per n.
inline Eigen::MatrixXd hermite_functions(int N, const std::vector<double> &xs) {
  Eigen::MatrixXd H(N, static_cast<Eigen::Index>(xs.size()));
  const double c0 = std::pow(kPi, -0.25);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double x = xs[j];
    H(0, j) = c0 * std::exp(-0.5 * x * x);
    if (N > 1) H(1, j) = std::sqrt(2.0) * x * H(0, j);
    for (int n = 1; n + 1 < N; ++n)
      H(n + 1, j) = std::sqrt(2.0 / (n + 1)) * x * H(n, j) - std::sqrt(double(n) / (n + 1)) * H(n - 1, j);
  }
  return H;
}

// <x_theta|psi> with x_theta = (a e^{-i theta} + a^dag e^{i theta})/sqrt(2),
// using <x_theta|n> = e^{-i n theta} psi_n(x).
inline Vec quadrature_wavefunction(const StateVector &psi, double theta, const std::vector<double> &grid) {
  if (psi.dims.size() != 1) throw Error(ErrorKind::input, "quadrature_wavefunction expects a single-mode state");
  const int N = psi.dims[0];
  double extent = 0.0;
  for (double x : grid) extent = std::max(extent, std::abs(x));
  if (extent > std::sqrt(2.0 * N + 1.0) + 4.0) warn("quadrature grid extends past the classical turning point of the cutoff");
  Eigen::MatrixXd H = hermite_functions(N, grid);
  Vec c(N);
  for (int n = 0; n < N; ++n) c(n) = psi.amps(n) * std::polar(1.0, -theta * n);
  return H.transpose().cast<cplx>() * c;
}

// W(alpha) = (2/pi) Tr[D(alpha) P D(alpha)^dag rho] = (2/pi) Tr[D(2 alpha) P rho].
// Grid axes are Re(alpha) (xs, columns) and Im(alpha) (ys, rows), so that
// sum W dx dy = 1.
inline Eigen::MatrixXd wigner(const Operator &rho, const std::vector<double> &xs, const std::vector<double> &ys) {
  if (rho.dims.size() != 1) throw Error(ErrorKind::input, "wigner expects a single-mode density operator");
  if ((rho.data - rho.data.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw Error(ErrorKind::input, "wigner input is not Hermitian");
  const int N = rho.dims[0];
  Mat prho = rho.data;  // rows scaled by (-1)^n: (P rho)_{nm}
  for (int n = 1; n < N; n += 2) prho.row(n) *= -1.0;
  Eigen::MatrixXd W(ys.size(), xs.size());
  for (std::size_t iy = 0; iy < ys.size(); ++iy)
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      Mat D = detail::displacement_kernel(N, 2.0 * cplx(xs[ix], ys[iy]));
      // Tr[D P rho] = sum_{mn} D_{mn} (P rho)_{nm}
      W(iy, ix) = (2.0 / kPi) * (D.cwiseProduct(prho.transpose())).sum().real();
    }
  return W;
}

inline Eigen::MatrixXd wigner(const StateVector &psi, const std::vector<double> &xs, const std::vector<double> &ys) {
  return wigner(density(psi), xs, ys);
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = (n == 1) ? a : a + (b - a) * k / (n - 1);
  return v;
}

}  // namespace gkpsim
