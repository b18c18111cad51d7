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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkpsim {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Dims = std::vector<int>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind { input, truncation, budget, validation, numerical, degenerate_branch };

inline const char *to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::input: return "input";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::budget: return "budget";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::degenerate_branch: return "degenerate_branch";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &msg, std::size_t required_bytes = 0)
      : std::runtime_error(msg), kind_(kind), required_bytes_(required_bytes) {}
  ErrorKind kind() const { return kind_; }
  std::size_t required_bytes() const { return required_bytes_; }

 private:
  ErrorKind kind_;
  std::size_t required_bytes_;
};

// Largest number of complex entries any single dense object may hold.
// 2^27 entries is 2 GiB of complex<double>.
inline constexpr std::size_t kDefaultElementBudget = std::size_t{1} << 27;

inline std::size_t dim_product(const Dims &dims) {
  std::size_t p = 1;
  for (int d : dims) {
    if (d <= 0) throw Error(ErrorKind::input, "subsystem dimensions must be positive");
    p *= static_cast<std::size_t>(d);
  }
  return p;
}

inline void check_budget(std::size_t elements, std::size_t budget = kDefaultElementBudget) {
  if (elements > budget) {
    throw Error(ErrorKind::budget, "dimension budget exceeded: need " + std::to_string(elements) +
                                       " complex entries (" + std::to_string(elements * 16) +
                                       " bytes), budget " + std::to_string(budget),
                elements * 16);
  }
}

struct Operator {
  Dims dims;
  Mat data;

  Operator() = default;
  Operator(Dims d, Mat m) : dims(std::move(d)), data(std::move(m)) {
    auto n = static_cast<Eigen::Index>(dim_product(dims));
    if (data.rows() != n || data.cols() != n)
      throw Error(ErrorKind::input, "operator data does not match declared dims");
  }

  static Operator identity(const Dims &d) {
    auto n = static_cast<Eigen::Index>(dim_product(d));
    return Operator(d, Mat::Identity(n, n));
  }

  Eigen::Index size() const { return data.rows(); }

  // Orthonormality of the leading `lead` columns (all if lead < 0). A
  // truncated unitary is only expected to pass on low-lying columns.
  bool is_unitary(double tol, Eigen::Index lead = -1) const {
    Eigen::Index n = lead < 0 ? size() : std::min(lead, size());
    Mat u = data.leftCols(n);
    return ((u.adjoint() * u) - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
  }
};

struct StateVector {
  Dims dims;
  Vec amps;
  double norm_tol = 1e-10;

  StateVector() = default;
  StateVector(Dims d, Vec a) : dims(std::move(d)), amps(std::move(a)) {
    if (amps.size() != static_cast<Eigen::Index>(dim_product(dims)))
      throw Error(ErrorKind::input, "state amplitudes do not match declared dims");
  }

  static StateVector basis(const Dims &d, Eigen::Index index) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(dim_product(d)));
    v(index) = 1.0;
    return StateVector(d, v);
  }

  Eigen::Index size() const { return amps.size(); }
  double norm() const { return amps.norm(); }
  bool is_normalized() const { return std::abs(norm() - 1.0) <= norm_tol; }

  StateVector &normalize() {
    double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::numerical, "cannot normalize a null state");
    amps /= n;
    return *this;
  }
};

inline Operator kron(const Operator &a, const Operator &b) {
  check_budget(static_cast<std::size_t>(a.size() * b.size()) * static_cast<std::size_t>(a.size() * b.size()));
  Dims d = a.dims;
  d.insert(d.end(), b.dims.begin(), b.dims.end());
  Eigen::Index na = a.size(), nb = b.size();
  Mat m(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) m.block(i * nb, j * nb, nb, nb) = a.data(i, j) * b.data;
  return Operator(d, m);
}

inline StateVector kron(const StateVector &a, const StateVector &b) {
  check_budget(static_cast<std::size_t>(a.size() * b.size()));
  Dims d = a.dims;
  d.insert(d.end(), b.dims.begin(), b.dims.end());
  Vec v(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) v.segment(i * b.size(), b.size()) = a.amps(i) * b.amps;
  return StateVector(d, v);
}

// exp(M) by scaling and squaring with the degree-13 Pade approximant
// (Higham 2005). Used as the reference path; production code builds
// displacements analytically.
inline Mat matexp(const Mat &M) {
  if (M.rows() != M.cols()) throw Error(ErrorKind::input, "matexp needs a square matrix");
  if (!M.allFinite()) throw Error(ErrorKind::input, "matexp input has non-finite entries");
  const Eigen::Index n = M.rows();
  if (n == 0) return M;
  static constexpr double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
  const double theta13 = 5.371920351148152;
  double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  Mat A = M / std::ldexp(1.0, s);
  Mat I = Mat::Identity(n, n);
  Mat A2 = A * A, A4 = A2 * A2, A6 = A4 * A2;
  Mat U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  Mat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  Mat R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  if (!R.allFinite()) throw Error(ErrorKind::numerical, "matexp produced non-finite entries");
  return R;
}

inline Operator matexp(const Operator &M) { return Operator(M.dims, matexp(M.data)); }

namespace detail {

inline std::vector<std::size_t> strides(const Dims &dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * static_cast<std::size_t>(dims[k + 1]);
  return s;
}

// Split each full index into (kept, traced) flat indices.
struct Split {
  Dims keep_dims, trace_dims;
  std::vector<std::size_t> kept, traced;
};

inline Split split_indices(const Dims &dims, const std::vector<int> &keep_in) {
  if (keep_in.empty()) throw Error(ErrorKind::input, "partial trace needs a non-empty keep set");
  std::set<int> keep(keep_in.begin(), keep_in.end());
  for (int k : keep)
    if (k < 0 || k >= static_cast<int>(dims.size())) throw Error(ErrorKind::input, "keep index out of range");
  Split sp;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) (keep.count(k) ? sp.keep_dims : sp.trace_dims).push_back(dims[k]);
  std::size_t n = dim_product(dims);
  sp.kept.resize(n);
  sp.traced.resize(n);
  auto st = strides(dims);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t kf = 0, tf = 0, rem = idx;
    for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
      std::size_t digit = rem / st[k];
      rem %= st[k];
      if (keep.count(k))
        kf = kf * dims[k] + digit;
      else
        tf = tf * dims[k] + digit;
    }
    sp.kept[idx] = kf;
    sp.traced[idx] = tf;
  }
  return sp;
}

}  // namespace detail

inline Operator density(const StateVector &psi) {
  check_budget(static_cast<std::size_t>(psi.size()) * static_cast<std::size_t>(psi.size()));
  return Operator(psi.dims, psi.amps * psi.amps.adjoint());
}

inline Operator partial_trace(const StateVector &psi, const std::vector<int> &keep) {
  auto sp = detail::split_indices(psi.dims, keep);
  auto nk = static_cast<Eigen::Index>(dim_product(sp.keep_dims));
  auto nt = static_cast<Eigen::Index>(sp.trace_dims.empty() ? 1 : dim_product(sp.trace_dims));
  Mat M = Mat::Zero(nk, nt);
  for (Eigen::Index i = 0; i < psi.size(); ++i) M(sp.kept[i], sp.traced[i]) = psi.amps(i);
  return Operator(sp.keep_dims, M * M.adjoint());
}

inline Operator partial_trace(const Operator &rho, const std::vector<int> &keep) {
  auto sp = detail::split_indices(rho.dims, keep);
  auto nk = static_cast<Eigen::Index>(dim_product(sp.keep_dims));
  Mat R = Mat::Zero(nk, nk);
  const Eigen::Index n = rho.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (sp.traced[i] == sp.traced[j]) R(sp.kept[i], sp.kept[j]) += rho.data(i, j);
  return Operator(sp.keep_dims, R);
}

namespace detail {

inline void check_dims(const Dims &a, const Dims &b) {
  if (a != b) throw Error(ErrorKind::input, "fidelity arguments have mismatched dims");
}

inline Mat psd_sqrt(const Mat &h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

inline double fidelity(const StateVector &x, const StateVector &y) {
  detail::check_dims(x.dims, y.dims);
  return std::norm(x.amps.dot(y.amps));
}

inline double fidelity(const Operator &rho, const StateVector &y) {
  detail::check_dims(rho.dims, y.dims);
  return std::clamp(y.amps.dot(rho.data * y.amps).real(), 0.0, 1.0);
}

inline double fidelity(const StateVector &y, const Operator &rho) { return fidelity(rho, y); }

// Uhlmann fidelity (Tr sqrt(sqrt(r) s sqrt(r)))^2.
inline double fidelity(const Operator &r, const Operator &s) {
  detail::check_dims(r.dims, s.dims);
  Mat sr = detail::psd_sqrt(r.data);
  Eigen::SelfAdjointEigenSolver<Mat> es(sr * s.data * sr, Eigen::EigenvaluesOnly);
  double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(t * t, 0.0, 1.0);
}

// Apply a local operator to one subsystem of a state without building the
// register-wide matrix. The state is viewed as (left, d, right).
inline void apply_local(const Mat &op, StateVector &psi, int subsystem) {
  if (subsystem < 0 || subsystem >= static_cast<int>(psi.dims.size()))
    throw Error(ErrorKind::input, "subsystem index out of range");
  const Eigen::Index d = psi.dims[subsystem];
  if (op.rows() != d || op.cols() != d) throw Error(ErrorKind::input, "local operator dimension mismatch");
  Eigen::Index left = 1, right = 1;
  for (int k = 0; k < subsystem; ++k) left *= psi.dims[k];
  for (int k = subsystem + 1; k < static_cast<int>(psi.dims.size()); ++k) right *= psi.dims[k];
  if (right == 1) {
    Eigen::Map<Mat> view(psi.amps.data(), d, left);  // column-major: column = left index
    view = op * view;
    return;
  }
  for (Eigen::Index l = 0; l < left; ++l) {
    Eigen::Map<Mat, 0, Eigen::OuterStride<>> blk(psi.amps.data() + l * d * right, right, d, Eigen::OuterStride<>(right));
    blk = blk * op.transpose();
  }
}

inline cplx expectation_local(const StateVector &psi, const Mat &op, int subsystem) {
  StateVector t = psi;
  apply_local(op, t, subsystem);
  return psi.amps.dot(t.amps);
}

}  // namespace gkpsim
