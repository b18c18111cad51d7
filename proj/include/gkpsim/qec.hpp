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

#include "gkpsim/gkp.hpp"
#include "gkpsim/interaction.hpp"
#include "gkpsim/protocols.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace gkpsim {

struct NoiseSpec {
  enum class Kind { loss, displacement };
  Kind kind = Kind::displacement;
  double eta = 1.0;    // loss: transmissivity
  double sigma = 0.0;  // displacement: std per quadrature, shot-noise units
  std::uint64_t seed = 0;

  static NoiseSpec loss(double eta, std::uint64_t seed = 0) { return {Kind::loss, eta, 0.0, seed}; }
  static NoiseSpec displacement(double sigma, std::uint64_t seed = 0) { return {Kind::displacement, 1.0, sigma, seed}; }

  void validate() const {
    if (kind == Kind::loss && !(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::input, "loss transmissivity must lie in (0, 1]");
    if (kind == Kind::displacement && !(sigma >= 0.0)) throw Error(ErrorKind::input, "displacement noise std must be >= 0");
  }
};

// Box-Muller on uniform01, so draws do not depend on the standard library's
// distribution implementation.
inline double gaussian(std::mt19937_64 &rng) {
  double u1 = uniform01(rng), u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// sigma is in shot-noise units (vacuum variance 1 for a + a^dag):
// eps = (e_q + i e_p)/2 shifts a + a^dag by e_q and -i(a - a^dag) by e_p.
inline cplx sample_shift(double sigma, std::mt19937_64 &rng) {
  double eq = sigma * gaussian(rng), ep = sigma * gaussian(rng);
  return cplx(eq, ep) / 2.0;
}

// Mean of <D(a)> under the displacement channel, relative to the noiseless
// value: E[exp(2i Im(a eps^*))] = exp(-|a|^2 sigma^2 / 2).
inline double stabilizer_decay_factor(cplx a, double sigma) { return std::exp(-0.5 * std::norm(a) * sigma * sigma); }

// Kraus operators of the pure-loss channel with transmissivity eta:
// K_k = sum_n sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k><n|.
inline std::vector<Mat> loss_kraus(int N, double eta) {
  std::vector<Mat> ks;
  for (int k = 0; k < N; ++k) {
    Mat K = Mat::Zero(N, N);
    bool any = false;
    for (int n = k; n < N; ++n) {
      double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      double w = 0.5 * (lc + (n - k) * std::log(eta) + (k > 0 ? k * std::log1p(-eta) : 0.0));
      if (eta == 1.0 && k > 0) w = -INFINITY;
      double c = std::exp(w);
      if (c > 0.0) any = true;
      K(n - k, n) = c;
    }
    if (!any) break;
    ks.push_back(std::move(K));
  }
  return ks;
}

// Exact channel on a single-mode density operator.
inline Operator apply_loss(const Operator &rho, double eta) {
  if (rho.dims.size() != 1) throw Error(ErrorKind::input, "density-operator loss is single-mode; sample trajectories for registers");
  const int N = rho.dims[0];
  Mat out = Mat::Zero(N, N);
  for (const auto &K : loss_kraus(N, eta)) out += K * rho.data * K.adjoint();
  return Operator(rho.dims, out);
}

// One Kraus branch drawn with its Born weight; `mode` is 1-based.
inline StateVector apply_loss_sampled(const StateVector &psi, double eta, int mode, std::mt19937_64 &rng,
                                      std::vector<double> *branch_probs = nullptr) {
  const int sub = mode - 1;
  if (sub < 0 || sub >= static_cast<int>(psi.dims.size())) throw Error(ErrorKind::input, "loss target mode out of range");
  auto ks = loss_kraus(psi.dims[sub], eta);
  std::vector<StateVector> outs;
  std::vector<double> ps;
  double total = 0.0;
  for (const auto &K : ks) {
    StateVector t = psi;
    apply_local(K, t, sub);
    ps.push_back(t.amps.squaredNorm());
    total += ps.back();
    outs.push_back(std::move(t));
  }
  for (double &p : ps) p /= total;
  if (branch_probs) *branch_probs = ps;
  double u = uniform01(rng), acc = 0.0;
  std::size_t pick = ps.size() - 1;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    acc += ps[k];
    if (u < acc) {
      pick = k;
      break;
    }
  }
  return outs[pick].normalize();
}

// Sampled-pure noise on one photonic mode (1-based).
inline StateVector apply_noise(const StateVector &psi, const NoiseSpec &noise, int mode, std::mt19937_64 &rng) {
  noise.validate();
  if (noise.kind == NoiseSpec::Kind::loss) return apply_loss_sampled(psi, noise.eta, mode, rng);
  StateVector out = psi;
  cplx eps = sample_shift(noise.sigma, rng);
  apply_local(detail::displacement_kernel(psi.dims[mode - 1], eps), out, mode - 1);
  return out;
}

// Loss acts on the density operator exactly; displacement noise draws one
// shift.
inline Operator apply_noise(const Operator &rho, const NoiseSpec &noise, std::mt19937_64 &rng) {
  noise.validate();
  if (noise.kind == NoiseSpec::Kind::loss) return apply_loss(rho, noise.eta);
  Mat D = detail::displacement_kernel(rho.dims[0], sample_shift(noise.sigma, rng));
  return Operator(rho.dims, D * rho.data * D.adjoint());
}

// ---- syndrome rounds ----

enum class SyndromeScheme { trimmed, two_shot };

inline const char *to_string(SyndromeScheme s) { return s == SyndromeScheme::trimmed ? "trimmed" : "two-shot"; }

// Largest corrective shift the two-shot scheme applies, as a fraction of |a_i|.
inline constexpr double kCorrectionCapFraction = 0.25;

struct SyndromeResult {
  Axis axis = Axis::Z;
  std::vector<int> outcomes;
  double phase_estimate = 0.0;   // stabilizer phase read off the outcomes
  double estimated_shift = 0.0;  // along sensitive_direction(a), capped
  cplx correction{0.0, 0.0};             // displacement applied as feedback
  StateVector state;
  char frame_update = 'I';  // logical Pauli picked up by the mode
};

// Unit vector i a/|a|: the shift direction a stabilizer D(a) is sensitive to.
inline cplx sensitive_direction(cplx a) { return kI * a / std::abs(a); }

// Stabilizer phase theta = 2 Im(a eps^*) for eps = t * i a/|a| gives t = -theta / (2|a|).
inline double shift_from_phase(cplx a, double theta) { return -theta / (2.0 * std::abs(a)); }

namespace detail {

inline StateVector run_single_electron(const StateVector &psi, const std::vector<Step> &steps, std::mt19937_64 &rng,
                                       std::vector<int> &outcomes) {
  Schedule s;
  s.name = "syndrome";
  s.modes = static_cast<int>(psi.dims.size());
  s.steps = steps;
  auto recs = execute(s, psi, ExecMode::sample, rng);
  outcomes.insert(outcomes.end(), recs[0].outcomes.begin(), recs[0].outcomes.end());
  return recs[0].final_state;
}

}  // namespace detail

// Steps for the trimmed round: a small conjugate-direction conditional
// displacement on each side of CD(a_i/2), electron from |0>, Z readout.
// The trims make the sine Kraus branch vanish on the finite-energy code
// state rather than the ideal grid, so both branches push errors back in.
inline std::vector<Step> trimmed_round_steps(const GkpCode &code, Axis i, int mode) {
  cplx a = code.lattice(i);
  cplx u = a / (kI * std::abs(a));
  cplx trim = -u * std::abs(a) * std::sinh(code.delta * code.delta) / 4.0;
  std::vector<Step> small = {Step::electron_gate(GateAxis::Z, -kPi / 2), Step::interact(trim, mode),
                             Step::electron_gate(GateAxis::Z, kPi / 2)};
  std::vector<Step> st = {Step::new_electron_zero()};
  st.insert(st.end(), small.begin(), small.end());
  st.push_back(Step::interact(a / 2.0, mode));
  st.insert(st.end(), small.begin(), small.end());
  st.push_back(Step::measure(MeasureBasis::z()));
  return st;
}

inline SyndromeResult syndrome_round(const StateVector &psi, const GkpCode &code, Axis i, std::mt19937_64 &rng,
                                     SyndromeScheme scheme = SyndromeScheme::trimmed, int mode = 1) {
  if (i == Axis::Y) throw Error(ErrorKind::input, "syndrome rounds run on the X or Z stabilizer");
  SyndromeResult r;
  r.axis = i;
  const cplx a = code.lattice(i);
  if (scheme == SyndromeScheme::trimmed) {
    // One Z outcome gives cos(theta) = +-1. The correction is the Kraus
    // back-action itself, so nothing is applied on top.
    r.state = detail::run_single_electron(psi, trimmed_round_steps(code, i, mode), rng, r.outcomes);
    r.phase_estimate = r.outcomes[0] == 0 ? 0.0 : kPi;
    r.estimated_shift = std::abs(shift_from_phase(a, r.phase_estimate));
    r.frame_update = i == Axis::X ? 'X' : 'Z';
    return r;
  }
  // Two sub-rounds of CD(a/2) from |0>_e: the Z readout samples cos(theta),
  // the phi = pi/2 readout samples -sin(theta). Each sub-round also applies
  // the logical Pauli, so the pair leaves no frame change.
  std::vector<Step> cosr = {Step::new_electron_zero(), Step::interact(a / 2.0, mode), Step::measure(MeasureBasis::z())};
  std::vector<Step> sinr = {Step::new_electron_zero(), Step::interact(a / 2.0, mode), Step::measure(MeasureBasis::phase(kPi / 2))};
  StateVector s = detail::run_single_electron(psi, cosr, rng, r.outcomes);
  s = detail::run_single_electron(s, sinr, rng, r.outcomes);
  double c = r.outcomes[0] == 0 ? 1.0 : -1.0;
  double sn = r.outcomes[1] == 0 ? -1.0 : 1.0;
  double theta = std::atan2(sn, c);
  r.phase_estimate = theta;
  const double t = std::clamp(shift_from_phase(a, theta), -kCorrectionCapFraction * std::abs(a), kCorrectionCapFraction * std::abs(a));
  r.estimated_shift = t;
  cplx eps = t * sensitive_direction(a);
  r.correction = -eps;
  apply_local(detail::displacement_kernel(s.dims[mode - 1], -eps), s, mode - 1);
  r.state = std::move(s);
  r.frame_update = 'I';
  return r;
}

// Pauli frame as (x, z) bits; X flips the logical label, Z only adds a sign.
struct PauliFrame {
  bool x = false, z = false;
  void apply(char p) {
    if (p == 'X' || p == 'Y') x = !x;
    if (p == 'Z' || p == 'Y') z = !z;
  }
};

struct QecTrace {
  // Index 0 is right after noise injection; index r after round r.
  std::vector<double> mean, stderr_;
  // Same trials with no syndrome rounds.
  std::vector<double> mean_uncorrected, stderr_uncorrected;
  // Paired (corrected - uncorrected) at the final round.
  double paired_mean = 0.0, paired_stderr = 0.0;
  int trials = 0;
  std::vector<double> final_corrected, final_uncorrected;  // per trial
};

struct QecOptions {
  SyndromeScheme scheme = SyndromeScheme::trimmed;
  Logical initial = Logical::zero;
};

inline std::pair<double, double> mean_stderr(const std::vector<double> &v) {
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  double se = v.size() > 1 ? std::sqrt(s2 / (n - 1.0) / n) : 0.0;
  return {m, se};
}

// Per trial: noise once on |0_L>, then alternating Z (q-shift) and X
// (p-shift) rounds, logging the fidelity to the frame-tracked code state.
// Trial t draws from its own generator seeded by (seed, t).
inline QecTrace qec_experiment(const GkpCode &code, const NoiseSpec &noise, int rounds, int trials, std::uint64_t seed,
                               const QecOptions &opt = {}) {
  if (rounds < 0 || trials < 1) throw Error(ErrorKind::input, "rounds must be >= 0 and trials >= 1");
  noise.validate();
  // target[1] is the state after a logical flip that the frame records.
  const bool z_basis = opt.initial == Logical::zero || opt.initial == Logical::one;
  const Logical flipped = opt.initial == Logical::zero ? Logical::one
                          : opt.initial == Logical::one ? Logical::zero
                          : opt.initial == Logical::plus ? Logical::minus
                                                          : Logical::plus;
  const StateVector target[2] = {gkp_state(code, opt.initial), gkp_state(code, flipped)};
  std::vector<std::vector<double>> per_round(rounds + 1), unc(rounds + 1);
  QecTrace tr;
  tr.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(sq);
    StateVector psi = apply_noise(target[0], noise, 1, rng);
    double f0 = fidelity(psi, target[0]);
    per_round[0].push_back(f0);
    for (int r = 0; r <= rounds; ++r) unc[r].push_back(f0);
    PauliFrame frame;
    for (int r = 1; r <= rounds; ++r) {
      Axis ax = (r % 2 == 1) ? Axis::Z : Axis::X;
      auto res = syndrome_round(psi, code, ax, rng, opt.scheme);
      psi = std::move(res.state);
      frame.apply(res.frame_update);
      per_round[r].push_back(fidelity(psi, target[(z_basis ? frame.x : frame.z) ? 1 : 0]));
    }
    tr.final_corrected.push_back(per_round[rounds].back());
    tr.final_uncorrected.push_back(f0);
  }
  for (int r = 0; r <= rounds; ++r) {
    auto [m, s] = mean_stderr(per_round[r]);
    tr.mean.push_back(m);
    tr.stderr_.push_back(s);
    auto [mu, su] = mean_stderr(unc[r]);
    tr.mean_uncorrected.push_back(mu);
    tr.stderr_uncorrected.push_back(su);
  }
  std::vector<double> d(trials);
  for (int t = 0; t < trials; ++t) d[t] = tr.final_corrected[t] - tr.final_uncorrected[t];
  auto [pm, ps] = mean_stderr(d);
  tr.paired_mean = pm;
  tr.paired_stderr = ps;
  return tr;
}

inline std::string trace_csv(const QecTrace &tr) {
  std::ostringstream os;
  os.precision(17);
  os << "round,mean,stderr,mean_uncorrected,stderr_uncorrected\n";
  for (std::size_t r = 0; r < tr.mean.size(); ++r)
    os << r << ',' << tr.mean[r] << ',' << tr.stderr_[r] << ',' << tr.mean_uncorrected[r] << ',' << tr.stderr_uncorrected[r] << '\n';
  return os.str();
}

}  // namespace gkpsim
