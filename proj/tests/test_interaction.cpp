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

#include <gtest/gtest.h>

#include "gkpsim/interaction.hpp"

#include <random>

namespace gkpsim {
namespace {

double max_abs(const Mat &m) { return m.cwiseAbs().maxCoeff(); }

Vec random_low_state(std::mt19937_64 &rng, Eigen::Index size, Eigen::Index block, int N, int low) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v = Vec::Zero(size);
  for (Eigen::Index i = 0; i < size; ++i)
    if ((i % N) < low && ((i / N) % N < low || block == 1)) v(i) = cplx(n(rng), n(rng));
  return v.normalized();
}

TEST(Scattering, ZeroCouplingIsIdentity) {
  Operator S = scattering_exact(0.0, 5, FockSpace(12));
  EXPECT_LT(max_abs(S.data - Mat::Identity(60, 60)), 1e-15);
}

TEST(Scattering, SingleSiteRingIsDisplacement) {
  FockSpace f(30);
  cplx g(0.8, -0.3);
  EXPECT_EQ(max_abs(scattering_exact(g, 1, f).data - displacement(f, g).data), 0.0);
}

TEST(Scattering, FastPathMatchesMatexp) {
  FockSpace f(40);
  Mat fast = scattering_exact(0.7, 17, f).data;
  Mat ref = scattering_matexp(0.7, 17, f, Boundary::periodic).data;
  // Compare the trusted Fock levels of every ring block.
  double worst = 0.0;
  for (int i = 0; i < 17; ++i)
    for (int j = 0; j < 17; ++j)
      worst = std::max(worst, max_abs(fast.block(i * 40, j * 40, 24, 24) - ref.block(i * 40, j * 40, 24, 24)));
  EXPECT_LT(worst, 1e-8);
}

TEST(Scattering, TruncatedRingFallsBackToMatexp) {
  FockSpace f(16);
  warnings_enabled() = false;
  Mat a = scattering_exact(0.4, 5, f, Boundary::truncated).data;
  warnings_enabled() = true;
  EXPECT_EQ(max_abs(a - scattering_matexp(0.4, 5, f, Boundary::truncated).data), 0.0);
}

TEST(ConditionalDisplacement, PlusBranchIsCoherentState) {
  FockSpace f(40);
  const cplx g(0.9, 0.4);
  Mat cd = conditional_displacement(g, f).data;
  Vec in = Vec::Zero(80);
  in(0) = in(40) = 1.0 / std::sqrt(2.0);
  Vec out = cd * in;
  Vec coh = displacement(f, g).data.col(0);
  EXPECT_LT((out.head(40) - coh / std::sqrt(2.0)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((out.tail(40) - coh / std::sqrt(2.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ConditionalDisplacement, ZeroIsIdentity) {
  EXPECT_LT(max_abs(conditional_displacement(0.0, FockSpace(10)).data - Mat::Identity(20, 20)), 1e-15);
}

TEST(ConditionalDisplacement, AlgebraicFormsAgree) {
  FockSpace f(60);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r(0.0, 3.0), th(-kPi, kPi);
  for (int k = 0; k < 20; ++k) {
    cplx g = std::polar(r(rng), th(rng));
    EXPECT_LT(max_abs(conditional_displacement(g, f).data - conditional_displacement_sum_form(g, f).data), 1e-12);
  }
}

TEST(ConditionalDisplacement, MatchesQubitExponential) {
  FockSpace f(40);
  for (cplx g : {cplx(0.5, 0.0), cplx(-0.3, 1.2), cplx(0.0, 1.6)}) {
    Mat a = conditional_displacement(g, f).data, b = conditional_displacement_matexp(g, f).data;
    EXPECT_LT(max_abs(a - b), 1e-12) << g;
  }
}

TEST(ApplyInteraction, TargetsTheRequestedMode) {
  FockSpace f(30);
  const cplx g(0.6, -0.2);
  const double r = 1.0 / std::sqrt(2.0);
  StateVector s = with_electron(kron(fock_state(f, 0), fock_state(f, 0)), r, r);
  apply_interaction(s, {g, 2, Representation::qubit});
  StateVector want = with_electron(kron(fock_state(f, 0), StateVector(f.dims(), displacement(f, g).data.col(0))), r, r);
  EXPECT_LT((s.amps - want.amps).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ApplyInteraction, PreservesNorm) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int N = 30;
  for (int t = 0; t < 100; ++t) {
    StateVector s({2, N, N}, random_low_state(rng, 2 * N * N, 2, N, 6));
    apply_interaction(s, {cplx(u(rng), u(rng)), 1 + t % 2, Representation::qubit});
    EXPECT_NEAR(s.norm(), 1.0, 1e-10);
  }
}

TEST(ApplyInteraction, AgreesWithKronOperator) {
  FockSpace f(20);
  std::mt19937_64 rng(29);
  StateVector s({2, 20, 20}, random_low_state(rng, 800, 2, 20, 20));
  const cplx g(0.4, 0.7);
  // CD on mode 2 as a full operator: electron (x) I (x) D, reordered.
  Mat plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  Operator I = Operator::identity({20});
  Mat full = kron(kron(Operator({2}, plus), I), displacement(f, g)).data +
             kron(kron(Operator({2}, minus), I), displacement(f, -g)).data;
  Vec want = full * s.amps;
  apply_interaction(s, {g, 2, Representation::qubit});
  EXPECT_LT((s.amps - want).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ApplyInteraction, CombRepresentationMatchesScatteringMatrix) {
  FockSpace f(30);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(17 * 30);
  for (auto &x : v) x = cplx(n(rng), n(rng));
  StateVector s({17, 30}, v.normalized());
  Vec want = scattering_exact(cplx(0.5, 0.2), 17, f).data * s.amps;
  apply_interaction(s, {cplx(0.5, 0.2), 1, Representation::comb});
  EXPECT_LT((s.amps - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyInteraction, RejectsBadSpecs) {
  StateVector s({2, 10}, Vec::Unit(20, 0));
  EXPECT_THROW(apply_interaction(s, {7.0, 1, Representation::qubit}), Error);
  EXPECT_THROW(apply_interaction(s, {0.5, 2, Representation::qubit}), Error);
  EXPECT_THROW(apply_interaction(s, {0.5, 0, Representation::qubit}), Error);
}

TEST(CombConvergence, InfiniteWidthIsExact) {
  auto f = comb_convergence(0.5, {kSigmaInfinity}, FockSpace(60));
  EXPECT_NEAR(f[0], 1.0, 1e-12);
}

TEST(CombConvergence, MonotoneWithFrozenBaselines) {
  auto f = comb_convergence(0.5, {2.0, 4.0, 8.0}, FockSpace(60));
  EXPECT_LE(f[0], f[1]);
  EXPECT_LE(f[1], f[2]);
  EXPECT_GE(f[2], 0.99);
  // Reference values from tests/oracle/gen_oracle.py.
  EXPECT_NEAR(f[0], 0.988193680687, 1e-6);
  EXPECT_NEAR(f[1], 0.996748701413, 1e-6);
  EXPECT_NEAR(f[2], 0.999166450613, 1e-6);
}

}  // namespace
}  // namespace gkpsim
