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

#include "gkpsim/protocols.hpp"

namespace gkpsim {
namespace {

class Quiet : public ::testing::Test {
 protected:
  void SetUp() override { warnings_enabled() = false; }
  void TearDown() override { warnings_enabled() = true; }
};

double total_probability(const std::vector<TrajectoryRecord> &r) {
  double s = 0.0;
  for (const auto &x : r) s += x.probability;
  return s;
}

// Truncated displacements leak a little norm past the cutoff.
StateVector normalized(StateVector s) {
  s.amps.normalize();
  return s;
}

StateVector corrected(const TrajectoryRecord &r) { return undo_frames(r.final_state, r.frame_ledger); }

// Oracle for the two-qubit logical state: probability-weighted tomography.
Mat ensemble_tomography(const std::vector<TrajectoryRecord> &recs, const GkpCode &code) {
  Mat rho = Mat::Zero(4, 4);
  for (const auto &r : recs) rho += r.probability * logical_tomography_2q(corrected(r), code);
  return rho;
}

// Same schedule with every top-level FrameShift(d) replaced by LaserDisplace(-d).
Schedule with_laser_corrections(Schedule s) {
  for (auto &st : s.steps)
    if (st.kind == StepKind::FrameShift) st = Step::laser(-st.value, st.mode);
  return s;
}

using Execute = Quiet;
using Protocol = Quiet;
using ScheduleJson = Quiet;

TEST_F(Execute, EmptyScheduleIsIdentity) {
  auto code = square_code(0.25, FockSpace(150));
  auto psi = gkp_state(code, Logical::plus);
  auto s = make_schedule("empty", code, 1);
  auto r = execute(s, psi, ExecMode::enumerate);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].probability, 1.0);
  EXPECT_TRUE(r[0].outcomes.empty());
  EXPECT_EQ((r[0].final_state.amps - psi.amps).norm(), 0.0);
}

TEST_F(Execute, ReadoutEnumeratesTwoRecords) {
  auto code = square_code(0.2, FockSpace(150));
  auto r = execute(compile_readout(code, Axis::Z), gkp_state(code, Logical::zero), ExecMode::enumerate);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].outcomes, std::vector<int>{0});
  EXPECT_EQ(r[1].outcomes, std::vector<int>{1});
  EXPECT_NEAR(r[0].probability, 0.984536091301, 1e-6);
  EXPECT_NEAR(r[1].probability, 0.015463908699, 1e-6);
}

TEST_F(Execute, SamplingIsDeterministic) {
  auto code = square_code(0.25, FockSpace(150));
  auto s = compile_rotation(code, Axis::Z, kPi / 4);
  auto psi = gkp_state(code, Logical::plus);
  for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
    auto a = execute(s, psi, ExecMode::sample, seed);
    auto b = execute(s, psi, ExecMode::sample, seed);
    ASSERT_EQ(a.size(), 1u);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(a[0].outcomes, b[0].outcomes);
    EXPECT_EQ(a[0].probability, b[0].probability);
    EXPECT_EQ(a[0].frame_ledger, b[0].frame_ledger);
    EXPECT_TRUE(a[0].final_state.amps == b[0].final_state.amps);
  }
}

TEST_F(Execute, SamplingVisitsBothBranches) {
  auto code = square_code(0.25, FockSpace(150));
  auto s = compile_readout(code, Axis::Z);
  auto psi = gkp_state(code, Logical::plus);
  int ones = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) ones += execute(s, psi, ExecMode::sample, seed)[0].outcomes[0];
  EXPECT_GT(ones, 5);
  EXPECT_LT(ones, 35);
}

TEST_F(Execute, RejectsWrongRegister) {
  auto code = square_code(0.3, FockSpace(40));
  auto z = gkp_state(code, Logical::zero);
  EXPECT_THROW(execute(compile_cnot2(code), z, ExecMode::enumerate), Error);
}

TEST_F(Execute, FrameLedgerMatchesLaserCorrection) {
  auto code = square_code(0.3, FockSpace(80));
  auto z = gkp_state(code, Logical::zero), p = gkp_state(code, Logical::plus);
  struct Case {
    Schedule s;
    StateVector in;
  };
  std::vector<Case> cases = {{compile_readout(code, Axis::Z), p},
                             {compile_rotation(code, Axis::Z, kPi / 4), p},
                             {compile_cnot2(code), product_state({p, z})}};
  for (const auto &c : cases) {
    auto framed = execute(c.s, c.in, ExecMode::enumerate);
    auto laser = execute(with_laser_corrections(c.s), c.in, ExecMode::enumerate);
    ASSERT_EQ(framed.size(), laser.size()) << c.s.name;
    for (std::size_t k = 0; k < framed.size(); ++k) {
      EXPECT_NEAR(framed[k].probability, laser[k].probability, 1e-12) << c.s.name;
      EXPECT_NEAR(fidelity(normalized(corrected(framed[k])), normalized(laser[k].final_state)), 1.0, 1e-9) << c.s.name;
      for (auto d : laser[k].frame_ledger) EXPECT_EQ(d, cplx(0.0));
    }
  }
}

TEST_F(Execute, HadamardFrameEqualsPhaseSpaceRotation) {
  auto code = square_code(0.25, FockSpace(150));
  auto psi = gkp_superposition(code, 0.8, cplx(0.36, 0.48));
  auto framed = compile_readout(code, Axis::Z);
  framed.steps.insert(framed.steps.begin(), Step::hadamard_frame(1));
  auto a = execute(framed, psi, ExecMode::enumerate);
  StateVector rotated(psi.dims, rotation(code.fock, -kPi / 2).data * psi.amps);
  auto b = execute(compile_readout(code, Axis::Z), rotated, ExecMode::enumerate);
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(a[k].probability, b[k].probability, 1e-8);
  EXPECT_NEAR(std::abs(a[0].applied_g[0] - kI * code.a_z / 4.0), 0.0, 1e-15);
  EXPECT_EQ(a[0].quarter_turns[0], 1);
}

TEST_F(Protocol, PauliXFlipsZeroAndFactorsOut) {
  auto code = square_code(0.25, FockSpace(150));
  auto r = execute(compile_pauli(code, Axis::X), gkp_state(code, Logical::zero), ExecMode::enumerate);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r[0].outcomes[0], 0);
  EXPECT_NEAR(r[0].probability, 1.0, 1e-10);
  auto d = decode_logical(corrected(r[0]), code, Axis::Z);
  EXPECT_EQ(d.bit, 1);
  EXPECT_GE(d.confidence, 0.9);
}

TEST_F(Protocol, PauliZFlipsPlus) {
  auto code = square_code(0.25, FockSpace(150));
  auto r = execute(compile_pauli(code, Axis::Z), gkp_state(code, Logical::plus), ExecMode::enumerate);
  EXPECT_NEAR(r[0].probability, 1.0, 1e-10);
  auto d = decode_logical(corrected(r[0]), code, Axis::X);
  EXPECT_EQ(d.bit, 1);
}

TEST_F(Protocol, ReadoutOracleValues) {
  auto code = square_code(0.2, FockSpace(150));
  auto s = compile_readout(code, Axis::Z);
  auto one = execute(s, gkp_state(code, Logical::one), ExecMode::enumerate);
  EXPECT_NEAR(one[1].probability, 0.984534693786, 1e-6);
  EXPECT_GE(one[1].probability, 0.95);
  auto plus = execute(s, gkp_state(code, Logical::plus), ExecMode::enumerate);
  EXPECT_NEAR(plus[0].probability, 0.500000506586, 1e-6);
  EXPECT_NEAR(plus[0].probability, 0.5, 0.02);
  EXPECT_NEAR(total_probability(plus), 1.0, 1e-8);
}

TEST_F(Protocol, ReadoutShiftsFrame) {
  auto code = square_code(0.2, FockSpace(150));
  auto r = execute(compile_readout(code, Axis::X), gkp_state(code, Logical::plus), ExecMode::enumerate);
  for (const auto &x : r) EXPECT_EQ(x.frame_ledger[0], code.a_x / 4.0);
  EXPECT_GE(r[0].probability, 0.95);
}

TEST_F(Protocol, RotationByZeroIsIdentity) {
  auto code = square_code(0.25, FockSpace(150));
  auto r = execute(compile_rotation(code, Axis::Z, 0.0), gkp_state(code, Logical::zero), ExecMode::enumerate);
  for (const auto &x : r) EXPECT_GE(logical_fidelity(x.final_state, code, Logical::zero, x.frame_ledger[0]), 0.99);
  EXPECT_NEAR(total_probability(r), 1.0, 1e-8);
}

TEST_F(Protocol, TGateMatchesLogicalOracle) {
  auto code = square_code(0.25, FockSpace(150));
  auto r = execute(compile_rotation(code, Axis::Z, kPi / 4), gkp_state(code, Logical::plus), ExecMode::enumerate);
  ASSERT_EQ(r.size(), 2u);
  // R_z(pi/4)|+> = (e^{-i pi/8}|0> + e^{i pi/8}|1>)/sqrt(2)
  auto target = gkp_superposition(code, std::polar(1.0, -kPi / 8), std::polar(1.0, kPi / 8));
  EXPECT_NEAR(r[0].probability, 0.500000013580, 1e-6);
  EXPECT_NEAR(r[1].probability, 0.499999986420, 1e-6);
  for (const auto &x : r) EXPECT_GE(logical_fidelity(x.final_state, target, code.fock, x.frame_ledger[0]), 0.95);
}

TEST_F(Protocol, RotationBranchCorrectionTable) {
  EXPECT_EQ(kRotationBranchCorrection[0], 'I');
  EXPECT_EQ(kRotationBranchCorrection[1], 'I');
}

TEST_F(Protocol, SGateOnPlus) {
  auto code = square_code(0.25, FockSpace(150));
  auto r = execute(compile_rotation(code, Axis::Z, kPi / 2), gkp_state(code, Logical::plus), ExecMode::enumerate);
  auto target = gkp_superposition(code, std::polar(1.0, -kPi / 4), std::polar(1.0, kPi / 4));
  for (const auto &x : r) EXPECT_GE(logical_fidelity(x.final_state, target, code.fock, x.frame_ledger[0]), 0.95);
}

TEST_F(Protocol, CnotTruthTable) {
  auto code = square_code(0.3, FockSpace(80));
  auto z = gkp_state(code, Logical::zero), o = gkp_state(code, Logical::one);
  auto s = compile_cnot2(code);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto r = execute(s, product_state({a ? o : z, b ? o : z}), ExecMode::enumerate);
      EXPECT_NEAR(total_probability(r), 1.0, 1e-8);
      const double s1 = a ? -1 : 1, s2 = (a ^ b) ? -1 : 1;
      double agree = ensemble_average(r, [&](const TrajectoryRecord &x) {
        auto c = corrected(x);
        return 0.25 * (1 + s1 * pauli_string_expectation(c, code, "ZI") + s2 * pauli_string_expectation(c, code, "IZ") +
                       s1 * s2 * pauli_string_expectation(c, code, "ZZ"));
      });
      EXPECT_GE(agree, 0.9) << "row " << a << b;
    }
}

TEST_F(Protocol, CnotMakesBellPair) {
  auto code = square_code(0.3, FockSpace(80));
  auto r = execute(compile_cnot2(code), product_state({gkp_state(code, Logical::plus), gkp_state(code, Logical::zero)}),
                   ExecMode::enumerate);
  EXPECT_NEAR(total_probability(r), 1.0, 1e-8);
  for (const auto &x : r) {
    EXPECT_GE(pauli_string_expectation(corrected(x), code, "XX"), 0.8);
    EXPECT_GE(pauli_string_expectation(corrected(x), code, "ZZ"), 0.8);
  }
}

TEST_F(Protocol, ElectronToPhotonCnot) {
  // (H_e x D(-a_x/4)) CD(a_x/4) (H_e x I): electron |0> leaves the mode
  // alone, electron |1> applies X_L.
  auto code = square_code(0.25, FockSpace(150));
  auto psi = gkp_state(code, Logical::zero);
  for (int e = 0; e < 2; ++e) {
    auto s = make_schedule("cnot-e-ph", code, 1);
    s.steps = {e ? Step::new_electron(0.0, 1.0) : Step::new_electron_zero(), Step::hadamard_e(),
               Step::interact(code.a_x / 4.0, 1), Step::hadamard_e(), Step::laser(-code.a_x / 4.0, 1),
               Step::measure(MeasureBasis::z())};
    auto r = execute(s, psi, ExecMode::enumerate);
    double f = ensemble_average(r, [&](const TrajectoryRecord &x) {
      return logical_fidelity(x.final_state, code, e ? Logical::one : Logical::zero);
    });
    EXPECT_GE(f, 0.9) << "electron " << e;
  }
}

TEST_F(Protocol, GhzThreeModes) {
  auto code = square_code(0.3, FockSpace(40));
  auto z = gkp_state(code, Logical::zero);
  auto r = execute(compile_ghz(code, 3), product_state({z, z, z}), ExecMode::enumerate);
  EXPECT_NEAR(total_probability(r), 1.0, 1e-8);
  for (const char *p : {"XXX", "ZZI", "IZZ"}) {
    double v = ensemble_average(r, [&](const TrajectoryRecord &x) { return pauli_string_expectation(corrected(x), code, p); });
    EXPECT_GE(v, 0.8) << p;
  }
}

TEST_F(Protocol, GhzTwoModesIsBellPair) {
  auto code = square_code(0.3, FockSpace(80));
  auto z = gkp_state(code, Logical::zero);
  auto r = execute(compile_ghz(code, 2), product_state({z, z}), ExecMode::enumerate);
  EXPECT_NEAR(total_probability(r), 1.0, 1e-8);
  for (const char *p : {"XX", "ZZ"}) {
    double v = ensemble_average(r, [&](const TrajectoryRecord &x) { return pauli_string_expectation(corrected(x), code, p); });
    EXPECT_GE(v, 0.8) << p;
  }
  auto bell = execute(compile_cnot2(code), product_state({gkp_state(code, Logical::plus), z}), ExecMode::enumerate);
  Mat a = ensemble_tomography(r, code), b = ensemble_tomography(bell, code);
  EXPECT_GE(fidelity(Operator({4}, a), Operator({4}, b)), 0.95);
}

TEST_F(Protocol, GhzPhysicalCorrectionMatchesFrame) {
  auto code = square_code(0.3, FockSpace(40));
  auto z = gkp_state(code, Logical::zero);
  auto in = product_state({z, z});
  auto framed = execute(compile_ghz(code, 2), in, ExecMode::enumerate);
  auto physical = execute(compile_ghz(code, 2, true), in, ExecMode::enumerate);
  ASSERT_EQ(framed.size(), physical.size());
  for (std::size_t k = 0; k < framed.size(); ++k) {
    EXPECT_NEAR(framed[k].probability, physical[k].probability, 1e-9);
    EXPECT_NEAR(fidelity(normalized(corrected(framed[k])), normalized(physical[k].final_state)), 1.0, 1e-9);
  }
}

TEST_F(Protocol, GhzNeedsTwoModes) {
  auto code = square_code(0.3, FockSpace(40));
  EXPECT_THROW(compile_ghz(code, 1), Error);
  EXPECT_THROW(compile_cluster1d(code, 1), Error);
}

TEST_F(Protocol, GhzBudget) {
  auto code = square_code(0.3, FockSpace(40));
  try {
    compile_ghz(code, 6);
    FAIL() << "expected a budget error";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::budget);
    EXPECT_GT(e.required_bytes(), 0u);
  }
}

TEST_F(Protocol, ClusterThreeModes) {
  auto code = square_code(0.3, FockSpace(40));
  auto z = gkp_state(code, Logical::zero);
  auto r = execute(compile_cluster1d(code, 3), product_state({z, z, z}), ExecMode::enumerate);
  EXPECT_EQ(r.size(), 2u);
  EXPECT_NEAR(total_probability(r), 1.0, 1e-8);
  for (const char *p : {"XZI", "ZXZ", "IZX"}) {
    double v = ensemble_average(r, [&](const TrajectoryRecord &x) { return pauli_string_expectation(corrected(x), code, p); });
    EXPECT_GE(v, 0.75) << p;
  }
}

TEST_F(Protocol, ClusterTwoModesIsBellUpToHadamard) {
  auto code = square_code(0.3, FockSpace(40));
  auto z = gkp_state(code, Logical::zero);
  auto cl = execute(compile_cluster1d(code, 2), product_state({z, z}), ExecMode::enumerate);
  EXPECT_EQ(cl.size(), 2u);
  auto bell = execute(compile_cnot2(code), product_state({gkp_state(code, Logical::plus), z}), ExecMode::enumerate);
  Mat H = hadamard().data;
  Mat U = kron(Operator({2}, Mat::Identity(2, 2)), Operator({2}, H)).data;
  Mat b = ensemble_tomography(bell, code);
  Mat rotated = U * b * U.adjoint();
  EXPECT_GE(fidelity(Operator({4}, ensemble_tomography(cl, code)), Operator({4}, rotated)), 0.95);
}

TEST_F(ScheduleJson, RoundTripIsByteIdentical) {
  auto code = square_code(0.3, FockSpace(40));
  for (const auto &s : {compile_pauli(code, Axis::X), compile_readout(code, Axis::Z), compile_rotation(code, Axis::Z, kPi / 4),
                        compile_cnot2(code), compile_ghz(code, 3, true), compile_cluster1d(code, 3)}) {
    std::string a = serialize_schedule(s);
    std::string b = serialize_schedule(parse_schedule(a));
    EXPECT_EQ(a, b) << s.name;
  }
}

TEST_F(ScheduleJson, RoundTripExecutesIdentically) {
  auto code = square_code(0.3, FockSpace(40));
  auto s = compile_rotation(code, Axis::Z, 0.7);
  auto psi = gkp_state(code, Logical::plus);
  auto a = execute(s, psi, ExecMode::enumerate);
  auto b = execute(parse_schedule(serialize_schedule(s)), psi, ExecMode::enumerate);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_TRUE(a[k].final_state.amps == b[k].final_state.amps);
}

TEST_F(ScheduleJson, RejectsMalformed) {
  auto expect_validation = [](const std::string &text) {
    try {
      parse_schedule(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error &e) {
      EXPECT_EQ(e.kind(), ErrorKind::validation) << text;
    }
  };
  auto code = square_code(0.3, FockSpace(40));
  auto j = schedule_to_json(compile_readout(code, Axis::Z));
  expect_validation("{");
  auto bad = j;
  bad["steps"][0]["step"] = "Teleport";
  expect_validation(bad.dump());
  bad = j;
  bad["steps"][2]["feedforward"] = nlohmann::json::array({nlohmann::json::array()});
  expect_validation(bad.dump());
  bad = j;
  bad["steps"].erase(2);
  expect_validation(bad.dump());
}

TEST_F(ScheduleJson, ValidationRules) {
  auto code = square_code(0.3, FockSpace(40));
  auto s = make_schedule("bad", code, 1);
  s.steps = {Step::interact(code.a_x / 4.0, 1)};
  EXPECT_THROW(s.validate(), Error);
  s.steps = {Step::new_electron_zero(), Step::new_electron_zero()};
  EXPECT_THROW(s.validate(), Error);
  s.steps = {Step::new_electron_zero(), Step::interact(code.a_x / 4.0, 1)};
  EXPECT_THROW(s.validate(), Error);
  s.steps = {Step::new_electron_zero(), Step::interact(code.a_x / 4.0, 2), Step::measure(MeasureBasis::z())};
  EXPECT_THROW(s.validate(), Error);
  s.steps = {Step::new_electron_zero(), Step::measure(MeasureBasis::z(), {Step::new_electron_zero()})};
  EXPECT_THROW(s.validate(), Error);
  s.steps = {Step::new_electron(1.0, 1.0), Step::measure(MeasureBasis::z())};
  EXPECT_THROW(s.validate(), Error);
  s.steps = {Step::new_electron_zero(), Step::measure(MeasureBasis::z()), Step::new_electron_plus(),
             Step::measure(MeasureBasis::z())};
  EXPECT_NO_THROW(s.validate());
}

}  // namespace
}  // namespace gkpsim
