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

#include "json.hpp"

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace gkpsim {

enum class StepKind { Interact, ElectronGate, MeasureElectron, LaserDisplace, NewElectron, FrameShift, HadamardFrame };
enum class GateAxis { X, Z, H };

struct Step {
  StepKind kind = StepKind::Interact;
  int mode = 0;              // photonic mode, 1-based
  cplx value{0.0, 0.0};      // g, laser alpha, or frame offset
  GateAxis gate = GateAxis::H;
  double angle = 0.0;
  MeasureBasis basis;
  std::array<cplx, 2> initial{cplx(1.0), cplx(0.0)};
  std::array<std::vector<Step>, 2> feedforward;  // continuation per outcome

  static Step interact(cplx g, int mode) {
    Step s;
    s.kind = StepKind::Interact;
    s.value = g;
    s.mode = mode;
    return s;
  }
  static Step electron_gate(GateAxis axis, double angle = 0.0) {
    Step s;
    s.kind = StepKind::ElectronGate;
    s.gate = axis;
    s.angle = angle;
    return s;
  }
  static Step hadamard_e() { return electron_gate(GateAxis::H); }
  static Step measure(MeasureBasis b, std::vector<Step> on_plus = {}, std::vector<Step> on_minus = {}) {
    Step s;
    s.kind = StepKind::MeasureElectron;
    s.basis = b;
    s.feedforward = {std::move(on_plus), std::move(on_minus)};
    return s;
  }
  static Step laser(cplx alpha, int mode) {
    Step s;
    s.kind = StepKind::LaserDisplace;
    s.value = alpha;
    s.mode = mode;
    return s;
  }
  static Step new_electron(cplx a, cplx b) {
    Step s;
    s.kind = StepKind::NewElectron;
    s.initial = {a, b};
    return s;
  }
  static Step new_electron_zero() { return new_electron(1.0, 0.0); }
  static Step new_electron_plus() { return new_electron(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)); }
  static Step frame_shift(cplx delta, int mode) {
    Step s;
    s.kind = StepKind::FrameShift;
    s.value = delta;
    s.mode = mode;
    return s;
  }
  // Logical Hadamard on `mode` as a frame change: every later g, laser
  // amplitude and frame offset on that mode is multiplied by i.
  static Step hadamard_frame(int mode) {
    Step s;
    s.kind = StepKind::HadamardFrame;
    s.mode = mode;
    return s;
  }
};

struct Schedule {
  std::string name;
  int modes = 1;
  GkpCode code;
  std::vector<Step> steps;
  std::vector<cplx> frame_ledger;  // starting offsets per mode

  void validate() const;
};

struct TrajectoryRecord {
  std::vector<int> outcomes;
  double probability = 1.0;
  StateVector final_state;
  std::vector<cplx> frame_ledger;
  std::vector<int> quarter_turns;  // Hadamard frames per mode, mod 4
  std::vector<cplx> applied_g;     // frame-adjusted interaction amplitudes, in order
  double leakage = 0.0;            // norm lost to Fock truncation before renormalizing
};

namespace detail {

inline void validate_steps(const std::vector<Step> &steps, int modes, bool &in_flight, int depth) {
  for (const auto &s : steps) {
    switch (s.kind) {
      case StepKind::Interact:
      case StepKind::LaserDisplace:
      case StepKind::FrameShift:
      case StepKind::HadamardFrame:
        if (s.mode < 1 || s.mode > modes)
          throw Error(ErrorKind::validation, "step targets mode " + std::to_string(s.mode) + " outside 1.." + std::to_string(modes));
        break;
      default: break;
    }
    switch (s.kind) {
      case StepKind::Interact:
      case StepKind::ElectronGate:
        if (!in_flight) throw Error(ErrorKind::validation, "electron step with no electron in flight");
        break;
      case StepKind::NewElectron:
        if (in_flight) throw Error(ErrorKind::validation, "new electron while another is still in flight");
        if (std::abs(std::norm(s.initial[0]) + std::norm(s.initial[1]) - 1.0) > 1e-12)
          throw Error(ErrorKind::validation, "electron initial state is not normalized");
        in_flight = true;
        break;
      case StepKind::MeasureElectron: {
        if (!in_flight) throw Error(ErrorKind::validation, "measurement with no electron in flight");
        if (depth > 8) throw Error(ErrorKind::validation, "feedforward nesting too deep");
        for (int o = 0; o < 2; ++o) {
          bool f = false;
          validate_steps(s.feedforward[o], modes, f, depth + 1);
          if (f) throw Error(ErrorKind::validation, "feedforward continuation leaves an electron in flight");
        }
        in_flight = false;
        break;
      }
      default: break;
    }
  }
}

}  // namespace detail

inline void Schedule::validate() const {
  if (modes < 1) throw Error(ErrorKind::validation, "schedule needs at least one mode");
  if (!frame_ledger.empty() && static_cast<int>(frame_ledger.size()) != modes)
    throw Error(ErrorKind::validation, "frame ledger size differs from mode count");
  bool in_flight = false;
  detail::validate_steps(steps, modes, in_flight, 0);
  if (in_flight) throw Error(ErrorKind::validation, "schedule ends with an unmeasured electron");
}

// ---- compilers ----

inline Schedule make_schedule(const std::string &name, const GkpCode &code, int modes) {
  Schedule s;
  s.name = name;
  s.code = code;
  s.modes = modes;
  s.frame_ledger.assign(modes, cplx(0.0));
  return s;
}

// |+>_e is an eigenbranch of CD, so the electron factors out and the mode
// gets D(a_i/2) deterministically.
inline std::vector<Step> pauli_steps(const GkpCode &code, Axis i, int mode, double sign = 1.0) {
  return {Step::new_electron_plus(), Step::interact(sign * code.lattice(i) / 2.0, mode), Step::measure(MeasureBasis::phase(0.0))};
}

inline Schedule compile_pauli(const GkpCode &code, Axis i, int mode = 1, int modes = 1) {
  auto s = make_schedule("pauli", code, modes);
  s.steps = pauli_steps(code, i, mode);
  s.validate();
  return s;
}

// Outcome 0 <-> +1 eigenvalue of the logical Pauli.
inline Schedule compile_readout(const GkpCode &code, Axis i, int mode = 1, int modes = 1) {
  auto s = make_schedule("readout", code, modes);
  cplx g = code.lattice(i) / 4.0;
  s.steps = {Step::new_electron_zero(), Step::interact(g, mode), Step::measure(MeasureBasis::z()), Step::frame_shift(g, mode)};
  s.validate();
  return s;
}

// Branch byproduct left by the "-" outcome once the inline Pauli pass has run,
// as a logical Pauli on the target mode (I = none). The pass D(a_i/2) cancels
// the D(-a_i/2) factor exactly, so both entries are trivial.
inline constexpr std::array<char, 2> kRotationBranchCorrection = {'I', 'I'};

inline Schedule compile_rotation(const GkpCode &code, Axis i, double phi, int mode = 1, int modes = 1) {
  auto s = make_schedule("rotation", code, modes);
  cplx g = code.lattice(i) / 4.0;
  s.steps = {Step::new_electron_zero(), Step::interact(g, mode),
             Step::measure(MeasureBasis::phase(phi), {}, pauli_steps(code, i, mode)), Step::frame_shift(g, mode)};
  s.validate();
  return s;
}

inline Schedule compile_cnot2(const GkpCode &code) {
  auto s = make_schedule("cnot2", code, 2);
  cplx gz = code.a_z / 4.0, gx = code.a_x / 4.0;
  s.steps = {Step::new_electron_zero(), Step::interact(gz, 1), Step::hadamard_e(), Step::interact(gx, 2),
             Step::measure(MeasureBasis::z(), {}, pauli_steps(code, Axis::Z, 1)), Step::frame_shift(gz, 1),
             Step::frame_shift(gx, 2)};
  s.validate();
  return s;
}

// One electron, H-conjugated a_x/4 couplings to every mode, final H and Z
// measurement with a Z_L fix on mode 1. The a_x/4 offsets go to the frame
// ledger, or with physical_correction to a |+>_e pass at g = -a_x/4.
inline Schedule compile_ghz(const GkpCode &code, int M, bool physical_correction = false) {
  if (M < 2) throw Error(ErrorKind::validation, "GHZ needs at least 2 modes");
  check_budget(2 * dim_product(Dims(M, code.cutoff())));
  auto s = make_schedule("ghz", code, M);
  cplx g = code.a_x / 4.0;
  s.steps = {Step::new_electron_zero(), Step::hadamard_e()};
  for (int m = 1; m <= M; ++m) {
    s.steps.push_back(Step::hadamard_e());
    s.steps.push_back(Step::interact(g, m));
    s.steps.push_back(Step::hadamard_e());
  }
  s.steps.push_back(Step::hadamard_e());
  s.steps.push_back(Step::measure(MeasureBasis::z(), {}, pauli_steps(code, Axis::Z, 1)));
  if (physical_correction) {
    s.steps.push_back(Step::new_electron_plus());
    for (int m = 1; m <= M; ++m) s.steps.push_back(Step::interact(-g, m));
    s.steps.push_back(Step::measure(MeasureBasis::phase(0.0)));
  } else {
    for (int m = 1; m <= M; ++m) s.steps.push_back(Step::frame_shift(g, m));
  }
  s.validate();
  return s;
}

// Chain of a_x/4 couplings with an electron Hadamard between neighbours;
// the Z measurement's "-" branch gets Z_L on the last mode.
inline Schedule compile_cluster1d(const GkpCode &code, int M) {
  if (M < 2) throw Error(ErrorKind::validation, "cluster chain needs at least 2 modes");
  check_budget(2 * dim_product(Dims(M, code.cutoff())));
  auto s = make_schedule("cluster1d", code, M);
  cplx g = code.a_x / 4.0;
  s.steps = {Step::new_electron_zero()};
  for (int m = 1; m <= M; ++m) {
    if (m > 1) s.steps.push_back(Step::hadamard_e());
    s.steps.push_back(Step::interact(g, m));
  }
  s.steps.push_back(Step::measure(MeasureBasis::z(), {}, pauli_steps(code, Axis::Z, M)));
  for (int m = 1; m <= M; ++m) s.steps.push_back(Step::frame_shift(g, m));
  s.validate();
  return s;
}

// ---- execution ----

enum class ExecMode { enumerate, sample };

namespace detail {

struct ExecState {
  StateVector state;  // photonic, or electron (x) photonic while in flight
  bool in_flight = false;
  std::vector<int> outcomes;
  double probability = 1.0;
  std::vector<cplx> frames;
  std::vector<int> turns;
  std::vector<cplx> applied_g;
  double leakage = 0.0;
};

inline cplx turn_factor(int turns) {
  static const cplx q[4] = {1.0, kI, -1.0, -kI};
  return q[((turns % 4) + 4) % 4];
}

inline Mat electron_gate_matrix(const Step &s) {
  switch (s.gate) {
    case GateAxis::X: return electron_rotation(Axis::X, s.angle).data;
    case GateAxis::Z: return electron_rotation(Axis::Z, s.angle).data;
    case GateAxis::H: return hadamard().data;
  }
  return hadamard().data;
}

struct Runner {
  ExecMode mode;
  std::mt19937_64 *rng;
  std::vector<TrajectoryRecord> out;

  void run(std::vector<Step> program, std::size_t pc, ExecState st) {
    for (; pc < program.size(); ++pc) {
      const Step &s = program[pc];
      switch (s.kind) {
        case StepKind::NewElectron:
          st.state = with_electron(st.state, s.initial[0], s.initial[1]);
          st.in_flight = true;
          break;
        case StepKind::Interact: {
          cplx g = s.value * turn_factor(st.turns[s.mode - 1]);
          st.applied_g.push_back(g);
          apply_interaction(st.state, CouplingSpec{g, s.mode, Representation::qubit});
          break;
        }
        case StepKind::ElectronGate:
          apply_local(electron_gate_matrix(s), st.state, 0);
          break;
        case StepKind::LaserDisplace: {
          cplx a = s.value * turn_factor(st.turns[s.mode - 1]);
          int sub = st.in_flight ? s.mode : s.mode - 1;
          apply_local(*DisplacementCache::global().get(st.state.dims[sub], a), st.state, sub);
          break;
        }
        case StepKind::FrameShift:
          st.frames[s.mode - 1] += s.value * turn_factor(st.turns[s.mode - 1]);
          break;
        case StepKind::HadamardFrame:
          st.turns[s.mode - 1] = (st.turns[s.mode - 1] + 1) % 4;
          break;
        case StepKind::MeasureElectron: {
          st.leakage += std::max(0.0, 1.0 - st.state.amps.squaredNorm());
          auto branches = electron_branches(st.state, s.basis);
          std::vector<Step> rest(program.begin() + pc + 1, program.end());
          auto continue_with = [&](const ElectronBranch &b) {
            ExecState next = st;
            next.state = *b.collapsed;
            next.in_flight = false;
            next.outcomes.push_back(b.outcome);
            next.probability *= b.probability;
            std::vector<Step> prog = s.feedforward[b.outcome];
            prog.insert(prog.end(), rest.begin(), rest.end());
            run(std::move(prog), 0, std::move(next));
          };
          if (mode == ExecMode::enumerate) {
            for (const auto &b : branches)
              if (b.collapsed) continue_with(b);
          } else {
            double u = uniform01(*rng);
            int o = (u < branches[0].probability) ? 0 : 1;
            if (!branches[o].collapsed) o = 1 - o;
            continue_with(branches[o]);
          }
          return;
        }
      }
    }
    TrajectoryRecord r;
    r.outcomes = st.outcomes;
    r.probability = st.probability;
    st.leakage += std::max(0.0, 1.0 - st.state.amps.squaredNorm());
    r.final_state = std::move(st.state);
    r.frame_ledger = st.frames;
    r.quarter_turns = st.turns;
    r.applied_g = st.applied_g;
    r.leakage = st.leakage;
    out.push_back(std::move(r));
  }
};

}  // namespace detail

// Runs a schedule on a photonic register (no electron). Enumerate mode walks
// every outcome depth first, 0 before 1, so records come out in
// lexicographic outcome order. Branches below 1e-14 are pruned.
inline std::vector<TrajectoryRecord> execute(const Schedule &schedule, const StateVector &initial, ExecMode mode,
                                             std::mt19937_64 &rng) {
  schedule.validate();
  if (static_cast<int>(initial.dims.size()) != schedule.modes)
    throw Error(ErrorKind::input, "initial state has " + std::to_string(initial.dims.size()) + " modes, schedule expects " +
                                      std::to_string(schedule.modes));
  detail::ExecState st;
  st.state = initial;
  st.frames = schedule.frame_ledger.empty() ? std::vector<cplx>(schedule.modes, 0.0) : schedule.frame_ledger;
  st.turns.assign(schedule.modes, 0);
  detail::Runner runner{mode, &rng, {}};
  runner.run(schedule.steps, 0, std::move(st));
  return runner.out;
}

inline std::vector<TrajectoryRecord> execute(const Schedule &schedule, const StateVector &initial, ExecMode mode,
                                             std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  return execute(schedule, initial, mode, rng);
}

// Product register from single-mode states.
inline StateVector product_state(const std::vector<StateVector> &parts) {
  if (parts.empty()) throw Error(ErrorKind::input, "empty register");
  StateVector s = parts[0];
  for (std::size_t k = 1; k < parts.size(); ++k) s = kron(s, parts[k]);
  return s;
}

// Probability-weighted mean of a per-record quantity.
template <class F>
double ensemble_average(const std::vector<TrajectoryRecord> &recs, F f) {
  double num = 0.0, den = 0.0;
  for (const auto &r : recs) {
    num += r.probability * f(r);
    den += r.probability;
  }
  return num / den;
}

// ---- JSON ----

inline nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const nlohmann::json &j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::validation, "complex numbers must be [re, im] arrays");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline const char *to_string(StepKind k) {
  switch (k) {
    case StepKind::Interact: return "Interact";
    case StepKind::ElectronGate: return "ElectronGate";
    case StepKind::MeasureElectron: return "MeasureElectron";
    case StepKind::LaserDisplace: return "LaserDisplace";
    case StepKind::NewElectron: return "NewElectron";
    case StepKind::FrameShift: return "FrameShift";
    case StepKind::HadamardFrame: return "HadamardFrame";
  }
  return "?";
}

inline nlohmann::json step_to_json(const Step &s) {
  nlohmann::json j;
  j["step"] = to_string(s.kind);
  switch (s.kind) {
    case StepKind::Interact:
      j["g"] = complex_to_json(s.value);
      j["mode"] = s.mode;
      break;
    case StepKind::LaserDisplace:
      j["alpha"] = complex_to_json(s.value);
      j["mode"] = s.mode;
      break;
    case StepKind::FrameShift:
      j["delta"] = complex_to_json(s.value);
      j["mode"] = s.mode;
      break;
    case StepKind::HadamardFrame: j["mode"] = s.mode; break;
    case StepKind::ElectronGate:
      j["axis"] = s.gate == GateAxis::X ? "X" : s.gate == GateAxis::Z ? "Z" : "H";
      j["angle"] = s.angle;
      break;
    case StepKind::NewElectron: j["initial"] = {complex_to_json(s.initial[0]), complex_to_json(s.initial[1])}; break;
    case StepKind::MeasureElectron: {
      j["basis"] = s.basis.kind == MeasureBasis::Kind::Z ? "Z" : "phase";
      j["phi"] = s.basis.phi;
      nlohmann::json ff = nlohmann::json::array();
      for (int o = 0; o < 2; ++o) {
        nlohmann::json lst = nlohmann::json::array();
        for (const auto &c : s.feedforward[o]) lst.push_back(step_to_json(c));
        ff.push_back(lst);
      }
      j["feedforward"] = ff;
      break;
    }
  }
  return j;
}

inline Step step_from_json(const nlohmann::json &j) {
  const std::string k = j.at("step").get<std::string>();
  Step s;
  if (k == "Interact") {
    s = Step::interact(complex_from_json(j.at("g")), j.at("mode").get<int>());
  } else if (k == "LaserDisplace") {
    s = Step::laser(complex_from_json(j.at("alpha")), j.at("mode").get<int>());
  } else if (k == "FrameShift") {
    s = Step::frame_shift(complex_from_json(j.at("delta")), j.at("mode").get<int>());
  } else if (k == "HadamardFrame") {
    s = Step::hadamard_frame(j.at("mode").get<int>());
  } else if (k == "ElectronGate") {
    std::string ax = j.at("axis").get<std::string>();
    GateAxis a = ax == "X" ? GateAxis::X : ax == "Z" ? GateAxis::Z : ax == "H" ? GateAxis::H
                                                                               : throw Error(ErrorKind::validation, "bad gate axis " + ax);
    s = Step::electron_gate(a, j.at("angle").get<double>());
  } else if (k == "NewElectron") {
    const auto &in = j.at("initial");
    s = Step::new_electron(complex_from_json(in.at(0)), complex_from_json(in.at(1)));
  } else if (k == "MeasureElectron") {
    std::string b = j.at("basis").get<std::string>();
    MeasureBasis mb = b == "Z" ? MeasureBasis::z() : MeasureBasis::phase(j.at("phi").get<double>());
    if (b != "Z" && b != "phase") throw Error(ErrorKind::validation, "bad measurement basis " + b);
    std::array<std::vector<Step>, 2> ff;
    const auto &f = j.at("feedforward");
    if (!f.is_array() || f.size() != 2) throw Error(ErrorKind::validation, "feedforward needs one list per outcome");
    for (int o = 0; o < 2; ++o)
      for (const auto &c : f[o]) ff[o].push_back(step_from_json(c));
    s = Step::measure(mb, ff[0], ff[1]);
  } else {
    throw Error(ErrorKind::validation, "unknown step kind " + k);
  }
  return s;
}

inline nlohmann::json schedule_to_json(const Schedule &s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["modes"] = s.modes;
  j["code"] = {{"delta", s.code.delta},
               {"cutoff", s.code.fock.cutoff},
               {"guard", s.code.fock.guard},
               {"a_x", complex_to_json(s.code.a_x)},
               {"a_y", complex_to_json(s.code.a_y)},
               {"a_z", complex_to_json(s.code.a_z)}};
  nlohmann::json steps = nlohmann::json::array();
  for (const auto &st : s.steps) steps.push_back(step_to_json(st));
  j["steps"] = steps;
  nlohmann::json fl = nlohmann::json::array();
  for (auto d : s.frame_ledger) fl.push_back(complex_to_json(d));
  j["frame_ledger"] = fl;
  return j;
}

inline Schedule schedule_from_json(const nlohmann::json &j) {
  Schedule s;
  s.name = j.at("name").get<std::string>();
  s.modes = j.at("modes").get<int>();
  const auto &c = j.at("code");
  s.code.delta = c.at("delta").get<double>();
  s.code.fock = FockSpace(c.at("cutoff").get<int>(), c.at("guard").get<int>());
  s.code.a_x = complex_from_json(c.at("a_x"));
  s.code.a_y = complex_from_json(c.at("a_y"));
  s.code.a_z = complex_from_json(c.at("a_z"));
  for (const auto &st : j.at("steps")) s.steps.push_back(step_from_json(st));
  for (const auto &d : j.at("frame_ledger")) s.frame_ledger.push_back(complex_from_json(d));
  s.validate();
  return s;
}

inline std::string serialize_schedule(const Schedule &s) { return schedule_to_json(s).dump(2); }

inline Schedule parse_schedule(const std::string &text) {
  try {
    return schedule_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::validation, std::string("schedule JSON: ") + e.what());
  }
}

}  // namespace gkpsim
