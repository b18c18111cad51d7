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

// Scenario runner behind the command-line tool: strict config parsing,
// scenario dispatch, and atomic artifact writing.

#include "gkpsim/qec.hpp"

#include <filesystem>
#include <fstream>
#include <map>

namespace gkpsim::runner {

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kValidation = 1, kBudget = 2, kNumerical = 3 };

inline const std::vector<std::string> &scenario_names() {
  static const std::vector<std::string> names = {"pauli", "readout", "rotation", "cnot2", "ghz",
                                                 "cluster1d", "qec", "comb-convergence", "wigner-dump"};
  return names;
}

struct RunConfig {
  std::string scenario;
  double delta = 0.25;
  int cutoff = 150;
  std::uint64_t seed = 0;
  std::string mode = "enumerate";
  std::string axis = "Z";
  double angle = kPi / 4;
  std::string input = "0";
  int modes = 0;  // 0: scenario default
  bool physical_correction = false;
  std::string noise_kind = "displacement";
  double noise_sigma = 0.1;
  double noise_eta = 0.9;
  int rounds = 2;
  int trials = 200;
  std::string syndrome = "trimmed";
  std::vector<double> sigmas = {2.0, 4.0, 8.0};
  double coupling = 0.5;
  double wigner_extent = 5.0;
  int wigner_points = 101;
  std::vector<std::string> output_formats = {"json", "csv"};
  std::string out = "out";

  bool wants(const std::string &fmt) const {
    return std::find(output_formats.begin(), output_formats.end(), fmt) != output_formats.end();
  }
};

inline int default_modes(const std::string &scenario) {
  if (scenario == "ghz" || scenario == "cluster1d") return 3;
  if (scenario == "cnot2") return 2;
  return 1;
}

namespace detail {

using nlohmann::json;

[[noreturn]] inline void bad(const std::string &where, const std::string &what) {
  throw Error(ErrorKind::validation, where + ": " + what);
}

inline void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(where + it.key(), "unknown key");
}

inline double get_number(const json &j, const std::string &key, double lo, double hi, const std::string &where) {
  const json &v = j.at(key);
  if (!v.is_number()) bad(where + key, "expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || x > hi)
    bad(where + key, "must be in [" + json(lo).dump() + ", " + json(hi).dump() + "], got " + v.dump());
  return x;
}

inline long long get_int(const json &j, const std::string &key, long long lo, long long hi, const std::string &where) {
  const json &v = j.at(key);
  if (!v.is_number_integer()) bad(where + key, "expected an integer");
  long long x = v.get<long long>();
  if (x < lo || x > hi) bad(where + key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + v.dump());
  return x;
}

inline std::string get_choice(const json &j, const std::string &key, const std::vector<std::string> &choices,
                              const std::string &where) {
  const json &v = j.at(key);
  if (!v.is_string()) bad(where + key, "expected a string");
  std::string s = v.get<std::string>();
  if (std::find(choices.begin(), choices.end(), s) == choices.end()) {
    std::string list;
    for (const auto &c : choices) list += (list.empty() ? "" : ", ") + c;
    bad(where + key, "unknown value \"" + s + "\" (expected one of " + list + ")");
  }
  return s;
}

inline Axis axis_of(const std::string &s) { return s == "X" ? Axis::X : s == "Y" ? Axis::Y : Axis::Z; }

inline Logical logical_of(const std::string &s) {
  return s == "0" ? Logical::zero : s == "1" ? Logical::one : s == "+" ? Logical::plus : Logical::minus;
}

// Logical amplitudes (c0, c1) of a basis label.
inline std::array<cplx, 2> logical_coefficients(Logical l) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (l) {
    case Logical::zero: return {1.0, 0.0};
    case Logical::one: return {0.0, 1.0};
    case Logical::plus: return {r, r};
    case Logical::minus: return {r, -r};
  }
  return {1.0, 0.0};
}

inline json records_json(const std::vector<TrajectoryRecord> &recs) {
  json a = json::array();
  for (const auto &r : recs) {
    json fl = json::array();
    for (cplx f : r.frame_ledger) fl.push_back(complex_to_json(f));
    a.push_back({{"outcomes", r.outcomes}, {"probability", r.probability}, {"frame_ledger", fl}, {"leakage", r.leakage}});
  }
  return a;
}

// Expected decode bit of `l` in `basis`, or -1 when `l` is not an eigenstate.
inline int eigen_bit(Logical l, Axis basis) {
  if (basis == Axis::Z) return l == Logical::zero ? 0 : l == Logical::one ? 1 : -1;
  if (basis == Axis::X) return l == Logical::plus ? 0 : l == Logical::minus ? 1 : -1;
  return -1;
}

}  // namespace detail

// Parse and validate a JSON config. Missing keys take defaults; unknown keys
// and out-of-range values are rejected with the offending key in the message.
inline RunConfig parse_config(const std::string &text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::validation, std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::validation, "config must be a JSON object");
  detail::reject_unknown(j,
                         {"scenario", "delta", "cutoff", "seed", "mode", "axis", "angle", "input", "modes",
                          "physical_correction", "noise", "rounds", "trials", "syndrome", "sigmas", "coupling", "wigner",
                          "output_formats", "out"},
                         "");
  RunConfig c;
  if (!j.contains("scenario")) detail::bad("scenario", "required key missing");
  c.scenario = detail::get_choice(j, "scenario", scenario_names(), "");
  if (j.contains("delta")) c.delta = detail::get_number(j, "delta", 0.05, 1.0, "");
  if (j.contains("cutoff")) c.cutoff = static_cast<int>(detail::get_int(j, "cutoff", 8, 1000, ""));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) detail::bad("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("mode")) c.mode = detail::get_choice(j, "mode", {"enumerate", "sample"}, "");
  if (j.contains("axis")) c.axis = detail::get_choice(j, "axis", {"X", "Y", "Z"}, "");
  if (j.contains("angle")) c.angle = detail::get_number(j, "angle", -2 * kPi, 2 * kPi, "");
  if (j.contains("input")) c.input = detail::get_choice(j, "input", {"0", "1", "+", "-"}, "");
  c.modes = default_modes(c.scenario);
  if (j.contains("modes")) {
    if (!j["modes"].is_number_integer()) detail::bad("modes", "expected an integer");
    long long m = j["modes"].get<long long>();
    if (c.scenario == "ghz" || c.scenario == "cluster1d") {
      if (m < 2) throw Error(ErrorKind::validation, "modes must be ≥ 2");
      if (m > 12) detail::bad("modes", "must be at most 12");
    } else if (m != c.modes) {
      detail::bad("modes", "scenario " + c.scenario + " uses exactly " + std::to_string(c.modes) + " mode(s)");
    }
    c.modes = static_cast<int>(m);
  }
  if (j.contains("physical_correction")) {
    if (!j["physical_correction"].is_boolean()) detail::bad("physical_correction", "expected a boolean");
    c.physical_correction = j["physical_correction"].get<bool>();
  }
  if (j.contains("noise")) {
    const json &n = j["noise"];
    if (!n.is_object()) detail::bad("noise", "expected an object");
    detail::reject_unknown(n, {"kind", "sigma", "eta"}, "noise.");
    if (n.contains("kind")) c.noise_kind = detail::get_choice(n, "kind", {"displacement", "loss"}, "noise.");
    if (n.contains("sigma")) c.noise_sigma = detail::get_number(n, "sigma", 0.0, 2.0, "noise.");
    if (n.contains("eta")) {
      c.noise_eta = detail::get_number(n, "eta", 0.0, 1.0, "noise.");
      if (c.noise_eta == 0.0) detail::bad("noise.eta", "must be in (0, 1]");
    }
  }
  if (j.contains("rounds")) c.rounds = static_cast<int>(detail::get_int(j, "rounds", 0, 100, ""));
  if (j.contains("trials")) c.trials = static_cast<int>(detail::get_int(j, "trials", 1, 1000000, ""));
  if (j.contains("syndrome")) c.syndrome = detail::get_choice(j, "syndrome", {"trimmed", "two-shot"}, "");
  if (j.contains("sigmas")) {
    const json &s = j["sigmas"];
    if (!s.is_array() || s.empty()) detail::bad("sigmas", "expected a non-empty array of numbers");
    c.sigmas.clear();
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!s[k].is_number() || s[k].get<double>() <= 0.0 || s[k].get<double>() > 64.0)
        detail::bad("sigmas[" + std::to_string(k) + "]", "must be a number in (0, 64]");
      c.sigmas.push_back(s[k].get<double>());
    }
  }
  if (j.contains("coupling")) c.coupling = detail::get_number(j, "coupling", -kMaxCoupling, kMaxCoupling, "");
  if (j.contains("wigner")) {
    const json &w = j["wigner"];
    if (!w.is_object()) detail::bad("wigner", "expected an object");
    detail::reject_unknown(w, {"extent", "points"}, "wigner.");
    if (w.contains("extent")) c.wigner_extent = detail::get_number(w, "extent", 0.1, 20.0, "wigner.");
    if (w.contains("points")) c.wigner_points = static_cast<int>(detail::get_int(w, "points", 2, 1001, "wigner."));
  }
  if (j.contains("output_formats")) {
    const json &f = j["output_formats"];
    if (!f.is_array()) detail::bad("output_formats", "expected an array");
    c.output_formats.clear();
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (!f[k].is_string() || (f[k] != "json" && f[k] != "csv"))
        detail::bad("output_formats[" + std::to_string(k) + "]", "expected \"json\" or \"csv\"");
      c.output_formats.push_back(f[k].get<std::string>());
    }
  }
  if (j.contains("out")) {
    if (!j["out"].is_string() || j["out"].get<std::string>().empty()) detail::bad("out", "expected a non-empty string");
    c.out = j["out"].get<std::string>();
  }
  return c;
}

// Every field, defaults included. Re-parsing this yields the same config.
inline nlohmann::json resolved_json(const RunConfig &c) {
  using detail::json;
  return json{{"scenario", c.scenario},
              {"delta", c.delta},
              {"cutoff", c.cutoff},
              {"seed", c.seed},
              {"mode", c.mode},
              {"axis", c.axis},
              {"angle", c.angle},
              {"input", c.input},
              {"modes", c.modes},
              {"physical_correction", c.physical_correction},
              {"noise", {{"kind", c.noise_kind}, {"sigma", c.noise_sigma}, {"eta", c.noise_eta}}},
              {"rounds", c.rounds},
              {"trials", c.trials},
              {"syndrome", c.syndrome},
              {"sigmas", c.sigmas},
              {"coupling", c.coupling},
              {"wigner", {{"extent", c.wigner_extent}, {"points", c.wigner_points}}},
              {"output_formats", c.output_formats},
              {"out", c.out}};
}

struct RunOutput {
  nlohmann::json results;
  std::map<std::string, std::string> files;  // extra artifacts, name -> contents
};

namespace detail {

inline std::string grid_csv(const std::vector<double> &xs, const std::vector<double> &ys, const Eigen::MatrixXd &W) {
  std::ostringstream os;
  os.precision(17);
  os << "y\\x";
  for (double x : xs) os << ',' << x;
  os << '\n';
  for (std::size_t r = 0; r < ys.size(); ++r) {
    os << ys[r];
    for (std::size_t k = 0; k < xs.size(); ++k) os << ',' << W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
    os << '\n';
  }
  return os.str();
}

inline json stabilizer_block(const std::vector<TrajectoryRecord> &recs, const GkpCode &code,
                             const std::vector<std::string> &strings) {
  json per = json::array();
  std::vector<double> ens(strings.size(), 0.0);
  double den = 0.0;
  for (const auto &r : recs) {
    StateVector s = undo_frames(r.final_state, r.frame_ledger);
    json e = json::object();
    for (std::size_t k = 0; k < strings.size(); ++k) {
      double v = pauli_string_expectation(s, code, strings[k]);
      e[strings[k]] = v;
      ens[k] += r.probability * v;
    }
    den += r.probability;
    per.push_back({{"outcomes", r.outcomes}, {"probability", r.probability}, {"expectations", e}});
  }
  json ej = json::object();
  for (std::size_t k = 0; k < strings.size(); ++k) ej[strings[k]] = ens[k] / den;
  return {{"ensemble", ej}, {"branches", per}};
}

}  // namespace detail

inline RunOutput run(const RunConfig &c) {
  using detail::json;
  RunOutput out;
  json &res = out.results;
  std::mt19937_64 rng(c.seed);
  const ExecMode mode = c.mode == "sample" ? ExecMode::sample : ExecMode::enumerate;
  check_budget(static_cast<std::size_t>(c.cutoff) * static_cast<std::size_t>(c.cutoff));
  auto code = [&] { return square_code(c.delta, FockSpace(c.cutoff)); };
  const Axis axis = detail::axis_of(c.axis);
  const Logical input = detail::logical_of(c.input);

  if (c.scenario == "pauli") {
    GkpCode k = code();
    auto recs = execute(compile_pauli(k, axis), gkp_state(k, input), mode, rng);
    const Axis basis = axis == Axis::Z ? Axis::X : Axis::Z;
    const int expect0 = detail::eigen_bit(input, basis);
    double agree = 0.0;
    json dec = json::array();
    for (const auto &r : recs) {
      auto d = decode_logical(undo_frames(r.final_state, r.frame_ledger), k, basis);
      dec.push_back({{"bit", d.bit}, {"confidence", d.confidence}, {"ambiguous", d.ambiguous}});
      if (expect0 >= 0) agree += r.probability * (d.bit == (1 - expect0) ? d.confidence : 1.0 - d.confidence);
    }
    res["records"] = detail::records_json(recs);
    res["decode_basis"] = basis == Axis::Z ? "Z" : "X";
    res["decode"] = dec;
    res["decode_agreement"] = expect0 >= 0 ? json(agree) : json(nullptr);
  } else if (c.scenario == "readout") {
    GkpCode k = code();
    auto recs = execute(compile_readout(k, axis), gkp_state(k, input), mode, rng);
    std::array<double, 2> p = {0.0, 0.0};
    for (const auto &r : recs) p[r.outcomes[0]] += r.probability;
    res["records"] = detail::records_json(recs);
    res["outcome_probabilities"] = {p[0], p[1]};
    const int e = detail::eigen_bit(input, axis);
    res["success_probability"] = e >= 0 && mode == ExecMode::enumerate ? json(p[e]) : json(nullptr);
  } else if (c.scenario == "rotation") {
    GkpCode k = code();
    auto recs = execute(compile_rotation(k, axis, c.angle), gkp_state(k, input), mode, rng);
    auto c01 = detail::logical_coefficients(input);
    Eigen::Matrix2cd R = std::cos(c.angle / 2) * Eigen::Matrix2cd::Identity() -
                         kI * std::sin(c.angle / 2) * Eigen::Matrix2cd(pauli(axis));
    Eigen::Vector2cd v = R * Eigen::Vector2cd(c01[0], c01[1]);
    StateVector target = gkp_superposition(k, v(0), v(1));
    json br = json::array();
    for (const auto &r : recs)
      br.push_back({{"outcomes", r.outcomes},
                    {"probability", r.probability},
                    {"fidelity", fidelity(undo_frames(r.final_state, r.frame_ledger), target)}});
    res["records"] = detail::records_json(recs);
    res["branches"] = br;
  } else if (c.scenario == "cnot2") {
    GkpCode k = code();
    auto S = compile_cnot2(k);
    const StateVector z = gkp_state(k, Logical::zero), o = gkp_state(k, Logical::one);
    json rows = json::array();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        auto recs = execute(S, product_state({a ? o : z, b ? o : z}), mode, rng);
        const double s1 = a ? -1 : 1, s2 = (a ^ b) ? -1 : 1;
        double agree = ensemble_average(recs, [&](const TrajectoryRecord &r) {
          StateVector s = undo_frames(r.final_state, r.frame_ledger);
          return 0.25 * (1 + s1 * pauli_string_expectation(s, k, "ZI") + s2 * pauli_string_expectation(s, k, "IZ") +
                         s1 * s2 * pauli_string_expectation(s, k, "ZZ"));
        });
        rows.push_back({{"input", {a, b}}, {"expected", {a, a ^ b}}, {"agreement", agree}});
      }
    res["truth_table"] = rows;
    auto recs = execute(S, product_state({gkp_state(k, Logical::plus), z}), mode, rng);
    res["bell"] = detail::stabilizer_block(recs, k, {"XX", "ZZ"});
  } else if (c.scenario == "ghz" || c.scenario == "cluster1d") {
    const int M = c.modes;
    check_budget(2 * dim_product(Dims(M, c.cutoff)));
    GkpCode k = code();
    StateVector z = gkp_state(k, Logical::zero);
    StateVector init = product_state(std::vector<StateVector>(M, z));
    std::vector<std::string> strings;
    std::vector<TrajectoryRecord> recs;
    if (c.scenario == "ghz") {
      recs = execute(compile_ghz(k, M, c.physical_correction), init, mode, rng);
      strings.push_back(std::string(M, 'X'));
      for (int m = 0; m + 1 < M; ++m) {
        std::string s(M, 'I');
        s[m] = s[m + 1] = 'Z';
        strings.push_back(s);
      }
    } else {
      recs = execute(compile_cluster1d(k, M), init, mode, rng);
      for (int m = 0; m < M; ++m) {
        std::string s(M, 'I');
        s[m] = 'X';
        if (m > 0) s[m - 1] = 'Z';
        if (m + 1 < M) s[m + 1] = 'Z';
        strings.push_back(s);
      }
    }
    res["stabilizers"] = detail::stabilizer_block(recs, k, strings);
  } else if (c.scenario == "qec") {
    GkpCode k = code();
    NoiseSpec n;
    n.kind = c.noise_kind == "loss" ? NoiseSpec::Kind::loss : NoiseSpec::Kind::displacement;
    n.sigma = c.noise_sigma;
    n.eta = c.noise_eta;
    n.seed = c.seed;
    QecOptions opt;
    opt.scheme = c.syndrome == "two-shot" ? SyndromeScheme::two_shot : SyndromeScheme::trimmed;
    opt.initial = input;
    QecTrace tr = qec_experiment(k, n, c.rounds, c.trials, c.seed, opt);
    res["trace"] = {{"mean", tr.mean},
                    {"stderr", tr.stderr_},
                    {"mean_uncorrected", tr.mean_uncorrected},
                    {"stderr_uncorrected", tr.stderr_uncorrected}};
    res["paired_difference"] = {{"mean", tr.paired_mean}, {"stderr", tr.paired_stderr}};
    res["trials"] = tr.trials;
    if (c.wants("csv")) out.files["trace.csv"] = trace_csv(tr);
  } else if (c.scenario == "comb-convergence") {
    auto f = comb_convergence(cplx(c.coupling, 0.0), c.sigmas, FockSpace(c.cutoff));
    bool mono = true;
    for (std::size_t k = 1; k < f.size(); ++k) mono = mono && f[k] >= f[k - 1];
    res["sigmas"] = c.sigmas;
    res["fidelities"] = f;
    res["monotone"] = mono;
  } else if (c.scenario == "wigner-dump") {
    GkpCode k = code();
    auto xs = linspace(-c.wigner_extent, c.wigner_extent, c.wigner_points);
    Eigen::MatrixXd W = wigner(gkp_state(k, input), xs, xs);
    double h = xs.size() > 1 ? xs[1] - xs[0] : 0.0;
    res["grid"] = {{"points", c.wigner_points}, {"extent", c.wigner_extent}};
    res["origin_value"] = wigner(gkp_state(k, input), {0.0}, {0.0})(0, 0);
    res["integral"] = W.sum() * h * h;
    res["min"] = W.minCoeff();
    res["max"] = W.maxCoeff();
    if (c.wants("csv")) out.files["wigner_1.csv"] = detail::grid_csv(xs, xs, W);
  }
  return out;
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::input:
    case ErrorKind::validation:
    case ErrorKind::truncation: return kValidation;
    case ErrorKind::budget: return kBudget;
    default: return kNumerical;
  }
}

inline nlohmann::json error_json(const std::string &kind, const std::string &msg, int code, std::size_t required_bytes = 0) {
  nlohmann::json e = {{"kind", kind}, {"message", msg}, {"exit_code", code}};
  if (required_bytes) e["required_bytes"] = required_bytes;
  return {{"error", e}};
}

// Write via a sibling temp file and rename, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path &path, const std::string &contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::input, "cannot open " + tmp.string() + " for writing");
    f << contents;
    f.flush();
    if (!f) throw Error(ErrorKind::input, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// The output directory is left out of the embedded config so that the same
// run written to two places produces identical bytes.
inline std::string results_document(const RunConfig &c, const RunOutput &o) {
  nlohmann::json cfg = resolved_json(c);
  cfg.erase("out");
  nlohmann::json doc = {{"schema_version", kSchemaVersion}, {"config", cfg}, {"results", o.results}};
  return doc.dump(2) + "\n";
}

// Runs one config end to end and writes its artifacts into `dir`.
// `metadata` lands in metadata.json so the other files stay reproducible.
inline void run_to_directory(const RunConfig &c, const std::filesystem::path &dir, const nlohmann::json &metadata) {
  std::filesystem::create_directories(dir);
  RunOutput o = run(c);
  write_atomic(dir / "resolved-config.json", resolved_json(c).dump(2) + "\n");
  write_atomic(dir / "results.json", results_document(c, o));
  for (const auto &[name, text] : o.files) write_atomic(dir / name, text);
  write_atomic(dir / "metadata.json", metadata.dump(2) + "\n");
}

}  // namespace gkpsim::runner
