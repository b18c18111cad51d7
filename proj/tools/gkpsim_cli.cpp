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

#include "CLI11.hpp"
#include "gkpsim/runner.hpp"

#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;
namespace rn = gkpsim::runner;

constexpr const char *kVersion = "0.1.0";

constexpr const char *kDefaultsHelp = R"(Config keys and defaults:
  scenario            required: pauli readout rotation cnot2 ghz cluster1d qec comb-convergence wigner-dump
  delta               0.25         GKP envelope width, [0.05, 1]
  cutoff              150          Fock cutoff per mode, [8, 1000]
  seed                0            RNG seed (unsigned 64-bit)
  mode                enumerate    enumerate | sample
  axis                Z            X | Y | Z
  angle               pi/4         rotation angle, [-2pi, 2pi]
  input               0            logical input: 0 1 + -
  modes               scenario     ghz and cluster1d: >= 2 (default 3)
  physical_correction false        ghz: undo a_x/4 offsets with a second electron
  noise               {kind: displacement, sigma: 0.1, eta: 0.9}
  rounds              2            syndrome rounds
  trials              200          QEC trials
  syndrome            trimmed      trimmed | two-shot
  sigmas              [2, 4, 8]    comb envelope widths
  coupling            0.5          comb coupling g
  wigner              {extent: 5, points: 101}
  output_formats      [json, csv]
  out                 out          output directory

Exit codes: 0 ok, 1 validation, 2 resource budget, 3 numerical failure.)";

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw gkpsim::Error(gkpsim::ErrorKind::validation, "cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// "noise.sigma" -> j["noise"]["sigma"]
void set_dotted(json &j, const std::string &key, const json &value) {
  json *cur = &j;
  std::size_t start = 0, dot;
  while ((dot = key.find('.', start)) != std::string::npos) {
    cur = &(*cur)[key.substr(start, dot - start)];
    start = dot + 1;
  }
  (*cur)[key.substr(start)] = value;
}

json parse_value(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &) {
    return text;
  }
}

int report(const std::string &kind, const std::string &msg, int code, std::size_t bytes, const std::string &out_dir) {
  json e = rn::error_json(kind, msg, code, bytes);
  std::cerr << e.dump() << "\n";
  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
      rn::write_atomic(std::filesystem::path(out_dir) / "error.json", e.dump(2) + "\n");
    } catch (...) {
    }
  }
  return code;
}

int run_one(const json &doc, const std::string &out_dir, const json &meta) {
  try {
    rn::RunConfig c = rn::parse_config(doc.dump());
    json m = meta;
    m["started"] = utc_now();
    rn::run_to_directory(c, out_dir.empty() ? c.out : out_dir, m);
    return rn::kOk;
  } catch (const gkpsim::Error &e) {
    return report(gkpsim::to_string(e.kind()), e.what(), rn::exit_code_for(e.kind()), e.required_bytes(), out_dir);
  } catch (const std::bad_alloc &) {
    return report("budget", "out of memory", rn::kBudget, 0, out_dir);
  } catch (const std::exception &e) {
    return report("numerical", e.what(), rn::kNumerical, 0, out_dir);
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"gkpsim: GKP qubits driven by free-electron ancillas"};
  app.footer(kDefaultsHelp);
  app.require_subcommand(1);
  auto *run = app.add_subcommand("run", "Run one scenario from a JSON config");
  std::string config_path, out_dir, mode, sweep;
  std::uint64_t seed = 0;
  bool quiet = false;
  run->add_option("--config", config_path, "Path to the JSON config")->required();
  auto *seed_opt = run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Override the output directory");
  run->add_option("--mode", mode, "Override the execution mode")->check(CLI::IsMember({"enumerate", "sample"}));
  run->add_option("--sweep", sweep, "Repeat the run over key=v1,v2,... (one subdirectory per value)");
  run->add_flag("--quiet", quiet, "Suppress truncation warnings");
  CLI11_PARSE(app, argc, argv);

  gkpsim::warnings_enabled() = !quiet;
  json doc;
  try {
    doc = json::parse(read_file(config_path));
  } catch (const gkpsim::Error &e) {
    return report("validation", e.what(), rn::kValidation, 0, out_dir);
  } catch (const json::parse_error &e) {
    return report("validation", std::string("malformed JSON in ") + config_path + " at byte " + std::to_string(e.byte),
                  rn::kValidation, 0, out_dir);
  }
  if (!doc.is_object()) return report("validation", "config must be a JSON object", rn::kValidation, 0, out_dir);
  if (*seed_opt) doc["seed"] = seed;
  if (!mode.empty()) doc["mode"] = mode;
  if (!out_dir.empty()) doc["out"] = out_dir;

  json meta = {{"tool", "gkpsim"}, {"version", kVersion}, {"config_path", config_path}};
  if (sweep.empty()) return run_one(doc, out_dir, meta);

  auto eq = sweep.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == sweep.size())
    return report("validation", "--sweep expects key=v1,v2,...", rn::kValidation, 0, out_dir);
  const std::string key = sweep.substr(0, eq);
  const std::string base = out_dir.empty() ? (doc.contains("out") && doc["out"].is_string() ? doc["out"].get<std::string>() : "out")
                                           : out_dir;
  int worst = rn::kOk;
  std::stringstream values(sweep.substr(eq + 1));
  for (std::string v; std::getline(values, v, ',');) {
    json d = doc;
    set_dotted(d, key, parse_value(v));
    std::string dir = (std::filesystem::path(base) / (key + "=" + v)).string();
    d["out"] = dir;
    json m = meta;
    m["sweep"] = {{"key", key}, {"value", v}};
    worst = std::max(worst, run_one(d, dir, m));
  }
  return worst;
}
