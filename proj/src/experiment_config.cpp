// Copyright 2026 The piqec Authors
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

#include "piqec/experiment_config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "piqec/errors.hpp"

namespace piqec {

namespace {

using Keys = std::set<std::string>;

YAML::Node parse(std::istream& in) {
  try {
    YAML::Node root = YAML::Load(in);
    if (root.IsNull()) return YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("<root>", "expected a mapping");
    return root;
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("YAML syntax: ") + e.what());
  }
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const YAML::Node& map, const Keys& known, const std::string& prefix) {
  for (const auto& kv : map) {
    const std::string k = kv.first.as<std::string>();
    if (!known.count(k)) throw ConfigError(join(prefix, k), "unknown key");
  }
}

YAML::Node section(const YAML::Node& root, const std::string& key, const Keys& known) {
  const YAML::Node n = root[key];
  if (!n) return n;
  if (!n.IsMap()) throw ConfigError(key, "expected a mapping");
  reject_unknown(n, known, key);
  return n;
}

template <class T>
void read(const YAML::Node& map, const std::string& key, const std::string& full, T& out) {
  if (!map) return;
  const YAML::Node n = map[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(full, "wrong type");
  }
}

void read_half(const YAML::Node& map, const std::string& key, const std::string& full,
               HalfInt& out) {
  double v = 0.0;
  if (!map || !map[key]) return;
  read(map, key, full, v);
  try {
    out = HalfInt::from_double(v);
  } catch (const std::domain_error&) {
    throw ConfigError(full, "must be an integer or half-integer");
  }
}

const Keys kRateKeys{"gamma_m1", "gamma_0", "gamma_p1", "Gamma_m1", "Gamma_0", "Gamma_p1",
                     "gamma_d"};

void read_rates(const YAML::Node& root, NoiseModel& noise) {
  const YAML::Node r = section(root, "rates", kRateKeys);
  const char* suffix[3] = {"m1", "0", "p1"};
  for (int i = 0; i < 3; ++i) {
    const std::string s = suffix[i];
    read(r, "gamma_" + s, "rates.gamma_" + s, noise.individual[i]);
    read(r, "Gamma_" + s, "rates.Gamma_" + s, noise.collective[i]);
  }
  read(r, "gamma_d", "rates.gamma_d", noise.loss);
}

nlohmann::json rates_json(const NoiseModel& n) {
  return {{"gamma_m1", n.individual[0]}, {"gamma_0", n.individual[1]},
          {"gamma_p1", n.individual[2]}, {"Gamma_m1", n.collective[0]},
          {"Gamma_0", n.collective[1]},  {"Gamma_p1", n.collective[2]},
          {"gamma_d", n.loss}};
}

std::ifstream open(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("--config", "cannot open " + file.string());
  return in;
}

}  // namespace

MemoryConfig load_memory_config(std::istream& in, std::string* output) {
  const YAML::Node root = parse(in);
  reject_unknown(root,
                 {"n_spins", "initial_j", "code", "rates", "dt", "t_max", "sample_dt", "n_traj",
                  "seed", "threads", "qec", "output"},
                 "");
  MemoryConfig c;
  read(root, "n_spins", "n_spins", c.n_spins);
  if (root["initial_j"]) {
    HalfInt j;
    read_half(root, "initial_j", "initial_j", j);
    c.initial_j = j;
  }
  const YAML::Node code = section(root, "code", {"m1", "m2"});
  read_half(code, "m1", "code.m1", c.m1);
  read_half(code, "m2", "code.m2", c.m2);
  read_rates(root, c.noise);
  read(root, "dt", "dt", c.dt);
  read(root, "t_max", "t_max", c.t_max);
  read(root, "sample_dt", "sample_dt", c.sample_dt);
  read(root, "n_traj", "n_traj", c.n_traj);
  read(root, "seed", "seed", c.seed);
  read(root, "threads", "threads", c.threads);
  const YAML::Node qec = section(root, "qec", {"enabled", "dt_qec", "teleport", "j_threshold"});
  read(qec, "enabled", "qec.enabled", c.qec_enabled);
  read(qec, "dt_qec", "qec.dt_qec", c.dt_qec);
  read(qec, "teleport", "qec.teleport", c.teleport);
  read_half(qec, "j_threshold", "qec.j_threshold", c.j_threshold);
  if (output) read(root, "output", "output", *output);
  c.validate();
  return c;
}

SensingConfig load_sensing_config(std::istream& in, std::string* output) {
  const YAML::Node root = parse(in);
  reject_unknown(root,
                 {"n_spins", "rates", "omega", "dt", "t_max", "sample_dt", "n_traj", "seed",
                  "threads", "probe", "qec", "reference_curves", "output"},
                 "");
  SensingConfig c;
  read(root, "n_spins", "n_spins", c.n_spins);
  read_rates(root, c.noise);
  read(root, "omega", "omega", c.omega);
  read(root, "dt", "dt", c.dt);
  read(root, "t_max", "t_max", c.t_max);
  read(root, "sample_dt", "sample_dt", c.sample_dt);
  read(root, "n_traj", "n_traj", c.n_traj);
  read(root, "seed", "seed", c.seed);
  read(root, "threads", "threads", c.threads);
  if (const YAML::Node p = root["probe"]) {
    if (p.IsScalar()) {
      c.probes = {p.as<std::string>()};
    } else {
      read(root, "probe", "probe", c.probes);
    }
  }
  const YAML::Node qec = section(root, "qec", {"enabled"});
  read(qec, "enabled", "qec.enabled", c.qec_enabled);
  read(root, "reference_curves", "reference_curves", c.reference_curves);
  if (output) read(root, "output", "output", *output);
  c.validate();
  return c;
}

MemoryConfig load_memory_config(const std::filesystem::path& file, std::string* output) {
  std::ifstream in = open(file);
  return load_memory_config(in, output);
}

SensingConfig load_sensing_config(const std::filesystem::path& file, std::string* output) {
  std::ifstream in = open(file);
  return load_sensing_config(in, output);
}

std::string resolved_json(const MemoryConfig& c) {
  const HalfInt j = c.initial_j.value_or(HalfInt::from_twice(c.n_spins));
  nlohmann::json doc = {
      {"experiment", "memory"},
      {"n_spins", c.n_spins},
      {"initial_j", j.value()},
      {"code", {{"m1", c.m1.value()}, {"m2", c.m2.value()}}},
      {"rates", rates_json(c.noise)},
      {"dt", c.dt > 0.0 ? c.dt : default_dt(c.noise)},
      {"t_max", c.t_max},
      {"sample_dt", c.sample_dt},
      {"n_traj", c.n_traj},
      {"seed", c.seed},
      {"threads", c.threads},
      {"qec",
       {{"enabled", c.qec_enabled},
        {"dt_qec", c.dt_qec},
        {"teleport", c.teleport},
        {"j_threshold", c.j_threshold.value()}}}};
  return doc.dump(2) + "\n";
}

std::string resolved_json(const SensingConfig& c) {
  nlohmann::json doc = {{"experiment", "sensing"},
                        {"n_spins", c.n_spins},
                        {"rates", rates_json(c.noise)},
                        {"omega", c.omega},
                        {"dt", c.dt > 0.0 ? c.dt : default_dt(c.noise)},
                        {"t_max", c.t_max},
                        {"sample_dt", c.sample_dt},
                        {"n_traj", c.n_traj},
                        {"seed", c.seed},
                        {"threads", c.threads},
                        {"probe", c.probes},
                        {"qec", {{"enabled", c.qec_enabled}}},
                        {"reference_curves", c.reference_curves}};
  return doc.dump(2) + "\n";
}

}  // namespace piqec
