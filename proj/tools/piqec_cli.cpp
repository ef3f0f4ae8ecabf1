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

// piqec command line: experiments, oracle verification, code search and
// coefficient dumps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "piqec/codes.hpp"
#include "piqec/coefficients.hpp"
#include "piqec/errors.hpp"
#include "piqec/experiment_config.hpp"
#include "piqec/recovery.hpp"
#include "piqec/sensing.hpp"
#include "piqec/verification.hpp"

namespace fs = std::filesystem;
using namespace piqec;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kVerification = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_traj;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "YAML file, or the name of a bundled config");
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--n-traj", c.n_traj, "number of trajectories");
  cmd->add_option("--threads", c.threads, "worker threads");
  cmd->add_option("--out", c.out, "output directory");
}

fs::path resolve_config(const std::string& name) {
  if (fs::exists(name)) return name;
  const fs::path bundled = fs::path(PIQEC_CONFIG_DIR) / (name + ".yaml");
  if (fs::exists(bundled)) return bundled;
  throw ConfigError("--config", "no such file or bundled config: " + name);
}

fs::path prepare_out(const std::string& flag, const std::string& from_config,
                     const char* fallback) {
  const fs::path dir = !flag.empty() ? fs::path(flag)
                       : !from_config.empty() ? fs::path(from_config)
                                              : fs::path(fallback);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ResourceError("cannot write " + path.string());
  f << text;
}

template <class Config>
void apply_common(Config& cfg, const Common& c) {
  if (c.seed) cfg.seed = *c.seed;
  if (c.n_traj) cfg.n_traj = *c.n_traj;
  if (c.threads) cfg.threads = *c.threads;
}

int cmd_memory(const Common& c, std::optional<double> t_max, bool no_qec, bool no_teleport) {
  MemoryConfig cfg;
  std::string out_cfg;
  if (!c.config.empty()) cfg = load_memory_config(resolve_config(c.config), &out_cfg);
  apply_common(cfg, c);
  if (t_max) cfg.t_max = *t_max;
  if (no_qec) cfg.qec_enabled = false;
  if (no_teleport) cfg.teleport = false;
  cfg.validate();
  const fs::path dir = prepare_out(c.out, out_cfg, "piqec_out/memory");
  write_file(dir / "resolved_config.json", resolved_json(cfg));
  const MemoryResult result = run_memory_experiment(cfg);
  std::ostringstream csv;
  write_memory_csv(csv, result);
  write_file(dir / "memory.csv", csv.str());
  std::cout << "wrote " << (dir / "memory.csv").string() << "\n";
  return kOk;
}

int cmd_sensing(const Common& c, std::optional<double> omega, std::optional<double> t_max) {
  SensingConfig cfg;
  std::string out_cfg;
  if (!c.config.empty()) cfg = load_sensing_config(resolve_config(c.config), &out_cfg);
  apply_common(cfg, c);
  if (omega) cfg.omega = *omega;
  if (t_max) cfg.t_max = *t_max;
  cfg.validate();
  const fs::path dir = prepare_out(c.out, out_cfg, "piqec_out/sensing");
  write_file(dir / "resolved_config.json", resolved_json(cfg));
  const SensingResult result = run_sensing_experiment(cfg);
  std::ostringstream csv;
  write_sensing_csv(csv, result);
  write_file(dir / "sensing.csv", csv.str());
  std::cout << "wrote " << (dir / "sensing.csv").string() << "\n";
  return kOk;
}

int cmd_verify(int n_max) {
  const VerificationReport rep = verify_all(n_max);
  print_report(std::cout, rep);
  return rep.pass() ? kOk : kVerification;
}

NoiseModel parse_channels(const std::vector<std::string>& names) {
  NoiseModel mask;
  for (const auto& name : names) {
    if (name == "all") {
      for (int i = 0; i < 3; ++i) mask.collective[i] = mask.individual[i] = 1.0;
      mask.loss = 1.0;
      continue;
    }
    if (name == "loss") {
      mask.loss = 1.0;
      continue;
    }
    const auto colon = name.find(':');
    const std::string kind = name.substr(0, colon);
    int m = 0;
    try {
      m = colon == std::string::npos ? 2 : std::stoi(name.substr(colon + 1));
    } catch (const std::exception&) {
      m = 2;
    }
    if (m < -1 || m > 1 || (kind != "collective" && kind != "individual")) {
      throw ConfigError("--channels", "unknown channel '" + name + "'");
    }
    (kind == "collective" ? mask.collective : mask.individual)[m + 1] = 1.0;
  }
  return mask;
}

int cmd_codes(double j_min, double j_max, const std::vector<std::string>& channels, int budget,
              const std::string& out) {
  HalfInt lo, hi;
  try {
    lo = HalfInt::from_double(j_min);
    hi = HalfInt::from_double(j_max);
  } catch (const std::domain_error& e) {
    throw ConfigError("--j-min/--j-max", e.what());
  }
  if (lo.twice() < 1 || hi < lo) throw ConfigError("--j-max", "need 1/2 <= j-min <= j-max");
  if (budget != 1 && budget != 2) throw ConfigError("--budget", "must be 1 or 2");
  const NoiseModel mask = parse_channels(channels);
  if (mask.is_zero()) throw ConfigError("--channels", "no channel selected");
  std::vector<CatalogEntry> entries;
  for (int tj = lo.twice(); tj <= hi.twice(); ++tj) {
    const HalfInt j = HalfInt::from_twice(tj);
    const KrausSet ks = build_kraus_set(tj, j, mask, 1e-3);
    const auto found = code_search(j, mask, budget);
    std::cout << "J=" << j.str() << ": " << found.size() << " code(s)\n";
    for (const QecCode& code : found) {
      entries.push_back({code, channel_names(mask), kl_check(code, ks).max_violation()});
    }
  }
  const fs::path dir = prepare_out(out, "", "piqec_out/codes");
  std::ostringstream json;
  write_catalog(json, entries);
  write_file(dir / "codes.json", json.str());
  std::cout << "wrote " << entries.size() << " code(s) to " << (dir / "codes.json").string()
            << "\n";
  return kOk;
}

int cmd_coeffs(int n, const std::string& out) {
  const CoefficientTable& table = CoefficientTable::shared(n);
  std::ostringstream csv;
  csv.precision(17);
  csv << "N,J,M,kind,dj,dm,value\n";
  std::vector<Branch> all;
  for (const auto& b : collective_branches()) all.push_back(b);
  for (const auto& b : individual_branches()) all.push_back(b);
  for (const auto& b : loss_branches()) all.push_back(b);
  for (int tj = n % 2; tj <= n; tj += 2) {
    const HalfInt j = HalfInt::from_twice(tj);
    const SectorCoefficients& sc = table.sector(n, j);
    for (const Branch& b : all) {
      const Eigen::VectorXd& row = sc.row(b);
      for (int i = 0; i < row.size(); ++i) {
        csv << n << ',' << j.str() << ',' << level_at(j, i).str() << ',' << to_string(b.kind)
            << ',' << b.dj.str() << ',' << b.dm.str() << ',' << row(i) << '\n';
      }
    }
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    const fs::path dir = prepare_out(out, "", "");
    write_file(dir / "coefficients.csv", csv.str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piqec: error correction on permutationally invariant spin ensembles"};
  app.require_subcommand(1);

  Common mem_opts;
  std::optional<double> mem_t_max;
  bool no_qec = false, no_teleport = false;
  CLI::App* mem = app.add_subcommand("memory", "logical memory lifetime experiment");
  add_common(mem, mem_opts);
  mem->add_option("--t-max", mem_t_max, "final time");
  mem->add_flag("--no-qec", no_qec, "disable the QEC curves");
  mem->add_flag("--no-teleport", no_teleport, "disable the teleport curve");

  Common sens_opts;
  std::optional<double> omega, sens_t_max;
  CLI::App* sens = app.add_subcommand("sensing", "Ramsey sensing experiment");
  add_common(sens, sens_opts);
  sens->add_option("--omega", omega, "signal strength");
  sens->add_option("--t-max", sens_t_max, "final time");

  int n_max = 8;
  CLI::App* ver = app.add_subcommand("verify", "oracle verification of the coefficient tables");
  ver->add_option("--n-max", n_max, "largest particle number");

  double j_min = 0.5, j_max = 5.0;
  int budget = 2;
  std::vector<std::string> channels{"all"};
  std::string codes_out;
  CLI::App* codes = app.add_subcommand("codes", "exhaustive code search");
  codes->add_option("--j-min", j_min, "smallest J");
  codes->add_option("--j-max", j_max, "largest J");
  codes->add_option("--channels", channels,
                    "collective:m, individual:m, loss or all (comma separated)")
      ->delimiter(',');
  codes->add_option("--budget", budget, "levels per logical word (1 or 2)");
  codes->add_option("--out", codes_out, "output directory");

  int coeff_n = 8;
  std::string coeff_out;
  CLI::App* coeffs = app.add_subcommand("coeffs", "dump the coefficient table for one N");
  coeffs->add_option("--n", coeff_n, "particle number")->required();
  coeffs->add_option("--out", coeff_out, "output directory (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*mem) return cmd_memory(mem_opts, mem_t_max, no_qec, no_teleport);
    if (*sens) return cmd_sensing(sens_opts, omega, sens_t_max);
    if (*ver) return cmd_verify(n_max);
    if (*codes) return cmd_codes(j_min, j_max, channels, budget, codes_out);
    if (*coeffs) return cmd_coeffs(coeff_n, coeff_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
