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

#ifndef PIQEC_SENSING_HPP
#define PIQEC_SENSING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "piqec/codes.hpp"
#include "piqec/dynamics.hpp"
#include "piqec/recovery.hpp"

namespace piqec {

/// Ramsey probe: logical basis |0_c⟩, |1_c⟩ in one block, signal ω·Ĵ_z.
struct SensingProbe {
  int n_spins = 0;
  QecCode basis;
  double omega = 0.0;
  double t = 0.0;

  /// (|0_c⟩ + |1_c⟩)/√2.
  TrajectoryState initial_state() const;
};

/// c_M ← exp(−i·ω·M·dt)·c_M.
void signal_step(TrajectoryState& state, double omega, double dt);

/// φ = ω·t·(⟨0_c|Ĵ_z|0_c⟩ − ⟨1_c|Ĵ_z|1_c⟩).
double accumulated_phase(const SensingProbe& probe);
/// ⟨0_c|Ĵ_z|0_c⟩ − ⟨1_c|Ĵ_z|1_c⟩, i.e. φ/(ω·t).
double phase_slope(const QecCode& basis);

/// (|N/2,−N/2⟩, |N/2,N/2⟩).
SensingProbe ghz_probe(int n_spins, double omega = 0.0);
/// (|N/2,−N/2+1⟩, |N/2,N/2⟩). Throws UnsupportedConfiguration for N < 3.
SensingProbe collective_decay_code(int n_spins, double omega = 0.0);

/// ⟨0_c|Ĵ_z² − Ĵ_z|0_c⟩ = ⟨1_c|Ĵ_z² − Ĵ_z|1_c⟩ for the collective-decay code,
/// checked in exact integer arithmetic.
bool collective_decay_kl_identity(int n_spins);

struct NoGoReport {
  long candidates = 0;
  /// Candidates meeting the individual-decay diagonal conditions.
  int kl_passing = 0;
  /// max |φ/(ω·t)| over KL-passing candidates.
  double max_phase_slope = 0.0;
  /// KL-passing candidates with |φ/(ω·t)| above tolerance (expected empty).
  std::vector<QecCode> counterexamples;
};

/// Scans every two-word candidate with one or two levels per word in the
/// symmetric blocks J ≤ j_max, keeps those passing KL against individual decay
/// and reports their phase slopes.
NoGoReport nogo_individual_decay(HalfInt j_max, double tol = 1e-10);

struct SensingRecovery {
  HalfInt shift;
  std::vector<LevelCoupling> pulses;
  /// Relative phase between the branches introduced by the transfer pulses,
  /// already compensated by the last pulse.
  double phase_offset = 0.0;
};

/// Detects the level-set shift of the probe levels and moves both branches
/// back. The returned pulses must be applied to any paired state. Throws
/// UnsupportedConfiguration when shifted level sets collide and
/// UnrecoverableStateError when no level set carries the state.
SensingRecovery sensing_recover(TrajectoryState& state, const SensingProbe& probe);

/// Replays a recovery on a partner state: projection onto the shifted level
/// set, then the same pulses.
void apply_sensing_recovery(TrajectoryState& state, const SensingProbe& probe,
                            const SensingRecovery& recovery);

struct SensingConfig {
  int n_spins = 20;
  NoiseModel noise;
  double omega = 0.1;
  double dt = 0.0;  // 0 → default_dt(noise)
  double t_max = 2.0;
  double sample_dt = 0.05;
  std::size_t n_traj = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::string> probes{"ghz", "encoded"};
  bool qec_enabled = true;
  bool reference_curves = true;

  void validate() const;
};

struct SensingCurve {
  std::string id;  // e.g. "encoded_qec", "ghz_lossless"
  Curve infidelity;
};

struct SensingResult {
  std::vector<SensingCurve> curves;
};

/// Matched-seed pairs with and without signal; the pair shares every jump
/// and syndrome decision, which are drawn from the signal-free member.
SensingResult run_sensing_experiment(const SensingConfig& config);
/// Columns: time, curve_id, mean_infidelity, stderr, n_alive_trajectories.
void write_sensing_csv(std::ostream& out, const SensingResult& result);

}  // namespace piqec

#endif  // PIQEC_SENSING_HPP
