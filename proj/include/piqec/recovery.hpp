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

#ifndef PIQEC_RECOVERY_HPP
#define PIQEC_RECOVERY_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "piqec/codes.hpp"
#include "piqec/dynamics.hpp"
#include "piqec/pi_core.hpp"
#include "piqec/random.hpp"

namespace piqec {

/// Smallest J that can hold the two-level code family.
inline const HalfInt kCodeMinJ = HalfInt::from_twice(9);
/// Hand-off threshold: one more J-lowering error from here would cross 9/2.
inline const HalfInt kDefaultTeleportThreshold = HalfInt::from_twice(11);

enum class DephasingFlag { kUndetermined, kNone, kDephased };

struct Syndrome {
  HalfInt j;  // J_after − J_before
  HalfInt m;  // level-set shift
  DephasingFlag dephasing = DephasingFlag::kUndetermined;
  bool loss = false;
};

/// Ideal J measurement. A trajectory already has a definite J.
struct JMeasurement {
  Sector sector;
  double probability = 1.0;
};
JMeasurement measure_j_sector(const TrajectoryState& state);
/// Samples a block with probability equal to its weight and returns the
/// renormalized block.
std::pair<JMeasurement, PiDensityState> measure_j_sector(const PiDensityState& state, Rng& rng);

/// Projective measurement onto the level sets {code levels + m}. `before` is
/// the sector at the previous cycle. The state is collapsed in place. Throws
/// UnrecoverableStateError when no level set carries weight.
Syndrome measure_syndrome_m(TrajectoryState& state, const QecCode& code, Sector before, Rng& rng);

/// For a (0, 0) syndrome: measures {code span, dephased span, rest}, where the
/// dephased span holds Ĵ_z|k_Q⟩ for each word. The outcome is returned in the
/// flag; the state is collapsed onto the outcome. Throws
/// UnrecoverableStateError on the "rest" outcome.
Syndrome detect_dephasing(TrajectoryState& state, const QecCode& code, Syndrome syndrome,
                          Rng& rng);

/// Collective pulse on one J block. A coupling pulse generates a Rabi
/// oscillation between two levels; a level-phase pulse is δ·Π_M with Π_M the
/// Jz-polynomial projector on level M (duration 1).
struct LevelCoupling {
  enum class Kind { kCoupling, kLevelPhase };
  Kind kind = Kind::kCoupling;
  HalfInt j;
  HalfInt m_i;
  HalfInt m_j;     // unused for a level-phase pulse
  Complex h{0.0};  // strength; real part is δ for a level-phase pulse
  double duration = 0.0;
};

/// h·Π_i J_±^Δ Π_j / (ladder product) + h.c. written as a polynomial in
/// Jz, J₊, J₋ on the block of J.
Eigen::MatrixXcd build_level_coupling(HalfInt j, HalfInt m_i, HalfInt m_j, Complex h);
/// δ·Π_M as a polynomial in Jz.
Eigen::MatrixXcd build_level_phase(HalfInt j, HalfInt m, double delta);
Eigen::MatrixXcd pulse_hamiltonian(const LevelCoupling& pulse);

/// Coupling pulse with h = e^{iφ} at π-time: |M_j⟩ → −i·e^{iφ}|M_i⟩ and
/// |M_i⟩ → −i·e^{−iφ}|M_j⟩.
LevelCoupling pi_pulse(HalfInt j, HalfInt m_i, HalfInt m_j, double phase = 0.0);
/// Closed-form exp(−i·H·t) applied to block amplitudes.
void apply_pulse(Amplitudes& amps, const LevelCoupling& pulse);
void apply_pulses(Amplitudes& amps, const std::vector<LevelCoupling>& pulses);

/// Pulse sequence realizing the 2×2 unitary `u` on the levels (a, b) of J.
std::vector<LevelCoupling> decompose_two_level(HalfInt j, HalfInt a, HalfInt b,
                                               const Eigen::Matrix2cd& u);

struct Recovery {
  TrajectoryState state;
  std::vector<LevelCoupling> pulses;
};

/// Restores the code in the block of the (collapsed) state. `before` is the
/// sector before the error. Throws ThresholdBreach when the new J is below
/// 9/2 or cannot hold the code; ImpossibleBranchError for an inconsistent
/// syndrome.
Recovery recover(const TrajectoryState& state, const Syndrome& syndrome, const QecCode& code,
                 Sector before, const CoefficientTable& table);

/// Re-appending a spin after a loss: on average this is the identity with
/// probability 1/2 and an individual dephasing jump otherwise. `pre_loss` is
/// the state before the loss.
TrajectoryState reappend_spin(const TrajectoryState& pre_loss, Rng& rng,
                              const CoefficientTable& table);

/// Bookkeeping carried between QEC cycles of one trajectory.
struct QecTracker {
  Sector last;                             // sector after the previous cycle
  std::optional<TrajectoryState> pre_loss;  // state just before a detected loss
};

struct QecCycleReport {
  Syndrome syndrome;
  std::vector<LevelCoupling> pulses;
};

/// One full cycle: re-append after a loss, J and level-set syndromes,
/// dephasing discrimination and recovery. Updates `tracker.last`. Throws
/// UnrecoverableStateError or ThresholdBreach when the code is lost.
QecCycleReport qec_cycle(TrajectoryState& state, const QecCode& code, QecTracker& tracker,
                         Rng& rng, const CoefficientTable& table);

/// Decoded logical amplitudes (α_k = ⟨k_Q|ψ⟩) and the weight outside the code.
struct LogicalReadout {
  std::vector<Complex> alphas;
  double leakage = 0.0;
};
LogicalReadout read_logical(const QecCode& code, const TrajectoryState& state);

struct FreshEnsemble {
  int n_spins = 0;
  HalfInt j;
  QecCode code;
};

struct Teleport {
  TrajectoryState state;
  int outcome = 0;  // 2·a + b for the two ancilla measurement bits
  std::array<double, 4> probabilities{};
};

/// Logical three-qubit teleportation into a fresh ensemble with ideal
/// ancilla and measurements. Throws UnrecoverableStateError when the input
/// leaks out of the code by more than 1e-10.
Teleport teleport_handoff(const TrajectoryState& state, const QecCode& code,
                          const FreshEnsemble& fresh, Rng& rng);

// Memory experiment.

struct MemoryConfig {
  int n_spins = 20;
  std::optional<HalfInt> initial_j;  // default N/2
  HalfInt m1 = HalfInt::from_twice(10);
  HalfInt m2 = HalfInt::from_twice(4);
  NoiseModel noise;
  double dt = 0.0;  // 0 → default_dt(noise)
  double t_max = 8.0;
  double sample_dt = 0.1;
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  bool qec_enabled = true;
  double dt_qec = 0.0;  // 0 → every step
  bool teleport = true;
  HalfInt j_threshold = kDefaultTeleportThreshold;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

enum class MemoryCurveId { kBare, kCodeNoQec, kCodeQec, kCodeQecTeleport };
const char* to_string(MemoryCurveId id);

struct MemoryCurve {
  MemoryCurveId id;
  Curve fidelity;
  std::vector<double> mean_j;
  std::vector<double> mean_n;
  std::vector<double> teleports;  // mean cumulative count
};

struct MemoryResult {
  std::vector<MemoryCurve> curves;
};

/// Runs the curves enabled by the config: bare and uncorrected code always,
/// corrected when qec_enabled, corrected with hand-off when teleport is also
/// set.
MemoryResult run_memory_experiment(const MemoryConfig& config);
/// Columns: time, curve_id, mean_fidelity, stderr, mean_J, mean_N,
/// teleports_cumulative.
void write_memory_csv(std::ostream& out, const MemoryResult& result);

}  // namespace piqec

#endif  // PIQEC_RECOVERY_HPP
