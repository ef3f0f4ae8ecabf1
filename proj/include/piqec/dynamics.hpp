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

#ifndef PIQEC_DYNAMICS_HPP
#define PIQEC_DYNAMICS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "piqec/coefficients.hpp"
#include "piqec/pi_core.hpp"
#include "piqec/random.hpp"

namespace piqec {

/// Rates of the collective (Γ), individual (γ) and spin-loss (γ_d) channels.
/// Index 0, 1, 2 of the arrays is m = −1, 0, +1.
struct NoiseModel {
  std::array<double, 3> collective{};
  std::array<double, 3> individual{};
  double loss = 0.0;

  /// Throws std::invalid_argument on a negative or non-finite rate.
  void validate() const;
  bool is_zero() const;
  double max_rate() const;
  /// Rate attached to a branch (loss only acts for N ≥ 2).
  double rate(const Branch& b, int n_spins) const;
};

/// One jump branch together with its instantaneous rate for some state.
struct BranchRate {
  Branch branch;
  double rate = 0.0;
};

/// Per-sector rate data: rate_b·coeff_b(M)² for every branch with nonzero
/// rate, and its column sum Λ(M), which drives the no-jump drift.
struct SectorRates {
  std::vector<Branch> branches;
  std::vector<double> rates;
  std::vector<const Eigen::VectorXd*> coefficients;
  Eigen::MatrixXd weights;  // branch × level
  Eigen::VectorXd decay;    // Λ(M)
  double max_decay = 0.0;
};

SectorRates sector_rates(const NoiseModel& noise, const CoefficientTable& table, int n_spins,
                         HalfInt j);

/// Immutable rate tables for all sectors reachable from N ≤ n_max. Safe to
/// share between threads.
class JumpModel {
 public:
  JumpModel(const NoiseModel& noise, const CoefficientTable& table, int n_max);

  const NoiseModel& noise() const { return noise_; }
  const CoefficientTable& table() const { return *table_; }
  int n_max() const { return n_max_; }
  /// Throws std::out_of_range outside the covered sectors.
  const SectorRates& sector(int n_spins, HalfInt j) const;
  /// Largest Λ(M) over all sectors.
  double max_total_rate() const { return max_total_; }

 private:
  NoiseModel noise_;
  const CoefficientTable* table_;
  int n_max_;
  double max_total_ = 0.0;
  std::vector<std::vector<SectorRates>> sectors_;  // [N][2J]
};

std::vector<BranchRate> jump_weights(const TrajectoryState& state, const JumpModel& model);
std::vector<BranchRate> jump_weights(const TrajectoryState& state, const NoiseModel& noise);

/// Applies the Kraus operator of one branch and renormalizes. Throws
/// ImpossibleBranchError when the branch has zero weight on the state.
TrajectoryState apply_jump(const TrajectoryState& state, const Branch& branch,
                           const CoefficientTable& table);
TrajectoryState apply_jump(const TrajectoryState& state, const Branch& branch);
void apply_jump_in_place(TrajectoryState& state, const Branch& branch,
                         const CoefficientTable& table);

/// c_M ← exp(−dt·Λ(M)/2)·c_M, renormalized.
TrajectoryState no_jump_step(const TrajectoryState& state, const JumpModel& model, double dt);
TrajectoryState no_jump_step(const TrajectoryState& state, const NoiseModel& noise, double dt);
void no_jump_in_place(TrajectoryState& state, const JumpModel& model, double dt);

/// Step size above which the first-order jump decision is considered coarse.
inline constexpr double kCoarseStep = 0.05;
bool step_is_coarse(const JumpModel& model, double dt);

struct JumpEvent {
  double time = 0.0;
  Branch branch;
  HalfInt j_before;
  HalfInt j_after;
  int n_after = 0;
};

struct TeleportEvent {
  double time = 0.0;
  int n_before = 0;
  HalfInt j_before;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::vector<double> times;
  /// observables[k] holds the values sampled at times[k].
  std::vector<std::vector<double>> observables;
  std::vector<JumpEvent> jumps;
  std::vector<TeleportEvent> teleports;
  /// Set when a hook declared the trajectory lost (e.g. unrecoverable).
  std::optional<double> failed_at;
};

/// Mutable view handed to hooks after every step.
struct StepContext {
  TrajectoryState& state;
  const TrajectoryState& before;  // state at the start of the step
  double time;
  Rng& rng;
  const JumpEvent* jump;  // jump taken in this step, if any
  TrajectoryRecord& record;
};

struct TrajectoryHooks {
  /// Coherent evolution applied every step before the noise (e.g. a signal).
  std::function<void(TrajectoryState&, double dt)> unitary;
  /// Called after the noise of every step (e.g. a QEC cycle).
  std::function<void(StepContext&)> after_step;
  /// Values recorded at every sample time.
  std::function<std::vector<double>(const TrajectoryState&, double time)> observe;
};

struct TrajectoryOptions {
  double t_max = 1.0;
  double dt = 1e-3;
  /// Sample every `sample_every` steps (t = 0 always sampled).
  int sample_every = 1;
};

/// Default step: 1e-3 divided by the largest rate parameter.
double default_dt(const NoiseModel& noise);

/// First-order unraveling: per step one uniform draw decides jump vs no-jump,
/// a second one selects the branch. Deterministic given the RNG stream.
TrajectoryRecord evolve_trajectory(const TrajectoryState& initial, const JumpModel& model,
                                   const TrajectoryOptions& options, Rng& rng,
                                   const TrajectoryHooks& hooks = {});
TrajectoryRecord evolve_trajectory(const TrajectoryState& initial, const NoiseModel& noise,
                                   double t_max, double dt, std::uint64_t seed,
                                   const TrajectoryHooks& hooks = {});

/// Mean and standard error over trajectories of one observable column.
struct Curve {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::vector<int> n_alive;
};

/// Trajectories with failed_at ≤ t are excluded from the statistics at t and
/// counted as dead. Reduction order is the record order.
Curve aggregate(const std::vector<TrajectoryRecord>& records, int column);

/// Runs `count` trajectories on `threads` workers with streams (seed, index).
std::vector<TrajectoryRecord> run_ensemble(const TrajectoryState& initial, const JumpModel& model,
                                           const TrajectoryOptions& options, std::uint64_t seed,
                                           std::size_t count, int threads,
                                           const TrajectoryHooks& hooks = {});
/// Same, with hooks created per trajectory (for hooks that carry state).
std::vector<TrajectoryRecord> run_ensemble(
    const TrajectoryState& initial, const JumpModel& model, const TrajectoryOptions& options,
    std::uint64_t seed, std::size_t count, int threads,
    const std::function<TrajectoryHooks(std::size_t)>& make_hooks);

void write_jsonl(std::ostream& out, const TrajectoryRecord& record);
/// Columns: time, mean, stderr, n_alive_trajectories.
void write_curve_csv(std::ostream& out, const Curve& curve);

// Block-wise PI master equation.

inline constexpr int kMasterMaxSpins = 40;
inline constexpr double kTraceDriftLimit = 1e-6;

/// Fixed-step RK4 of the PI master equation. Loss populates (N−1) sectors;
/// N = 1 is absorbing. `sample` (optional) is called at t = 0 and after every
/// step. Throws ResourceError for N > 40 and IntegrationError when the trace
/// drifts by more than 1e-6.
PiDensityState evolve_master(
    const PiDensityState& initial, const NoiseModel& noise, double t_max, double dt,
    const std::function<void(double, const PiDensityState&)>& sample = {});
PiDensityState evolve_master(
    const PiDensityState& initial, const JumpModel& model, double t_max, double dt,
    const std::function<void(double, const PiDensityState&)>& sample = {});

}  // namespace piqec

#endif  // PIQEC_DYNAMICS_HPP
