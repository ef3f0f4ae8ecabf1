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

#ifndef PIQEC_CODES_HPP
#define PIQEC_CODES_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "piqec/coefficients.hpp"
#include "piqec/dynamics.hpp"
#include "piqec/pi_core.hpp"

namespace piqec {

struct CodeLevel {
  HalfInt m;
  double amplitude = 0.0;
};

/// Logical code words built from Dicke levels of one J block. Amplitudes are
/// real. The levels are absolute magnetizations, so a code defined at one J
/// can be embedded in any block that contains all of its levels.
struct QecCode {
  HalfInt total_j;
  std::vector<std::vector<CodeLevel>> words;
  /// Set for the two-level family {−M₁, M₂} / {−M₂, M₁}.
  std::optional<HalfInt> m1;
  std::optional<HalfInt> m2;
  /// Non-empty when the code violates the family's distance constraints.
  std::string warning;

  int logical_dim() const { return static_cast<int>(words.size()); }
  HalfInt max_level() const;
  bool fits(HalfInt j) const;
  /// Code word k as amplitudes over the block of J. Throws CapacityError
  /// when a level lies outside the block.
  Amplitudes word(int k, HalfInt j) const;
  Amplitudes word(int k) const { return word(k, total_j); }
  /// Checks normalization and disjoint supports.
  void validate(double tol = 1e-12) const;
};

/// c^{(0)}_{−M₁} = c^{(1)}_{M₁} = √(M₂/(M₁+M₂)), c^{(k)}_{±M₂} = √(1−c²).
/// Throws CapacityError for J < M₁ and std::domain_error when the levels do
/// not belong to the block or coincide.
QecCode build_two_level_code(HalfInt total_j, HalfInt m1, HalfInt m2);

/// Logical state α₀|0_Q⟩ + α₁|1_Q⟩ in the (N, J) block.
TrajectoryState encode_code(const QecCode& code, Complex alpha0, Complex alpha1, int n_spins,
                            HalfInt j);

/// |⟨target|ψ⟩|² where target = Σ α_k |k_Q⟩ embedded in the block of ψ;
/// 0 when the code does not fit that block.
double logical_fidelity(const QecCode& code, const std::vector<Complex>& alphas,
                        const TrajectoryState& psi);
double logical_fidelity(const QecCode& code, const std::vector<Complex>& alphas,
                        const PiDensityState& rho, Sector sector);

struct LogicalKraus {
  Branch branch;
  double rate = 0.0;
  /// √(rate·dt)·coeff over the source levels.
  Eigen::VectorXd amplitudes;
  Sector target;
  /// Target level index minus source level index.
  int offset = 0;
};

struct KrausSet {
  int n_spins = 0;
  HalfInt total_j;
  double dt = 0.0;
  std::vector<LogicalKraus> jumps;
  /// √(1 − dt·Λ(M)); makes the set exactly complete while dt·Λ ≤ 1.
  Eigen::VectorXd no_jump;

  /// Diagonal of Σ Ê†Ê.
  Eigen::VectorXd completeness() const;
};

/// Throws std::out_of_range when the table does not cover (N, J).
KrausSet build_kraus_set(int n_spins, HalfInt j, const NoiseModel& noise, double dt,
                         const CoefficientTable& table);
KrausSet build_kraus_set(int n_spins, HalfInt j, const NoiseModel& noise, double dt);

struct KlReport {
  /// Error labels: "I" then channel/j/m of every jump.
  std::vector<std::string> labels;
  /// K_{ab} = ⟨0_Q|Ê_a†Ê_b|0_Q⟩ with rate prefactors stripped.
  Eigen::MatrixXd k;
  /// Largest |⟨k|Ê_a†Ê_b|k⟩ − ⟨0|Ê_a†Ê_b|0⟩| and |⟨k'|Ê_a†Ê_b|k⟩| (k ≠ k').
  double diagonal_violation = 0.0;
  double offdiagonal_violation = 0.0;
  double min_eigenvalue = 0.0;
  bool diagonal_pass = false;
  bool pass = false;
  double max_violation() const { return std::max(diagonal_violation, offdiagonal_violation); }
};

/// Knill-Laflamme test of the code, embedded in the Kraus set's block,
/// against the identity plus every jump operator. Tolerances are relative to
/// max(1, max|K|).
KlReport kl_check(const QecCode& code, const KrausSet& kraus, double tol = 1e-10);

/// Exhaustive search over qubit codes with `budget` levels per word
/// (1 or 2) in the block (N, J), N defaulting to 2J. `channels` is used
/// as a mask: a channel is included when its rate is nonzero.
std::vector<QecCode> code_search(HalfInt j, const NoiseModel& channels, int budget,
                                 double tol = 1e-10, std::optional<int> n_spins = std::nullopt);

/// Candidate codes in the Kraus set's block: every pair of single levels
/// (budget 1), or every two-level pair of words with weights solving the
/// same-shift diagonal conditions (budget 2). `examined` receives the number
/// of level combinations visited.
std::vector<QecCode> diagonal_candidates(const KrausSet& kraus, int budget, double tol = 1e-10,
                                         long* examined = nullptr);

/// Catalog of codes with the channels checked and their KL residuals.
struct CatalogEntry {
  QecCode code;
  std::vector<std::string> channels;
  double kl_residual = 0.0;
};
void write_catalog(std::ostream& out, const std::vector<CatalogEntry>& entries);
std::vector<CatalogEntry> read_catalog(std::istream& in);

/// Names of the channels with nonzero rate, e.g. "collective:-1", "loss".
std::vector<std::string> channel_names(const NoiseModel& noise);

}  // namespace piqec

#endif  // PIQEC_CODES_HPP
