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

#ifndef PIQEC_ORACLE_HPP
#define PIQEC_ORACLE_HPP

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "piqec/coefficients.hpp"
#include "piqec/pi_core.hpp"

// Exact 2^N-dimensional reference used to derive and check the PI-level maps.
namespace piqec::oracle {

inline constexpr int kMaxSpins = 12;

/// Orthonormal basis {|J,M,i⟩} of N spins built by coupling spins left to
/// right. Bit n of a computational index is spin n (1 = up).
class FullStateBasis {
 public:
  /// Throws ResourceError for N > kMaxSpins and std::domain_error for N < 1.
  static FullStateBasis build(int n_spins);

  int n_spins() const { return n_; }
  int dim() const { return static_cast<int>(vectors_.rows()); }
  const Eigen::MatrixXd& vectors() const { return vectors_; }

  std::vector<HalfInt> j_values() const;
  int multiplicity(HalfInt j) const;
  int column(HalfInt j, HalfInt m, int i) const;
  /// Columns |J,M,i⟩ for i = 0..d−1 as a (2^N × d) view.
  auto sector_columns(HalfInt j, HalfInt m) const {
    return vectors_.middleCols(column(j, m, 0), multiplicity(j));
  }

 private:
  int n_ = 0;
  Eigen::MatrixXd vectors_;
  std::map<HalfInt, int> offset_;
  std::map<HalfInt, int> mult_;
};

/// σ_{m,n} (m = −1, 0, +1) applied to a computational-basis vector.
Eigen::VectorXd apply_sigma(int m, int spin, const Eigen::VectorXd& v);
/// Ĵ_m = Σ_n σ_{m,n} for m = ±1, Ĵ_z for m = 0.
Eigen::VectorXd apply_collective(int m, int n_spins, const Eigen::VectorXd& v);
/// Dense Ĵ² and Ĵ_z on the full space.
Eigen::MatrixXd total_j2(int n_spins);
Eigen::MatrixXd total_jz(int n_spins);

struct OracleChannel {
  ChannelKind kind;
  int m = 0;  // ignored for loss
};

/// Key of one barred output term: (ΔJ, ΔM).
using ShiftKey = std::pair<HalfInt, HalfInt>;

struct ChannelImage {
  int n_out = 0;
  /// Coefficient of barred(J+ΔJ, M+ΔM, M'+ΔM) in the channel output.
  std::map<ShiftKey, double> coefficients;
  /// Largest element of output − Σ coefficient·barred (not captured by
  /// barred terms).
  double residual = 0.0;
  /// Largest element of output − Σ predicted·barred; only set when a
  /// prediction is supplied.
  double prediction_deviation = 0.0;
  double trace = 0.0;
};

/// Applies the exact channel to (1/d) Σ_i |J,M,i⟩⟨J,M',i| and projects the
/// result onto barred outer products. Loss needs the (N−1)-spin basis.
ChannelImage apply_channel_exact(const FullStateBasis& basis, const FullStateBasis* basis_out,
                                 HalfInt j, HalfInt m_level, HalfInt m_level_prime,
                                 OracleChannel channel,
                                 const std::map<ShiftKey, double>* predicted = nullptr);

/// Barred-coefficient matrices C(M, M') of the channel applied to every
/// barred element of block J, keyed by output shift. Rows/columns are level
/// indices of J; entries whose output level falls outside the target block
/// are zero. Cheaper than apply_channel_exact: no residual is formed.
std::map<ShiftKey, Eigen::MatrixXd> measure_coefficient_matrices(const FullStateBasis& basis,
                                                                 const FullStateBasis* basis_out,
                                                                 HalfInt j, OracleChannel channel);

/// Expected total jump weight ⟨Σ_n σ†σ⟩ (or ⟨Ĵ_m†Ĵ_m⟩) averaged over i.
double exact_channel_weight(const FullStateBasis& basis, HalfInt j, HalfInt m_level,
                            OracleChannel channel);

struct EquivalenceReport {
  int n_spins = 0;
  /// Composite (loss → re-append) fitted as a·ρ + λ·Σ_n σ_z ρ σ_z per element.
  double identity_weight = 0.0;
  double dephasing_rate = 0.0;
  /// Largest element-wise residual of the fit with the global (a, λ).
  double deviation = 0.0;
  /// Largest element-wise gap between the composite and the bare dephasing
  /// jump Σ_n σ_z ρ σ_z / N (no normalization).
  double raw_deviation = 0.0;
  /// Spread of per-element fitted λ across all (J, M, M').
  double rate_spread = 0.0;
};

/// Loss of a uniformly random spin followed by re-appending a spin polarized
/// opposite to the detected M shift, compared against individual dephasing
/// on every barred element. N ≤ 8.
EquivalenceReport verify_loss_dephasing_equivalence(int n_spins);

/// Full-space Lindblad evolution (direct sum over particle numbers when loss
/// is on). Used to cross-check the PI master-equation integrator; N ≤ 8.
struct FullNoise {
  std::array<double, 3> collective{};  // Γ_{−1}, Γ_0, Γ_{+1}
  std::array<double, 3> individual{};  // γ_{−1}, γ_0, γ_{+1}
  double loss = 0.0;
};

/// Maps a PI state to the full space: ρ_{MM'} ↦ ρ_{MM'}·barred(J,M,M').
std::map<int, Eigen::MatrixXcd> lift(const PiDensityState& state);
/// Inverse map onto barred coefficients; also returns the largest element not
/// captured by barred terms.
PiDensityState project(const std::map<int, Eigen::MatrixXcd>& full, double* residual = nullptr);

std::map<int, Eigen::MatrixXcd> evolve_lindblad(std::map<int, Eigen::MatrixXcd> rho,
                                                const FullNoise& noise, double t_max, double dt);

/// ½ Σ_blocks ‖a − b‖₁.
double trace_distance(const PiDensityState& a, const PiDensityState& b);

}  // namespace piqec::oracle

#endif  // PIQEC_ORACLE_HPP
