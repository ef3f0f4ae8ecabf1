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

#ifndef PIQEC_COEFFICIENTS_HPP
#define PIQEC_COEFFICIENTS_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "piqec/pi_core.hpp"

namespace piqec {

enum class ChannelKind { kCollective, kIndividual, kLoss };

const char* to_string(ChannelKind kind);

/// One jump branch: the process kind plus the change (j, m) it imprints on
/// (J, M). Collective branches always have j = 0; loss branches have
/// half-integer j and m.
struct Branch {
  ChannelKind kind;
  HalfInt dj;
  HalfInt dm;
  friend bool operator==(const Branch&, const Branch&) = default;
};

/// ⟨j1 m1; 1/2 ms | J M⟩ with the Condon-Shortley phase; zero when the
/// quantum numbers do not couple.
double clebsch_half(HalfInt j1, HalfInt m1, HalfInt ms, HalfInt total_j, HalfInt total_m);

/// Ĵ_m |J,M⟩ = X_m^{J,M} |J,M+m⟩. X_0 = M; X_{±1} are the ladder elements.
double collective_coeff(HalfInt j, HalfInt m_level, int m);

/// χ_{j,m}^{N,J,M}: amplitude of the barred transfer |J,M⟩ → |J+j,M+m⟩ under
/// Σ_n σ_{m,n} · σ_{m,n}†. Real; non-negative except (j,m) = (0,0), which
/// carries the sign of M like X_0.
double individual_coeff(int n_spins, HalfInt j, HalfInt m_level, int dj, int m);

/// Coefficient of barred(J+j, M+m, M'+m) in Σ_n σ_{m,n} barred(J,M,M') σ_{m,n}†.
/// χ(M)χ(M') reproduces it; the dual route exists for verification.
double individual_cross_weight(int n_spins, HalfInt j, HalfInt m_level, HalfInt m_level_prime,
                               int dj, int m);

/// ξ_{j,m}^{N,J,M}: amplitude of |J,M,N⟩ → |J+j,M+m,N−1⟩ under tracing out
/// one uniformly chosen spin. Non-negative; Σ_{j,m} ξ² = 1.
double loss_coeff(int n_spins, HalfInt j, HalfInt m_level, HalfInt dj, HalfInt dm);

/// d_{N−1}^{J+j} / d_N^J for j = ±1/2 (closed form).
double degeneracy_ratio(int n_spins, HalfInt j, HalfInt dj);

/// Branch order used by the tables and by every consumer.
inline constexpr std::array<int, 3> kShifts = {-1, 0, 1};
int individual_slot(int dj, int m);            // 0..8
int loss_slot(HalfInt dj, HalfInt dm);         // 0..3
std::array<Branch, 3> collective_branches();
std::array<Branch, 9> individual_branches();
std::array<Branch, 4> loss_branches();

/// Coefficient vectors of one (N, J) sector, indexed by level_index(J, M).
struct SectorCoefficients {
  std::array<Eigen::VectorXd, 3> collective;  // m = −1, 0, +1
  std::array<Eigen::VectorXd, 9> individual;  // individual_slot(j, m)
  std::array<Eigen::VectorXd, 4> loss;        // loss_slot(j, m); empty for N = 1

  const Eigen::VectorXd& row(const Branch& b) const;
};

/// Immutable precomputed table of X, χ, ξ for 1 ≤ N ≤ n_max. Safe for
/// concurrent reads.
class CoefficientTable {
 public:
  static constexpr int kFormatVersion = 1;
  static constexpr const char* kConvention = "real;ladder>=0;dephasing-sign(M)";

  struct BuildOptions {
    /// Entries with N ≤ oracle_cap are measured with the full-space oracle
    /// and cross-checked against the analytic route.
    int oracle_cap = 10;
    double tolerance = 1e-10;
  };

  /// Throws std::domain_error for n_max < 2 and TableIntegrityError when any
  /// verification exceeds the tolerance.
  static CoefficientTable build(int n_max);
  static CoefficientTable build(int n_max, const BuildOptions& options);

  /// Process-wide table covering at least n_max (built on first use).
  static const CoefficientTable& shared(int n_max);

  int n_max() const { return n_max_; }
  int oracle_verified_up_to() const { return verified_; }
  bool covers(int n_spins, HalfInt j) const;

  /// Throws std::out_of_range outside the stored (N, J) range.
  const SectorCoefficients& sector(int n_spins, HalfInt j) const;
  double collective(int n_spins, HalfInt j, HalfInt m_level, int m) const;
  double individual(int n_spins, HalfInt j, HalfInt m_level, int dj, int m) const;
  double loss(int n_spins, HalfInt j, HalfInt m_level, HalfInt dj, HalfInt dm) const;
  double coeff(int n_spins, HalfInt j, HalfInt m_level, const Branch& b) const;

  /// Versioned JSON cache. load() throws TableIntegrityError on a version or
  /// convention mismatch.
  void save(const std::filesystem::path& path) const;
  static CoefficientTable load(const std::filesystem::path& path);

 private:
  int n_max_ = 0;
  int verified_ = 0;
  // sectors_[N][J.twice()]
  std::vector<std::vector<SectorCoefficients>> sectors_;
};

}  // namespace piqec

#endif  // PIQEC_COEFFICIENTS_HPP
