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

#ifndef PIQEC_PI_CORE_HPP
#define PIQEC_PI_CORE_HPP

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "piqec/errors.hpp"
#include "piqec/half_int.hpp"

namespace piqec {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;
using Block = Eigen::MatrixXcd;
using BigInt = boost::multiprecision::cpp_int;

/// Smallest total angular momentum reachable by `n_spins` spin-1/2 particles.
constexpr HalfInt min_j(int n_spins) { return HalfInt::from_twice(n_spins % 2); }

/// True when J is a legal total angular momentum for `n_spins` particles.
bool valid_sector(int n_spins, HalfInt j);
void require_valid_sector(int n_spins, HalfInt j);

/// Index of level M within a J block (M = −J maps to 0).
inline int level_index(HalfInt j, HalfInt m) { return (m.twice() + j.twice()) / 2; }
inline HalfInt level_at(HalfInt j, int index) { return HalfInt::from_twice(2 * index - j.twice()); }
inline int block_dim(HalfInt j) { return j.twice() + 1; }
inline bool level_in_block(HalfInt j, HalfInt m) {
  return same_parity(j, m) && abs(m) <= j;
}

/// Multiplicity of the spin-J irreducible block among N spin-1/2 particles,
/// by exact path counting (d_{N+1}^J = d_N^{J−1/2} + d_N^{J+1/2}).
BigInt degeneracy(int n_spins, HalfInt j);
double degeneracy_as_double(int n_spins, HalfInt j);

/// Particle number and total angular momentum of one PI block.
struct Sector {
  int n = 0;
  HalfInt j;
  friend auto operator<=>(const Sector&, const Sector&) = default;
};

/// Pure conditional state of a single trajectory: amplitudes over
/// M = −J..J of one degeneracy-averaged block. Always normalized.
class TrajectoryState {
 public:
  TrajectoryState(int n_spins, HalfInt total_j, Amplitudes amplitudes);

  /// Single-level state |J, M⟩.
  static TrajectoryState dicke(int n_spins, HalfInt total_j, HalfInt m);

  int n_spins() const { return n_; }
  HalfInt total_j() const { return j_; }
  Sector sector() const { return {n_, j_}; }
  const Amplitudes& amplitudes() const { return amps_; }
  Complex amplitude(HalfInt m) const;
  int dim() const { return static_cast<int>(amps_.size()); }

  /// Replaces the content; renormalizes. Throws ImpossibleBranchError on a
  /// zero vector.
  void assign(int n_spins, HalfInt total_j, Amplitudes amplitudes);
  void assign(Amplitudes amplitudes) { assign(n_, j_, std::move(amplitudes)); }

 private:
  int n_;
  HalfInt j_;
  Amplitudes amps_;
};

/// Block-diagonal PI density matrix. Blocks are keyed by (N, J) so that a
/// state that has lost particles is a direct sum over particle numbers.
/// Coherence between blocks is not representable.
class PiDensityState {
 public:
  PiDensityState() = default;
  explicit PiDensityState(int n_spins) : n_(n_spins) {}

  static PiDensityState from_trajectory(const TrajectoryState& psi);

  /// Largest particle number present (the initial N).
  int n_spins() const { return n_; }
  const std::map<Sector, Block>& blocks() const { return blocks_; }
  bool has_block(Sector s) const { return blocks_.count(s) != 0; }
  const Block& block(Sector s) const;
  Block& block_mut(Sector s);
  void set_block(Sector s, Block b);

  double trace() const;
  double weight(Sector s) const;
  /// Smallest eigenvalue across all blocks.
  double min_eigenvalue() const;
  void validate(double tol = 1e-10) const;

  PiDensityState& operator+=(const PiDensityState& o);
  PiDensityState& operator*=(double s);

 private:
  int n_ = 0;
  std::map<Sector, Block> blocks_;
};

PiDensityState operator+(PiDensityState a, const PiDensityState& b);
PiDensityState operator*(double s, PiDensityState a);

/// Logical qudit density matrix over basis |k_L⟩, k = 0..d−1.
class LogicalQudit {
 public:
  explicit LogicalQudit(Block rho, double tol = 1e-10);
  static LogicalQudit pure(const Amplitudes& psi);
  static LogicalQudit maximally_mixed(int d);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Block& rho() const { return rho_; }

 private:
  Block rho_;
};

/// M values carrying the logical levels, in logical order.
using LevelAssignment = std::vector<HalfInt>;

/// d levels centered on M = 0 inside block J (lowest level first).
LevelAssignment centered_levels(int d, HalfInt total_j);

PiDensityState encode_logical(const LogicalQudit& qudit, int n_spins, HalfInt total_j);
PiDensityState encode_logical(const LogicalQudit& qudit, int n_spins, HalfInt total_j,
                              const LevelAssignment& levels);

struct DecodedQudit {
  LogicalQudit qudit;
  /// Trace of the block before renormalization.
  double weight;
};

DecodedQudit decode_logical(const PiDensityState& state, HalfInt total_j);
DecodedQudit decode_logical(const PiDensityState& state, Sector sector,
                            const LevelAssignment& levels);

enum class CollectiveOp { kJz, kJz2, kJ2 };

double collective_expectation(const PiDensityState& state, CollectiveOp op);
double collective_expectation(const TrajectoryState& state, CollectiveOp op);

}  // namespace piqec

#endif  // PIQEC_PI_CORE_HPP
