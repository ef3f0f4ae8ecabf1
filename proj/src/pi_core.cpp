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

#include "piqec/pi_core.hpp"

#include <cmath>
#include <sstream>

namespace piqec {

HalfInt HalfInt::from_double(double value) {
  const double twice = std::round(2.0 * value);
  if (std::abs(twice - 2.0 * value) > 1e-9) {
    throw std::domain_error("not a half-integer: " + std::to_string(value));
  }
  return from_twice(static_cast<int>(twice));
}

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

bool valid_sector(int n_spins, HalfInt j) {
  return n_spins >= 1 && j.twice() >= 0 && j.twice() <= n_spins &&
         (n_spins - j.twice()) % 2 == 0;
}

void require_valid_sector(int n_spins, HalfInt j) {
  if (!valid_sector(n_spins, j)) {
    std::ostringstream os;
    os << "invalid sector N=" << n_spins << " J=" << j;
    throw std::domain_error(os.str());
  }
}

BigInt degeneracy(int n_spins, HalfInt j) {
  require_valid_sector(n_spins, j);
  // row[t] holds d_n^{t/2}; one spin at a time.
  std::vector<BigInt> row(n_spins + 2, 0);
  row[1] = 1;
  for (int n = 2; n <= n_spins; ++n) {
    std::vector<BigInt> next(n_spins + 2, 0);
    for (int t = n % 2; t <= n; t += 2) {
      if (t >= 1) next[t] += row[t - 1];
      next[t] += row[t + 1];
    }
    row = std::move(next);
  }
  return row[j.twice()];
}

double degeneracy_as_double(int n_spins, HalfInt j) {
  return degeneracy(n_spins, j).convert_to<double>();
}

// ---------------------------------------------------------------------------

TrajectoryState::TrajectoryState(int n_spins, HalfInt total_j, Amplitudes amplitudes)
    : n_(n_spins), j_(total_j) {
  assign(n_spins, total_j, std::move(amplitudes));
}

TrajectoryState TrajectoryState::dicke(int n_spins, HalfInt total_j, HalfInt m) {
  require_valid_sector(n_spins, total_j);
  if (!level_in_block(total_j, m)) throw std::domain_error("level outside block");
  Amplitudes a = Amplitudes::Zero(block_dim(total_j));
  a(level_index(total_j, m)) = 1.0;
  return TrajectoryState(n_spins, total_j, std::move(a));
}

Complex TrajectoryState::amplitude(HalfInt m) const {
  if (!level_in_block(j_, m)) return 0.0;
  return amps_(level_index(j_, m));
}

void TrajectoryState::assign(int n_spins, HalfInt total_j, Amplitudes amplitudes) {
  require_valid_sector(n_spins, total_j);
  if (amplitudes.size() != block_dim(total_j)) {
    throw std::domain_error("amplitude vector length must be 2J+1");
  }
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ImpossibleBranchError("zero-norm trajectory state");
  }
  n_ = n_spins;
  j_ = total_j;
  amps_ = std::move(amplitudes);
  amps_ /= norm;
}

// ---------------------------------------------------------------------------

PiDensityState PiDensityState::from_trajectory(const TrajectoryState& psi) {
  PiDensityState rho(psi.n_spins());
  rho.set_block(psi.sector(), psi.amplitudes() * psi.amplitudes().adjoint());
  return rho;
}

const Block& PiDensityState::block(Sector s) const {
  auto it = blocks_.find(s);
  if (it == blocks_.end()) throw std::out_of_range("no such block");
  return it->second;
}

Block& PiDensityState::block_mut(Sector s) {
  auto it = blocks_.find(s);
  if (it == blocks_.end()) {
    require_valid_sector(s.n, s.j);
    const int d = block_dim(s.j);
    it = blocks_.emplace(s, Block::Zero(d, d)).first;
    n_ = std::max(n_, s.n);
  }
  return it->second;
}

void PiDensityState::set_block(Sector s, Block b) {
  require_valid_sector(s.n, s.j);
  if (b.rows() != block_dim(s.j) || b.cols() != block_dim(s.j)) {
    throw std::domain_error("block size must be (2J+1)^2");
  }
  n_ = std::max(n_, s.n);
  blocks_[s] = std::move(b);
}

double PiDensityState::trace() const {
  double t = 0.0;
  for (const auto& [s, b] : blocks_) t += b.trace().real();
  return t;
}

double PiDensityState::weight(Sector s) const {
  auto it = blocks_.find(s);
  return it == blocks_.end() ? 0.0 : it->second.trace().real();
}

double PiDensityState::min_eigenvalue() const {
  double lo = 0.0;
  bool first = true;
  for (const auto& [s, b] : blocks_) {
    Eigen::SelfAdjointEigenSolver<Block> es(b, Eigen::EigenvaluesOnly);
    const double e = es.eigenvalues().minCoeff();
    lo = first ? e : std::min(lo, e);
    first = false;
  }
  return lo;
}

void PiDensityState::validate(double tol) const {
  if (std::abs(trace() - 1.0) > tol) throw std::domain_error("PI state trace != 1");
  for (const auto& [s, b] : blocks_) {
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol) {
      throw std::domain_error("PI block not Hermitian");
    }
  }
  if (min_eigenvalue() < -tol) throw std::domain_error("PI state not positive");
}

PiDensityState& PiDensityState::operator+=(const PiDensityState& o) {
  for (const auto& [s, b] : o.blocks_) {
    auto it = blocks_.find(s);
    if (it == blocks_.end()) {
      blocks_.emplace(s, b);
    } else {
      it->second += b;
    }
  }
  n_ = std::max(n_, o.n_);
  return *this;
}

PiDensityState& PiDensityState::operator*=(double s) {
  for (auto& [k, b] : blocks_) b *= s;
  return *this;
}

PiDensityState operator+(PiDensityState a, const PiDensityState& b) { return a += b; }
PiDensityState operator*(double s, PiDensityState a) { return a *= s; }

// ---------------------------------------------------------------------------

LogicalQudit::LogicalQudit(Block rho, double tol) : rho_(std::move(rho)) {
  if (rho_.rows() == 0 || rho_.rows() != rho_.cols()) {
    throw std::domain_error("logical qudit must be a non-empty square matrix");
  }
  if (std::abs(rho_.trace() - Complex(1.0)) > tol) {
    throw std::domain_error("logical qudit trace != 1");
  }
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw std::domain_error("logical qudit not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Block> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw std::domain_error("logical qudit not positive semi-definite");
  }
}

LogicalQudit LogicalQudit::pure(const Amplitudes& psi) {
  const Amplitudes u = psi.normalized();
  return LogicalQudit(u * u.adjoint());
}

LogicalQudit LogicalQudit::maximally_mixed(int d) {
  return LogicalQudit(Block::Identity(d, d) / static_cast<double>(d));
}

LevelAssignment centered_levels(int d, HalfInt total_j) {
  const int dim = block_dim(total_j);
  if (d < 1 || d > dim) {
    throw CapacityError("block J=" + total_j.str() + " cannot hold " + std::to_string(d) +
                        " logical levels");
  }
  const int offset = (dim - d) / 2;
  LevelAssignment levels;
  levels.reserve(d);
  for (int k = 0; k < d; ++k) levels.push_back(level_at(total_j, offset + k));
  return levels;
}

PiDensityState encode_logical(const LogicalQudit& qudit, int n_spins, HalfInt total_j) {
  require_valid_sector(n_spins, total_j);
  return encode_logical(qudit, n_spins, total_j, centered_levels(qudit.dim(), total_j));
}

PiDensityState encode_logical(const LogicalQudit& qudit, int n_spins, HalfInt total_j,
                              const LevelAssignment& levels) {
  require_valid_sector(n_spins, total_j);
  if (static_cast<int>(levels.size()) != qudit.dim()) {
    throw std::domain_error("level assignment size differs from qudit dimension");
  }
  if (qudit.dim() > block_dim(total_j)) throw CapacityError("subspace too small");
  const int dim = block_dim(total_j);
  Block b = Block::Zero(dim, dim);
  for (int r = 0; r < qudit.dim(); ++r) {
    if (!level_in_block(total_j, levels[r])) throw CapacityError("level outside block");
    for (int c = 0; c < qudit.dim(); ++c) {
      b(level_index(total_j, levels[r]), level_index(total_j, levels[c])) = qudit.rho()(r, c);
    }
  }
  PiDensityState out(n_spins);
  out.set_block({n_spins, total_j}, std::move(b));
  return out;
}

DecodedQudit decode_logical(const PiDensityState& state, HalfInt total_j) {
  const Sector s{state.n_spins(), total_j};
  if (!state.has_block(s)) throw EmptyBlockError("requested block is absent");
  // Logical dimension is inferred from the block's support.
  const Block& b = state.block(s);
  const int dim = block_dim(total_j);
  int lo = dim, hi = -1;
  for (int i = 0; i < dim; ++i) {
    if (std::abs(b(i, i)) > 0.0) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  if (hi < 0) throw EmptyBlockError("requested block has zero weight");
  // Smallest centered window covering the support.
  int d = hi - lo + 1;
  while (d <= dim) {
    const int offset = (dim - d) / 2;
    if (offset <= lo && offset + d - 1 >= hi) break;
    ++d;
  }
  return decode_logical(state, s, centered_levels(d, total_j));
}

DecodedQudit decode_logical(const PiDensityState& state, Sector sector,
                            const LevelAssignment& levels) {
  if (!state.has_block(sector)) throw EmptyBlockError("requested block is absent");
  const Block& b = state.block(sector);
  const double w = b.trace().real();
  const int d = static_cast<int>(levels.size());
  Block sub(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      sub(r, c) = b(level_index(sector.j, levels[r]), level_index(sector.j, levels[c]));
    }
  }
  const double sub_w = sub.trace().real();
  if (!(sub_w > 0.0)) throw EmptyBlockError("requested block has zero weight");
  return {LogicalQudit(sub / sub_w, 1e-8), w};
}

namespace {

double level_value(HalfInt j, HalfInt m, CollectiveOp op) {
  switch (op) {
    case CollectiveOp::kJz:
      return m.value();
    case CollectiveOp::kJz2:
      return m.value() * m.value();
    case CollectiveOp::kJ2:
      return j.value() * (j.value() + 1.0);
  }
  return 0.0;
}

}  // namespace

double collective_expectation(const PiDensityState& state, CollectiveOp op) {
  double acc = 0.0;
  for (const auto& [s, b] : state.blocks()) {
    for (int i = 0; i < b.rows(); ++i) acc += b(i, i).real() * level_value(s.j, level_at(s.j, i), op);
  }
  return acc;
}

double collective_expectation(const TrajectoryState& state, CollectiveOp op) {
  double acc = 0.0;
  const auto& a = state.amplitudes();
  for (int i = 0; i < a.size(); ++i) {
    acc += std::norm(a(i)) * level_value(state.total_j(), level_at(state.total_j(), i), op);
  }
  return acc;
}

}  // namespace piqec
