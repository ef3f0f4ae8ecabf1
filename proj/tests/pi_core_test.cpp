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

#include <random>

#include <gtest/gtest.h>

#include "piqec/oracle.hpp"

using namespace piqec;

namespace {

// Number of spin-J multiplets, counted from the spectrum of Ĵ² on the full space.
int multiplets_from_spectrum(int n, HalfInt j) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::total_j2(n));
  const double target = j.value() * (j.value() + 1.0);
  int count = 0;
  for (double e : es.eigenvalues()) count += std::abs(e - target) < 1e-8;
  return count / block_dim(j);
}

Amplitudes random_state(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  Amplitudes a(d);
  for (int i = 0; i < d; ++i) a(i) = Complex(g(rng), g(rng));
  return a.normalized();
}

LogicalQudit random_qudit(std::mt19937_64& rng, int d) {
  Block rho = Block::Zero(d, d);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < d; ++k) {
    const Amplitudes v = random_state(rng, d);
    rho += u(rng) * v * v.adjoint();
  }
  return LogicalQudit(rho / rho.trace().real());
}

}  // namespace

TEST(degeneracy, small_cases) {
  EXPECT_EQ(degeneracy(2, 1), 1);
  EXPECT_EQ(degeneracy(2, 0), 1);
  EXPECT_EQ(degeneracy(4, 1), 3);
  EXPECT_EQ(degeneracy(1, kHalf), 1);
}

TEST(degeneracy, matches_full_space_spectrum) {
  for (int n = 1; n <= 8; ++n) {
    for (int t = n % 2; t <= n; t += 2) {
      const HalfInt j = HalfInt::from_twice(t);
      EXPECT_EQ(degeneracy(n, j), multiplets_from_spectrum(n, j)) << "N=" << n << " J=" << j;
    }
  }
}

TEST(degeneracy, sum_rule_exact) {
  for (int n = 1; n <= 200; ++n) {
    BigInt total = 0;
    for (int t = n % 2; t <= n; t += 2) total += degeneracy(n, HalfInt::from_twice(t)) * (t + 1);
    EXPECT_EQ(total, BigInt(1) << n) << "N=" << n;
  }
}

TEST(degeneracy, invalid_pairs_rejected) {
  EXPECT_THROW(degeneracy(2, kHalf), std::domain_error);
  EXPECT_THROW(degeneracy(3, 2), std::domain_error);
  EXPECT_THROW(degeneracy(0, 0), std::domain_error);
}

TEST(trajectory_state, normalizes_and_checks_shape) {
  Amplitudes a(3);
  a << 1.0, 0.0, 1.0;
  TrajectoryState s(2, 1, a);
  EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-12);
  EXPECT_THROW(TrajectoryState(2, 1, Amplitudes::Zero(3)), ImpossibleBranchError);
  EXPECT_THROW(TrajectoryState(2, 1, Amplitudes::Ones(2)), std::domain_error);
  EXPECT_THROW(TrajectoryState(3, 0, Amplitudes::Ones(1)), std::domain_error);
}

TEST(encode_logical, transcribes_matrix_elements) {
  const auto pure0 = encode_logical(LogicalQudit::maximally_mixed(1), 20, 10);
  const Block& b0 = pure0.block({20, 10});
  EXPECT_DOUBLE_EQ(b0.trace().real(), 1.0);
  EXPECT_DOUBLE_EQ(b0(10, 10).real(), 1.0);

  const auto mixed = encode_logical(LogicalQudit::maximally_mixed(3), 2, 1);
  EXPECT_TRUE(mixed.block({2, 1}).isApprox(Block::Identity(3, 3) / 3.0));

  Amplitudes plus(2);
  plus << 1.0, 1.0;
  const auto enc = encode_logical(LogicalQudit::pure(plus), 20, 10);
  const Block& b = enc.block({20, 10});
  const int lo = level_index(10, -1), hi = level_index(10, 0);
  EXPECT_NEAR(b(lo, lo).real(), 0.5, 1e-15);
  EXPECT_NEAR(b(hi, hi).real(), 0.5, 1e-15);
  EXPECT_NEAR(b(lo, hi).real(), 0.5, 1e-15);
  Eigen::SelfAdjointEigenSolver<Block> es(b);
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues().cwiseAbs().sum(), 1.0, 1e-12);
}

TEST(encode_logical, capacity_error) {
  EXPECT_THROW(encode_logical(LogicalQudit::maximally_mixed(4), 2, 1), CapacityError);
}

TEST(decode_logical, round_trip_random_qudits) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 12);
    const int t = (n % 2) + 2 * static_cast<int>(rng() % (n / 2 + 1));
    const HalfInt j = HalfInt::from_twice(std::min(t, n));
    const int d = 1 + static_cast<int>(rng() % block_dim(j));
    const LogicalQudit q = random_qudit(rng, d);
    const auto decoded = decode_logical(encode_logical(q, n, j), {n, j}, centered_levels(d, j));
    EXPECT_NEAR(decoded.weight, 1.0, 1e-12);
    EXPECT_LT((decoded.qudit.rho() - q.rho()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(decode_logical, reports_block_weight_and_renormalizes) {
  PiDensityState s(4);
  s.set_block({4, 2}, 0.7 * Block::Identity(5, 5) / 5.0);
  s.set_block({4, 1}, 0.3 * Block::Identity(3, 3) / 3.0);
  const auto d = decode_logical(s, 1);
  EXPECT_NEAR(d.weight, 0.3, 1e-15);
  EXPECT_NEAR(d.qudit.rho().trace().real(), 1.0, 1e-15);
  EXPECT_THROW(decode_logical(s, 0), EmptyBlockError);
}

TEST(collective_expectation, reference_values) {
  const auto top = PiDensityState::from_trajectory(TrajectoryState::dicke(6, 3, 3));
  EXPECT_DOUBLE_EQ(collective_expectation(top, CollectiveOp::kJz), 3.0);
  EXPECT_DOUBLE_EQ(collective_expectation(top, CollectiveOp::kJ2), 12.0);
  const auto singlet = PiDensityState::from_trajectory(TrajectoryState::dicke(2, 0, 0));
  EXPECT_DOUBLE_EQ(collective_expectation(singlet, CollectiveOp::kJ2), 0.0);
  PiDensityState mix(2);
  Block b = Block::Zero(3, 3);
  b(0, 0) = 0.5;
  b(2, 2) = 0.5;
  mix.set_block({2, 1}, b);
  EXPECT_DOUBLE_EQ(collective_expectation(mix, CollectiveOp::kJz), 0.0);
  EXPECT_DOUBLE_EQ(collective_expectation(mix, CollectiveOp::kJz2), 1.0);
}

TEST(pi_density_state, validate_rejects_bad_states) {
  PiDensityState s(2);
  Block b = Block::Zero(3, 3);
  b(0, 0) = 1.5;
  b(2, 2) = -0.5;
  s.set_block({2, 1}, b);
  EXPECT_THROW(s.validate(), std::domain_error);
  EXPECT_THROW(s.set_block({2, 1}, Block::Zero(2, 2)), std::domain_error);
}
