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

#include "piqec/oracle.hpp"

#include <gtest/gtest.h>

using namespace piqec;
using namespace piqec::oracle;

namespace {

std::map<ShiftKey, double> predicted_image(int n, HalfInt j, HalfInt a, HalfInt b, OracleChannel ch) {
  std::map<ShiftKey, double> p;
  switch (ch.kind) {
    case ChannelKind::kCollective:
      p[{0, ch.m}] = collective_coeff(j, a, ch.m) * collective_coeff(j, b, ch.m);
      break;
    case ChannelKind::kIndividual:
      for (int dj : kShifts) p[{dj, ch.m}] = individual_coeff(n, j, a, dj, ch.m) * individual_coeff(n, j, b, dj, ch.m);
      break;
    case ChannelKind::kLoss:
      for (const Branch& br : loss_branches()) {
        p[{br.dj, br.dm}] = loss_coeff(n, j, a, br.dj, br.dm) * loss_coeff(n, j, b, br.dj, br.dm);
      }
      break;
  }
  return p;
}

}  // namespace

TEST(full_state_basis, small_cases) {
  const auto b1 = FullStateBasis::build(1);
  EXPECT_TRUE(b1.vectors().isApprox(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_EQ(b1.j_values(), std::vector<HalfInt>{kHalf});
  const auto b2 = FullStateBasis::build(2);
  EXPECT_EQ(b2.multiplicity(1), 1);
  EXPECT_EQ(b2.multiplicity(0), 1);
  const auto b6 = FullStateBasis::build(6);
  EXPECT_EQ(b6.multiplicity(3), 1);
  EXPECT_EQ(b6.multiplicity(2), 5);
  EXPECT_EQ(b6.multiplicity(1), 9);
  EXPECT_EQ(b6.multiplicity(0), 5);
  EXPECT_THROW(FullStateBasis::build(13), ResourceError);
}

TEST(full_state_basis, orthonormal_and_diagonalizes_j2_jz) {
  for (int n : {3, 4, 7}) {
    const auto b = FullStateBasis::build(n);
    const Eigen::MatrixXd& v = b.vectors();
    EXPECT_LT((v.transpose() * v - Eigen::MatrixXd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::MatrixXd j2 = v.transpose() * total_j2(n) * v;
    const Eigen::MatrixXd jz = v.transpose() * total_jz(n) * v;
    for (HalfInt j : b.j_values()) {
      EXPECT_EQ(b.multiplicity(j), degeneracy(n, j));
      for (int i = 0; i < block_dim(j); ++i) {
        for (int k = 0; k < b.multiplicity(j); ++k) {
          const int c = b.column(j, level_at(j, i), k);
          EXPECT_NEAR(j2(c, c), j.value() * (j.value() + 1.0), 1e-12);
          EXPECT_NEAR(jz(c, c), level_at(j, i).value(), 1e-12);
        }
      }
    }
    EXPECT_LT((j2 - Eigen::MatrixXd(j2.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(apply_channel_exact, barred_in_barred_out_small_n) {
  for (int n = 2; n <= 5; ++n) {
    const auto basis = FullStateBasis::build(n);
    const auto below = FullStateBasis::build(n - 1);
    for (HalfInt j : basis.j_values()) {
      for (int a = 0; a < block_dim(j); ++a) {
        for (int b = 0; b < block_dim(j); ++b) {
          std::vector<OracleChannel> chans = {{ChannelKind::kLoss, 0}};
          for (int m : kShifts) {
            chans.push_back({ChannelKind::kCollective, m});
            chans.push_back({ChannelKind::kIndividual, m});
          }
          for (const auto& ch : chans) {
            const auto pred = predicted_image(n, j, level_at(j, a), level_at(j, b), ch);
            const auto img = apply_channel_exact(basis, &below, j, level_at(j, a), level_at(j, b), ch, &pred);
            EXPECT_LT(img.residual, 1e-12);
            EXPECT_LT(img.prediction_deviation, 1e-12);
            for (const auto& [key, c] : img.coefficients) {
              if (ch.kind == ChannelKind::kCollective) EXPECT_EQ(key.first, HalfInt(0));
              if (ch.kind == ChannelKind::kLoss) EXPECT_EQ(abs(key.first), kHalf);
            }
            if (ch.kind == ChannelKind::kLoss && a == b) EXPECT_NEAR(img.trace, 1.0, 1e-12);
          }
        }
      }
    }
  }
}

TEST(apply_channel_exact, individual_channel_trace_equals_weight) {
  const auto basis = FullStateBasis::build(4);
  for (HalfInt j : basis.j_values()) {
    for (int a = 0; a < block_dim(j); ++a) {
      const HalfInt lvl = level_at(j, a);
      const auto img = apply_channel_exact(basis, nullptr, j, lvl, lvl, {ChannelKind::kIndividual, -1});
      EXPECT_NEAR(img.trace, 2.0 + lvl.value(), 1e-12);
    }
  }
}

TEST(loss_dephasing_equivalence, n4_and_rate_independent_of_m) {
  const auto rep = verify_loss_dephasing_equivalence(4);
  EXPECT_LT(rep.deviation, 1e-10);
  EXPECT_NEAR(rep.identity_weight, 0.5, 1e-10);
  EXPECT_NEAR(rep.dephasing_rate, 1.0 / 8.0, 1e-10);
  EXPECT_LT(rep.rate_spread, 1e-10);
  EXPECT_GT(rep.raw_deviation, 0.1);
}

TEST(loss_dephasing_equivalence, n2_singlet_explicit) {
  const auto basis = FullStateBasis::build(2);
  const Eigen::VectorXd singlet = basis.sector_columns(0, 0).col(0);
  const Eigen::MatrixXd rho = singlet * singlet.transpose();
  Eigen::MatrixXd composite = Eigen::MatrixXd::Zero(4, 4), dephased = composite;
  for (int s = 0; s < 2; ++s) {
    for (int keep : {0, 1}) {
      Eigen::VectorXd v = singlet;
      for (int x = 0; x < 4; ++x) {
        if (((x >> s) & 1) != keep) v(x) = 0.0;
      }
      composite += v * v.transpose() / 2.0;
    }
    const Eigen::VectorXd z = apply_sigma(0, s, singlet);
    dephased += z * z.transpose();
  }
  EXPECT_LT((composite - (0.5 * rho + dephased / 4.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(lift_project, round_trip_and_residual) {
  PiDensityState s(4);
  Block b = Block::Zero(3, 3);
  b(0, 0) = 0.25;
  b(2, 2) = 0.25;
  b(0, 2) = Complex(0.1, 0.2);
  b(2, 0) = Complex(0.1, -0.2);
  s.set_block({4, 1}, b);
  s.set_block({4, 2}, 0.5 * Block::Identity(5, 5) / 5.0);
  double residual = 1.0;
  const auto back = project(lift(s), &residual);
  EXPECT_LT(residual, 1e-14);
  EXPECT_LT(trace_distance(s, back), 1e-14);
}
