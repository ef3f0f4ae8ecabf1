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

#include "piqec/dynamics.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "piqec/errors.hpp"
#include "piqec/oracle.hpp"
#include "piqec/parallel.hpp"

using namespace piqec;

namespace {

HalfInt H(int twice) { return HalfInt::from_twice(twice); }

NoiseModel only_collective(int m, double rate) {
  NoiseModel n;
  n.collective[m + 1] = rate;
  return n;
}

double total_rate(const std::vector<BranchRate>& w) {
  double s = 0.0;
  for (const auto& b : w) s += b.rate;
  return s;
}

NoiseModel all_channels(double r) {
  NoiseModel n;
  n.collective = {r, r, r};
  n.individual = {r, r, r};
  n.loss = r;
  return n;
}

}  // namespace

TEST(Dynamics, GroundStateDoesNotDecay) {
  for (int n : {2, 5, 8}) {
    const auto psi = TrajectoryState::dicke(n, H(n), H(-n));
    EXPECT_EQ(total_rate(jump_weights(psi, only_collective(-1, 1.0))), 0.0);
  }
}

TEST(Dynamics, SuperradiantTopRateMatchesLadderOracle) {
  for (int n : {2, 4, 7}) {
    const auto basis = oracle::FullStateBasis::build(n);
    const Eigen::VectorXd top = basis.vectors().col(basis.column(H(n), H(n), 0));
    const double expected = oracle::apply_collective(-1, n, top).squaredNorm();
    const auto psi = TrajectoryState::dicke(n, H(n), H(n));
    EXPECT_NEAR(total_rate(jump_weights(psi, only_collective(-1, 1.0))), expected, 1e-12);
    EXPECT_NEAR(expected, n, 1e-12);
  }
}

TEST(Dynamics, LossWeightsSumToLossRate) {
  NoiseModel noise;
  noise.loss = 0.7;
  Amplitudes a(4);
  a << Complex(0.3, 0.1), Complex(-0.5, 0.0), Complex(0.2, 0.4), Complex(0.1, -0.6);
  const TrajectoryState psi(5, H(3), a);
  double s = 0.0;
  for (const auto& b : jump_weights(psi, noise)) {
    EXPECT_EQ(b.branch.kind, ChannelKind::kLoss);
    s += b.rate;
  }
  EXPECT_NEAR(s, 0.7, 1e-12);
}

TEST(Dynamics, CollectiveDecaySingleDestination) {
  const auto psi = TrajectoryState::dicke(2, H(2), H(2));
  const auto out = apply_jump(psi, collective_branches()[0]);
  EXPECT_EQ(out.total_j(), H(2));
  EXPECT_NEAR(std::abs(out.amplitude(H(0))), 1.0, 1e-14);
}

TEST(Dynamics, LossJumpMatchesPartialTrace) {
  // |↑↑⟩ with one spin traced out leaves |↑⟩.
  const auto basis = oracle::FullStateBasis::build(2);
  const Eigen::VectorXd up_up = basis.vectors().col(basis.column(H(2), H(2), 0));
  Eigen::Matrix2d reduced = Eigen::Matrix2d::Zero();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int top = 0; top < 2; ++top) reduced(a, b) += up_up(a + 2 * top) * up_up(b + 2 * top);
    }
  }
  EXPECT_NEAR(reduced(1, 1), 1.0, 1e-14);

  const auto psi = TrajectoryState::dicke(2, H(2), H(2));
  NoiseModel noise;
  noise.loss = 1.0;
  const auto w = jump_weights(psi, noise);
  int live = 0;
  for (const auto& b : w) {
    if (b.rate == 0.0) continue;
    ++live;
    EXPECT_EQ(b.branch.dj, H(-1));
    EXPECT_EQ(b.branch.dm, H(-1));
    const auto out = apply_jump(psi, b.branch);
    EXPECT_EQ(out.n_spins(), 1);
    EXPECT_EQ(out.total_j(), H(1));
    EXPECT_NEAR(std::abs(out.amplitude(H(1))), std::sqrt(reduced(1, 1)), 1e-14);
  }
  EXPECT_EQ(live, 1);
}

TEST(Dynamics, ZeroWeightBranchIsRejected) {
  const auto psi = TrajectoryState::dicke(4, H(4), H(-4));
  EXPECT_THROW(apply_jump(psi, collective_branches()[0]), ImpossibleBranchError);
}

TEST(Dynamics, NoJumpIdentityCases) {
  Amplitudes a(3);
  a << 0.6, Complex(0.0, 0.48), 0.64;
  const TrajectoryState psi(2, H(2), a);
  EXPECT_TRUE(no_jump_step(psi, NoiseModel{}, 0.1).amplitudes().isApprox(psi.amplitudes()));
  const auto single = TrajectoryState::dicke(4, H(4), H(2));
  const auto out = no_jump_step(single, all_channels(1.0), 0.01);
  EXPECT_NEAR(std::abs(out.amplitude(H(2))), 1.0, 1e-14);
}

TEST(Dynamics, TwoLevelDriftClosedForm) {
  // Levels M=2 (Λ=4) and M=-2 (Λ=0) of J=2 under Γ₋₁ = 1.
  Amplitudes a = Amplitudes::Zero(5);
  a(0) = a(4) = std::sqrt(0.5);
  const TrajectoryState psi(4, H(4), a);
  double last = 1.0;
  for (double dt : {0.01, 0.05, 0.1, 0.2}) {
    const auto out = no_jump_step(psi, only_collective(-1, 1.0), dt);
    const double ratio = std::abs(out.amplitude(H(4)) / out.amplitude(H(-4)));
    EXPECT_NEAR(ratio, std::exp(-0.5 * dt * 4.0), 1e-12);
    EXPECT_LT(ratio, last);
    last = ratio;
  }
}

TEST(Dynamics, JumpsRespectSectorBounds) {
  const JumpModel model(all_channels(1.0), CoefficientTable::shared(6), 6);
  Rng rng = Rng::stream(3, 0);
  TrajectoryHooks hooks;
  const auto rec = evolve_trajectory(TrajectoryState::dicke(6, H(6), H(2)), model,
                                     {3.0, 1e-3, 100}, rng, hooks);
  ASSERT_FALSE(rec.jumps.empty());
  int n = 6;
  for (const auto& e : rec.jumps) {
    EXPECT_EQ(e.j_after, e.j_before + e.branch.dj);
    if (e.branch.kind == ChannelKind::kLoss) --n;
    EXPECT_EQ(e.n_after, n);
    EXPECT_TRUE(valid_sector(e.n_after, e.j_after));
  }
}

TEST(Dynamics, ZeroNoiseKeepsState) {
  Amplitudes a(3);
  a << 0.6, 0.0, 0.8;
  const TrajectoryState psi(2, H(2), a);
  TrajectoryHooks hooks;
  hooks.observe = [&](const TrajectoryState& s, double) {
    return std::vector<double>{(s.amplitudes() - psi.amplitudes()).norm()};
  };
  const auto rec = evolve_trajectory(psi, NoiseModel{}, 1.0, 0.01, 7, hooks);
  EXPECT_EQ(rec.times.size(), 101u);
  for (const auto& o : rec.observables) EXPECT_EQ(o[0], 0.0);
  EXPECT_TRUE(rec.jumps.empty());
}

TEST(Dynamics, SeedReproducibility) {
  const JumpModel model(all_channels(0.5), CoefficientTable::shared(6), 6);
  TrajectoryHooks hooks;
  hooks.observe = [](const TrajectoryState& s, double) {
    return std::vector<double>{collective_expectation(s, CollectiveOp::kJz), s.total_j().value()};
  };
  const auto psi = TrajectoryState::dicke(6, H(6), H(0));
  const auto a = run_ensemble(psi, model, {2.0, 1e-3, 10}, 42, 16, 1, hooks);
  const auto b = run_ensemble(psi, model, {2.0, 1e-3, 10}, 42, 16, 4, hooks);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::ostringstream sa, sb;
    write_jsonl(sa, a[i]);
    write_jsonl(sb, b[i]);
    EXPECT_EQ(sa.str(), sb.str());
  }
  const auto c = run_ensemble(psi, model, {2.0, 1e-3, 10}, 43, 16, 1, hooks);
  std::ostringstream sa, sc;
  for (const auto& r : a) write_jsonl(sa, r);
  for (const auto& r : c) write_jsonl(sc, r);
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Dynamics, NegativeRateRejected) {
  NoiseModel n;
  n.individual[1] = -0.1;
  EXPECT_THROW(n.validate(), std::invalid_argument);
}

TEST(Master, TracePreserved) {
  Amplitudes a(7);
  a << 0.1, 0.2, 0.3, 0.4, 0.5, 0.3, 0.2;
  const auto rho = PiDensityState::from_trajectory(TrajectoryState(6, H(6), a));
  const auto out = evolve_master(rho, all_channels(0.3), 2.0, 1e-2);
  EXPECT_NEAR(out.trace(), 1.0, 1e-8);
  EXPECT_GT(out.min_eigenvalue(), -1e-10);
  EXPECT_GT(out.blocks().size(), 4u);
}

TEST(Master, CollectiveDephasingKeepsDiagonal) {
  Amplitudes a(5);
  a << 0.1, Complex(0.2, 0.3), 0.3, 0.4, Complex(0.5, -0.1);
  const auto rho = PiDensityState::from_trajectory(TrajectoryState(4, H(4), a));
  const auto out = evolve_master(rho, only_collective(0, 1.0), 1.0, 1e-2);
  const Sector s{4, H(4)};
  EXPECT_LT((out.block(s).diagonal() - rho.block(s).diagonal()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(std::abs(out.block(s)(0, 4)), std::abs(rho.block(s)(0, 4)));
}

TEST(Master, MatchesFullSpaceLindblad) {
  Amplitudes a(7);
  a << 0.1, Complex(0.2, 0.1), 0.3, 0.4, Complex(0.5, -0.2), 0.3, 0.2;
  Amplitudes b(3);
  b << 0.5, Complex(0.0, 0.5), 0.7;
  PiDensityState rho = 0.6 * PiDensityState::from_trajectory(TrajectoryState(6, H(6), a));
  rho += 0.4 * PiDensityState::from_trajectory(TrajectoryState(6, H(2), b));
  const NoiseModel noise{{0.3, 0.2, 0.1}, {0.25, 0.15, 0.05}, 0.2};
  const double t = 1.0, dt = 1e-2;
  const auto pi = evolve_master(rho, noise, t, dt);
  oracle::FullNoise full{noise.collective, noise.individual, noise.loss};
  double residual = 0.0;
  const auto full_out = oracle::project(oracle::evolve_lindblad(oracle::lift(rho), full, t, dt),
                                        &residual);
  EXPECT_LT(residual, 1e-10);
  EXPECT_LT(oracle::trace_distance(pi, full_out), 1e-6);
}

TEST(Master, GuardsLargeN) {
  const auto rho = PiDensityState::from_trajectory(TrajectoryState::dicke(41, H(41), H(41)));
  EXPECT_THROW(evolve_master(rho, all_channels(0.1), 0.1, 0.01), ResourceError);
}

TEST(Master, CoarseStepRaisesIntegrationError) {
  const auto rho = PiDensityState::from_trajectory(TrajectoryState::dicke(6, H(6), H(6)));
  EXPECT_THROW(evolve_master(rho, only_collective(-1, 50.0), 1.0, 0.5), IntegrationError);
}

TEST(Master, TrajectoryAverageAgrees) {
  // N = 6 pure individual decay; ⟨Jz⟩ from 10⁴ trajectories vs the integrator.
  NoiseModel noise;
  noise.individual[0] = 0.3;
  const auto psi = TrajectoryState::dicke(6, H(6), H(6));
  const JumpModel model(noise, CoefficientTable::shared(6), 6);
  const double t_max = 2.0, dt = 2e-3;
  TrajectoryHooks hooks;
  hooks.observe = [](const TrajectoryState& s, double) {
    return std::vector<double>{collective_expectation(s, CollectiveOp::kJz)};
  };
  const auto recs = run_ensemble(psi, model, {t_max, dt, 100}, 11, 10000, default_threads(), hooks);
  const Curve c = aggregate(recs, 0);
  std::vector<double> exact;
  int step = 0;
  evolve_master(PiDensityState::from_trajectory(psi), model, t_max, dt,
                [&](double, const PiDensityState& r) {
                  if (step++ % 100 == 0) exact.push_back(collective_expectation(r, CollectiveOp::kJz));
                });
  ASSERT_EQ(exact.size(), c.times.size());
  for (std::size_t k = 1; k < exact.size(); ++k) {
    EXPECT_LT(std::abs(c.mean[k] - exact[k]), 3.0 * c.stderr_[k] + 1e-12) << "t=" << c.times[k];
  }
}
