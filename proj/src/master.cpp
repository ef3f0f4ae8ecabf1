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

#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "piqec/dynamics.hpp"
#include "piqec/errors.hpp"

namespace piqec {

namespace {

struct Transfer {
  int target = 0;  // index into the block list
  int offset = 0;  // target level index minus source level index
  double rate = 0.0;
  const Eigen::VectorXd* coefficients = nullptr;
};

struct BlockPlan {
  Sector sector;
  const SectorRates* rates = nullptr;
  std::vector<Transfer> transfers;
};

std::vector<BlockPlan> plan_blocks(const PiDensityState& initial, const JumpModel& model) {
  std::vector<BlockPlan> plans;
  std::map<Sector, int> index;
  std::deque<Sector> todo;
  auto visit = [&](Sector s) {
    if (index.count(s)) return index[s];
    const int id = static_cast<int>(plans.size());
    index[s] = id;
    plans.push_back({s, &model.sector(s.n, s.j), {}});
    todo.push_back(s);
    return id;
  };
  for (const auto& [s, b] : initial.blocks()) visit(s);
  while (!todo.empty()) {
    const Sector s = todo.front();
    todo.pop_front();
    const SectorRates& sr = model.sector(s.n, s.j);
    std::vector<Transfer> transfers;
    for (std::size_t k = 0; k < sr.branches.size(); ++k) {
      const Branch& b = sr.branches[k];
      const Sector t{b.kind == ChannelKind::kLoss ? s.n - 1 : s.n, s.j + b.dj};
      const int id = visit(t);
      transfers.push_back({id, level_index(t.j, level_at(s.j, 0) + b.dm), sr.rates[k],
                           sr.coefficients[k]});
    }
    plans[index[s]].transfers = std::move(transfers);
  }
  return plans;
}

using Blocks = std::vector<Block>;

void rhs(const std::vector<BlockPlan>& plans, const Blocks& rho, Blocks& out) {
  for (std::size_t i = 0; i < plans.size(); ++i) out[i].setZero();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const BlockPlan& p = plans[i];
    const Block& r = rho[i];
    const Eigen::VectorXd& lam = p.rates->decay;
    const int d = static_cast<int>(r.rows());
    for (int c = 0; c < d; ++c) {
      for (int a = 0; a < d; ++a) out[i](a, c) -= 0.5 * (lam(a) + lam(c)) * r(a, c);
    }
    for (const Transfer& tr : p.transfers) {
      Block& dst = out[static_cast<std::size_t>(tr.target)];
      const Eigen::VectorXd& co = *tr.coefficients;
      const int dt = static_cast<int>(dst.rows());
      for (int c = 0; c < d; ++c) {
        const int c2 = c + tr.offset;
        if (co(c) == 0.0 || c2 < 0 || c2 >= dt) continue;
        for (int a = 0; a < d; ++a) {
          const int a2 = a + tr.offset;
          if (co(a) == 0.0 || a2 < 0 || a2 >= dt) continue;
          dst(a2, c2) += tr.rate * co(a) * co(c) * r(a, c);
        }
      }
    }
  }
}

PiDensityState to_state(int n, const std::vector<BlockPlan>& plans, const Blocks& rho) {
  PiDensityState s(n);
  for (std::size_t i = 0; i < plans.size(); ++i) s.set_block(plans[i].sector, rho[i]);
  return s;
}

}  // namespace

PiDensityState evolve_master(const PiDensityState& initial, const JumpModel& model, double t_max,
                             double dt, const std::function<void(double, const PiDensityState&)>& sample) {
  if (initial.n_spins() > kMasterMaxSpins) {
    throw ResourceError("evolve_master: N=" + std::to_string(initial.n_spins()) +
                        " exceeds the block-set guard of " + std::to_string(kMasterMaxSpins));
  }
  if (!(dt > 0.0) || !(t_max >= 0.0)) {
    throw std::invalid_argument("evolve_master: need dt > 0 and t_max >= 0");
  }
  const std::vector<BlockPlan> plans = plan_blocks(initial, model);
  Blocks rho(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const int d = block_dim(plans[i].sector.j);
    rho[i] = initial.has_block(plans[i].sector) ? initial.block(plans[i].sector)
                                                : Block::Zero(d, d);
  }
  auto trace = [](const Blocks& b) {
    double t = 0.0;
    for (const auto& m : b) t += m.trace().real();
    return t;
  };
  const double trace0 = trace(rho);
  if (sample) sample(0.0, to_state(initial.n_spins(), plans, rho));

  Blocks k1 = rho, k2 = rho, k3 = rho, k4 = rho, tmp = rho;
  auto axpy = [&](const Blocks& base, double h, const Blocks& k) {
    for (std::size_t i = 0; i < base.size(); ++i) tmp[i] = base[i] + h * k[i];
  };
  const long steps = std::lround(t_max / dt);
  for (long s = 1; s <= steps; ++s) {
    rhs(plans, rho, k1);
    axpy(rho, 0.5 * dt, k1);
    rhs(plans, tmp, k2);
    axpy(rho, 0.5 * dt, k2);
    rhs(plans, tmp, k3);
    axpy(rho, dt, k3);
    rhs(plans, tmp, k4);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      rho[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const double drift = std::abs(trace(rho) - trace0);
    if (!(drift <= kTraceDriftLimit)) {
      throw IntegrationError("evolve_master: trace drift " + std::to_string(drift) + " at t=" +
                             std::to_string(s * dt) + "; reduce dt");
    }
    if (sample) sample(static_cast<double>(s) * dt, to_state(initial.n_spins(), plans, rho));
  }
  return to_state(initial.n_spins(), plans, rho);
}

PiDensityState evolve_master(const PiDensityState& initial, const NoiseModel& noise, double t_max,
                             double dt, const std::function<void(double, const PiDensityState&)>& sample) {
  if (initial.n_spins() > kMasterMaxSpins) {
    throw ResourceError("evolve_master: N=" + std::to_string(initial.n_spins()) +
                        " exceeds the block-set guard of " + std::to_string(kMasterMaxSpins));
  }
  const int n = std::max(2, initial.n_spins());
  const JumpModel model(noise, CoefficientTable::shared(n), initial.n_spins());
  return evolve_master(initial, model, t_max, dt, sample);
}

}  // namespace piqec
