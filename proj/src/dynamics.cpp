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

#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "piqec/errors.hpp"
#include "piqec/parallel.hpp"

namespace piqec {

void NoiseModel::validate() const {
  auto check = [](double r, const char* what) {
    if (!std::isfinite(r) || r < 0.0) {
      throw std::invalid_argument(std::string("noise rate ") + what + " must be finite and >= 0");
    }
  };
  for (double r : collective) check(r, "Gamma");
  for (double r : individual) check(r, "gamma");
  check(loss, "gamma_d");
}

bool NoiseModel::is_zero() const { return max_rate() == 0.0; }

double NoiseModel::max_rate() const {
  double m = loss;
  for (double r : collective) m = std::max(m, r);
  for (double r : individual) m = std::max(m, r);
  return m;
}

double NoiseModel::rate(const Branch& b, int n_spins) const {
  switch (b.kind) {
    case ChannelKind::kCollective:
      return collective[b.dm.twice() / 2 + 1];
    case ChannelKind::kIndividual:
      return individual[b.dm.twice() / 2 + 1];
    case ChannelKind::kLoss:
      return n_spins >= 2 ? loss : 0.0;
  }
  return 0.0;
}

namespace {

Sector target_sector(int n, HalfInt j, const Branch& b) {
  return {b.kind == ChannelKind::kLoss ? n - 1 : n, j + b.dj};
}

SectorRates build_sector(const NoiseModel& noise, const CoefficientTable& table, int n, HalfInt j) {
  SectorRates out;
  const SectorCoefficients& sc = table.sector(n, j);
  auto consider = [&](const Branch& b) {
    const double r = noise.rate(b, n);
    if (r == 0.0) return;
    const Sector t = target_sector(n, j, b);
    if (t.n < 1 || !valid_sector(t.n, t.j)) return;
    const Eigen::VectorXd& row = sc.row(b);
    if (row.size() == 0 || row.cwiseAbs().maxCoeff() == 0.0) return;
    out.branches.push_back(b);
    out.rates.push_back(r);
    out.coefficients.push_back(&row);
  };
  for (const Branch& b : collective_branches()) consider(b);
  for (const Branch& b : individual_branches()) consider(b);
  for (const Branch& b : loss_branches()) consider(b);

  const int d = block_dim(j);
  out.weights.setZero(static_cast<Eigen::Index>(out.branches.size()), d);
  for (std::size_t k = 0; k < out.branches.size(); ++k) {
    out.weights.row(static_cast<Eigen::Index>(k)) =
        out.rates[k] * out.coefficients[k]->array().square().matrix().transpose();
  }
  out.decay = out.weights.colwise().sum().transpose();
  if (out.decay.size() == 0) out.decay = Eigen::VectorXd::Zero(d);
  out.max_decay = out.decay.size() ? out.decay.maxCoeff() : 0.0;
  return out;
}

}  // namespace

SectorRates sector_rates(const NoiseModel& noise, const CoefficientTable& table, int n_spins,
                         HalfInt j) {
  require_valid_sector(n_spins, j);
  return build_sector(noise, table, n_spins, j);
}

namespace {

// Offset between level indices of the source and the target block.
int shift_offset(HalfInt j, HalfInt j_target, HalfInt dm) {
  return level_index(j_target, level_at(j, 0) + dm);
}

}  // namespace

JumpModel::JumpModel(const NoiseModel& noise, const CoefficientTable& table, int n_max)
    : noise_(noise), table_(&table), n_max_(n_max) {
  noise_.validate();
  if (n_max < 1 || n_max > table.n_max()) {
    throw std::out_of_range("JumpModel: N=" + std::to_string(n_max) +
                            " not covered by the coefficient table");
  }
  sectors_.resize(n_max + 1);
  for (int n = 1; n <= n_max; ++n) {
    sectors_[n].resize(n + 1);
    for (int tj = n % 2; tj <= n; tj += 2) {
      sectors_[n][tj] = build_sector(noise_, table, n, HalfInt::from_twice(tj));
      max_total_ = std::max(max_total_, sectors_[n][tj].max_decay);
    }
  }
}

const SectorRates& JumpModel::sector(int n_spins, HalfInt j) const {
  if (n_spins < 1 || n_spins > n_max_ || !valid_sector(n_spins, j)) {
    throw std::out_of_range("JumpModel: sector (N=" + std::to_string(n_spins) + ", J=" + j.str() +
                            ") not covered");
  }
  return sectors_[n_spins][j.twice()];
}

namespace {

const CoefficientTable& table_for(int n) { return CoefficientTable::shared(std::max(2, n)); }

Eigen::VectorXd populations(const TrajectoryState& s) { return s.amplitudes().cwiseAbs2(); }

}  // namespace

std::vector<BranchRate> jump_weights(const TrajectoryState& state, const JumpModel& model) {
  const SectorRates& sr = model.sector(state.n_spins(), state.total_j());
  const Eigen::VectorXd w = sr.weights * populations(state);
  std::vector<BranchRate> out;
  out.reserve(sr.branches.size());
  for (std::size_t k = 0; k < sr.branches.size(); ++k) {
    out.push_back({sr.branches[k], w(static_cast<Eigen::Index>(k))});
  }
  return out;
}

std::vector<BranchRate> jump_weights(const TrajectoryState& state, const NoiseModel& noise) {
  const JumpModel model(noise, table_for(state.n_spins()), state.n_spins());
  return jump_weights(state, model);
}

void apply_jump_in_place(TrajectoryState& state, const Branch& branch,
                         const CoefficientTable& table) {
  const int n = state.n_spins();
  const HalfInt j = state.total_j();
  const Sector t = target_sector(n, j, branch);
  if (t.n < 1 || !valid_sector(t.n, t.j)) {
    throw ImpossibleBranchError("jump leaves the valid sectors from (N=" + std::to_string(n) +
                                ", J=" + j.str() + ")");
  }
  const Eigen::VectorXd& row = table.sector(n, j).row(branch);
  const int off = shift_offset(j, t.j, branch.dm);
  const int d_out = block_dim(t.j);
  Amplitudes out = Amplitudes::Zero(d_out);
  const Amplitudes& c = state.amplitudes();
  for (int a = 0; a < state.dim(); ++a) {
    if (row.size() == 0 || row(a) == 0.0) continue;
    const int a2 = a + off;
    if (a2 < 0 || a2 >= d_out) continue;
    out(a2) = row(a) * c(a);
  }
  state.assign(t.n, t.j, std::move(out));
}

TrajectoryState apply_jump(const TrajectoryState& state, const Branch& branch,
                           const CoefficientTable& table) {
  TrajectoryState s = state;
  apply_jump_in_place(s, branch, table);
  return s;
}

TrajectoryState apply_jump(const TrajectoryState& state, const Branch& branch) {
  return apply_jump(state, branch, table_for(state.n_spins()));
}

void no_jump_in_place(TrajectoryState& state, const JumpModel& model, double dt) {
  const SectorRates& sr = model.sector(state.n_spins(), state.total_j());
  if (sr.max_decay == 0.0) return;
  const Eigen::ArrayXd factor = (-0.5 * dt * sr.decay.array()).exp();
  state.assign(state.amplitudes().cwiseProduct(factor.matrix().cast<Complex>()));
}

TrajectoryState no_jump_step(const TrajectoryState& state, const JumpModel& model, double dt) {
  TrajectoryState s = state;
  no_jump_in_place(s, model, dt);
  return s;
}

TrajectoryState no_jump_step(const TrajectoryState& state, const NoiseModel& noise, double dt) {
  const JumpModel model(noise, table_for(state.n_spins()), state.n_spins());
  return no_jump_step(state, model, dt);
}

bool step_is_coarse(const JumpModel& model, double dt) {
  return model.max_total_rate() * dt > kCoarseStep;
}

double default_dt(const NoiseModel& noise) {
  const double r = noise.max_rate();
  return r > 0.0 ? 1e-3 / r : 1e-3;
}

namespace {

void warn_coarse_once(const JumpModel& model, double dt) {
  static std::atomic<bool> warned{false};
  if (step_is_coarse(model, dt) && !warned.exchange(true)) {
    std::clog << "piqec: warning: dt x max rate = " << model.max_total_rate() * dt
              << " exceeds " << kCoarseStep << "; jump statistics are first order in dt\n";
  }
}

}  // namespace

TrajectoryRecord evolve_trajectory(const TrajectoryState& initial, const JumpModel& model,
                                   const TrajectoryOptions& options, Rng& rng,
                                   const TrajectoryHooks& hooks) {
  if (!(options.dt > 0.0) || !(options.t_max >= 0.0) || options.sample_every < 1) {
    throw std::invalid_argument("evolve_trajectory: need dt > 0, t_max >= 0, sample_every >= 1");
  }
  warn_coarse_once(model, options.dt);
  TrajectoryRecord rec;
  TrajectoryState state = initial;
  auto sample = [&](double t) {
    rec.times.push_back(t);
    if (hooks.observe) rec.observables.push_back(hooks.observe(state, t));
  };
  sample(0.0);

  const long steps = std::lround(options.t_max / options.dt);
  Eigen::VectorXd w;
  std::optional<TrajectoryState> before;
  for (long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * options.dt;
    if (hooks.after_step) before = state;
    if (hooks.unitary) hooks.unitary(state, options.dt);

    const SectorRates& sr = model.sector(state.n_spins(), state.total_j());
    std::optional<JumpEvent> jump;
    if (!sr.branches.empty()) {
      w.noalias() = sr.weights * state.amplitudes().cwiseAbs2();
      const double total = w.sum();
      if (rng.uniform() < total * options.dt) {
        double u = rng.uniform() * total;
        Eigen::Index pick = w.size() - 1;
        for (Eigen::Index b = 0; b < w.size(); ++b) {
          if (u < w(b)) {
            pick = b;
            break;
          }
          u -= w(b);
        }
        while (w(pick) == 0.0) --pick;  // only reachable through rounding at the end
        const Branch br = sr.branches[static_cast<std::size_t>(pick)];
        const HalfInt j_before = state.total_j();
        apply_jump_in_place(state, br, model.table());
        jump = JumpEvent{t, br, j_before, state.total_j(), state.n_spins()};
        rec.jumps.push_back(*jump);
      } else {
        no_jump_in_place(state, model, options.dt);
      }
    }

    if (hooks.after_step) {
      StepContext ctx{state, *before, t, rng, jump ? &*jump : nullptr, rec};
      hooks.after_step(ctx);
    }
    if (rec.failed_at) break;
    if (k % options.sample_every == 0) sample(t);
  }
  return rec;
}

TrajectoryRecord evolve_trajectory(const TrajectoryState& initial, const NoiseModel& noise,
                                   double t_max, double dt, std::uint64_t seed,
                                   const TrajectoryHooks& hooks) {
  const JumpModel model(noise, table_for(initial.n_spins()), initial.n_spins());
  Rng rng = Rng::stream(seed, 0);
  TrajectoryRecord rec = evolve_trajectory(initial, model, {t_max, dt, 1}, rng, hooks);
  rec.seed = seed;
  return rec;
}

std::vector<TrajectoryRecord> run_ensemble(const TrajectoryState& initial, const JumpModel& model,
                                           const TrajectoryOptions& options, std::uint64_t seed,
                                           std::size_t count, int threads,
                                           const TrajectoryHooks& hooks) {
  return run_indexed(count, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    TrajectoryRecord rec = evolve_trajectory(initial, model, options, rng, hooks);
    rec.seed = seed;
    rec.index = i;
    return rec;
  });
}

std::vector<TrajectoryRecord> run_ensemble(
    const TrajectoryState& initial, const JumpModel& model, const TrajectoryOptions& options,
    std::uint64_t seed, std::size_t count, int threads,
    const std::function<TrajectoryHooks(std::size_t)>& make_hooks) {
  return run_indexed(count, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const TrajectoryHooks hooks = make_hooks(i);
    TrajectoryRecord rec = evolve_trajectory(initial, model, options, rng, hooks);
    rec.seed = seed;
    rec.index = i;
    return rec;
  });
}

Curve aggregate(const std::vector<TrajectoryRecord>& records, int column) {
  Curve c;
  std::size_t len = 0;
  const TrajectoryRecord* longest = nullptr;
  for (const auto& r : records) {
    if (r.times.size() > len) {
      len = r.times.size();
      longest = &r;
    }
  }
  if (!longest) return c;
  c.times = longest->times;
  auto alive = [&](const TrajectoryRecord& r, std::size_t k) {
    return k < r.observables.size() && !(r.failed_at && *r.failed_at <= c.times[k]);
  };
  const auto col = static_cast<std::size_t>(column);
  for (std::size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : records) {
      if (!alive(r, k)) continue;
      sum += r.observables[k].at(col);
      ++n;
    }
    const double mean = n ? sum / n : std::numeric_limits<double>::quiet_NaN();
    // Two passes: the one-pass form cancels badly when all values agree.
    double ss = 0.0;
    for (const auto& r : records) {
      if (!alive(r, k)) continue;
      const double d = r.observables[k][col] - mean;
      ss += d * d;
    }
    const double se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    c.mean.push_back(mean);
    c.stderr_.push_back(se);
    c.n_alive.push_back(n);
  }
  return c;
}

void write_jsonl(std::ostream& out, const TrajectoryRecord& record) {
  nlohmann::json j;
  j["seed"] = record.seed;
  j["index"] = record.index;
  j["times"] = record.times;
  j["observables"] = record.observables;
  auto& jumps = j["jumps"] = nlohmann::json::array();
  for (const auto& e : record.jumps) {
    jumps.push_back({{"time", e.time},
                     {"channel", to_string(e.branch.kind)},
                     {"j", e.branch.dj.value()},
                     {"m", e.branch.dm.value()},
                     {"J_before", e.j_before.value()},
                     {"J_after", e.j_after.value()},
                     {"N_after", e.n_after}});
  }
  auto& tele = j["teleports"] = nlohmann::json::array();
  for (const auto& e : record.teleports) {
    tele.push_back({{"time", e.time}, {"N_before", e.n_before}, {"J_before", e.j_before.value()}});
  }
  j["failed_at"] = record.failed_at ? nlohmann::json(*record.failed_at) : nlohmann::json(nullptr);
  out << j.dump() << '\n';
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
  out << "time,mean,stderr,n_alive_trajectories\n";
  out.precision(12);
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    out << curve.times[k] << ',' << curve.mean[k] << ',' << curve.stderr_[k] << ','
        << curve.n_alive[k] << '\n';
  }
}

}  // namespace piqec
