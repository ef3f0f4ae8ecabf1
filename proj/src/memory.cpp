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
#include <memory>
#include <ostream>

#include "piqec/errors.hpp"
#include "piqec/recovery.hpp"

namespace piqec {

const char* to_string(MemoryCurveId id) {
  switch (id) {
    case MemoryCurveId::kBare:
      return "bare";
    case MemoryCurveId::kCodeNoQec:
      return "code";
    case MemoryCurveId::kCodeQec:
      return "code_qec";
    case MemoryCurveId::kCodeQecTeleport:
      return "code_qec_teleport";
  }
  return "?";
}

void MemoryConfig::validate() const {
  if (n_spins < 2) throw ConfigError("n_spins", "must be >= 2");
  const HalfInt j = initial_j.value_or(HalfInt::from_twice(n_spins));
  if (!valid_sector(n_spins, j)) throw ConfigError("initial_j", "not a valid J for n_spins");
  if (!(m1 > m2) || !(m2 > HalfInt::from_twice(0))) {
    throw ConfigError("code.m1", "need m1 > m2 > 0");
  }
  if (j < m1 || !level_in_block(j, m1) || !level_in_block(j, m2)) {
    throw ConfigError("code.m1", "code levels do not fit the initial J block");
  }
  const char* rate_keys[3] = {"rates.Gamma_m1", "rates.Gamma_0", "rates.Gamma_p1"};
  const char* ind_keys[3] = {"rates.gamma_m1", "rates.gamma_0", "rates.gamma_p1"};
  for (int i = 0; i < 3; ++i) {
    if (!(noise.collective[i] >= 0.0) || !std::isfinite(noise.collective[i])) {
      throw ConfigError(rate_keys[i], "must be a finite rate >= 0");
    }
    if (!(noise.individual[i] >= 0.0) || !std::isfinite(noise.individual[i])) {
      throw ConfigError(ind_keys[i], "must be a finite rate >= 0");
    }
  }
  if (!(noise.loss >= 0.0) || !std::isfinite(noise.loss)) {
    throw ConfigError("rates.gamma_d", "must be a finite rate >= 0");
  }
  if (!(dt >= 0.0)) throw ConfigError("dt", "must be >= 0 (0 selects the default)");
  if (!(t_max > 0.0)) throw ConfigError("t_max", "must be > 0");
  if (!(sample_dt > 0.0)) throw ConfigError("sample_dt", "must be > 0");
  if (n_traj < 1) throw ConfigError("n_traj", "must be >= 1");
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
  if (!(dt_qec >= 0.0)) throw ConfigError("qec.dt_qec", "must be >= 0");
  if (j_threshold < kCodeMinJ) throw ConfigError("qec.j_threshold", "must be >= 9/2");
}

namespace {

struct QecState {
  QecTracker tracker;
  bool lost = false;
  int teleports = 0;
  long step = 0;
};

double bare_fidelity(const TrajectoryState& s) {
  // Logical qubit on the two lowest levels of the current block.
  if (s.dim() < 2) return 0.0;
  const Complex v = (s.amplitudes()(0) + s.amplitudes()(1)) / std::sqrt(2.0);
  return std::norm(v);
}

}  // namespace

MemoryResult run_memory_experiment(const MemoryConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_spins;
  const HalfInt j0 = cfg.initial_j.value_or(HalfInt::from_twice(n));
  const CoefficientTable& table = CoefficientTable::shared(std::max(2, n));
  const JumpModel model(cfg.noise, table, n);
  const double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(cfg.noise);
  TrajectoryOptions opts{cfg.t_max, dt, std::max(1, static_cast<int>(std::lround(cfg.sample_dt / dt)))};
  const long cadence = cfg.dt_qec > 0.0 ? std::max(1L, std::lround(cfg.dt_qec / dt)) : 1L;

  const QecCode code = build_two_level_code(j0, cfg.m1, cfg.m2);
  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<Complex> plus{r, r};
  const FreshEnsemble fresh{n, HalfInt::from_twice(n), code};

  Amplitudes bare_amps = Amplitudes::Zero(block_dim(j0));
  bare_amps(0) = bare_amps(1) = r;
  const TrajectoryState bare(n, j0, bare_amps);
  const TrajectoryState encoded = encode_code(code, r, r, n, j0);

  std::vector<MemoryCurveId> ids{MemoryCurveId::kBare, MemoryCurveId::kCodeNoQec};
  if (cfg.qec_enabled) {
    ids.push_back(MemoryCurveId::kCodeQec);
    if (cfg.teleport) ids.push_back(MemoryCurveId::kCodeQecTeleport);
  }

  MemoryResult result;
  for (MemoryCurveId id : ids) {
    const bool qec = id == MemoryCurveId::kCodeQec || id == MemoryCurveId::kCodeQecTeleport;
    const bool tele = id == MemoryCurveId::kCodeQecTeleport;
    auto make_hooks = [&](std::size_t) {
      auto st = std::make_shared<QecState>();
      TrajectoryHooks h;
      if (id == MemoryCurveId::kBare) {
        h.observe = [](const TrajectoryState& s, double) {
          return std::vector<double>{bare_fidelity(s), s.total_j().value(),
                                     static_cast<double>(s.n_spins()), 0.0};
        };
        return h;
      }
      st->tracker.last = encoded.sector();
      h.observe = [st, &code, &plus](const TrajectoryState& s, double) {
        const double f = st->lost ? 0.0 : logical_fidelity(code, plus, s);
        return std::vector<double>{f, s.total_j().value(), static_cast<double>(s.n_spins()),
                                   static_cast<double>(st->teleports)};
      };
      if (!qec) return h;
      h.after_step = [st, &code, &table, &fresh, &cfg, tele, cadence](StepContext& ctx) {
        if (st->lost) return;
        ++st->step;
        if (ctx.state.n_spins() < ctx.before.n_spins() && !st->tracker.pre_loss) {
          st->tracker.pre_loss = ctx.before;
        }
        if (st->step % cadence != 0) return;
        TrajectoryState& s = ctx.state;
        try {
          qec_cycle(s, code, st->tracker, ctx.rng, table);
          if (tele && s.total_j() < cfg.j_threshold) {
            const Sector from = s.sector();
            s = teleport_handoff(s, code, fresh, ctx.rng).state;
            ++st->teleports;
            ctx.record.teleports.push_back({ctx.time, from.n, from.j});
            st->tracker.last = s.sector();
          }
        } catch (const UnrecoverableStateError&) {
          st->lost = true;
        } catch (const ThresholdBreach&) {
          st->lost = true;
        }
      };
      return h;
    };
    const TrajectoryState& init = id == MemoryCurveId::kBare ? bare : encoded;
    const auto records = run_ensemble(init, model, opts, cfg.seed, cfg.n_traj, cfg.threads,
                                      std::function<TrajectoryHooks(std::size_t)>(make_hooks));
    MemoryCurve curve{id, aggregate(records, 0), {}, {}, {}};
    curve.mean_j = aggregate(records, 1).mean;
    curve.mean_n = aggregate(records, 2).mean;
    curve.teleports = aggregate(records, 3).mean;
    result.curves.push_back(std::move(curve));
  }
  return result;
}

void write_memory_csv(std::ostream& out, const MemoryResult& result) {
  out << "time,curve_id,mean_fidelity,stderr,mean_J,mean_N,teleports_cumulative\n";
  out.precision(12);
  for (const auto& c : result.curves) {
    for (std::size_t k = 0; k < c.fidelity.times.size(); ++k) {
      out << c.fidelity.times[k] << ',' << to_string(c.id) << ',' << c.fidelity.mean[k] << ','
          << c.fidelity.stderr_[k] << ',' << c.mean_j[k] << ',' << c.mean_n[k] << ','
          << c.teleports[k] << '\n';
    }
  }
}

}  // namespace piqec
