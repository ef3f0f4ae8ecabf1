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

#include "piqec/sensing.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>

#include "piqec/errors.hpp"
#include "piqec/parallel.hpp"

namespace piqec {

TrajectoryState SensingProbe::initial_state() const {
  const double r = 1.0 / std::sqrt(2.0);
  return encode_code(basis, r, r, n_spins, basis.total_j);
}

void signal_step(TrajectoryState& state, double omega, double dt) {
  if (omega == 0.0) return;
  Amplitudes a = state.amplitudes();
  for (int i = 0; i < a.size(); ++i) {
    a(i) *= std::polar(1.0, -omega * level_at(state.total_j(), i).value() * dt);
  }
  state.assign(std::move(a));
}

double phase_slope(const QecCode& basis) {
  double jz[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    double norm = 0.0;
    for (const auto& l : basis.words.at(k)) {
      jz[k] += l.amplitude * l.amplitude * l.m.value();
      norm += l.amplitude * l.amplitude;
    }
    jz[k] /= norm;
  }
  return jz[0] - jz[1];
}

double accumulated_phase(const SensingProbe& probe) {
  return probe.omega * probe.t * phase_slope(probe.basis);
}

namespace {

SensingProbe single_level_probe(int n, HalfInt m0, HalfInt m1, double omega) {
  SensingProbe p;
  p.n_spins = n;
  p.omega = omega;
  p.basis.total_j = HalfInt::from_twice(n);
  p.basis.words = {{{m0, 1.0}}, {{m1, 1.0}}};
  return p;
}

}  // namespace

SensingProbe ghz_probe(int n_spins, double omega) {
  if (n_spins < 1) throw std::domain_error("ghz_probe: need N >= 1");
  const HalfInt top = HalfInt::from_twice(n_spins);
  return single_level_probe(n_spins, -top, top, omega);
}

SensingProbe collective_decay_code(int n_spins, double omega) {
  if (n_spins < 3) {
    throw UnsupportedConfiguration("collective-decay code needs N >= 3 (levels coincide below)");
  }
  const HalfInt top = HalfInt::from_twice(n_spins);
  return single_level_probe(n_spins, -top + HalfInt::from_twice(2), top, omega);
}

bool collective_decay_kl_identity(int n_spins) {
  // 4·(M² − M) = t² − 2t with t = 2M, exact in integers.
  auto quad = [](std::int64_t t) { return t * t - 2 * t; };
  const std::int64_t n = n_spins;
  return quad(-n + 2) == quad(n);
}

NoGoReport nogo_individual_decay(HalfInt j_max, double tol) {
  NoiseModel decay;
  decay.individual[0] = 1.0;
  NoGoReport rep;
  for (int tj = 1; tj <= j_max.twice(); ++tj) {
    const HalfInt j = HalfInt::from_twice(tj);
    const KrausSet ks = build_kraus_set(tj, j, decay, 1e-3);
    for (int budget : {1, 2}) {
      long examined = 0;
      for (const QecCode& c : diagonal_candidates(ks, budget, tol, &examined)) {
        if (!kl_check(c, ks, tol).diagonal_pass) continue;
        ++rep.kl_passing;
        const double slope = std::abs(phase_slope(c));
        rep.max_phase_slope = std::max(rep.max_phase_slope, slope);
        if (slope > tol) rep.counterexamples.push_back(c);
      }
      rep.candidates += examined;
    }
  }
  return rep;
}

SensingRecovery sensing_recover(TrajectoryState& state, const SensingProbe& probe) {
  const HalfInt j = state.total_j();
  std::vector<HalfInt> levels;
  for (const auto& w : probe.basis.words) {
    for (const auto& l : w) levels.push_back(l.m);
  }
  const HalfInt zero = HalfInt::from_twice(0);
  const HalfInt down = HalfInt::from_twice(-2);
  for (HalfInt a : levels) {
    for (HalfInt b : levels) {
      if (a + down == b) {
        throw UnsupportedConfiguration("sensing recovery: shifted level sets collide");
      }
    }
  }
  SensingRecovery rec{zero, {}, 0.0};
  double best = -1.0;
  for (HalfInt s : {zero, down}) {
    double w = 0.0;
    for (HalfInt l : levels) {
      if (level_in_block(j, l + s)) w += std::norm(state.amplitudes()(level_index(j, l + s)));
    }
    if (w > best) {
      best = w;
      rec.shift = s;
    }
  }
  if (best < 1e-12) throw UnrecoverableStateError("sensing recovery: no level set holds the state");
  if (rec.shift == zero) return rec;

  for (HalfInt l : levels) {
    if (level_in_block(j, l) && level_in_block(j, l + rec.shift)) {
      rec.pulses.push_back(pi_pulse(j, l, l + rec.shift));
    }
  }
  // Phase each branch picks up in the transfer, from the basis vectors.
  std::vector<double> phase;
  for (const auto& w : probe.basis.words) {
    const HalfInt l = w.front().m;
    if (!level_in_block(j, l + rec.shift)) {
      phase.push_back(std::nan(""));
      continue;
    }
    Amplitudes e = Amplitudes::Zero(state.dim());
    e(level_index(j, l + rec.shift)) = 1.0;
    apply_pulses(e, rec.pulses);
    phase.push_back(std::arg(e(level_index(j, l))));
  }
  if (phase.size() == 2 && !std::isnan(phase[0]) && !std::isnan(phase[1])) {
    rec.phase_offset = phase[1] - phase[0];
    if (std::abs(rec.phase_offset) > 1e-15) {
      const HalfInt l1 = probe.basis.words[1].front().m;
      rec.pulses.push_back(
          {LevelCoupling::Kind::kLevelPhase, j, l1, l1, Complex(rec.phase_offset), 1.0});
    }
  }
  apply_sensing_recovery(state, probe, rec);
  return rec;
}

void apply_sensing_recovery(TrajectoryState& state, const SensingProbe& probe,
                            const SensingRecovery& rec) {
  if (rec.pulses.empty()) return;
  const HalfInt j = state.total_j();
  Amplitudes projected = Amplitudes::Zero(state.dim());
  for (const auto& w : probe.basis.words) {
    for (const auto& l : w) {
      if (level_in_block(j, l.m + rec.shift)) {
        const int i = level_index(j, l.m + rec.shift);
        projected(i) = state.amplitudes()(i);
      }
    }
  }
  apply_pulses(projected, rec.pulses);
  state.assign(std::move(projected));
}

void SensingConfig::validate() const {
  if (n_spins < 3) throw ConfigError("n_spins", "must be >= 3");
  const char* col[3] = {"rates.Gamma_m1", "rates.Gamma_0", "rates.Gamma_p1"};
  const char* ind[3] = {"rates.gamma_m1", "rates.gamma_0", "rates.gamma_p1"};
  for (int i = 0; i < 3; ++i) {
    if (!(noise.collective[i] >= 0.0) || !std::isfinite(noise.collective[i])) {
      throw ConfigError(col[i], "must be a finite rate >= 0");
    }
    if (!(noise.individual[i] >= 0.0) || !std::isfinite(noise.individual[i])) {
      throw ConfigError(ind[i], "must be a finite rate >= 0");
    }
  }
  if (!(noise.loss >= 0.0) || !std::isfinite(noise.loss)) {
    throw ConfigError("rates.gamma_d", "must be a finite rate >= 0");
  }
  if (!std::isfinite(omega)) throw ConfigError("omega", "must be finite");
  if (!(dt >= 0.0)) throw ConfigError("dt", "must be >= 0 (0 selects the default)");
  if (!(t_max > 0.0)) throw ConfigError("t_max", "must be > 0");
  if (!(sample_dt > 0.0)) throw ConfigError("sample_dt", "must be > 0");
  if (n_traj < 1) throw ConfigError("n_traj", "must be >= 1");
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
  if (probes.empty()) throw ConfigError("probe", "at least one probe is required");
  for (const auto& p : probes) {
    if (p != "ghz" && p != "encoded") throw ConfigError("probe", "unknown probe '" + p + "'");
  }
}

namespace {

double infidelity(const TrajectoryState& a, const TrajectoryState& b) {
  if (a.sector() != b.sector()) return 1.0;
  if (a.amplitudes() == b.amplitudes()) return 0.0;
  return std::max(0.0, 1.0 - std::norm(a.amplitudes().dot(b.amplitudes())));
}

TrajectoryRecord run_pair(const SensingProbe& probe, const JumpModel& model, double omega,
                          const TrajectoryOptions& opts, Rng& rng, bool qec) {
  TrajectoryState ref = probe.initial_state();
  TrajectoryState sig = ref;
  TrajectoryRecord rec;
  auto sample = [&](double t) {
    rec.times.push_back(t);
    rec.observables.push_back({infidelity(sig, ref)});
  };
  sample(0.0);
  bool active = qec;
  Eigen::VectorXd w;
  const long steps = std::lround(opts.t_max / opts.dt);
  for (long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * opts.dt;
    signal_step(sig, omega, opts.dt);
    const SectorRates& sr = model.sector(ref.n_spins(), ref.total_j());
    bool jumped = false;
    if (!sr.branches.empty()) {
      w.noalias() = sr.weights * ref.amplitudes().cwiseAbs2();
      const double total = w.sum();
      if (rng.uniform() < total * opts.dt) {
        double u = rng.uniform() * total;
        Eigen::Index pick = w.size() - 1;
        for (Eigen::Index b = 0; b < w.size(); ++b) {
          if (u < w(b)) {
            pick = b;
            break;
          }
          u -= w(b);
        }
        while (w(pick) == 0.0) --pick;
        const Branch br = sr.branches[static_cast<std::size_t>(pick)];
        const HalfInt j_before = ref.total_j();
        apply_jump_in_place(ref, br, model.table());
        apply_jump_in_place(sig, br, model.table());
        rec.jumps.push_back({t, br, j_before, ref.total_j(), ref.n_spins()});
        jumped = true;
      } else {
        no_jump_in_place(ref, model, opts.dt);
        no_jump_in_place(sig, model, opts.dt);
      }
    }
    if (active && jumped) {
      try {
        const SensingRecovery r = sensing_recover(ref, probe);
        apply_sensing_recovery(sig, probe, r);
      } catch (const UnrecoverableStateError&) {
        active = false;
      }
    }
    if (k % opts.sample_every == 0) sample(t);
  }
  return rec;
}

Curve closed_form(const std::vector<double>& times, double slope, double omega, std::size_t n) {
  Curve c;
  c.times = times;
  for (double t : times) {
    const double s = std::sin(slope * omega * t / 2.0);
    c.mean.push_back(s * s);
    c.stderr_.push_back(0.0);
    c.n_alive.push_back(static_cast<int>(n));
  }
  return c;
}

}  // namespace

SensingResult run_sensing_experiment(const SensingConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_spins;
  const CoefficientTable& table = CoefficientTable::shared(n);
  const JumpModel model(cfg.noise, table, n);
  const double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(cfg.noise);
  const TrajectoryOptions opts{cfg.t_max, dt,
                               std::max(1, static_cast<int>(std::lround(cfg.sample_dt / dt)))};
  SensingResult result;
  std::vector<double> times;
  for (const auto& name : cfg.probes) {
    const SensingProbe probe =
        name == "ghz" ? ghz_probe(n, cfg.omega) : collective_decay_code(n, cfg.omega);
    std::vector<bool> modes{false};
    if (cfg.qec_enabled) modes.push_back(true);
    for (bool qec : modes) {
      const auto records = run_indexed(cfg.n_traj, cfg.threads, [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.seed, i);
        TrajectoryRecord r = run_pair(probe, model, cfg.omega, opts, rng, qec);
        r.seed = cfg.seed;
        r.index = i;
        return r;
      });
      SensingCurve c{name + (qec ? "_qec" : "_bare"), aggregate(records, 0)};
      times = c.infidelity.times;
      result.curves.push_back(std::move(c));
    }
  }
  if (cfg.reference_curves) {
    result.curves.push_back(
        {"ghz_lossless", closed_form(times, static_cast<double>(n), cfg.omega, cfg.n_traj)});
    result.curves.push_back(
        {"encoded_lossless", closed_form(times, static_cast<double>(n - 1), cfg.omega, cfg.n_traj)});
  }
  return result;
}

void write_sensing_csv(std::ostream& out, const SensingResult& result) {
  out << "time,curve_id,mean_infidelity,stderr,n_alive_trajectories\n";
  out.precision(12);
  for (const auto& c : result.curves) {
    const Curve& k = c.infidelity;
    for (std::size_t i = 0; i < k.times.size(); ++i) {
      out << k.times[i] << ',' << c.id << ',' << k.mean[i] << ',' << k.stderr_[i] << ','
          << k.n_alive[i] << '\n';
    }
  }
}

}  // namespace piqec
