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

#include "piqec/recovery.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "piqec/errors.hpp"

namespace piqec {

JMeasurement measure_j_sector(const TrajectoryState& state) { return {state.sector(), 1.0}; }

std::pair<JMeasurement, PiDensityState> measure_j_sector(const PiDensityState& state, Rng& rng) {
  const double total = state.trace();
  if (!(total > 0.0)) throw EmptyBlockError("measure_j_sector: zero-trace state");
  double u = rng.uniform() * total;
  const auto& blocks = state.blocks();
  auto chosen = blocks.begin();
  for (auto it = blocks.begin(); it != blocks.end(); ++it) {
    const double w = it->second.trace().real();
    if (w <= 0.0) continue;
    chosen = it;
    if (u < w) break;
    u -= w;
  }
  const double w = chosen->second.trace().real();
  PiDensityState out(state.n_spins());
  out.set_block(chosen->first, chosen->second / w);
  return {{chosen->first, w / total}, std::move(out)};
}

namespace {

// Numerical floor below which a measurement outcome is treated as impossible.
constexpr double kOutcomeFloor = 1e-12;

std::vector<HalfInt> code_levels(const QecCode& code) {
  std::vector<HalfInt> out;
  for (const auto& w : code.words) {
    for (const auto& l : w) {
      if (l.amplitude != 0.0) out.push_back(l.m);
    }
  }
  return out;
}

// Samples an index with the given (unnormalized) probabilities after dropping
// outcomes below the floor. Returns -1 for the remainder 1 − Σp.
int sample_outcome(const std::vector<double>& p, Rng& rng) {
  double total = 0.0;
  for (double x : p) total += x >= kOutcomeFloor ? x : 0.0;
  const double rest = std::max(0.0, 1.0 - total);
  const double norm = rest >= kOutcomeFloor ? 1.0 : total;
  double u = rng.uniform() * norm;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < kOutcomeFloor) continue;
    if (u < p[i]) return static_cast<int>(i);
    u -= p[i];
  }
  if (rest >= kOutcomeFloor) return -1;
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] >= kOutcomeFloor) return static_cast<int>(i);
  }
  return -1;
}

// Unit vector along Ĵ_z|k_Q⟩ with the code word removed (zero if parallel).
Amplitudes dephased_word(const QecCode& code, int k, HalfInt j) {
  const Amplitudes c = code.word(k, j);
  Amplitudes d = c;
  for (int i = 0; i < d.size(); ++i) d(i) *= level_at(j, i).value();
  d -= c * c.dot(d);
  const double n = d.norm();
  return n > 1e-14 ? Amplitudes(d / n) : Amplitudes(Amplitudes::Zero(d.size()));
}

}  // namespace

Syndrome measure_syndrome_m(TrajectoryState& state, const QecCode& code, Sector before, Rng& rng) {
  const HalfInt j = state.total_j();
  Syndrome syn;
  syn.loss = state.n_spins() < before.n;
  syn.j = j - before.j;
  const std::vector<HalfInt> shifts =
      syn.loss ? std::vector<HalfInt>{HalfInt::from_twice(-1), HalfInt::from_twice(1)}
               : std::vector<HalfInt>{HalfInt::from_twice(-2), HalfInt::from_twice(0),
                                      HalfInt::from_twice(2)};
  const std::vector<HalfInt> levels = code_levels(code);
  std::vector<std::vector<int>> sets;
  std::vector<double> weights;
  for (HalfInt s : shifts) {
    std::vector<int> idx;
    double w = 0.0;
    for (HalfInt l : levels) {
      if (!level_in_block(j, l + s)) continue;
      idx.push_back(level_index(j, l + s));
      w += std::norm(state.amplitudes()(idx.back()));
    }
    sets.push_back(std::move(idx));
    weights.push_back(w);
  }
  const int pick = sample_outcome(weights, rng);
  if (pick < 0) {
    throw UnrecoverableStateError("syndrome: state has support outside every syndrome level set");
  }
  Amplitudes projected = Amplitudes::Zero(state.dim());
  for (int i : sets[pick]) projected(i) = state.amplitudes()(i);
  state.assign(std::move(projected));
  syn.m = shifts[pick];
  syn.dephasing = syn.m == HalfInt::from_twice(0) && !syn.loss ? DephasingFlag::kUndetermined
                                                                : DephasingFlag::kNone;
  return syn;
}

Syndrome detect_dephasing(TrajectoryState& state, const QecCode& code, Syndrome syndrome,
                          Rng& rng) {
  if (syndrome.loss || syndrome.m != HalfInt::from_twice(0)) {
    throw std::invalid_argument("detect_dephasing needs an m = 0 syndrome");
  }
  const HalfInt j = state.total_j();
  if (!code.fits(j)) throw ThresholdBreach("code does not fit the J=" + j.str() + " block");
  std::vector<Amplitudes> code_span, deph_span;
  for (int k = 0; k < code.logical_dim(); ++k) {
    code_span.push_back(code.word(k, j));
    deph_span.push_back(dephased_word(code, k, j));
  }
  auto weight = [&](const std::vector<Amplitudes>& span) {
    double w = 0.0;
    for (const auto& v : span) w += std::norm(v.dot(state.amplitudes()));
    return w;
  };
  const int pick = sample_outcome({weight(code_span), weight(deph_span)}, rng);
  if (pick < 0) {
    throw UnrecoverableStateError("dephasing check: state outside code and dephased spans");
  }
  const auto& span = pick == 0 ? code_span : deph_span;
  Amplitudes projected = Amplitudes::Zero(state.dim());
  for (const auto& v : span) projected += v * v.dot(state.amplitudes());
  state.assign(std::move(projected));
  syndrome.dephasing = pick == 0 ? DephasingFlag::kNone : DephasingFlag::kDephased;
  return syndrome;
}

// ---------------------------------------------------------------------------
// Collective pulses.

namespace {

Eigen::MatrixXcd jz_matrix(HalfInt j) {
  const int d = block_dim(j);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = level_at(j, i).value();
  return m;
}

Eigen::MatrixXcd jplus_matrix(HalfInt j) {
  const int d = block_dim(j);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) m(i + 1, i) = collective_coeff(j, level_at(j, i), 1);
  return m;
}

// Π_M = ∏_{M' ≠ M} (Jz − M')/(M − M').
Eigen::MatrixXcd level_projector(HalfInt j, HalfInt m) {
  const int d = block_dim(j);
  const Eigen::MatrixXcd jz = jz_matrix(j);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd p = id;
  for (int i = 0; i < d; ++i) {
    const HalfInt other = level_at(j, i);
    if (other == m) continue;
    p = p * (jz - other.value() * id) / (m - other).value();
  }
  return p;
}

void require_levels(HalfInt j, HalfInt a, HalfInt b) {
  if (!level_in_block(j, a) || !level_in_block(j, b) || a == b) {
    throw std::domain_error("level coupling needs distinct levels of the J=" + j.str() + " block");
  }
}

}  // namespace

Eigen::MatrixXcd build_level_coupling(HalfInt j, HalfInt m_i, HalfInt m_j, Complex h) {
  require_levels(j, m_i, m_j);
  const int d = block_dim(j);
  const int delta = (m_i - m_j).twice() / 2;
  const Eigen::MatrixXcd jp = jplus_matrix(j);
  const Eigen::MatrixXcd ladder_op = delta > 0 ? jp : Eigen::MatrixXcd(jp.adjoint());
  Eigen::MatrixXcd ladder = Eigen::MatrixXcd::Identity(d, d);
  double norm = 1.0;
  HalfInt m = m_j;
  for (int s = 0; s < std::abs(delta); ++s) {
    ladder = ladder_op * ladder;
    norm *= collective_coeff(j, m, delta > 0 ? 1 : -1);
    m = m + HalfInt::from_twice(delta > 0 ? 2 : -2);
  }
  const Eigen::MatrixXcd forward =
      h / norm * level_projector(j, m_i) * ladder * level_projector(j, m_j);
  return forward + forward.adjoint();
}

Eigen::MatrixXcd build_level_phase(HalfInt j, HalfInt m, double delta) {
  if (!level_in_block(j, m)) throw std::domain_error("level " + m.str() + " not in block");
  return delta * level_projector(j, m);
}

Eigen::MatrixXcd pulse_hamiltonian(const LevelCoupling& pulse) {
  if (pulse.kind == LevelCoupling::Kind::kLevelPhase) {
    return build_level_phase(pulse.j, pulse.m_i, pulse.h.real());
  }
  return build_level_coupling(pulse.j, pulse.m_i, pulse.m_j, pulse.h);
}

LevelCoupling pi_pulse(HalfInt j, HalfInt m_i, HalfInt m_j, double phase) {
  require_levels(j, m_i, m_j);
  return {LevelCoupling::Kind::kCoupling, j, m_i, m_j, std::polar(1.0, phase),
          std::numbers::pi / 2.0};
}

void apply_pulse(Amplitudes& amps, const LevelCoupling& p) {
  if (amps.size() != block_dim(p.j)) throw std::invalid_argument("pulse acts on another block");
  if (p.kind == LevelCoupling::Kind::kLevelPhase) {
    amps(level_index(p.j, p.m_i)) *= std::polar(1.0, -p.h.real() * p.duration);
    return;
  }
  const int a = level_index(p.j, p.m_i);
  const int b = level_index(p.j, p.m_j);
  const double g = std::abs(p.h);
  const Complex e = g > 0.0 ? p.h / g : Complex(1.0);
  const double c = std::cos(g * p.duration);
  const Complex s = Complex(0.0, -std::sin(g * p.duration));
  const Complex ca = amps(a), cb = amps(b);
  amps(a) = c * ca + s * e * cb;
  amps(b) = s * std::conj(e) * ca + c * cb;
}

void apply_pulses(Amplitudes& amps, const std::vector<LevelCoupling>& pulses) {
  for (const auto& p : pulses) apply_pulse(amps, p);
}

std::vector<LevelCoupling> decompose_two_level(HalfInt j, HalfInt a, HalfInt b,
                                               const Eigen::Matrix2cd& u) {
  require_levels(j, a, b);
  // u = diag(e^{iφa}, e^{iφb}) · R(θ) · diag(1, e^{iψ}), R = [[c, −s], [s, c]].
  constexpr double eps = 1e-14;
  const double theta = std::atan2(std::abs(u(1, 0)), std::abs(u(0, 0)));
  const double phi_a = std::abs(u(0, 0)) > eps ? std::arg(u(0, 0)) : std::arg(-u(0, 1));
  const double phi_b = std::abs(u(1, 0)) > eps ? std::arg(u(1, 0)) : std::arg(u(1, 1));
  const double psi = std::abs(u(0, 0)) > eps ? std::arg(u(1, 1)) - phi_b
                                             : std::arg(-u(0, 1)) - phi_a;
  std::vector<LevelCoupling> out;
  auto phase = [&](HalfInt m, double angle) {
    const double wrapped = std::remainder(angle, 2.0 * std::numbers::pi);
    if (std::abs(wrapped) > eps) {
      out.push_back({LevelCoupling::Kind::kLevelPhase, j, m, m, Complex(-wrapped), 1.0});
    }
  };
  phase(b, psi);
  if (theta > eps) {
    // exp(−iHθ) with h = −i gives R(θ) on (a, b).
    out.push_back({LevelCoupling::Kind::kCoupling, j, a, b, Complex(0.0, -1.0), theta});
  }
  phase(a, phi_a);
  phase(b, phi_b);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Shape of the identified error acting on code word k, in the new block.
Amplitudes error_shape(const QecCode& code, int k, const Syndrome& syn, Sector before, HalfInt j_new,
                       const CoefficientTable& table) {
  const HalfInt zero = HalfInt::from_twice(0);
  if (syn.j == zero && syn.m == zero) {
    switch (syn.dephasing) {
      case DephasingFlag::kNone:
        return code.word(k, j_new);
      case DephasingFlag::kDephased:
        return dephased_word(code, k, j_new);
      case DephasingFlag::kUndetermined:
        throw std::invalid_argument("recover: dephasing flag not resolved");
    }
  }
  const Branch branch{syn.j == zero ? ChannelKind::kCollective : ChannelKind::kIndividual, syn.j,
                      syn.m};
  const Eigen::VectorXd& row = table.sector(before.n, before.j).row(branch);
  Amplitudes out = Amplitudes::Zero(block_dim(j_new));
  for (const auto& l : code.words[k]) {
    if (!level_in_block(before.j, l.m) || !level_in_block(j_new, l.m + syn.m)) continue;
    out(level_index(j_new, l.m + syn.m)) = row(level_index(before.j, l.m)) * l.amplitude;
  }
  return out;
}

}  // namespace

Recovery recover(const TrajectoryState& state, const Syndrome& syn, const QecCode& code,
                 Sector before, const CoefficientTable& table) {
  const HalfInt j = state.total_j();
  if (syn.loss) throw std::invalid_argument("recover: re-append the lost spin first");
  if (j < kCodeMinJ || !code.fits(j)) {
    throw ThresholdBreach("recover: J=" + j.str() + " below the code threshold");
  }
  if (j - before.j != syn.j) throw ImpossibleBranchError("recover: syndrome J change mismatch");

  Recovery rec{state, {}};
  Amplitudes amps = state.amplitudes();
  std::vector<Amplitudes> shapes;
  for (int k = 0; k < code.logical_dim(); ++k) {
    shapes.push_back(error_shape(code, k, syn, before, j, table));
    if (shapes.back().norm() == 0.0) {
      throw ImpossibleBranchError("recover: error branch annihilates code word " + std::to_string(k));
    }
  }
  // Move the shifted populations back onto the code levels.
  if (syn.m != HalfInt::from_twice(0)) {
    for (HalfInt l : code_levels(code)) {
      if (!level_in_block(j, l + syn.m)) continue;
      rec.pulses.push_back(pi_pulse(j, l, l + syn.m));
    }
    apply_pulses(amps, rec.pulses);
    for (auto& s : shapes) apply_pulses(s, rec.pulses);
  }
  // Rotate each word's shape onto the code amplitudes.
  for (int k = 0; k < code.logical_dim(); ++k) {
    const auto& word = code.words[k];
    std::vector<LevelCoupling> seq;
    if (word.size() == 1) {
      const Complex v = shapes[k](level_index(j, word[0].m));
      const double angle = -std::arg(v);
      if (std::abs(angle) > 1e-14) {
        seq.push_back({LevelCoupling::Kind::kLevelPhase, j, word[0].m, word[0].m, Complex(-angle), 1.0});
      }
    } else if (word.size() == 2) {
      const int ia = level_index(j, word[0].m), ib = level_index(j, word[1].m);
      Eigen::Vector2cd v(shapes[k](ia), shapes[k](ib));
      v.normalize();
      Eigen::Matrix2cd vm, cm;
      vm << v(0), -std::conj(v(1)), v(1), std::conj(v(0));
      cm << word[0].amplitude, -word[1].amplitude, word[1].amplitude, word[0].amplitude;
      seq = decompose_two_level(j, word[0].m, word[1].m, cm * vm.adjoint());
    } else {
      throw UnsupportedConfiguration("recover supports one or two levels per code word");
    }
    apply_pulses(amps, seq);
    rec.pulses.insert(rec.pulses.end(), seq.begin(), seq.end());
  }
  rec.state.assign(std::move(amps));
  return rec;
}

TrajectoryState reappend_spin(const TrajectoryState& pre_loss, Rng& rng,
                              const CoefficientTable& table) {
  if (rng.uniform() < 0.5) return pre_loss;
  const int n = pre_loss.n_spins();
  const HalfInt j = pre_loss.total_j();
  const SectorCoefficients& sc = table.sector(n, j);
  const Eigen::VectorXd pop = pre_loss.amplitudes().cwiseAbs2();
  std::array<double, 3> w{};
  double total = 0.0;
  for (int dj : kShifts) {
    if (!valid_sector(n, j + HalfInt::from_twice(2 * dj))) continue;
    w[dj + 1] = sc.individual[individual_slot(dj, 0)].array().square().matrix().dot(pop);
    total += w[dj + 1];
  }
  double u = rng.uniform() * total;
  int pick = 1;
  for (int dj : kShifts) {
    if (w[dj + 1] <= 0.0) continue;
    pick = dj + 1;
    if (u < w[dj + 1]) break;
    u -= w[dj + 1];
  }
  const Branch b{ChannelKind::kIndividual, HalfInt::from_twice(2 * (pick - 1)), HalfInt::from_twice(0)};
  return apply_jump(pre_loss, b, table);
}

QecCycleReport qec_cycle(TrajectoryState& s, const QecCode& code, QecTracker& tracker, Rng& rng,
                         const CoefficientTable& table) {
  QecCycleReport rep;
  if (tracker.pre_loss) {
    // The half-integer syndrome flags the loss; a fresh spin is appended.
    measure_syndrome_m(s, code, tracker.last, rng);
    s = reappend_spin(*tracker.pre_loss, rng, table);
    tracker.pre_loss.reset();
  }
  rep.syndrome = measure_syndrome_m(s, code, tracker.last, rng);
  const HalfInt zero = HalfInt::from_twice(0);
  if (rep.syndrome.j == zero && rep.syndrome.m == zero) {
    rep.syndrome = detect_dephasing(s, code, rep.syndrome, rng);
    if (rep.syndrome.dephasing == DephasingFlag::kNone) {
      tracker.last = s.sector();
      return rep;
    }
  }
  Recovery r = recover(s, rep.syndrome, code, tracker.last, table);
  s = std::move(r.state);
  rep.pulses = std::move(r.pulses);
  tracker.last = s.sector();
  return rep;
}

LogicalReadout read_logical(const QecCode& code, const TrajectoryState& state) {
  LogicalReadout r;
  if (!code.fits(state.total_j())) {
    r.alphas.assign(code.logical_dim(), Complex(0.0));
    r.leakage = 1.0;
    return r;
  }
  double inside = 0.0;
  for (int k = 0; k < code.logical_dim(); ++k) {
    r.alphas.push_back(code.word(k, state.total_j()).dot(state.amplitudes()));
    inside += std::norm(r.alphas.back());
  }
  r.leakage = std::max(0.0, 1.0 - inside);
  return r;
}

Teleport teleport_handoff(const TrajectoryState& state, const QecCode& code,
                          const FreshEnsemble& fresh, Rng& rng) {
  if (code.logical_dim() != 2 || fresh.code.logical_dim() != 2) {
    throw UnsupportedConfiguration("teleport hand-off is defined for qubit codes");
  }
  LogicalReadout in = read_logical(code, state);
  if (in.leakage > 1e-10) {
    throw UnrecoverableStateError("teleport: input leaks out of the code (" +
                                  std::to_string(in.leakage) + ")");
  }
  const double norm = std::sqrt(std::norm(in.alphas[0]) + std::norm(in.alphas[1]));
  // Qubits (input, ancilla, fresh) with index 4·q0 + 2·q1 + q2; ancilla and
  // fresh ensemble share (|00⟩ + |11⟩)/√2.
  Eigen::Matrix<Complex, 8, 1> psi = Eigen::Matrix<Complex, 8, 1>::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  for (int q0 = 0; q0 < 2; ++q0) {
    psi(4 * q0 + 0) = in.alphas[q0] / norm * r;
    psi(4 * q0 + 3) = in.alphas[q0] / norm * r;
  }
  // CNOT input → ancilla.
  for (int q2 = 0; q2 < 2; ++q2) std::swap(psi(4 + q2), psi(6 + q2));
  // Hadamard on the input.
  for (int rest = 0; rest < 4; ++rest) {
    const Complex a = psi(rest), b = psi(4 + rest);
    psi(rest) = (a + b) * r;
    psi(4 + rest) = (a - b) * r;
  }
  Teleport out{state, 0, {}};
  for (int o = 0; o < 4; ++o) out.probabilities[o] = psi.segment(2 * o, 2).squaredNorm();
  double u = rng.uniform();
  int outcome = 3;
  for (int o = 0; o < 4; ++o) {
    if (u < out.probabilities[o]) {
      outcome = o;
      break;
    }
    u -= out.probabilities[o];
  }
  while (out.probabilities[outcome] == 0.0) --outcome;
  Eigen::Vector2cd f = psi.segment(2 * outcome, 2).normalized();
  if (outcome & 1) std::swap(f(0), f(1));  // X^b
  if (outcome & 2) f(1) = -f(1);           // Z^a
  out.outcome = outcome;
  out.state = encode_code(fresh.code, f(0), f(1), fresh.n_spins, fresh.j);
  return out;
}

}  // namespace piqec
