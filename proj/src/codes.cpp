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

#include "piqec/codes.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "piqec/errors.hpp"

namespace piqec {

HalfInt QecCode::max_level() const {
  HalfInt top = HalfInt::from_twice(0);
  for (const auto& w : words) {
    for (const auto& l : w) top = std::max(top, abs(l.m));
  }
  return top;
}

bool QecCode::fits(HalfInt j) const {
  for (const auto& w : words) {
    for (const auto& l : w) {
      if (!level_in_block(j, l.m)) return false;
    }
  }
  return true;
}

Amplitudes QecCode::word(int k, HalfInt j) const {
  Amplitudes v = Amplitudes::Zero(block_dim(j));
  for (const auto& l : words.at(static_cast<std::size_t>(k))) {
    if (!level_in_block(j, l.m)) {
      throw CapacityError("code level " + l.m.str() + " is outside the J=" + j.str() + " block");
    }
    v(level_index(j, l.m)) += l.amplitude;
  }
  return v;
}

void QecCode::validate(double tol) const {
  std::map<HalfInt, int> owner;
  for (std::size_t k = 0; k < words.size(); ++k) {
    double norm = 0.0;
    for (const auto& l : words[k]) {
      norm += l.amplitude * l.amplitude;
      if (l.amplitude == 0.0) continue;
      auto [it, fresh] = owner.emplace(l.m, static_cast<int>(k));
      if (!fresh && it->second != static_cast<int>(k)) {
        throw std::domain_error("code words share level " + l.m.str());
      }
    }
    if (std::abs(norm - 1.0) > tol) {
      throw std::domain_error("code word " + std::to_string(k) + " is not normalized");
    }
  }
}

QecCode build_two_level_code(HalfInt total_j, HalfInt m1, HalfInt m2) {
  if (total_j < m1) {
    throw CapacityError("J=" + total_j.str() + " cannot hold level M1=" + m1.str());
  }
  if (!(m2 > HalfInt::from_twice(0)) || !(m1 > m2)) {
    throw std::domain_error("two-level code needs M1 > M2 > 0");
  }
  if (!level_in_block(total_j, m1) || !level_in_block(total_j, m2)) {
    throw std::domain_error("levels M1=" + m1.str() + ", M2=" + m2.str() +
                            " do not belong to the J=" + total_j.str() + " block");
  }
  const double c = std::sqrt(m2.value() / (m1.value() + m2.value()));
  const double s = std::sqrt(1.0 - c * c);
  QecCode code;
  code.total_j = total_j;
  code.m1 = m1;
  code.m2 = m2;
  code.words = {{{-m1, c}, {m2, s}}, {{-m2, s}, {m1, c}}};
  std::string warn;
  if (m2 < HalfInt::from_twice(3)) warn += "M2 < 3/2; ";
  if (m1 - m2 < HalfInt::from_twice(6)) warn += "M1 - M2 < 3; ";
  if (m1 < HalfInt::from_twice(9)) warn += "M1 < 9/2; ";
  if (!warn.empty()) code.warning = warn.substr(0, warn.size() - 2);
  return code;
}

namespace {

Amplitudes target_vector(const QecCode& code, const std::vector<Complex>& alphas, HalfInt j) {
  if (static_cast<int>(alphas.size()) != code.logical_dim()) {
    throw std::invalid_argument("need one amplitude per code word");
  }
  Amplitudes v = Amplitudes::Zero(block_dim(j));
  for (int k = 0; k < code.logical_dim(); ++k) v += alphas[k] * code.word(k, j);
  return v;
}

}  // namespace

TrajectoryState encode_code(const QecCode& code, Complex alpha0, Complex alpha1, int n_spins,
                            HalfInt j) {
  require_valid_sector(n_spins, j);
  return TrajectoryState(n_spins, j, target_vector(code, {alpha0, alpha1}, j));
}

double logical_fidelity(const QecCode& code, const std::vector<Complex>& alphas,
                        const TrajectoryState& psi) {
  if (!code.fits(psi.total_j())) return 0.0;
  const Amplitudes v = target_vector(code, alphas, psi.total_j());
  return std::norm(v.normalized().dot(psi.amplitudes()));
}

double logical_fidelity(const QecCode& code, const std::vector<Complex>& alphas,
                        const PiDensityState& rho, Sector sector) {
  if (!rho.has_block(sector) || !code.fits(sector.j)) return 0.0;
  const Amplitudes v = target_vector(code, alphas, sector.j).normalized();
  return (v.adjoint() * rho.block(sector) * v)(0, 0).real();
}

Eigen::VectorXd KrausSet::completeness() const {
  Eigen::VectorXd s = no_jump.array().square().matrix();
  for (const auto& op : jumps) s += op.amplitudes.array().square().matrix();
  return s;
}

KrausSet build_kraus_set(int n_spins, HalfInt j, const NoiseModel& noise, double dt,
                         const CoefficientTable& table) {
  if (!(dt > 0.0)) throw std::invalid_argument("build_kraus_set: dt must be > 0");
  if (!table.covers(n_spins, j)) {
    throw std::out_of_range("build_kraus_set: table does not cover (N=" + std::to_string(n_spins) +
                            ", J=" + j.str() + ")");
  }
  const SectorRates sr = sector_rates(noise, table, n_spins, j);
  KrausSet ks;
  ks.n_spins = n_spins;
  ks.total_j = j;
  ks.dt = dt;
  for (std::size_t k = 0; k < sr.branches.size(); ++k) {
    const Branch& b = sr.branches[k];
    LogicalKraus op;
    op.branch = b;
    op.rate = sr.rates[k];
    op.amplitudes = std::sqrt(op.rate * dt) * *sr.coefficients[k];
    op.target = {b.kind == ChannelKind::kLoss ? n_spins - 1 : n_spins, j + b.dj};
    op.offset = level_index(op.target.j, level_at(j, 0) + b.dm);
    ks.jumps.push_back(std::move(op));
  }
  ks.no_jump = (1.0 - dt * sr.decay.array()).max(0.0).sqrt().matrix();
  return ks;
}

KrausSet build_kraus_set(int n_spins, HalfInt j, const NoiseModel& noise, double dt) {
  return build_kraus_set(n_spins, j, noise, dt, CoefficientTable::shared(std::max(2, n_spins)));
}

namespace {

std::string label(const Branch& b) {
  return std::string(to_string(b.kind)) + "(" + b.dj.str() + "," + b.dm.str() + ")";
}

// An error operator with prefactors stripped: a level-shift by `offset` into
// `target` with per-level coefficients.
struct ErrorOp {
  std::string label;
  Sector target;
  int offset = 0;
  Eigen::VectorXd coeff;
};

std::vector<ErrorOp> error_ops(const KrausSet& ks) {
  std::vector<ErrorOp> ops;
  ops.push_back({"I", {ks.n_spins, ks.total_j}, 0, Eigen::VectorXd::Ones(block_dim(ks.total_j))});
  for (const auto& op : ks.jumps) {
    ops.push_back({label(op.branch), op.target, op.offset,
                   op.amplitudes / std::sqrt(op.rate * ks.dt)});
  }
  return ops;
}

Amplitudes image(const ErrorOp& e, const Amplitudes& w) {
  const int d_out = block_dim(e.target.j);
  Amplitudes out = Amplitudes::Zero(d_out);
  for (int i = 0; i < w.size(); ++i) {
    const int i2 = i + e.offset;
    if (w(i) == Complex(0.0) || e.coeff(i) == 0.0 || i2 < 0 || i2 >= d_out) continue;
    out(i2) = e.coeff(i) * w(i);
  }
  return out;
}

}  // namespace

KlReport kl_check(const QecCode& code, const KrausSet& kraus, double tol) {
  const std::vector<ErrorOp> ops = error_ops(kraus);
  const int n_ops = static_cast<int>(ops.size());
  const int d = code.logical_dim();
  // images[k][a] = Ê_a |k_Q⟩
  std::vector<std::vector<Amplitudes>> images(d);
  for (int k = 0; k < d; ++k) {
    const Amplitudes w = code.word(k, kraus.total_j);
    for (const auto& e : ops) images[k].push_back(image(e, w));
  }
  auto element = [&](int kp, int a, int k, int b) -> Complex {
    if (ops[a].target != ops[b].target) return 0.0;
    return images[kp][a].dot(images[k][b]);
  };

  KlReport r;
  for (const auto& e : ops) r.labels.push_back(e.label);
  Eigen::MatrixXcd k0(n_ops, n_ops);
  for (int a = 0; a < n_ops; ++a) {
    for (int b = 0; b < n_ops; ++b) k0(a, b) = element(0, a, 0, b);
  }
  r.k = k0.real();
  const double scale = std::max(1.0, k0.cwiseAbs().maxCoeff());
  for (int k = 0; k < d; ++k) {
    for (int kp = 0; kp < d; ++kp) {
      for (int a = 0; a < n_ops; ++a) {
        for (int b = 0; b < n_ops; ++b) {
          const Complex v = element(kp, a, k, b);
          if (k == kp) {
            r.diagonal_violation = std::max(r.diagonal_violation, std::abs(v - k0(a, b)));
          } else {
            r.offdiagonal_violation = std::max(r.offdiagonal_violation, std::abs(v));
          }
        }
      }
    }
  }
  r.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(k0).eigenvalues().minCoeff();
  r.diagonal_pass = r.diagonal_violation <= tol * scale;
  r.pass = r.max_violation() <= tol * scale && r.min_eigenvalue >= -tol * scale;
  return r;
}

std::vector<QecCode> diagonal_candidates(const KrausSet& ks, int budget, double tol,
                                        long* examined) {
  if (budget != 1 && budget != 2) {
    throw UnsupportedConfiguration("code search supports one or two levels per word");
  }
  const HalfInt j = ks.total_j;
  const int dim = block_dim(j);
  long count = 0;
  std::vector<QecCode> found;
  if (examined) *examined = 0;
  if (2 * budget > dim) return found;
  const std::vector<ErrorOp> ops = error_ops(ks);

  // Diagonal products D_ab(M) for operator pairs that share target and shift.
  std::vector<Eigen::VectorXd> diag;
  for (std::size_t a = 0; a < ops.size(); ++a) {
    for (std::size_t b = a; b < ops.size(); ++b) {
      if (ops[a].target != ops[b].target || ops[a].offset != ops[b].offset) continue;
      diag.push_back(ops[a].coeff.cwiseProduct(ops[b].coeff));
    }
  }
  const int rows = static_cast<int>(diag.size());

  if (budget == 1) {
    for (int x = 0; x < dim; ++x) {
      for (int u = x + 1; u < dim; ++u) {
        ++count;
        QecCode code;
        code.total_j = j;
        code.words = {{{level_at(j, x), 1.0}}, {{level_at(j, u), 1.0}}};
        found.push_back(std::move(code));
      }
    }
    if (examined) *examined = count;
    return found;
  }
  Eigen::MatrixXd a_mat(rows, 2);
  Eigen::VectorXd rhs(rows);
  for (int x = 0; x < dim; ++x) {
    for (int y = x + 1; y < dim; ++y) {
      for (int u = x + 1; u < dim; ++u) {
        if (u == y) continue;
        for (int v = u + 1; v < dim; ++v) {
          if (v == y) continue;
          ++count;
          // p·D(x) + (1−p)·D(y) = q·D(u) + (1−q)·D(v)
          for (int r = 0; r < rows; ++r) {
            a_mat(r, 0) = diag[r](x) - diag[r](y);
            a_mat(r, 1) = -(diag[r](u) - diag[r](v));
            rhs(r) = diag[r](v) - diag[r](y);
          }
          const Eigen::Vector2d pq = a_mat.completeOrthogonalDecomposition().solve(rhs);
          const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
          if ((a_mat * pq - rhs).cwiseAbs().maxCoeff() > 1e3 * tol * scale) continue;
          const double p = pq(0), q = pq(1);
          if (!(p > tol && p < 1.0 - tol && q > tol && q < 1.0 - tol)) continue;
          QecCode code;
          code.total_j = j;
          code.words = {{{level_at(j, x), std::sqrt(p)}, {level_at(j, y), std::sqrt(1.0 - p)}},
                        {{level_at(j, u), std::sqrt(q)}, {level_at(j, v), std::sqrt(1.0 - q)}}};
          found.push_back(std::move(code));
        }
      }
    }
  }
  if (examined) *examined = count;
  return found;
}

std::vector<QecCode> code_search(HalfInt j, const NoiseModel& channels, int budget, double tol,
                                 std::optional<int> n_spins) {
  if (budget != 1 && budget != 2) {
    throw UnsupportedConfiguration("code_search supports one or two levels per word");
  }
  const int n = n_spins.value_or(j.twice());
  require_valid_sector(n, j);

  NoiseModel mask;
  for (int i = 0; i < 3; ++i) {
    mask.collective[i] = channels.collective[i] != 0.0 ? 1.0 : 0.0;
    mask.individual[i] = channels.individual[i] != 0.0 ? 1.0 : 0.0;
  }
  mask.loss = channels.loss != 0.0 ? 1.0 : 0.0;
  const KrausSet ks = build_kraus_set(n, j, mask, 1e-3);

  std::vector<QecCode> found;
  for (QecCode& code : diagonal_candidates(ks, budget, tol)) {
    if (!kl_check(code, ks, tol).pass) continue;
    if (budget == 2) {
      const auto& w0 = code.words[0];
      const auto& w1 = code.words[1];
      if (w0[0].m == -w1[1].m && w0[1].m == -w1[0].m && w1[1].m > w0[1].m &&
          w0[1].m > HalfInt::from_twice(0)) {
        code.m1 = w1[1].m;
        code.m2 = w0[1].m;
      }
    }
    found.push_back(std::move(code));
  }
  return found;
}

std::vector<std::string> channel_names(const NoiseModel& noise) {
  std::vector<std::string> out;
  for (int i = 0; i < 3; ++i) {
    if (noise.collective[i] != 0.0) out.push_back("collective:" + std::to_string(i - 1));
  }
  for (int i = 0; i < 3; ++i) {
    if (noise.individual[i] != 0.0) out.push_back("individual:" + std::to_string(i - 1));
  }
  if (noise.loss != 0.0) out.push_back("loss");
  return out;
}

void write_catalog(std::ostream& out, const std::vector<CatalogEntry>& entries) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  auto& codes = doc["codes"] = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json c;
    c["J"] = e.code.total_j.value();
    if (e.code.m1) c["M1"] = e.code.m1->value();
    if (e.code.m2) c["M2"] = e.code.m2->value();
    auto& words = c["words"] = nlohmann::json::array();
    for (const auto& w : e.code.words) {
      nlohmann::json levels = nlohmann::json::array();
      for (const auto& l : w) levels.push_back({{"M", l.m.value()}, {"amplitude", l.amplitude}});
      words.push_back(levels);
    }
    c["channels"] = e.channels;
    c["kl_residual"] = e.kl_residual;
    if (!e.code.warning.empty()) c["warning"] = e.code.warning;
    codes.push_back(c);
  }
  out << doc.dump(2) << '\n';
}

std::vector<CatalogEntry> read_catalog(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("format_version", 0) != 1) {
    throw TableIntegrityError("code catalog: unsupported format_version");
  }
  std::vector<CatalogEntry> out;
  for (const auto& c : doc.at("codes")) {
    CatalogEntry e;
    e.code.total_j = HalfInt::from_double(c.at("J").get<double>());
    if (c.contains("M1")) e.code.m1 = HalfInt::from_double(c["M1"].get<double>());
    if (c.contains("M2")) e.code.m2 = HalfInt::from_double(c["M2"].get<double>());
    for (const auto& w : c.at("words")) {
      std::vector<CodeLevel> levels;
      for (const auto& l : w) {
        levels.push_back({HalfInt::from_double(l.at("M").get<double>()),
                          l.at("amplitude").get<double>()});
      }
      e.code.words.push_back(std::move(levels));
    }
    e.channels = c.value("channels", std::vector<std::string>{});
    e.kl_residual = c.value("kl_residual", 0.0);
    e.code.warning = c.value("warning", std::string{});
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace piqec
