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

#include "piqec/coefficients.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "piqec/oracle.hpp"

namespace piqec {

const char* to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kCollective:
      return "collective";
    case ChannelKind::kIndividual:
      return "individual";
    case ChannelKind::kLoss:
      return "loss";
  }
  return "?";
}

double clebsch_half(HalfInt j1, HalfInt m1, HalfInt ms, HalfInt total_j, HalfInt total_m) {
  if (abs(ms) != kHalf || m1 + ms != total_m) return 0.0;
  if (!level_in_block(j1, m1) || !level_in_block(total_j, total_m)) return 0.0;
  const double a = j1.value();
  const double M = total_m.value();
  const double denom = 2.0 * a + 1.0;
  if (total_j == j1 + kHalf) {
    return ms == kHalf ? std::sqrt((a + M + 0.5) / denom) : std::sqrt((a - M + 0.5) / denom);
  }
  if (total_j == j1 - kHalf && j1.twice() >= 1) {
    return ms == kHalf ? -std::sqrt((a - M + 0.5) / denom) : std::sqrt((a + M + 0.5) / denom);
  }
  return 0.0;
}

double collective_coeff(HalfInt j, HalfInt m_level, int m) {
  if (!level_in_block(j, m_level) || !level_in_block(j, m_level + HalfInt(m))) return 0.0;
  const double J = j.value();
  const double M = m_level.value();
  switch (m) {
    case -1:
      return std::sqrt((J + M) * (J - M + 1.0));
    case 0:
      return M;
    case 1:
      return std::sqrt((J - M) * (J + M + 1.0));
    default:
      return 0.0;
  }
}

double degeneracy_ratio(int n_spins, HalfInt j, HalfInt dj) {
  const double N = n_spins;
  const double J = j.value();
  if (dj == kHalf) return (2.0 * J + 2.0) * (N / 2.0 - J) / ((2.0 * J + 1.0) * N);
  if (dj == -kHalf) return 2.0 * J * (N / 2.0 + J + 1.0) / ((2.0 * J + 1.0) * N);
  return 0.0;
}

namespace {

bool sector_ok(int n_spins, HalfInt j) { return valid_sector(n_spins, j); }

// ⟨(Ja,1/2) J', M+m | σ_m on the last spin | (Ja,1/2) J, M⟩.
double decoupled_amplitude(HalfInt ja, HalfInt j, HalfInt m_level, HalfInt j_out, int m) {
  double acc = 0.0;
  for (int t : {-1, 1}) {
    const HalfInt mu = HalfInt::from_twice(t);
    const HalfInt mu_out = mu + HalfInt(m);
    if (abs(mu_out) != kHalf) continue;
    const double op = (m == 0) ? 2.0 * mu.value() : 1.0;
    acc += clebsch_half(ja, m_level - mu, mu, j, m_level) * op *
           clebsch_half(ja, m_level - mu, mu_out, j_out, m_level + HalfInt(m));
  }
  return acc;
}

}  // namespace

double individual_cross_weight(int n_spins, HalfInt j, HalfInt m_level, HalfInt m_level_prime,
                               int dj, int m) {
  const HalfInt j_out = j + HalfInt(dj);
  if (!sector_ok(n_spins, j) || !sector_ok(n_spins, j_out)) return 0.0;
  if (!level_in_block(j, m_level) || !level_in_block(j, m_level_prime)) return 0.0;
  if (!level_in_block(j_out, m_level + HalfInt(m)) ||
      !level_in_block(j_out, m_level_prime + HalfInt(m))) {
    return 0.0;
  }
  double acc = 0.0;
  for (HalfInt half : {-kHalf, kHalf}) {
    const HalfInt ja = j + half;
    if (ja.twice() < 0 || abs(j_out - ja) != kHalf) continue;
    if (n_spins > 1 && !sector_ok(n_spins - 1, ja)) continue;
    if (n_spins == 1 && ja.twice() != 0) continue;
    const double r = degeneracy_ratio(n_spins, j, half);
    acc += r * decoupled_amplitude(ja, j, m_level, j_out, m) *
           decoupled_amplitude(ja, j, m_level_prime, j_out, m);
  }
  return n_spins * acc;
}

double individual_coeff(int n_spins, HalfInt j, HalfInt m_level, int dj, int m) {
  const double w = individual_cross_weight(n_spins, j, m_level, m_level, dj, m);
  if (!(w > 0.0)) return 0.0;
  const double mag = std::sqrt(w);
  return (dj == 0 && m == 0 && m_level.twice() < 0) ? -mag : mag;
}

double loss_coeff(int n_spins, HalfInt j, HalfInt m_level, HalfInt dj, HalfInt dm) {
  if (n_spins < 2 || abs(dj) != kHalf || abs(dm) != kHalf) return 0.0;
  if (!sector_ok(n_spins, j) || !level_in_block(j, m_level)) return 0.0;
  const HalfInt ja = j + dj;
  if (!sector_ok(n_spins - 1, ja)) return 0.0;
  const double cg = clebsch_half(ja, m_level + dm, -dm, j, m_level);
  return std::sqrt(degeneracy_ratio(n_spins, j, dj)) * std::abs(cg);
}

int individual_slot(int dj, int m) { return 3 * (dj + 1) + (m + 1); }

int loss_slot(HalfInt dj, HalfInt dm) {
  return 2 * (dj.twice() > 0 ? 1 : 0) + (dm.twice() > 0 ? 1 : 0);
}

std::array<Branch, 3> collective_branches() {
  std::array<Branch, 3> out;
  for (int k = 0; k < 3; ++k) out[k] = {ChannelKind::kCollective, HalfInt(0), HalfInt(kShifts[k])};
  return out;
}

std::array<Branch, 9> individual_branches() {
  std::array<Branch, 9> out;
  for (int dj : kShifts) {
    for (int m : kShifts) out[individual_slot(dj, m)] = {ChannelKind::kIndividual, dj, m};
  }
  return out;
}

std::array<Branch, 4> loss_branches() {
  std::array<Branch, 4> out;
  for (HalfInt dj : {-kHalf, kHalf}) {
    for (HalfInt dm : {-kHalf, kHalf}) out[loss_slot(dj, dm)] = {ChannelKind::kLoss, dj, dm};
  }
  return out;
}

const Eigen::VectorXd& SectorCoefficients::row(const Branch& b) const {
  switch (b.kind) {
    case ChannelKind::kCollective:
      return collective[b.dm.twice() / 2 + 1];
    case ChannelKind::kIndividual:
      return individual[individual_slot(b.dj.twice() / 2, b.dm.twice() / 2)];
    case ChannelKind::kLoss:
      return loss[loss_slot(b.dj, b.dm)];
  }
  throw std::logic_error("unknown channel kind");
}

// ---------------------------------------------------------------------------

namespace {

SectorCoefficients analytic_sector(int n, HalfInt j) {
  SectorCoefficients sc;
  const int d = block_dim(j);
  for (int k = 0; k < 3; ++k) {
    sc.collective[k].resize(d);
    for (int i = 0; i < d; ++i) sc.collective[k](i) = collective_coeff(j, level_at(j, i), kShifts[k]);
  }
  for (int dj : kShifts) {
    for (int m : kShifts) {
      auto& v = sc.individual[individual_slot(dj, m)];
      v.resize(d);
      for (int i = 0; i < d; ++i) v(i) = individual_coeff(n, j, level_at(j, i), dj, m);
    }
  }
  if (n >= 2) {
    for (const Branch& b : loss_branches()) {
      auto& v = sc.loss[loss_slot(b.dj, b.dm)];
      v.resize(d);
      for (int i = 0; i < d; ++i) v(i) = loss_coeff(n, j, level_at(j, i), b.dj, b.dm);
    }
  }
  return sc;
}

// Rank-one factor of a measured coefficient matrix, oriented by the sign
// convention. `signed_by_m` selects the (j,m) = (0,0) orientation.
Eigen::VectorXd rank_one_factor(const Eigen::MatrixXd& c, HalfInt j, bool signed_by_m) {
  const int d = static_cast<int>(c.rows());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  Eigen::Index pivot = 0;
  const double top = c.diagonal().maxCoeff(&pivot);
  if (!(top > 0.0)) return out;
  out = c.col(pivot) / std::sqrt(top);
  double orient = 1.0;
  if (signed_by_m) {
    const double m_pivot = level_at(j, static_cast<int>(pivot)).value();
    orient = (m_pivot * out(pivot) < 0.0) ? -1.0 : 1.0;
  }
  return orient * out;
}

void check_close(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol,
                 const std::string& what) {
  const double dev = (a - b).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) {
    std::ostringstream os;
    os << "coefficient verification failed for " << what << ": deviation " << dev;
    throw TableIntegrityError(os.str());
  }
}

void check_factorization(const Eigen::MatrixXd& c, const Eigen::VectorXd& f, double tol,
                         const std::string& what) {
  const double dev = (c - f * f.transpose()).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) {
    std::ostringstream os;
    os << "barred map does not factorize for " << what << ": deviation " << dev;
    throw TableIntegrityError(os.str());
  }
}

// Replaces the analytic entries of one particle number with oracle-measured
// ones after checking that both routes agree.
void oracle_sectors(int n, std::vector<SectorCoefficients>& row, double tol) {
  const auto basis = oracle::FullStateBasis::build(n);
  std::unique_ptr<oracle::FullStateBasis> basis_out;
  if (n >= 2) basis_out = std::make_unique<oracle::FullStateBasis>(oracle::FullStateBasis::build(n - 1));
  for (HalfInt j : basis.j_values()) {
    SectorCoefficients& sc = row[j.twice()];
    const std::string tag = "N=" + std::to_string(n) + " J=" + j.str();
    for (int k = 0; k < 3; ++k) {
      const int m = kShifts[k];
      const auto coll = oracle::measure_coefficient_matrices(basis, nullptr, j,
                                                             {ChannelKind::kCollective, m});
      const auto it = coll.find({HalfInt(0), HalfInt(m)});
      const Eigen::MatrixXd c = it == coll.end() ? Eigen::MatrixXd::Zero(block_dim(j), block_dim(j))
                                                 : it->second;
      const Eigen::VectorXd f = rank_one_factor(c, j, m == 0);
      check_factorization(c, f, tol, tag + " collective m=" + std::to_string(m));
      check_close(f, sc.collective[k], tol, tag + " collective m=" + std::to_string(m));
      sc.collective[k] = f;

      const auto ind = oracle::measure_coefficient_matrices(basis, nullptr, j,
                                                            {ChannelKind::kIndividual, m});
      for (int dj : kShifts) {
        auto& target = sc.individual[individual_slot(dj, m)];
        const auto found = ind.find({HalfInt(dj), HalfInt(m)});
        if (found == ind.end()) {
          check_close(Eigen::VectorXd::Zero(target.size()), target, tol, tag + " individual");
          continue;
        }
        const Eigen::VectorXd g = rank_one_factor(found->second, j, dj == 0 && m == 0);
        const std::string what =
            tag + " individual j=" + std::to_string(dj) + " m=" + std::to_string(m);
        check_factorization(found->second, g, tol, what);
        check_close(g, target, tol, what);
        target = g;
      }
    }
    if (n >= 2) {
      const auto lost = oracle::measure_coefficient_matrices(basis, basis_out.get(), j,
                                                             {ChannelKind::kLoss, 0});
      for (const Branch& b : loss_branches()) {
        auto& target = sc.loss[loss_slot(b.dj, b.dm)];
        const auto found = lost.find({b.dj, b.dm});
        if (found == lost.end()) {
          check_close(Eigen::VectorXd::Zero(target.size()), target, tol, tag + " loss");
          continue;
        }
        const Eigen::VectorXd g = rank_one_factor(found->second, j, false);
        const std::string what = tag + " loss j=" + b.dj.str() + " m=" + b.dm.str();
        check_factorization(found->second, g, tol, what);
        check_close(g, target, tol, what);
        target = g;
      }
    }
  }
}

void check_sum_rules(int n, HalfInt j, const SectorCoefficients& sc, double tol) {
  const int d = block_dim(j);
  for (int i = 0; i < d; ++i) {
    const double M = level_at(j, i).value();
    // Σ_n σ_m†σ_m: N/2 + M for decay, N/2 − M for pumping, N for dephasing.
    const std::array<double, 3> expected = {n / 2.0 + M, static_cast<double>(n), n / 2.0 - M};
    for (int k = 0; k < 3; ++k) {
      double s = 0.0;
      for (int dj : kShifts) s += std::pow(sc.individual[individual_slot(dj, kShifts[k])](i), 2);
      if (std::abs(s - expected[k]) > tol * std::max(1.0, expected[k])) {
        throw TableIntegrityError("individual trace-preservation sum rule violated at N=" +
                                  std::to_string(n) + " J=" + j.str());
      }
    }
    if (n >= 2) {
      double s = 0.0;
      for (const auto& v : sc.loss) s += v(i) * v(i);
      if (std::abs(s - 1.0) > tol) {
        throw TableIntegrityError("loss normalization violated at N=" + std::to_string(n) +
                                  " J=" + j.str());
      }
    }
  }
}

}  // namespace

CoefficientTable CoefficientTable::build(int n_max) { return build(n_max, BuildOptions{}); }

CoefficientTable CoefficientTable::build(int n_max, const BuildOptions& options) {
  if (n_max < 2) throw std::domain_error("coefficient table needs n_max >= 2");
  CoefficientTable t;
  t.n_max_ = n_max;
  t.sectors_.resize(n_max + 1);
  for (int n = 1; n <= n_max; ++n) {
    t.sectors_[n].resize(n + 1);
    for (int tj = n % 2; tj <= n; tj += 2) {
      t.sectors_[n][tj] = analytic_sector(n, HalfInt::from_twice(tj));
    }
  }
  const int cap = std::min({n_max, options.oracle_cap, oracle::kMaxSpins});
  for (int n = 1; n <= cap; ++n) oracle_sectors(n, t.sectors_[n], options.tolerance);
  t.verified_ = std::max(cap, 0);
  for (int n = 1; n <= n_max; ++n) {
    for (int tj = n % 2; tj <= n; tj += 2) {
      check_sum_rules(n, HalfInt::from_twice(tj), t.sectors_[n][tj], 1e-12);
    }
  }
  return t;
}

const CoefficientTable& CoefficientTable::shared(int n_max) {
  static std::mutex mu;
  static std::shared_ptr<const CoefficientTable> table;
  std::lock_guard<std::mutex> lock(mu);
  if (!table || table->n_max() < n_max) {
    // Keep the old one alive: references handed out earlier stay valid.
    static std::vector<std::shared_ptr<const CoefficientTable>> retired;
    if (table) retired.push_back(table);
    table = std::make_shared<const CoefficientTable>(build(std::max(n_max, 2)));
  }
  return *table;
}

bool CoefficientTable::covers(int n_spins, HalfInt j) const {
  return n_spins >= 1 && n_spins <= n_max_ && valid_sector(n_spins, j);
}

const SectorCoefficients& CoefficientTable::sector(int n_spins, HalfInt j) const {
  if (!covers(n_spins, j)) {
    throw std::out_of_range("coefficient table has no entry for N=" + std::to_string(n_spins) +
                            " J=" + j.str());
  }
  return sectors_[n_spins][j.twice()];
}

double CoefficientTable::collective(int n_spins, HalfInt j, HalfInt m_level, int m) const {
  const auto& sc = sector(n_spins, j);
  if (!level_in_block(j, m_level)) return 0.0;
  return sc.collective[m + 1](level_index(j, m_level));
}

double CoefficientTable::individual(int n_spins, HalfInt j, HalfInt m_level, int dj, int m) const {
  const auto& sc = sector(n_spins, j);
  if (!level_in_block(j, m_level)) return 0.0;
  return sc.individual[individual_slot(dj, m)](level_index(j, m_level));
}

double CoefficientTable::loss(int n_spins, HalfInt j, HalfInt m_level, HalfInt dj, HalfInt dm) const {
  const auto& sc = sector(n_spins, j);
  if (n_spins < 2 || !level_in_block(j, m_level)) return 0.0;
  return sc.loss[loss_slot(dj, dm)](level_index(j, m_level));
}

double CoefficientTable::coeff(int n_spins, HalfInt j, HalfInt m_level, const Branch& b) const {
  const auto& sc = sector(n_spins, j);
  if (!level_in_block(j, m_level)) return 0.0;
  if (b.kind == ChannelKind::kLoss && n_spins < 2) return 0.0;
  return sc.row(b)(level_index(j, m_level));
}

void CoefficientTable::save(const std::filesystem::path& path) const {
  nlohmann::json doc;
  doc["format_version"] = kFormatVersion;
  doc["convention"] = kConvention;
  doc["n_max"] = n_max_;
  doc["oracle_verified_up_to"] = verified_;
  auto& entries = doc["sectors"];
  entries = nlohmann::json::array();
  auto to_list = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  for (int n = 1; n <= n_max_; ++n) {
    for (int tj = n % 2; tj <= n; tj += 2) {
      const auto& sc = sectors_[n][tj];
      nlohmann::json e;
      e["n"] = n;
      e["two_j"] = tj;
      for (int k = 0; k < 3; ++k) e["collective"].push_back(to_list(sc.collective[k]));
      for (int k = 0; k < 9; ++k) e["individual"].push_back(to_list(sc.individual[k]));
      for (int k = 0; k < 4; ++k) e["loss"].push_back(to_list(sc.loss[k]));
      entries.push_back(std::move(e));
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(1);
}

CoefficientTable CoefficientTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.at("format_version").get<int>() != kFormatVersion ||
      doc.at("convention").get<std::string>() != kConvention) {
    throw TableIntegrityError("coefficient cache was written with a different convention");
  }
  CoefficientTable t;
  t.n_max_ = doc.at("n_max").get<int>();
  t.verified_ = doc.at("oracle_verified_up_to").get<int>();
  t.sectors_.resize(t.n_max_ + 1);
  for (int n = 1; n <= t.n_max_; ++n) t.sectors_[n].resize(n + 1);
  auto from_list = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  for (const auto& e : doc.at("sectors")) {
    const int n = e.at("n").get<int>();
    const int tj = e.at("two_j").get<int>();
    if (n < 1 || n > t.n_max_ || !valid_sector(n, HalfInt::from_twice(tj))) {
      throw TableIntegrityError("coefficient cache has an invalid sector");
    }
    auto& sc = t.sectors_[n][tj];
    for (int k = 0; k < 3; ++k) sc.collective[k] = from_list(e.at("collective").at(k));
    for (int k = 0; k < 9; ++k) sc.individual[k] = from_list(e.at("individual").at(k));
    for (int k = 0; k < 4; ++k) sc.loss[k] = from_list(e.at("loss").at(k));
  }
  return t;
}

}  // namespace piqec
