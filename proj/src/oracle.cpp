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

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>

namespace piqec::oracle {

namespace {

// Vector of N−1 spins obtained by fixing spin `spin` of `v` to `bit`.
Eigen::VectorXd slice_spin(const Eigen::VectorXd& v, int spin, int bit) {
  const Eigen::Index half = v.size() / 2;
  Eigen::VectorXd out(half);
  const Eigen::Index low_mask = (Eigen::Index{1} << spin) - 1;
  for (Eigen::Index y = 0; y < half; ++y) {
    const Eigen::Index x = (y & low_mask) | ((y & ~low_mask) << 1) | (Eigen::Index{bit} << spin);
    out(y) = v(x);
  }
  return out;
}

}  // namespace

FullStateBasis FullStateBasis::build(int n_spins) {
  if (n_spins < 1) throw std::domain_error("oracle basis needs at least one spin");
  if (n_spins > kMaxSpins) {
    throw ResourceError("oracle basis limited to N <= " + std::to_string(kMaxSpins));
  }
  FullStateBasis b;
  b.n_ = 1;
  b.vectors_ = Eigen::MatrixXd::Identity(2, 2);  // column 0: M=−1/2, column 1: M=+1/2
  b.offset_[kHalf] = 0;
  b.mult_[kHalf] = 1;

  for (int n = 2; n <= n_spins; ++n) {
    FullStateBasis next;
    next.n_ = n;
    const Eigen::Index dim = Eigen::Index{1} << n;
    const Eigen::Index up = Eigen::Index{1} << (n - 1);
    // Degeneracy list of each J: (source J_a, source index) pairs.
    std::map<HalfInt, std::vector<std::pair<HalfInt, int>>> sources;
    for (const auto& [ja, d] : b.mult_) {
      for (HalfInt half : {-kHalf, kHalf}) {
        const HalfInt j = ja + half;
        if (j.twice() < 0) continue;
        for (int i = 0; i < d; ++i) sources[j].push_back({ja, i});
      }
    }
    int offset = 0;
    for (auto& [j, list] : sources) {
      std::stable_sort(list.begin(), list.end(),
                       [](const auto& a, const auto& c) { return a.first < c.first; });
      next.offset_[j] = offset;
      next.mult_[j] = static_cast<int>(list.size());
      offset += block_dim(j) * static_cast<int>(list.size());
    }
    next.vectors_ = Eigen::MatrixXd::Zero(dim, offset);
    for (const auto& [j, list] : sources) {
      for (int mi = 0; mi < block_dim(j); ++mi) {
        const HalfInt m = level_at(j, mi);
        for (int i = 0; i < static_cast<int>(list.size()); ++i) {
          const auto [ja, ia] = list[i];
          auto col = next.vectors_.col(next.column(j, m, i));
          for (HalfInt mu : {-kHalf, kHalf}) {
            const double cg = clebsch_half(ja, m - mu, mu, j, m);
            if (cg == 0.0) continue;
            const auto src = b.vectors_.col(b.column(ja, m - mu, ia));
            if (mu == kHalf) {
              col.segment(up, up) += cg * src;
            } else {
              col.segment(0, up) += cg * src;
            }
          }
        }
      }
    }
    b = std::move(next);
  }
  return b;
}

std::vector<HalfInt> FullStateBasis::j_values() const {
  std::vector<HalfInt> out;
  for (const auto& [j, d] : mult_) out.push_back(j);
  return out;
}

int FullStateBasis::multiplicity(HalfInt j) const {
  auto it = mult_.find(j);
  return it == mult_.end() ? 0 : it->second;
}

int FullStateBasis::column(HalfInt j, HalfInt m, int i) const {
  auto it = offset_.find(j);
  if (it == offset_.end() || !level_in_block(j, m)) throw std::out_of_range("no such basis column");
  return it->second + level_index(j, m) * mult_.at(j) + i;
}

Eigen::VectorXd apply_sigma(int m, int spin, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  const Eigen::Index bit = Eigen::Index{1} << spin;
  for (Eigen::Index x = 0; x < v.size(); ++x) {
    const bool is_up = (x & bit) != 0;
    if (m == 0) {
      out(x) = is_up ? v(x) : -v(x);
    } else if (m == -1 && is_up) {
      out(x ^ bit) += v(x);
    } else if (m == 1 && !is_up) {
      out(x | bit) += v(x);
    }
  }
  return out;
}

Eigen::VectorXd apply_collective(int m, int n_spins, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int s = 0; s < n_spins; ++s) out += apply_sigma(m, s, v);
  return m == 0 ? Eigen::VectorXd(0.5 * out) : out;
}

Eigen::MatrixXd total_jz(int n_spins) {
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  Eigen::MatrixXd jz = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    jz(x, x) = 0.5 * (2.0 * __builtin_popcountll(static_cast<unsigned long long>(x)) - n_spins);
  }
  return jz;
}

Eigen::MatrixXd total_j2(int n_spins) {
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  Eigen::MatrixXd jm(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    jm.col(x) = apply_collective(-1, n_spins, Eigen::VectorXd::Unit(dim, x));
  }
  const Eigen::MatrixXd jz = total_jz(n_spins);
  // Ĵ² = Ĵ₊Ĵ₋ + Ĵ_z² − Ĵ_z
  return jm.transpose() * jm + jz * jz - jz;
}

// ---------------------------------------------------------------------------

namespace {

struct ImagePiece {
  HalfInt dm;  // output level shift
  Eigen::MatrixXd columns;
};

// Columns whose outer products, summed and scaled by `scale`, give the channel
// output for the barred element built from `block` (the 2^N × d columns of
// level M).
std::vector<ImagePiece> image_columns(int n_spins, const Eigen::MatrixXd& block,
                                      OracleChannel ch) {
  const Eigen::Index d = block.cols();
  std::vector<ImagePiece> out;
  switch (ch.kind) {
    case ChannelKind::kCollective: {
      ImagePiece p{HalfInt(ch.m), Eigen::MatrixXd(block.rows(), d)};
      for (Eigen::Index i = 0; i < d; ++i) p.columns.col(i) = apply_collective(ch.m, n_spins, block.col(i));
      out.push_back(std::move(p));
      break;
    }
    case ChannelKind::kIndividual: {
      ImagePiece p{HalfInt(ch.m), Eigen::MatrixXd(block.rows(), n_spins * d)};
      for (int s = 0; s < n_spins; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) p.columns.col(s * d + i) = apply_sigma(ch.m, s, block.col(i));
      }
      out.push_back(std::move(p));
      break;
    }
    case ChannelKind::kLoss: {
      // Lost spin up lowers M by 1/2.
      for (int bit : {0, 1}) {
        ImagePiece p{bit ? -kHalf : kHalf, Eigen::MatrixXd(block.rows() / 2, n_spins * d)};
        for (int s = 0; s < n_spins; ++s) {
          for (Eigen::Index i = 0; i < d; ++i) p.columns.col(s * d + i) = slice_spin(block.col(i), s, bit);
        }
        out.push_back(std::move(p));
      }
      break;
    }
  }
  return out;
}

double image_scale(int n_spins, int d, OracleChannel ch) {
  return ch.kind == ChannelKind::kLoss ? 1.0 / (static_cast<double>(n_spins) * d) : 1.0 / d;
}

std::vector<HalfInt> output_js(HalfInt j, OracleChannel ch) {
  switch (ch.kind) {
    case ChannelKind::kCollective:
      return {j};
    case ChannelKind::kIndividual:
      return {j - HalfInt(1), j, j + HalfInt(1)};
    case ChannelKind::kLoss:
      return {j - kHalf, j + kHalf};
  }
  return {};
}

}  // namespace

std::map<ShiftKey, Eigen::MatrixXd> measure_coefficient_matrices(const FullStateBasis& basis,
                                                                 const FullStateBasis* basis_out,
                                                                 HalfInt j, OracleChannel channel) {
  const FullStateBasis& target = channel.kind == ChannelKind::kLoss ? *basis_out : basis;
  const int d = basis.multiplicity(j);
  const int dim = block_dim(j);
  const double scale = image_scale(basis.n_spins(), d, channel);
  std::map<ShiftKey, Eigen::MatrixXd> result;
  // projections[key][level] = B_{J',M+ΔM}^T · image columns of level M
  std::map<ShiftKey, std::vector<Eigen::MatrixXd>> projections;
  for (int mi = 0; mi < dim; ++mi) {
    const HalfInt m = level_at(j, mi);
    const auto pieces = image_columns(basis.n_spins(), basis.sector_columns(j, m), channel);
    for (const auto& piece : pieces) {
      for (HalfInt jo : output_js(j, channel)) {
        if (jo.twice() < 0 || target.multiplicity(jo) == 0) continue;
        const ShiftKey key{jo - j, piece.dm};
        auto& slot = projections[key];
        slot.resize(dim);
        if (!level_in_block(jo, m + piece.dm)) continue;
        slot[mi] = target.sector_columns(jo, m + piece.dm).transpose() * piece.columns;
      }
    }
  }
  for (auto& [key, proj] : projections) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
      if (proj[a].size() == 0) continue;
      for (int b = 0; b < dim; ++b) {
        if (proj[b].size() == 0) continue;
        c(a, b) = scale * proj[a].cwiseProduct(proj[b]).sum();
      }
    }
    if (c.cwiseAbs().maxCoeff() > 0.0) result.emplace(key, std::move(c));
  }
  return result;
}

ChannelImage apply_channel_exact(const FullStateBasis& basis, const FullStateBasis* basis_out,
                                 HalfInt j, HalfInt m_level, HalfInt m_level_prime,
                                 OracleChannel channel,
                                 const std::map<ShiftKey, double>* predicted) {
  if (channel.kind == ChannelKind::kLoss && basis_out == nullptr) {
    throw std::invalid_argument("loss channel needs the (N-1)-spin basis");
  }
  const FullStateBasis& target = channel.kind == ChannelKind::kLoss ? *basis_out : basis;
  const int d = basis.multiplicity(j);
  const double scale = image_scale(basis.n_spins(), d, channel);
  const auto left = image_columns(basis.n_spins(), basis.sector_columns(j, m_level), channel);
  const auto right = image_columns(basis.n_spins(), basis.sector_columns(j, m_level_prime), channel);

  ChannelImage img;
  img.n_out = target.n_spins();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(target.dim(), target.dim());
  Eigen::MatrixXd captured = out;
  Eigen::MatrixXd expected = out;
  for (std::size_t p = 0; p < left.size(); ++p) {
    out.noalias() += scale * left[p].columns * right[p].columns.transpose();
    const HalfInt dm = left[p].dm;
    for (HalfInt jo : output_js(j, channel)) {
      if (jo.twice() < 0 || target.multiplicity(jo) == 0) continue;
      if (!level_in_block(jo, m_level + dm) || !level_in_block(jo, m_level_prime + dm)) continue;
      const auto bl = target.sector_columns(jo, m_level + dm);
      const auto br = target.sector_columns(jo, m_level_prime + dm);
      const double coef =
          scale * (bl.transpose() * left[p].columns).cwiseProduct(br.transpose() * right[p].columns).sum();
      const ShiftKey key{jo - j, dm};
      const Eigen::MatrixXd barred = bl * br.transpose() / static_cast<double>(target.multiplicity(jo));
      if (coef != 0.0) img.coefficients[key] = coef;
      captured += coef * barred;
      if (predicted != nullptr) {
        auto it = predicted->find(key);
        if (it != predicted->end()) expected += it->second * barred;
      }
    }
  }
  img.trace = out.trace();
  img.residual = (out - captured).cwiseAbs().maxCoeff();
  if (predicted != nullptr) img.prediction_deviation = (out - expected).cwiseAbs().maxCoeff();
  return img;
}

double exact_channel_weight(const FullStateBasis& basis, HalfInt j, HalfInt m_level,
                            OracleChannel channel) {
  const int d = basis.multiplicity(j);
  const double scale = image_scale(basis.n_spins(), d, channel);
  double w = 0.0;
  for (const auto& piece : image_columns(basis.n_spins(), basis.sector_columns(j, m_level), channel)) {
    w += scale * piece.columns.squaredNorm();
  }
  return w;
}

// ---------------------------------------------------------------------------

EquivalenceReport verify_loss_dephasing_equivalence(int n_spins) {
  if (n_spins < 2 || n_spins > 8) throw std::domain_error("equivalence check needs 2 <= N <= 8");
  const auto basis = FullStateBasis::build(n_spins);
  struct Sample {
    Eigen::MatrixXd rho, composite, dephased;
  };
  std::vector<Sample> samples;
  for (HalfInt j : basis.j_values()) {
    const int d = basis.multiplicity(j);
    for (int a = 0; a < block_dim(j); ++a) {
      for (int b = 0; b < block_dim(j); ++b) {
        const auto bl = basis.sector_columns(j, level_at(j, a));
        const auto br = basis.sector_columns(j, level_at(j, b));
        Sample s;
        s.rho = bl * br.transpose() / static_cast<double>(d);
        s.composite = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
        s.dephased = s.composite;
        for (int spin = 0; spin < n_spins; ++spin) {
          const Eigen::Index bit = Eigen::Index{1} << spin;
          // Lost spin in state `keep`; a spin in the same state is re-appended
          // at its place, i.e. opposite to the detected M shift.
          for (int keep : {0, 1}) {
            Eigen::MatrixXd pl = bl, pr = br;
            for (Eigen::Index x = 0; x < basis.dim(); ++x) {
              if (((x & bit) != 0) != (keep == 1)) {
                pl.row(x).setZero();
                pr.row(x).setZero();
              }
            }
            s.composite.noalias() += pl * pr.transpose() / (static_cast<double>(d) * n_spins);
          }
          Eigen::MatrixXd zl(bl.rows(), d), zr(br.rows(), d);
          for (int i = 0; i < d; ++i) {
            zl.col(i) = apply_sigma(0, spin, bl.col(i));
            zr.col(i) = apply_sigma(0, spin, br.col(i));
          }
          s.dephased.noalias() += zl * zr.transpose() / static_cast<double>(d);
        }
        samples.push_back(std::move(s));
      }
    }
  }
  // Global least squares for composite ≈ a·ρ + λ·D.
  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  EquivalenceReport rep;
  rep.n_spins = n_spins;
  double lam_lo = 1e300, lam_hi = -1e300;
  for (const auto& s : samples) {
    Eigen::Matrix2d g;
    g << s.rho.squaredNorm(), s.rho.cwiseProduct(s.dephased).sum(), s.rho.cwiseProduct(s.dephased).sum(),
        s.dephased.squaredNorm();
    const Eigen::Vector2d r(s.rho.cwiseProduct(s.composite).sum(), s.dephased.cwiseProduct(s.composite).sum());
    normal += g;
    rhs += r;
    rep.raw_deviation =
        std::max(rep.raw_deviation, (s.composite - s.dephased / n_spins).cwiseAbs().maxCoeff());
    // Per-element rate, only where D is not negligible and ρ, D are not
    // collinear; elsewhere λ is not determined by the element.
    if (g(1, 1) > 1e-16 * g(0, 0) && std::abs(g.determinant()) > 1e-8 * g(0, 0) * g(1, 1)) {
      const Eigen::Vector2d x = g.ldlt().solve(r);
      lam_lo = std::min(lam_lo, x(1));
      lam_hi = std::max(lam_hi, x(1));
    }
  }
  const Eigen::Vector2d fit = normal.ldlt().solve(rhs);
  rep.identity_weight = fit(0);
  rep.dephasing_rate = fit(1);
  for (const auto& s : samples) {
    rep.deviation = std::max(
        rep.deviation, (s.composite - fit(0) * s.rho - fit(1) * s.dephased).cwiseAbs().maxCoeff());
  }
  rep.rate_spread = lam_hi >= lam_lo ? lam_hi - lam_lo : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

const FullStateBasis& cached_basis(int n, std::map<int, FullStateBasis>& cache) {
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, FullStateBasis::build(n)).first;
  return it->second;
}

}  // namespace

std::map<int, Eigen::MatrixXcd> lift(const PiDensityState& state) {
  std::map<int, FullStateBasis> cache;
  std::map<int, Eigen::MatrixXcd> full;
  for (const auto& [sec, blk] : state.blocks()) {
    if (sec.n > 8) throw ResourceError("full-space lift limited to N <= 8");
    const auto& basis = cached_basis(sec.n, cache);
    auto& target = full[sec.n];
    if (target.size() == 0) target = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
    const double d = basis.multiplicity(sec.j);
    for (int a = 0; a < blk.rows(); ++a) {
      for (int b = 0; b < blk.cols(); ++b) {
        if (blk(a, b) == Complex(0.0)) continue;
        const auto bl = basis.sector_columns(sec.j, level_at(sec.j, a));
        const auto br = basis.sector_columns(sec.j, level_at(sec.j, b));
        target += (blk(a, b) / d) * (bl * br.transpose()).cast<Complex>();
      }
    }
  }
  return full;
}

PiDensityState project(const std::map<int, Eigen::MatrixXcd>& full, double* residual) {
  std::map<int, FullStateBasis> cache;
  int n_top = 0;
  for (const auto& [n, m] : full) n_top = std::max(n_top, n);
  PiDensityState out(n_top);
  for (const auto& [n, rho] : full) {
    const auto& basis = cached_basis(n, cache);
    for (HalfInt j : basis.j_values()) {
      const int dim = block_dim(j);
      Block blk(dim, dim);
      for (int a = 0; a < dim; ++a) {
        const Eigen::MatrixXcd bl = basis.sector_columns(j, level_at(j, a)).cast<Complex>();
        for (int b = 0; b < dim; ++b) {
          const auto br = basis.sector_columns(j, level_at(j, b));
          blk(a, b) = (bl.adjoint() * rho * br.cast<Complex>()).trace();
        }
      }
      if (blk.cwiseAbs().maxCoeff() > 0.0) out.set_block({n, j}, std::move(blk));
    }
  }
  if (residual != nullptr) {
    const auto back = lift(out);
    double r = 0.0;
    for (const auto& [n, rho] : full) {
      auto it = back.find(n);
      r = std::max(r, it == back.end() ? rho.cwiseAbs().maxCoeff() : (rho - it->second).cwiseAbs().maxCoeff());
    }
    *residual = r;
  }
  return out;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct SectorOps {
  std::array<SpMat, 3> collective;       // Ĵ_{−1}, Ĵ_z, Ĵ_{+1}
  std::array<SpMat, 3> collective_norm;  // Ĵ_m†Ĵ_m
};

SectorOps make_ops(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  SectorOps ops;
  for (int k = 0; k < 3; ++k) {
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index x = 0; x < dim; ++x) {
      const Eigen::VectorXd col = apply_collective(k - 1, n, Eigen::VectorXd::Unit(dim, x));
      for (Eigen::Index y = 0; y < dim; ++y) {
        if (col(y) != 0.0) trip.emplace_back(y, x, col(y));
      }
    }
    ops.collective[k].resize(dim, dim);
    ops.collective[k].setFromTriplets(trip.begin(), trip.end());
    ops.collective_norm[k] = SpMat(ops.collective[k].transpose()) * ops.collective[k];
  }
  return ops;
}

Eigen::MatrixXcd partial_trace_average(const Eigen::MatrixXcd& rho, int n) {
  // (1/n) Σ_s tr_s ρ, mapping n spins to n−1.
  const Eigen::Index half = rho.rows() / 2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(half, half);
  for (int s = 0; s < n; ++s) {
    const Eigen::Index low_mask = (Eigen::Index{1} << s) - 1;
    std::vector<Eigen::Index> idx0(half), idx1(half);
    for (Eigen::Index y = 0; y < half; ++y) {
      const Eigen::Index x = (y & low_mask) | ((y & ~low_mask) << 1);
      idx0[y] = x;
      idx1[y] = x | (Eigen::Index{1} << s);
    }
    for (Eigen::Index a = 0; a < half; ++a) {
      for (Eigen::Index b = 0; b < half; ++b) out(a, b) += rho(idx0[a], idx0[b]) + rho(idx1[a], idx1[b]);
    }
  }
  return out / static_cast<double>(n);
}

using FullState = std::map<int, Eigen::MatrixXcd>;

FullState lindblad_rhs(const FullState& rho, const FullNoise& noise, const std::map<int, SectorOps>& ops) {
  FullState out;
  for (const auto& [n, r] : rho) {
    const Eigen::Index dim = r.rows();
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(dim, dim);
    const auto& op = ops.at(n);
    for (int k = 0; k < 3; ++k) {
      const double g = noise.collective[k];
      if (g == 0.0) continue;
      const Eigen::MatrixXcd jr = op.collective[k] * r;
      const Eigen::MatrixXcd nr = op.collective_norm[k] * r;
      d += g * (Eigen::MatrixXcd(op.collective[k] * Eigen::MatrixXcd(jr.adjoint())).adjoint() -
                0.5 * (nr + nr.adjoint()));
    }
    for (int k = 0; k < 3; ++k) {
      const double g = noise.individual[k];
      if (g == 0.0) continue;
      for (int s = 0; s < n; ++s) {
        const Eigen::Index bit = Eigen::Index{1} << s;
        for (Eigen::Index x = 0; x < dim; ++x) {
          const bool ux = (x & bit) != 0;
          for (Eigen::Index y = 0; y < dim; ++y) {
            const bool uy = (y & bit) != 0;
            const Complex v = r(x, y);
            if (k == 1) {
              // σ_z ρ σ_z − ρ
              d(x, y) += g * ((ux == uy) ? 0.0 : -2.0) * v;
            } else if (k == 0) {
              // decay: σ₋ρσ₊ − ½{P_up, ρ}
              if (ux && uy) d(x ^ bit, y ^ bit) += g * v;
              d(x, y) -= g * 0.5 * ((ux ? 1.0 : 0.0) + (uy ? 1.0 : 0.0)) * v;
            } else {
              if (!ux && !uy) d(x | bit, y | bit) += g * v;
              d(x, y) -= g * 0.5 * ((ux ? 0.0 : 1.0) + (uy ? 0.0 : 1.0)) * v;
            }
          }
        }
      }
    }
    if (noise.loss > 0.0 && n >= 2) d -= noise.loss * r;
    auto above = rho.find(n + 1);
    if (noise.loss > 0.0 && above != rho.end()) d += noise.loss * partial_trace_average(above->second, n + 1);
    out.emplace(n, std::move(d));
  }
  return out;
}

void axpy(FullState& y, double a, const FullState& x) {
  for (const auto& [n, m] : x) y.at(n) += a * m;
}

}  // namespace

std::map<int, Eigen::MatrixXcd> evolve_lindblad(std::map<int, Eigen::MatrixXcd> rho,
                                                const FullNoise& noise, double t_max, double dt) {
  if (rho.empty()) return rho;
  const int n_top = rho.rbegin()->first;
  if (n_top > 8) throw ResourceError("full-space Lindblad evolution limited to N <= 8");
  if (noise.loss > 0.0) {
    for (int n = n_top - 1; n >= 1; --n) {
      if (!rho.count(n)) rho[n] = Eigen::MatrixXcd::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
    }
  }
  std::map<int, SectorOps> ops;
  for (const auto& [n, m] : rho) ops.emplace(n, make_ops(n));
  const int steps = static_cast<int>(std::llround(t_max / dt));
  for (int s = 0; s < steps; ++s) {
    const FullState k1 = lindblad_rhs(rho, noise, ops);
    FullState tmp = rho;
    axpy(tmp, 0.5 * dt, k1);
    const FullState k2 = lindblad_rhs(tmp, noise, ops);
    tmp = rho;
    axpy(tmp, 0.5 * dt, k2);
    const FullState k3 = lindblad_rhs(tmp, noise, ops);
    tmp = rho;
    axpy(tmp, dt, k3);
    const FullState k4 = lindblad_rhs(tmp, noise, ops);
    axpy(rho, dt / 6.0, k1);
    axpy(rho, dt / 3.0, k2);
    axpy(rho, dt / 3.0, k3);
    axpy(rho, dt / 6.0, k4);
  }
  return rho;
}

double trace_distance(const PiDensityState& a, const PiDensityState& b) {
  std::map<Sector, Block> diff;
  for (const auto& [s, m] : a.blocks()) diff[s] = m;
  for (const auto& [s, m] : b.blocks()) {
    auto it = diff.find(s);
    if (it == diff.end()) {
      diff[s] = -m;
    } else {
      it->second -= m;
    }
  }
  double acc = 0.0;
  for (const auto& [s, m] : diff) {
    const Block h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Block> es(h, Eigen::EigenvaluesOnly);
    acc += es.eigenvalues().cwiseAbs().sum();
  }
  return 0.5 * acc;
}

}  // namespace piqec::oracle
