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

#include "piqec/verification.hpp"

#include <algorithm>
#include <memory>
#include <ostream>

#include "piqec/coefficients.hpp"
#include "piqec/errors.hpp"
#include "piqec/oracle.hpp"

namespace piqec {

namespace {

using oracle::OracleChannel;
using oracle::ShiftKey;

std::map<ShiftKey, double> predict(const SectorCoefficients& sc, int a, int b,
                                   const std::vector<Branch>& branches) {
  std::map<ShiftKey, double> out;
  for (const Branch& br : branches) {
    const Eigen::VectorXd& row = sc.row(br);
    const double c = row(a) * row(b);
    if (c != 0.0) out[{br.dj, br.dm}] += c;
  }
  return out;
}

std::vector<Branch> branches_of(OracleChannel ch) {
  std::vector<Branch> out;
  const HalfInt dm = HalfInt::from_twice(2 * ch.m);
  if (ch.kind == ChannelKind::kCollective) {
    out.push_back({ch.kind, HalfInt::from_twice(0), dm});
  } else if (ch.kind == ChannelKind::kIndividual) {
    for (const auto& b : individual_branches()) {
      if (b.dm == dm) out.push_back(b);
    }
  } else {
    for (const auto& b : loss_branches()) out.push_back(b);
  }
  return out;
}

std::string name_of(OracleChannel ch) {
  if (ch.kind == ChannelKind::kLoss) return "loss";
  return std::string(to_string(ch.kind)) + ":" + std::to_string(ch.m);
}

}  // namespace

double VerificationReport::max_deviation() const {
  double m = 0.0;
  for (const auto& c : channel_maps) m = std::max({m, c.prediction_deviation, c.residual});
  for (double d : loss_dephasing_deviation) m = std::max(m, d);
  return m;
}

bool VerificationReport::pass() const { return sum_rule_failure == 0 && max_deviation() <= tol; }

VerificationReport verify_all(int n_max, double tol) {
  if (n_max > oracle::kMaxSpins) {
    throw ResourceError("verify: the full-space oracle is limited to N <= " +
                        std::to_string(oracle::kMaxSpins));
  }
  if (n_max < 2) throw std::domain_error("verify: need n_max >= 2");
  VerificationReport rep;
  rep.n_max = n_max;
  rep.tol = tol;

  // Analytic route only, so the oracle below is an independent check.
  const CoefficientTable table = CoefficientTable::build(n_max, {.oracle_cap = 0, .tolerance = tol});
  std::vector<OracleChannel> channels;
  for (int m : kShifts) channels.push_back({ChannelKind::kCollective, m});
  for (int m : kShifts) channels.push_back({ChannelKind::kIndividual, m});
  channels.push_back({ChannelKind::kLoss, 0});

  for (int n = 1; n <= n_max; ++n) {
    const auto basis = oracle::FullStateBasis::build(n);
    std::unique_ptr<oracle::FullStateBasis> below;
    if (n >= 2) below = std::make_unique<oracle::FullStateBasis>(oracle::FullStateBasis::build(n - 1));
    for (const OracleChannel& ch : channels) {
      if (ch.kind == ChannelKind::kLoss && n < 2) continue;
      ChannelMapCheck c{n, name_of(ch)};
      const std::vector<Branch> branches = branches_of(ch);
      for (HalfInt j : basis.j_values()) {
        const SectorCoefficients& sc = table.sector(n, j);
        for (int a = 0; a < block_dim(j); ++a) {
          for (int b = 0; b < block_dim(j); ++b) {
            const auto pred = predict(sc, a, b, branches);
            const auto img = oracle::apply_channel_exact(basis, below.get(), j, level_at(j, a),
                                                         level_at(j, b), ch, &pred);
            c.prediction_deviation = std::max(c.prediction_deviation, img.prediction_deviation);
            c.residual = std::max(c.residual, img.residual);
            ++c.elements;
          }
        }
      }
      rep.channel_maps.push_back(c);
    }
  }

  for (int n = 1; n <= std::max(n_max, 30); ++n) {
    BigInt total = 0;
    for (int tj = n % 2; tj <= n; tj += 2) total += degeneracy(n, HalfInt::from_twice(tj)) * (tj + 1);
    if (total != (BigInt(1) << n)) rep.sum_rule_failure = n;
  }

  for (int n = 2; n <= std::min(n_max, 8); ++n) {
    rep.loss_dephasing_deviation.push_back(oracle::verify_loss_dephasing_equivalence(n).deviation);
  }
  return rep;
}

void print_report(std::ostream& out, const VerificationReport& rep) {
  out << "oracle verification, N <= " << rep.n_max << ", tol " << rep.tol << "\n";
  for (const auto& c : rep.channel_maps) {
    out << "  N=" << c.n_spins << " " << c.channel << ": " << c.elements
        << " elements, deviation " << c.prediction_deviation << ", residual " << c.residual
        << "\n";
  }
  out << "  degeneracy sum rule: "
      << (rep.sum_rule_failure == 0 ? "exact" : "fails at N=" + std::to_string(rep.sum_rule_failure))
      << "\n";
  for (std::size_t i = 0; i < rep.loss_dephasing_deviation.size(); ++i) {
    out << "  loss/dephasing equivalence N=" << i + 2 << ": deviation "
        << rep.loss_dephasing_deviation[i] << "\n";
  }
  out << (rep.pass() ? "PASS" : "FAIL") << " (max deviation " << rep.max_deviation() << ")\n";
}

}  // namespace piqec
