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

#ifndef PIQEC_VERIFICATION_HPP
#define PIQEC_VERIFICATION_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace piqec {

struct ChannelMapCheck {
  int n_spins = 0;
  std::string channel;  // "collective:-1", "individual:0", "loss", ...
  long elements = 0;
  /// Largest element-wise gap between the exact channel output and the
  /// PI-level prediction from the analytic coefficient table.
  double prediction_deviation = 0.0;
  /// Largest element-wise part of the exact output not spanned by barred terms.
  double residual = 0.0;
};

struct VerificationReport {
  int n_max = 0;
  double tol = 0.0;
  std::vector<ChannelMapCheck> channel_maps;
  /// Largest N for which Σ_J d_N^J (2J+1) = 2^N failed; 0 when none.
  int sum_rule_failure = 0;
  std::vector<double> loss_dephasing_deviation;  // index N − 2
  double max_deviation() const;
  bool pass() const;
};

/// Every channel applied to every barred element of every block, N ≤ n_max,
/// against the full 2^N-space oracle; plus the degeneracy sum rule for
/// N ≤ max(n_max, 30) and the loss/dephasing equivalence for N ≤ min(n_max, 8).
/// Throws ResourceError beyond the oracle's spin cap.
VerificationReport verify_all(int n_max, double tol = 1e-10);

void print_report(std::ostream& out, const VerificationReport& report);

}  // namespace piqec

#endif  // PIQEC_VERIFICATION_HPP
