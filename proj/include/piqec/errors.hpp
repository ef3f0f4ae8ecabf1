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

#ifndef PIQEC_ERRORS_HPP
#define PIQEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace piqec {

// Invalid (N, J, M) combinations and other precondition failures use
// std::domain_error; table lookups outside the stored range use
// std::out_of_range. The types below cover the remaining failure modes.

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyBlockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TableIntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ImpossibleBranchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The state has support outside every syndrome subspace, or cannot be
/// decoded for hand-off. Counted as a logical failure by the experiments.
struct UnrecoverableStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Recovery would land below the smallest J that can hold the code.
struct ThresholdBreach : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedConfiguration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Configuration validation failure; `key` names the offending entry.
struct ConfigError : std::runtime_error {
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key(std::move(key)) {}
  std::string key;
};

}  // namespace piqec

#endif  // PIQEC_ERRORS_HPP
