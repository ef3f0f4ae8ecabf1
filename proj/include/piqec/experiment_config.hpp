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

#ifndef PIQEC_EXPERIMENT_CONFIG_HPP
#define PIQEC_EXPERIMENT_CONFIG_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "piqec/recovery.hpp"
#include "piqec/sensing.hpp"

namespace piqec {

/// Experiment files are YAML mappings. Unknown keys, wrong types and values
/// that fail validation all raise ConfigError naming the dotted key.
/// `output`, when present, is stored in *output.
MemoryConfig load_memory_config(std::istream& in, std::string* output = nullptr);
SensingConfig load_sensing_config(std::istream& in, std::string* output = nullptr);
MemoryConfig load_memory_config(const std::filesystem::path& file, std::string* output = nullptr);
SensingConfig load_sensing_config(const std::filesystem::path& file,
                                  std::string* output = nullptr);

/// Fully resolved configuration as JSON, defaults included.
std::string resolved_json(const MemoryConfig& config);
std::string resolved_json(const SensingConfig& config);

}  // namespace piqec

#endif  // PIQEC_EXPERIMENT_CONFIG_HPP
