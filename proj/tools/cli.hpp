// Copyright 2026 The curvtopo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "curvtopo/metrics.hpp"
#include "curvtopo/persistence_image.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curvtopo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, bad config values or unusable paths (exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Effective options of one run: built-in defaults, overridden by the config
/// file, overridden by flags.
struct Settings {
    RipsOptions rips;
    PiOptions pi;
    DimSelection dims;
    bool resize_to_source = true; ///< pi-gen: resample the PI to the mask size
    MetricsOptions metrics;
    int threshold = 128;
    std::optional<int> threads;
    std::string format; ///< eval: "csv", "json" or empty (from the extension)
};

/// Overrides `settings` with the keys of a JSON object. Unknown keys and
/// out-of-range values throw UsageError.
void apply_config(Settings& settings, std::string_view json_text);

/// The options that determine pi-gen output, as canonical JSON.
std::string pi_config_json(const Settings& settings);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// --threads, else CURVTOPO_THREADS, else the hardware concurrency.
int resolve_threads(std::optional<int> flag);

/// Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace curvtopo::cli
