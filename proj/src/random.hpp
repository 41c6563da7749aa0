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

#include <cstdint>
#include <random>

namespace curvtopo::detail {

// std::mt19937_64 output is fixed by the standard, but the standard
// distributions are not; bounded draws are done here so subsampling gives the
// same answer on every toolchain.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t reject_below = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= reject_below) {
                return r % bound;
            }
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace curvtopo::detail
