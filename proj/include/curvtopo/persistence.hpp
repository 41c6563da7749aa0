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

#include "curvtopo/rips.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace curvtopo {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = kInfinity;
    /// Still alive at the filtration cap; `death` then equals the cap.
    bool capped = false;

    bool essential() const { return std::isinf(death); }
    double persistence() const { return death - birth; }

    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

/// Orders by (dim, birth, death, capped).
bool pair_less(const PersistencePair& a, const PersistencePair& b);

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;
    double max_eps = 0.0;

    std::vector<PersistencePair> of_dim(int dim) const;
    std::size_t count(int dim) const;
    void sort();
};

/// Bookkeeping from a reduction run.
struct ReductionStats {
    std::array<std::uint64_t, 3> simplices{}; ///< vertices, edges, triangles
    /// Betti numbers of the full complex at the cap. Includes classes born at
    /// the cap itself, which the diagram drops as zero-persistence.
    std::array<std::uint64_t, 3> betti{};
    std::uint64_t reduced_columns = 0;  ///< columns that needed at least one addition
    std::uint64_t column_additions = 0; ///< total column additions over GF(2)
};

/// Dimension-0 persistence of the Rips filtration by Kruskal's algorithm:
/// n - 1 pairs (0, w) for the minimum spanning tree weights, ascending, then
/// one essential pair (0, inf).
std::vector<PersistencePair> compute_h0(const DistanceMatrix& d);

/// Standard GF(2) column reduction of the boundary matrix of `f`, dimension 2
/// first so that columns paired there are cleared from dimension 1.
/// Zero-persistence pairs are dropped; dimension-1 classes alive at the cap are
/// reported with death = max_eps and `capped` set. Throws std::invalid_argument
/// if a simplex precedes one of its faces or values decrease.
PersistenceDiagram reduce(const Filtration& f, ReductionStats* stats = nullptr);

/// Same diagram as reduce(build_flag_filtration(d, options)), computed by
/// reducing edge coboundaries instead of triangle boundaries, without ever
/// materializing the triangles. The simplex budget still applies.
PersistenceDiagram flag_persistence(const DistanceMatrix& d, const FlagOptions& options,
                                    ReductionStats* stats = nullptr);

struct BettiNumbers {
    std::uint64_t b0 = 0;
    std::uint64_t b1 = 0;

    friend bool operator==(const BettiNumbers&, const BettiNumbers&) = default;
};

/// Classes alive at `eps`: birth <= eps < death. Essential and capped classes
/// count at every eps >= birth, the cap included.
BettiNumbers betti_at(const PersistenceDiagram& diagram, double eps);

/// {"max_eps": x, "pairs": [{"dim", "birth", "death" (number or "inf"), "capped"}]}
/// with pairs sorted by (dim, birth, death).
std::string diagram_to_json(const PersistenceDiagram& diagram);
PersistenceDiagram diagram_from_json(std::string_view text);
void save_diagram(const PersistenceDiagram& diagram, const std::filesystem::path& path);
PersistenceDiagram load_diagram(const std::filesystem::path& path);

} // namespace curvtopo
