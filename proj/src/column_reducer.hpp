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

#include "curvtopo/persistence.hpp"
#include "flag_complex.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace curvtopo::detail {

/// Boundary-matrix reduction over GF(2) for a 2-dimensional filtration.
///
/// Vertices and edges are known up front; triangles are streamed in
/// filtration order through add_triangle(), then finish() reduces the edge
/// columns that were not cleared by a triangle pivot.
///
/// Triangle columns are reduced left to right. A column whose lowest entry is
/// an unpaired edge is paired immediately. Otherwise the column can only end
/// on an edge that is positive, unpaired, and older than its current pivot;
/// once no such edge exists the column is known to reduce to zero and the
/// remaining additions are skipped.
class ColumnReducer {
public:
    /// `edges[i].u/v` are vertex positions; edges are in filtration order.
    ColumnReducer(std::vector<double> vertex_values, std::span<const Edge> edges, double max_eps);

    /// `faces` are edge positions in ascending order.
    void add_triangle(double value, const std::array<std::uint32_t, 3>& faces);

    PersistenceDiagram finish(ReductionStats* stats);

private:
    void store_and_pair(std::uint32_t pivot, double value);
    void advance_alive();

    std::vector<double> vertex_values_;
    std::span<const Edge> edges_;
    double max_eps_;

    std::vector<std::uint8_t> positive_; // edge closes a cycle when it enters
    std::vector<std::uint8_t> paired_;   // edge is the pivot of a reduced triangle column
    std::vector<std::uint32_t> owner_;   // edge -> column slot in the store
    std::uint32_t min_alive_ = 0;        // oldest positive edge not yet paired

    std::vector<std::uint64_t> offsets_{0};
    std::vector<std::uint32_t> entries_;
    std::vector<std::uint32_t> work_;
    std::vector<std::uint32_t> scratch_;

    std::vector<PersistencePair> pairs_;
    std::uint64_t triangles_ = 0;
    std::uint64_t negative_triangles_ = 0;
    std::uint64_t reduced_columns_ = 0;
    std::uint64_t additions_ = 0;
};

} // namespace curvtopo::detail
