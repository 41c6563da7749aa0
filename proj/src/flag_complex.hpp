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

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <span>
#include <vector>

namespace curvtopo::detail {

inline constexpr std::uint32_t kNoEdge = std::numeric_limits<std::uint32_t>::max();

struct Edge {
    std::uint32_t u = 0; ///< u < v
    std::uint32_t v = 0;
    double value = 0.0;
};

struct Triangle {
    std::array<std::uint32_t, 3> vertices{};
    std::array<std::uint32_t, 3> faces{}; ///< edge positions, ascending
    double value = 0.0;
};

/// Implicit flag complex over a distance matrix: edges sorted by
/// (value, u, v) and triangles produced one value level at a time, so the
/// full triangle list never has to be stored.
class FlagComplex {
public:
    FlagComplex(const DistanceMatrix& d, double max_eps);

    std::uint32_t vertex_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::uint32_t edge_position(std::uint32_t a, std::uint32_t b) const {
        return position_[static_cast<std::size_t>(a) * n_ + b];
    }

    /// Row of edge positions from vertex `a` to every vertex (kNoEdge if absent).
    const std::uint32_t* edge_row(std::uint32_t a) const {
        return &position_[static_cast<std::size_t>(a) * n_];
    }

    /// Calls `visit(first_edge, last_edge, triangles)` for each run of equal
    /// edge values, in increasing order. `triangles` holds every triangle whose
    /// longest edge lies in the run, sorted by vertex tuple; with
    /// `with_triangles == false` it is always empty.
    template <typename Visitor>
    void for_each_level(bool with_triangles, Visitor&& visit) const {
        std::vector<Triangle> level;
        std::vector<std::uint64_t> keys;
        std::size_t first = 0;
        while (first < edges_.size()) {
            std::size_t last = first + 1;
            while (last < edges_.size() && edges_[last].value == edges_[first].value) {
                ++last;
            }
            level.clear();
            if (with_triangles) {
                collect_triangles(first, last, keys, level);
            }
            visit(first, last, std::span<const Triangle>(level));
            first = last;
        }
    }

    static constexpr int kKeyBits = 21;

private:
    void collect_triangles(std::size_t first, std::size_t last, std::vector<std::uint64_t>& keys,
                           std::vector<Triangle>& out) const {
        // Vertex triples are packed into one key so the per-level sort moves
        // 8 bytes per triangle; faces are looked up again afterwards.
        keys.clear();
        for (std::size_t e = first; e < last; ++e) {
            const auto pos = static_cast<std::uint32_t>(e);
            const Edge& edge = edges_[e];
            const std::uint32_t* row_u = &position_[static_cast<std::size_t>(edge.u) * n_];
            const std::uint32_t* row_v = &position_[static_cast<std::size_t>(edge.v) * n_];
            for (std::uint32_t k = 0; k < n_; ++k) {
                // The diagonal holds kNoEdge, so k == u and k == v drop out.
                if (row_u[k] < pos && row_v[k] < pos) {
                    std::uint64_t a = edge.u, b = edge.v, c = k;
                    if (c < b) {
                        std::swap(b, c);
                        if (b < a) {
                            std::swap(a, b);
                        }
                    }
                    keys.push_back((a << (2 * kKeyBits)) | (b << kKeyBits) | c);
                }
            }
        }
        std::sort(keys.begin(), keys.end());
        constexpr std::uint64_t mask = (std::uint64_t{1} << kKeyBits) - 1;
        const double value = edges_[first].value;
        out.resize(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const auto a = static_cast<std::uint32_t>(keys[i] >> (2 * kKeyBits));
            const auto b = static_cast<std::uint32_t>((keys[i] >> kKeyBits) & mask);
            const auto c = static_cast<std::uint32_t>(keys[i] & mask);
            Triangle& t = out[i];
            t.vertices = {a, b, c};
            t.faces = {edge_position(a, b), edge_position(a, c), edge_position(b, c)};
            std::sort(t.faces.begin(), t.faces.end());
            t.value = value;
        }
    }

    std::uint32_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> position_; ///< n*n edge positions, kNoEdge when absent
};

} // namespace curvtopo::detail
