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

#include "coboundary_reducer.hpp"

#include "union_find.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <queue>
#include <span>
#include <unordered_map>

namespace curvtopo::detail {

namespace {

// A triangle in filtration order: the high word is the position of the first
// edge of its value level, the low word its packed vertex triple.
using Key = unsigned __int128;

constexpr std::uint64_t kNotStored = std::numeric_limits<std::uint64_t>::max();

class CoboundaryReducer {
public:
    explicit CoboundaryReducer(const FlagComplex& complex)
        : complex_(complex), edges_(complex.edges()), level_(edges_.size()) {
        for (std::size_t p = 0; p < edges_.size(); ++p) {
            level_[p] = p > 0 && edges_[p].value == edges_[p - 1].value ? level_[p - 1]
                                                                          : static_cast<std::uint32_t>(p);
        }
    }

    double value(Key t) const { return edges_[static_cast<std::uint64_t>(t >> 64)].value; }

    // Oldest cofacet of edge p and the position of that triangle's youngest
    // edge. False when p has no cofacet.
    bool oldest_cofacet(std::uint32_t p, Key& oldest, std::uint32_t& youngest) const {
        bool found = false;
        visit_cofacets(p, [&](Key t, std::uint32_t young) {
            if (!found || t < oldest) {
                oldest = t;
                youngest = young;
                found = true;
            }
        });
        return found;
    }

    // Reduces the column of edge p. Returns true and sets `pivot` when the
    // column does not vanish.
    bool reduce(std::uint32_t p, Key& pivot) {
        std::uint32_t youngest = 0;
        if (!oldest_cofacet(p, pivot, youngest)) {
            return false;
        }
        if (youngest == p) {
            // Apparent pair: no later edge is a face of `pivot`, so no other
            // column can own it.
            own(pivot, p, kNotStored);
            return true;
        }
        // The working column is kept as a heap of cofacets in which equal
        // entries cancel in pairs, together with the edges it is the
        // coboundary of. Only its oldest entry is ever needed.
        heap_ = {};
        push_coboundary(p);
        combination_.assign(1, p);
        bool added = false;
        while (pop_pivot(pivot)) {
            const auto it = owner_.find(static_cast<std::uint64_t>(pivot));
            if (it == owner_.end()) {
                std::uint64_t slot = kNotStored;
                if (added) {
                    slot = offsets_.size() - 1;
                    entries_.insert(entries_.end(), combination_.begin(), combination_.end());
                    offsets_.push_back(entries_.size());
                }
                own(pivot, p, slot);
                return true;
            }
            heap_.push(pivot);
            const Column& other = columns_[it->second];
            if (other.slot == kNotStored) {
                push_coboundary(other.edge);
                toggle({&other.edge, 1});
            } else {
                const std::span<const std::uint32_t> edges(entries_.data() + offsets_[other.slot],
                                                           entries_.data() + offsets_[other.slot + 1]);
                for (const std::uint32_t e : edges) {
                    push_coboundary(e);
                }
                toggle(edges);
            }
            ++additions_;
            if (!added) {
                added = true;
                ++reduced_columns_;
            }
        }
        return false;
    }

    std::uint64_t additions() const { return additions_; }
    std::uint64_t reduced_columns() const { return reduced_columns_; }

private:
    struct Column {
        std::uint32_t edge;
        std::uint64_t slot; // kNotStored: the column is the plain coboundary of `edge`
    };

    void push_coboundary(std::uint32_t p) {
        visit_cofacets(p, [this](Key t, std::uint32_t) { heap_.push(t); });
    }

    // Removes cancelling pairs from the top and pops the oldest survivor.
    bool pop_pivot(Key& pivot) {
        while (!heap_.empty()) {
            pivot = heap_.top();
            heap_.pop();
            if (heap_.empty() || heap_.top() != pivot) {
                return true;
            }
            heap_.pop();
        }
        return false;
    }

    // combination_ ^= edges, both sorted descending.
    void toggle(std::span<const std::uint32_t> edges) {
        scratch_.clear();
        std::set_symmetric_difference(combination_.begin(), combination_.end(), edges.begin(),
                                      edges.end(), std::back_inserter(scratch_), std::greater<>());
        combination_.swap(scratch_);
    }

    template <typename Visit>
    void visit_cofacets(std::uint32_t p, Visit&& visit) const {
        const Edge& e = edges_[p];
        const std::uint32_t* row_u = complex_.edge_row(e.u);
        const std::uint32_t* row_v = complex_.edge_row(e.v);
        constexpr int bits = FlagComplex::kKeyBits;
        for (std::uint32_t k = 0; k < complex_.vertex_count(); ++k) {
            const std::uint32_t pu = row_u[k];
            const std::uint32_t pv = row_v[k];
            // The diagonal holds kNoEdge, so k == u and k == v drop out.
            if (pu == kNoEdge || pv == kNoEdge) {
                continue;
            }
            const std::uint32_t young = std::max({p, pu, pv});
            std::uint64_t a = e.u, b = e.v, c = k;
            if (c < b) {
                std::swap(b, c);
                if (b < a) {
                    std::swap(a, b);
                }
            }
            const std::uint64_t vertices = (a << (2 * bits)) | (b << bits) | c;
            visit((static_cast<Key>(level_[young]) << 64) | vertices, young);
        }
    }

    void own(Key pivot, std::uint32_t edge, std::uint64_t slot) {
        owner_.emplace(static_cast<std::uint64_t>(pivot), static_cast<std::uint32_t>(columns_.size()));
        columns_.push_back({edge, slot});
    }

    const FlagComplex& complex_;
    const std::vector<Edge>& edges_;
    std::vector<std::uint32_t> level_; // edge -> first edge of its value level

    std::unordered_map<std::uint64_t, std::uint32_t> owner_; // pivot triangle -> column
    std::vector<Column> columns_;
    std::vector<std::uint64_t> offsets_{0};
    std::vector<std::uint32_t> entries_; // edges whose coboundaries sum to a stored column
    std::priority_queue<Key, std::vector<Key>, std::greater<>> heap_;
    std::vector<std::uint32_t> combination_;
    std::vector<std::uint32_t> scratch_;

    std::uint64_t additions_ = 0;
    std::uint64_t reduced_columns_ = 0;
};

} // namespace

PersistenceDiagram reduce_coboundaries(const FlagComplex& complex, double max_eps,
                                       bool with_triangles, std::uint64_t triangles,
                                       ReductionStats* stats) {
    const auto& edges = complex.edges();
    PersistenceDiagram diagram;
    diagram.max_eps = max_eps;

    // Dimension 0, and the edges it clears from dimension 1.
    std::vector<std::uint8_t> merges(edges.size(), 0);
    UnionFind components(complex.vertex_count());
    for (std::size_t p = 0; p < edges.size(); ++p) {
        if (components.unite(edges[p].u, edges[p].v)) {
            merges[p] = 1;
            if (edges[p].value > 0.0) {
                diagram.pairs.push_back({0, 0.0, edges[p].value, false});
            }
        }
    }
    std::uint64_t roots = 0;
    for (std::uint32_t v = 0; v < complex.vertex_count(); ++v) {
        if (components.find(v) == v) {
            ++roots;
            diagram.pairs.push_back({0, 0.0, kInfinity, false});
        }
    }

    CoboundaryReducer reducer(complex);
    std::uint64_t essential = 0;
    std::uint64_t killed = 0;
    for (std::size_t i = edges.size(); i-- > 0;) {
        if (merges[i] != 0) {
            continue;
        }
        const auto p = static_cast<std::uint32_t>(i);
        const double birth = edges[p].value;
        Key pivot = 0;
        if (with_triangles && reducer.reduce(p, pivot)) {
            ++killed;
            const double death = reducer.value(pivot);
            if (death > birth) {
                diagram.pairs.push_back({1, birth, death, false});
            }
            continue;
        }
        ++essential;
        if (max_eps > birth) {
            diagram.pairs.push_back({1, birth, max_eps, true});
        }
    }

    if (stats != nullptr) {
        stats->simplices = {complex.vertex_count(), edges.size(), triangles};
        stats->betti = {roots, essential, triangles - killed};
        stats->reduced_columns = reducer.reduced_columns();
        stats->column_additions = reducer.additions();
    }
    diagram.sort();
    return diagram;
}

} // namespace curvtopo::detail
