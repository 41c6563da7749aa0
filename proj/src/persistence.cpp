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

#include "curvtopo/persistence.hpp"

#include "coboundary_reducer.hpp"
#include "column_reducer.hpp"
#include "curvtopo/error.hpp"
#include "flag_complex.hpp"
#include "union_find.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace curvtopo {

bool pair_less(const PersistencePair& a, const PersistencePair& b) {
    return std::tie(a.dim, a.birth, a.death, a.capped) < std::tie(b.dim, b.birth, b.death, b.capped);
}

std::vector<PersistencePair> PersistenceDiagram::of_dim(int dim) const {
    std::vector<PersistencePair> out;
    std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out),
                 [dim](const PersistencePair& p) { return p.dim == dim; });
    return out;
}

std::size_t PersistenceDiagram::count(int dim) const {
    return static_cast<std::size_t>(std::count_if(
        pairs.begin(), pairs.end(), [dim](const PersistencePair& p) { return p.dim == dim; }));
}

void PersistenceDiagram::sort() {
    std::sort(pairs.begin(), pairs.end(), pair_less);
}

namespace detail {

ColumnReducer::ColumnReducer(std::vector<double> vertex_values, std::span<const Edge> edges,
                             double max_eps)
    : vertex_values_(std::move(vertex_values)),
      edges_(edges),
      max_eps_(max_eps),
      positive_(edges.size(), 0),
      paired_(edges.size(), 0),
      owner_(edges.size(), 0) {
    UnionFind components(vertex_values_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        positive_[e] = components.unite(edges_[e].u, edges_[e].v) ? 0 : 1;
    }
    advance_alive();
}

void ColumnReducer::advance_alive() {
    while (min_alive_ < edges_.size() && (positive_[min_alive_] == 0 || paired_[min_alive_] != 0)) {
        ++min_alive_;
    }
}

void ColumnReducer::store_and_pair(std::uint32_t pivot, double value) {
    if (positive_[pivot] == 0) {
        throw std::logic_error("triangle column reduced onto a negative edge");
    }
    owner_[pivot] = static_cast<std::uint32_t>(offsets_.size() - 1);
    entries_.insert(entries_.end(), work_.begin(), work_.end());
    offsets_.push_back(entries_.size());
    paired_[pivot] = 1;
    ++negative_triangles_;
    const double birth = edges_[pivot].value;
    if (value > birth) {
        pairs_.push_back({1, birth, value, false});
    }
    if (pivot == min_alive_) {
        advance_alive();
    }
}

void ColumnReducer::add_triangle(double value, const std::array<std::uint32_t, 3>& faces) {
    ++triangles_;
    work_.assign(faces.begin(), faces.end());
    bool counted = false;
    while (!work_.empty()) {
        const std::uint32_t pivot = work_.back();
        if (paired_[pivot] == 0) {
            store_and_pair(pivot, value);
            return;
        }
        if (pivot < min_alive_) {
            return; // only a positive unpaired edge could end this column
        }
        if (!counted) {
            ++reduced_columns_;
            counted = true;
        }
        const std::uint32_t slot = owner_[pivot];
        const auto first = entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[slot]);
        const auto last = entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[slot + 1]);
        scratch_.clear();
        std::set_symmetric_difference(work_.begin(), work_.end(), first, last,
                                      std::back_inserter(scratch_));
        work_.swap(scratch_);
        ++additions_;
    }
}

PersistenceDiagram ColumnReducer::finish(ReductionStats* stats) {
    constexpr std::uint32_t kFree = std::numeric_limits<std::uint32_t>::max();
    // low_[w]: the other entry of the reduced edge column whose pivot is vertex w.
    std::vector<std::uint32_t> low(vertex_values_.size(), kFree);
    std::uint64_t capped_classes = 0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (paired_[e] != 0) {
            continue; // cleared: its column reduces to zero
        }
        std::uint32_t lo = std::min(edges_[e].u, edges_[e].v);
        std::uint32_t hi = std::max(edges_[e].u, edges_[e].v);
        bool zero = false;
        while (low[hi] != kFree) {
            const std::uint32_t other = low[hi];
            if (other == lo) {
                zero = true;
                break;
            }
            hi = std::max(lo, other);
            lo = std::min(lo, other);
        }
        if (zero != (positive_[e] != 0)) {
            throw std::logic_error("edge column reduction disagrees with component merging");
        }
        if (!zero) {
            low[hi] = lo;
            const double birth = vertex_values_[hi];
            if (edges_[e].value > birth) {
                pairs_.push_back({0, birth, edges_[e].value, false});
            }
        } else {
            ++capped_classes;
            if (max_eps_ > edges_[e].value) {
                pairs_.push_back({1, edges_[e].value, max_eps_, true});
            }
        }
    }
    std::uint64_t components = 0;
    for (std::size_t w = 0; w < vertex_values_.size(); ++w) {
        if (low[w] == kFree) {
            ++components;
            pairs_.push_back({0, vertex_values_[w], kInfinity, false});
        }
    }
    if (stats != nullptr) {
        stats->simplices = {vertex_values_.size(), edges_.size(), triangles_};
        stats->betti = {components, capped_classes, triangles_ - negative_triangles_};
        stats->reduced_columns = reduced_columns_;
        stats->column_additions = additions_;
    }
    PersistenceDiagram diagram;
    diagram.pairs = std::move(pairs_);
    diagram.max_eps = max_eps_;
    diagram.sort();
    return diagram;
}

} // namespace detail

std::vector<PersistencePair> compute_h0(const DistanceMatrix& d) {
    const auto n = static_cast<std::uint32_t>(d.rows());
    struct Candidate {
        double w;
        std::uint32_t a, b;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0) / 2);
    for (std::uint32_t b = 0; b < n; ++b) {
        for (std::uint32_t a = 0; a < b; ++a) {
            candidates.push_back({d(a, b), a, b});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        return std::tie(x.w, x.a, x.b) < std::tie(y.w, y.a, y.b);
    });
    std::vector<PersistencePair> pairs;
    detail::UnionFind forest(n);
    for (const auto& c : candidates) {
        if (pairs.size() + 1 == n) {
            break;
        }
        if (forest.unite(c.a, c.b)) {
            pairs.push_back({0, 0.0, c.w, false});
        }
    }
    if (n > 0) {
        pairs.push_back({0, 0.0, kInfinity, false});
    }
    return pairs;
}

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
    return (std::uint64_t{a} << 32) | b;
}

[[noreturn]] void order_error(std::size_t index, const std::string& what) {
    throw std::invalid_argument("filtration simplex " + std::to_string(index) + ": " + what);
}

} // namespace

PersistenceDiagram reduce(const Filtration& f, ReductionStats* stats) {
    std::unordered_map<std::uint32_t, std::uint32_t> vertex_position;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_position;
    std::vector<double> vertex_values;
    std::vector<std::size_t> vertex_index;
    std::vector<detail::Edge> edges;
    std::vector<std::size_t> edge_index;

    auto vertex_of = [&](std::size_t i, std::uint32_t id, double value) {
        const auto it = vertex_position.find(id);
        if (it == vertex_position.end() || vertex_index[it->second] >= i ||
            vertex_values[it->second] > value) {
            order_error(i, "vertex " + std::to_string(id) + " does not precede its coface");
        }
        return it->second;
    };

    double previous = -kInfinity;
    for (std::size_t i = 0; i < f.simplices.size(); ++i) {
        const Simplex& s = f.simplices[i];
        if (s.size < 1 || s.size > 3) {
            order_error(i, "only vertices, edges and triangles are supported");
        }
        for (int k = 1; k < s.size; ++k) {
            if (s.vertices[k - 1] >= s.vertices[k]) {
                order_error(i, "vertices must be strictly increasing");
            }
        }
        if (!(s.value >= previous)) {
            order_error(i, "filtration values decrease");
        }
        if (s.value > f.max_eps) {
            order_error(i, "value exceeds max_eps");
        }
        previous = s.value;
        if (s.size == 1) {
            const auto pos = static_cast<std::uint32_t>(vertex_values.size());
            if (!vertex_position.emplace(s.vertices[0], pos).second) {
                order_error(i, "duplicate vertex");
            }
            vertex_values.push_back(s.value);
            vertex_index.push_back(i);
        } else if (s.size == 2) {
            const auto u = vertex_of(i, s.vertices[0], s.value);
            const auto v = vertex_of(i, s.vertices[1], s.value);
            const auto pos = static_cast<std::uint32_t>(edges.size());
            if (!edge_position.emplace(edge_key(s.vertices[0], s.vertices[1]), pos).second) {
                order_error(i, "duplicate edge");
            }
            edges.push_back({u, v, s.value});
            edge_index.push_back(i);
        }
    }

    detail::ColumnReducer reducer(vertex_values, edges, f.max_eps);
    for (std::size_t i = 0; i < f.simplices.size(); ++i) {
        const Simplex& s = f.simplices[i];
        if (s.size != 3) {
            continue;
        }
        const auto& v = s.vertices;
        std::array<std::uint32_t, 3> faces{};
        const std::array<std::uint64_t, 3> keys = {edge_key(v[0], v[1]), edge_key(v[0], v[2]),
                                                   edge_key(v[1], v[2])};
        for (int k = 0; k < 3; ++k) {
            const auto it = edge_position.find(keys[k]);
            if (it == edge_position.end() || edge_index[it->second] >= i ||
                edges[it->second].value > s.value) {
                order_error(i, "triangle appears before one of its edges");
            }
            faces[k] = it->second;
        }
        std::sort(faces.begin(), faces.end());
        reducer.add_triangle(s.value, faces);
    }
    return reducer.finish(stats);
}

PersistenceDiagram flag_persistence(const DistanceMatrix& d, const FlagOptions& options,
                                    ReductionStats* stats) {
    const std::uint64_t size = count_flag_simplices(d, options);
    if (size > options.simplex_budget) {
        throw BudgetExceeded("flag complex has " + std::to_string(size) +
                             " simplices, above the simplex budget of " +
                             std::to_string(options.simplex_budget));
    }
    const detail::FlagComplex complex(d, options.max_eps);
    const std::uint64_t triangles = size - complex.vertex_count() - complex.edges().size();
    return detail::reduce_coboundaries(complex, options.max_eps, options.max_dim == 2, triangles,
                                       stats);
}

BettiNumbers betti_at(const PersistenceDiagram& diagram, double eps) {
    if (!(eps >= 0.0 && eps <= diagram.max_eps)) {
        throw std::invalid_argument("eps must lie in [0, max_eps]");
    }
    BettiNumbers b;
    for (const auto& p : diagram.pairs) {
        const bool alive = p.birth <= eps && (eps < p.death || p.essential() || p.capped);
        if (!alive) {
            continue;
        }
        if (p.dim == 0) {
            ++b.b0;
        } else if (p.dim == 1) {
            ++b.b1;
        }
    }
    return b;
}

std::string diagram_to_json(const PersistenceDiagram& diagram) {
    PersistenceDiagram sorted = diagram;
    sorted.sort();
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& p : sorted.pairs) {
        nlohmann::ordered_json entry;
        entry["dim"] = p.dim;
        entry["birth"] = p.birth;
        if (p.essential()) {
            entry["death"] = "inf";
        } else {
            entry["death"] = p.death;
        }
        entry["capped"] = p.capped;
        pairs.push_back(std::move(entry));
    }
    nlohmann::ordered_json doc;
    doc["max_eps"] = diagram.max_eps;
    doc["pairs"] = std::move(pairs);
    return doc.dump(2) + "\n";
}

PersistenceDiagram diagram_from_json(std::string_view text) {
    PersistenceDiagram diagram;
    try {
        const auto doc = nlohmann::json::parse(text);
        diagram.max_eps = doc.at("max_eps").get<double>();
        for (const auto& entry : doc.at("pairs")) {
            PersistencePair p;
            p.dim = entry.at("dim").get<int>();
            p.birth = entry.at("birth").get<double>();
            const auto& death = entry.at("death");
            if (death.is_string()) {
                if (death.get<std::string>() != "inf") {
                    throw IoError("death must be a number or \"inf\"");
                }
                p.death = kInfinity;
            } else {
                p.death = death.get<double>();
            }
            p.capped = entry.value("capped", false);
            diagram.pairs.push_back(p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed diagram JSON: ") + e.what());
    }
    return diagram;
}

void save_diagram(const PersistenceDiagram& diagram, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const std::string text = diagram_to_json(diagram);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

PersistenceDiagram load_diagram(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return diagram_from_json(buffer.str());
}

} // namespace curvtopo
