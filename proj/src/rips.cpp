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

#include "curvtopo/rips.hpp"

#include "curvtopo/error.hpp"
#include "flag_complex.hpp"
#include "random.hpp"

#include <bit>
#include <numeric>
#include <stdexcept>
#include <string>

namespace curvtopo {

std::string_view to_string(SampleStrategy strategy) {
    return strategy == SampleStrategy::kUniform ? "uniform" : "maxmin";
}

SampleStrategy parse_strategy(std::string_view name) {
    if (name == "uniform") {
        return SampleStrategy::kUniform;
    }
    if (name == "maxmin") {
        return SampleStrategy::kMaxmin;
    }
    throw std::invalid_argument("unknown sampling strategy '" + std::string(name) + "'");
}

namespace {

std::int64_t squared_distance(const PointCloud& points, Eigen::Index a, Eigen::Index b) {
    const std::int64_t dx = points(a, 0) - points(b, 0);
    const std::int64_t dy = points(a, 1) - points(b, 1);
    return dx * dx + dy * dy;
}

std::vector<Eigen::Index> farthest_point_order(const PointCloud& points, Eigen::Index count,
                                               std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    detail::SplitRng rng(seed);
    std::vector<Eigen::Index> chosen;
    chosen.reserve(static_cast<std::size_t>(count));
    chosen.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));

    std::vector<std::int64_t> nearest(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        nearest[i] = squared_distance(points, i, chosen.front());
    }
    while (static_cast<Eigen::Index>(chosen.size()) < count) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
            if (nearest[i] > nearest[best]) {
                best = i;
            }
        }
        chosen.push_back(best);
        for (Eigen::Index i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points, i, best));
        }
    }
    return chosen;
}

} // namespace

std::vector<Eigen::Index> subsample_indices(const PointCloud& points, Eigen::Index n_max,
                                            SampleStrategy strategy, std::uint64_t seed) {
    if (n_max < 1) {
        throw std::invalid_argument("n_max must be at least 1");
    }
    const Eigen::Index n = points.rows();
    std::vector<Eigen::Index> kept;
    if (n <= n_max) {
        kept.resize(static_cast<std::size_t>(n));
        std::iota(kept.begin(), kept.end(), Eigen::Index{0});
        return kept;
    }
    if (strategy == SampleStrategy::kMaxmin) {
        kept = farthest_point_order(points, n_max, seed);
    } else {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        detail::SplitRng rng(seed);
        for (Eigen::Index i = 0; i < n_max; ++i) {
            const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
            std::swap(all[i], all[j]);
        }
        kept.assign(all.begin(), all.begin() + n_max);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

PointCloud subsample(const PointCloud& points, Eigen::Index n_max, SampleStrategy strategy,
                     std::uint64_t seed) {
    const auto kept = subsample_indices(points, n_max, strategy, seed);
    PointCloud out(static_cast<Eigen::Index>(kept.size()), 2);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = points.row(kept[i]);
    }
    return out;
}

namespace detail {

namespace {

std::uint32_t checked_vertex_count(const DistanceMatrix& d) {
    if (d.rows() >= (Eigen::Index{1} << FlagComplex::kKeyBits)) {
        throw std::invalid_argument("flag complexes are limited to 2^21 vertices");
    }
    return static_cast<std::uint32_t>(d.rows());
}

} // namespace

FlagComplex::FlagComplex(const DistanceMatrix& d, double max_eps)
    : n_(checked_vertex_count(d)), position_(static_cast<std::size_t>(n_) * n_, kNoEdge) {
    for (std::uint32_t v = 0; v < n_; ++v) {
        for (std::uint32_t u = 0; u < v; ++u) {
            if (d(u, v) <= max_eps) {
                edges_.push_back({u, v, d(u, v)});
            }
        }
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        if (a.value != b.value) {
            return a.value < b.value;
        }
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto pos = static_cast<std::uint32_t>(e);
        position_[static_cast<std::size_t>(edges_[e].u) * n_ + edges_[e].v] = pos;
        position_[static_cast<std::size_t>(edges_[e].v) * n_ + edges_[e].u] = pos;
    }
}

} // namespace detail

namespace {

void check_options(const DistanceMatrix& d, const FlagOptions& options) {
    if (d.rows() != d.cols()) {
        throw std::invalid_argument("distance matrix must be square");
    }
    if (!(options.max_eps > 0.0)) {
        throw std::invalid_argument("max_eps must be positive");
    }
    if (options.max_dim != 1 && options.max_dim != 2) {
        throw std::invalid_argument("max_dim must be 1 or 2");
    }
}

} // namespace

std::uint64_t count_flag_simplices(const DistanceMatrix& d, const FlagOptions& options) {
    check_options(d, options);
    const auto n = static_cast<std::size_t>(d.rows());
    const std::size_t words = (n + 63) / 64;
    // Upper-triangular adjacency: bit k of row i is set for k > i within range.
    std::vector<std::uint64_t> upper(n * words, 0);
    std::uint64_t edges = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            if (d(i, k) <= options.max_eps) {
                upper[i * words + k / 64] |= std::uint64_t{1} << (k % 64);
                ++edges;
            }
        }
    }
    std::uint64_t triangles = 0;
    if (options.max_dim == 2) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (d(i, j) > options.max_eps) {
                    continue;
                }
                for (std::size_t w = j / 64; w < words; ++w) {
                    std::uint64_t common = upper[i * words + w] & upper[j * words + w];
                    if (w == j / 64) {
                        common &= ~((std::uint64_t{2} << (j % 64)) - 1);
                    }
                    triangles += static_cast<std::uint64_t>(std::popcount(common));
                }
            }
        }
    }
    return n + edges + triangles;
}

Filtration build_flag_filtration(const DistanceMatrix& d, const FlagOptions& options) {
    const std::uint64_t size = count_flag_simplices(d, options);
    if (size > options.simplex_budget) {
        throw BudgetExceeded("flag complex has " + std::to_string(size) +
                             " simplices, above the simplex budget of " +
                             std::to_string(options.simplex_budget));
    }
    const detail::FlagComplex complex(d, options.max_eps);
    Filtration f;
    f.max_eps = options.max_eps;
    f.simplices.reserve(static_cast<std::size_t>(size));
    for (std::uint32_t v = 0; v < complex.vertex_count(); ++v) {
        f.simplices.push_back(Simplex{{v, 0, 0}, 1, 0.0});
    }
    const auto& edges = complex.edges();
    complex.for_each_level(options.max_dim == 2, [&](std::size_t first, std::size_t last,
                                                     std::span<const detail::Triangle> triangles) {
        for (std::size_t e = first; e < last; ++e) {
            f.simplices.push_back(Simplex{{edges[e].u, edges[e].v, 0}, 2, edges[e].value});
        }
        for (const auto& t : triangles) {
            f.simplices.push_back(Simplex{t.vertices, 3, t.value});
        }
    });
    return f;
}

} // namespace curvtopo
