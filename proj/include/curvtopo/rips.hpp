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

#include "curvtopo/mask_io.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace curvtopo {

template <typename Scalar>
using DistanceMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using DistanceMatrix = DistanceMatrixT<double>;

/// Euclidean distance matrix of the rows of `points` (one point per row).
/// Integer lattice coordinates are represented exactly, so every entry is the
/// correctly rounded square root of an integer.
template <typename Scalar = double, typename Derived>
DistanceMatrixT<Scalar> pairwise_distances(const Eigen::MatrixBase<Derived>& points) {
    const Eigen::Index n = points.rows();
    const auto coords = points.template cast<Scalar>().eval();
    DistanceMatrixT<Scalar> d(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        d(j, j) = Scalar(0);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const Scalar v = std::sqrt((coords.row(i) - coords.row(j)).squaredNorm());
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

/// Largest entry; zero for fewer than two points.
template <typename Derived>
typename Derived::Scalar diameter(const Eigen::MatrixBase<Derived>& d) {
    return d.size() == 0 ? typename Derived::Scalar(0) : d.maxCoeff();
}

enum class SampleStrategy { kUniform, kMaxmin };

std::string_view to_string(SampleStrategy strategy);
SampleStrategy parse_strategy(std::string_view name);

/// Indices (ascending) of the points kept by `subsample`.
std::vector<Eigen::Index> subsample_indices(const PointCloud& points, Eigen::Index n_max,
                                            SampleStrategy strategy, std::uint64_t seed);

/// Keeps min(|points|, n_max) points, in their original (row-major) order.
/// kMaxmin is farthest-point sampling started from a seed-chosen point; ties go
/// to the lowest index. kUniform draws a seeded uniform subset.
PointCloud subsample(const PointCloud& points, Eigen::Index n_max, SampleStrategy strategy,
                     std::uint64_t seed);

/// A vertex, edge or triangle of a flag filtration.
struct Simplex {
    std::array<std::uint32_t, 3> vertices{}; ///< first `size` entries, strictly increasing
    std::uint8_t size = 1;                   ///< 1, 2 or 3 vertices
    double value = 0.0;                      ///< scale at which the simplex enters

    int dim() const { return size - 1; }

    friend bool operator==(const Simplex&, const Simplex&) = default;
};

/// Simplices in reduction order: sorted by (value, dimension, vertices).
struct Filtration {
    std::vector<Simplex> simplices;
    double max_eps = 0.0;
};

inline constexpr std::uint64_t kDefaultSimplexBudget = std::uint64_t{1} << 24;

struct FlagOptions {
    double max_eps = 0.0;
    int max_dim = 2; ///< 1 or 2
    std::uint64_t simplex_budget = kDefaultSimplexBudget;
};

/// Number of simplices build_flag_filtration would produce.
std::uint64_t count_flag_simplices(const DistanceMatrix& d, const FlagOptions& options);

/// Vietoris-Rips filtration truncated at `max_eps` and dimension `max_dim`.
/// Throws BudgetExceeded when the complex would hold more than
/// `options.simplex_budget` simplices.
Filtration build_flag_filtration(const DistanceMatrix& d, const FlagOptions& options);

} // namespace curvtopo
