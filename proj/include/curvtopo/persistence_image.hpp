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
#include "curvtopo/persistence.hpp"
#include "curvtopo/rips.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace curvtopo {

enum class Normalization { kNone, kMax1 };

std::string_view to_string(Normalization mode);
Normalization parse_normalization(std::string_view name);

/// Grid and kernel of a persistence image. Columns span the birth range,
/// rows the persistence range (row 0 holds the lowest persistence).
struct PiConfig {
    int grid_w = 64;
    int grid_h = 64;
    double birth_lo = 0.0;
    double birth_hi = 1.0;
    double pers_lo = 0.0;
    double pers_hi = 1.0;
    double sigma = 0.05;      ///< Gaussian standard deviation
    double weight_cap = 0.5;  ///< persistence at which the weight reaches 1
    Normalization normalize = Normalization::kMax1;

    /// Throws std::invalid_argument on empty ranges, non-positive sigma,
    /// weight cap or grid size.
    void validate() const;
};

struct PersistenceImage {
    Raster<double> values; ///< grid_h x grid_w, non-negative
    PiConfig config;
};

/// A diagram point in (birth, death - birth) coordinates.
struct BirthPersistence {
    double birth = 0.0;
    double persistence = 0.0;
};

/// Maps every pair to (birth, death - birth). Throws std::invalid_argument on
/// an infinite death; apply cap_diagram() first.
std::vector<BirthPersistence> transform_diagram(std::span<const PersistencePair> pairs);
std::vector<BirthPersistence> transform_diagram(const PersistenceDiagram& diagram);

/// Replaces infinite deaths with the diagram's max_eps and marks them capped.
PersistenceDiagram cap_diagram(const PersistenceDiagram& diagram);

/// Keeps the pairs whose dimension is selected.
PersistenceDiagram filter_dims(const PersistenceDiagram& diagram, bool keep_h0, bool keep_h1);

/// Linear ramp: 0 on the diagonal, p / cap below the cap, 1 from the cap on.
inline double weight(double persistence, double cap) {
    if (persistence <= 0.0) {
        return 0.0;
    }
    return persistence >= cap ? 1.0 : persistence / cap;
}

/// Mass of the 1-D Gaussian centred at `center` with deviation
/// `sigma` over [lo, hi]. Mirrored intervals give bitwise-equal results.
double gaussian_interval_mass(double lo, double hi, double center, double sigma);

/// Exact per-cell integral of the weighted sum of isotropic Gaussians.
/// Never normalizes; see normalize().
PersistenceImage rasterize(std::span<const BirthPersistence> points, const PiConfig& config);

/// kMax1 divides by the maximum cell (an all-zero image is returned as is).
PersistenceImage normalize(PersistenceImage image, Normalization mode);

RasterF32 to_raster_f32(const PersistenceImage& image);

/// Subsampling and complex options for the mask pipeline.
struct RipsOptions {
    Eigen::Index n_max = 400;
    SampleStrategy strategy = SampleStrategy::kMaxmin;
    std::uint64_t seed = 0;
    std::optional<double> max_eps; ///< default: diameter of the subsampled cloud
    int max_dim = 2;
    std::uint64_t simplex_budget = kDefaultSimplexBudget;
};

/// Persistence image options; unset values are derived from max_eps.
struct PiOptions {
    int grid_w = 64;
    int grid_h = 64;
    std::optional<double> sigma;      ///< default max_eps / 20
    std::optional<double> weight_cap; ///< default max_eps / 2
    std::optional<double> birth_hi;   ///< default max_eps (range starts at 0)
    std::optional<double> pers_hi;    ///< default max_eps (range starts at 0)
    Normalization normalize = Normalization::kMax1;
};

PiConfig resolve_pi_config(const PiOptions& options, double max_eps);

struct DimSelection {
    bool h0 = false;
    bool h1 = true;
};

DimSelection parse_dims(std::string_view text); ///< "0", "1" or "01"
std::string_view to_string(DimSelection dims);

struct MaskDiagram {
    PersistenceDiagram diagram; ///< all computed dimensions, essential pairs uncapped
    double max_eps = 0.0;
    Eigen::Index points = 0;  ///< foreground pixels
    Eigen::Index sampled = 0; ///< points kept by subsampling
};

/// Mask -> point cloud -> subsample -> Rips persistence. max_eps defaults to
/// the diameter of the sample, or 1 when that is zero.
MaskDiagram mask_to_diagram(const BinaryMask& mask, const RipsOptions& rips);

struct PiPipelineResult {
    PersistenceImage image;
    PersistenceDiagram diagram; ///< full diagram before dimension filtering
    double max_eps = 0.0;
    Eigen::Index points = 0;     ///< foreground pixels
    Eigen::Index sampled = 0;    ///< points kept by subsampling
};

/// Mask -> point cloud -> subsample -> Rips persistence -> selected dims ->
/// cap -> (birth, persistence) -> rasterize -> normalize. An empty mask gives
/// an all-zero image.
PiPipelineResult mask_to_pi(const BinaryMask& mask, const RipsOptions& rips, const PiOptions& pi,
                            DimSelection dims = {});

} // namespace curvtopo
