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

#include "curvtopo/persistence_image.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace curvtopo {

std::string_view to_string(Normalization mode) {
    return mode == Normalization::kNone ? "none" : "max1";
}

Normalization parse_normalization(std::string_view name) {
    if (name == "none") {
        return Normalization::kNone;
    }
    if (name == "max1") {
        return Normalization::kMax1;
    }
    throw std::invalid_argument("unknown normalization '" + std::string(name) + "'");
}

void PiConfig::validate() const {
    if (grid_w < 1 || grid_h < 1) {
        throw std::invalid_argument("persistence image grid must be at least 1x1");
    }
    if (!(birth_hi > birth_lo) || !std::isfinite(birth_lo) || !std::isfinite(birth_hi)) {
        throw std::invalid_argument("birth range must be finite with hi > lo");
    }
    if (!(pers_hi > pers_lo) || !(pers_lo >= 0.0) || !std::isfinite(pers_hi)) {
        throw std::invalid_argument("persistence range must be finite with hi > lo >= 0");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("sigma must be positive");
    }
    if (!(weight_cap > 0.0) || !std::isfinite(weight_cap)) {
        throw std::invalid_argument("weight cap must be positive");
    }
}

std::vector<BirthPersistence> transform_diagram(std::span<const PersistencePair> pairs) {
    std::vector<BirthPersistence> points;
    points.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.essential()) {
            throw std::invalid_argument("infinite death reached the birth-persistence transform");
        }
        points.push_back({p.birth, p.death - p.birth});
    }
    return points;
}

std::vector<BirthPersistence> transform_diagram(const PersistenceDiagram& diagram) {
    return transform_diagram(std::span<const PersistencePair>(diagram.pairs));
}

PersistenceDiagram cap_diagram(const PersistenceDiagram& diagram) {
    PersistenceDiagram out = diagram;
    for (auto& p : out.pairs) {
        if (p.essential()) {
            p.death = diagram.max_eps;
            p.capped = true;
        }
    }
    return out;
}

PersistenceDiagram filter_dims(const PersistenceDiagram& diagram, bool keep_h0, bool keep_h1) {
    PersistenceDiagram out;
    out.max_eps = diagram.max_eps;
    for (const auto& p : diagram.pairs) {
        if ((p.dim == 0 && keep_h0) || (p.dim == 1 && keep_h1)) {
            out.pairs.push_back(p);
        }
    }
    return out;
}

double gaussian_interval_mass(double lo, double hi, double center, double sigma) {
    const double scale = 1.0 / (sigma * std::numbers::sqrt2);
    const double a = (lo - center) * scale;
    const double b = (hi - center) * scale;
    // Work in the tail closest to the interval so small masses keep their
    // relative precision.
    if (a >= 0.0) {
        return 0.5 * (std::erfc(a) - std::erfc(b));
    }
    if (b <= 0.0) {
        return 0.5 * (std::erfc(-b) - std::erfc(-a));
    }
    return 1.0 - 0.5 * (std::erfc(-a) + std::erfc(b));
}

namespace {

Eigen::VectorXd axis_masses(double lo, double hi, int cells, double center, double sigma) {
    Eigen::VectorXd masses(cells);
    const double span = hi - lo;
    double left = lo;
    for (int i = 0; i < cells; ++i) {
        const double right = i + 1 == cells ? hi : lo + span * (i + 1) / cells;
        masses(i) = gaussian_interval_mass(left, right, center, sigma);
        left = right;
    }
    return masses;
}

} // namespace

PersistenceImage rasterize(std::span<const BirthPersistence> points, const PiConfig& config) {
    config.validate();
    PersistenceImage image;
    image.config = config;
    image.values = Raster<double>::Zero(config.grid_h, config.grid_w);
    for (const auto& u : points) {
        const double w = weight(u.persistence, config.weight_cap);
        if (w == 0.0) {
            continue;
        }
        const Eigen::VectorXd cols =
            axis_masses(config.birth_lo, config.birth_hi, config.grid_w, u.birth, config.sigma);
        const Eigen::VectorXd rows =
            axis_masses(config.pers_lo, config.pers_hi, config.grid_h, u.persistence, config.sigma);
        image.values.matrix().noalias() += (w * rows) * cols.transpose();
    }
    return image;
}

PersistenceImage normalize(PersistenceImage image, Normalization mode) {
    image.config.normalize = mode;
    if (mode == Normalization::kMax1 && image.values.size() > 0) {
        const double peak = image.values.maxCoeff();
        if (peak > 0.0) {
            image.values /= peak;
        }
    }
    return image;
}

RasterF32 to_raster_f32(const PersistenceImage& image) {
    return image.values.cast<float>();
}

PiConfig resolve_pi_config(const PiOptions& options, double max_eps) {
    PiConfig config;
    config.grid_w = options.grid_w;
    config.grid_h = options.grid_h;
    config.birth_lo = 0.0;
    config.birth_hi = options.birth_hi.value_or(max_eps);
    config.pers_lo = 0.0;
    config.pers_hi = options.pers_hi.value_or(max_eps);
    config.sigma = options.sigma.value_or(max_eps / 20.0);
    config.weight_cap = options.weight_cap.value_or(max_eps / 2.0);
    config.normalize = options.normalize;
    config.validate();
    return config;
}

DimSelection parse_dims(std::string_view text) {
    if (text == "0") {
        return {true, false};
    }
    if (text == "1") {
        return {false, true};
    }
    if (text == "01" || text == "10") {
        return {true, true};
    }
    throw std::invalid_argument("dims must be 0, 1 or 01, got '" + std::string(text) + "'");
}

std::string_view to_string(DimSelection dims) {
    if (dims.h0 && dims.h1) {
        return "01";
    }
    return dims.h0 ? "0" : "1";
}

MaskDiagram mask_to_diagram(const BinaryMask& mask, const RipsOptions& rips) {
    MaskDiagram result;
    const PointCloud cloud = mask_to_point_cloud(mask);
    result.points = cloud.rows();
    const PointCloud sampled = subsample(cloud, rips.n_max, rips.strategy, rips.seed);
    result.sampled = sampled.rows();
    const DistanceMatrix d = pairwise_distances(sampled);

    // Fewer than two distinct points have no scale of their own.
    const double diam = diameter(d);
    result.max_eps = rips.max_eps.value_or(diam > 0.0 ? diam : 1.0);
    result.diagram.max_eps = result.max_eps;
    if (sampled.rows() > 0) {
        FlagOptions flag;
        flag.max_eps = result.max_eps;
        flag.max_dim = rips.max_dim;
        flag.simplex_budget = rips.simplex_budget;
        result.diagram = flag_persistence(d, flag);
    }
    return result;
}

PiPipelineResult mask_to_pi(const BinaryMask& mask, const RipsOptions& rips, const PiOptions& pi,
                            DimSelection dims) {
    if (!dims.h0 && !dims.h1) {
        throw std::invalid_argument("select at least one homology dimension");
    }
    MaskDiagram md = mask_to_diagram(mask, rips);
    PiPipelineResult result;
    result.max_eps = md.max_eps;
    result.points = md.points;
    result.sampled = md.sampled;
    result.diagram = std::move(md.diagram);
    const PiConfig config = resolve_pi_config(pi, result.max_eps);
    const PersistenceDiagram selected = cap_diagram(filter_dims(result.diagram, dims.h0, dims.h1));
    const auto points = transform_diagram(selected);
    result.image = normalize(rasterize(points, config), config.normalize);
    return result;
}

} // namespace curvtopo
