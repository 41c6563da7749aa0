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

#include "curvtopo/error.hpp"
#include "curvtopo/mask_io.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace curvtopo {

template <typename A, typename B>
void require_same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("shape " + std::to_string(a.cols()) + "x" + std::to_string(a.rows()) +
                                " does not match " + std::to_string(b.cols()) + "x" +
                                std::to_string(b.rows()));
    }
}

/// 2|P & G| / (|P| + |G|) over non-zero elements; 1 when both are empty.
template <typename A, typename B>
double dice(const Eigen::ArrayBase<A>& pred, const Eigen::ArrayBase<B>& gt) {
    require_same_shape(pred, gt);
    const auto p = (pred != 0);
    const auto g = (gt != 0);
    const double total = static_cast<double>(p.count() + g.count());
    if (total == 0.0) {
        return 1.0;
    }
    return 2.0 * static_cast<double>((p && g).count()) / total;
}

/// Mean of the foreground and background IoU. A class absent from both
/// inputs scores 1.
template <typename A, typename B>
double miou(const Eigen::ArrayBase<A>& pred, const Eigen::ArrayBase<B>& gt) {
    require_same_shape(pred, gt);
    const auto p = (pred != 0);
    const auto g = (gt != 0);
    auto iou = [](Eigen::Index inter, Eigen::Index uni) {
        return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    };
    const double fg = iou((p && g).count(), (p || g).count());
    const double bg = iou((!p && !g).count(), (!p || !g).count());
    return 0.5 * (fg + bg);
}

inline double dice(const BinaryMask& pred, const BinaryMask& gt) {
    return dice(pred.array(), gt.array());
}

inline double miou(const BinaryMask& pred, const BinaryMask& gt) {
    return miou(pred.array(), gt.array());
}

/// Zhang-Suen thinning to a one-pixel-wide 8-connected skeleton. Pixels
/// flagged by a sub-iteration are removed in scan order and only while they
/// are still simple, so neither components nor holes are created or lost
/// (plain parallel Zhang-Suen erases 2x2 blocks entirely). Pixels outside the
/// image count as background. The result is a fixed point: skeletonizing it
/// again returns it unchanged.
BinaryMask skeletonize(const BinaryMask& mask);

/// Harmonic mean of topology precision |S(P) & G| / |S(P)| and sensitivity
/// |S(G) & P| / |S(G)|, S = skeletonize. Both skeletons empty gives 1; one
/// empty gives 0.
double cl_dice(const BinaryMask& pred, const BinaryMask& gt);

enum class Connectivity { k4 = 4, k8 = 8 };

struct ComponentLabels {
    Raster<std::int32_t> labels; ///< 0 for background, 1..count for components
    int count = 0;
};

/// Two-pass union-find labeling of the foreground.
ComponentLabels label_components(const BinaryMask& mask, Connectivity connectivity);

struct MaskBetti {
    long b0 = 0;
    long b1 = 0;

    friend bool operator==(const MaskBetti&, const MaskBetti&) = default;
};

/// b0: foreground components under `foreground` connectivity; b1: holes,
/// i.e. background components under the complementary connectivity of the
/// mask framed by one background pixel, minus the outer one.
MaskBetti mask_betti(const BinaryMask& mask, Connectivity foreground = Connectivity::k8);

struct BettiError {
    double e0 = 0.0;
    double e1 = 0.0;
};

/// |b_k(pred) - b_k(gt)| on the whole image, or the mean over `tile` x
/// `tile` tiles (edge tiles may be smaller) when a tile size is given.
BettiError betti_error(const BinaryMask& pred, const BinaryMask& gt,
                       std::optional<int> tile = std::nullopt,
                       Connectivity foreground = Connectivity::k8);

struct MetricsOptions {
    std::optional<int> tile; ///< per-image Betti error when unset
    Connectivity foreground = Connectivity::k8;
};

std::string betti_mode(const MetricsOptions& options);

struct MetricsRow {
    std::string file;
    double dice = 0.0;
    double cl_dice = 0.0;
    double miou = 0.0;
    double beta0_err = 0.0;
    double beta1_err = 0.0;
    std::string error; ///< empty when the row was computed

    bool ok() const { return error.empty(); }
};

MetricsRow evaluate_pair(const BinaryMask& pred, const BinaryMask& gt,
                         const MetricsOptions& options = {});

struct MetricsReport {
    std::vector<MetricsRow> rows; ///< sorted by file name
    MetricsRow mean;              ///< arithmetic mean over rows without error
    std::size_t evaluated = 0;
    std::size_t failed = 0;
    std::string betti_mode;
};

/// Sorts rows by file name and averages the successful ones with
/// compensated summation, so the result does not depend on input order.
MetricsReport aggregate(std::vector<MetricsRow> rows, const MetricsOptions& options = {});

/// Columns: file, dice, cl_dice, miou, beta0_err, beta1_err, status. The
/// last row is the mean; its status names the Betti error mode.
std::string report_to_csv(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);

} // namespace curvtopo
