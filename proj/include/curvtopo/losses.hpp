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
#include "curvtopo/metrics.hpp"

#include <unsupported/Eigen/CXX11/Tensor>

namespace curvtopo {

/// Per-pixel foreground probability, every value in [0, 1].
using ProbMap = Raster<double>;

/// Batch x height x width x channels, row-major (channels fastest).
using Tensor4 = Eigen::Tensor<float, 4, Eigen::RowMajor>;

/// Throws std::invalid_argument unless every value is finite and in [0, 1].
void validate_probabilities(const ProbMap& p);

/// 1 - (2 sum(p g) + smooth) / (sum(p) + sum(g) + smooth).
double dice_loss(const ProbMap& p, const BinaryMask& g, double smooth = 1.0);

/// Mean binary cross-entropy with p clipped to [eps_clip, 1 - eps_clip].
double ce_loss(const ProbMap& p, const BinaryMask& g, double eps_clip = 1e-7);

/// alpha * dice_loss + (1 - alpha) * ce_loss, alpha in [0, 1].
double combined_loss(const ProbMap& p, const BinaryMask& g, double alpha = 0.5);

template <typename A, typename B>
double mse_loss(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
    require_same_shape(a, b);
    if (a.size() == 0) {
        return 0.0;
    }
    return (a.template cast<double>() - b.template cast<double>()).square().mean();
}

/// Bilinear resize with corner-aligned sampling: output corners land on
/// input corners. Same size returns a copy of the input.
RasterF32 resize_pi(const RasterF32& pi, int height, int width);

/// Appends the PI, resized to h x w, as three identical channels after the
/// channels of x, repeated for every batch entry.
Tensor4 fuse_input(const Tensor4& x, const RasterF32& pi);

} // namespace curvtopo
