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

#include "curvtopo/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace curvtopo {

void validate_probabilities(const ProbMap& p) {
    if (!((p >= 0.0) && (p <= 1.0)).all()) {
        throw std::invalid_argument("probabilities must be finite and within [0, 1]");
    }
}

namespace {

Raster<double> as_double(const BinaryMask& g) { return g.array().cast<double>(); }

} // namespace

double dice_loss(const ProbMap& p, const BinaryMask& g, double smooth) {
    require_same_shape(p, g.array());
    validate_probabilities(p);
    const Raster<double> gd = as_double(g);
    const double inter = (p * gd).sum();
    return 1.0 - (2.0 * inter + smooth) / (p.sum() + gd.sum() + smooth);
}

double ce_loss(const ProbMap& p, const BinaryMask& g, double eps_clip) {
    require_same_shape(p, g.array());
    validate_probabilities(p);
    if (!(eps_clip > 0.0 && eps_clip < 0.5)) {
        throw std::invalid_argument("eps_clip must be in (0, 0.5)");
    }
    if (p.size() == 0) {
        return 0.0;
    }
    const Raster<double> q = p.max(eps_clip).min(1.0 - eps_clip);
    const Raster<double> gd = as_double(g);
    return -(gd * q.log() + (1.0 - gd) * (1.0 - q).log()).mean();
}

double combined_loss(const ProbMap& p, const BinaryMask& g, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("alpha must be in [0, 1]");
    }
    return alpha * dice_loss(p, g) + (1.0 - alpha) * ce_loss(p, g);
}

namespace {

// Source coordinate of output index i when n_out samples span n_in samples
// corner to corner.
struct Tap {
    Eigen::Index lo;
    Eigen::Index hi;
    float t;
};

std::vector<Tap> taps(Eigen::Index n_in, Eigen::Index n_out) {
    std::vector<Tap> out(static_cast<std::size_t>(n_out));
    for (Eigen::Index i = 0; i < n_out; ++i) {
        if (n_out == 1 || n_in == 1) {
            out[i] = {0, 0, 0.0f};
            continue;
        }
        const double s = static_cast<double>(i) * static_cast<double>(n_in - 1) /
                         static_cast<double>(n_out - 1);
        const auto lo = std::min(static_cast<Eigen::Index>(std::floor(s)), n_in - 1);
        const auto hi = std::min(lo + 1, n_in - 1);
        out[i] = {lo, hi, static_cast<float>(s - static_cast<double>(lo))};
    }
    return out;
}

} // namespace

RasterF32 resize_pi(const RasterF32& pi, int height, int width) {
    if (height < 1 || width < 1) {
        throw std::invalid_argument("resize target must be at least 1x1");
    }
    if (pi.size() == 0) {
        throw std::invalid_argument("cannot resize an empty raster");
    }
    if (pi.rows() == height && pi.cols() == width) {
        return pi;
    }
    const auto ys = taps(pi.rows(), height);
    const auto xs = taps(pi.cols(), width);
    RasterF32 out(height, width);
    for (int y = 0; y < height; ++y) {
        const Tap& ty = ys[y];
        for (int x = 0; x < width; ++x) {
            const Tap& tx = xs[x];
            const float top = pi(ty.lo, tx.lo) + tx.t * (pi(ty.lo, tx.hi) - pi(ty.lo, tx.lo));
            const float bottom = pi(ty.hi, tx.lo) + tx.t * (pi(ty.hi, tx.hi) - pi(ty.hi, tx.lo));
            out(y, x) = top + ty.t * (bottom - top);
        }
    }
    return out;
}

Tensor4 fuse_input(const Tensor4& x, const RasterF32& pi) {
    const auto b = x.dimension(0);
    const auto h = x.dimension(1);
    const auto w = x.dimension(2);
    const auto c = x.dimension(3);
    const RasterF32 resized = resize_pi(pi, static_cast<int>(h), static_cast<int>(w));
    Tensor4 out(b, h, w, c + 3);
    for (Eigen::Index n = 0; n < b; ++n) {
        for (Eigen::Index y = 0; y < h; ++y) {
            for (Eigen::Index xi = 0; xi < w; ++xi) {
                for (Eigen::Index k = 0; k < c; ++k) {
                    out(n, y, xi, k) = x(n, y, xi, k);
                }
                for (Eigen::Index k = 0; k < 3; ++k) {
                    out(n, y, xi, c + k) = resized(y, xi);
                }
            }
        }
    }
    return out;
}

} // namespace curvtopo
