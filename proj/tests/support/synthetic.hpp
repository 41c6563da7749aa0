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

// Synthetic masks and point clouds shared by the unit and acceptance suites.

#pragma once

#include "curvtopo/mask_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace curvtopo::testing {

inline void stamp_disk(BinaryMask& mask, double cx, double cy, double radius) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(cx + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(cy + radius)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius) {
                mask.set(x, y, true);
            }
        }
    }
}

inline void draw_segment(BinaryMask& mask, double ax, double ay, double bx, double by, double radius) {
    const double length = std::hypot(bx - ax, by - ay);
    const int steps = std::max(1, static_cast<int>(std::ceil(length * 2)));
    for (int s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        stamp_disk(mask, ax + t * (bx - ax), ay + t * (by - ay), radius);
    }
}

/// Annulus centred at (cx, cy) with radii [inner, outer].
inline void draw_ring(BinaryMask& mask, double cx, double cy, double inner, double outer) {
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const double r = std::hypot(x - cx, y - cy);
            if (r >= inner && r <= outer) {
                mask.set(x, y, true);
            }
        }
    }
}

/// Vessel-like mask: a few meandering branches of varying width plus one or
/// two closed loops.
inline BinaryMask synthetic_vessels(int size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BinaryMask mask(size, size);
    const int branches = 3 + static_cast<int>(rng() % 3);
    for (int b = 0; b < branches; ++b) {
        double x = unit(rng) * size;
        double y = unit(rng) * size;
        double heading = unit(rng) * 2 * std::numbers::pi;
        const double radius = 0.6 + 1.6 * unit(rng);
        const int steps = 20 + static_cast<int>(rng() % 25);
        for (int s = 0; s < steps; ++s) {
            heading += (unit(rng) - 0.5) * 0.8;
            const double nx = std::clamp(x + 6.0 * std::cos(heading), 0.0, size - 1.0);
            const double ny = std::clamp(y + 6.0 * std::sin(heading), 0.0, size - 1.0);
            draw_segment(mask, x, y, nx, ny, radius);
            x = nx;
            y = ny;
        }
    }
    const int loops = 1 + static_cast<int>(rng() % 2);
    for (int l = 0; l < loops; ++l) {
        const double r = size * (0.08 + 0.12 * unit(rng));
        const double cx = r + 2 + unit(rng) * (size - 2 * r - 4);
        const double cy = r + 2 + unit(rng) * (size - 2 * r - 4);
        draw_ring(mask, cx, cy, r, r + 1.5 + 1.5 * unit(rng));
    }
    return mask;
}

/// `n` distinct lattice points drawn uniformly from [0, extent)^2.
inline PointCloud random_lattice_cloud(int n, int extent, std::mt19937_64& rng) {
    BinaryMask occupied(extent, extent);
    PointCloud points(n, 2);
    int k = 0;
    while (k < n) {
        const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(extent));
        const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(extent));
        if (occupied.at(x, y)) {
            continue;
        }
        occupied.set(x, y, true);
        points(k, 0) = x;
        points(k, 1) = y;
        ++k;
    }
    return points;
}

/// Connected blob: a random walk of overlapping disks.
inline BinaryMask random_blob(int size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BinaryMask mask(size, size);
    double x = size / 2.0;
    double y = size / 2.0;
    const int steps = 3 + static_cast<int>(rng() % 10);
    for (int s = 0; s < steps; ++s) {
        const double nx = std::clamp(x + (unit(rng) - 0.5) * size * 0.4, 2.0, size - 3.0);
        const double ny = std::clamp(y + (unit(rng) - 0.5) * size * 0.4, 2.0, size - 3.0);
        draw_segment(mask, x, y, nx, ny, 0.8 + 2.5 * unit(rng));
        x = nx;
        y = ny;
    }
    return mask;
}

/// Independent pixels, each foreground with probability `density`.
inline BinaryMask random_mask(int width, int height, double density, std::mt19937_64& rng) {
    std::bernoulli_distribution on(density);
    BinaryMask mask(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            mask.set(x, y, on(rng));
        }
    }
    return mask;
}

} // namespace curvtopo::testing
