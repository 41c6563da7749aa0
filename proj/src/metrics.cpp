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

#include "curvtopo/metrics.hpp"

#include "union_find.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace curvtopo {

namespace {

// Working copy with a one-pixel background frame so neighbour reads need no
// bounds checks.
class FramedMask {
public:
    explicit FramedMask(const BinaryMask& mask)
        : w_(mask.width() + 2), h_(mask.height() + 2), data_(static_cast<std::size_t>(w_) * h_, 0) {
        for (int y = 0; y < mask.height(); ++y) {
            for (int x = 0; x < mask.width(); ++x) {
                data_[index(x + 1, y + 1)] = mask.at(x, y) ? 1 : 0;
            }
        }
    }

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
    std::uint8_t& operator[](std::size_t i) { return data_[i]; }
    std::uint8_t operator[](std::size_t i) const { return data_[i]; }
    int width() const { return w_; }
    int height() const { return h_; }

    BinaryMask unframed() const {
        BinaryMask out(w_ - 2, h_ - 2);
        for (int y = 1; y + 1 < h_; ++y) {
            for (int x = 1; x + 1 < w_; ++x) {
                out.set(x - 1, y - 1, data_[index(x, y)] != 0);
            }
        }
        return out;
    }

    // Neighbours P2..P9 of the pixel at i: N, NE, E, SE, S, SW, W, NW.
    std::array<int, 8> ring(std::size_t i) const {
        const std::size_t w = static_cast<std::size_t>(w_);
        return {data_[i - w], data_[i - w + 1], data_[i + 1],     data_[i + w + 1],
                data_[i + w], data_[i + w - 1], data_[i - 1], data_[i - w - 1]};
    }

private:
    int w_;
    int h_;
    std::vector<std::uint8_t> data_;
};

// Zhang-Suen deletion test for one sub-iteration.
bool zhang_suen_candidate(const std::array<int, 8>& p, int pass) {
    const int p2 = p[0], p4 = p[2], p6 = p[4], p8 = p[6];
    int neighbours = 0;
    int transitions = 0;
    for (int k = 0; k < 8; ++k) {
        neighbours += p[k];
        transitions += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
    }
    if (neighbours < 2 || neighbours > 6 || transitions != 1) {
        return false;
    }
    if (pass == 0) {
        return p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0;
    }
    return p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0;
}

// Yokoi connectivity number for 8-connected foreground. Removing the pixel
// preserves topology exactly when this is 1.
int connectivity_number(const std::array<int, 8>& p) {
    // Counter-clockwise from east: E, NE, N, NW, W, SW, S, SE.
    const std::array<int, 8> q = {1 - p[2], 1 - p[1], 1 - p[0], 1 - p[7],
                                  1 - p[6], 1 - p[5], 1 - p[4], 1 - p[3]};
    int n = 0;
    for (int k = 0; k < 8; k += 2) {
        n += q[k] - q[k] * q[k + 1] * q[(k + 2) % 8];
    }
    return n;
}

} // namespace

BinaryMask skeletonize(const BinaryMask& mask) {
    FramedMask img(mask);
    std::vector<std::size_t> candidates;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            candidates.clear();
            for (int y = 1; y + 1 < img.height(); ++y) {
                for (int x = 1; x + 1 < img.width(); ++x) {
                    const std::size_t i = img.index(x, y);
                    if (img[i] != 0 && zhang_suen_candidate(img.ring(i), pass)) {
                        candidates.push_back(i);
                    }
                }
            }
            for (const std::size_t i : candidates) {
                if (connectivity_number(img.ring(i)) == 1) {
                    img[i] = 0;
                    changed = true;
                }
            }
        }
    }
    return img.unframed();
}

double cl_dice(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_shape(pred.array(), gt.array());
    const BinaryMask sp = skeletonize(pred);
    const BinaryMask sg = skeletonize(gt);
    const auto sp_count = sp.count();
    const auto sg_count = sg.count();
    if (sp_count == 0 && sg_count == 0) {
        return 1.0;
    }
    if (sp_count == 0 || sg_count == 0) {
        return 0.0;
    }
    const double precision =
        static_cast<double>((sp.array() != 0 && gt.array() != 0).count()) / static_cast<double>(sp_count);
    const double sensitivity =
        static_cast<double>((sg.array() != 0 && pred.array() != 0).count()) / static_cast<double>(sg_count);
    if (precision + sensitivity == 0.0) {
        return 0.0;
    }
    return 2.0 * precision * sensitivity / (precision + sensitivity);
}

ComponentLabels label_components(const BinaryMask& mask, Connectivity connectivity) {
    const int w = mask.width();
    const int h = mask.height();
    ComponentLabels out;
    out.labels = Raster<std::int32_t>::Zero(h, w);
    auto& labels = out.labels;
    detail::UnionFind classes(1); // label 0 is background

    // Raster-scan predecessors: W, NW, N, NE (the last two only for 8).
    static constexpr std::array<std::array<int, 2>, 4> kBehind = {{{-1, 0}, {0, -1}, {-1, -1}, {1, -1}}};
    const int behind = connectivity == Connectivity::k8 ? 4 : 2;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            std::int32_t label = 0;
            for (int k = 0; k < behind; ++k) {
                const int nx = x + kBehind[k][0];
                const int ny = y + kBehind[k][1];
                if (nx < 0 || nx >= w || ny < 0) {
                    continue;
                }
                const std::int32_t other = labels(ny, nx);
                if (other == 0) {
                    continue;
                }
                if (label == 0) {
                    label = other;
                } else {
                    classes.unite(static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(other));
                }
            }
            if (label == 0) {
                label = static_cast<std::int32_t>(classes.add());
            }
            labels(y, x) = label;
        }
    }
    std::vector<std::int32_t> compact(classes.size(), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        std::int32_t& l = labels.data()[i];
        if (l == 0) {
            continue;
        }
        const auto root = classes.find(static_cast<std::uint32_t>(l));
        if (compact[root] == 0) {
            compact[root] = ++out.count;
        }
        l = compact[root];
    }
    return out;
}

MaskBetti mask_betti(const BinaryMask& mask, Connectivity foreground) {
    MaskBetti b;
    b.b0 = label_components(mask, foreground).count;
    BinaryMask background(mask.width() + 2, mask.height() + 2);
    for (int y = 0; y < background.height(); ++y) {
        for (int x = 0; x < background.width(); ++x) {
            const bool inside = x > 0 && y > 0 && x <= mask.width() && y <= mask.height();
            background.set(x, y, !(inside && mask.at(x - 1, y - 1)));
        }
    }
    const Connectivity complement =
        foreground == Connectivity::k8 ? Connectivity::k4 : Connectivity::k8;
    b.b1 = label_components(background, complement).count - 1;
    return b;
}

namespace {

BinaryMask crop(const BinaryMask& mask, int x0, int y0, int w, int h) {
    return BinaryMask(Gray8(mask.array().block(y0, x0, h, w)));
}

} // namespace

BettiError betti_error(const BinaryMask& pred, const BinaryMask& gt, std::optional<int> tile,
                       Connectivity foreground) {
    require_same_shape(pred.array(), gt.array());
    auto diff = [foreground](const BinaryMask& a, const BinaryMask& b) {
        const MaskBetti ba = mask_betti(a, foreground);
        const MaskBetti bb = mask_betti(b, foreground);
        return BettiError{static_cast<double>(std::labs(ba.b0 - bb.b0)),
                          static_cast<double>(std::labs(ba.b1 - bb.b1))};
    };
    if (!tile) {
        return diff(pred, gt);
    }
    if (*tile < 1) {
        throw std::invalid_argument("tile size must be positive");
    }
    BettiError sum;
    int tiles = 0;
    for (int y = 0; y < pred.height(); y += *tile) {
        for (int x = 0; x < pred.width(); x += *tile) {
            const int w = std::min(*tile, pred.width() - x);
            const int h = std::min(*tile, pred.height() - y);
            const BettiError e = diff(crop(pred, x, y, w, h), crop(gt, x, y, w, h));
            sum.e0 += e.e0;
            sum.e1 += e.e1;
            ++tiles;
        }
    }
    if (tiles > 0) {
        sum.e0 /= tiles;
        sum.e1 /= tiles;
    }
    return sum;
}

std::string betti_mode(const MetricsOptions& options) {
    return options.tile ? "tile" + std::to_string(*options.tile) : "per-image";
}

MetricsRow evaluate_pair(const BinaryMask& pred, const BinaryMask& gt, const MetricsOptions& options) {
    MetricsRow row;
    row.dice = dice(pred, gt);
    row.miou = miou(pred, gt);
    row.cl_dice = cl_dice(pred, gt);
    const BettiError e = betti_error(pred, gt, options.tile, options.foreground);
    row.beta0_err = e.e0;
    row.beta1_err = e.e1;
    return row;
}

namespace {

// Neumaier's compensated sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            carry_ += (sum_ - t) + v;
        } else {
            carry_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

} // namespace

MetricsReport aggregate(std::vector<MetricsRow> rows, const MetricsOptions& options) {
    std::sort(rows.begin(), rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) { return a.file < b.file; });
    MetricsReport report;
    report.betti_mode = betti_mode(options);
    std::array<CompensatedSum, 5> sums;
    for (const auto& row : rows) {
        if (!row.ok()) {
            ++report.failed;
            continue;
        }
        ++report.evaluated;
        sums[0].add(row.dice);
        sums[1].add(row.cl_dice);
        sums[2].add(row.miou);
        sums[3].add(row.beta0_err);
        sums[4].add(row.beta1_err);
    }
    report.mean.file = "mean";
    if (report.evaluated > 0) {
        const double n = static_cast<double>(report.evaluated);
        report.mean.dice = sums[0].value() / n;
        report.mean.cl_dice = sums[1].value() / n;
        report.mean.miou = sums[2].value() / n;
        report.mean.beta0_err = sums[3].value() / n;
        report.mean.beta1_err = sums[4].value() / n;
    } else {
        report.mean.error = "no pair evaluated";
    }
    report.rows = std::move(rows);
    return report;
}

namespace {

std::string number(double v) {
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), v);
    return std::string(buffer.data(), result.ptr);
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string quoted = "\"";
    for (const char c : text) {
        quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return quoted + "\"";
}

void append_csv_row(std::string& out, const MetricsRow& row, const std::string& status) {
    out += csv_field(row.file);
    for (const double v : {row.dice, row.cl_dice, row.miou, row.beta0_err, row.beta1_err}) {
        out += ',';
        if (row.ok()) {
            out += number(v);
        }
    }
    out += ',' + csv_field(status) + '\n';
}

nlohmann::ordered_json row_json(const MetricsRow& row) {
    nlohmann::ordered_json j;
    j["file"] = row.file;
    if (row.ok()) {
        j["dice"] = row.dice;
        j["cl_dice"] = row.cl_dice;
        j["miou"] = row.miou;
        j["beta0_err"] = row.beta0_err;
        j["beta1_err"] = row.beta1_err;
    } else {
        j["error"] = row.error;
    }
    return j;
}

} // namespace

std::string report_to_csv(const MetricsReport& report) {
    std::string out = "file,dice,cl_dice,miou,beta0_err,beta1_err,status\n";
    for (const auto& row : report.rows) {
        append_csv_row(out, row, row.ok() ? "ok" : "error: " + row.error);
    }
    append_csv_row(out, report.mean, "betti=" + report.betti_mode);
    return out;
}

std::string report_to_json(const MetricsReport& report) {
    nlohmann::ordered_json doc;
    doc["betti_mode"] = report.betti_mode;
    doc["evaluated"] = report.evaluated;
    doc["failed"] = report.failed;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        doc["rows"].push_back(row_json(row));
    }
    doc["mean"] = row_json(report.mean);
    return doc.dump(2) + "\n";
}

} // namespace curvtopo
