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

#include "curvtopo/mask_io.hpp"

#include "curvtopo/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>

namespace curvtopo {

namespace fs = std::filesystem;

BinaryMask::BinaryMask(int width, int height) {
    if (width < 0 || height < 0) {
        throw std::invalid_argument("mask dimensions must be non-negative");
    }
    data_ = Gray8::Zero(height, width);
}

BinaryMask::BinaryMask(Gray8 data) : data_(std::move(data)) {
    if ((data_ > 1).any()) {
        throw std::invalid_argument("binary mask elements must be 0 or 1");
    }
}

Eigen::Index BinaryMask::count() const {
    return (data_ != 0).count();
}

namespace {

std::vector<unsigned char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint8_t collapse(const std::uint8_t* rgba, ChannelRule rule) {
    switch (rule) {
    case ChannelRule::kFirst:
        return rgba[0];
    case ChannelRule::kMax:
        return std::max({rgba[0], rgba[1], rgba[2]});
    case ChannelRule::kLuma:
        return static_cast<std::uint8_t>(
            std::lround(0.299 * rgba[0] + 0.587 * rgba[1] + 0.114 * rgba[2]));
    case ChannelRule::kReject:
        break;
    }
    return rgba[0];
}

Gray8 decode_png(const std::vector<unsigned char>& bytes, const fs::path& path, ChannelRule rule) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()) == 0) {
        throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
    }
    if ((image.format & PNG_FORMAT_FLAG_LINEAR) != 0) {
        png_image_free(&image);
        throw IoError("'" + path.string() + "' is not an 8-bit image");
    }
    const bool multi = (image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) != 0;
    if (multi && rule == ChannelRule::kReject) {
        png_image_free(&image);
        throw IoError("'" + path.string() +
                      "' has more than one channel and no channel-collapse rule was given");
    }
    const int width = static_cast<int>(image.width);
    const int height = static_cast<int>(image.height);
    Gray8 out(height, width);
    if (!multi) {
        image.format = PNG_FORMAT_GRAY;
        if (png_image_finish_read(&image, nullptr, out.data(), width, nullptr) == 0) {
            throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
        }
        return out;
    }
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(static_cast<std::size_t>(width) * height * 4);
    if (png_image_finish_read(&image, nullptr, rgba.data(), width * 4, nullptr) == 0) {
        throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
    }
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.data()[i] = collapse(&rgba[static_cast<std::size_t>(i) * 4], rule);
    }
    return out;
}

// Reads the next whitespace-separated token of a PNM header, skipping comments.
class PnmCursor {
public:
    PnmCursor(const std::vector<unsigned char>& bytes, const fs::path& path)
        : bytes_(bytes), path_(path) {}

    long next_int() {
        skip_space();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw IoError("malformed PGM '" + path_.string() + "'");
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (value > (1L << 30)) {
                throw IoError("malformed PGM '" + path_.string() + "'");
            }
        }
        return value;
    }

    // Binary payloads start after exactly one whitespace byte.
    std::size_t payload_offset() const { return pos_ + 1; }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    const fs::path& path_;
    std::size_t pos_ = 2;
};

Gray8 decode_pgm(const std::vector<unsigned char>& bytes, const fs::path& path) {
    const bool binary = bytes[1] == '5';
    PnmCursor cursor(bytes, path);
    const long width = cursor.next_int();
    const long height = cursor.next_int();
    const long maxval = cursor.next_int();
    if (maxval < 1 || maxval > 255) {
        throw IoError("'" + path.string() + "' is not an 8-bit PGM");
    }
    Gray8 out(height, width);
    auto scale = [&](long v) -> std::uint8_t {
        if (v > maxval) {
            throw IoError("PGM sample exceeds maxval in '" + path.string() + "'");
        }
        return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    };
    if (binary) {
        const std::size_t offset = cursor.payload_offset();
        const std::size_t needed = static_cast<std::size_t>(width) * height;
        if (bytes.size() < offset + needed) {
            throw IoError("truncated PGM '" + path.string() + "'");
        }
        for (std::size_t i = 0; i < needed; ++i) {
            out.data()[i] = scale(bytes[offset + i]);
        }
    } else {
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            out.data()[i] = scale(cursor.next_int());
        }
    }
    return out;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

Gray8 load_gray8(const fs::path& path, ChannelRule channels) {
    const auto bytes = read_file(path);
    static constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                                    '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
        return decode_png(bytes, path, channels);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
        return decode_pgm(bytes, path);
    }
    throw IoError("unsupported raster format in '" + path.string() + "' (expected PNG or PGM)");
}

void save_gray8(const Gray8& image, const fs::path& path) {
    if (lower(path.extension().string()) == ".pgm") {
        std::ostringstream header;
        header << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
        std::string bytes = header.str();
        bytes.append(reinterpret_cast<const char*>(image.data()), static_cast<std::size_t>(image.size()));
        write_bytes(path, bytes);
        return;
    }
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.cols());
    png.height = static_cast<png_uint_32>(image.rows());
    png.format = PNG_FORMAT_GRAY;
    if (png_image_write_to_file(&png, path.string().c_str(), 0, image.data(),
                                static_cast<png_int_32>(image.cols()), nullptr) == 0) {
        throw IoError("cannot write PNG '" + path.string() + "': " + png.message);
    }
}

BinaryMask threshold_gray(const Gray8& image, int threshold) {
    if (threshold < 0 || threshold > 255) {
        throw std::invalid_argument("threshold must lie in [0, 255]");
    }
    return BinaryMask((image.cast<int>() >= threshold).cast<std::uint8_t>());
}

BinaryMask load_mask(const fs::path& path, const MaskLoadOptions& options) {
    return threshold_gray(load_gray8(path, options.channels), options.threshold);
}

void save_mask(const BinaryMask& mask, const fs::path& path) {
    save_gray8((mask.array() * std::uint8_t{255}).eval(), path);
}

PointCloud mask_to_point_cloud(const BinaryMask& mask) {
    PointCloud points(mask.count(), 2);
    Eigen::Index k = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                points(k, 0) = x;
                points(k, 1) = y;
                ++k;
            }
        }
    }
    return points;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_values(const RasterF32& raster) {
    for (Eigen::Index i = 0; i < raster.size(); ++i) {
        const float v = raster.data()[i];
        if (!std::isfinite(v) || v < 0.0f) {
            throw std::invalid_argument("raster values must be finite and non-negative");
        }
    }
}

} // namespace

void write_raster(const RasterF32& raster, std::ostream& out) {
    check_values(raster);
    std::string bytes = "PIR1";
    bytes.reserve(kRasterHeaderBytes + 4 * static_cast<std::size_t>(raster.size()));
    put_u32(bytes, static_cast<std::uint32_t>(raster.cols()));
    put_u32(bytes, static_cast<std::uint32_t>(raster.rows()));
    put_u32(bytes, 0);
    for (Eigen::Index i = 0; i < raster.size(); ++i) {
        put_u32(bytes, std::bit_cast<std::uint32_t>(raster.data()[i]));
    }
    if (!out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw IoError("cannot write raster");
    }
}

RasterF32 read_raster(std::istream& in) {
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                           std::istreambuf_iterator<char>()};
    if (bytes.size() < kRasterHeaderBytes || std::memcmp(bytes.data(), "PIR1", 4) != 0) {
        throw IoError("bad raster magic");
    }
    const std::uint32_t width = get_u32(&bytes[4]);
    const std::uint32_t height = get_u32(&bytes[8]);
    if (get_u32(&bytes[12]) != 0) {
        throw IoError("raster reserved header field is not zero");
    }
    const std::uint64_t payload = std::uint64_t{width} * height * 4;
    if (bytes.size() - kRasterHeaderBytes != payload) {
        throw IoError("raster payload is " + std::to_string(bytes.size() - kRasterHeaderBytes) +
                      " bytes, header requires " + std::to_string(payload));
    }
    RasterF32 raster(height, width);
    for (Eigen::Index i = 0; i < raster.size(); ++i) {
        raster.data()[i] =
            std::bit_cast<float>(get_u32(&bytes[kRasterHeaderBytes + 4 * static_cast<std::size_t>(i)]));
    }
    try {
        check_values(raster);
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
    return raster;
}

void save_raster(const RasterF32& raster, const fs::path& path) {
    std::ostringstream buffer;
    write_raster(raster, buffer);
    write_bytes(path, buffer.str());
}

RasterF32 load_raster(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    try {
        return read_raster(in);
    } catch (const IoError& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

bool is_mask_file(const fs::path& path) {
    const auto ext = lower(path.extension().string());
    return ext == ".png" || ext == ".pgm";
}

std::vector<fs::path> list_mask_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("'" + dir.string() + "' is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_mask_file(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

namespace {

std::map<std::string, fs::path> index_by_stem(const fs::path& dir) {
    std::map<std::string, fs::path> by_stem;
    for (const auto& file : list_mask_files(dir)) {
        const auto stem = file.stem().string();
        if (!by_stem.emplace(stem, file).second) {
            throw IoError("stem '" + stem + "' appears twice in '" + dir.string() + "'");
        }
    }
    return by_stem;
}

std::string join(const std::map<std::string, fs::path>& stems) {
    std::string out = "{";
    for (const auto& [stem, path] : stems) {
        out += (out.size() > 1 ? ", " : "") + stem;
    }
    return out + "}";
}

} // namespace

DirectoryPairing pair_directories(const fs::path& pred_dir, const fs::path& gt_dir) {
    const auto pred = index_by_stem(pred_dir);
    const auto gt = index_by_stem(gt_dir);
    DirectoryPairing result;
    for (const auto& [stem, path] : pred) {
        if (auto it = gt.find(stem); it != gt.end()) {
            result.pairs.emplace_back(path, it->second);
        } else {
            result.unmatched_pred.push_back(stem);
        }
    }
    for (const auto& [stem, path] : gt) {
        if (!pred.contains(stem)) {
            result.unmatched_gt.push_back(stem);
        }
    }
    if (result.pairs.empty()) {
        throw IoError("no common file stems between prediction stems " + join(pred) +
                      " and ground-truth stems " + join(gt));
    }
    return result;
}

} // namespace curvtopo
