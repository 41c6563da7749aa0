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

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace curvtopo {

/// Dense row-major grid. Row index is the image row (y), column index the
/// image column (x), origin at the top-left corner.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RasterF32 = Raster<float>;
using Gray8 = Raster<std::uint8_t>;

/// Foreground pixel coordinates, one per row: column 0 is x, column 1 is y.
using PointCloud = Eigen::Matrix<int, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// Two-valued segmentation mask. Every element is 0 or 1.
class BinaryMask {
public:
    BinaryMask() = default;

    /// All-background mask of the given size.
    BinaryMask(int width, int height);

    /// Adopts `data`; throws std::invalid_argument if any element is not 0 or 1.
    explicit BinaryMask(Gray8 data);

    int width() const { return static_cast<int>(data_.cols()); }
    int height() const { return static_cast<int>(data_.rows()); }
    bool empty() const { return data_.size() == 0; }

    bool at(int x, int y) const { return data_(y, x) != 0; }
    void set(int x, int y, bool on) { data_(y, x) = on ? 1 : 0; }

    /// Number of foreground pixels.
    Eigen::Index count() const;

    const Gray8& array() const { return data_; }

    friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
        return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
               (a.data_ == b.data_).all();
    }

private:
    Gray8 data_;
};

/// How to reduce a multi-channel image to one 8-bit channel.
enum class ChannelRule {
    kReject, ///< multi-channel input is an error
    kFirst,  ///< keep the first (red or gray) channel
    kMax,    ///< maximum over color channels, alpha ignored
    kLuma,   ///< rounded Rec. 601 luma
};

struct MaskLoadOptions {
    int threshold = 128; ///< pixel >= threshold is foreground; 0..255
    ChannelRule channels = ChannelRule::kReject;
};

/// Reads an 8-bit PNG or PGM (P2/P5) as a single gray channel.
Gray8 load_gray8(const std::filesystem::path& path, ChannelRule channels = ChannelRule::kReject);

/// Writes an 8-bit grayscale image. The format follows the extension
/// (".pgm" writes binary PGM, anything else PNG).
void save_gray8(const Gray8& image, const std::filesystem::path& path);

BinaryMask load_mask(const std::filesystem::path& path, const MaskLoadOptions& options = {});

/// Writes foreground as 255 and background as 0.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

BinaryMask threshold_gray(const Gray8& image, int threshold);

/// Foreground pixels in row-major scan order.
PointCloud mask_to_point_cloud(const BinaryMask& mask);

// PI raster files: "PIR1", u32 width, u32 height, u32 reserved (0), then
// width*height little-endian float32 values in row-major order.
inline constexpr std::size_t kRasterHeaderBytes = 16;

void write_raster(const RasterF32& raster, std::ostream& out);
RasterF32 read_raster(std::istream& in);
void save_raster(const RasterF32& raster, const std::filesystem::path& path);
RasterF32 load_raster(const std::filesystem::path& path);

struct DirectoryPairing {
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> pairs; ///< sorted by stem
    std::vector<std::string> unmatched_pred; ///< stems only present in the prediction directory
    std::vector<std::string> unmatched_gt;   ///< stems only present in the ground-truth directory
};

/// True for the mask extensions the loaders accept (.png, .pgm, any case).
bool is_mask_file(const std::filesystem::path& path);

/// Sorted mask files directly inside `dir`.
std::vector<std::filesystem::path> list_mask_files(const std::filesystem::path& dir);

/// Pairs mask files by identical stem. Throws IoError when either directory is
/// missing, a stem is duplicated within one directory, or no stem is shared.
DirectoryPairing pair_directories(const std::filesystem::path& pred_dir,
                                  const std::filesystem::path& gt_dir);

} // namespace curvtopo
