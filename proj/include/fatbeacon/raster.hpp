/* Copyright 2026 The FatBeacon Sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FATBEACON_RASTER_HPP
#define FATBEACON_RASTER_HPP

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fatbeacon {

class RasterError : public std::invalid_argument {
public:
    enum class Kind { DimensionMismatch, EmptyLayerA, BadFormat };

    RasterError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Row-major boolean grid.
class RasterMask {
public:
    RasterMask() = default;
    RasterMask(std::size_t width, std::size_t height, bool fill = false);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }

    bool at(std::size_t x, std::size_t y) const { return bits_.at(y * width_ + x) != 0; }
    void set(std::size_t x, std::size_t y, bool value = true) { bits_.at(y * width_ + x) = value ? 1 : 0; }

    std::size_t count() const;

    bool operator==(const RasterMask&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<unsigned char> bits_;
};

/// Plain PBM (P1). 1 is a set pixel.
RasterMask parse_pbm(std::string_view text);
std::string format_pbm(const RasterMask& mask);
RasterMask load_pbm(const std::filesystem::path& path);

struct Coverage {
    double covered_fraction;
    double uncovered_fraction;
};

/// Share of layer A's pixels that are also set in layer B.
Coverage coverage_diff(const RasterMask& layer_a, const RasterMask& layer_b);

/// Pixel-wise A AND B, the "painted" layer of the difference.
RasterMask layer_intersection(const RasterMask& layer_a, const RasterMask& layer_b);

}  // namespace fatbeacon

#endif  // FATBEACON_RASTER_HPP
