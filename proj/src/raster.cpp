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

#include "fatbeacon/raster.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fatbeacon {

RasterMask::RasterMask(std::size_t width, std::size_t height, bool fill)
    : width_(width), height_(height), bits_(width * height, fill ? 1 : 0)
{
}

std::size_t RasterMask::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

namespace {

void require_same_shape(const RasterMask& a, const RasterMask& b)
{
    if (a.width() != b.width() || a.height() != b.height()) {
        throw RasterError(RasterError::Kind::DimensionMismatch, "layers differ in dimensions");
    }
}

}  // namespace

RasterMask layer_intersection(const RasterMask& layer_a, const RasterMask& layer_b)
{
    require_same_shape(layer_a, layer_b);
    RasterMask out(layer_a.width(), layer_a.height());
    for (std::size_t y = 0; y < layer_a.height(); ++y) {
        for (std::size_t x = 0; x < layer_a.width(); ++x) {
            out.set(x, y, layer_a.at(x, y) && layer_b.at(x, y));
        }
    }
    return out;
}

Coverage coverage_diff(const RasterMask& layer_a, const RasterMask& layer_b)
{
    require_same_shape(layer_a, layer_b);
    const std::size_t total = layer_a.count();
    if (total == 0) {
        throw RasterError(RasterError::Kind::EmptyLayerA, "layer A has no set pixels");
    }
    const std::size_t inside = layer_intersection(layer_a, layer_b).count();
    const std::size_t outside = total - inside;
    // Both fractions come from integer counts so they sum to 1 up to rounding.
    return {static_cast<double>(inside) / static_cast<double>(total),
            static_cast<double>(outside) / static_cast<double>(total)};
}

RasterMask parse_pbm(std::string_view text)
{
    std::string cleaned;
    std::istringstream lines{std::string(text)};
    std::string line;
    while (std::getline(lines, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        cleaned += line;
        cleaned += '\n';
    }
    std::istringstream in(cleaned);
    std::string magic;
    long width = -1;
    long height = -1;
    if (!(in >> magic) || magic != "P1" || !(in >> width >> height) || width < 0 || height < 0) {
        throw RasterError(RasterError::Kind::BadFormat, "expected a plain PBM (P1) header");
    }
    RasterMask mask(static_cast<std::size_t>(width), static_cast<std::size_t>(height));
    std::size_t index = 0;
    const std::size_t total = mask.width() * mask.height();
    char c;
    while (index < total && in.get(c)) {
        if (c == '0' || c == '1') {
            mask.set(index % mask.width(), index / mask.width(), c == '1');
            ++index;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            throw RasterError(RasterError::Kind::BadFormat, std::string("unexpected character '") + c + "' in PBM");
        }
    }
    if (index != total) {
        throw RasterError(RasterError::Kind::BadFormat, "PBM has fewer pixels than its header declares");
    }
    return mask;
}

std::string format_pbm(const RasterMask& mask)
{
    std::string out = "P1\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n";
    for (std::size_t y = 0; y < mask.height(); ++y) {
        for (std::size_t x = 0; x < mask.width(); ++x) {
            if (x > 0) out += ' ';
            out += mask.at(x, y) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

RasterMask load_pbm(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw RasterError(RasterError::Kind::BadFormat, "cannot open " + path.string());
    }
    std::stringstream text;
    text << in.rdbuf();
    return parse_pbm(text.str());
}

}  // namespace fatbeacon
