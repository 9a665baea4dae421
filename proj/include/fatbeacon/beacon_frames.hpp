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

#ifndef FATBEACON_BEACON_FRAMES_HPP
#define FATBEACON_BEACON_FRAMES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fatbeacon {

/*
 * Advertisement packet layout (service data for the Eddystone UUID):
 *
 *   0xAA 0xFE      16-bit service UUID 0xFEAA, little endian
 *   0x10           frame type (URL)
 *   tx             calibrated TX power at 0 m, int8
 *   scheme         0x00..0x03 URL prefix, or 0x0E for a FatBeacon
 *   payload        compressed URL (<= 18 bytes) or UTF-8 title (<= 26 bytes)
 */
inline constexpr std::uint8_t kEddystoneUuid[2] = {0xAA, 0xFE};
inline constexpr std::uint8_t kFrameTypeUrl = 0x10;
inline constexpr std::uint8_t kFatBeaconScheme = 0x0E;
inline constexpr std::size_t kMaxAdvPacketBytes = 31;
inline constexpr std::size_t kMaxCompressedUrlBytes = 18;
inline constexpr std::size_t kMaxTitleBytes = 26;
inline constexpr int kMinTxPowerDbm = -100;
inline constexpr int kMaxTxPowerDbm = 20;

struct EddystoneUrlFrame {
    int tx_power_dbm = 0;
    std::string url;

    bool operator==(const EddystoneUrlFrame&) const = default;
};

struct FatBeaconFrame {
    int tx_power_dbm = 0;
    std::string title;

    bool operator==(const FatBeaconFrame&) const = default;
};

struct RawAdvPacket {
    std::vector<std::uint8_t> bytes;
    std::optional<int> rssi_dbm;  // filled in by the receiving side
};

struct UnknownFrame {
    bool operator==(const UnknownFrame&) const = default;
};

using ClassifiedFrame = std::variant<EddystoneUrlFrame, FatBeaconFrame, UnknownFrame>;

class FrameError : public std::runtime_error {
public:
    enum class Kind { UrlTooLong, UnsupportedScheme, InvalidUrlCharacter, TitleTooLong, InvalidTitle, TxPowerOutOfRange };

    FrameError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Compresses a URL with the scheme-prefix and expansion tables.
/// Returns scheme byte followed by the compressed body.
std::vector<std::uint8_t> compress_url(std::string_view url);

RawAdvPacket encode_eddystone_url(const EddystoneUrlFrame& frame);
RawAdvPacket encode_fatbeacon(const FatBeaconFrame& frame);

/// Total: malformed input classifies as UnknownFrame.
ClassifiedFrame classify_frame(const RawAdvPacket& packet);
ClassifiedFrame classify_frame(std::span<const std::uint8_t> bytes);

/// Lowercase space-separated hex, e.g. "aa fe 10 f9".
std::string to_hex_line(std::span<const std::uint8_t> bytes);

/// Parses a frames.hex document: one packet per line, `#` starts a comment,
/// blank lines skipped. Throws std::invalid_argument on a bad token.
std::vector<std::vector<std::uint8_t>> parse_hex_dump(std::string_view text);

}  // namespace fatbeacon

#endif  // FATBEACON_BEACON_FRAMES_HPP
