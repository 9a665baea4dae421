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

#include "fatbeacon/beacon_frames.hpp"

#include <array>
#include <sstream>

#include "fatbeacon/html_bundler.hpp"

namespace fatbeacon {

namespace {

constexpr std::array<std::string_view, 4> kSchemePrefixes = {
    "http://www.",   // 0x00
    "https://www.",  // 0x01
    "http://",       // 0x02
    "https://",      // 0x03
};

constexpr std::array<std::string_view, 14> kExpansions = {
    ".com/", ".org/", ".edu/", ".net/", ".info/", ".biz/", ".gov/",
    ".com",  ".org",  ".edu",  ".net",  ".info",  ".biz",  ".gov",
};

bool is_literal_url_byte(std::uint8_t b)
{
    return b >= 0x21 && b <= 0x7E;
}

void check_tx_power(int dbm)
{
    if (dbm < kMinTxPowerDbm || dbm > kMaxTxPowerDbm) {
        throw FrameError(FrameError::Kind::TxPowerOutOfRange, "tx power " + std::to_string(dbm) + " dBm out of range");
    }
}

std::vector<std::uint8_t> frame_header(int tx_power_dbm)
{
    return {kEddystoneUuid[0], kEddystoneUuid[1], kFrameTypeUrl,
            static_cast<std::uint8_t>(static_cast<std::int8_t>(tx_power_dbm))};
}

std::optional<std::string> expand_url(std::uint8_t scheme, std::span<const std::uint8_t> body)
{
    if (scheme >= kSchemePrefixes.size() || body.size() > kMaxCompressedUrlBytes) {
        return std::nullopt;
    }
    std::string url(kSchemePrefixes[scheme]);
    for (const auto b : body) {
        if (b < kExpansions.size()) {
            url.append(kExpansions[b]);
        } else if (is_literal_url_byte(b)) {
            url.push_back(static_cast<char>(b));
        } else {
            return std::nullopt;
        }
    }
    return url;
}

}  // namespace

std::vector<std::uint8_t> compress_url(std::string_view url)
{
    std::vector<std::uint8_t> out;
    std::size_t best_scheme = kSchemePrefixes.size();
    for (std::size_t i = 0; i < kSchemePrefixes.size(); ++i) {
        if (url.starts_with(kSchemePrefixes[i]) &&
            (best_scheme == kSchemePrefixes.size() || kSchemePrefixes[i].size() > kSchemePrefixes[best_scheme].size())) {
            best_scheme = i;
        }
    }
    if (best_scheme == kSchemePrefixes.size()) {
        throw FrameError(FrameError::Kind::UnsupportedScheme, "unsupported URL scheme: " + std::string(url));
    }
    out.push_back(static_cast<std::uint8_t>(best_scheme));

    std::string_view rest = url.substr(kSchemePrefixes[best_scheme].size());
    while (!rest.empty()) {
        std::size_t code = kExpansions.size();
        for (std::size_t i = 0; i < kExpansions.size(); ++i) {
            if (rest.starts_with(kExpansions[i]) &&
                (code == kExpansions.size() || kExpansions[i].size() > kExpansions[code].size())) {
                code = i;
            }
        }
        if (code != kExpansions.size()) {
            out.push_back(static_cast<std::uint8_t>(code));
            rest.remove_prefix(kExpansions[code].size());
            continue;
        }
        const auto b = static_cast<std::uint8_t>(rest.front());
        if (!is_literal_url_byte(b)) {
            throw FrameError(FrameError::Kind::InvalidUrlCharacter, "URL contains a non-printable character");
        }
        out.push_back(b);
        rest.remove_prefix(1);
    }
    if (out.size() - 1 > kMaxCompressedUrlBytes) {
        throw FrameError(FrameError::Kind::UrlTooLong, "compressed URL is " + std::to_string(out.size() - 1) +
                                                           " bytes, limit is " +
                                                           std::to_string(kMaxCompressedUrlBytes));
    }
    return out;
}

RawAdvPacket encode_eddystone_url(const EddystoneUrlFrame& frame)
{
    check_tx_power(frame.tx_power_dbm);
    auto bytes = frame_header(frame.tx_power_dbm);
    const auto compressed = compress_url(frame.url);
    bytes.insert(bytes.end(), compressed.begin(), compressed.end());
    return RawAdvPacket{std::move(bytes), std::nullopt};
}

RawAdvPacket encode_fatbeacon(const FatBeaconFrame& frame)
{
    check_tx_power(frame.tx_power_dbm);
    if (frame.title.size() > kMaxTitleBytes) {
        throw FrameError(FrameError::Kind::TitleTooLong, "title is " + std::to_string(frame.title.size()) +
                                                             " bytes, limit is " + std::to_string(kMaxTitleBytes));
    }
    if (frame.title.empty() || !is_valid_utf8(frame.title)) {
        throw FrameError(FrameError::Kind::InvalidTitle, "title must be non-empty UTF-8");
    }
    auto bytes = frame_header(frame.tx_power_dbm);
    bytes.push_back(kFatBeaconScheme);
    bytes.insert(bytes.end(), frame.title.begin(), frame.title.end());
    return RawAdvPacket{std::move(bytes), std::nullopt};
}

ClassifiedFrame classify_frame(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 5 || bytes.size() > kMaxAdvPacketBytes || bytes[0] != kEddystoneUuid[0] ||
        bytes[1] != kEddystoneUuid[1] || bytes[2] != kFrameTypeUrl) {
        return UnknownFrame{};
    }
    const int tx = static_cast<std::int8_t>(bytes[3]);
    if (tx < kMinTxPowerDbm || tx > kMaxTxPowerDbm) {
        return UnknownFrame{};
    }
    const std::uint8_t scheme = bytes[4];
    const auto body = bytes.subspan(5);

    if (scheme == kFatBeaconScheme) {
        std::string title(body.begin(), body.end());
        if (title.empty() || title.size() > kMaxTitleBytes || !is_valid_utf8(title)) {
            return UnknownFrame{};
        }
        return FatBeaconFrame{tx, std::move(title)};
    }
    if (auto url = expand_url(scheme, body)) {
        return EddystoneUrlFrame{tx, std::move(*url)};
    }
    return UnknownFrame{};
}

ClassifiedFrame classify_frame(const RawAdvPacket& packet)
{
    return classify_frame(std::span<const std::uint8_t>(packet.bytes));
}

std::string to_hex_line(std::span<const std::uint8_t> bytes)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out.push_back(kDigits[bytes[i] >> 4]);
        out.push_back(kDigits[bytes[i] & 0x0F]);
    }
    return out;
}

std::vector<std::vector<std::uint8_t>> parse_hex_dump(std::string_view text)
{
    std::vector<std::vector<std::uint8_t>> packets;
    std::istringstream lines{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream tokens(line);
        std::string token;
        std::vector<std::uint8_t> packet;
        while (tokens >> token) {
            if (token.size() != 2 || !std::isxdigit(static_cast<unsigned char>(token[0])) ||
                !std::isxdigit(static_cast<unsigned char>(token[1]))) {
                throw std::invalid_argument("bad hex byte '" + token + "' on line " + std::to_string(line_no));
            }
            packet.push_back(static_cast<std::uint8_t>(std::stoi(token, nullptr, 16)));
        }
        if (!packet.empty()) {
            packets.push_back(std::move(packet));
        }
    }
    return packets;
}

}  // namespace fatbeacon
