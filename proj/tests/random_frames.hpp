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

// Generators of valid advertisement frames.

#ifndef FATBEACON_RANDOM_FRAMES_HPP
#define FATBEACON_RANDOM_FRAMES_HPP

#include <array>
#include <random>
#include <string>

#include "fatbeacon/beacon_frames.hpp"

namespace fatbeacon::testing {

inline int random_tx(std::mt19937_64& rng)
{
    return kMinTxPowerDbm + static_cast<int>(rng() % (kMaxTxPowerDbm - kMinTxPowerDbm + 1));
}

// The encoded body never exceeds 18 bytes: the pieces are chosen so that
// literal text is at most 14 bytes and at most 4 expansion codes follow.
inline EddystoneUrlFrame random_url_frame(std::mt19937_64& rng)
{
    static constexpr std::array<const char*, 4> kSchemes = {"http://www.", "https://www.", "http://", "https://"};
    static constexpr std::array<const char*, 14> kSuffixes = {".com/", ".org/", ".edu/", ".net/", ".info/",
                                                              ".biz/", ".gov/", ".com",  ".org",  ".edu",
                                                              ".net",  ".info", ".biz",  ".gov"};
    static constexpr char kSafe[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_~!$&'()*+,;=:@%?";

    std::string url = kSchemes[rng() % kSchemes.size()];
    int literals = 1 + static_cast<int>(rng() % 14);
    int codes = static_cast<int>(rng() % 5);
    while (literals > 0 || codes > 0) {
        if (codes > 0 && (literals == 0 || rng() % 3 == 0)) {
            url += kSuffixes[rng() % kSuffixes.size()];
            --codes;
        } else {
            // '.' and '/' are avoided so no accidental expansion shortens or lengthens the count.
            url.push_back(kSafe[rng() % (sizeof(kSafe) - 1)]);
            --literals;
        }
    }
    return {random_tx(rng), url};
}

// Mixes 1-, 2-, 3- and 4-byte UTF-8 sequences up to 26 bytes.
inline FatBeaconFrame random_fat_frame(std::mt19937_64& rng)
{
    static constexpr std::array<const char*, 8> kPieces = {"a", "Z", " ", "7", "\xC3\xB1", "\xC3\xA9",
                                                           "\xE2\x82\xAC", "\xF0\x9F\x8C\xB2"};
    const std::size_t budget = 1 + rng() % kMaxTitleBytes;
    std::string title;
    while (true) {
        const std::string piece = kPieces[rng() % kPieces.size()];
        if (title.size() + piece.size() > budget) break;
        title += piece;
    }
    if (title.empty()) title = "x";
    return {random_tx(rng), title};
}

}  // namespace fatbeacon::testing

#endif  // FATBEACON_RANDOM_FRAMES_HPP
