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

#ifndef FATBEACON_LINK_HPP
#define FATBEACON_LINK_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>

namespace fatbeacon {

class LinkError : public std::runtime_error {
public:
    enum class Kind { Dropped, Timeout };

    LinkError(Kind kind, const char* what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A reliable, in-order byte stream between a client and a beacon.
class Link {
public:
    virtual ~Link() = default;

    virtual void write_all(std::span<const std::uint8_t> bytes, std::chrono::milliseconds timeout) = 0;

    /// Blocks until at least one byte arrives. Returns 0 once the peer has
    /// closed and everything it sent was consumed.
    virtual std::size_t read_some(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) = 0;

    /// Closes our direction; the peer reads end-of-stream after draining.
    virtual void close() = 0;
};

struct MemoryLinkOptions {
    /// The link fails once this many bytes have crossed it in either direction.
    std::size_t drop_after_bytes = std::numeric_limits<std::size_t>::max();
};

/// Two connected in-process endpoints (first, second).
std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> make_memory_link_pair(MemoryLinkOptions options = {});

}  // namespace fatbeacon

#endif  // FATBEACON_LINK_HPP
