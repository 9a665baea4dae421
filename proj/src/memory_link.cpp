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

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>

#include "fatbeacon/link.hpp"

namespace fatbeacon {

namespace {

struct Channel {
    std::deque<std::uint8_t> bytes;
    bool writer_closed = false;
};

struct SharedPipe {
    std::mutex mutex;
    std::condition_variable readable;
    Channel channels[2];
    std::size_t transferred = 0;
    std::size_t drop_after = 0;
    bool dropped = false;
};

class MemoryLink final : public Link {
public:
    MemoryLink(std::shared_ptr<SharedPipe> pipe, int side) : pipe_(std::move(pipe)), side_(side) {}

    ~MemoryLink() override { close(); }

    void write_all(std::span<const std::uint8_t> bytes, std::chrono::milliseconds) override
    {
        std::lock_guard lock(pipe_->mutex);
        if (pipe_->dropped) {
            throw LinkError(LinkError::Kind::Dropped, "link dropped");
        }
        auto& out = pipe_->channels[side_ ^ 1];
        const std::size_t room = pipe_->drop_after - pipe_->transferred;
        const std::size_t n = std::min(room, bytes.size());
        out.bytes.insert(out.bytes.end(), bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
        pipe_->transferred += n;
        pipe_->readable.notify_all();
        if (n < bytes.size()) {
            pipe_->dropped = true;
            throw LinkError(LinkError::Kind::Dropped, "link dropped");
        }
    }

    std::size_t read_some(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) override
    {
        std::unique_lock lock(pipe_->mutex);
        auto& in = pipe_->channels[side_];
        const bool ready = pipe_->readable.wait_for(
            lock, timeout, [&] { return !in.bytes.empty() || in.writer_closed || pipe_->dropped; });
        if (!in.bytes.empty()) {
            const std::size_t n = std::min(buffer.size(), in.bytes.size());
            std::copy_n(in.bytes.begin(), n, buffer.begin());
            in.bytes.erase(in.bytes.begin(), in.bytes.begin() + static_cast<std::ptrdiff_t>(n));
            return n;
        }
        if (pipe_->dropped) {
            throw LinkError(LinkError::Kind::Dropped, "link dropped");
        }
        if (!ready) {
            throw LinkError(LinkError::Kind::Timeout, "read timed out");
        }
        return 0;
    }

    void close() override
    {
        std::lock_guard lock(pipe_->mutex);
        pipe_->channels[side_ ^ 1].writer_closed = true;
        pipe_->readable.notify_all();
    }

private:
    std::shared_ptr<SharedPipe> pipe_;
    int side_;
};

}  // namespace

std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> make_memory_link_pair(MemoryLinkOptions options)
{
    auto pipe = std::make_shared<SharedPipe>();
    pipe->drop_after = options.drop_after_bytes;
    return {std::make_unique<MemoryLink>(pipe, 0), std::make_unique<MemoryLink>(pipe, 1)};
}

}  // namespace fatbeacon
