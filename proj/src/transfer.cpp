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

#include "fatbeacon/transfer.hpp"

#include <algorithm>
#include <array>
#include <thread>

namespace fatbeacon {

ChunkParams ChunkParams::with_mtu(int mtu)
{
    if (mtu < kMinMtu || mtu > kMaxMtu) {
        throw std::invalid_argument("mtu " + std::to_string(mtu) + " outside [23, 512]");
    }
    return ChunkParams{mtu};
}

std::size_t chunk_count(std::size_t size, const ChunkParams& params)
{
    const std::size_t payload = params.chunk_payload();
    return (size + payload - 1) / payload;
}

const char* to_string(SessionState state)
{
    switch (state) {
    case SessionState::Idle: return "Idle";
    case SessionState::Connecting: return "Connecting";
    case SessionState::Negotiating: return "Negotiating";
    case SessionState::Transferring: return "Transferring";
    case SessionState::Closing: return "Closing";
    case SessionState::Done: return "Done";
    case SessionState::Failed: return "Failed";
    }
    return "?";
}

bool is_legal_transition(SessionState from, SessionState to)
{
    if (from == SessionState::Done || from == SessionState::Failed) {
        return false;
    }
    if (to == SessionState::Failed) {
        return true;
    }
    return static_cast<int>(to) == static_cast<int>(from) + 1;
}

double compute_duration(std::int64_t start_ns, std::int64_t end_ns)
{
    if (end_ns < start_ns) {
        throw TransferError(TransferError::Kind::NegativeInterval, "end time precedes start time");
    }
    return static_cast<double>(end_ns - start_ns) / 1e6;
}

std::int64_t monotonic_now_ns()
{
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------------------

TransferSession::TransferSession(LogSink sink) : sink_(std::move(sink))
{
}

void TransferSession::advance(SessionState next, std::string_view event)
{
    if (!is_legal_transition(state_, next)) {
        throw TransferError(TransferError::Kind::IllegalTransition,
                            std::string("illegal transition ") + to_string(state_) + " -> " + to_string(next));
    }
    state_ = next;
    record(event);
}

void TransferSession::fail(std::string_view reason)
{
    if (state_ == SessionState::Done || state_ == SessionState::Failed) {
        return;
    }
    failure_reason_ = std::string(reason);
    state_ = SessionState::Failed;
    std::string event = "fail:" + failure_reason_;
    std::replace(event.begin(), event.end(), ' ', '_');
    record(event);
}

void TransferSession::note(std::string_view event)
{
    record(event);
}

void TransferSession::record(std::string_view event)
{
    std::string line = std::to_string(monotonic_now_ns());
    line += ' ';
    line += to_string(state_);
    line += ' ';
    line += event;
    if (sink_) {
        sink_(line);
    }
    log_.push_back(std::move(line));
}

// ---------------------------------------------------------------------------

namespace {

std::array<std::uint8_t, kLengthHeaderBytes> encode_length(std::uint32_t length)
{
    return {static_cast<std::uint8_t>(length >> 24), static_cast<std::uint8_t>(length >> 16),
            static_cast<std::uint8_t>(length >> 8), static_cast<std::uint8_t>(length)};
}

TransferError translate(const LinkError& e, std::size_t partial)
{
    return TransferError(e.kind() == LinkError::Kind::Dropped ? TransferError::Kind::LinkDropped
                                                              : TransferError::Kind::Timeout,
                         e.what(), partial);
}

// Reads exactly buffer.size() bytes; returns fewer only on end-of-stream.
std::size_t read_exact(Link& link, std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout)
{
    std::size_t got = 0;
    while (got < buffer.size()) {
        const std::size_t n = link.read_some(buffer.subspan(got), timeout);
        if (n == 0) {
            break;
        }
        got += n;
    }
    return got;
}

}  // namespace

std::size_t serve(const ContentBundle& bundle, Link& link, const ServeOptions& options)
{
    TransferSession session(options.log);
    if (!validate_atomic(bundle).empty()) {
        session.fail("bundle is not atomic");
        throw TransferError(TransferError::Kind::InvalidBundle, "bundle references external resources");
    }
    if (bundle.html.size() > 0xFFFFFFFFu) {
        session.fail("bundle too large");
        throw TransferError(TransferError::Kind::InvalidBundle, "bundle exceeds 4 GiB length header");
    }

    std::size_t served = 0;
    try {
        session.advance(SessionState::Connecting, "accept");
        session.advance(SessionState::Negotiating, "length:" + std::to_string(bundle.html.size()));
        const auto header = encode_length(static_cast<std::uint32_t>(bundle.html.size()));
        link.write_all(header, options.idle_timeout);
        served += header.size();

        session.advance(SessionState::Transferring, "chunks:" +
                                                        std::to_string(chunk_count(bundle.html.size(), options.params)));
        const auto* data = reinterpret_cast<const std::uint8_t*>(bundle.html.data());
        const std::size_t payload = options.params.chunk_payload();
        for (std::size_t offset = 0; offset < bundle.html.size(); offset += payload) {
            const std::size_t n = std::min(payload, bundle.html.size() - offset);
            link.write_all(std::span(data + offset, n), options.idle_timeout);
            served += n;
        }
        session.advance(SessionState::Closing, "payload_complete");
        link.close();
        session.advance(SessionState::Done, "closed");
    } catch (const LinkError& e) {
        session.fail(e.what());
        throw translate(e, served);
    }
    return served;
}

FetchResult fetch(const FatBeaconFrame& peer, const Connector& connect, const FetchOptions& options)
{
    using Clock = std::chrono::steady_clock;

    TransferSession session(options.log);
    FetchResult result;
    std::size_t received = 0;
    std::unique_ptr<Link> link;

    const auto fail = [&](TransferError error) -> TransferError {
        session.fail(error.what());
        if (link) {
            link->close();
        }
        return error;
    };

    try {
        const auto start = Clock::now();
        const std::int64_t start_ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(start.time_since_epoch()).count();
        std::string target = "connect:" + peer.title;
        std::replace(target.begin(), target.end(), ' ', '_');
        session.advance(SessionState::Connecting, target);
        link = connect();
        if (!link) {
            throw LinkError(LinkError::Kind::Dropped, "connection refused");
        }

        auto deadline = start;
        if (options.delays != nullptr) {
            deadline += options.delays->setup_delay();
            std::this_thread::sleep_until(deadline);
        }

        session.advance(SessionState::Negotiating, "connected");
        std::array<std::uint8_t, kLengthHeaderBytes> header{};
        if (read_exact(*link, header, options.idle_timeout) != header.size()) {
            throw fail(TransferError(TransferError::Kind::LengthMismatch, "stream ended inside the length header"));
        }
        const std::uint32_t length = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                                     (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};

        session.advance(SessionState::Transferring, "length:" + std::to_string(length));
        result.content.resize(length);
        auto* data = reinterpret_cast<std::uint8_t*>(result.content.data());
        const std::size_t payload = options.params.chunk_payload();
        while (received < length) {
            const std::size_t want = std::min<std::size_t>(payload, length - received);
            const std::size_t got = read_exact(*link, std::span(data + received, want), options.idle_timeout);
            received += got;
            if (got < want) {
                throw fail(TransferError(TransferError::Kind::LengthMismatch,
                                         "stream ended after " + std::to_string(received) + " of " +
                                             std::to_string(length) + " bytes",
                                         received));
            }
            if (options.delays != nullptr) {
                deadline += options.delays->chunk_delay(got);
                std::this_thread::sleep_until(deadline);
            }
        }

        session.advance(SessionState::Closing, "payload_complete");
        std::array<std::uint8_t, 1> extra{};
        if (link->read_some(extra, options.idle_timeout) != 0) {
            throw fail(TransferError(TransferError::Kind::LengthMismatch, "beacon sent more bytes than announced",
                                     received));
        }
        link->close();
        const std::int64_t end_ns = monotonic_now_ns();
        session.advance(SessionState::Done, "closed");

        result.timing = TransferTiming{start_ns, end_ns, compute_duration(start_ns, end_ns)};
    } catch (const LinkError& e) {
        throw fail(translate(e, received));
    }
    result.log = session.log();
    return result;
}

}  // namespace fatbeacon
