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

#ifndef FATBEACON_TRANSFER_HPP
#define FATBEACON_TRANSFER_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fatbeacon/beacon_frames.hpp"
#include "fatbeacon/html_bundler.hpp"
#include "fatbeacon/link.hpp"

namespace fatbeacon {

/*
 * Content channel wire format: a 4-byte big-endian payload length, then the
 * payload bytes. The beacon writes the payload in chunk_payload-sized pieces
 * and closes its side when done; the client reads until end-of-stream.
 */
inline constexpr std::size_t kLengthHeaderBytes = 4;
inline constexpr std::chrono::milliseconds kDefaultIdleTimeout{90'000};

/// ATT framing: each chunk carries mtu - 3 bytes of payload.
struct ChunkParams {
    int mtu = 23;

    static constexpr int kMinMtu = 23;
    static constexpr int kMaxMtu = 512;
    static constexpr int kAttHeaderBytes = 3;

    /// Throws std::invalid_argument outside [23, 512].
    static ChunkParams with_mtu(int mtu);

    std::size_t chunk_payload() const { return static_cast<std::size_t>(mtu - kAttHeaderBytes); }
};

/// Number of chunks needed for `size` bytes.
std::size_t chunk_count(std::size_t size, const ChunkParams& params);

enum class SessionState { Idle, Connecting, Negotiating, Transferring, Closing, Done, Failed };

const char* to_string(SessionState state);

/// True for Idle->Connecting->Negotiating->Transferring->Closing->Done and
/// for any non-terminal state -> Failed.
bool is_legal_transition(SessionState from, SessionState to);

struct TransferTiming {
    std::int64_t start_time_ns = 0;
    std::int64_t end_time_ns = 0;
    double difference_ms = 0.0;
};

class TransferError : public std::runtime_error {
public:
    enum class Kind { LinkDropped, Timeout, LengthMismatch, NegativeInterval, IllegalTransition, InvalidBundle };

    TransferError(Kind kind, const std::string& what, std::size_t partial_bytes = 0)
        : std::runtime_error(what), kind_(kind), partial_bytes_(partial_bytes)
    {
    }

    Kind kind() const noexcept { return kind_; }
    /// Payload bytes received before the failure; the bytes themselves are discarded.
    std::size_t partial_bytes() const noexcept { return partial_bytes_; }

private:
    Kind kind_;
    std::size_t partial_bytes_;
};

/// Elapsed milliseconds, (end - start) / 1e6. Throws NegativeInterval if end < start.
double compute_duration(std::int64_t start_ns, std::int64_t end_ns);

/// Nanoseconds on the monotonic clock.
std::int64_t monotonic_now_ns();

/// One client<->beacon session. Every transition is logged as
/// `ts_ns state event`, with `state` the state entered.
class TransferSession {
public:
    using LogSink = std::function<void(const std::string&)>;

    explicit TransferSession(LogSink sink = {});

    SessionState state() const noexcept { return state_; }
    const std::string& failure_reason() const noexcept { return failure_reason_; }
    const std::vector<std::string>& log() const noexcept { return log_; }

    /// Throws TransferError(IllegalTransition) and leaves the state unchanged.
    void advance(SessionState next, std::string_view event);
    void fail(std::string_view reason);
    /// Adds a log line without a transition.
    void note(std::string_view event);

private:
    void record(std::string_view event);

    SessionState state_ = SessionState::Idle;
    std::string failure_reason_;
    std::vector<std::string> log_;
    LogSink sink_;
};

/// Simulated air time injected on the client side.
class DelayModel {
public:
    virtual ~DelayModel() = default;
    virtual std::chrono::nanoseconds setup_delay() = 0;
    virtual std::chrono::nanoseconds chunk_delay(std::size_t payload_bytes) = 0;
};

struct ServeOptions {
    ChunkParams params{};
    std::chrono::milliseconds idle_timeout = kDefaultIdleTimeout;
    TransferSession::LogSink log;
};

/// Writes the length header and the bundle in chunks, then closes the link.
/// Returns header plus payload bytes written.
std::size_t serve(const ContentBundle& bundle, Link& link, const ServeOptions& options = {});

using Connector = std::function<std::unique_ptr<Link>()>;

struct FetchOptions {
    ChunkParams params{};
    std::chrono::milliseconds idle_timeout = kDefaultIdleTimeout;
    DelayModel* delays = nullptr;
    TransferSession::LogSink log;
};

struct FetchResult {
    std::string content;
    TransferTiming timing;
    std::vector<std::string> log;
};

/**
 * Connects to a beacon and reads its content.
 *
 * The start sample is taken before connecting and the end sample after the
 * beacon's end-of-stream has been seen and our side closed, so setup and
 * length negotiation fall inside the measured interval.
 */
FetchResult fetch(const FatBeaconFrame& peer, const Connector& connect, const FetchOptions& options = {});

}  // namespace fatbeacon

#endif  // FATBEACON_TRANSFER_HPP
