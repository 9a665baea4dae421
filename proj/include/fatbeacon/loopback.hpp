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

// Loopback stand-in for the radio: advertisements travel as UDP datagrams
// broadcast on 127.255.255.255, content travels over a TCP connection.

#ifndef FATBEACON_LOOPBACK_HPP
#define FATBEACON_LOOPBACK_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fatbeacon/beacon_frames.hpp"
#include "fatbeacon/html_bundler.hpp"
#include "fatbeacon/link.hpp"
#include "fatbeacon/radio_sim.hpp"
#include "fatbeacon/transfer.hpp"

namespace fatbeacon {

inline constexpr const char* kLoopbackBroadcast = "127.255.255.255";

struct LoopbackEndpoint {
    std::string host = "127.0.0.1";
    std::uint16_t adv_port = 47800;
    std::uint16_t conn_port = 47801;  // 0 lets the advertiser pick one

    /// Host must be a 127.0.0.0/8 address and the ports distinct.
    void validate() const;
};

class NetError : public std::runtime_error {
public:
    enum class Kind { PortInUse, InvalidBundle, ScanTimeout, Socket };

    NetError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Connects a TCP stream to host:port on loopback.
std::unique_ptr<Link> connect_tcp(const std::string& host, std::uint16_t port,
                                  std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

/**
 * A FatBeacon emulated over loopback.
 *
 * Construction validates the bundle and binds both sockets, so a bad bundle
 * or a taken port fails before anything is broadcast. start() launches the
 * broadcast loop and the accept loop; every accepted connection is served on
 * its own thread.
 */
class Advertiser {
public:
    Advertiser(ContentBundle bundle, AdvertiserConfig config, LoopbackEndpoint endpoint,
               std::string title = {}, ServeOptions serve_options = {});
    ~Advertiser();

    Advertiser(const Advertiser&) = delete;
    Advertiser& operator=(const Advertiser&) = delete;

    void start();
    void stop();

    std::uint16_t conn_port() const noexcept;
    const RawAdvPacket& packet() const noexcept;
    std::size_t advertisements_sent() const noexcept;
    std::size_t sessions_served() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ScanOptions {
    double timeout_s = 10.0;
    std::optional<LinkProfile> profile;  // inject simulated air time when set
    double distance_m = 1.0;
    ChunkParams params{};
    std::chrono::milliseconds idle_timeout = kDefaultIdleTimeout;
    std::function<void(const std::string&)> on_notify;
    TransferSession::LogSink log;
};

struct ScanResult {
    FatBeaconFrame beacon;
    std::optional<double> rssi_dbm;
    std::string content;
    double elapsed_s = 0.0;
    TransferTiming timing;
    std::vector<std::string> log;  // notification line first, then the session
};

/// Listens for a FatBeacon advertisement, then fetches its content.
/// Throws NetError(ScanTimeout) when no FatBeacon frame arrives in time.
ScanResult scan_and_fetch(const LoopbackEndpoint& endpoint, const ScanOptions& options = {});

}  // namespace fatbeacon

#endif  // FATBEACON_LOOPBACK_HPP
