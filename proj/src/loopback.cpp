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

#include "fatbeacon/loopback.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <thread>

namespace fatbeacon {

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    ~Fd() { reset(); }
    Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Fd& operator=(Fd&& other) noexcept
    {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }

    int get() const noexcept { return fd_; }
    explicit operator bool() const noexcept { return fd_ >= 0; }
    void reset()
    {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
};

[[noreturn]] void socket_error(const std::string& what)
{
    throw NetError(NetError::Kind::Socket, what + ": " + std::strerror(errno));
}

sockaddr_in make_address(const std::string& host, std::uint16_t port)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw NetError(NetError::Kind::Socket, "bad IPv4 address '" + host + "'");
    }
    return addr;
}

void bind_or_throw(const Fd& fd, const sockaddr_in& addr, const std::string& what)
{
    if (::bind(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        if (errno == EADDRINUSE) {
            throw NetError(NetError::Kind::PortInUse, what + " port " + std::to_string(ntohs(addr.sin_port)) +
                                                          " is already in use");
        }
        socket_error("bind " + what);
    }
}

int poll_one(int fd, short events, std::chrono::milliseconds timeout)
{
    pollfd p{fd, events, 0};
    while (true) {
        const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(timeout.count(), 1LL << 30)));
        if (rc < 0 && errno == EINTR) {
            continue;
        }
        return rc;
    }
}

class SocketLink final : public Link {
public:
    explicit SocketLink(Fd fd) : fd_(std::move(fd))
    {
        const int one = 1;
        ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    void write_all(std::span<const std::uint8_t> bytes, std::chrono::milliseconds timeout) override
    {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const int rc = poll_one(fd_.get(), POLLOUT, timeout);
            if (rc == 0) {
                throw LinkError(LinkError::Kind::Timeout, "write timed out");
            }
            if (rc < 0) {
                throw LinkError(LinkError::Kind::Dropped, "poll failed");
            }
            const ssize_t n = ::send(fd_.get(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR || errno == EAGAIN) {
                    continue;
                }
                throw LinkError(LinkError::Kind::Dropped, "connection dropped while sending");
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    std::size_t read_some(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) override
    {
        while (true) {
            const int rc = poll_one(fd_.get(), POLLIN, timeout);
            if (rc == 0) {
                throw LinkError(LinkError::Kind::Timeout, "read timed out");
            }
            if (rc < 0) {
                throw LinkError(LinkError::Kind::Dropped, "poll failed");
            }
            const ssize_t n = ::recv(fd_.get(), buffer.data(), buffer.size(), 0);
            if (n < 0) {
                if (errno == EINTR || errno == EAGAIN) {
                    continue;
                }
                throw LinkError(LinkError::Kind::Dropped, "connection dropped while receiving");
            }
            return static_cast<std::size_t>(n);
        }
    }

    void close() override { ::shutdown(fd_.get(), SHUT_WR); }

private:
    Fd fd_;
};

}  // namespace

void LoopbackEndpoint::validate() const
{
    in_addr addr{};
    if (::inet_pton(AF_INET, host.c_str(), &addr) != 1 || (ntohl(addr.s_addr) >> 24) != 127) {
        throw std::invalid_argument("endpoint host must be a loopback address, got '" + host + "'");
    }
    if (adv_port == 0) {
        throw std::invalid_argument("advertisement port must be set");
    }
    if (adv_port == conn_port) {
        throw std::invalid_argument("advertisement and connection ports must differ");
    }
}

std::unique_ptr<Link> connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout)
{
    Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
    if (!fd) {
        socket_error("socket");
    }
    const auto addr = make_address(host, port);
    if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        if (errno != EINPROGRESS) {
            throw LinkError(LinkError::Kind::Dropped, "connection refused");
        }
        if (poll_one(fd.get(), POLLOUT, timeout) <= 0) {
            throw LinkError(LinkError::Kind::Timeout, "connect timed out");
        }
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) {
            throw LinkError(LinkError::Kind::Dropped, "connection refused");
        }
    }
    return std::make_unique<SocketLink>(std::move(fd));
}

// ---------------------------------------------------------------------------
// advertiser

struct Advertiser::Impl {
    ContentBundle bundle;
    AdvertiserConfig config;
    LoopbackEndpoint endpoint;
    ServeOptions serve_options;
    RawAdvPacket packet;
    Fd adv_socket;
    Fd listen_socket;
    std::uint16_t bound_conn_port = 0;

    std::atomic<std::size_t> sent{0};
    std::atomic<std::size_t> served{0};

    std::mutex mutex;
    std::condition_variable_any wake;
    std::jthread broadcaster;
    std::jthread acceptor;
    std::vector<std::jthread> sessions;

    void broadcast_loop(std::stop_token stop)
    {
        const auto target = make_address(kLoopbackBroadcast, endpoint.adv_port);
        const auto interval = std::chrono::milliseconds(config.interval_ms);
        auto next = std::chrono::steady_clock::now();
        std::unique_lock lock(mutex);
        while (!stop.stop_requested()) {
            ::sendto(adv_socket.get(), packet.bytes.data(), packet.bytes.size(), 0,
                     reinterpret_cast<const sockaddr*>(&target), sizeof(target));
            sent.fetch_add(1, std::memory_order_relaxed);
            next += interval;
            wake.wait_until(lock, stop, next, [] { return false; });
        }
    }

    void accept_loop(std::stop_token stop)
    {
        while (!stop.stop_requested()) {
            if (poll_one(listen_socket.get(), POLLIN, std::chrono::milliseconds(50)) <= 0) {
                continue;
            }
            Fd client(::accept4(listen_socket.get(), nullptr, nullptr, SOCK_CLOEXEC | SOCK_NONBLOCK));
            if (!client) {
                continue;
            }
            std::lock_guard lock(mutex);
            sessions.emplace_back([this, fd = std::move(client)]() mutable {
                SocketLink link(std::move(fd));
                try {
                    serve(bundle, link, serve_options);
                    served.fetch_add(1, std::memory_order_relaxed);
                } catch (const std::exception&) {
                    // A failed session only affects its own client.
                }
            });
        }
    }
};

Advertiser::Advertiser(ContentBundle bundle, AdvertiserConfig config, LoopbackEndpoint endpoint, std::string title,
                       ServeOptions serve_options)
    : impl_(std::make_unique<Impl>())
{
    endpoint.validate();
    config.validate();
    if (const auto violations = validate_atomic(bundle); !violations.empty()) {
        std::string what = "bundle is not atomic:";
        for (const auto& v : violations) {
            what += " <" + v.tag + "> " + v.url + ";";
        }
        throw NetError(NetError::Kind::InvalidBundle, what);
    }
    if (title.empty()) {
        title = bundle.title.empty() ? "FatBeacon" : bundle.title;
    }
    impl_->packet = encode_fatbeacon(FatBeaconFrame{config.tx_power_dbm, truncate_utf8(title, kMaxTitleBytes)});
    impl_->bundle = std::move(bundle);
    impl_->config = config;
    impl_->endpoint = endpoint;
    impl_->serve_options = std::move(serve_options);

    impl_->adv_socket = Fd(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
    if (!impl_->adv_socket) {
        socket_error("socket");
    }
    const int one = 1;
    ::setsockopt(impl_->adv_socket.get(), SOL_SOCKET, SO_BROADCAST, &one, sizeof(one));
    // The advertiser owns the advertisement port on the host address; scanners
    // bind the broadcast address with SO_REUSEADDR.
    bind_or_throw(impl_->adv_socket, make_address(endpoint.host, endpoint.adv_port), "advertisement");

    impl_->listen_socket = Fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!impl_->listen_socket) {
        socket_error("socket");
    }
    bind_or_throw(impl_->listen_socket, make_address(endpoint.host, endpoint.conn_port), "connection");
    if (::listen(impl_->listen_socket.get(), 16) != 0) {
        socket_error("listen");
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(impl_->listen_socket.get(), reinterpret_cast<sockaddr*>(&bound), &len);
    impl_->bound_conn_port = ntohs(bound.sin_port);
    impl_->endpoint.conn_port = impl_->bound_conn_port;
}

Advertiser::~Advertiser()
{
    stop();
}

void Advertiser::start()
{
    if (impl_->broadcaster.joinable()) {
        return;
    }
    impl_->acceptor = std::jthread([this](std::stop_token stop) { impl_->accept_loop(stop); });
    impl_->broadcaster = std::jthread([this](std::stop_token stop) { impl_->broadcast_loop(stop); });
}

void Advertiser::stop()
{
    if (!impl_) {
        return;
    }
    if (impl_->broadcaster.joinable()) {
        impl_->broadcaster.request_stop();
        impl_->broadcaster.join();
    }
    if (impl_->acceptor.joinable()) {
        impl_->acceptor.request_stop();
        impl_->acceptor.join();
    }
    std::vector<std::jthread> sessions;
    {
        std::lock_guard lock(impl_->mutex);
        sessions.swap(impl_->sessions);
    }
    sessions.clear();  // joins
}

std::uint16_t Advertiser::conn_port() const noexcept
{
    return impl_->bound_conn_port;
}

const RawAdvPacket& Advertiser::packet() const noexcept
{
    return impl_->packet;
}

std::size_t Advertiser::advertisements_sent() const noexcept
{
    return impl_->sent.load(std::memory_order_relaxed);
}

std::size_t Advertiser::sessions_served() const noexcept
{
    return impl_->served.load(std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------
// scanner

ScanResult scan_and_fetch(const LoopbackEndpoint& endpoint, const ScanOptions& options)
{
    endpoint.validate();
    Fd sock(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
    if (!sock) {
        socket_error("socket");
    }
    const int one = 1;
    ::setsockopt(sock.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    bind_or_throw(sock, make_address(kLoopbackBroadcast, endpoint.adv_port), "scan");

    using Clock = std::chrono::steady_clock;
    const auto deadline =
        Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.timeout_s));

    ScanResult result;
    bool found = false;
    std::array<std::uint8_t, 64> buffer{};
    while (!found) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        if (left.count() <= 0 || poll_one(sock.get(), POLLIN, left) <= 0) {
            throw NetError(NetError::Kind::ScanTimeout, "no FatBeacon advertisement within the scan timeout");
        }
        const ssize_t n = ::recv(sock.get(), buffer.data(), buffer.size(), 0);
        if (n <= 0) {
            continue;
        }
        RawAdvPacket packet{{buffer.begin(), buffer.begin() + n}, std::nullopt};
        const auto classified = classify_frame(packet);
        if (const auto* frame = std::get_if<FatBeaconFrame>(&classified)) {
            result.beacon = *frame;
            found = true;
        }
    }
    sock.reset();

    if (options.profile) {
        LinkProfile seen = *options.profile;
        seen.tx_power_dbm = result.beacon.tx_power_dbm;
        result.rssi_dbm = rssi_at(seen, options.distance_m);
    }

    const std::string notify = "NOTIFY " + result.beacon.title;
    std::string title_token = result.beacon.title;
    std::replace(title_token.begin(), title_token.end(), ' ', '_');
    const std::string notify_line = std::to_string(monotonic_now_ns()) + " Idle notify:" + title_token;
    if (options.log) {
        options.log(notify_line);
    }
    if (options.on_notify) {
        options.on_notify(notify);
    }

    std::optional<SimulatedRadioDelays> delays;
    if (options.profile) {
        delays.emplace(*options.profile, options.distance_m);
    }
    FetchOptions fetch_options;
    fetch_options.params = options.params;
    fetch_options.idle_timeout = options.idle_timeout;
    fetch_options.delays = delays ? &*delays : nullptr;
    fetch_options.log = options.log;

    const auto host = endpoint.host;
    const auto port = endpoint.conn_port;
    auto fetched = fetch(result.beacon, [&] { return connect_tcp(host, port); }, fetch_options);

    result.content = std::move(fetched.content);
    result.timing = fetched.timing;
    result.elapsed_s = fetched.timing.difference_ms / 1000.0;
    result.log.push_back(notify_line);
    result.log.insert(result.log.end(), fetched.log.begin(), fetched.log.end());
    return result;
}

}  // namespace fatbeacon
