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

#include "fatbeacon/radio_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fatbeacon {

namespace {

std::string trimmed(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r");
    return std::string(text.substr(first, last - first + 1));
}

std::string upper(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value)
{
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw RadioError(RadioError::Kind::InvalidProfile, "bad value for " + key + ": '" + value + "'");
    }
    return out;
}

std::string format_double(double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

void check_distance(double distance_m)
{
    if (!(distance_m > 0.0)) {
        throw RadioError(RadioError::Kind::NonPositiveDistance, "distance must be positive");
    }
}

}  // namespace

const char* to_string(Protocol protocol)
{
    switch (protocol) {
    case Protocol::BLE4: return "BLE4";
    case Protocol::BLE5: return "BLE5";
    case Protocol::G2: return "2G";
    case Protocol::G3: return "3G";
    }
    return "?";
}

Protocol parse_protocol(std::string_view text)
{
    const auto u = upper(trimmed(text));
    if (u == "BLE4") return Protocol::BLE4;
    if (u == "BLE5") return Protocol::BLE5;
    if (u == "2G" || u == "G2") return Protocol::G2;
    if (u == "3G" || u == "G3") return Protocol::G3;
    throw std::invalid_argument("unknown protocol '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// profiles

void LinkProfile::validate() const
{
    const auto bad = [](const std::string& what) { throw RadioError(RadioError::Kind::InvalidProfile, what); };
    if (!(phy_rate_kbps > 0.0) || !std::isfinite(phy_rate_kbps)) bad("phy_rate_kbps must be positive");
    if (!(setup_latency_s >= 0.0) || !std::isfinite(setup_latency_s)) bad("setup_latency_s must be >= 0");
    if (!(per_chunk_overhead_s >= 0.0) || !std::isfinite(per_chunk_overhead_s)) bad("per_chunk_overhead_s must be >= 0");
    if (!(path_loss_exponent >= 1.6 && path_loss_exponent <= 4.0)) bad("path_loss_exponent must be in [1.6, 4.0]");
    if (tx_power_dbm < -100 || tx_power_dbm > 20) bad("tx_power_dbm must be in [-100, 20]");
    if (!std::isfinite(noise_floor_dbm)) bad("noise_floor_dbm must be finite");
    if (adv_interval_ms < 20 || adv_interval_ms > 10240) bad("adv_interval_ms must be in [20, 10240]");
}

std::string format_profile(const LinkProfile& profile)
{
    std::ostringstream out;
    out << "# fatbeacon link profile\n"
        << "phy_rate_kbps=" << format_double(profile.phy_rate_kbps) << '\n'
        << "setup_latency_s=" << format_double(profile.setup_latency_s) << '\n'
        << "per_chunk_overhead_s=" << format_double(profile.per_chunk_overhead_s) << '\n'
        << "path_loss_exponent=" << format_double(profile.path_loss_exponent) << '\n'
        << "tx_power_dbm=" << profile.tx_power_dbm << '\n'
        << "noise_floor_dbm=" << format_double(profile.noise_floor_dbm) << '\n'
        << "adv_interval_ms=" << profile.adv_interval_ms << '\n'
        << "rng_seed=" << profile.rng_seed << '\n';
    return out.str();
}

LinkProfile parse_profile(std::string_view text)
{
    LinkProfile profile;
    std::istringstream lines{std::string(text)};
    std::string line;
    while (std::getline(lines, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trimmed(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw RadioError(RadioError::Kind::InvalidProfile, "expected key=value: '" + line + "'");
        }
        const auto key = trimmed(std::string_view(line).substr(0, eq));
        const auto value = trimmed(std::string_view(line).substr(eq + 1));
        if (key == "phy_rate_kbps") profile.phy_rate_kbps = parse_number<double>(key, value);
        else if (key == "setup_latency_s") profile.setup_latency_s = parse_number<double>(key, value);
        else if (key == "per_chunk_overhead_s") profile.per_chunk_overhead_s = parse_number<double>(key, value);
        else if (key == "path_loss_exponent") profile.path_loss_exponent = parse_number<double>(key, value);
        else if (key == "tx_power_dbm") profile.tx_power_dbm = parse_number<int>(key, value);
        else if (key == "noise_floor_dbm") profile.noise_floor_dbm = parse_number<double>(key, value);
        else if (key == "adv_interval_ms") profile.adv_interval_ms = parse_number<int>(key, value);
        else if (key == "rng_seed") profile.rng_seed = parse_number<std::uint64_t>(key, value);
        else throw RadioError(RadioError::Kind::InvalidProfile, "unknown profile key '" + key + "'");
    }
    profile.validate();
    return profile;
}

LinkProfile load_profile(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw RadioError(RadioError::Kind::InvalidProfile, "cannot open profile " + path.string());
    }
    std::stringstream text;
    text << in.rdbuf();
    return parse_profile(text.str());
}

void save_profile(const LinkProfile& profile, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write profile " + path.string());
    }
    out << format_profile(profile);
}

void AdvertiserConfig::validate() const
{
    if (interval_ms < 20 || interval_ms > 10240) {
        throw RadioError(RadioError::Kind::InvalidProfile, "advertising interval must be in [20, 10240] ms");
    }
    if (tx_power_dbm < -100 || tx_power_dbm > 20) {
        throw RadioError(RadioError::Kind::InvalidProfile, "tx power must be in [-100, 20] dBm");
    }
}

// ---------------------------------------------------------------------------
// channel model

double rssi_at(const LinkProfile& profile, double distance_m)
{
    check_distance(distance_m);
    return static_cast<double>(profile.tx_power_dbm) - 10.0 * profile.path_loss_exponent * std::log10(distance_m);
}

double packet_error_rate(double rssi_dbm, double noise_floor_dbm)
{
    const double snr = rssi_dbm - noise_floor_dbm;
    return 1.0 / (1.0 + std::exp(kPerSlopePerDb * (snr - kPerMidpointSnrDb)));
}

double chunk_time_s(const LinkProfile& profile, std::size_t payload_bytes)
{
    return static_cast<double>(payload_bytes) * 8.0 / (profile.phy_rate_kbps * 1000.0) + profile.per_chunk_overhead_s;
}

RetransmissionSampler::RetransmissionSampler(const LinkProfile& profile, double distance_m)
    : rng_(profile.rng_seed), per_(fatbeacon::packet_error_rate(rssi_at(profile, distance_m), profile.noise_floor_dbm))
{
}

std::uint64_t RetransmissionSampler::next_attempts()
{
    // Inverse CDF of the failure count: floor(ln u / ln per), u in (0, 1].
    const double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    if (per_ <= 0.0) {
        return 1;
    }
    if (per_ >= 1.0) {
        throw RadioError(RadioError::Kind::LinkUnusable, "packet error rate is 1 at this distance");
    }
    const double failures = std::floor(std::log(u) / std::log(per_));
    if (failures >= 1e15) {
        throw RadioError(RadioError::Kind::LinkUnusable, "retransmission count overflow");
    }
    return 1 + static_cast<std::uint64_t>(failures);
}

double simulate_transfer(const LinkProfile& profile, std::size_t size_bytes, double distance_m, const ChunkParams& params)
{
    check_distance(distance_m);
    profile.validate();
    RetransmissionSampler sampler(profile, distance_m);
    const std::size_t payload = params.chunk_payload();
    const double full_chunk = chunk_time_s(profile, payload);

    double total = 0.0;
    for (std::size_t offset = 0; offset < size_bytes; offset += payload) {
        const std::size_t n = std::min(payload, size_bytes - offset);
        const double base = n == payload ? full_chunk : chunk_time_s(profile, n);
        total += base * static_cast<double>(sampler.next_attempts());
    }
    return profile.setup_latency_s + total;
}

double expected_transfer_time(const LinkProfile& profile, std::size_t size_bytes, double distance_m,
                              const ChunkParams& params)
{
    profile.validate();
    const double per = packet_error_rate(rssi_at(profile, distance_m), profile.noise_floor_dbm);
    const std::size_t payload = params.chunk_payload();
    const std::size_t full = size_bytes / payload;
    const std::size_t rest = size_bytes % payload;
    double air = static_cast<double>(full) * chunk_time_s(profile, payload);
    if (rest > 0) {
        air += chunk_time_s(profile, rest);
    }
    if (air == 0.0) {
        return profile.setup_latency_s;
    }
    return profile.setup_latency_s + air / (1.0 - per);
}

SimulatedRadioDelays::SimulatedRadioDelays(const LinkProfile& profile, double distance_m)
    : profile_(profile), sampler_(profile, distance_m)
{
    profile_.validate();
}

std::chrono::nanoseconds SimulatedRadioDelays::setup_delay()
{
    return std::chrono::nanoseconds(std::llround(profile_.setup_latency_s * 1e9));
}

std::chrono::nanoseconds SimulatedRadioDelays::chunk_delay(std::size_t payload_bytes)
{
    const double seconds = chunk_time_s(profile_, payload_bytes) * static_cast<double>(sampler_.next_attempts());
    return std::chrono::nanoseconds(std::llround(seconds * 1e9));
}

// ---------------------------------------------------------------------------
// calibration

Calibration calibrate_ble4(std::span<const SizeTime> medians, const LinkProfile& base)
{
    if (medians.size() < 2) {
        throw RadioError(RadioError::Kind::TooFewPoints, "calibration needs at least two points");
    }
    const double n = static_cast<double>(medians.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& p : medians) {
        mean_x += p.size_kb;
        mean_y += p.seconds;
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : medians) {
        sxx += (p.size_kb - mean_x) * (p.size_kb - mean_x);
        sxy += (p.size_kb - mean_x) * (p.seconds - mean_y);
    }
    if (sxx == 0.0) {
        throw RadioError(RadioError::Kind::DegenerateFit, "all calibration sizes are equal");
    }
    const double slope = sxy / sxx;
    if (!(slope > 0.0)) {
        throw RadioError(RadioError::Kind::DegenerateFit, "fitted time does not grow with size");
    }

    Calibration fit;
    fit.seconds_per_kb = slope;
    fit.setup_s = std::max(0.0, mean_y - slope * mean_x);
    fit.rate_kb_per_s = 1.0 / slope;
    fit.profile = base;
    fit.profile.setup_latency_s = fit.setup_s;
    fit.profile.per_chunk_overhead_s = 0.0;
    fit.profile.phy_rate_kbps = 1024.0 * 8.0 / 1000.0 / slope;
    for (const auto& p : medians) {
        const double predicted = fit.predict(p.size_kb);
        fit.residuals.push_back({p.size_kb, p.seconds, predicted, (predicted - p.seconds) / p.seconds});
    }
    return fit;
}

LinkProfile calibrate_noise_floor(const LinkProfile& profile, std::size_t size_bytes, double near_m, double far_m,
                                  double target_ratio, const ChunkParams& params)
{
    check_distance(near_m);
    check_distance(far_m);
    if (!(far_m > near_m) || !(target_ratio > 1.0) || size_bytes == 0) {
        throw RadioError(RadioError::Kind::DegenerateFit, "noise calibration needs far > near, ratio > 1, size > 0");
    }
    LinkProfile probe = profile;
    const auto ratio_at = [&](double noise) {
        probe.noise_floor_dbm = noise;
        return expected_transfer_time(probe, size_bytes, far_m, params) /
               expected_transfer_time(probe, size_bytes, near_m, params);
    };

    double lo = -200.0;
    double hi = rssi_at(profile, far_m);
    if (ratio_at(lo) >= target_ratio || ratio_at(hi) <= target_ratio) {
        throw RadioError(RadioError::Kind::DegenerateFit, "target ratio not reachable by the noise floor");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ratio_at(mid) < target_ratio ? lo : hi) = mid;
    }
    probe.noise_floor_dbm = 0.5 * (lo + hi);
    return probe;
}

// ---------------------------------------------------------------------------
// baselines

BaselineModel reference_baseline(Protocol protocol)
{
    switch (protocol) {
    case Protocol::BLE4: return {protocol, {{10, 5.21}, {20, 8.82}, {40, 7.43}, {100, 15.18}, {200, 28.14}}};
    case Protocol::BLE5: return {protocol, {{10, 1.30}, {20, 2.20}, {40, 1.85}, {100, 3.79}, {200, 7.03}}};
    case Protocol::G2: return {protocol, {{10, 5.0}, {20, 11.0}, {40, 23.0}, {100, 58.0}, {200, 107.0}}};
    case Protocol::G3: return {protocol, {{10, 0.0}, {20, 0.0}, {40, 0.0}, {100, 2.0}, {200, 4.0}}};
    }
    throw std::invalid_argument("unknown protocol");
}

double baseline_time(const BaselineModel& model, double size_kb, bool allow_extrapolation)
{
    const auto& table = model.reference_times;
    if (table.size() < 2) {
        throw RadioError(RadioError::Kind::OutOfRange, "baseline table needs at least two sizes");
    }
    const double lo = table.begin()->first;
    const double hi = table.rbegin()->first;
    if ((size_kb < lo || size_kb > hi) && !allow_extrapolation) {
        throw RadioError(RadioError::Kind::OutOfRange, "size " + format_double(size_kb) + " KB outside reference table");
    }

    auto upper_it = table.lower_bound(static_cast<int>(std::ceil(size_kb)));
    if (upper_it != table.end() && static_cast<double>(upper_it->first) == size_kb) {
        return upper_it->second;
    }
    if (upper_it == table.begin()) {
        ++upper_it;
    } else if (upper_it == table.end()) {
        --upper_it;
    }
    const auto lower_it = std::prev(upper_it);
    const double x0 = lower_it->first;
    const double x1 = upper_it->first;
    const double t = (size_kb - x0) / (x1 - x0);
    return lower_it->second + t * (upper_it->second - lower_it->second);
}

Calibration calibrated_ble4()
{
    const auto reference = reference_baseline(Protocol::BLE4);
    std::vector<SizeTime> medians;
    for (const auto& [size, seconds] : reference.reference_times) {
        medians.push_back({static_cast<double>(size), seconds});
    }
    auto fit = calibrate_ble4(medians);
    fit.profile = calibrate_noise_floor(fit.profile, 40 * 1024, 1.0, 15.0, kDistanceRatioTarget);
    return fit;
}

}  // namespace fatbeacon
