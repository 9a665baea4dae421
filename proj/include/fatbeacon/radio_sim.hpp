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

#ifndef FATBEACON_RADIO_SIM_HPP
#define FATBEACON_RADIO_SIM_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fatbeacon/transfer.hpp"

namespace fatbeacon {

class RadioError : public std::invalid_argument {
public:
    enum class Kind { NonPositiveDistance, DegenerateFit, TooFewPoints, OutOfRange, InvalidProfile, LinkUnusable };

    RadioError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

enum class Protocol { BLE4, BLE5, G2, G3 };

const char* to_string(Protocol protocol);
/// Accepts BLE4, BLE5, 2G/G2, 3G/G3 (case-insensitive).
Protocol parse_protocol(std::string_view text);

// Packet error rate curve: per = 1 / (1 + exp(k * (snr - snr0))).
inline constexpr double kPerSlopePerDb = 0.8;
inline constexpr double kPerMidpointSnrDb = 8.0;

struct LinkProfile {
    double phy_rate_kbps = 1000.0;  // kilobits (10^3 bits) per second of chunk payload
    double setup_latency_s = 0.0;
    double per_chunk_overhead_s = 0.0;
    double path_loss_exponent = 2.0;
    int tx_power_dbm = -7;
    double noise_floor_dbm = -90.0;
    int adv_interval_ms = 100;  // advertiser setting the profile was taken with
    std::uint64_t rng_seed = 0;

    /// Throws RadioError(InvalidProfile) when an invariant is violated.
    void validate() const;

    bool operator==(const LinkProfile&) const = default;
};

/// Flat `key=value` text, one field per line, `#` comments.
std::string format_profile(const LinkProfile& profile);
LinkProfile parse_profile(std::string_view text);
LinkProfile load_profile(const std::filesystem::path& path);
void save_profile(const LinkProfile& profile, const std::filesystem::path& path);

struct AdvertiserConfig {
    int interval_ms = 100;
    int tx_power_dbm = -7;

    void validate() const;
};

/// Log-distance path loss: tx - 10 n log10(d).
double rssi_at(const LinkProfile& profile, double distance_m);

double packet_error_rate(double rssi_dbm, double noise_floor_dbm);

/// Air time of one chunk carrying `payload_bytes`, before retransmissions.
double chunk_time_s(const LinkProfile& profile, std::size_t payload_bytes);

/**
 * Draws per-chunk transmission counts for one simulated transfer.
 *
 * Each chunk is retried until it gets through; the number of attempts is
 * geometric with success probability 1 - per. Draws come from a
 * mt19937_64 seeded with the profile's seed, so a given profile, distance
 * and chunk sequence always yields the same delays.
 */
class RetransmissionSampler {
public:
    RetransmissionSampler(const LinkProfile& profile, double distance_m);

    double packet_error_rate() const noexcept { return per_; }
    /// Attempts needed for the next chunk (>= 1). Throws LinkUnusable when per == 1.
    std::uint64_t next_attempts();

private:
    std::mt19937_64 rng_;
    double per_;
};

/// setup + sum over chunks of chunk_time * attempts.
double simulate_transfer(const LinkProfile& profile, std::size_t size_bytes, double distance_m,
                         const ChunkParams& params = {});

/// Closed-form mean of simulate_transfer: setup + chunks * chunk_time / (1 - per).
double expected_transfer_time(const LinkProfile& profile, std::size_t size_bytes, double distance_m,
                              const ChunkParams& params = {});

/// Client-side delay injection driven by the same sampler as simulate_transfer.
class SimulatedRadioDelays final : public DelayModel {
public:
    SimulatedRadioDelays(const LinkProfile& profile, double distance_m);

    std::chrono::nanoseconds setup_delay() override;
    std::chrono::nanoseconds chunk_delay(std::size_t payload_bytes) override;

private:
    LinkProfile profile_;
    RetransmissionSampler sampler_;
};

struct SizeTime {
    double size_kb;
    double seconds;
};

struct CalibrationResidual {
    double size_kb;
    double actual_s;
    double predicted_s;
    double relative_error;  // (predicted - actual) / actual
};

struct Calibration {
    LinkProfile profile;
    double setup_s = 0.0;
    double seconds_per_kb = 0.0;
    double rate_kb_per_s = 0.0;  // KB = 1024 bytes
    std::vector<CalibrationResidual> residuals;

    double predict(double size_kb) const { return setup_s + seconds_per_kb * size_kb; }
};

/// Ordinary least squares of time = setup + size / rate over (size_kb, seconds)
/// points. The returned profile keeps the other fields of `base`.
Calibration calibrate_ble4(std::span<const SizeTime> medians, const LinkProfile& base = {});

/**
 * Picks the noise floor that makes the expected transfer time at `far_m`
 * exceed the one at `near_m` by `target_ratio`, keeping the logistic PER
 * constants fixed. Bisection on the closed-form expectation.
 */
LinkProfile calibrate_noise_floor(const LinkProfile& profile, std::size_t size_bytes, double near_m, double far_m,
                                  double target_ratio, const ChunkParams& params = {});

struct BaselineModel {
    Protocol protocol;
    std::map<int, double> reference_times;  // size_kb -> seconds
};

/// Measured (BLE4) and specification-derived (BLE5, 2G, 3G) download times for
/// 10, 20, 40, 100 and 200 KB. 3G entries below 0.5 s are stored as 0.
BaselineModel reference_baseline(Protocol protocol);

/// Reference value at the five table sizes, linear interpolation between them.
/// Outside [10, 200] throws OutOfRange unless `allow_extrapolation`.
double baseline_time(const BaselineModel& model, double size_kb, bool allow_extrapolation = false);

/// Target 15 m / 1 m ratio of 40 KB transfer medians from the distance experiment.
inline constexpr double kDistanceRatioTarget = 8.075 / 7.439;

/// Affine fit over the BLE4 reference medians, noise floor tuned to the
/// distance ratio at 40 KB between 1 m and 15 m.
Calibration calibrated_ble4();

}  // namespace fatbeacon

#endif  // FATBEACON_RADIO_SIM_HPP
