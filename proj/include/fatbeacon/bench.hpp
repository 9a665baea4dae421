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

#ifndef FATBEACON_BENCH_HPP
#define FATBEACON_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fatbeacon/radio_sim.hpp"

namespace fatbeacon {

/// One timed fetch. `error` is set for a trial the simulator could not run.
struct TrialRecord {
    Protocol protocol = Protocol::BLE4;
    int size_kb = 0;
    double distance_m = 1.0;
    int trial_index = 1;
    double elapsed_s = 0.0;
    std::optional<std::string> error;

    bool operator==(const TrialRecord&) const = default;
};

struct ExperimentConfig {
    std::vector<Protocol> protocols{Protocol::BLE4};
    std::vector<int> sizes_kb{10, 20, 40, 100, 200};
    std::vector<double> distances_m{1.0};
    int trials_per_cell = 5;
    std::uint64_t base_seed = 0;
    LinkProfile profile{};  // BLE4 link; BLE5 runs it four times faster
};

/// `key=value` lines: protocols, sizes_kb, distances_m, trials, seed, and
/// optionally profile=<path> (relative to `base_dir`).
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Seed for one trial, mixed from the base seed, the cell and the index.
std::uint64_t trial_seed(std::uint64_t base_seed, Protocol protocol, int size_kb, double distance_m, int trial_index);

/// |protocols| x |sizes| x |distances| x trials records in that nesting order.
/// Throws std::invalid_argument when trials_per_cell < 1.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config);

struct AggregateRow {
    Protocol protocol;
    int size_kb;
    double distance_m;
    int n;
    double median_s;
    double trimmed_mean_s;  // NaN when n < 3
    double min_s;
    double max_s;
};

/// Groups successful records by (protocol, size, distance), sorted by key.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

enum class ReportFormat { Csv, Markdown };

std::string emit_report(const std::vector<AggregateRow>& rows, ReportFormat format);

/// Schema: protocol,size_kb,distance_m,trial_index,elapsed_s
std::string format_trials_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_trials_csv(std::string_view text);
std::vector<TrialRecord> load_trials_csv(const std::filesystem::path& path);

struct CorrelationReport {
    std::string label;
    double computed;
    std::optional<double> published;
    std::size_t pairs;
};

/// Size-vs-time over every record, size-vs-median over groups, and the same
/// two for distance when the records span more than one distance.
std::vector<CorrelationReport> correlations(const std::vector<TrialRecord>& records);

/// Truncates (not rounds) to `decimals` places, the convention of the
/// published summary table.
double truncate_decimals(double value, int decimals);

}  // namespace fatbeacon

#endif  // FATBEACON_BENCH_HPP
