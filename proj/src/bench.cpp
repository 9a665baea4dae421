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

#include "fatbeacon/bench.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "fatbeacon/stats.hpp"

namespace fatbeacon {

namespace {

std::string trim_copy(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (true) {
        const auto at = text.find(sep, begin);
        parts.push_back(trim_copy(text.substr(begin, at == std::string_view::npos ? std::string_view::npos : at - begin)));
        if (at == std::string_view::npos) {
            break;
        }
        begin = at + 1;
    }
    return parts;
}

template <typename T>
T to_number(const std::string& text, std::string_view what)
{
    T out{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("bad " + std::string(what) + ": '" + text + "'");
    }
    return out;
}

std::string shortest(double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

std::string fixed4(double value)
{
    if (std::isnan(value)) {
        return "NA";
    }
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << value;
    return out.str();
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

LinkProfile ble5_profile(const LinkProfile& ble4)
{
    LinkProfile fast = ble4;
    fast.phy_rate_kbps *= 4.0;
    fast.setup_latency_s /= 4.0;
    fast.per_chunk_overhead_s /= 4.0;
    return fast;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir)
{
    ExperimentConfig config;
    std::istringstream lines{std::string(text)};
    std::string line;
    while (std::getline(lines, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim_copy(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("expected key=value: '" + line + "'");
        }
        const auto key = trim_copy(std::string_view(line).substr(0, eq));
        const auto value = trim_copy(std::string_view(line).substr(eq + 1));
        if (key == "protocols") {
            config.protocols.clear();
            for (const auto& p : split(value, ',')) config.protocols.push_back(parse_protocol(p));
        } else if (key == "sizes_kb") {
            config.sizes_kb.clear();
            for (const auto& s : split(value, ',')) config.sizes_kb.push_back(to_number<int>(s, "size"));
        } else if (key == "distances_m") {
            config.distances_m.clear();
            for (const auto& d : split(value, ',')) config.distances_m.push_back(to_number<double>(d, "distance"));
        } else if (key == "trials") {
            config.trials_per_cell = to_number<int>(value, "trials");
        } else if (key == "seed") {
            config.base_seed = to_number<std::uint64_t>(value, "seed");
        } else if (key == "profile") {
            config.profile = load_profile(base_dir / value);
        } else {
            throw std::invalid_argument("unknown experiment key '" + key + "'");
        }
    }
    return config;
}

std::uint64_t trial_seed(std::uint64_t base_seed, Protocol protocol, int size_kb, double distance_m, int trial_index)
{
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(protocol));
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(size_kb)));
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(distance_m));
    return splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(trial_index)));
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config)
{
    if (config.trials_per_cell < 1) {
        throw std::invalid_argument("trials_per_cell must be at least 1");
    }
    std::vector<TrialRecord> records;
    records.reserve(config.protocols.size() * config.sizes_kb.size() * config.distances_m.size() *
                    static_cast<std::size_t>(config.trials_per_cell));

    for (const auto protocol : config.protocols) {
        for (const int size_kb : config.sizes_kb) {
            for (const double distance : config.distances_m) {
                for (int trial = 1; trial <= config.trials_per_cell; ++trial) {
                    TrialRecord record{protocol, size_kb, distance, trial, 0.0, std::nullopt};
                    try {
                        switch (protocol) {
                        case Protocol::BLE4:
                        case Protocol::BLE5: {
                            LinkProfile profile = protocol == Protocol::BLE5 ? ble5_profile(config.profile) : config.profile;
                            profile.rng_seed = trial_seed(config.base_seed, protocol, size_kb, distance, trial);
                            if (size_kb < 0) {
                                throw std::invalid_argument("negative size");
                            }
                            record.elapsed_s =
                                simulate_transfer(profile, static_cast<std::size_t>(size_kb) * 1024, distance);
                            break;
                        }
                        case Protocol::G2:
                        case Protocol::G3:
                            record.elapsed_s = baseline_time(reference_baseline(protocol), size_kb);
                            break;
                        }
                    } catch (const std::exception& e) {
                        record.elapsed_s = 0.0;
                        record.error = e.what();
                    }
                    records.push_back(std::move(record));
                }
            }
        }
    }
    return records;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records)
{
    using Key = std::tuple<int, int, double>;
    std::map<Key, std::vector<double>> groups;
    for (const auto& r : records) {
        if (!r.error) {
            groups[{static_cast<int>(r.protocol), r.size_kb, r.distance_m}].push_back(r.elapsed_s);
        }
    }
    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, samples] : groups) {
        const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
        rows.push_back(AggregateRow{
            static_cast<Protocol>(std::get<0>(key)),
            std::get<1>(key),
            std::get<2>(key),
            static_cast<int>(samples.size()),
            median(samples),
            samples.size() >= 3 ? trimmed_mean(samples) : std::nan(""),
            *lo,
            *hi,
        });
    }
    return rows;
}

std::string emit_report(const std::vector<AggregateRow>& rows, ReportFormat format)
{
    static constexpr const char* kColumns[] = {"protocol", "size_kb", "distance_m", "n",
                                               "median_s", "trimmed_mean_s", "min_s", "max_s"};
    const auto fields = [](const AggregateRow& row) {
        return std::vector<std::string>{to_string(row.protocol), std::to_string(row.size_kb), fixed4(row.distance_m),
                                        std::to_string(row.n),   fixed4(row.median_s),        fixed4(row.trimmed_mean_s),
                                        fixed4(row.min_s),       fixed4(row.max_s)};
    };

    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        for (std::size_t i = 0; i < std::size(kColumns); ++i) {
            out << (i ? "," : "") << kColumns[i];
        }
        out << '\n';
        for (const auto& row : rows) {
            const auto f = fields(row);
            for (std::size_t i = 0; i < f.size(); ++i) {
                out << (i ? "," : "") << f[i];
            }
            out << '\n';
        }
        return out.str();
    }

    out << '|';
    for (const auto* c : kColumns) out << ' ' << c << " |";
    out << "\n|";
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i < 2 ? " --- |" : " ---: |");
    out << '\n';
    for (const auto& row : rows) {
        out << '|';
        for (const auto& f : fields(row)) out << ' ' << f << " |";
        out << '\n';
    }
    return out.str();
}

std::string format_trials_csv(const std::vector<TrialRecord>& records)
{
    std::ostringstream out;
    out << "protocol,size_kb,distance_m,trial_index,elapsed_s\n";
    for (const auto& r : records) {
        out << to_string(r.protocol) << ',' << r.size_kb << ',' << shortest(r.distance_m) << ',' << r.trial_index << ','
            << (r.error ? std::string("nan") : shortest(r.elapsed_s)) << '\n';
    }
    return out.str();
}

std::vector<TrialRecord> parse_trials_csv(std::string_view text)
{
    std::vector<TrialRecord> records;
    std::istringstream lines{std::string(text)};
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        const auto content = trim_copy(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        const auto cells = split(content, ',');
        if (!header_seen) {
            if (cells != std::vector<std::string>{"protocol", "size_kb", "distance_m", "trial_index", "elapsed_s"}) {
                throw std::invalid_argument("trial CSV header must be protocol,size_kb,distance_m,trial_index,elapsed_s");
            }
            header_seen = true;
            continue;
        }
        if (cells.size() != 5) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 5 fields");
        }
        TrialRecord r;
        r.protocol = parse_protocol(cells[0]);
        r.size_kb = to_number<int>(cells[1], "size_kb");
        r.distance_m = to_number<double>(cells[2], "distance_m");
        r.trial_index = to_number<int>(cells[3], "trial_index");
        if (cells[4] == "nan") {
            r.error = "failed trial";
        } else {
            r.elapsed_s = to_number<double>(cells[4], "elapsed_s");
            if (r.elapsed_s < 0.0) {
                throw std::invalid_argument("line " + std::to_string(line_no) + ": negative elapsed time");
            }
        }
        if (r.trial_index < 1) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": trial_index must be >= 1");
        }
        const bool duplicate = std::any_of(records.begin(), records.end(), [&](const TrialRecord& o) {
            return o.protocol == r.protocol && o.size_kb == r.size_kb && o.distance_m == r.distance_m &&
                   o.trial_index == r.trial_index;
        });
        if (duplicate) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": duplicate trial index in group");
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<TrialRecord> load_trials_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open " + path.string());
    }
    std::stringstream text;
    text << in.rdbuf();
    return parse_trials_csv(text.str());
}

std::vector<CorrelationReport> correlations(const std::vector<TrialRecord>& records)
{
    std::vector<CorrelationReport> out;
    std::vector<double> sizes, distances, times;
    for (const auto& r : records) {
        if (!r.error) {
            sizes.push_back(r.size_kb);
            distances.push_back(r.distance_m);
            times.push_back(r.elapsed_s);
        }
    }
    const auto rows = aggregate(records);
    std::vector<double> row_sizes, row_distances, row_medians;
    for (const auto& row : rows) {
        row_sizes.push_back(row.size_kb);
        row_distances.push_back(row.distance_m);
        row_medians.push_back(row.median_s);
    }

    const auto try_add = [&](std::string label, const std::vector<double>& x, const std::vector<double>& y,
                             std::optional<double> published) {
        try {
            out.push_back({std::move(label), pearson(x, y), published, x.size()});
        } catch (const std::invalid_argument&) {
            // Constant axis: nothing to correlate.
        }
    };
    try_add("size_vs_time_trials", sizes, times, 0.9468);
    try_add("size_vs_time_medians", row_sizes, row_medians, 0.9468);
    try_add("distance_vs_time_trials", distances, times, 0.6851);
    try_add("distance_vs_time_medians", row_distances, row_medians, 0.6851);
    return out;
}

double truncate_decimals(double value, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    // Nudge by a relative epsilon so 5.21 stored as 5.2099999... stays 5.21.
    return std::trunc(value * scale * (1.0 + 1e-12)) / scale;
}

}  // namespace fatbeacon
