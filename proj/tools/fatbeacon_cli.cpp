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

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "fatbeacon/beacon_frames.hpp"
#include "fatbeacon/bench.hpp"
#include "fatbeacon/html_bundler.hpp"
#include "fatbeacon/loopback.hpp"
#include "fatbeacon/radio_sim.hpp"
#include "fatbeacon/raster.hpp"
#include "fatbeacon/stats.hpp"

namespace fs = std::filesystem;
using namespace fatbeacon;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kScanTimeout = 3, kTransferFailure = 4 };

std::atomic<bool> g_stop{false};

void on_signal(int)
{
    g_stop = true;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_file(const fs::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<int> parse_sizes(const std::string& text)
{
    std::vector<int> sizes;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        sizes.push_back(std::stoi(item));
    }
    return sizes;
}

int run_bundle(const fs::path& in, const fs::path& root, const fs::path& out)
{
    const auto bundle = inline_bundle(read_file(in), directory_resolver(root.empty() ? in.parent_path() : root));
    write_file(out, bundle.html);
    std::cerr << "bundled " << bundle.size_bytes << " bytes, sha256 " << to_hex(bundle.content_hash) << '\n';
    return kOk;
}

int run_corpus(const std::string& sizes, const fs::path& out_dir)
{
    fs::create_directories(out_dir);
    const auto list = parse_sizes(sizes);
    for (const auto& bundle : generate_corpus(list)) {
        const auto path = out_dir / ("corpus_" + std::to_string(bundle.size_bytes / 1024) + "kb.html");
        write_file(path, bundle.html);
        std::cout << path.string() << ' ' << bundle.size_bytes << ' ' << to_hex(bundle.content_hash) << '\n';
    }
    return kOk;
}

int run_advertise(const fs::path& bundle_path, const LoopbackEndpoint& endpoint, const AdvertiserConfig& config,
                  const std::string& title, double duration_s)
{
    auto bundle = ContentBundle::from_html(read_file(bundle_path));
    Advertiser advertiser(std::move(bundle), config, endpoint, title);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    advertiser.start();
    std::cout << "advertising " << to_hex_line(advertiser.packet().bytes) << " on adv port " << endpoint.adv_port
              << ", serving on conn port " << advertiser.conn_port() << std::endl;

    const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration_s);
    while (!g_stop && (duration_s <= 0 || std::chrono::steady_clock::now() < until)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    advertiser.stop();
    std::cerr << "sent " << advertiser.advertisements_sent() << " advertisements, served "
              << advertiser.sessions_served() << " sessions\n";
    return kOk;
}

int run_scan(const LoopbackEndpoint& endpoint, double timeout_s, const std::string& profile_path, bool calibrated,
             double distance, std::optional<std::uint64_t> seed, const fs::path& out, bool log_sessions)
{
    ScanOptions options;
    options.timeout_s = timeout_s;
    options.distance_m = distance;
    if (!profile_path.empty()) {
        options.profile = load_profile(profile_path);
    } else if (calibrated) {
        options.profile = calibrated_ble4().profile;
    }
    if (options.profile && seed) {
        options.profile->rng_seed = *seed;
    }
    options.on_notify = [](const std::string& line) { std::cerr << line << std::endl; };
    if (log_sessions) {
        options.log = [](const std::string& line) { std::cerr << line << '\n'; };
    }

    const auto result = scan_and_fetch(endpoint, options);
    if (out.empty()) {
        std::cout << result.content;
    } else {
        write_file(out, result.content);
    }
    std::cerr << "fetched " << result.content.size() << " bytes in " << std::fixed << std::setprecision(4)
              << result.elapsed_s << " s, sha256 " << to_hex(sha256(result.content)) << '\n';
    return kOk;
}

int run_bench(const fs::path& config_path, std::optional<std::uint64_t> seed, const fs::path& out)
{
    auto config = parse_experiment_config(read_file(config_path), config_path.parent_path());
    if (seed) {
        config.base_seed = *seed;
    }
    const auto records = run_experiment(config);
    const auto csv = format_trials_csv(records);
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_file(out, csv);
    }
    return kOk;
}

int run_analyze(const fs::path& in, bool tables, bool corr, const std::string& format)
{
    const auto records = load_trials_csv(in);
    if (tables || !corr) {
        std::cout << emit_report(aggregate(records), format == "md" ? ReportFormat::Markdown : ReportFormat::Csv);
    }
    if (corr) {
        std::cout << "correlation,pairs,computed,published\n";
        for (const auto& c : correlations(records)) {
            std::cout << c.label << ',' << c.pairs << ',' << std::fixed << std::setprecision(4) << c.computed << ','
                      << (c.published ? std::to_string(*c.published).substr(0, 6) : std::string("NA")) << '\n';
        }
    }
    return kOk;
}

int run_coverage(const fs::path& trails, const fs::path& signal)
{
    const auto result = coverage_diff(load_pbm(trails), load_pbm(signal));
    std::cout << std::fixed << std::setprecision(4) << "covered_fraction=" << result.covered_fraction << '\n'
              << "uncovered_fraction=" << result.uncovered_fraction << '\n';
    return kOk;
}

int run_calibrate(const fs::path& out)
{
    const auto fit = calibrated_ble4();
    std::cerr << std::fixed << std::setprecision(4) << "setup_s=" << fit.setup_s << " rate_kb_per_s=" << fit.rate_kb_per_s
              << '\n';
    for (const auto& r : fit.residuals) {
        std::cerr << "size_kb=" << r.size_kb << " actual=" << r.actual_s << " predicted=" << r.predicted_s
                  << " rel_err=" << r.relative_error << '\n';
    }
    if (out.empty()) {
        std::cout << format_profile(fit.profile);
    } else {
        save_profile(fit.profile, out);
    }
    return kOk;
}

int run_frames(const fs::path& in)
{
    for (const auto& bytes : parse_hex_dump(read_file(in))) {
        const auto frame = classify_frame(bytes);
        std::cout << to_hex_line(bytes) << "  ->  ";
        if (const auto* url = std::get_if<EddystoneUrlFrame>(&frame)) {
            std::cout << "url " << url->url << " tx=" << url->tx_power_dbm << '\n';
        } else if (const auto* fat = std::get_if<FatBeaconFrame>(&frame)) {
            std::cout << "fatbeacon \"" << fat->title << "\" tx=" << fat->tx_power_dbm << '\n';
        } else {
            std::cout << "unknown\n";
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"FatBeacon emulator: bundle content, advertise and fetch over loopback, run the benchmark"};
    app.require_subcommand(1);

    std::string in, root, out, out_dir, sizes = "10,20,40,100,200";
    auto* bundle_cmd = app.add_subcommand("bundle", "Inline external CSS, JS and images into one HTML file");
    bundle_cmd->add_option("--in", in, "Input HTML")->required();
    bundle_cmd->add_option("--root", root, "Directory relative URLs resolve against (default: input's directory)");
    bundle_cmd->add_option("--out", out, "Output HTML")->required();

    auto* corpus_cmd = app.add_subcommand("corpus", "Write deterministic test documents of the given sizes");
    corpus_cmd->add_option("--sizes", sizes, "Comma-separated sizes in KB");
    corpus_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

    LoopbackEndpoint endpoint;
    AdvertiserConfig adv_config;
    std::string bundle_path, title, profile_path;
    double duration = 0.0, timeout = 10.0, distance = 1.0;
    std::optional<std::uint64_t> seed;
    bool calibrated = false, log_sessions = false;

    const auto add_endpoint = [&](CLI::App* cmd) {
        cmd->add_option("--adv-port", endpoint.adv_port, "Advertisement datagram port");
        cmd->add_option("--conn-port", endpoint.conn_port, "Content stream port");
    };

    auto* adv_cmd = app.add_subcommand("advertise", "Broadcast a FatBeacon frame and serve its content");
    adv_cmd->add_option("--bundle", bundle_path, "Atomic HTML file to serve")->required();
    add_endpoint(adv_cmd);
    adv_cmd->add_option("--interval-ms", adv_config.interval_ms, "Advertising interval");
    adv_cmd->add_option("--tx-power", adv_config.tx_power_dbm, "Calibrated TX power at 0 m (dBm)");
    adv_cmd->add_option("--title", title, "Advertised title (default: document <title>)");
    adv_cmd->add_option("--duration", duration, "Stop after this many seconds (default: until signalled)");

    auto* scan_cmd = app.add_subcommand("scan", "Wait for a FatBeacon, then fetch its content");
    add_endpoint(scan_cmd);
    scan_cmd->add_option("--timeout", timeout, "Scan timeout in seconds");
    scan_cmd->add_option("--profile", profile_path, "Link profile file; injects simulated air time");
    scan_cmd->add_flag("--calibrated", calibrated, "Use the built-in calibrated BLE4 profile");
    scan_cmd->add_option("--distance", distance, "Simulated distance in metres");
    scan_cmd->add_option("--seed", seed, "Seed for simulated retransmissions");
    scan_cmd->add_option("--out", out, "Write content here instead of stdout");
    scan_cmd->add_flag("--log", log_sessions, "Print session events (ts_ns state event) to stderr");

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark harness");
    bench_cmd->require_subcommand(1);
    std::string config_path, format = "csv", trails, signal;
    bool tables = false, corr = false;
    auto* bench_run = bench_cmd->add_subcommand("run", "Run a simulated experiment");
    bench_run->add_option("--config", config_path, "Experiment config (key=value)")->required();
    bench_run->add_option("--seed", seed, "Base seed");
    bench_run->add_option("--out", out, "Trial CSV output");
    auto* bench_analyze = bench_cmd->add_subcommand("analyze", "Aggregate a trial CSV");
    bench_analyze->add_option("--in", in, "Trial CSV")->required();
    bench_analyze->add_flag("--tables", tables, "Print aggregate rows");
    bench_analyze->add_flag("--correlations", corr, "Print Pearson coefficients");
    bench_analyze->add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));
    auto* bench_coverage = bench_cmd->add_subcommand("coverage", "Share of trail pixels inside signal coverage");
    bench_coverage->add_option("--trails", trails, "Trail mask (PBM P1)")->required();
    bench_coverage->add_option("--signal", signal, "Coverage mask (PBM P1)")->required();

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit the BLE4 link profile and print it");
    calibrate_cmd->add_option("--out", out, "Write the profile here instead of stdout");

    auto* frames_cmd = app.add_subcommand("frames", "Classify advertisement packets from a hex dump");
    frames_cmd->add_option("--in", in, "frames.hex file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*bundle_cmd) return run_bundle(in, root, out);
        if (*corpus_cmd) return run_corpus(sizes, out_dir);
        if (*adv_cmd) return run_advertise(bundle_path, endpoint, adv_config, title, duration);
        if (*scan_cmd) return run_scan(endpoint, timeout, profile_path, calibrated, distance, seed, out, log_sessions);
        if (*bench_run) return run_bench(config_path, seed, out);
        if (*bench_analyze) return run_analyze(in, tables, corr, format);
        if (*bench_coverage) return run_coverage(trails, signal);
        if (*calibrate_cmd) return run_calibrate(out);
        if (*frames_cmd) return run_frames(in);
    } catch (const NetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == NetError::Kind::ScanTimeout ? kScanTimeout : kFailure;
    } catch (const TransferError& e) {
        std::cerr << "transfer failed: " << e.what() << '\n';
        return kTransferFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
