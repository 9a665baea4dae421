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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fatbeacon/bench.hpp"
#include "fatbeacon/raster.hpp"
#include "fatbeacon/stats.hpp"
#include "test_support.hpp"

using namespace fatbeacon;
using fatbeacon::testing::brute_pearson;
using fatbeacon::testing::fixture;
using fatbeacon::testing::sort_slice_trimmed_mean;

namespace {

StatsError::Kind stats_error_kind(auto&& fn)
{
    try {
        fn();
    } catch (const StatsError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no StatsError thrown";
    return StatsError::Kind::EmptyInput;
}

std::vector<double> column(const std::vector<TrialRecord>& records, int size_kb, double distance_m)
{
    std::vector<double> out;
    for (const auto& r : records) {
        if (r.size_kb == size_kb && r.distance_m == distance_m) out.push_back(r.elapsed_s);
    }
    return out;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(TrimmedMean, Examples)
{
    const std::vector<double> ten = {4.0498, 4.4163, 5.2194, 6.8424, 7.3336};
    EXPECT_NEAR(trimmed_mean(ten), 5.4927, 5e-5);
    EXPECT_DOUBLE_EQ(trimmed_mean(ten), (4.4163 + 5.2194 + 6.8424) / 3.0);
    EXPECT_EQ(trimmed_mean(std::vector<double>{1, 1, 1}), 1.0);
    EXPECT_EQ(stats_error_kind([] { trimmed_mean(std::vector<double>{5, 3}); }), StatsError::Kind::TooFewSamples);
}

TEST(TrimmedMean, MatchesSortAndSliceAndStaysInRange)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> s(3 + rng() % 48);
        for (auto& x : s) x = (rng() % 7 == 0) ? std::round(u(rng)) + 0.5 : u(rng);
        const double got = trimmed_mean(s);
        const double want = sort_slice_trimmed_mean(s);
        EXPECT_LE(fatbeacon::testing::ulp_distance(got, want), 1);
        EXPECT_GE(got, *std::min_element(s.begin(), s.end()));
        EXPECT_LE(got, *std::max_element(s.begin(), s.end()));
    }
}

TEST(Median, ExamplesAndPermutationInvariance)
{
    EXPECT_EQ(median(std::vector<double>{4.3513, 7.2030, 7.4392, 8.6729, 10.3577}), 7.4392);
    EXPECT_EQ(median(std::vector<double>{15.8346, 23.4155, 28.1433, 33.7344, 87.9002}), 28.1433);
    EXPECT_EQ(median(std::vector<double>{2}), 2.0);
    EXPECT_EQ(median(std::vector<double>{1, 4, 2, 3}), 2.5);
    EXPECT_EQ(stats_error_kind([] { median(std::vector<double>{}); }), StatsError::Kind::EmptyInput);

    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> s(1 + rng() % 30);
        for (auto& x : s) x = static_cast<double>(rng() % 100);
        const double m = median(s);
        std::shuffle(s.begin(), s.end(), rng);
        EXPECT_EQ(median(s), m);
    }
}

TEST(Pearson, ExamplesAndAffineInvariance)
{
    EXPECT_DOUBLE_EQ(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
    EXPECT_EQ(stats_error_kind([] { pearson(std::vector<double>{1, 2}, std::vector<double>{1}); }),
              StatsError::Kind::LengthMismatch);
    EXPECT_EQ(stats_error_kind([] { pearson(std::vector<double>{1, 1}, std::vector<double>{1, 2}); }),
              StatsError::Kind::ZeroVariance);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> x(2 + rng() % 40), y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] = g(rng);
            y[k] = 0.5 * x[k] + g(rng);
        }
        const double r = pearson(x, y);
        EXPECT_NEAR(r, brute_pearson(x, y), 1e-12);
        std::vector<double> ax(x), nx(x);
        for (std::size_t k = 0; k < x.size(); ++k) {
            ax[k] = 3.5 * x[k] + 100.0;
            nx[k] = -2.0 * x[k] + 1.0;
        }
        EXPECT_NEAR(pearson(ax, y), r, 1e-12);
        EXPECT_NEAR(pearson(nx, y), -r, 1e-12);
    }
}

TEST(Fixtures, TablesReproduce)
{
    const auto t2 = load_trials_csv(fixture("table2_times_1m.csv"));
    ASSERT_EQ(t2.size(), 25u);
    const double table1[] = {5.21, 8.82, 7.43, 15.18, 28.14};
    const int sizes[] = {10, 20, 40, 100, 200};
    const auto rows = aggregate(t2);
    ASSERT_EQ(rows.size(), 5u);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(rows[i].size_kb, sizes[i]);
        EXPECT_EQ(rows[i].n, 5);
        EXPECT_NEAR(truncate_decimals(rows[i].median_s, 2), table1[i], 1e-12);
        EXPECT_LE(rows[i].min_s, rows[i].median_s);
        EXPECT_LE(rows[i].median_s, rows[i].max_s);
        EXPECT_LE(rows[i].min_s, rows[i].trimmed_mean_s);
        EXPECT_LE(rows[i].trimmed_mean_s, rows[i].max_s);
    }
    // The printed 10 KB median disagrees with its own column.
    EXPECT_EQ(median(column(t2, 10, 1.0)), 5.2194);

    const auto c2 = correlations(t2);
    ASSERT_EQ(c2.size(), 2u);
    EXPECT_EQ(c2[0].label, "size_vs_time_trials");
    EXPECT_NEAR(c2[0].computed, 0.605216906894483, 1e-12);
    EXPECT_EQ(c2[0].pairs, 25u);
    EXPECT_NEAR(c2[1].computed, 0.988161616150834, 1e-12);
    EXPECT_EQ(*c2[1].published, 0.9468);

    const auto t3 = load_trials_csv(fixture("table3_distance_40kb.csv"));
    ASSERT_EQ(t3.size(), 20u);
    const auto c3 = correlations(t3);
    ASSERT_EQ(c3.size(), 2u);
    EXPECT_EQ(c3[0].label, "distance_vs_time_trials");
    EXPECT_NEAR(c3[0].computed, 0.1978367836058843, 1e-12);
    EXPECT_NEAR(c3[1].computed, 0.5614851307752052, 1e-12);
    EXPECT_EQ(*c3[1].published, 0.6851);
    const double table3_medians[] = {7.439, 6.718, 7.117, 8.075};
    const auto r3 = aggregate(t3);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(r3[i].median_s, table3_medians[i]);
}

TEST(Report, Shapes)
{
    const auto header = "protocol,size_kb,distance_m,n,median_s,trimmed_mean_s,min_s,max_s";
    EXPECT_EQ(emit_report({}, ReportFormat::Csv), std::string(header) + "\n");
    const AggregateRow row{Protocol::BLE4, 40, 1.0, 5, 7.4392, 7.7717, 4.3513, 10.3577};
    const auto csv = lines_of(emit_report({row}, ReportFormat::Csv));
    ASSERT_EQ(csv.size(), 2u);
    EXPECT_EQ(csv[1], "BLE4,40,1.0000,5,7.4392,7.7717,4.3513,10.3577");
    const AggregateRow pair{Protocol::G2, 10, 1.0, 2, 5.0, std::nan(""), 4.0, 6.0};
    EXPECT_EQ(lines_of(emit_report({pair}, ReportFormat::Csv))[1], "2G,10,1.0000,2,5.0000,NA,4.0000,6.0000");
    const auto md = lines_of(emit_report({row}, ReportFormat::Markdown));
    ASSERT_EQ(md.size(), 3u);
    EXPECT_EQ(md[0].rfind("| protocol | size_kb |", 0), 0u);
    EXPECT_EQ(md[2], "| BLE4 | 40 | 1.0000 | 5 | 7.4392 | 7.7717 | 4.3513 | 10.3577 |");
}

TEST(Report, MarkdownMediansMatchPublishedTable)
{
    const auto md = lines_of(emit_report(aggregate(load_trials_csv(fixture("table2_times_1m.csv"))), ReportFormat::Markdown));
    ASSERT_EQ(md.size(), 7u);
    const double table1[] = {5.21, 8.82, 7.43, 15.18, 28.14};
    for (int i = 0; i < 5; ++i) {
        std::vector<std::string> cells;
        std::istringstream in(md[2 + i]);
        for (std::string c; std::getline(in, c, '|');) cells.push_back(c);
        EXPECT_NEAR(truncate_decimals(std::stod(cells[5]), 2), table1[i], 1e-12) << md[2 + i];
    }
}

TEST(Experiment, ShapeDeterminismAndContract)
{
    ExperimentConfig cfg;
    cfg.profile = calibrated_ble4().profile;
    cfg.base_seed = 77;
    const auto a = run_experiment(cfg);
    ASSERT_EQ(a.size(), 25u);
    EXPECT_EQ(a, run_experiment(cfg));
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].trial_index, static_cast<int>(i % 5) + 1);
        EXPECT_FALSE(a[i].error.has_value());
        EXPECT_GT(a[i].elapsed_s, 0.0);
    }
    // Seeds only matter where packets get lost.
    cfg.distances_m = {15.0};
    const auto lossy = run_experiment(cfg);
    EXPECT_EQ(lossy, run_experiment(cfg));
    cfg.base_seed = 78;
    EXPECT_NE(lossy, run_experiment(cfg));

    cfg.protocols = {Protocol::BLE4, Protocol::BLE5, Protocol::G2, Protocol::G3};
    cfg.distances_m = {1.0, 15.0};
    cfg.trials_per_cell = 3;
    const auto b = run_experiment(cfg);
    EXPECT_EQ(b.size(), 4u * 5u * 2u * 3u);

    cfg.trials_per_cell = 0;
    EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
}

TEST(Experiment, SimulatorErrorsBecomeFailedTrials)
{
    ExperimentConfig cfg;
    cfg.profile.noise_floor_dbm = 100.0;  // every packet lost
    cfg.sizes_kb = {10};
    cfg.trials_per_cell = 2;
    const auto r = run_experiment(cfg);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_TRUE(r[0].error.has_value());
    EXPECT_TRUE(aggregate(r).empty());
    const auto back = parse_trials_csv(format_trials_csv(r));
    EXPECT_TRUE(back[1].error.has_value());
}

TEST(Experiment, TrialSeedsDiffer)
{
    EXPECT_NE(trial_seed(1, Protocol::BLE4, 10, 1.0, 1), trial_seed(1, Protocol::BLE4, 10, 1.0, 2));
    EXPECT_NE(trial_seed(1, Protocol::BLE4, 10, 1.0, 1), trial_seed(1, Protocol::BLE4, 20, 1.0, 1));
    EXPECT_NE(trial_seed(1, Protocol::BLE4, 10, 1.0, 1), trial_seed(1, Protocol::BLE4, 10, 5.0, 1));
    EXPECT_NE(trial_seed(1, Protocol::BLE4, 10, 1.0, 1), trial_seed(2, Protocol::BLE4, 10, 1.0, 1));
    EXPECT_EQ(trial_seed(1, Protocol::BLE4, 10, 1.0, 1), trial_seed(1, Protocol::BLE4, 10, 1.0, 1));
}

TEST(Experiment, ConfigParsing)
{
    const auto cfg = parse_experiment_config("# sweep\nprotocols = BLE4, 2G\nsizes_kb=10,40\n"
                                             "distances_m=1,15\ntrials=4\nseed=12\n");
    EXPECT_EQ(cfg.protocols, (std::vector<Protocol>{Protocol::BLE4, Protocol::G2}));
    EXPECT_EQ(cfg.sizes_kb, (std::vector<int>{10, 40}));
    EXPECT_EQ(cfg.distances_m, (std::vector<double>{1.0, 15.0}));
    EXPECT_EQ(cfg.trials_per_cell, 4);
    EXPECT_EQ(cfg.base_seed, 12u);
    EXPECT_THROW(parse_experiment_config("trials"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_config("bogus=1"), std::invalid_argument);
}

TEST(TrialsCsv, RoundTripAndValidation)
{
    ExperimentConfig cfg;
    cfg.base_seed = 5;
    cfg.profile.noise_floor_dbm = -40.0;
    const auto records = run_experiment(cfg);
    EXPECT_EQ(parse_trials_csv(format_trials_csv(records)), records);

    const std::string header = "protocol,size_kb,distance_m,trial_index,elapsed_s\n";
    EXPECT_THROW(parse_trials_csv("a,b\n"), std::invalid_argument);
    EXPECT_THROW(parse_trials_csv(header + "BLE4,10,1,1,2\nBLE4,10,1,1,3\n"), std::invalid_argument);
    EXPECT_THROW(parse_trials_csv(header + "BLE4,10,1,0,2\n"), std::invalid_argument);
    EXPECT_THROW(parse_trials_csv(header + "BLE4,10,1,1,-2\n"), std::invalid_argument);
    EXPECT_THROW(parse_trials_csv(header + "BLE4,10,1,1\n"), std::invalid_argument);
    EXPECT_EQ(parse_trials_csv("# note\n" + header + "\nBLE4,10,1,1,2.5\n").size(), 1u);
}

TEST(Truncate, TableConvention)
{
    EXPECT_EQ(truncate_decimals(5.2194, 2), 5.21);
    EXPECT_EQ(truncate_decimals(7.4392, 2), 7.43);
    EXPECT_EQ(truncate_decimals(5.21, 2), 5.21);
    EXPECT_EQ(truncate_decimals(15.1869, 2), 15.18);
}

TEST(Coverage, Examples)
{
    RasterMask a(10, 10);
    for (std::size_t x = 0; x < 10; ++x) a.set(x, 4);  // a 10-pixel trail
    const auto same = coverage_diff(a, a);
    EXPECT_EQ(same.covered_fraction, 1.0);
    EXPECT_EQ(same.uncovered_fraction, 0.0);
    const auto none = coverage_diff(a, RasterMask(10, 10));
    EXPECT_EQ(none.covered_fraction, 0.0);
    EXPECT_EQ(none.uncovered_fraction, 1.0);

    RasterMask signal(10, 10);
    for (std::size_t y = 0; y < 10; ++y)
        for (std::size_t x = 0; x < 4; ++x) signal.set(x, y);
    const auto c = coverage_diff(a, signal);
    EXPECT_EQ(c.covered_fraction, 0.4);
    EXPECT_EQ(c.uncovered_fraction, 0.6);
    EXPECT_EQ(layer_intersection(a, signal).count(), 4u);

    EXPECT_THROW(coverage_diff(a, RasterMask(9, 10)), RasterError);
    EXPECT_THROW(coverage_diff(RasterMask(10, 10), signal), RasterError);
}

TEST(Coverage, FractionsSumToOne)
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const std::size_t w = 1 + rng() % 40, h = 1 + rng() % 40;
        RasterMask a(w, h), b(w, h);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                a.set(x, y, rng() % 3 == 0);
                b.set(x, y, rng() % 2 == 0);
            }
        a.set(0, 0);
        const auto c = coverage_diff(a, b);
        EXPECT_LE(std::abs(c.covered_fraction + c.uncovered_fraction - 1.0), std::nextafter(1.0, 2.0) - 1.0);
        EXPECT_GE(c.covered_fraction, 0.0);
        EXPECT_LE(c.covered_fraction, 1.0);
    }
}

TEST(Pbm, RoundTripAndErrors)
{
    RasterMask m(5, 3);
    m.set(1, 0);
    m.set(4, 2);
    EXPECT_EQ(parse_pbm(format_pbm(m)), m);
    EXPECT_EQ(parse_pbm("P1\n# c\n3 1\n1 0 1\n").count(), 2u);
    EXPECT_EQ(parse_pbm("P1 3 1 101").count(), 2u);
    EXPECT_THROW(parse_pbm("P4\n1 1\n1"), RasterError);
    EXPECT_THROW(parse_pbm("P1\n2 2\n1 0 1"), RasterError);
    EXPECT_THROW(parse_pbm("P1\n1 1\n2"), RasterError);
}
