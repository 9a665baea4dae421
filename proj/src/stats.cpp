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

#include "fatbeacon/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fatbeacon {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double value)
    {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            compensation_ += (sum_ - t) + value;
        } else {
            compensation_ += (value - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

// Shewchuk's non-overlapping partials; value() is the correctly rounded sum.
class ExactSum {
public:
    void add(double x)
    {
        std::size_t kept = 0;
        for (double y : partials_) {
            if (std::abs(x) < std::abs(y)) {
                std::swap(x, y);
            }
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) {
                partials_[kept++] = lo;
            }
            x = hi;
        }
        partials_.resize(kept);
        partials_.push_back(x);
    }

    double value() const
    {
        if (partials_.empty()) {
            return 0.0;
        }
        auto i = partials_.size() - 1;
        double hi = partials_[i];
        double lo = 0.0;
        while (i > 0) {
            const double x = hi;
            const double y = partials_[--i];
            hi = x + y;
            lo = y - (hi - x);
            if (lo != 0.0) {
                break;
            }
        }
        // Round half to even across the remaining partials.
        if (i > 0 && ((lo < 0.0 && partials_[i - 1] < 0.0) || (lo > 0.0 && partials_[i - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            if (y == x - hi) {
                hi = x;
            }
        }
        return hi;
    }

private:
    std::vector<double> partials_;
};

}  // namespace

double mean(std::span<const double> samples)
{
    if (samples.empty()) {
        throw StatsError(StatsError::Kind::EmptyInput, "mean of an empty sample");
    }
    CompensatedSum sum;
    for (const double v : samples) {
        sum.add(v);
    }
    return sum.value() / static_cast<double>(samples.size());
}

double median(std::span<const double> samples)
{
    if (samples.empty()) {
        throw StatsError(StatsError::Kind::EmptyInput, "median of an empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    const std::size_t mid = sorted.size() / 2;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
    const double upper = sorted[mid];
    if (sorted.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

double trimmed_mean(std::span<const double> samples)
{
    if (samples.size() < 3) {
        throw StatsError(StatsError::Kind::TooFewSamples, "trimmed mean needs at least three samples");
    }
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    // minmax_element picks the first minimum and the last maximum, so the two
    // indices differ even when every sample is equal.
    const auto skip_lo = lo - samples.begin();
    const auto skip_hi = hi - samples.begin();
    ExactSum sum;
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(samples.size()); ++i) {
        if (i != skip_lo && i != skip_hi) {
            sum.add(samples[static_cast<std::size_t>(i)]);
        }
    }
    return sum.value() / static_cast<double>(samples.size() - 2);
}

double pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw StatsError(StatsError::Kind::LengthMismatch, "pearson: inputs differ in length");
    }
    if (x.size() < 2) {
        throw StatsError(StatsError::Kind::TooFewSamples, "pearson needs at least two pairs");
    }
    const double mx = mean(x);
    const double my = mean(y);
    CompensatedSum sxx;
    CompensatedSum syy;
    CompensatedSum sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }
    if (sxx.value() == 0.0 || syy.value() == 0.0) {
        throw StatsError(StatsError::Kind::ZeroVariance, "pearson: an input has zero variance");
    }
    const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace fatbeacon
