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

#ifndef FATBEACON_STATS_HPP
#define FATBEACON_STATS_HPP

#include <span>
#include <stdexcept>
#include <string>

namespace fatbeacon {

class StatsError : public std::invalid_argument {
public:
    enum class Kind { EmptyInput, TooFewSamples, LengthMismatch, ZeroVariance };

    StatsError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Middle order statistic; mean of the two middle values for even counts.
double median(std::span<const double> samples);

/// Mean after dropping one minimum and one maximum occurrence. Needs >= 3 samples.
double trimmed_mean(std::span<const double> samples);

/// Pearson product-moment correlation, clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> samples);

}  // namespace fatbeacon

#endif  // FATBEACON_STATS_HPP
