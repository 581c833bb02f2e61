/*
 * SPDX-FileCopyrightText: Copyright 2026 The powertrace Authors
 * SPDX-License-Identifier: Apache-2.0
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

#include "powertrace/power.hpp"

#include <algorithm>
#include <cmath>

namespace powertrace {

PowerSeries compute_power(const RailTrace &trace) {
    PowerSeries out{trace.rail, trace.sample_period, {}, 0};
    const std::size_t n = std::min(trace.voltage.size(), trace.current.size());
    out.power.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.power[k] = trace.voltage[k] * trace.current[k];
        if (out.power[k] < 0.0)
            ++out.negative_samples;
    }
    return out;
}

std::map<RailKind, PowerSeries> compute_power(const CaptureRun &run) {
    std::map<RailKind, PowerSeries> out;
    for (const auto &[rail, trace] : run.rails)
        out.emplace(rail, compute_power(trace));
    return out;
}

std::size_t window_samples(double window_s, double sample_period) {
    // 0.3 / 0.1 counts as 3 samples, not 2.
    const double ratio = window_s / sample_period;
    const double whole = std::floor(ratio * (1.0 + 1e-9));
    return whole < 1.0 ? 1 : static_cast<std::size_t>(whole);
}

std::vector<double> windowed_means(std::span<const double> samples,
                                   std::size_t window) {
    std::vector<double> out;
    if (window == 0)
        return out;
    const std::size_t count = samples.size() / window;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        double sum = 0.0;
        for (std::size_t k = w * window; k < (w + 1) * window; ++k)
            sum += samples[k];
        out.push_back(sum / static_cast<double>(window));
    }
    return out;
}

std::vector<double> power_summary(const PowerSeries &series, double window_s) {
    return windowed_means(series.power,
                          window_samples(window_s, series.sample_period));
}

PowerSeries slice(const PowerSeries &series, std::size_t begin,
                  std::size_t end) {
    end = std::min(end, series.power.size());
    begin = std::min(begin, end);
    PowerSeries out{series.rail, series.sample_period, {}, 0};
    out.power.assign(series.power.begin() + static_cast<std::ptrdiff_t>(begin),
                     series.power.begin() + static_cast<std::ptrdiff_t>(end));
    out.negative_samples = static_cast<std::size_t>(
        std::count_if(out.power.begin(), out.power.end(),
                      [](double p) { return p < 0.0; }));
    return out;
}

} // namespace powertrace
