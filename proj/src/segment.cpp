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

#include "powertrace/segment.hpp"

#include "powertrace/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace powertrace {

void MarkerParams::validate() const {
    if (!(lo_fraction > 0.0 && lo_fraction < hi_fraction && hi_fraction < 1.0))
        throw ConfigError("marker thresholds need 0 < lo < hi < 1");
    if (!(min_duration > 0.0 && min_duration < max_duration))
        throw ConfigError("marker durations need 0 < min < max");
    if (!(smooth_window > 0.0))
        throw ConfigError("smooth_window must be positive");
}

std::vector<double> moving_average(const std::vector<double> &samples,
                                   std::size_t window) {
    const std::size_t n = samples.size();
    std::vector<double> out(n);
    const std::size_t before = window / 2;
    const std::size_t after = window - before; // exclusive
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k >= before ? k - before : 0;
        const std::size_t hi = std::min(n, k + after);
        double sum = 0.0;
        for (std::size_t j = lo; j < hi; ++j)
            sum += samples[j];
        out[k] = sum / static_cast<double>(hi - lo);
    }
    return out;
}

MarkerList detect_markers(const PowerSeries &series,
                          const MarkerParams &params) {
    params.validate();
    const double period = series.sample_period;
    const std::size_t smooth = window_samples(params.smooth_window, period);
    const std::size_t longest = window_samples(params.max_duration, period);
    const std::vector<double> &raw = series.power;
    const std::size_t n = raw.size();
    if (n < smooth + longest)
        throw DetectionError("series of " + std::to_string(n) +
                             " samples is shorter than smooth_window + "
                             "max_duration (" +
                             std::to_string(smooth + longest) + " samples)");

    const std::vector<double> smoothed = moving_average(raw, smooth);
    const auto [min_it, max_it] =
        std::minmax_element(smoothed.begin(), smoothed.end());
    const double lo = *min_it;
    const double range = *max_it - lo;
    const double scale = std::max({std::fabs(*min_it), std::fabs(*max_it),
                                   std::numeric_limits<double>::min()});
    if (!(range > 1e-9 * scale))
        throw DetectionError("no dynamic range");

    const double hi_level = lo + params.hi_fraction * range;
    const double lo_level = lo + params.lo_fraction * range;
    const double mid_level = 0.5 * (hi_level + lo_level);

    MarkerList markers;
    auto emit = [&](std::size_t open, std::size_t close) {
        std::size_t start = open;
        const std::size_t start_floor = open >= smooth ? open - smooth : 0;
        while (start > start_floor && raw[start - 1] >= mid_level)
            --start;
        std::size_t end = close;
        const std::size_t end_floor =
            std::max(start + 1, close >= smooth ? close - smooth : 0);
        while (end > end_floor && raw[end - 1] < mid_level)
            --end;

        const double duration = static_cast<double>(end - start) * period;
        if (duration < params.min_duration || duration > params.max_duration)
            return;
        const double peak = *std::max_element(
            raw.begin() + static_cast<std::ptrdiff_t>(start),
            raw.begin() + static_cast<std::ptrdiff_t>(end));
        markers.push_back({start, end, peak});
    };

    bool open = false;
    std::size_t opened_at = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!open && smoothed[k] > hi_level) {
            open = true;
            opened_at = k;
        } else if (open && smoothed[k] < lo_level) {
            open = false;
            emit(opened_at, k);
        }
    }
    if (open)
        emit(opened_at, n);
    return markers;
}

MarkerList detect_run_markers(const CaptureRun &run,
                              const MarkerParams &params) {
    auto it = run.rails.find(params.marker_rail);
    if (it == run.rails.end())
        throw DetectionError("run has no marker rail " +
                             std::string(to_string(params.marker_rail)));
    MarkerList markers = detect_markers(compute_power(it->second), params);
    const std::size_t expected = run.schedule.expected_marker_count;
    if (markers.size() < expected)
        throw SegmentationError("expected " + std::to_string(expected) +
                                    " markers, found " +
                                    std::to_string(markers.size()),
                                markers.size());
    return markers;
}

std::vector<EventSegment> segment_events(const CaptureRun &run,
                                         const MarkerList &markers) {
    const std::size_t expected = run.schedule.expected_marker_count;
    if (markers.size() != expected)
        throw SegmentationError("expected " + std::to_string(expected) +
                                    ", found " + std::to_string(markers.size()),
                                markers.size());
    const auto &entries = run.schedule.entries;
    if (2 * entries.size() != expected)
        throw SegmentationError("schedule of " + std::to_string(entries.size()) +
                                    " entries cannot pair " +
                                    std::to_string(expected) + " markers",
                                markers.size());

    std::vector<EventSegment> out;
    out.reserve(entries.size() * run.rails.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const std::size_t start = markers[2 * k].end_index;
        const std::size_t end = markers[2 * k + 1].start_index;
        if (end <= start)
            throw SegmentationError(
                "schedule entry " + std::to_string(k) + " (" +
                    std::string(to_string(entries[k].state)) + ", " +
                    std::string(to_string(entries[k].event)) +
                    ") has an empty segment",
                markers.size());
        for (const auto &[rail, trace] : run.rails)
            out.push_back({entries[k].state, entries[k].event, rail, start, end});
    }
    return out;
}

std::optional<EventSegment>
find_segment(const std::vector<EventSegment> &segments, MachineState state,
             EventKind event, RailKind rail) {
    for (const auto &s : segments)
        if (s.state == state && s.event == event && s.rail == rail)
            return s;
    return std::nullopt;
}

} // namespace powertrace
