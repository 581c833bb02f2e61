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

#pragma once

#include "powertrace/trace.hpp"

#include <optional>
#include <vector>

namespace powertrace {

/// Marker detection knobs. Thresholds are fractions of the smoothed series'
/// range, so they survive any positive affine change of units.
struct MarkerParams {
    RailKind marker_rail = RailKind::Rail12VCpu;
    double smooth_window = 0.1;
    double hi_fraction = 0.6;
    double lo_fraction = 0.4;
    double min_duration = 3.0;
    double max_duration = 8.0;

    /// Throws ConfigError unless 0 < lo < hi < 1, 0 < min < max and the
    /// smoothing window is positive.
    void validate() const;
};

/// One CPU-stress burst: samples [start_index, end_index).
struct Marker {
    std::size_t start_index = 0;
    std::size_t end_index = 0;
    double peak_power = 0.0;

    bool operator==(const Marker &) const = default;
};

using MarkerList = std::vector<Marker>;

/// Samples [start_index, end_index) of one rail's power that belong to one
/// scheduled event.
struct EventSegment {
    MachineState state = MachineState::PreInfection;
    EventKind event = EventKind::Idle;
    RailKind rail = RailKind::Rail3V3;
    std::size_t start_index = 0;
    std::size_t end_index = 0;

    std::size_t size() const noexcept { return end_index - start_index; }
    bool operator==(const EventSegment &) const = default;
};

/// Centered moving average; the window shrinks at the series edges.
std::vector<double> moving_average(const std::vector<double> &samples,
                                   std::size_t window);

/// Find marker plateaus by range-relative hysteresis on the smoothed series.
///
/// A candidate opens where the smoothed power rises above
/// min + hi_fraction * range and closes where it drops below
/// min + lo_fraction * range. Its edges are then moved onto the raw series:
/// within one smoothing window of each crossing, to the outermost raw samples
/// at or above the midpoint of the two thresholds. Candidates whose duration
/// falls outside [min_duration, max_duration] are dropped.
///
/// Throws DetectionError on a series shorter than smooth_window +
/// max_duration or without dynamic range.
MarkerList detect_markers(const PowerSeries &series, const MarkerParams &params);

/// detect_markers on the run's marker rail. Throws SegmentationError when
/// fewer markers than the schedule expects are found.
MarkerList detect_run_markers(const CaptureRun &run, const MarkerParams &params);

/// Cut the run into one segment per schedule entry and rail. Entry k spans
/// the samples strictly between markers 2k and 2k+1. Ordered by entry, then
/// rail.
std::vector<EventSegment> segment_events(const CaptureRun &run,
                                         const MarkerList &markers);

std::optional<EventSegment>
find_segment(const std::vector<EventSegment> &segments, MachineState state,
             EventKind event, RailKind rail);

} // namespace powertrace
