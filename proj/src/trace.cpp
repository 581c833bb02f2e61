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

#include "powertrace/trace.hpp"

#include <algorithm>
#include <cmath>

namespace powertrace {

namespace {

constexpr std::array<std::string_view, 4> kRailNames = {"3v3", "5v", "12v_mb",
                                                        "12v_cpu"};
constexpr std::array<double, 4> kRailVolts = {3.3, 5.0, 12.0, 12.0};
constexpr std::array<std::string_view, 3> kStateNames = {"pre", "post",
                                                         "post_reboot"};
constexpr std::array<std::string_view, 3> kEventNames = {"idle", "open_browser",
                                                         "boot"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N> &names,
                           std::string_view name) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == name)
            return static_cast<Enum>(i);
    return std::nullopt;
}

} // namespace

std::string_view to_string(RailKind rail) {
    return kRailNames[static_cast<std::size_t>(rail)];
}

std::optional<RailKind> parse_rail(std::string_view name) {
    return lookup<RailKind>(kRailNames, name);
}

double nominal_voltage(RailKind rail) {
    return kRailVolts[static_cast<std::size_t>(rail)];
}

std::string_view to_string(MachineState state) {
    return kStateNames[static_cast<std::size_t>(state)];
}

std::optional<MachineState> parse_state(std::string_view name) {
    return lookup<MachineState>(kStateNames, name);
}

std::string_view to_string(EventKind event) {
    return kEventNames[static_cast<std::size_t>(event)];
}

std::optional<EventKind> parse_event(std::string_view name) {
    return lookup<EventKind>(kEventNames, name);
}

RunSchedule default_schedule() {
    RunSchedule schedule;
    for (MachineState state : kAllStates)
        for (EventKind event :
             {EventKind::Boot, EventKind::Idle, EventKind::OpenBrowser})
            schedule.entries.push_back({state, event});
    schedule.expected_marker_count = 2 * schedule.entries.size();
    return schedule;
}

double CaptureRun::sample_period() const {
    return rails.empty() ? 0.0 : rails.begin()->second.sample_period;
}

std::size_t CaptureRun::size() const {
    return rails.empty() ? 0 : rails.begin()->second.size();
}

std::vector<Violation> validate_run(const CaptureRun &run) {
    std::vector<Violation> out;
    auto add = [&](ViolationKind kind, std::optional<RailKind> rail,
                   std::string msg) {
        out.push_back({kind, rail, std::move(msg)});
    };

    for (RailKind rail : kAllRails)
        if (!run.rails.contains(rail))
            add(ViolationKind::MissingRail, rail,
                "missing rail " + std::string(to_string(rail)));

    const RailTrace *reference = nullptr;
    for (const auto &[key, trace] : run.rails) {
        const std::string name(to_string(key));
        if (trace.rail != key)
            add(ViolationKind::RailMismatch, key,
                "rail " + name + " stores a trace labelled " +
                    std::string(to_string(trace.rail)));
        if (!(trace.sample_period > 0.0) || !std::isfinite(trace.sample_period))
            add(ViolationKind::NonPositivePeriod, key,
                "rail " + name + " has a non-positive sample period");
        if (trace.voltage.size() != trace.current.size())
            add(ViolationKind::ChannelLengthMismatch, key,
                "rail " + name + " has " +
                    std::to_string(trace.voltage.size()) +
                    " voltage samples but " +
                    std::to_string(trace.current.size()) + " current samples");
        if (trace.voltage.empty())
            add(ViolationKind::EmptyTrace, key, "rail " + name + " is empty");

        if (reference == nullptr) {
            reference = &trace;
            continue;
        }
        if (trace.voltage.size() != reference->voltage.size())
            add(ViolationKind::RailLengthMismatch, key,
                "rail " + name + " length " +
                    std::to_string(trace.voltage.size()) + " differs from " +
                    std::string(to_string(reference->rail)) + " length " +
                    std::to_string(reference->voltage.size()));
        if (trace.sample_period != reference->sample_period)
            add(ViolationKind::PeriodMismatch, key,
                "rail " + name + " sample period differs from " +
                    std::string(to_string(reference->rail)));
    }

    if (run.dataset_index < 1)
        add(ViolationKind::BadDatasetIndex, std::nullopt,
            "dataset_index must be positive");

    const auto &entries = run.schedule.entries;
    if (entries.empty())
        add(ViolationKind::EmptySchedule, std::nullopt,
            "schedule has no entries");
    if (!std::is_sorted(entries.begin(), entries.end(),
                        [](const ScheduleEntry &a, const ScheduleEntry &b) {
                            return a.state < b.state;
                        }))
        add(ViolationKind::ScheduleOrder, std::nullopt,
            "schedule entries are not ordered by machine state");
    if (run.schedule.expected_marker_count != 2 * entries.size())
        add(ViolationKind::MarkerCountMismatch, std::nullopt,
            "expected_marker_count " +
                std::to_string(run.schedule.expected_marker_count) +
                " is not twice the " + std::to_string(entries.size()) +
                " schedule entries");
    return out;
}

std::string describe(const std::vector<Violation> &violations) {
    std::string out;
    for (const auto &v : violations) {
        if (!out.empty())
            out += "; ";
        out += v.message;
    }
    return out;
}

} // namespace powertrace
