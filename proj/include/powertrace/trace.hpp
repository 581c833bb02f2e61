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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace powertrace {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define POWERTRACE_ERROR(Name)                                                 \
    class Name : public Error {                                                \
      public:                                                                  \
        using Error::Error;                                                    \
    }

POWERTRACE_ERROR(FormatError);
POWERTRACE_ERROR(TimingError);
POWERTRACE_ERROR(ManifestError);
POWERTRACE_ERROR(RangeError);
POWERTRACE_ERROR(ConfigError);
POWERTRACE_ERROR(DetectionError);
POWERTRACE_ERROR(AlignmentError);
POWERTRACE_ERROR(ComparisonError);
POWERTRACE_ERROR(AggregationError);
POWERTRACE_ERROR(ValidationError);

#undef POWERTRACE_ERROR

/// Raised when marker detection or event segmentation cannot produce the
/// scheduled layout. Carries the number of markers actually found.
class SegmentationError : public Error {
  public:
    SegmentationError(const std::string &what, std::size_t found)
        : Error(what), found_(found) {}
    std::size_t found() const noexcept { return found_; }

  private:
    std::size_t found_;
};

/// The four monitored supply groups of the grouped-rail hardware setup.
enum class RailKind { Rail3V3, Rail5V, Rail12VMb, Rail12VCpu };

inline constexpr std::array<RailKind, 4> kAllRails = {
    RailKind::Rail3V3, RailKind::Rail5V, RailKind::Rail12VMb,
    RailKind::Rail12VCpu};

/// Short lowercase name used in file formats: "3v3", "5v", "12v_mb", "12v_cpu".
std::string_view to_string(RailKind rail);
std::optional<RailKind> parse_rail(std::string_view name);
/// Nominal DC level of the rail in volts.
double nominal_voltage(RailKind rail);

enum class MachineState { PreInfection, PostInfection, PostInfectionReboot };

inline constexpr std::array<MachineState, 3> kAllStates = {
    MachineState::PreInfection, MachineState::PostInfection,
    MachineState::PostInfectionReboot};

std::string_view to_string(MachineState state);
std::optional<MachineState> parse_state(std::string_view name);

/// BOOT covers both the clean boot and the post-infection reboot; the
/// machine state tells them apart.
enum class EventKind { Idle, OpenBrowser, Boot };

inline constexpr std::array<EventKind, 3> kAllEvents = {
    EventKind::Idle, EventKind::OpenBrowser, EventKind::Boot};

std::string_view to_string(EventKind event);
std::optional<EventKind> parse_event(std::string_view name);

/// Voltage and current of one rail, uniformly sampled. Sample k is taken at
/// k * sample_period seconds.
struct RailTrace {
    RailKind rail = RailKind::Rail3V3;
    double sample_period = 0.010;
    std::vector<double> voltage;
    std::vector<double> current;

    std::size_t size() const noexcept { return voltage.size(); }
    /// N * sample_period: a 3000-sample trace at 10 ms covers 30 s.
    double duration() const noexcept {
        return static_cast<double>(size()) * sample_period;
    }

    bool operator==(const RailTrace &) const = default;
};

/// Instantaneous power of one rail. Built by compute_power or by slicing
/// another PowerSeries.
struct PowerSeries {
    RailKind rail = RailKind::Rail3V3;
    double sample_period = 0.010;
    std::vector<double> power;
    /// Samples whose power came out negative (negative current readings).
    std::size_t negative_samples = 0;

    std::size_t size() const noexcept { return power.size(); }
    double duration() const noexcept {
        return static_cast<double>(size()) * sample_period;
    }
};

struct ScheduleEntry {
    MachineState state = MachineState::PreInfection;
    EventKind event = EventKind::Idle;

    auto operator<=>(const ScheduleEntry &) const = default;
};

/// Scripted sequence of (state, event) entries. Under the default pairing
/// scheme every entry is delimited by one opening and one closing marker.
struct RunSchedule {
    std::vector<ScheduleEntry> entries;
    std::size_t expected_marker_count = 18;

    bool operator==(const RunSchedule &) const = default;
};

/// Boot, idle, browser for each of the three machine states: 9 entries, 18
/// markers.
RunSchedule default_schedule();

struct CaptureRun {
    std::string run_id;
    std::string rootkit_label = "none";
    int dataset_index = 1;
    std::map<RailKind, RailTrace> rails;
    RunSchedule schedule = default_schedule();

    /// Period and length of the first rail; only meaningful on a valid run.
    double sample_period() const;
    std::size_t size() const;

    bool operator==(const CaptureRun &) const = default;
};

enum class ViolationKind {
    MissingRail,
    RailMismatch,
    ChannelLengthMismatch,
    RailLengthMismatch,
    PeriodMismatch,
    NonPositivePeriod,
    EmptyTrace,
    BadDatasetIndex,
    EmptySchedule,
    ScheduleOrder,
    MarkerCountMismatch,
};

struct Violation {
    ViolationKind kind;
    std::optional<RailKind> rail;
    std::string message;

    bool operator==(const Violation &) const = default;
};

/// Every invariant violation of the run. Empty when the run is well formed.
std::vector<Violation> validate_run(const CaptureRun &run);

/// Violation messages joined with "; ".
std::string describe(const std::vector<Violation> &violations);

} // namespace powertrace
