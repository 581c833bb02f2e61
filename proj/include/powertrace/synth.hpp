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

#include "powertrace/segment.hpp"
#include "powertrace/trace.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace powertrace {

/// Portable Gaussian stream.
///
/// Uniforms come from std::mt19937_64 (the reference MT19937-64 of
/// Matsumoto and Nishimura) seeded with the 64-bit seed: u = (word >> 11) *
/// 2^-53. Each normal variate consumes two uniforms u1, u2 and is
/// sqrt(-2 ln(1 - u1)) * cos(2 pi u2). Any language with an MT19937-64
/// implementation reproduces the same stream.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(1.0 - u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

  private:
    std::mt19937_64 engine_;
};

using RailEventKey = std::pair<RailKind, EventKind>;

struct InfectionEffect {
    /// Additive power per (rail, event), watts. Missing entries are zero.
    std::map<RailEventKey, double> delta_power;
    /// Events in affected states start this late, seconds.
    double lag = 0.0;
    /// Mean single-sample spikes per minute of event time.
    double spike_rate = 0.0;
    double spike_amplitude = 0.0;
    std::vector<RailKind> spike_rails = {RailKind::Rail12VMb,
                                         RailKind::Rail12VCpu};
    std::vector<MachineState> states = {MachineState::PostInfection,
                                        MachineState::PostInfectionReboot};

    double delta(RailKind rail, EventKind event) const;
    bool applies_to(MachineState state) const;
    bool spikes_on(RailKind rail) const;
};

/// Scripted testbed scenario. The run starts and ends with a gap at idle
/// power; every schedule entry is an opening marker, the event and a closing
/// marker, followed by a gap.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    double sample_period = 0.010;
    std::string rootkit_label = "synthetic";
    RunSchedule schedule = default_schedule();

    std::map<RailEventKey, double> baseline_power;
    std::map<RailKind, double> noise_sigma;
    double voltage_noise_sigma = 0.005;

    RailKind marker_rail = RailKind::Rail12VCpu;
    double marker_amplitude = 50.0;
    double marker_duration = 5.0;
    double gap_duration = 2.0;

    double idle_duration = 60.0;
    int ie_windows = 10;
    double ie_spacing = 5.0;
    std::map<RailKind, double> ie_step_power;
    double boot_duration = 40.0;
    /// Boot power ramps linearly from boot_ramp_floor * baseline up to the
    /// baseline over the first boot_ramp_fraction of the boot.
    double boot_ramp_fraction = 0.3;
    double boot_ramp_floor = 0.6;

    InfectionEffect infection;

    /// Defaults with every rail/event baseline, noise and step filled in.
    ScenarioConfig();

    double baseline(RailKind rail, EventKind event) const;
    /// Throws ConfigError on a violated invariant.
    void validate() const;
};

struct TruthEvent {
    ScheduleEntry entry;
    std::size_t start_index = 0;
    std::size_t end_index = 0;
    std::ptrdiff_t lag_samples = 0;
    std::map<RailKind, double> delta_w;
    std::size_t spikes = 0;
};

/// Everything the generator injected, in sample indices of the emitted run.
struct GroundTruth {
    std::size_t length = 0;
    MarkerList markers;
    std::vector<TruthEvent> events;
};

struct GeneratedRun {
    CaptureRun run;
    GroundTruth truth;
};

/// Same seed and config give bit-identical runs.
GeneratedRun generate_run(const ScenarioConfig &config);

struct DatasetOverride {
    /// Replaces the scenario's infection for this dataset when set.
    std::optional<InfectionEffect> infection;
};

/// Dataset k (0-based) uses seed + k and dataset_index k + 1. Overrides
/// apply positionally; missing ones leave the scenario untouched.
std::vector<GeneratedRun>
generate_ensemble(const ScenarioConfig &config, std::size_t n_datasets,
                  const std::vector<DatasetOverride> &overrides = {});

/// A scenario file: the scenario plus optional per-dataset overrides.
struct ScenarioFile {
    ScenarioConfig config;
    std::vector<DatasetOverride> overrides;
};

/// Parse a scenario JSON document. Missing keys keep their defaults. Throws
/// ConfigError on malformed input.
ScenarioFile parse_scenario(std::istream &in);

void write_ground_truth(std::ostream &out, const GroundTruth &truth);

} // namespace powertrace
