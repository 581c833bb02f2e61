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

#include "powertrace/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

using nlohmann::json;

namespace powertrace {

namespace {

// Seed offset of the spike stream, so spikes never perturb the noise stream.
constexpr std::uint64_t kSpikeStreamSalt = 0x9E3779B97F4A7C15ULL;

std::size_t samples_for(double seconds, double period) {
    return static_cast<std::size_t>(std::llround(seconds / period));
}

struct Block {
    enum class Kind { Gap, Marker, Event } kind;
    std::size_t length;
    std::size_t entry = 0;
};

} // namespace

double InfectionEffect::delta(RailKind rail, EventKind event) const {
    auto it = delta_power.find({rail, event});
    return it == delta_power.end() ? 0.0 : it->second;
}

bool InfectionEffect::applies_to(MachineState state) const {
    return std::find(states.begin(), states.end(), state) != states.end();
}

bool InfectionEffect::spikes_on(RailKind rail) const {
    return std::find(spike_rails.begin(), spike_rails.end(), rail) !=
           spike_rails.end();
}

ScenarioConfig::ScenarioConfig() {
    struct RailDefaults {
        RailKind rail;
        double idle, boot, step, sigma;
    };
    constexpr RailDefaults defaults[] = {
        {RailKind::Rail3V3, 8.0, 7.0, 0.05, 0.02},
        {RailKind::Rail5V, 12.0, 10.0, 0.2, 0.05},
        {RailKind::Rail12VMb, 15.0, 18.0, 0.3, 0.1},
        {RailKind::Rail12VCpu, 20.0, 25.0, 1.0, 0.2},
    };
    for (const auto &d : defaults) {
        baseline_power[{d.rail, EventKind::Idle}] = d.idle;
        baseline_power[{d.rail, EventKind::OpenBrowser}] = d.idle;
        baseline_power[{d.rail, EventKind::Boot}] = d.boot;
        ie_step_power[d.rail] = d.step;
        noise_sigma[d.rail] = d.sigma;
    }
}

double ScenarioConfig::baseline(RailKind rail, EventKind event) const {
    auto it = baseline_power.find({rail, event});
    if (it == baseline_power.end())
        throw ConfigError("no baseline power for rail " +
                          std::string(to_string(rail)) + ", event " +
                          std::string(to_string(event)));
    return it->second;
}

void ScenarioConfig::validate() const {
    auto positive = [](double v, const char *name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be positive");
    };
    positive(sample_period, "sample_period");
    positive(marker_duration, "marker_duration");
    positive(gap_duration, "gap_duration");
    positive(idle_duration, "idle_duration");
    positive(ie_spacing, "ie_spacing");
    positive(boot_duration, "boot_duration");
    positive(marker_amplitude, "marker_amplitude");
    if (ie_windows < 1)
        throw ConfigError("ie_windows must be at least 1");
    if (!(boot_ramp_fraction > 0.0 && boot_ramp_fraction <= 1.0))
        throw ConfigError("boot_ramp_fraction must lie in (0, 1]");
    if (!(boot_ramp_floor >= 0.0))
        throw ConfigError("boot_ramp_floor must be non-negative");
    if (!(voltage_noise_sigma >= 0.0))
        throw ConfigError("voltage_noise_sigma must be non-negative");
    for (RailKind rail : kAllRails) {
        for (EventKind event : kAllEvents)
            baseline(rail, event);
        auto sigma = noise_sigma.find(rail);
        if (sigma == noise_sigma.end() || !(sigma->second >= 0.0))
            throw ConfigError("noise_sigma for rail " +
                              std::string(to_string(rail)) +
                              " must be given and non-negative");
        if (!ie_step_power.contains(rail))
            throw ConfigError("ie_step_power missing for rail " +
                              std::string(to_string(rail)));
    }
    if (!(infection.spike_rate >= 0.0))
        throw ConfigError("spike_rate must be non-negative");
    if (!(infection.lag >= 0.0))
        throw ConfigError("infection lag must be non-negative");
    if (schedule.entries.empty() ||
        schedule.expected_marker_count != 2 * schedule.entries.size())
        throw ConfigError("schedule must pair two markers per entry");
}

namespace {

/// Noise-free event power at time t seconds after the event start. Times
/// before the start give the pre-event level.
double event_profile(const ScenarioConfig &c, RailKind rail, EventKind event,
                     double t) {
    const double base = c.baseline(rail, event);
    switch (event) {
    case EventKind::Idle:
        return base;
    case EventKind::OpenBrowser: {
        if (t < 0.0)
            return base;
        const double opened = std::min<double>(
            c.ie_windows, std::floor(t / c.ie_spacing) + 1.0);
        return base + opened * c.ie_step_power.at(rail);
    }
    case EventKind::Boot: {
        const double ramp = c.boot_ramp_fraction * c.boot_duration;
        const double progress = std::clamp(t / ramp, 0.0, 1.0);
        return base * (c.boot_ramp_floor + (1.0 - c.boot_ramp_floor) * progress);
    }
    }
    return base;
}

std::size_t event_samples(const ScenarioConfig &c, EventKind event) {
    switch (event) {
    case EventKind::Idle:
        return samples_for(c.idle_duration, c.sample_period);
    case EventKind::OpenBrowser:
        return samples_for(c.ie_windows * c.ie_spacing, c.sample_period);
    case EventKind::Boot:
        return samples_for(c.boot_duration, c.sample_period);
    }
    return 0;
}

} // namespace

GeneratedRun generate_run(const ScenarioConfig &c) {
    c.validate();
    const double period = c.sample_period;
    const std::size_t gap = samples_for(c.gap_duration, period);
    const std::size_t marker = samples_for(c.marker_duration, period);
    const auto &entries = c.schedule.entries;

    std::vector<Block> blocks{{Block::Kind::Gap, gap}};
    for (std::size_t e = 0; e < entries.size(); ++e) {
        blocks.push_back({Block::Kind::Marker, marker, e});
        blocks.push_back(
            {Block::Kind::Event, event_samples(c, entries[e].event), e});
        blocks.push_back({Block::Kind::Marker, marker, e});
        blocks.push_back({Block::Kind::Gap, gap, e});
    }

    GeneratedRun out;
    GroundTruth &truth = out.truth;
    const std::ptrdiff_t lag_samples = std::llround(c.infection.lag / period);

    // Noise-free power per rail, block by block.
    std::map<RailKind, std::vector<double>> power;
    std::size_t cursor = 0;
    for (const Block &b : blocks) {
        const std::size_t begin = cursor;
        cursor += b.length;
        if (b.kind == Block::Kind::Marker) {
            truth.markers.push_back(
                {begin, cursor,
                 c.baseline(c.marker_rail, EventKind::Idle) + c.marker_amplitude});
        } else if (b.kind == Block::Kind::Event) {
            const ScheduleEntry &entry = entries[b.entry];
            const bool infected = c.infection.applies_to(entry.state);
            TruthEvent te{entry, begin, cursor, infected ? lag_samples : 0, {}, 0};
            for (RailKind rail : kAllRails)
                te.delta_w[rail] =
                    infected ? c.infection.delta(rail, entry.event) : 0.0;
            truth.events.push_back(te);
        }
        for (RailKind rail : kAllRails) {
            auto &p = power[rail];
            const double idle = c.baseline(rail, EventKind::Idle);
            for (std::size_t k = 0; k < b.length; ++k) {
                double value = idle;
                if (b.kind == Block::Kind::Marker && rail == c.marker_rail) {
                    value = idle + c.marker_amplitude;
                } else if (b.kind == Block::Kind::Event) {
                    const TruthEvent &te = truth.events.back();
                    const auto shifted =
                        static_cast<std::ptrdiff_t>(k) - te.lag_samples;
                    value = event_profile(c, rail, te.entry.event,
                                          static_cast<double>(shifted) * period) +
                            te.delta_w.at(rail);
                }
                p.push_back(value);
            }
        }
    }
    truth.length = cursor;

    // Spikes: one uniform per event sample on spiking rails of infected states.
    if (c.infection.spike_rate > 0.0) {
        GaussianStream spikes(c.seed + kSpikeStreamSalt);
        const double probability = c.infection.spike_rate * period / 60.0;
        for (RailKind rail : kAllRails) {
            if (!c.infection.spikes_on(rail))
                continue;
            for (TruthEvent &te : truth.events) {
                if (!c.infection.applies_to(te.entry.state))
                    continue;
                for (std::size_t k = te.start_index; k < te.end_index; ++k) {
                    if (spikes.uniform() < probability) {
                        power[rail][k] += c.infection.spike_amplitude;
                        ++te.spikes;
                    }
                }
            }
        }
    }

    // Noise: per rail, per sample, a power variate then a voltage variate.
    GaussianStream noise(c.seed);
    CaptureRun &run = out.run;
    run.rootkit_label = c.rootkit_label;
    run.schedule = c.schedule;
    for (RailKind rail : kAllRails) {
        const double sigma = c.noise_sigma.at(rail);
        const double nominal = nominal_voltage(rail);
        RailTrace trace{rail, period, {}, {}};
        trace.voltage.resize(cursor);
        trace.current.resize(cursor);
        const auto &p = power[rail];
        for (std::size_t k = 0; k < cursor; ++k) {
            const double watts = p[k] + sigma * noise.normal();
            const double volts = nominal + c.voltage_noise_sigma * noise.normal();
            trace.voltage[k] = volts;
            trace.current[k] = watts / volts;
        }
        run.rails.emplace(rail, std::move(trace));
    }
    return out;
}

std::vector<GeneratedRun>
generate_ensemble(const ScenarioConfig &config, std::size_t n_datasets,
                  const std::vector<DatasetOverride> &overrides) {
    if (n_datasets < 1)
        throw ConfigError("an ensemble needs at least one dataset");
    std::vector<GeneratedRun> out;
    out.reserve(n_datasets);
    for (std::size_t k = 0; k < n_datasets; ++k) {
        ScenarioConfig c = config;
        c.seed = config.seed + k;
        if (k < overrides.size() && overrides[k].infection)
            c.infection = *overrides[k].infection;
        GeneratedRun g = generate_run(c);
        g.run.dataset_index = static_cast<int>(k + 1);
        g.run.run_id = c.rootkit_label + "-d" + std::to_string(k + 1);
        out.push_back(std::move(g));
    }
    return out;
}

namespace {

RailKind rail_from(const std::string &name) {
    auto rail = parse_rail(name);
    if (!rail)
        throw ConfigError("unknown rail '" + name + "'");
    return *rail;
}

void read_rail_event_map(const json &j, std::map<RailEventKey, double> &out) {
    for (const auto &[rail_name, events] : j.items()) {
        const RailKind rail = rail_from(rail_name);
        for (const auto &[event_name, value] : events.items()) {
            auto event = parse_event(event_name);
            if (!event)
                throw ConfigError("unknown event '" + event_name + "'");
            out[{rail, *event}] = value.get<double>();
        }
    }
}

void read_rail_map(const json &j, std::map<RailKind, double> &out) {
    for (const auto &[rail_name, value] : j.items())
        out[rail_from(rail_name)] = value.get<double>();
}

InfectionEffect infection_from(const json &j) {
    InfectionEffect e;
    if (j.is_null())
        return e;
    if (j.contains("delta_power"))
        read_rail_event_map(j.at("delta_power"), e.delta_power);
    if (j.contains("lag_s"))
        e.lag = j.at("lag_s").get<double>();
    if (j.contains("spike_rate"))
        e.spike_rate = j.at("spike_rate").get<double>();
    if (j.contains("spike_amplitude"))
        e.spike_amplitude = j.at("spike_amplitude").get<double>();
    if (j.contains("spike_rails")) {
        e.spike_rails.clear();
        for (const auto &name : j.at("spike_rails"))
            e.spike_rails.push_back(rail_from(name.get<std::string>()));
    }
    if (j.contains("states")) {
        e.states.clear();
        for (const auto &name : j.at("states")) {
            auto state = parse_state(name.get<std::string>());
            if (!state)
                throw ConfigError("unknown machine state '" +
                                  name.get<std::string>() + "'");
            e.states.push_back(*state);
        }
    }
    return e;
}

} // namespace

ScenarioFile parse_scenario(std::istream &in) {
    ScenarioFile file;
    ScenarioConfig &c = file.config;
    try {
        const json j = json::parse(in);
        auto number = [&](const char *key, double &field) {
            if (j.contains(key))
                field = j.at(key).get<double>();
        };
        if (j.contains("seed"))
            c.seed = j.at("seed").get<std::uint64_t>();
        number("sample_period", c.sample_period);
        if (j.contains("rootkit_label"))
            c.rootkit_label = j.at("rootkit_label").get<std::string>();
        if (j.contains("baseline_power"))
            read_rail_event_map(j.at("baseline_power"), c.baseline_power);
        if (j.contains("noise_sigma"))
            read_rail_map(j.at("noise_sigma"), c.noise_sigma);
        number("voltage_noise_sigma", c.voltage_noise_sigma);
        if (j.contains("marker_rail"))
            c.marker_rail = rail_from(j.at("marker_rail").get<std::string>());
        number("marker_amplitude", c.marker_amplitude);
        number("marker_duration", c.marker_duration);
        number("gap_duration", c.gap_duration);
        number("idle_duration", c.idle_duration);
        if (j.contains("ie_windows"))
            c.ie_windows = j.at("ie_windows").get<int>();
        number("ie_spacing", c.ie_spacing);
        if (j.contains("ie_step_power"))
            read_rail_map(j.at("ie_step_power"), c.ie_step_power);
        number("boot_duration", c.boot_duration);
        number("boot_ramp_fraction", c.boot_ramp_fraction);
        number("boot_ramp_floor", c.boot_ramp_floor);
        if (j.contains("infection"))
            c.infection = infection_from(j.at("infection"));
        if (j.contains("datasets"))
            for (const auto &d : j.at("datasets")) {
                DatasetOverride o;
                if (d.contains("infection"))
                    o.infection = infection_from(d.at("infection"));
                file.overrides.push_back(std::move(o));
            }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed scenario: ") + e.what());
    }
    c.validate();
    return file;
}

void write_ground_truth(std::ostream &out, const GroundTruth &truth) {
    json markers = json::array();
    for (const auto &m : truth.markers)
        markers.push_back({{"start_index", m.start_index},
                           {"end_index", m.end_index},
                           {"level_w", m.peak_power}});
    json events = json::array();
    for (const auto &e : truth.events) {
        json deltas = json::object();
        for (const auto &[rail, d] : e.delta_w)
            deltas[std::string(to_string(rail))] = d;
        events.push_back({{"state", std::string(to_string(e.entry.state))},
                          {"event", std::string(to_string(e.entry.event))},
                          {"start_index", e.start_index},
                          {"end_index", e.end_index},
                          {"lag_samples", e.lag_samples},
                          {"delta_w", deltas},
                          {"spikes", e.spikes}});
    }
    const json j = {{"length", truth.length},
                    {"markers", markers},
                    {"events", events}};
    out << j.dump(2) << '\n';
}

} // namespace powertrace
