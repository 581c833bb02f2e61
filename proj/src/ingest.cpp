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

#include "powertrace/ingest.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

using nlohmann::json;

namespace powertrace {

const char *const kSampleHeader = "t_s,v_3v3,i_3v3,v_5v,i_5v,v_12v_mb,i_12v_mb,"
                                  "v_12v_cpu,i_12v_cpu";

namespace {

constexpr std::size_t kColumns = 9;
// Step deviation tolerated between consecutive timestamps, in periods.
constexpr double kTimingTolerance = 0.10;

constexpr std::array<std::string_view, kColumns> kColumnNames = {
    "t_s",      "v_3v3",    "i_3v3",     "v_5v",     "i_5v",
    "v_12v_mb", "i_12v_mb", "v_12v_cpu", "i_12v_cpu"};

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

std::string_view chomp(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
        line.remove_suffix(1);
    return line;
}

double parse_number(std::string_view field, std::size_t line_no,
                    std::string_view column) {
    double value = 0.0;
    const char *first = field.data();
    const char *last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last ||
        !std::isfinite(value))
        throw FormatError("line " + std::to_string(line_no) + ", column " +
                          std::string(column) + ": not a decimal number: '" +
                          std::string(field) + "'");
    return value;
}

void put_number(std::ostream &out, double value) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.write(buf.data(), ptr - buf.data());
}

std::int64_t counts_for(double value, double units_per_count,
                        const CalibrationConfig &cal, RailKind rail,
                        std::string_view channel, std::size_t row) {
    const double counts = value / units_per_count;
    const double limit = std::ldexp(1.0, cal.adc_bits - 1);
    if (!(std::fabs(counts) <= limit))
        throw RangeError("value " + std::to_string(value) + " outside ADC range on rail " +
                         std::string(to_string(rail)) + ", channel " +
                         std::string(channel) + ", row " + std::to_string(row));
    return static_cast<std::int64_t>(std::round(counts));
}

json calibration_to_json(const CalibrationConfig &cal) {
    json v = json::object();
    json i = json::object();
    for (const auto &[rail, scale] : cal.voltage_scale)
        v[std::string(to_string(rail))] = scale;
    for (const auto &[rail, scale] : cal.current_scale)
        i[std::string(to_string(rail))] = scale;
    return {{"adc_bits", cal.adc_bits},
            {"adc_full_scale", cal.adc_full_scale},
            {"voltage_scale", v},
            {"current_scale", i}};
}

void read_scales(const json &j, std::map<RailKind, double> &scales) {
    if (!j.is_object())
        throw ManifestError("calibration scales must be an object keyed by rail");
    for (const auto &[name, value] : j.items()) {
        auto rail = parse_rail(name);
        if (!rail)
            throw ManifestError("unknown rail name in manifest: '" + name + "'");
        scales[*rail] = value.get<double>();
    }
}

CalibrationConfig calibration_from_json(const json &j) {
    CalibrationConfig cal;
    if (j.contains("adc_bits"))
        cal.adc_bits = j.at("adc_bits").get<int>();
    if (j.contains("adc_full_scale"))
        cal.adc_full_scale = j.at("adc_full_scale").get<double>();
    if (j.contains("voltage_scale"))
        read_scales(j.at("voltage_scale"), cal.voltage_scale);
    if (j.contains("current_scale"))
        read_scales(j.at("current_scale"), cal.current_scale);
    return cal;
}

} // namespace

CalibrationConfig::CalibrationConfig() {
    const double default_lsb = lsb();
    for (RailKind rail : kAllRails) {
        voltage_scale[rail] = 2.0 * default_lsb;
        current_scale[rail] = 1.0;
    }
}

double CalibrationConfig::lsb() const {
    return 2.0 * adc_full_scale / std::ldexp(1.0, adc_bits);
}

double CalibrationConfig::volts_per_count(RailKind rail) const {
    return voltage_scale.at(rail);
}

double CalibrationConfig::amps_per_count(RailKind rail) const {
    return lsb() * current_scale.at(rail);
}

void CalibrationConfig::validate() const {
    if (adc_bits < 8 || adc_bits > 24)
        throw ConfigError("adc_bits must lie in [8, 24], got " +
                          std::to_string(adc_bits));
    if (!(adc_full_scale > 0.0))
        throw ConfigError("adc_full_scale must be positive");
    for (RailKind rail : kAllRails) {
        const std::string name(to_string(rail));
        auto v = voltage_scale.find(rail);
        auto i = current_scale.find(rail);
        if (v == voltage_scale.end() || i == current_scale.end())
            throw ConfigError("calibration is missing rail " + name);
        if (!(v->second > 0.0) || !(i->second > 0.0))
            throw ConfigError("calibration scales for rail " + name +
                              " must be positive");
    }
}

double quantize(double value, const CalibrationConfig &cal) {
    return static_cast<double>(to_counts(value, cal)) * cal.lsb();
}

std::int64_t to_counts(double value, const CalibrationConfig &cal) {
    if (!(std::fabs(value) <= cal.adc_full_scale))
        throw RangeError("value " + std::to_string(value) +
                         " V outside the ADC range +/-" +
                         std::to_string(cal.adc_full_scale) + " V");
    // std::round breaks ties away from zero.
    return static_cast<std::int64_t>(std::round(value / cal.lsb()));
}

std::string_view to_string(SampleUnits units) {
    return units == SampleUnits::Raw ? "raw" : "engineering";
}

CaptureFiles CaptureFiles::from_stem(const std::filesystem::path &stem) {
    return {std::filesystem::path(stem.string() + ".csv"),
            std::filesystem::path(stem.string() + ".manifest.json")};
}

CaptureFiles CaptureFiles::resolve(const std::filesystem::path &path) {
    const std::string s = path.string();
    constexpr std::string_view manifest_suffix = ".manifest.json";
    if (s.ends_with(manifest_suffix))
        return from_stem(s.substr(0, s.size() - manifest_suffix.size()));
    if (s.ends_with(".csv"))
        return from_stem(s.substr(0, s.size() - 4));
    return from_stem(path);
}

Manifest parse_manifest(std::istream &in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception &e) {
        throw ManifestError(std::string("manifest is not valid JSON: ") +
                            e.what());
    }
    Manifest m;
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.rootkit_label = j.at("rootkit_label").get<std::string>();
        m.dataset_index = j.at("dataset_index").get<int>();
        m.sample_period_s = j.at("sample_period_s").get<double>();

        const auto units = j.at("units").get<std::string>();
        if (units == "engineering")
            m.units = SampleUnits::Engineering;
        else if (units == "raw")
            m.units = SampleUnits::Raw;
        else
            throw ManifestError("units must be \"engineering\" or \"raw\", got '" +
                                units + "'");

        m.schedule.entries.clear();
        for (const auto &entry : j.at("schedule")) {
            const auto state_name = entry.at("state").get<std::string>();
            const auto event_name = entry.at("event").get<std::string>();
            auto state = parse_state(state_name);
            auto event = parse_event(event_name);
            if (!state)
                throw ManifestError("unknown machine state in schedule: '" +
                                    state_name + "'");
            if (!event)
                throw ManifestError("unknown event in schedule: '" +
                                    event_name + "'");
            m.schedule.entries.push_back({*state, *event});
        }
        m.schedule.expected_marker_count =
            j.contains("expected_marker_count")
                ? j.at("expected_marker_count").get<std::size_t>()
                : 2 * m.schedule.entries.size();

        if (j.contains("calibration"))
            m.calibration = calibration_from_json(j.at("calibration"));
        if (j.contains("params"))
            for (const auto &[key, value] : j.at("params").items())
                m.params[key] = value.get<double>();
    } catch (const json::exception &e) {
        throw ManifestError(std::string("malformed manifest: ") + e.what());
    }
    if (!(m.sample_period_s > 0.0))
        throw ManifestError("sample_period_s must be positive");
    try {
        m.calibration.validate();
    } catch (const ConfigError &e) {
        throw ManifestError(e.what());
    }
    return m;
}

Manifest read_manifest(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ManifestError("cannot open manifest " + path.string());
    return parse_manifest(in);
}

void write_manifest(std::ostream &out, const Manifest &m) {
    json schedule = json::array();
    for (const auto &e : m.schedule.entries)
        schedule.push_back({{"state", std::string(to_string(e.state))},
                            {"event", std::string(to_string(e.event))}});
    json j = {{"run_id", m.run_id},
              {"rootkit_label", m.rootkit_label},
              {"dataset_index", m.dataset_index},
              {"sample_period_s", m.sample_period_s},
              {"units", std::string(to_string(m.units))},
              {"schedule", schedule},
              {"expected_marker_count", m.schedule.expected_marker_count},
              {"calibration", calibration_to_json(m.calibration)}};
    if (!m.params.empty())
        j["params"] = m.params;
    out << j.dump(2) << '\n';
}

CaptureRun parse_samples(std::istream &in, const Manifest &manifest,
                         const CalibrationConfig &cal) {
    cal.validate();
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("sample file is empty; expected header");

    const auto header = split(chomp(line));
    for (std::size_t c = 0; c < kColumns; ++c) {
        if (c >= header.size())
            throw FormatError("header is missing column '" +
                              std::string(kColumnNames[c]) + "'");
        if (header[c] != kColumnNames[c])
            throw FormatError("header column " + std::to_string(c + 1) +
                              " is '" + std::string(header[c]) +
                              "', expected '" + std::string(kColumnNames[c]) +
                              "'");
    }
    if (header.size() > kColumns)
        throw FormatError("header has unexpected extra column '" +
                          std::string(header[kColumns]) + "'");

    CaptureRun run;
    run.run_id = manifest.run_id;
    run.rootkit_label = manifest.rootkit_label;
    run.dataset_index = manifest.dataset_index;
    run.schedule = manifest.schedule;
    for (RailKind rail : kAllRails)
        run.rails[rail] = RailTrace{rail, manifest.sample_period_s, {}, {}};

    const bool raw = manifest.units == SampleUnits::Raw;
    const double period = manifest.sample_period_s;
    std::size_t line_no = 1;
    std::size_t sample = 0;
    double previous_t = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = chomp(line);
        if (text.empty())
            continue;
        const auto fields = split(text);
        if (fields.size() != kColumns)
            throw FormatError("line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) +
                              " fields, expected 9");

        const double t = parse_number(fields[0], line_no, kColumnNames[0]);
        if (sample > 0 &&
            std::fabs((t - previous_t) - period) > kTimingTolerance * period)
            throw TimingError("non-uniform timestamp at sample row " +
                              std::to_string(sample) + " (line " +
                              std::to_string(line_no) + "): step " +
                              std::to_string(t - previous_t) + " s");
        previous_t = t;

        for (std::size_t r = 0; r < kAllRails.size(); ++r) {
            const RailKind rail = kAllRails[r];
            double v = parse_number(fields[1 + 2 * r], line_no,
                                    kColumnNames[1 + 2 * r]);
            double i = parse_number(fields[2 + 2 * r], line_no,
                                    kColumnNames[2 + 2 * r]);
            if (raw) {
                v *= cal.volts_per_count(rail);
                i *= cal.amps_per_count(rail);
            }
            auto &trace = run.rails[rail];
            trace.voltage.push_back(v);
            trace.current.push_back(i);
        }
        ++sample;
    }
    if (sample == 0)
        throw FormatError("no samples");

    if (auto violations = validate_run(run); !violations.empty())
        throw ValidationError("invalid capture: " + describe(violations));
    return run;
}

void write_samples(std::ostream &out, const CaptureRun &run,
                   const CalibrationConfig &cal, SampleUnits units) {
    cal.validate();
    if (auto violations = validate_run(run); !violations.empty())
        throw ValidationError("cannot write invalid run: " +
                              describe(violations));

    const std::size_t n = run.size();
    const double period = run.sample_period();
    const bool raw = units == SampleUnits::Raw;

    std::ostringstream buf;
    buf << kSampleHeader << '\n';
    for (std::size_t k = 0; k < n; ++k) {
        put_number(buf, static_cast<double>(k) * period);
        for (RailKind rail : kAllRails) {
            const auto &trace = run.rails.at(rail);
            const double vpc = cal.volts_per_count(rail);
            const double apc = cal.amps_per_count(rail);
            const auto vc = counts_for(trace.voltage[k], vpc, cal, rail,
                                       "voltage", k);
            const auto ic = counts_for(trace.current[k], apc, cal, rail,
                                       "current", k);
            buf << ',';
            if (raw)
                buf << vc;
            else
                put_number(buf, static_cast<double>(vc) * vpc);
            buf << ',';
            if (raw)
                buf << ic;
            else
                put_number(buf, static_cast<double>(ic) * apc);
        }
        buf << '\n';
    }
    out << buf.str();
}

CaptureRun quantize_run(const CaptureRun &run, const CalibrationConfig &cal) {
    cal.validate();
    CaptureRun out = run;
    for (auto &[rail, trace] : out.rails) {
        const double vpc = cal.volts_per_count(rail);
        const double apc = cal.amps_per_count(rail);
        for (std::size_t k = 0; k < trace.voltage.size(); ++k)
            trace.voltage[k] = static_cast<double>(counts_for(
                                   trace.voltage[k], vpc, cal, rail, "voltage", k)) *
                               vpc;
        for (std::size_t k = 0; k < trace.current.size(); ++k)
            trace.current[k] = static_cast<double>(counts_for(
                                   trace.current[k], apc, cal, rail, "current", k)) *
                               apc;
    }
    return out;
}

CaptureRun read_capture(const CaptureFiles &files) {
    const Manifest manifest = read_manifest(files.manifest);
    std::ifstream in(files.samples);
    if (!in)
        throw FormatError("cannot open sample file " + files.samples.string());
    return parse_samples(in, manifest, manifest.calibration);
}

CaptureRun read_capture(const CaptureFiles &files,
                        const CalibrationConfig &cal) {
    const Manifest manifest = read_manifest(files.manifest);
    std::ifstream in(files.samples);
    if (!in)
        throw FormatError("cannot open sample file " + files.samples.string());
    return parse_samples(in, manifest, cal);
}

Manifest manifest_for(const CaptureRun &run, const CalibrationConfig &cal,
                      SampleUnits units) {
    Manifest m;
    m.run_id = run.run_id;
    m.rootkit_label = run.rootkit_label;
    m.dataset_index = run.dataset_index;
    m.sample_period_s = run.sample_period();
    m.units = units;
    m.schedule = run.schedule;
    m.calibration = cal;
    return m;
}

void write_capture(const CaptureRun &run, const CalibrationConfig &cal,
                   const CaptureFiles &files, SampleUnits units,
                   const std::map<std::string, double> &params) {
    std::ostringstream samples;
    write_samples(samples, run, cal, units);

    Manifest manifest = manifest_for(run, cal, units);
    manifest.params = params;

    std::ofstream sample_out(files.samples, std::ios::binary);
    if (!sample_out)
        throw FormatError("cannot write " + files.samples.string());
    sample_out << samples.str();

    std::ofstream manifest_out(files.manifest, std::ios::binary);
    if (!manifest_out)
        throw ManifestError("cannot write " + files.manifest.string());
    write_manifest(manifest_out, manifest);
}

} // namespace powertrace
