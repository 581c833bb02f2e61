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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace powertrace {

/// How the capture device's counts map to engineering units.
///
/// Every channel goes through a signed ADC with adc_bits of resolution over
/// [-adc_full_scale, +adc_full_scale] volts, so one count is
/// LSB = 2 * adc_full_scale / 2^adc_bits volts at the ADC input. A voltage
/// channel reads rail volts = count * voltage_scale. A current channel carries
/// the shunt-sense output; amperes = (count * LSB) * current_scale.
struct CalibrationConfig {
    std::map<RailKind, double> voltage_scale;
    std::map<RailKind, double> current_scale;
    int adc_bits = 16;
    double adc_full_scale = 10.0;

    /// 16-bit, +/-10 V, a 2:1 divider on voltage channels, 1 A/V sensors.
    CalibrationConfig();

    double lsb() const;
    double volts_per_count(RailKind rail) const;
    double amps_per_count(RailKind rail) const;

    /// Throws ConfigError on bits outside [8, 24], non-positive scales or
    /// missing rails.
    void validate() const;

    bool operator==(const CalibrationConfig &) const = default;
};

/// Nearest ADC level to an input voltage; ties round away from zero.
/// Throws RangeError when |value| > adc_full_scale.
double quantize(double value, const CalibrationConfig &cal);

/// Signed ADC count for an input voltage (same rounding as quantize).
std::int64_t to_counts(double value, const CalibrationConfig &cal);

enum class SampleUnits { Engineering, Raw };

std::string_view to_string(SampleUnits units);

/// Everything in the manifest besides the samples themselves.
struct Manifest {
    std::string run_id;
    std::string rootkit_label = "none";
    int dataset_index = 1;
    double sample_period_s = 0.010;
    SampleUnits units = SampleUnits::Engineering;
    RunSchedule schedule = default_schedule();
    CalibrationConfig calibration;
    /// Flat analysis parameter overrides ("hi", "rel_threshold", ...).
    std::map<std::string, double> params;
};

/// The sample CSV and its JSON manifest.
struct CaptureFiles {
    std::filesystem::path samples;
    std::filesystem::path manifest;

    /// `<stem>.csv` and `<stem>.manifest.json`.
    static CaptureFiles from_stem(const std::filesystem::path &stem);
    /// Accepts a stem, the sample file, or the manifest file.
    static CaptureFiles resolve(const std::filesystem::path &path);
};

/// Column header of the sample file, without line terminator.
extern const char *const kSampleHeader;

Manifest parse_manifest(std::istream &in);
Manifest read_manifest(const std::filesystem::path &path);
void write_manifest(std::ostream &out, const Manifest &manifest);

/// Parse a sample CSV under the given manifest, converting to engineering
/// units with cal. Throws FormatError, TimingError or ValidationError.
CaptureRun parse_samples(std::istream &in, const Manifest &manifest,
                         const CalibrationConfig &cal);

/// Quantize every sample through the ADC model and emit the CSV.
/// Throws RangeError naming rail, channel and row on ADC overflow.
void write_samples(std::ostream &out, const CaptureRun &run,
                   const CalibrationConfig &cal,
                   SampleUnits units = SampleUnits::Engineering);

/// The run as it reads back after one pass through the ADC model.
CaptureRun quantize_run(const CaptureRun &run, const CalibrationConfig &cal);

/// Reads with the calibration stored in the manifest.
CaptureRun read_capture(const CaptureFiles &files);
CaptureRun read_capture(const CaptureFiles &files, const CalibrationConfig &cal);

Manifest manifest_for(const CaptureRun &run, const CalibrationConfig &cal,
                      SampleUnits units = SampleUnits::Engineering);

void write_capture(const CaptureRun &run, const CalibrationConfig &cal,
                   const CaptureFiles &files,
                   SampleUnits units = SampleUnits::Engineering,
                   const std::map<std::string, double> &params = {});

} // namespace powertrace
