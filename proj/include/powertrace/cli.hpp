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

#include "powertrace/compare.hpp"
#include "powertrace/ingest.hpp"
#include "powertrace/segment.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace powertrace::cli {

/// Flat `key -> value` overrides for MarkerParams and CompareParams fields.
/// Accepted keys: smooth_window, hi (hi_fraction), lo (lo_fraction),
/// min_duration, max_duration, window, rel_threshold, abs_threshold,
/// max_lag, spike_k, spike_window.
using ParamOverrides = std::map<std::string, double>;

/// Apply overrides in order; later maps win. Throws ConfigError on an unknown
/// key.
void apply_overrides(MarkerParams &marker, CompareParams &compare,
                     const ParamOverrides &overrides);

struct SynthOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::size_t datasets = 1;
    SampleUnits units = SampleUnits::Engineering;
};

struct AnalyzeOptions {
    std::vector<std::filesystem::path> captures;
    std::filesystem::path out_dir = ".";
    ParamOverrides overrides;
    std::optional<RailKind> marker_rail;
    bool segment_plots = false;
};

struct CompareOptions {
    /// Each run is one dataset covering every machine state.
    std::vector<std::filesystem::path> runs;
    /// Or per-state runs, paired by position.
    std::vector<std::filesystem::path> pre;
    std::vector<std::filesystem::path> post;
    std::vector<std::filesystem::path> post_reboot;
    /// Empty writes the report to stdout.
    std::filesystem::path out;
    ParamOverrides overrides;
    std::optional<RailKind> marker_rail;
};

struct AggregateOptions {
    std::vector<std::filesystem::path> reports;
    /// Empty writes the aggregate to stdout.
    std::filesystem::path out;
};

/// Each command returns the process exit status and writes diagnostics to
/// err only.
int cmd_synth(const SynthOptions &options, std::ostream &err);
int cmd_analyze(const AnalyzeOptions &options, std::ostream &err);
int cmd_compare(const CompareOptions &options, std::ostream &err);
int cmd_aggregate(const AggregateOptions &options, std::ostream &err);

} // namespace powertrace::cli
