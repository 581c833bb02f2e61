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

#include "powertrace/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace {

using powertrace::cli::ParamOverrides;

/// `--flag-name value` options mapped onto override keys.
struct ParamFlags {
    std::list<std::pair<std::string, std::optional<double>>> values;
    std::string marker_rail;

    void add_marker(CLI::App *app) {
        add(app, "smooth-window", "Marker smoothing window, seconds");
        add(app, "hi", "Opening threshold as a fraction of the range");
        add(app, "lo", "Closing threshold as a fraction of the range");
        add(app, "min-duration", "Shortest accepted marker, seconds");
        add(app, "max-duration", "Longest accepted marker, seconds");
        app->add_option("--marker-rail", marker_rail,
                        "Rail carrying the markers (3v3, 5v, 12v_mb, 12v_cpu)");
    }

    void add_compare(CLI::App *app) {
        add(app, "window", "Window of the windowed means, seconds");
        add(app, "rel-threshold", "Relative increment threshold");
        add(app, "abs-threshold", "Absolute increment threshold, watts");
        add(app, "max-lag", "Largest lag searched, fraction of the segment");
        add(app, "spike-k", "Spike threshold in MADs above the median");
        add(app, "spike-window", "Rolling median/MAD window, seconds");
    }

    ParamOverrides overrides() const {
        ParamOverrides out;
        for (const auto &[flag, value] : values) {
            if (!value)
                continue;
            std::string key = flag;
            for (char &c : key)
                if (c == '-')
                    c = '_';
            out[key] = *value;
        }
        return out;
    }

    std::optional<powertrace::RailKind> rail() const {
        if (marker_rail.empty())
            return std::nullopt;
        auto rail = powertrace::parse_rail(marker_rail);
        if (!rail)
            throw CLI::ValidationError("--marker-rail",
                                       "unknown rail '" + marker_rail + "'");
        return rail;
    }

  private:
    void add(CLI::App *app, const std::string &flag, const std::string &help) {
        values.emplace_back(flag, std::nullopt);
        app->add_option("--" + flag, values.back().second, help);
    }
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"powertrace: rail power forensics for scripted capture runs"};
    app.require_subcommand(1);

    powertrace::cli::SynthOptions synth;
    bool synth_raw = false;
    auto *synth_cmd = app.add_subcommand("synth", "Generate synthetic captures");
    synth_cmd->add_option("--config", synth.config, "Scenario JSON")->required();
    synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--datasets", synth.datasets, "Number of datasets")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_flag("--raw", synth_raw, "Write raw ADC counts");

    powertrace::cli::AnalyzeOptions analyze;
    ParamFlags analyze_flags;
    auto *analyze_cmd =
        app.add_subcommand("analyze", "Detect markers and segment captures");
    analyze_cmd->add_option("captures", analyze.captures, "Capture stems or files")
        ->required();
    analyze_cmd->add_option("--out", analyze.out_dir, "Output directory");
    analyze_cmd->add_flag("--segment-plots", analyze.segment_plots,
                          "Also write per-segment plot data");
    analyze_flags.add_marker(analyze_cmd);

    powertrace::cli::CompareOptions compare;
    ParamFlags compare_flags;
    auto *compare_cmd =
        app.add_subcommand("compare", "Run the canonical comparisons");
    compare_cmd->add_option("runs", compare.runs,
                            "Captures that each cover all machine states");
    compare_cmd->add_option("--pre", compare.pre, "Pre-infection capture");
    compare_cmd->add_option("--post", compare.post, "Post-infection capture");
    compare_cmd->add_option("--post-reboot", compare.post_reboot,
                            "Post-infection reboot capture");
    compare_cmd->add_option("--out", compare.out, "Report JSON (default: stdout)");
    compare_flags.add_marker(compare_cmd);
    compare_flags.add_compare(compare_cmd);

    powertrace::cli::AggregateOptions aggregate;
    auto *aggregate_cmd =
        app.add_subcommand("aggregate", "Aggregate compare reports");
    aggregate_cmd->add_option("reports", aggregate.reports, "Compare reports")
        ->required();
    aggregate_cmd->add_option("--out", aggregate.out, "Aggregate JSON (default: stdout)");

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed()) {
            synth.units = synth_raw ? powertrace::SampleUnits::Raw
                                    : powertrace::SampleUnits::Engineering;
            return powertrace::cli::cmd_synth(synth, std::cerr);
        }
        if (analyze_cmd->parsed()) {
            analyze.overrides = analyze_flags.overrides();
            analyze.marker_rail = analyze_flags.rail();
            return powertrace::cli::cmd_analyze(analyze, std::cerr);
        }
        if (compare_cmd->parsed()) {
            compare.overrides = compare_flags.overrides();
            compare.marker_rail = compare_flags.rail();
            return powertrace::cli::cmd_compare(compare, std::cerr);
        }
        return powertrace::cli::cmd_aggregate(aggregate, std::cerr);
    } catch (const CLI::ParseError &e) {
        return app.exit(e, std::cerr, std::cerr);
    }
}
