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

#include "powertrace/power.hpp"
#include "powertrace/report.hpp"
#include "powertrace/synth.hpp"

#include <fstream>
#include <iostream>
#include <ostream>
#include <set>

using nlohmann::json;
namespace fs = std::filesystem;

namespace powertrace::cli {

void apply_overrides(MarkerParams &marker, CompareParams &compare,
                     const ParamOverrides &overrides) {
    const std::map<std::string, double *> fields = {
        {"smooth_window", &marker.smooth_window},
        {"hi", &marker.hi_fraction},
        {"hi_fraction", &marker.hi_fraction},
        {"lo", &marker.lo_fraction},
        {"lo_fraction", &marker.lo_fraction},
        {"min_duration", &marker.min_duration},
        {"max_duration", &marker.max_duration},
        {"window", &compare.window},
        {"rel_threshold", &compare.rel_threshold},
        {"abs_threshold", &compare.abs_threshold},
        {"max_lag", &compare.max_lag},
        {"spike_k", &compare.spike_k},
        {"spike_window", &compare.spike_window},
    };
    for (const auto &[key, value] : overrides) {
        auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("unknown parameter '" + key + "'");
        *it->second = value;
    }
}

namespace {

struct AnalyzedRun {
    CaptureRun run;
    MarkerList markers;
    std::vector<EventSegment> segments;
    MarkerParams marker_params;
    CompareParams compare_params;
};

/// Precedence: flags > manifest > defaults.
AnalyzedRun analyze_capture(const fs::path &path, const ParamOverrides &flags,
                            std::optional<RailKind> marker_rail) {
    const CaptureFiles files = CaptureFiles::resolve(path);
    const Manifest manifest = read_manifest(files.manifest);

    AnalyzedRun out;
    apply_overrides(out.marker_params, out.compare_params, manifest.params);
    apply_overrides(out.marker_params, out.compare_params, flags);
    if (marker_rail)
        out.marker_params.marker_rail = *marker_rail;
    out.marker_params.validate();
    out.compare_params.validate();

    std::ifstream in(files.samples);
    if (!in)
        throw FormatError("cannot open sample file " + files.samples.string());
    out.run = parse_samples(in, manifest, manifest.calibration);
    out.markers = detect_run_markers(out.run, out.marker_params);
    out.segments = segment_events(out.run, out.markers);
    return out;
}

std::string stem_of(const fs::path &path) {
    const CaptureFiles files = CaptureFiles::resolve(path);
    std::string name = files.samples.filename().string();
    return name.substr(0, name.size() - 4);
}

EventPowerTable states_only(const EventPowerTable &table,
                            std::set<MachineState> states) {
    EventPowerTable out;
    for (const auto &[key, series] : table)
        if (states.contains(std::get<0>(key)))
            out.emplace(key, series);
    return out;
}

int fail(std::ostream &err, const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
}

/// Writes to the file, or to stdout when no path is given.
void emit(const fs::path &path, const json &document) {
    if (path.empty())
        std::cout << document.dump(2) << '\n';
    else
        write_json(path, document);
}

} // namespace

int cmd_synth(const SynthOptions &options, std::ostream &err) {
    try {
        std::ifstream in(options.config);
        if (!in)
            throw ConfigError("cannot open scenario " + options.config.string());
        const ScenarioFile scenario = parse_scenario(in);
        fs::create_directories(options.out_dir);

        const CalibrationConfig cal;
        for (const auto &g : generate_ensemble(scenario.config, options.datasets,
                                               scenario.overrides)) {
            const fs::path stem = options.out_dir / g.run.run_id;
            write_capture(g.run, cal, CaptureFiles::from_stem(stem),
                          options.units);
            std::ofstream truth(stem.string() + ".truth.json", std::ios::binary);
            if (!truth)
                throw FormatError("cannot write ground truth for " + g.run.run_id);
            write_ground_truth(truth, g.truth);
        }
        return 0;
    } catch (const std::exception &e) {
        return fail(err, e);
    }
}

int cmd_analyze(const AnalyzeOptions &options, std::ostream &err) {
    if (options.captures.empty()) {
        err << "error: no captures given\n";
        return 1;
    }
    int status = 0;
    for (const auto &path : options.captures) {
        try {
            const AnalyzedRun a =
                analyze_capture(path, options.overrides, options.marker_rail);
            fs::create_directories(options.out_dir);
            const std::string stem = stem_of(path);

            json report = analysis_json(a.run, a.markers, a.segments);
            report["marker_params"] = to_json(a.marker_params);
            write_json(options.out_dir / (stem + ".analysis.json"), report);

            const auto power = compute_power(a.run);
            for (const auto &[rail, series] : power)
                write_plot_csv(options.out_dir /
                                   (stem + "." + std::string(to_string(rail)) +
                                    ".power.csv"),
                               series);
            if (options.segment_plots)
                for (const auto &s : a.segments)
                    write_plot_csv(
                        options.out_dir /
                            (stem + "." + std::string(to_string(s.state)) + "." +
                             std::string(to_string(s.event)) + "." +
                             std::string(to_string(s.rail)) + ".power.csv"),
                        slice(power.at(s.rail), s.start_index, s.end_index));
        } catch (const std::exception &e) {
            err << path.string() << ": ";
            status = fail(err, e);
        }
    }
    return status;
}

int cmd_compare(const CompareOptions &options, std::ostream &err) {
    try {
        struct Dataset {
            fs::path pre, post, post_reboot;
        };
        std::vector<Dataset> datasets;
        for (const auto &run : options.runs)
            datasets.push_back({run, run, run});
        if (!options.pre.empty()) {
            const std::size_t n = options.pre.size();
            if ((!options.post.empty() && options.post.size() != n) ||
                (!options.post_reboot.empty() && options.post_reboot.size() != n))
                throw ConfigError("--pre, --post and --post-reboot must be given "
                                  "the same number of times");
            for (std::size_t i = 0; i < n; ++i) {
                Dataset d{options.pre[i], options.pre[i], options.pre[i]};
                if (!options.post.empty())
                    d.post = d.post_reboot = options.post[i];
                if (!options.post_reboot.empty())
                    d.post_reboot = options.post_reboot[i];
                datasets.push_back(d);
            }
        } else if (!options.post.empty() || !options.post_reboot.empty()) {
            throw ConfigError("--post and --post-reboot need --pre");
        }
        if (datasets.empty())
            throw ConfigError("no runs to compare");

        std::map<fs::path, AnalyzedRun> cache;
        auto analyzed = [&](const fs::path &p) -> const AnalyzedRun & {
            auto it = cache.find(p);
            if (it == cache.end())
                it = cache.emplace(p, analyze_capture(p, options.overrides,
                                                      options.marker_rail))
                         .first;
            return it->second;
        };

        CompareParams params;
        json jdatasets = json::array();
        std::vector<std::vector<ComparisonReport>> all;
        for (std::size_t i = 0; i < datasets.size(); ++i) {
            const auto &d = datasets[i];
            const AnalyzedRun &pre = analyzed(d.pre);
            const AnalyzedRun &post = analyzed(d.post);
            const AnalyzedRun &reboot = analyzed(d.post_reboot);
            params = pre.compare_params;

            EventPowerTable baseline = states_only(
                event_power(pre.run, pre.segments), {MachineState::PreInfection});
            EventPowerTable suspect = states_only(
                event_power(post.run, post.segments), {MachineState::PostInfection});
            suspect.merge(states_only(event_power(reboot.run, reboot.segments),
                                      {MachineState::PostInfectionReboot}));

            auto reports = run_canonical_comparisons(baseline, suspect, params);
            json jr = json::array();
            for (const auto &r : reports)
                jr.push_back(to_json(r));
            jdatasets.push_back({{"dataset", i + 1},
                                 {"runs",
                                  {{"pre", pre.run.run_id},
                                   {"post", post.run.run_id},
                                   {"post_reboot", reboot.run.run_id}}},
                                 {"reports", jr}});
            all.push_back(std::move(reports));
        }

        const json document = {{"compare_params", to_json(params)},
                               {"datasets", jdatasets},
                               {"aggregate", to_json(aggregate(all))}};
        emit(options.out, document);
        return 0;
    } catch (const std::exception &e) {
        return fail(err, e);
    }
}

int cmd_aggregate(const AggregateOptions &options, std::ostream &err) {
    try {
        if (options.reports.empty())
            throw AggregationError("no reports given");
        std::vector<std::vector<ComparisonReport>> all;
        for (const auto &path : options.reports) {
            std::ifstream in(path);
            if (!in)
                throw AggregationError("cannot open report " + path.string());
            json document;
            try {
                document = json::parse(in);
            } catch (const json::exception &e) {
                throw AggregationError(path.string() + " is not valid JSON: " +
                                       e.what());
            }
            for (auto &d : datasets_from_json(document))
                all.push_back(std::move(d));
        }
        const json document = {{"n_datasets", all.size()},
                               {"aggregate", to_json(aggregate(all))}};
        emit(options.out, document);
        return 0;
    } catch (const std::exception &e) {
        return fail(err, e);
    }
}

} // namespace powertrace::cli
