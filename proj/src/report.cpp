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

#include "powertrace/report.hpp"

#include "powertrace/power.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

using nlohmann::json;

namespace powertrace {

namespace {

json segment_stats(const PowerSeries &s) {
    const auto &p = s.power;
    const double n = static_cast<double>(p.size());
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / n;
    double var = 0.0;
    for (double v : p)
        var += (v - mean) * (v - mean);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    return {{"samples", p.size()},
            {"duration_s", s.duration()},
            {"mean_w", mean},
            {"median_w", median(p)},
            {"min_w", *lo},
            {"max_w", *hi},
            {"std_w", std::sqrt(var / n)},
            {"negative_samples", s.negative_samples}};
}

void put_number(std::ostream &out, double value) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.write(buf.data(), ptr - buf.data());
}

double round4(double value) { return std::round(value * 1e4) / 1e4; }

} // namespace

json analysis_json(const CaptureRun &run, const MarkerList &markers,
                   const std::vector<EventSegment> &segments) {
    const auto power = compute_power(run);
    const auto &entries = run.schedule.entries;

    json jm = json::array();
    for (std::size_t i = 0; i < markers.size(); ++i) {
        json m = {{"start_index", markers[i].start_index},
                  {"end_index", markers[i].end_index},
                  {"peak_power_w", markers[i].peak_power}};
        if (i / 2 < entries.size()) {
            m["state"] = std::string(to_string(entries[i / 2].state));
            m["event"] = std::string(to_string(entries[i / 2].event));
            m["role"] = i % 2 == 0 ? "open" : "close";
        }
        jm.push_back(m);
    }

    json js = json::array();
    for (const auto &s : segments) {
        json j = {{"state", std::string(to_string(s.state))},
                  {"event", std::string(to_string(s.event))},
                  {"rail", std::string(to_string(s.rail))},
                  {"start_index", s.start_index},
                  {"end_index", s.end_index}};
        j["stats"] = segment_stats(slice(power.at(s.rail), s.start_index,
                                         s.end_index));
        js.push_back(j);
    }

    json rails = json::object();
    for (const auto &[rail, series] : power)
        rails[std::string(to_string(rail))] = segment_stats(series);

    return {{"run_id", run.run_id},
            {"rootkit_label", run.rootkit_label},
            {"dataset_index", run.dataset_index},
            {"sample_period_s", run.sample_period()},
            {"samples", run.size()},
            {"duration_s", static_cast<double>(run.size()) * run.sample_period()},
            {"marker_count", markers.size()},
            {"markers", jm},
            {"segment_count", segments.size()},
            {"segments", js},
            {"rails", rails}};
}

json to_json(const ComparisonReport &r) {
    const auto &m = r.metrics;
    return {{"kind", std::string(to_string(r.kind))},
            {"rail", std::string(to_string(r.rail))},
            {"noisy", r.noisy},
            {"baseline_median_w", m.baseline_median_w},
            {"suspect_median_w", m.suspect_median_w},
            {"delta_w", m.delta_w},
            {"relative_increase",
             m.relative_increase ? json(*m.relative_increase) : json(nullptr)},
            {"lag_s", m.lag_s},
            {"zero_variance", m.zero_variance},
            {"baseline_spikes", m.baseline_spikes},
            {"suspect_spikes", m.suspect_spikes},
            {"aligned_samples", m.aligned_samples},
            {"verdict", std::string(to_string(m.verdict))}};
}

ComparisonReport comparison_from_json(const json &j) {
    ComparisonReport r;
    try {
        const auto kind = parse_comparison(j.at("kind").get<std::string>());
        const auto rail = parse_rail(j.at("rail").get<std::string>());
        if (!kind || !rail)
            throw AggregationError("unknown comparison kind or rail in report");
        r.kind = *kind;
        r.rail = *rail;
        r.noisy = j.value("noisy", is_noisy(r.kind));
        auto &m = r.metrics;
        m.baseline_median_w = j.at("baseline_median_w").get<double>();
        m.suspect_median_w = j.at("suspect_median_w").get<double>();
        m.delta_w = j.at("delta_w").get<double>();
        if (j.contains("relative_increase") && !j.at("relative_increase").is_null())
            m.relative_increase = j.at("relative_increase").get<double>();
        m.lag_s = j.value("lag_s", 0.0);
        m.zero_variance = j.value("zero_variance", false);
        m.baseline_spikes = j.value("baseline_spikes", std::size_t{0});
        m.suspect_spikes = j.value("suspect_spikes", std::size_t{0});
        m.aligned_samples = j.value("aligned_samples", std::size_t{0});
        const auto verdict = j.at("verdict").get<std::string>();
        if (verdict == "INCREMENT")
            m.verdict = Verdict::Increment;
        else if (verdict == "NO_INCREMENT")
            m.verdict = Verdict::NoIncrement;
        else
            throw AggregationError("unknown verdict '" + verdict + "'");
    } catch (const json::exception &e) {
        throw AggregationError(std::string("malformed comparison report: ") +
                               e.what());
    }
    return r;
}

json to_json(const AggregateReport &report) {
    json out = json::array();
    for (const auto &e : report.entries)
        out.push_back({{"rail", std::string(to_string(e.rail))},
                       {"kind", std::string(to_string(e.kind))},
                       {"n_datasets", e.n_datasets},
                       {"n_increment", e.n_increment},
                       {"fraction", round4(e.fraction())},
                       {"percent", format_percent(e.fraction())}});
    return out;
}

json to_json(const MarkerParams &p) {
    return {{"marker_rail", std::string(to_string(p.marker_rail))},
            {"smooth_window", p.smooth_window},
            {"hi_fraction", p.hi_fraction},
            {"lo_fraction", p.lo_fraction},
            {"min_duration", p.min_duration},
            {"max_duration", p.max_duration}};
}

json to_json(const CompareParams &p) {
    return {{"window", p.window},
            {"rel_threshold", p.rel_threshold},
            {"abs_threshold", p.abs_threshold},
            {"max_lag", p.max_lag},
            {"spike_k", p.spike_k},
            {"spike_window", p.spike_window}};
}

std::vector<std::vector<ComparisonReport>>
datasets_from_json(const json &document) {
    std::vector<std::vector<ComparisonReport>> out;
    if (!document.contains("datasets") || !document.at("datasets").is_array())
        throw AggregationError("report has no \"datasets\" array");
    for (const auto &d : document.at("datasets")) {
        if (!d.contains("reports"))
            throw AggregationError("dataset entry has no \"reports\"");
        std::vector<ComparisonReport> reports;
        for (const auto &r : d.at("reports"))
            reports.push_back(comparison_from_json(r));
        out.push_back(std::move(reports));
    }
    return out;
}

void write_plot_csv(const std::filesystem::path &path,
                    const PowerSeries &series) {
    std::ostringstream buf;
    buf << "time_s,power_w\n";
    for (std::size_t k = 0; k < series.power.size(); ++k) {
        put_number(buf, static_cast<double>(k) * series.sample_period);
        buf << ',';
        put_number(buf, series.power[k]);
        buf << '\n';
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot write " + path.string());
    out << buf.str();
}

void write_json(const std::filesystem::path &path, const json &j) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace powertrace
