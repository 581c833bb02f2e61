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

#include "powertrace/compare.hpp"

#include "powertrace/power.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace powertrace {

namespace {

constexpr std::array<std::string_view, 5> kComparisonNames = {
    "boot_pre_vs_reboot_post", "idle_pre_vs_idle_post",
    "idle_pre_vs_idle_post_reboot", "ie_pre_vs_ie_post",
    "ie_pre_vs_ie_post_reboot"};

// Correlations closer than this count as tied.
constexpr double kCorrelationTie = 1e-12;

std::string entry_name(MachineState state, EventKind event) {
    return "(" + std::string(to_string(state)) + ", " +
           std::string(to_string(event)) + ")";
}

} // namespace

std::string_view to_string(ComparisonKind kind) {
    return kComparisonNames[static_cast<std::size_t>(kind)];
}

std::optional<ComparisonKind> parse_comparison(std::string_view name) {
    for (std::size_t i = 0; i < kComparisonNames.size(); ++i)
        if (kComparisonNames[i] == name)
            return static_cast<ComparisonKind>(i);
    return std::nullopt;
}

std::pair<ScheduleEntry, ScheduleEntry> pairing(ComparisonKind kind) {
    using enum MachineState;
    switch (kind) {
    case ComparisonKind::BootPreVsRebootPost:
        return {{PreInfection, EventKind::Boot}, {PostInfection, EventKind::Boot}};
    case ComparisonKind::IdlePreVsIdlePost:
        return {{PreInfection, EventKind::Idle}, {PostInfection, EventKind::Idle}};
    case ComparisonKind::IdlePreVsIdlePostReboot:
        return {{PreInfection, EventKind::Idle},
                {PostInfectionReboot, EventKind::Idle}};
    case ComparisonKind::IePreVsIePost:
        return {{PreInfection, EventKind::OpenBrowser},
                {PostInfection, EventKind::OpenBrowser}};
    case ComparisonKind::IePreVsIePostReboot:
        return {{PreInfection, EventKind::OpenBrowser},
                {PostInfectionReboot, EventKind::OpenBrowser}};
    }
    throw ComparisonError("unknown comparison kind");
}

bool is_noisy(ComparisonKind kind) {
    return kind == ComparisonKind::BootPreVsRebootPost;
}

void CompareParams::validate() const {
    if (!(window > 0.0 && rel_threshold > 0.0 && abs_threshold > 0.0 &&
          spike_k > 0.0 && spike_window > 0.0))
        throw ConfigError("comparison parameters must be strictly positive");
    if (!(max_lag > 0.0 && max_lag <= 0.5))
        throw ConfigError("max_lag must lie in (0, 0.5]");
}

std::string_view to_string(Verdict verdict) {
    return verdict == Verdict::Increment ? "INCREMENT" : "NO_INCREMENT";
}

std::pair<PowerSeries, PowerSeries> align(const PowerSeries &baseline,
                                          const PowerSeries &suspect) {
    if (baseline.power.empty() || suspect.power.empty())
        throw AlignmentError("cannot align an empty segment");
    if (baseline.sample_period != suspect.sample_period)
        throw AlignmentError("segments have different sample periods");
    const std::size_t n = std::min(baseline.size(), suspect.size());
    return {slice(baseline, 0, n), slice(suspect, 0, n)};
}

std::optional<double> lagged_correlation(std::span<const double> baseline,
                                         std::span<const double> suspect,
                                         std::ptrdiff_t lag) {
    const auto n = static_cast<std::ptrdiff_t>(
        std::min(baseline.size(), suspect.size()));
    const std::ptrdiff_t first = std::max<std::ptrdiff_t>(0, -lag);
    const std::ptrdiff_t last = std::min(n, n - lag);
    if (last - first < 2)
        return std::nullopt;

    const double count = static_cast<double>(last - first);
    double mean_b = 0.0;
    double mean_s = 0.0;
    for (std::ptrdiff_t i = first; i < last; ++i) {
        mean_b += baseline[static_cast<std::size_t>(i)];
        mean_s += suspect[static_cast<std::size_t>(i + lag)];
    }
    mean_b /= count;
    mean_s /= count;

    double sbb = 0.0;
    double sss = 0.0;
    double sbs = 0.0;
    for (std::ptrdiff_t i = first; i < last; ++i) {
        const double b = baseline[static_cast<std::size_t>(i)] - mean_b;
        const double s = suspect[static_cast<std::size_t>(i + lag)] - mean_s;
        sbb += b * b;
        sss += s * s;
        sbs += b * s;
    }
    if (sbb <= 0.0 || sss <= 0.0)
        return std::nullopt;
    return sbs / std::sqrt(sbb * sss);
}

namespace {

bool has_variance(std::span<const double> x) {
    return std::any_of(x.begin(), x.end(), [&](double v) { return v != x[0]; });
}

} // namespace

LagEstimate estimate_lag(const PowerSeries &baseline, const PowerSeries &suspect,
                         double max_lag) {
    if (baseline.size() != suspect.size() || baseline.power.empty())
        throw AlignmentError("estimate_lag needs an aligned, non-empty pair");
    const std::size_t n = baseline.size();
    const auto limit = static_cast<std::ptrdiff_t>(
        std::floor(static_cast<double>(n) * max_lag));
    if (limit < 1)
        throw ComparisonError("max_lag covers less than one sample");

    LagEstimate out;
    if (!has_variance(baseline.power) || !has_variance(suspect.power)) {
        out.zero_variance = true;
        return out;
    }

    // Candidates in tie-break order: 0, -1, +1, -2, +2, ...
    std::vector<std::ptrdiff_t> candidates{0};
    for (std::ptrdiff_t magnitude = 1; magnitude <= limit; ++magnitude) {
        candidates.push_back(-magnitude);
        candidates.push_back(magnitude);
    }
    bool found = false;
    for (std::ptrdiff_t lag : candidates) {
        auto r = lagged_correlation(baseline.power, suspect.power, lag);
        if (!r)
            continue;
        if (!found || *r > out.correlation + kCorrelationTie) {
            found = true;
            out.correlation = *r;
            out.lag_samples = lag;
        }
    }
    out.lag_s = static_cast<double>(out.lag_samples) * baseline.sample_period;
    return out;
}

double median(std::vector<double> values) {
    if (values.empty())
        return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(),
                     values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(
        values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

namespace {

/// Scales the MAD of Gaussian data to its standard deviation.
constexpr double kMadToSigma = 1.482602218505602;

} // namespace

std::size_t detect_spikes(std::span<const double> power, double sample_period,
                          double spike_k, double spike_window) {
    const std::size_t n = power.size();
    const std::size_t window = window_samples(spike_window, sample_period);
    const std::size_t before = window / 2;
    const std::size_t after = window - before;

    std::size_t spikes = 0;
    bool in_spike = false;
    std::vector<double> buf;
    buf.reserve(window);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k >= before ? k - before : 0;
        const std::size_t hi = std::min(n, k + after);
        buf.assign(power.begin() + static_cast<std::ptrdiff_t>(lo),
                   power.begin() + static_cast<std::ptrdiff_t>(hi));
        const double med = median(buf);
        for (double &v : buf)
            v = std::fabs(v - med);
        double mad = kMadToSigma * median(buf);
        if (mad == 0.0)
            mad = std::max(1e-9 * std::fabs(med), 1e-9);

        const bool above = power[k] > med + spike_k * mad;
        if (above && !in_spike)
            ++spikes;
        in_spike = above;
    }
    return spikes;
}

ComparisonMetrics classify_increment(const PowerSeries &baseline,
                                     const PowerSeries &suspect,
                                     const CompareParams &params) {
    params.validate();
    const auto [base, susp] = align(baseline, suspect);
    const std::size_t window = window_samples(params.window, base.sample_period);
    if (base.size() < window)
        throw ComparisonError("segments of " + std::to_string(base.size()) +
                              " samples hold fewer than one full " +
                              std::to_string(window) + "-sample window");

    ComparisonMetrics m;
    m.aligned_samples = base.size();
    m.baseline_median_w = median(windowed_means(base.power, window));
    m.suspect_median_w = median(windowed_means(susp.power, window));
    m.delta_w = m.suspect_median_w - m.baseline_median_w;
    if (m.baseline_median_w > 0.0)
        m.relative_increase = m.delta_w / m.baseline_median_w;

    if (std::floor(static_cast<double>(base.size()) * params.max_lag) >= 1.0) {
        const LagEstimate lag = estimate_lag(base, susp, params.max_lag);
        m.lag_s = lag.lag_s;
        m.zero_variance = lag.zero_variance;
    }
    m.baseline_spikes = detect_spikes(base.power, base.sample_period,
                                      params.spike_k, params.spike_window);
    m.suspect_spikes = detect_spikes(susp.power, susp.sample_period,
                                     params.spike_k, params.spike_window);

    const double threshold = std::max(
        params.abs_threshold, params.rel_threshold * m.baseline_median_w);
    m.verdict = m.delta_w > threshold ? Verdict::Increment : Verdict::NoIncrement;
    return m;
}

EventPowerTable event_power(const CaptureRun &run,
                            const std::vector<EventSegment> &segments) {
    const auto power = compute_power(run);
    EventPowerTable table;
    for (const auto &s : segments) {
        auto it = power.find(s.rail);
        if (it == power.end())
            continue;
        table[{s.state, s.event, s.rail}] =
            slice(it->second, s.start_index, s.end_index);
    }
    return table;
}

std::vector<ComparisonReport>
run_canonical_comparisons(const EventPowerTable &pre, const EventPowerTable &post,
                          const CompareParams &params) {
    params.validate();
    auto lookup = [](const EventPowerTable &table, const ScheduleEntry &entry,
                     RailKind rail) -> const PowerSeries & {
        auto it = table.find({entry.state, entry.event, rail});
        if (it == table.end())
            throw ComparisonError("missing segment " +
                                  entry_name(entry.state, entry.event) +
                                  " on rail " + std::string(to_string(rail)));
        return it->second;
    };

    std::vector<ComparisonReport> out;
    for (ComparisonKind kind : kAllComparisons) {
        const auto [base_entry, suspect_entry] = pairing(kind);
        for (RailKind rail : kAllRails) {
            ComparisonReport report;
            report.kind = kind;
            report.rail = rail;
            report.noisy = is_noisy(kind);
            report.metrics = classify_increment(lookup(pre, base_entry, rail),
                                                lookup(post, suspect_entry, rail),
                                                params);
            out.push_back(report);
        }
    }
    return out;
}

const AggregateEntry *AggregateReport::find(RailKind rail,
                                            ComparisonKind kind) const {
    for (const auto &e : entries)
        if (e.rail == rail && e.kind == kind)
            return &e;
    return nullptr;
}

AggregateReport
aggregate(const std::vector<std::vector<ComparisonReport>> &datasets) {
    if (datasets.empty())
        throw AggregationError("no datasets to aggregate");

    using Key = std::pair<RailKind, ComparisonKind>;
    auto coverage = [](const std::vector<ComparisonReport> &reports) {
        std::set<Key> keys;
        for (const auto &r : reports)
            if (!keys.insert({r.rail, r.kind}).second)
                throw AggregationError(
                    "dataset reports (" + std::string(to_string(r.rail)) + ", " +
                    std::string(to_string(r.kind)) + ") more than once");
        return keys;
    };

    const std::set<Key> reference = coverage(datasets.front());
    if (reference.empty())
        throw AggregationError("first dataset has no reports");
    std::map<Key, AggregateEntry> counts;
    for (const auto &[rail, kind] : reference)
        counts[{rail, kind}] = AggregateEntry{rail, kind, 0, 0};

    for (std::size_t d = 0; d < datasets.size(); ++d) {
        if (coverage(datasets[d]) != reference)
            throw AggregationError("dataset " + std::to_string(d) +
                                   " covers a different set of (rail, "
                                   "comparison) pairs");
        for (const auto &r : datasets[d]) {
            auto &entry = counts[{r.rail, r.kind}];
            ++entry.n_datasets;
            if (r.metrics.verdict == Verdict::Increment)
                ++entry.n_increment;
        }
    }

    AggregateReport out;
    for (const auto &[key, entry] : counts)
        out.entries.push_back(entry);
    return out;
}

std::string format_percent(double fraction) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(),
                                   fraction * 100.0, std::chars_format::fixed, 2);
    return std::string(buf.data(), ptr) + "%";
}

} // namespace powertrace
