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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace powertrace {

enum class ComparisonKind {
    BootPreVsRebootPost,
    IdlePreVsIdlePost,
    IdlePreVsIdlePostReboot,
    IePreVsIePost,
    IePreVsIePostReboot,
};

inline constexpr std::array<ComparisonKind, 5> kAllComparisons = {
    ComparisonKind::BootPreVsRebootPost, ComparisonKind::IdlePreVsIdlePost,
    ComparisonKind::IdlePreVsIdlePostReboot, ComparisonKind::IePreVsIePost,
    ComparisonKind::IePreVsIePostReboot};

std::string_view to_string(ComparisonKind kind);
std::optional<ComparisonKind> parse_comparison(std::string_view name);

/// Baseline and suspect schedule entries a comparison pairs up.
std::pair<ScheduleEntry, ScheduleEntry> pairing(ComparisonKind kind);

/// Boot comparisons are dominated by initialization noise.
bool is_noisy(ComparisonKind kind);

struct CompareParams {
    double window = 1.0;
    double rel_threshold = 0.02;
    double abs_threshold = 0.05;
    /// Largest lag searched, as a fraction of the aligned length.
    double max_lag = 0.10;
    double spike_k = 6.0;
    double spike_window = 1.0;

    void validate() const;
};

enum class Verdict { Increment, NoIncrement };

std::string_view to_string(Verdict verdict);

struct ComparisonMetrics {
    double baseline_median_w = 0.0;
    double suspect_median_w = 0.0;
    double delta_w = 0.0;
    /// delta_w / baseline_median_w; absent unless the baseline is positive.
    std::optional<double> relative_increase;
    double lag_s = 0.0;
    bool zero_variance = false;
    std::size_t baseline_spikes = 0;
    std::size_t suspect_spikes = 0;
    std::size_t aligned_samples = 0;
    Verdict verdict = Verdict::NoIncrement;
};

struct ComparisonReport {
    ComparisonKind kind = ComparisonKind::IdlePreVsIdlePost;
    RailKind rail = RailKind::Rail3V3;
    bool noisy = false;
    ComparisonMetrics metrics;
};

/// Truncate both series to the shorter length. Throws AlignmentError on an
/// empty input or mismatched sample periods.
std::pair<PowerSeries, PowerSeries> align(const PowerSeries &baseline,
                                          const PowerSeries &suspect);

struct LagEstimate {
    double lag_s = 0.0;
    std::ptrdiff_t lag_samples = 0;
    double correlation = 0.0;
    bool zero_variance = false;
};

/// Lag maximizing the normalized cross-correlation over
/// [-floor(n * max_lag), +floor(n * max_lag)]. Positive means the suspect
/// trails the baseline. Ties go to the smaller |lag|, then to the negative
/// one. A constant input yields lag 0 with zero_variance set.
LagEstimate estimate_lag(const PowerSeries &baseline, const PowerSeries &suspect,
                         double max_lag);

/// Pearson correlation of baseline[i] with suspect[i + lag] over the
/// overlapping samples; nullopt when either side of the overlap is constant.
std::optional<double> lagged_correlation(std::span<const double> baseline,
                                         std::span<const double> suspect,
                                         std::ptrdiff_t lag);

/// Rolling (centered) median and MAD; a spike is a maximal run of samples
/// above median + spike_k * MAD. The MAD is scaled by 1.4826, making it
/// an estimate of the standard deviation of Gaussian noise. A zero MAD is
/// replaced by max(1e-9 * |median|, 1e-9 W).
std::size_t detect_spikes(std::span<const double> power, double sample_period,
                          double spike_k, double spike_window);

double median(std::vector<double> values);

/// INCREMENT iff median(suspect windows) - median(baseline windows) exceeds
/// max(abs_threshold, rel_threshold * median(baseline windows)). The pair is
/// aligned first. Throws ComparisonError without one full window.
ComparisonMetrics classify_increment(const PowerSeries &baseline,
                                     const PowerSeries &suspect,
                                     const CompareParams &params);

/// Power of every (state, event, rail) segment of a run.
using EventKey = std::tuple<MachineState, EventKind, RailKind>;
using EventPowerTable = std::map<EventKey, PowerSeries>;

EventPowerTable event_power(const CaptureRun &run,
                            const std::vector<EventSegment> &segments);

/// The five canonical comparisons on all four rails, ordered by kind, then
/// rail. Baselines come from `pre`, suspects from `post`; pass the same
/// table twice when one run covers every state.
std::vector<ComparisonReport>
run_canonical_comparisons(const EventPowerTable &pre, const EventPowerTable &post,
                          const CompareParams &params);

struct AggregateEntry {
    RailKind rail = RailKind::Rail3V3;
    ComparisonKind kind = ComparisonKind::IdlePreVsIdlePost;
    std::size_t n_datasets = 0;
    std::size_t n_increment = 0;

    double fraction() const {
        return static_cast<double>(n_increment) /
               static_cast<double>(n_datasets);
    }
};

struct AggregateReport {
    /// Ordered by rail, then kind.
    std::vector<AggregateEntry> entries;

    const AggregateEntry *find(RailKind rail, ComparisonKind kind) const;
};

/// Fraction of datasets with an INCREMENT verdict per (rail, kind). Throws
/// AggregationError on no datasets or on datasets covering different
/// (rail, kind) sets.
AggregateReport aggregate(const std::vector<std::vector<ComparisonReport>> &datasets);

/// "66.67%": the fraction as a percentage with two decimals.
std::string format_percent(double fraction);

} // namespace powertrace
