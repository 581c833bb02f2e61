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

// Acceptance suite: one line per criterion, non-zero exit on any failure.

#include "powertrace/cli.hpp"
#include "powertrace/compare.hpp"
#include "powertrace/ingest.hpp"
#include "powertrace/power.hpp"
#include "powertrace/segment.hpp"
#include "powertrace/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace powertrace;
namespace fs = std::filesystem;
using testing_support::ScratchDir;
using testing_support::slurp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void check(const char *name, const std::function<Outcome()> &criterion) {
    Outcome o;
    try {
        o = criterion();
    } catch (const std::exception &e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass)
        ++failures;
}

std::string fmt(const char *pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

long distance(std::size_t a, std::size_t b) {
    return std::labs(static_cast<long>(a) - static_cast<long>(b));
}

Outcome marker_protocol() {
    int exact = 0;
    long worst_edge = 0;
    double worst_s = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        const GeneratedRun g = generate_run(c);
        const auto t0 = std::chrono::steady_clock::now();
        const MarkerList found = detect_run_markers(g.run, MarkerParams{});
        const auto segments = segment_events(g.run, found);
        const double s = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        worst_s = std::max(worst_s, s);
        if (found.size() != 18 || segments.size() != 36)
            continue;
        ++exact;
        for (std::size_t k = 0; k < 18; ++k) {
            worst_edge = std::max(worst_edge, distance(found[k].start_index,
                                                       g.truth.markers[k].start_index));
            worst_edge = std::max(worst_edge, distance(found[k].end_index,
                                                       g.truth.markers[k].end_index));
        }
    }
    return {exact == 100 && worst_edge <= 5 && worst_s < 1.0,
            fmt("%d/100 runs with exactly 18 markers, worst edge error %ld "
                "samples (limit 5), slowest run %.3f s (limit 1 s)",
                exact, worst_edge, worst_s)};
}

Outcome sampling_arithmetic() {
    RailTrace trace{RailKind::Rail5V, 0.010, std::vector<double>(3000, 5.0),
                    std::vector<double>(3000, 1.0)};
    const PowerSeries p = compute_power(trace);
    const double d = p.duration();
    return {p.size() == 3000 && d == 30.0 && trace.duration() == 30.0,
            fmt("3000 samples at 10 ms reported as %.17g s (expected 30 exactly)", d)};
}

Outcome power_identity() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> volts(-15.0, 15.0);
    std::uniform_real_distribution<double> amps(-8.0, 8.0);
    long double worst = 0.0L;
    std::size_t checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + gen() % 5000;
        RailTrace t{kAllRails[trial % 4], 0.010, {}, {}};
        for (std::size_t i = 0; i < n; ++i) {
            t.voltage.push_back(volts(gen));
            t.current.push_back(amps(gen));
        }
        const PowerSeries p = compute_power(t);
        if (p.size() != n)
            return {false, fmt("trial %d: %zu samples out of %zu", trial, p.size(), n)};
        const std::vector<double> ref = oracle::power(t.voltage, t.current);
        for (std::size_t i = 0; i < n; ++i) {
            if (ref[i] == 0.0)
                continue;
            worst = std::max(worst, std::fabs(static_cast<long double>(p.power[i] - ref[i]) /
                                              ref[i]));
            ++checked;
        }
    }
    return {worst < 1e-12L, fmt("%zu samples, worst relative error %.3Le (limit 1e-12)",
                                checked, worst)};
}

Outcome fraction_reproduction() {
    ScenarioConfig c;
    c.seed = 300;
    auto effect = [](bool idle_5v, bool ie_cpu, bool ie_3v3) {
        InfectionEffect e;
        if (idle_5v)
            e.delta_power[{RailKind::Rail5V, EventKind::Idle}] = 1.0;
        if (ie_cpu)
            e.delta_power[{RailKind::Rail12VCpu, EventKind::OpenBrowser}] = 2.0;
        if (ie_3v3)
            e.delta_power[{RailKind::Rail3V3, EventKind::OpenBrowser}] = 0.5;
        return e;
    };
    const std::vector<DatasetOverride> overrides = {
        {effect(true, true, false)},
        {effect(true, true, true)},
        {effect(false, true, false)}};
    std::vector<std::vector<ComparisonReport>> datasets;
    for (const auto &g : generate_ensemble(c, 3, overrides)) {
        const auto table = event_power(
            g.run, segment_events(g.run, detect_run_markers(g.run, MarkerParams{})));
        datasets.push_back(run_canonical_comparisons(table, table, CompareParams{}));
    }
    const AggregateReport agg = aggregate(datasets);

    struct Target {
        RailKind rail;
        ComparisonKind kind;
        std::size_t increments;
        const char *percent;
    };
    const Target targets[] = {
        {RailKind::Rail5V, ComparisonKind::IdlePreVsIdlePost, 2, "66.67%"},
        {RailKind::Rail12VCpu, ComparisonKind::IePreVsIePost, 3, "100.00%"},
        {RailKind::Rail3V3, ComparisonKind::IePreVsIePost, 1, "33.33%"}};
    bool ok = true;
    std::string detail;
    for (const auto &t : targets) {
        const AggregateEntry *e = agg.find(t.rail, t.kind);
        const std::string got = e ? format_percent(e->fraction()) : "missing";
        ok = ok && e && e->n_datasets == 3 && e->n_increment == t.increments &&
             got == t.percent;
        detail += fmt("%s %s %zu/3 = %s (expected %s); ",
                      std::string(to_string(t.rail)).c_str(),
                      std::string(to_string(t.kind)).c_str(),
                      e ? e->n_increment : 0, got.c_str(), t.percent);
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Outcome lag_recovery() {
    int exact = 0, total = 0;
    std::string misses;
    for (std::size_t n : {100u, 250u, 1000u}) {
        GaussianStream rng(n);
        std::vector<double> x(n + 20);
        for (double &v : x)
            v = 10.0 + rng.normal();
        std::vector<double> a(x.begin() + 10, x.begin() + 10 + static_cast<long>(n));
        for (long k = -10; k <= 10; ++k) {
            // b[i] = a[i - k]: the suspect trails the baseline by k samples.
            std::vector<double> b(x.begin() + 10 - k,
                                  x.begin() + 10 - k + static_cast<long>(n));
            const LagEstimate est = estimate_lag(testing_support::series_of(a),
                                                 testing_support::series_of(b), 0.10);
            ++total;
            if (est.lag_samples == k && est.lag_s == static_cast<double>(k) * 0.010)
                ++exact;
            else
                misses += fmt(" n=%zu k=%ld got %ld;", n, k, est.lag_samples);
        }
    }
    return {exact == total,
            fmt("%d/%d shifts k in [-10, 10] recovered exactly on lengths 100, 250, "
                "1000",
                exact, total) +
                misses};
}

Outcome verdict_soundness() {
    const std::size_t n = 6000;
    int hits = 0, quiet = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        GaussianStream rng(7000 + trial);
        std::vector<double> base(n), raised(n), same(n);
        for (std::size_t i = 0; i < n; ++i) {
            base[i] = 20.0 + 0.1 * rng.normal();
            raised[i] = 21.0 + 0.1 * rng.normal();
            same[i] = 20.0 + 0.1 * rng.normal();
        }
        using testing_support::series_of;
        if (classify_increment(series_of(base), series_of(raised), CompareParams{})
                .verdict == Verdict::Increment)
            ++hits;
        if (classify_increment(series_of(base), series_of(same), CompareParams{})
                .verdict == Verdict::NoIncrement)
            ++quiet;
    }
    return {hits == 100 && quiet >= 95,
            fmt("+5%% on 20 W: %d/100 INCREMENT (need 100); zero delta: %d/100 "
                "NO_INCREMENT (need >= 95)",
                hits, quiet)};
}

Outcome round_trip_fidelity() {
    ScratchDir dir("acceptance_round_trip");
    std::mt19937_64 gen(77);
    const CalibrationConfig cal;
    double worst_v = 0.0, worst_i = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        ScenarioConfig c;
        c.seed = gen();
        c.idle_duration = 5.0 + static_cast<double>(gen() % 20);
        c.boot_duration = 5.0 + static_cast<double>(gen() % 20);
        c.voltage_noise_sigma = 0.001 * static_cast<double>(gen() % 20);
        c.infection.spike_rate = static_cast<double>(gen() % 10);
        c.infection.spike_amplitude = 10.0;
        const GeneratedRun g = generate_run(c);
        const auto units = trial % 2 ? SampleUnits::Raw : SampleUnits::Engineering;
        const auto files =
            CaptureFiles::from_stem(dir.path() / ("run" + std::to_string(trial)));
        write_capture(g.run, cal, files, units);
        const CaptureRun back = read_capture(files);
        for (auto rail : kAllRails) {
            const auto &a = g.run.rails.at(rail);
            const auto &b = back.rails.at(rail);
            if (a.size() != b.size())
                return {false, fmt("run %d rail length changed", trial)};
            for (std::size_t i = 0; i < a.size(); ++i) {
                worst_v = std::max(worst_v, std::fabs(a.voltage[i] - b.voltage[i]) /
                                                cal.volts_per_count(rail));
                worst_i = std::max(worst_i, std::fabs(a.current[i] - b.current[i]) /
                                                cal.amps_per_count(rail));
            }
        }
    }
    const double limit = 0.5 * (1.0 + 1e-9);
    return {worst_v <= limit && worst_i <= limit,
            fmt("20 runs, worst error %.9f LSB on voltage and %.9f LSB on current "
                "(limit 0.5)",
                worst_v, worst_i)};
}

Outcome affine_invariance() {
    std::mt19937_64 gen(88);
    std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
    std::uniform_real_distribution<double> offset(-1000.0, 1000.0);
    int unchanged = 0;
    for (int trial = 0; trial < 50; ++trial) {
        ScenarioConfig c;
        c.seed = gen();
        c.idle_duration = 10.0 + static_cast<double>(gen() % 30);
        const GeneratedRun g = generate_run(c);
        const PowerSeries p = compute_power(g.run.rails.at(c.marker_rail));
        const MarkerList reference = detect_markers(p, MarkerParams{});
        PowerSeries moved = p;
        const double scale = std::pow(10.0, log_scale(gen));
        const double shift = offset(gen);
        for (double &w : moved.power)
            w = scale * w + shift;
        const MarkerList found = detect_markers(moved, MarkerParams{});
        bool same = found.size() == reference.size() && reference.size() == 18;
        for (std::size_t k = 0; same && k < found.size(); ++k)
            same = found[k].start_index == reference[k].start_index &&
                   found[k].end_index == reference[k].end_index;
        unchanged += same;
    }
    return {unchanged == 50,
            fmt("%d/50 randomized runs keep identical marker indices under "
                "c*P + d, c in [1e-3, 1e3], d in [-1000, 1000]",
                unchanged)};
}

Outcome determinism() {
    ScratchDir dir("acceptance_determinism");
    testing_support::spit(dir.path() / "scenario.json", R"({
        "seed": 4242,
        "infection": {"delta_power": {"5v": {"idle": 1.0}}, "lag_s": 0.4,
                      "spike_rate": 4, "spike_amplitude": 15}
    })");
    std::ostringstream err;
    std::vector<std::string> names;
    auto pipeline = [&](const std::string &tag) -> bool {
        const fs::path root = dir.path() / tag;
        if (cli::cmd_synth({dir.path() / "scenario.json", root / "runs", 2, {}}, err))
            return false;
        cli::AnalyzeOptions analyze;
        analyze.captures = {root / "runs" / "synthetic-d1.csv",
                            root / "runs" / "synthetic-d2.csv"};
        analyze.out_dir = root / "analysis";
        if (cli::cmd_analyze(analyze, err))
            return false;
        cli::CompareOptions compare;
        compare.runs = analyze.captures;
        compare.out = root / "analysis" / "compare.json";
        return cli::cmd_compare(compare, err) == 0;
    };
    if (!pipeline("first") || !pipeline("second"))
        return {false, "pipeline failed: " + err.str()};
    std::size_t files = 0;
    for (const auto &entry : fs::recursive_directory_iterator(dir.path() / "first")) {
        if (!entry.is_regular_file())
            continue;
        const fs::path rel = fs::relative(entry.path(), dir.path() / "first");
        if (slurp(entry.path()) != slurp(dir.path() / "second" / rel))
            return {false, "differs: " + rel.string()};
        ++files;
    }
    return {files > 0, fmt("%zu output files byte-identical across two full "
                           "synth/analyze/compare runs",
                           files)};
}

} // namespace

int main() {
    check("marker protocol", marker_protocol);
    check("sampling arithmetic", sampling_arithmetic);
    check("power identity", power_identity);
    check("fraction reproduction", fraction_reproduction);
    check("lag recovery", lag_recovery);
    check("verdict soundness", verdict_soundness);
    check("round-trip fidelity", round_trip_fidelity);
    check("scale/offset invariance", affine_invariance);
    check("determinism", determinism);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
