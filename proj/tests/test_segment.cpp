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

#include "powertrace/power.hpp"
#include "powertrace/segment.hpp"
#include "powertrace/synth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace powertrace;
using testing_support::series_of;

namespace {

PowerSeries marker_power(const CaptureRun &run) {
    return compute_power(run.rails.at(RailKind::Rail12VCpu));
}

std::size_t edge_error(const Marker &a, const Marker &b) {
    auto d = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
    return std::max(d(a.start_index, b.start_index), d(a.end_index, b.end_index));
}

} // namespace

TEST(MarkerParams, Validation) {
    MarkerParams p;
    EXPECT_NO_THROW(p.validate());
    p.lo_fraction = 0.7;
    EXPECT_THROW(p.validate(), ConfigError);
    p = MarkerParams{};
    p.hi_fraction = 1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = MarkerParams{};
    p.min_duration = 9.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = MarkerParams{};
    p.smooth_window = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(MovingAverage, CenteredWithShrinkingEdges) {
    const auto avg = moving_average({0, 0, 10, 0, 0}, 3);
    EXPECT_EQ(avg, (std::vector<double>{0, 10.0 / 3, 10.0 / 3, 10.0 / 3, 0}));
    EXPECT_EQ(moving_average({4, 8}, 4), (std::vector<double>{6, 6}));
}

TEST(DetectMarkers, EighteenInjectedRectangles) {
    ScenarioConfig c;
    c.seed = 21;
    const GeneratedRun g = generate_run(c);
    const MarkerList found = detect_markers(marker_power(g.run), MarkerParams{});
    ASSERT_EQ(found.size(), 18u);
    for (std::size_t i = 0; i < found.size(); ++i) {
        EXPECT_LE(edge_error(found[i], g.truth.markers[i]), 5u) << "marker " << i;
        EXPECT_GT(found[i].peak_power, 60.0);
    }
}

TEST(DetectMarkers, NoiselessRunRecoversGroundTruthWithinOneSample) {
    const GeneratedRun g = generate_run(testing_support::quiet_scenario(3));
    const MarkerList found = detect_markers(marker_power(g.run), MarkerParams{});
    ASSERT_EQ(found.size(), g.truth.markers.size());
    for (std::size_t i = 0; i < found.size(); ++i)
        EXPECT_LE(edge_error(found[i], g.truth.markers[i]), 1u) << "marker " << i;
}

TEST(DetectMarkers, ConstantSeriesHasNoDynamicRange) {
    try {
        detect_markers(series_of(std::vector<double>(3000, 5.0)), MarkerParams{});
        FAIL() << "expected DetectionError";
    } catch (const DetectionError &e) {
        EXPECT_STREQ(e.what(), "no dynamic range");
    }
    // Edge windows average fewer samples; rounding there is not range.
    EXPECT_THROW(detect_markers(series_of(std::vector<double>(3000, 0.1)),
                                MarkerParams{}),
                 DetectionError);
}

TEST(DetectMarkers, ShortSeriesIsRejected) {
    std::vector<double> x(800, 1.0);
    x[400] = 5.0;
    EXPECT_THROW(detect_markers(series_of(x), MarkerParams{}), DetectionError);
}

TEST(DetectMarkers, DurationGateDropsOneSecondSpike) {
    std::vector<double> x(3000, 10.0);
    for (std::size_t k = 500; k < 600; ++k)
        x[k] = 60.0; // 1 s
    for (std::size_t k = 1500; k < 2000; ++k)
        x[k] = 60.0; // 5 s
    const MarkerList found = detect_markers(series_of(x), MarkerParams{});
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].start_index, 1500u);
    EXPECT_EQ(found[0].end_index, 2000u);
    EXPECT_EQ(found[0].peak_power, 60.0);
}

TEST(DetectMarkers, OverlongPlateauIsDropped) {
    std::vector<double> x(3000, 10.0);
    for (std::size_t k = 1000; k < 1900; ++k)
        x[k] = 60.0; // 9 s
    EXPECT_TRUE(detect_markers(series_of(x), MarkerParams{}).empty());
}

TEST(DetectMarkers, DeterministicAndInvariantUnderAffineMaps) {
    GaussianStream rng(77);
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        const PowerSeries p = marker_power(generate_run(c).run);
        const MarkerList reference = detect_markers(p, MarkerParams{});
        EXPECT_EQ(detect_markers(p, MarkerParams{}), reference);

        const double scale = 0.1 + 10.0 * rng.uniform();
        const double offset = -50.0 + 100.0 * rng.uniform();
        PowerSeries q = p;
        for (double &w : q.power)
            w = scale * w + offset;
        const MarkerList moved = detect_markers(q, MarkerParams{});
        ASSERT_EQ(moved.size(), reference.size());
        for (std::size_t i = 0; i < moved.size(); ++i) {
            EXPECT_EQ(moved[i].start_index, reference[i].start_index);
            EXPECT_EQ(moved[i].end_index, reference[i].end_index);
        }
    }
}

TEST(DetectRunMarkers, TooFewMarkersCarriesFoundCount) {
    ScenarioConfig c = testing_support::quiet_scenario();
    CaptureRun run = generate_run(c).run;
    run.schedule.entries.push_back(
        {MachineState::PostInfectionReboot, EventKind::Idle});
    run.schedule.expected_marker_count = 20;
    try {
        detect_run_markers(run, MarkerParams{});
        FAIL() << "expected SegmentationError";
    } catch (const SegmentationError &e) {
        EXPECT_EQ(e.found(), 18u);
    }
}

TEST(SegmentEvents, NineEntriesGiveThirtySixSegments) {
    ScenarioConfig c;
    c.seed = 8;
    const GeneratedRun g = generate_run(c);
    const MarkerList markers = detect_run_markers(g.run, MarkerParams{});
    const auto segments = segment_events(g.run, markers);
    ASSERT_EQ(segments.size(), 36u);

    for (const TruthEvent &te : g.truth.events)
        for (RailKind rail : kAllRails) {
            auto s = find_segment(segments, te.entry.state, te.entry.event, rail);
            ASSERT_TRUE(s);
            EXPECT_LE(std::labs(long(s->start_index) - long(te.start_index)), 5);
            EXPECT_LE(std::labs(long(s->end_index) - long(te.end_index)), 5);
        }

    // Segments never overlap markers and are ordered.
    for (const auto &s : segments)
        for (const auto &m : markers)
            EXPECT_TRUE(s.end_index <= m.start_index || m.end_index <= s.start_index);
    for (std::size_t i = 4; i < segments.size(); ++i)
        EXPECT_LE(segments[i - 4].end_index, segments[i].start_index);
}

TEST(SegmentEvents, SeventeenMarkersIsAnError) {
    const GeneratedRun g = generate_run(testing_support::quiet_scenario());
    MarkerList markers = detect_run_markers(g.run, MarkerParams{});
    markers.pop_back();
    try {
        segment_events(g.run, markers);
        FAIL() << "expected SegmentationError";
    } catch (const SegmentationError &e) {
        EXPECT_STREQ(e.what(), "expected 18, found 17");
        EXPECT_EQ(e.found(), 17u);
    }
}

TEST(SegmentEvents, EmptySegmentNamesTheEntry) {
    const GeneratedRun g = generate_run(testing_support::quiet_scenario());
    MarkerList markers = detect_run_markers(g.run, MarkerParams{});
    markers[3].start_index = markers[2].end_index;
    try {
        segment_events(g.run, markers);
        FAIL() << "expected SegmentationError";
    } catch (const SegmentationError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("entry 1"), std::string::npos) << msg;
        EXPECT_NE(msg.find("idle"), std::string::npos) << msg;
    }
}
