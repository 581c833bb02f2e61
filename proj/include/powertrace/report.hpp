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
#include "powertrace/segment.hpp"
#include "powertrace/trace.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace powertrace {

/// Analysis of one run: markers, segments and per-segment statistics.
nlohmann::json analysis_json(const CaptureRun &run, const MarkerList &markers,
                             const std::vector<EventSegment> &segments);

nlohmann::json to_json(const ComparisonReport &report);
ComparisonReport comparison_from_json(const nlohmann::json &j);

nlohmann::json to_json(const AggregateReport &report);
nlohmann::json to_json(const MarkerParams &params);
nlohmann::json to_json(const CompareParams &params);

/// All datasets listed in a compare report document.
std::vector<std::vector<ComparisonReport>>
datasets_from_json(const nlohmann::json &document);

/// Two-column `time_s,power_w` CSV, time measured from the first sample.
void write_plot_csv(const std::filesystem::path &path, const PowerSeries &series);

/// Dump with two-space indent and a trailing newline.
void write_json(const std::filesystem::path &path, const nlohmann::json &j);

} // namespace powertrace
