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

#include <map>
#include <span>
#include <vector>

namespace powertrace {

/// power[k] = voltage[k] * current[k]. Negative products are kept and
/// counted in PowerSeries::negative_samples.
PowerSeries compute_power(const RailTrace &trace);

std::map<RailKind, PowerSeries> compute_power(const CaptureRun &run);

/// Number of whole samples in a window of the given length: floor(window /
/// period), at least one.
std::size_t window_samples(double window_s, double sample_period);

/// Means of consecutive non-overlapping windows; a trailing partial window is
/// dropped.
std::vector<double> power_summary(const PowerSeries &series, double window_s);
std::vector<double> windowed_means(std::span<const double> samples,
                                   std::size_t window);

/// Copy of samples [begin, end).
PowerSeries slice(const PowerSeries &series, std::size_t begin,
                  std::size_t end);

} // namespace powertrace
