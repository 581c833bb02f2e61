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

#include "powertrace/synth.hpp"
#include "powertrace/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace testing_support {

/// A run with every rail held at its nominal voltage and a constant current.
inline powertrace::CaptureRun constant_run(std::size_t n, double period = 0.010,
                                           double current = 1.0) {
    powertrace::CaptureRun run;
    run.run_id = "constant";
    for (auto rail : powertrace::kAllRails)
        run.rails[rail] = powertrace::RailTrace{
            rail, period,
            std::vector<double>(n, powertrace::nominal_voltage(rail)),
            std::vector<double>(n, current)};
    return run;
}

/// Noise-free default scenario.
inline powertrace::ScenarioConfig quiet_scenario(std::uint64_t seed = 1) {
    powertrace::ScenarioConfig c;
    c.seed = seed;
    for (auto &[rail, sigma] : c.noise_sigma)
        sigma = 0.0;
    c.voltage_noise_sigma = 0.0;
    return c;
}

inline powertrace::PowerSeries series_of(std::vector<double> power,
                                         double period = 0.010,
                                         powertrace::RailKind rail =
                                             powertrace::RailKind::Rail12VCpu) {
    return powertrace::PowerSeries{rail, period, std::move(power), 0};
}

/// Directory under the system temp dir, removed on destruction.
class ScratchDir {
  public:
    explicit ScratchDir(const std::string &tag)
        : path_(std::filesystem::temp_directory_path() / ("powertrace_" + tag)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() { std::filesystem::remove_all(path_); }
    ScratchDir(const ScratchDir &) = delete;
    ScratchDir &operator=(const ScratchDir &) = delete;

    const std::filesystem::path &path() const { return path_; }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path &p, const std::string &text) {
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace testing_support
