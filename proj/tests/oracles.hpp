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

// Independent reference computations used as test oracles. Nothing here may
// call into the library code it checks.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

/// Elementwise V * I, accumulated in long double.
inline std::vector<double> power(const std::vector<double> &voltage,
                                 const std::vector<double> &current) {
    std::vector<double> out;
    for (std::size_t k = 0; k < voltage.size(); ++k)
        out.push_back(static_cast<double>(static_cast<long double>(voltage[k]) *
                                          static_cast<long double>(current[k])));
    return out;
}

/// Single-pass Pearson correlation of a[i] with b[i + lag], long double.
inline std::optional<long double> correlation(const std::vector<double> &a,
                                              const std::vector<double> &b,
                                              long lag) {
    const long n = static_cast<long>(a.size());
    long double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    long count = 0;
    for (long i = 0; i < n; ++i) {
        const long j = i + lag;
        if (j < 0 || j >= n)
            continue;
        const long double x = a[static_cast<std::size_t>(i)];
        const long double y = b[static_cast<std::size_t>(j)];
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
        ++count;
    }
    const long double cov = sab - sa * sb / count;
    const long double va = saa - sa * sa / count;
    const long double vb = sbb - sb * sb / count;
    if (va <= 1e-18L || vb <= 1e-18L)
        return std::nullopt;
    return cov / std::sqrt(va * vb);
}

/// Arg-max lag over every lag in [-limit, limit]: scan all, keep the best;
/// ties (within 1e-12) resolved towards smaller |lag|, then negative.
inline long best_lag(const std::vector<double> &a, const std::vector<double> &b,
                     long limit) {
    long best = 0;
    long double best_r = -2;
    for (long lag = -limit; lag <= limit; ++lag) {
        auto r = correlation(a, b, lag);
        if (!r)
            continue;
        const bool better = *r > best_r + 1e-12L;
        const bool tied = std::fabs(static_cast<double>(*r - best_r)) <= 1e-12;
        const bool preferred =
            std::labs(lag) < std::labs(best) ||
            (std::labs(lag) == std::labs(best) && lag < best);
        if (better || (tied && preferred)) {
            best = lag;
            best_r = *r;
        }
    }
    return best;
}

/// Mean of each full window of `width` samples.
inline std::vector<double> window_means(const std::vector<double> &x,
                                        std::size_t width) {
    std::vector<double> out;
    for (std::size_t start = 0; start + width <= x.size(); start += width) {
        long double sum = 0;
        for (std::size_t k = start; k < start + width; ++k)
            sum += x[k];
        out.push_back(static_cast<double>(sum / width));
    }
    return out;
}

} // namespace oracle
