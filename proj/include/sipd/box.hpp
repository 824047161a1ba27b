// Copyright 2026 The sipd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef SIPD_BOX_HPP
#define SIPD_BOX_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sipd/interval.hpp"

namespace sipd {

/// Axis-aligned box given by lower and upper corner vectors.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h))
    {
        if (lo.size() != hi.size()) throw std::invalid_argument("box corner dimensions differ");
    }

    [[nodiscard]] std::size_t size() const { return lo.size(); }
    [[nodiscard]] double width(std::size_t i) const { return hi[i] - lo[i]; }
    [[nodiscard]] double max_width() const
    {
        double w = 0.0;
        for (std::size_t i = 0; i < size(); ++i) w = std::max(w, width(i));
        return w;
    }

    [[nodiscard]] std::vector<double> mid() const
    {
        std::vector<double> m(size());
        for (std::size_t i = 0; i < size(); ++i) m[i] = 0.5 * (lo[i] + hi[i]);
        return m;
    }

    [[nodiscard]] bool valid() const
    {
        for (std::size_t i = 0; i < size(); ++i) {
            if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) return false;
        }
        return true;
    }

    [[nodiscard]] bool contains(const std::vector<double>& z, double tol = 0.0) const
    {
        if (z.size() != size()) return false;
        for (std::size_t i = 0; i < size(); ++i) {
            if (z[i] < lo[i] - tol || z[i] > hi[i] + tol) return false;
        }
        return true;
    }

    [[nodiscard]] std::vector<double> project(std::vector<double> z) const
    {
        for (std::size_t i = 0; i < size(); ++i) z[i] = std::clamp(z[i], lo[i], hi[i]);
        return z;
    }

    [[nodiscard]] std::vector<Interval> intervals() const
    {
        std::vector<Interval> r(size());
        for (std::size_t i = 0; i < size(); ++i) r[i] = {lo[i], hi[i]};
        return r;
    }

    static Box from_intervals(const std::vector<Interval>& iv)
    {
        Box b;
        for (const Interval& i : iv) {
            b.lo.push_back(i.lo);
            b.hi.push_back(i.hi);
        }
        return b;
    }
};

}  // namespace sipd

#endif  // SIPD_BOX_HPP
