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


#ifndef SIPD_SCAN_HPP
#define SIPD_SCAN_HPP

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sipd/subproblems.hpp"

namespace sipd {

enum class ScanKind { phi1, psi, yx };

struct ScanTable {
    std::vector<std::string> header;
    std::vector<Vec> rows;

    [[nodiscard]] Vec column(std::size_t j) const
    {
        Vec c;
        for (const Vec& r : rows) c.push_back(r.at(j));
        return c;
    }

    [[nodiscard]] std::string csv() const
    {
        std::ostringstream os;
        os.precision(17);
        for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
        os << '\n';
        for (const Vec& r : rows) {
            for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
            os << '\n';
        }
        return os.str();
    }
};

inline Vec grid_points(double lo, double hi, int n)
{
    Vec g;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1));
    return g;
}

/**
 * Value-function and solution-mapping scans.
 *
 * phi1: y against the certified lower bound with the single point y.
 * psi:  same with the points in `fixed` added.
 * yx:   x1 against the lower-level maximizer y*(x) and G(x); the other x
 *       coordinates are taken from `fixed` (default: the box centre).
 */
inline ScanTable scan(const SipInstance& inst, ScanKind kind, int grid, const Vec& fixed = {},
                      const GlobalOptions& opt = {})
{
    if (grid < 1) throw std::invalid_argument("grid must be positive");
    ScanTable t;
    if (kind == ScanKind::phi1 || kind == ScanKind::psi) {
        if (inst.dy != 1) throw std::invalid_argument("value-function scans need a one-dimensional Y");
        if (kind == ScanKind::phi1 && !fixed.empty()) throw std::invalid_argument("phi1 scans take no fixed points");
        std::vector<Vec> base;
        for (double v : fixed) {
            if (!inst.y_contains({v}, 1e-9)) throw std::invalid_argument("fixed point outside Y");
            base.push_back({v});
        }
        t.header = {"y1", kind == ScanKind::phi1 ? "phi1" : "psi"};
        for (double y : grid_points(inst.Y.lo[0], inst.Y.hi[0], grid)) {
            std::vector<Vec> yd = base;
            yd.push_back({y});
            t.rows.push_back({y, solve_lbp(inst, yd, opt).value});
        }
        return t;
    }
    if (fixed.size() + 1 != static_cast<std::size_t>(inst.dx) && !fixed.empty()) {
        throw std::invalid_argument("yx scans need d_x - 1 fixed coordinates");
    }
    Vec rest = fixed;
    if (rest.empty()) {
        for (int k = 1; k < inst.dx; ++k) rest.push_back(inst.X.mid()[k]);
    }
    t.header = {"x1"};
    for (int j = 1; j <= inst.dy; ++j) t.header.push_back("y" + std::to_string(j));
    t.header.push_back("G");
    for (double x1 : grid_points(inst.X.lo[0], inst.X.hi[0], grid)) {
        Vec x{x1};
        x.insert(x.end(), rest.begin(), rest.end());
        const GlobalResult r = solve_llp(inst, x, opt);
        Vec row{x1};
        row.insert(row.end(), r.arg.begin(), r.arg.end());
        row.push_back(r.value);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace sipd

#endif  // SIPD_SCAN_HPP
