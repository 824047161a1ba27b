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


#ifndef SIPD_BUNDLE_HPP
#define SIPD_BUNDLE_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sipd/box.hpp"
#include "sipd/expr.hpp"
#include "sipd/qp.hpp"

namespace sipd {

/// One oracle answer: function value, a (sub)gradient, and whether both are usable.
struct OracleResult {
    double value = std::numeric_limits<double>::quiet_NaN();
    Vec subgrad;
    bool valid = false;
};

using Oracle = std::function<OracleResult(const Vec&)>;

enum class BundleStatus { converged, max_iter, oracle_failed_restart_exhausted, single_iteration };

inline const char* to_string(BundleStatus s)
{
    switch (s) {
    case BundleStatus::converged: return "converged";
    case BundleStatus::max_iter: return "max_iter";
    case BundleStatus::oracle_failed_restart_exhausted: return "oracle_failed_restart_exhausted";
    case BundleStatus::single_iteration: return "single_iteration";
    }
    return "?";
}

struct BundleParams {
    int max_calls = 50;
    double eps = 1e-6;         // stop when the predicted ascent falls below this
    double m = 0.1;            // serious-step parameter
    double gamma = 1e-2;       // distance weight in the locality measure
    int retries = 5;           // perturbed retries after an invalid answer
    double perturb = 1e-6;     // perturbation radius relative to the box width
    std::uint64_t seed = 0;
};

struct BundleResult {
    Vec z;
    double value = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    int serious_steps = 0;
    int oracle_calls = 0;
    BundleStatus status = BundleStatus::oracle_failed_restart_exhausted;
    std::vector<double> serious_values;  // center values after each serious step, including the start
};

/**
 * Proximal bundle method maximizing a nonsmooth, possibly nonconvex function over a box.
 *
 * Works on h = -f internally. The cutting-plane model uses subgradient locality
 * measures max(|linearization error|, gamma * |x - y|^2), so cuts from far away
 * points are pushed down for nonconvex h.
 */
inline BundleResult maximize(const Oracle& oracle, Vec z0, const Box& box, const BundleParams& params = {})
{
    const std::size_t n = box.size();
    BundleResult out;
    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    struct Point {
        Vec y;
        double h;
        Vec xi;
    };

    auto call = [&](const Vec& y, Point& p) {
        for (int attempt = 0; attempt <= params.retries; ++attempt) {
            if (out.oracle_calls >= params.max_calls) return false;
            Vec q = y;
            if (attempt > 0) {
                for (std::size_t j = 0; j < n; ++j) q[j] += params.perturb * box.width(j) * unit(rng);
                q = box.project(q);
            }
            OracleResult r = oracle(q);
            ++out.oracle_calls;
            if (r.valid && std::isfinite(r.value) && r.subgrad.size() == n) {
                p.y = q;
                p.h = -r.value;
                p.xi = r.subgrad;
                for (double& v : p.xi) v = -v;
                if (std::isnan(out.value) || r.value > out.value) {
                    out.value = r.value;
                    out.z = q;
                }
                return true;
            }
        }
        return false;
    };

    z0.resize(n, 0.0);
    z0 = box.project(z0);
    out.z = z0;
    Point center;
    if (!call(z0, center)) {
        out.status = BundleStatus::oracle_failed_restart_exhausted;
        return out;
    }
    out.serious_values.push_back(-center.h);

    std::deque<Point> bundle{center};
    const std::size_t max_bundle = 2 * static_cast<std::size_t>(params.max_calls) + 2;
    const double width = std::max(box.max_width(), 1e-12);
    double gnorm = 0.0;
    for (double v : center.xi) gnorm += v * v;
    gnorm = std::sqrt(gnorm);
    double u = gnorm > 0.0 ? gnorm / (0.5 * width) : 1.0 / width;
    const double u_min = 1e-10;
    const double u_max = 1e10;
    bool converged = false;

    while (out.oracle_calls < params.max_calls) {
        ++out.iterations;
        // QP in (d, v): min v + u/2 |d|^2, xi_i'd - v <= alpha_i, lo <= x + d <= hi.
        const auto nb = static_cast<Eigen::Index>(bundle.size());
        const auto nn = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd hq = Eigen::MatrixXd::Zero(nn + 1, nn + 1);
        hq.topLeftCorner(nn, nn).diagonal().setConstant(u);
        Eigen::VectorXd cq = Eigen::VectorXd::Zero(nn + 1);
        cq(nn) = 1.0;
        Eigen::MatrixXd aq = Eigen::MatrixXd::Zero(nb + 2 * nn, nn + 1);
        Eigen::VectorXd bq(nb + 2 * nn);
        for (Eigen::Index i = 0; i < nb; ++i) {
            const Point& p = bundle[static_cast<std::size_t>(i)];
            double lin = p.h;
            double dist2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                lin += p.xi[j] * (center.y[j] - p.y[j]);
                dist2 += (center.y[j] - p.y[j]) * (center.y[j] - p.y[j]);
            }
            const double alpha = std::max(std::abs(center.h - lin), params.gamma * dist2);
            for (std::size_t j = 0; j < n; ++j) aq(i, static_cast<Eigen::Index>(j)) = p.xi[j];
            aq(i, nn) = -1.0;
            bq(i) = alpha;
        }
        for (Eigen::Index j = 0; j < nn; ++j) {
            aq(nb + j, j) = 1.0;
            bq(nb + j) = box.hi[j] - center.y[j];
            aq(nb + nn + j, j) = -1.0;
            bq(nb + nn + j) = center.y[j] - box.lo[j];
        }
        const QpResult qp = solve_qp(hq, cq, aq, bq);
        if (!qp.ok) break;
        const double pred = -qp.z(nn);
        if (!(pred > params.eps)) {
            converged = true;
            break;
        }
        Vec y(n);
        for (std::size_t j = 0; j < n; ++j) y[j] = center.y[j] + qp.z(static_cast<Eigen::Index>(j));
        y = box.project(y);
        Point trial;
        if (!call(y, trial)) break;
        if (trial.h <= center.h - params.m * pred) {
            const double ratio = (center.h - trial.h) / pred;
            center = trial;
            ++out.serious_steps;
            out.serious_values.push_back(-center.h);
            if (ratio > 0.5) u = std::max(u * 0.5, u_min);
        } else {
            // Null step: tighten only when the new cut says little about the centre.
            double lin = trial.h;
            for (std::size_t j = 0; j < n; ++j) lin += trial.xi[j] * (center.y[j] - trial.y[j]);
            if (std::abs(center.h - lin) > pred) u = std::min(u * 2.0, u_max);
        }
        bundle.push_back(trial);
        if (bundle.size() > max_bundle) bundle.pop_front();
    }

    if (out.serious_steps <= 1) {
        out.status = BundleStatus::single_iteration;
    } else {
        out.status = converged ? BundleStatus::converged : BundleStatus::max_iter;
    }
    return out;
}

}  // namespace sipd

#endif  // SIPD_BUNDLE_HPP
