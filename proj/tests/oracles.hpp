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


// Independent oracles shared by the unit tests and the acceptance binary.

#ifndef SIPD_TESTS_ORACLES_HPP
#define SIPD_TESTS_ORACLES_HPP

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "sipd/sipd.hpp"

namespace sipd::oracle {

/**
 * Random parametric QP
 *   min 1/2 z'Hz + z'(Cp + d)  s.t.  a_i'z + b_i'p <= c_i,  z in [-3, 3]^n
 * with H positive definite, so the minimizer is unique.
 */
inline Nlp random_parametric_qp(std::mt19937_64& rng, int np = 2)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_int_distribution<int> dim(2, 4);
    const int n = dim(rng);
    const int m = std::uniform_int_distribution<int>(1, n)(rng);
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = nd(rng);
    const Eigen::MatrixXd h = r * r.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Nlp nlp;
    nlp.box = Box(Vec(n, -3.0), Vec(n, 3.0));
    Expr f(0.0);
    for (int i = 0; i < n; ++i) {
        Expr lin(nd(rng));
        for (int k = 0; k < np; ++k) lin = lin + Expr(nd(rng)) * Expr::p(k + 1);
        f = f + Expr::x(i + 1) * lin;
        for (int j = 0; j < n; ++j) f = f + Expr(0.5 * h(i, j)) * Expr::x(i + 1) * Expr::x(j + 1);
    }
    nlp.objective = f;
    for (int c = 0; c < m; ++c) {
        Expr g(-std::abs(nd(rng)) - 0.5);
        for (int i = 0; i < n; ++i) g = g + Expr(nd(rng)) * Expr::x(i + 1);
        for (int k = 0; k < np; ++k) g = g + Expr(nd(rng)) * Expr::p(k + 1);
        nlp.constraints.push_back(g);
    }
    for (int k = 0; k < np; ++k) nlp.p.push_back(0.5 * nd(rng));
    return nlp;
}

struct FdCheck {
    bool usable = false;       // classification succeeded at the point and all stencil points
    double max_rel_err = 0.0;  // over the gradient components
    Vec analytic;
    Vec numeric;
};

/**
 * Central differences of the local optimal value with respect to p.
 * Stencil solves are warm-started from the centre solution.
 */
inline FdCheck fd_value_gradient(Nlp nlp, const Vec& z0, double h = 1e-5, const SensOptions& so = {},
                                 const NlpOptions& no = {})
{
    FdCheck out;
    const KktSolution centre = solve_local(nlp, z0, no);
    if (centre.status != KktStatus::kkt_ok) return out;
    const SensReport rep = analyze(nlp, centre, so);
    if (!rep.applicable()) return out;
    out.analytic = rep.value_grad;
    const Vec p0 = nlp.p;
    for (std::size_t k = 0; k < p0.size(); ++k) {
        double v[2];
        for (int s = 0; s < 2; ++s) {
            nlp.p = p0;
            nlp.p[k] += s == 0 ? h : -h;
            const KktSolution r = solve_local(nlp, centre.z, no);
            if (r.status != KktStatus::kkt_ok || !analyze(nlp, r, so).applicable()) return out;
            v[s] = r.value;
        }
        out.numeric.push_back((v[0] - v[1]) / (2 * h));
    }
    out.usable = true;
    for (std::size_t k = 0; k < p0.size(); ++k) {
        const double scale = std::max(1.0, std::abs(out.numeric[k]));
        out.max_rel_err = std::max(out.max_rel_err, std::abs(out.analytic[k] - out.numeric[k]) / scale);
    }
    return out;
}

/// Inner problem of a single-point lower bounding problem with the point as parameter.
inline Nlp psi1_nlp(const SipInstance& inst, const Vec& y)
{
    Nlp nlp{inst.f, {detail::param_constraint(inst, 0)}, inst.X, y, false};
    return nlp;
}

/**
 * Grid minimum of a box-constrained problem (constraints by penalty-free
 * rejection) followed by a local polish from the best grid points.
 */
inline double grid_polish_min(const GlobalProblem& p, long points)
{
    const int n = static_cast<int>(p.box.size());
    const long per = n == 1 ? points : static_cast<long>(std::llround(std::pow(static_cast<double>(points), 1.0 / n)));
    std::vector<std::pair<double, Vec>> best;
    Vec x(static_cast<std::size_t>(n));
    std::vector<long> idx(static_cast<std::size_t>(n), 0);
    auto feasible = [&](const Vec& z, double tol) {
        for (const Expr& c : p.constraints)
            if (eval(c, z) > tol) return false;
        return true;
    };
    double grid_best = kInf;
    while (true) {
        for (int i = 0; i < n; ++i) x[i] = p.box.lo[i] + p.box.width(i) * static_cast<double>(idx[i]) / static_cast<double>(per - 1);
        if (feasible(x, 0.0)) {
            const double v = eval(p.objective, x);
            grid_best = std::min(grid_best, v);
            best.emplace_back(v, x);
            if (best.size() > 64) {
                std::nth_element(best.begin(), best.begin() + 16, best.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
                best.resize(16);
            }
        }
        int i = 0;
        while (i < n && ++idx[i] == per) idx[i++] = 0;
        if (i == n) break;
    }
    double polished = grid_best;
    const Nlp nlp{p.objective, p.constraints, p.box, {}, false};
    NlpOptions no;
    no.tol = 1e-12;
    for (const auto& [v, z] : best) {
        const KktSolution s = solve_local(nlp, z, no);
        if (feasible(s.z, 1e-9)) polished = std::min(polished, eval(p.objective, s.z));
    }
    return polished;
}

}  // namespace sipd::oracle

#endif  // SIPD_TESTS_ORACLES_HPP
