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


#ifndef SIPD_SUBPROBLEMS_HPP
#define SIPD_SUBPROBLEMS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "sipd/global.hpp"
#include "sipd/instance.hpp"

namespace sipd {

/// An affine cut y = proj_Y(A x + b).
struct GenCut {
    Matrix A;
    Vec b;
};

using GenCutSet = std::vector<GenCut>;

/// Global maximum of g(x, .) over Y, reported as a maximization (value = G(x)).
inline GlobalResult solve_llp(const SipInstance& inst, const Vec& x, GlobalOptions opt = {})
{
    if (x.size() != static_cast<std::size_t>(inst.dx)) throw std::invalid_argument("solve_llp: x has wrong dimension");
    if (inst.analytic_llp) {
        const LlpPoint pt = inst.analytic_llp(x);
        GlobalResult r;
        r.value = pt.value;
        r.bound = pt.value;
        r.arg = pt.y;
        r.gap = 0.0;
        r.status = GlobalStatus::optimal;
        return r;
    }
    GlobalProblem prob{-rename(bind_values(inst.g, VarKind::X, x), VarKind::Y, VarKind::X), {}, inst.Y};
    GlobalResult r = minimize_global(prob, opt);
    r.value = -r.value;
    r.bound = -r.bound;
    return r;
}

/// Constraint g(x, y) <= 0 at a fixed y, as an expression in x.
inline Expr point_constraint(const SipInstance& inst, const Vec& y)
{
    return bind_values(inst.g, VarKind::Y, y);
}

/// Constraint g(x, proj_Y(A x + b)) <= 0; exact or smoothed projection.
inline Expr cut_constraint(const SipInstance& inst, const GenCut& cut, bool smooth = false, double t = 100.0)
{
    bool zero = true;
    for (Eigen::Index i = 0; i < cut.A.size(); ++i) zero = zero && cut.A.data()[i] == 0.0;
    if (zero) return point_constraint(inst, inst.project_y(cut.b));
    std::vector<Expr> lin;
    for (int j = 0; j < inst.dy; ++j) {
        Expr e(cut.b[j]);
        for (int k = 0; k < inst.dx; ++k) {
            const double a = cut.A(j, k);
            if (a != 0.0) e = e + Expr(a) * Expr::x(k + 1);
        }
        lin.push_back(e);
    }
    const std::vector<Expr> proj = inst.project_y_expr(lin, smooth, t);
    return substitute(inst.g, VarKind::Y, [&](int i) -> std::optional<Expr> { return proj[i - 1]; });
}

/// Lower bounding problem over a finite discretization.
inline GlobalResult solve_lbp(const SipInstance& inst, const std::vector<Vec>& yd, const GlobalOptions& opt = {})
{
    GlobalProblem prob{inst.f, {}, inst.X};
    for (const Vec& y : yd) {
        if (y.size() != static_cast<std::size_t>(inst.dy)) throw std::invalid_argument("solve_lbp: point has wrong dimension");
        prob.constraints.push_back(point_constraint(inst, y));
    }
    return minimize_global(prob, opt);
}

/// Lower bounding problem over generalized cuts, with the exact projection.
inline GlobalResult solve_glbp(const SipInstance& inst, const GenCutSet& cuts, const GlobalOptions& opt = {})
{
    GlobalProblem prob{inst.f, {}, inst.X};
    for (const GenCut& c : cuts) {
        if (c.A.rows() != inst.dy || c.A.cols() != inst.dx || c.b.size() != static_cast<std::size_t>(inst.dy)) {
            throw std::invalid_argument("solve_glbp: cut has wrong dimensions");
        }
        prob.constraints.push_back(cut_constraint(inst, c));
    }
    return minimize_global(prob, opt);
}

}  // namespace sipd

#endif  // SIPD_SUBPROBLEMS_HPP
