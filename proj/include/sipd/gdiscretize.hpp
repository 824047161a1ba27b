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


#ifndef SIPD_GDISCRETIZE_HPP
#define SIPD_GDISCRETIZE_HPP

#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sipd/discretize.hpp"

namespace sipd {

/// Smooth two-sided clamp of v into (yL, yU) and the diagonal of its Jacobian.
inline std::pair<Vec, Vec> smooth_proj(const Vec& v, const Vec& yl, const Vec& yu, double t)
{
    if (v.size() != yl.size() || v.size() != yu.size()) throw std::invalid_argument("smooth_proj: size mismatch");
    if (!(t > 0.0)) throw std::invalid_argument("smooth_proj: t must be positive");
    Vec out(v.size());
    Vec jac(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(yl[i] < yu[i])) throw std::invalid_argument("smooth_proj: requires yL < yU");
        out[i] = math::softclamp(v[i], yl[i], yu[i], t);
        jac[i] = math::softclamp_slope(v[i], yl[i], yu[i], t);
    }
    return {out, jac};
}

struct LlpJacobian {
    Vec y;
    double value = 0.0;
    std::optional<Matrix> J;  // dy*/dx, absent when the sensitivity hypotheses fail
    bool certified = true;
};

/// Global lower-level solution at x and the Jacobian of its solution mapping.
inline LlpJacobian llp_jacobian(const SipInstance& inst, const Vec& x, const DriverOptions& opt = {})
{
    LlpJacobian out;
    const GlobalResult r = solve_llp(inst, x, opt.global);
    out.y = r.arg;
    out.value = r.value;
    out.certified = r.certified();
    if (opt.force_sensitivity_failure) return out;
    if (inst.analytic_llp) {
        if (inst.analytic_llp_jacobian) out.J = inst.analytic_llp_jacobian(x);
        return out;
    }
    // max over y of g(p, y) with the decision variables renamed to x and x to p.
    Nlp nlp{rename(swap_kinds(inst.g, VarKind::X, VarKind::Y), VarKind::Y, VarKind::P), {}, inst.Y, x, true};
    const KktSolution sol = solve_local(nlp, out.y, opt.nlp);
    if (sol.status != KktStatus::kkt_ok) return out;
    if (sol.value < out.value - 1e-6 * (1.0 + std::abs(out.value))) return out;
    SensOptions so;
    so.act_tol = opt.nlp.act_tol;
    so.keep_weak_general = false;
    const SensReport rep = analyze(nlp, sol, so);
    if (rep.sol_jac) out.J = *rep.sol_jac;
    return out;
}

namespace detail {

inline int cut_size(const SipInstance& inst) { return inst.dy * inst.dx + inst.dy; }

inline Vec cut_to_vec(const GenCut& c)
{
    Vec v;
    for (Eigen::Index j = 0; j < c.A.rows(); ++j) {
        for (Eigen::Index k = 0; k < c.A.cols(); ++k) v.push_back(c.A(j, k));
    }
    v.insert(v.end(), c.b.begin(), c.b.end());
    return v;
}

inline GenCut cut_from_vec(const SipInstance& inst, const double* v)
{
    GenCut c{Matrix(inst.dy, inst.dx), Vec(static_cast<std::size_t>(inst.dy))};
    for (int j = 0; j < inst.dy; ++j) {
        for (int k = 0; k < inst.dx; ++k) c.A(j, k) = v[j * inst.dx + k];
    }
    for (int j = 0; j < inst.dy; ++j) c.b[j] = v[inst.dy * inst.dx + j];
    return c;
}

inline GenCutSet cuts_from_vec(const SipInstance& inst, const Vec& z)
{
    GenCutSet out;
    const int s = cut_size(inst);
    for (std::size_t i = 0; i + s <= z.size(); i += s) out.push_back(cut_from_vec(inst, z.data() + i));
    return out;
}

inline Vec cuts_to_vec(const GenCutSet& cs)
{
    Vec z;
    for (const GenCut& c : cs) {
        const Vec v = cut_to_vec(c);
        z.insert(z.end(), v.begin(), v.end());
    }
    return z;
}

/// Box for one cut: |A_jk| <= 10 wY_j / wX_k, b_j in [yL_j - wY_j, yU_j + wY_j].
inline Box cut_box(const SipInstance& inst)
{
    Box b;
    for (int j = 0; j < inst.dy; ++j) {
        for (int k = 0; k < inst.dx; ++k) {
            const double wx = inst.X.width(k);
            const double amax = wx > 0.0 ? 10.0 * inst.Y.width(j) / wx : 0.0;
            b.lo.push_back(-amax);
            b.hi.push_back(amax);
        }
    }
    for (int j = 0; j < inst.dy; ++j) {
        b.lo.push_back(inst.Y.lo[j] - inst.Y.width(j));
        b.hi.push_back(inst.Y.hi[j] + inst.Y.width(j));
    }
    return b;
}

/// g(x, proj(A x + b)) with (A, b) read from parameters starting at p[offset + 1].
inline Expr param_cut_constraint(const SipInstance& inst, int offset, bool smooth, double t)
{
    std::vector<Expr> lin;
    for (int j = 0; j < inst.dy; ++j) {
        Expr e = Expr::p(offset + inst.dy * inst.dx + j + 1);
        for (int k = 0; k < inst.dx; ++k) e = e + Expr::p(offset + j * inst.dx + k + 1) * Expr::x(k + 1);
        lin.push_back(e);
    }
    const std::vector<Expr> proj = inst.project_y_expr(lin, smooth, t);
    return substitute(inst.g, VarKind::Y, [&](int i) -> std::optional<Expr> { return proj[i - 1]; });
}

}  // namespace detail

/// Local value functions over generalized cuts with gradients in (A, b).
class GInnerSolver {
public:
    GInnerSolver(const SipInstance& inst, const DriverOptions& opt, std::uint64_t seed)
        : inst_(inst), opt_(opt), seed_(seed)
    {
    }

    ValueResult solve(const GenCutSet& fixed, const GenCutSet& free, bool smooth = true)
    {
        const double t = opt_.smoothing;
        Nlp nlp{inst_.f, {}, inst_.X, {}, false};
        for (const GenCut& c : fixed) nlp.constraints.push_back(cut_constraint(inst_, c, smooth, t));
        const int s = detail::cut_size(inst_);
        for (std::size_t i = 0; i < free.size(); ++i) {
            nlp.constraints.push_back(detail::param_cut_constraint(inst_, static_cast<int>(i) * s, smooth, t));
            const Vec v = detail::cut_to_vec(free[i]);
            nlp.p.insert(nlp.p.end(), v.begin(), v.end());
        }
        std::vector<Vec> cand;
        if (!warm_.empty()) cand.push_back(warm_);
        const KktSolution sol = multistart_local(nlp, opt_.starts, detail::mix_seed(seed_, calls_++), opt_.nlp, cand);
        ValueResult r;
        r.value = sol.value;
        r.x = sol.z;
        if (sol.status != KktStatus::kkt_ok) return r;
        warm_ = sol.z;
        if (opt_.force_sensitivity_failure) return r;
        SensOptions so;
        so.act_tol = opt_.nlp.act_tol;
        so.keep_weak_general = false;
        const SensReport rep = analyze(nlp, sol, so);
        if (!rep.applicable()) return r;
        r.subgrad = rep.value_grad;
        r.valid = true;
        return r;
    }

private:
    const SipInstance& inst_;
    const DriverOptions& opt_;
    std::uint64_t seed_;
    std::uint64_t calls_ = 0;
    Vec warm_;
};

/// phi^G over all cuts. smooth = false gives the certified exact-projection value (no gradient).
inline ValueResult phi_g(const SipInstance& inst, const GenCutSet& cuts, bool smooth, const DriverOptions& opt = {})
{
    if (!smooth) {
        const GlobalResult r = solve_glbp(inst, cuts, opt.global);
        ValueResult v;
        v.value = r.value;
        v.x = r.arg;
        v.valid = r.certified();
        return v;
    }
    return GInnerSolver(inst, opt, opt.seed).solve({}, cuts, true);
}

/// psi^G with one free cut.
inline ValueResult psi_g(const SipInstance& inst, const GenCutSet& fixed, const GenCut& cut, bool smooth,
                         const DriverOptions& opt = {})
{
    if (!smooth) {
        GenCutSet all = fixed;
        all.push_back(cut);
        return phi_g(inst, all, false, opt);
    }
    return GInnerSolver(inst, opt, opt.seed).solve(fixed, {cut}, true);
}

namespace detail {

struct GMaxMin {
    bool ok = false;
    GenCutSet cuts;
    double value = -kInf;
    BundleStatus status = BundleStatus::oracle_failed_restart_exhausted;
};

inline GMaxMin solve_gmaxmin(const SipInstance& inst, const DriverOptions& opt, GInnerSolver& inner,
                             const GenCutSet& fixed, const GenCutSet& start, int k, const Vec& xk)
{
    const int nfree = static_cast<int>(start.size());
    const Box box = repeat_box(cut_box(inst), nfree);
    Oracle oracle = [&](const Vec& z) -> OracleResult {
        if (opt.fail_maxmin_oracle) return {};
        const ValueResult v = inner.solve(fixed, cuts_from_vec(inst, z), true);
        return {v.value, v.subgrad, v.valid};
    };
    BundleParams bp = opt.bundle;
    bp.seed = mix_seed(opt.seed, 7919u * static_cast<std::uint64_t>(k));
    BundleResult br = maximize(oracle, box.project(cuts_to_vec(start)), box, bp);

    if (br.status == BundleStatus::single_iteration) {
        // One restart with the free (last) cut drawn at random through a random point of Y at x^k.
        std::mt19937_64 rng(mix_seed(opt.seed, 104729u * static_cast<std::uint64_t>(k) + 1));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        GenCutSet s2 = start;
        GenCut& c = s2.back();
        for (Eigen::Index i = 0; i < c.A.size(); ++i) c.A.data()[i] = u(rng);
        for (int j = 0; j < inst.dy; ++j) {
            double ax = 0.0;
            for (int q = 0; q < inst.dx; ++q) ax += c.A(j, q) * xk[q];
            c.b[j] = inst.Y.lo[j] + u(rng) * inst.Y.width(j) - ax;
        }
        BundleParams bp2 = bp;
        bp2.seed = mix_seed(bp.seed, 2);
        const BundleResult b2 = maximize(oracle, box.project(cuts_to_vec(s2)), box, bp2);
        if (b2.status != BundleStatus::oracle_failed_restart_exhausted && !b2.z.empty() &&
            (br.z.empty() || br.status == BundleStatus::oracle_failed_restart_exhausted || b2.value > br.value)) {
            br = b2;
        }
    }
    GMaxMin mm;
    mm.status = br.status;
    if (br.status == BundleStatus::oracle_failed_restart_exhausted || br.z.empty()) return mm;
    mm.ok = true;
    mm.value = br.value;
    mm.cuts = fixed;
    for (GenCut& c : cuts_from_vec(inst, br.z)) mm.cuts.push_back(std::move(c));
    return mm;
}

}  // namespace detail

/// Optimality-based generalized discretization (G-OPT, G-GREEDY, G-2GREEDY, G-HYBRID).
inline SolveTrace run_gmethod(const SipInstance& inst, Method method, const DriverOptions& opt = {})
{
    if (!is_generalized(method)) throw std::invalid_argument("run_gmethod: not a generalized method");
    if (opt.delta < 0.0) throw std::invalid_argument("run_gmethod: delta must be nonnegative");
    if (method == Method::g_hybrid && opt.K < 1) throw std::invalid_argument("run_gmethod: K must be at least 1");

    SolveTrace t;
    t.instance = inst.name;
    t.method = method;
    detail::Clock clock(opt.time_limit);
    GInnerSolver inner(inst, opt, opt.seed);
    GenCutSet cuts;
    std::optional<GlobalResult> cached;
    for (int k = 1;; ++k) {
        if (k > opt.iter_cap) {
            t.status = TraceStatus::iter_limit;
            break;
        }
        if (clock.expired()) {
            t.status = TraceStatus::time_limit;
            break;
        }
        TraceRecord rec;
        rec.k = k;
        rec.cutset_size = static_cast<int>(cuts.size());
        const GlobalResult lbp = cached ? *cached : solve_glbp(inst, cuts, detail::global_for(opt, clock));
        cached.reset();
        rec.lbd = lbp.value;
        rec.x = lbp.arg;
        rec.certified = lbp.certified();
        DriverOptions lo = opt;
        lo.global = detail::global_for(opt, clock);
        const LlpJacobian llp = llp_jacobian(inst, rec.x, lo);
        rec.g_xk = llp.value;
        rec.yhat = llp.y;
        rec.certified = rec.certified && llp.certified;

        const bool done_vstar = opt.stop_at_vstar && inst.vstar && lbd_converged(rec.lbd, *inst.vstar, opt.conv_tol);
        if (done_vstar || rec.g_xk <= opt.eps_f) {
            t.records.push_back(rec);
            t.status = done_vstar ? TraceStatus::converged_to_vstar : TraceStatus::eps_feasible;
            break;
        }

        // First-order cut through y*(x^k), or the zero-slope cut without a Jacobian.
        GenCut first{Matrix::Zero(inst.dy, inst.dx), rec.yhat};
        if (llp.J) {
            first.A = *llp.J;
            const Eigen::VectorXd jx = first.A * Eigen::Map<const Eigen::VectorXd>(rec.x.data(), inst.dx);
            for (int j = 0; j < inst.dy; ++j) first.b[j] = rec.yhat[j] - jx(j);
        }
        GenCutSet fallback = cuts;
        fallback.push_back(first);

        detail::GMaxMin mm;
        const bool joint = method == Method::g_opt || (method == Method::g_hybrid && k <= opt.K);
        if (joint) {
            mm = detail::solve_gmaxmin(inst, opt, inner, {}, fallback, k, rec.x);
        } else if (method == Method::g_greedy || method == Method::g_hybrid) {
            mm = detail::solve_gmaxmin(inst, opt, inner, cuts, {first}, k, rec.x);
        } else {
            std::mt19937_64 rng(detail::mix_seed(opt.seed, 15485863u * static_cast<std::uint64_t>(k)));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            GenCut c{Matrix(inst.dy, inst.dx), Vec(static_cast<std::size_t>(inst.dy))};
            for (int j = 0; j < inst.dy; ++j) {
                double ax = 0.0;
                for (int q = 0; q < inst.dx; ++q) {
                    c.A(j, q) = u(rng);
                    ax += c.A(j, q) * rec.x[q];
                }
                c.b[j] = 0.99 * rec.yhat[j] + 0.005 * (inst.Y.lo[j] + inst.Y.hi[j]) - ax;
            }
            mm = detail::solve_gmaxmin(inst, opt, inner, fallback, {c}, k, rec.x);
        }

        if (mm.ok && !clock.expired()) {
            rec.maxmin_local = mm.value;
            const GlobalResult cand = solve_glbp(inst, mm.cuts, detail::global_for(opt, clock));
            rec.maxmin = cand.value;
            if (cand.certified() && cand.value >= rec.lbd + opt.delta) {
                rec.accepted = true;
                cuts = mm.cuts;
                cached = cand;
            }
        }
        if (!rec.accepted) cuts = fallback;
        t.records.push_back(rec);
    }
    return t;
}

/// Dispatches to the matching driver.
inline SolveTrace run(const SipInstance& inst, Method method, const DriverOptions& opt = {})
{
    if (method == Method::bf) return run_bf(inst, opt);
    if (is_generalized(method)) return run_gmethod(inst, method, opt);
    return run_method(inst, method, opt);
}

}  // namespace sipd

#endif  // SIPD_GDISCRETIZE_HPP
