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


#ifndef SIPD_DISCRETIZE_HPP
#define SIPD_DISCRETIZE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sipd/bundle.hpp"
#include "sipd/nlp.hpp"
#include "sipd/sensitivity.hpp"
#include "sipd/subproblems.hpp"

namespace sipd {

using Discretization = std::vector<Vec>;

enum class Method { bf, opt, greedy, two_greedy, hybrid, g_opt, g_greedy, g_two_greedy, g_hybrid };

inline const char* to_string(Method m)
{
    switch (m) {
    case Method::bf: return "bf";
    case Method::opt: return "opt";
    case Method::greedy: return "greedy";
    case Method::two_greedy: return "2greedy";
    case Method::hybrid: return "hybrid";
    case Method::g_opt: return "g-opt";
    case Method::g_greedy: return "g-greedy";
    case Method::g_two_greedy: return "g-2greedy";
    case Method::g_hybrid: return "g-hybrid";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string& s)
{
    for (Method m : {Method::bf, Method::opt, Method::greedy, Method::two_greedy, Method::hybrid, Method::g_opt,
                     Method::g_greedy, Method::g_two_greedy, Method::g_hybrid}) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

inline bool is_generalized(Method m)
{
    return m == Method::g_opt || m == Method::g_greedy || m == Method::g_two_greedy || m == Method::g_hybrid;
}

enum class TraceStatus { converged_to_vstar, eps_feasible, iter_limit, time_limit };

inline const char* to_string(TraceStatus s)
{
    switch (s) {
    case TraceStatus::converged_to_vstar: return "converged_to_vstar";
    case TraceStatus::eps_feasible: return "eps_feasible";
    case TraceStatus::iter_limit: return "iter_limit";
    case TraceStatus::time_limit: return "time_limit";
    }
    return "?";
}

struct TraceRecord {
    int k = 0;
    double lbd = 0.0;
    Vec x;
    double g_xk = 0.0;
    Vec yhat;
    std::optional<double> maxmin;        // certified lower bound of the candidate
    std::optional<double> maxmin_local;  // value reported by the outer bundle solve
    bool accepted = false;
    int cutset_size = 0;                 // size of the discretization used for lbd
    bool certified = true;
};

struct SolveTrace {
    std::string instance;
    Method method = Method::bf;
    std::vector<TraceRecord> records;
    TraceStatus status = TraceStatus::iter_limit;

    [[nodiscard]] int iterations() const { return records.empty() ? 0 : records.back().k; }
    [[nodiscard]] bool converged() const
    {
        return status == TraceStatus::converged_to_vstar || status == TraceStatus::eps_feasible;
    }
    [[nodiscard]] double final_lbd() const { return records.empty() ? -kInf : records.back().lbd; }
    [[nodiscard]] bool certified_all() const
    {
        return std::all_of(records.begin(), records.end(), [](const TraceRecord& r) { return r.certified; });
    }
    [[nodiscard]] std::vector<double> lbds() const
    {
        std::vector<double> v;
        for (const auto& r : records) v.push_back(r.lbd);
        return v;
    }
};

struct DriverOptions {
    double eps_f = 1e-8;
    double delta = 1e-8;
    int K = 3;
    int iter_cap = 100;
    std::uint64_t seed = 0;
    double conv_tol = 1e-3;         // absolute or relative distance to the known optimum
    bool stop_at_vstar = true;
    double time_limit = kInf;       // seconds for the whole run
    int starts = 4;                 // multistart width of the inner solves
    double smoothing = 100.0;       // smoothing parameter of the projected cuts
    GlobalOptions global;
    NlpOptions nlp;
    BundleParams bundle;
    // Test hooks.
    bool fail_maxmin_oracle = false;
    bool force_sensitivity_failure = false;
};

/// Convergence of a lower bound to a known optimal value.
inline bool lbd_converged(double lbd, double vstar, double tol)
{
    const double gap = std::abs(lbd - vstar);
    return gap <= tol || gap <= tol * std::abs(vstar);
}

struct ValueResult {
    double value = kInf;
    Vec subgrad;
    bool valid = false;
    Vec x;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k)
{
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + k + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Constraint g(x, y) with the y block read from parameters p[offset + j].
inline Expr param_constraint(const SipInstance& inst, int offset)
{
    std::vector<Expr> ys;
    for (int j = 1; j <= inst.dy; ++j) ys.push_back(Expr::p(offset + j));
    if (!inst.y_is_box()) ys = inst.project_y_expr(ys, false, 0.0);
    return substitute(inst.g, VarKind::Y, [&](int i) -> std::optional<Expr> { return ys[i - 1]; });
}

inline Box repeat_box(const Box& b, int times)
{
    Box r;
    for (int i = 0; i < times; ++i) {
        r.lo.insert(r.lo.end(), b.lo.begin(), b.lo.end());
        r.hi.insert(r.hi.end(), b.hi.begin(), b.hi.end());
    }
    return r;
}

inline std::vector<Vec> split(const Vec& z, int dim)
{
    std::vector<Vec> out;
    for (std::size_t i = 0; i + dim <= z.size(); i += dim) out.emplace_back(z.begin() + i, z.begin() + i + dim);
    return out;
}

inline Vec join(const std::vector<Vec>& pts)
{
    Vec z;
    for (const Vec& p : pts) z.insert(z.end(), p.begin(), p.end());
    return z;
}

}  // namespace detail

/**
 * Local value functions of the inner minimization
 *   min f(x) s.t. g(x, y) <= 0 for fixed points and free points, x in X,
 * with the gradient with respect to the free points from the sensitivity module.
 * Successive solves are warm-started from the previous minimizer.
 */
class InnerSolver {
public:
    InnerSolver(const SipInstance& inst, const DriverOptions& opt, std::uint64_t seed)
        : inst_(inst), opt_(opt), seed_(seed)
    {
    }

    ValueResult phi(const std::vector<Vec>& ys) { return solve({}, ys); }
    ValueResult psi(const Discretization& fixed, const Vec& y) { return solve(fixed, {y}); }

    ValueResult solve(const Discretization& fixed, const std::vector<Vec>& free)
    {
        Nlp nlp{inst_.f, {}, inst_.X, {}, false};
        for (const Vec& y : fixed) nlp.constraints.push_back(point_constraint(inst_, inst_.project_y(y)));
        for (std::size_t i = 0; i < free.size(); ++i) {
            if (free[i].size() != static_cast<std::size_t>(inst_.dy)) throw std::invalid_argument("point has wrong dimension");
            nlp.constraints.push_back(detail::param_constraint(inst_, static_cast<int>(i) * inst_.dy));
            nlp.p.insert(nlp.p.end(), free[i].begin(), free[i].end());
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
        so.keep_weak_general = keep_weak_general_;
        const SensReport rep = analyze(nlp, sol, so);
        if (!rep.applicable()) return r;
        r.subgrad = rep.value_grad;
        r.valid = true;
        return r;
    }

    void set_keep_weak_general(bool v) { keep_weak_general_ = v; }

private:
    const SipInstance& inst_;
    const DriverOptions& opt_;
    std::uint64_t seed_;
    std::uint64_t calls_ = 0;
    Vec warm_;
    bool keep_weak_general_ = true;
};

/// phi_k(y^1, ..., y^k): value and gradient with respect to all points.
inline ValueResult phi(const SipInstance& inst, const std::vector<Vec>& ys, const DriverOptions& opt = {})
{
    return InnerSolver(inst, opt, opt.seed).phi(ys);
}

/// psi_k(y; fixed): value and gradient with respect to the free point only.
inline ValueResult psi(const SipInstance& inst, const Discretization& fixed, const Vec& y, const DriverOptions& opt = {})
{
    return InnerSolver(inst, opt, opt.seed).psi(fixed, y);
}

namespace detail {

class Clock {
public:
    explicit Clock(double limit) : limit_(limit), start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double elapsed() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    [[nodiscard]] double remaining() const { return limit_ - elapsed(); }
    [[nodiscard]] bool expired() const { return remaining() <= 0.0; }

private:
    double limit_;
    std::chrono::steady_clock::time_point start_;
};

inline GlobalOptions global_for(const DriverOptions& opt, const Clock& clock)
{
    GlobalOptions g = opt.global;
    g.time_limit = std::min(g.time_limit, std::max(clock.remaining(), 0.0));
    return g;
}

inline bool same_point(const Vec& a, const Vec& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-12 * (1.0 + std::abs(a[i]))) return false;
    }
    return true;
}

// Outcome of one outer (max-min) solve: candidate points and the bundle value.
struct MaxMin {
    bool ok = false;
    Discretization points;
    double value = -kInf;
};

inline MaxMin solve_maxmin(const SipInstance& inst, const DriverOptions& opt, InnerSolver& inner,
                           const Discretization& fixed, const std::vector<Vec>& start, int k)
{
    MaxMin mm;
    const int nfree = static_cast<int>(start.size());
    Oracle oracle = [&](const Vec& z) -> OracleResult {
        if (opt.fail_maxmin_oracle) return {};
        const ValueResult v = inner.solve(fixed, split(z, inst.dy));
        return {v.value, v.subgrad, v.valid};
    };
    BundleParams bp = opt.bundle;
    bp.seed = mix_seed(opt.seed, 7919u * static_cast<std::uint64_t>(k));
    const Box box = repeat_box(inst.Y, nfree);
    const BundleResult br = maximize(oracle, box.project(join(start)), box, bp);
    if (br.status == BundleStatus::oracle_failed_restart_exhausted || br.z.empty()) return mm;
    mm.ok = true;
    mm.value = br.value;
    mm.points = fixed;
    for (const Vec& y : split(br.z, inst.dy)) mm.points.push_back(inst.project_y(y));
    return mm;
}

}  // namespace detail

/// Cutting-plane loop with global lower bounding and lower-level problems.
inline SolveTrace run_bf(const SipInstance& inst, const DriverOptions& opt = {})
{
    DriverOptions o = opt;
    o.fail_maxmin_oracle = true;
    SolveTrace t;
    t.instance = inst.name;
    t.method = Method::bf;
    detail::Clock clock(o.time_limit);
    Discretization yd;
    for (int k = 1;; ++k) {
        if (k > o.iter_cap) {
            t.status = TraceStatus::iter_limit;
            break;
        }
        if (clock.expired()) {
            t.status = TraceStatus::time_limit;
            break;
        }
        TraceRecord rec;
        rec.k = k;
        rec.cutset_size = static_cast<int>(yd.size());
        const GlobalResult lbp = solve_lbp(inst, yd, detail::global_for(o, clock));
        rec.lbd = lbp.value;
        rec.x = lbp.arg;
        rec.certified = lbp.certified();
        const GlobalResult llp = solve_llp(inst, rec.x, detail::global_for(o, clock));
        rec.g_xk = llp.value;
        rec.yhat = llp.arg;
        rec.certified = rec.certified && llp.certified();
        t.records.push_back(rec);
        if (o.stop_at_vstar && inst.vstar && lbd_converged(rec.lbd, *inst.vstar, o.conv_tol)) {
            t.status = TraceStatus::converged_to_vstar;
            break;
        }
        if (rec.g_xk <= o.eps_f) {
            t.status = TraceStatus::eps_feasible;
            break;
        }
        yd.push_back(rec.yhat);
    }
    return t;
}

/// Optimality-based discretization (OPT, GREEDY, 2GREEDY, HYBRID).
inline SolveTrace run_method(const SipInstance& inst, Method method, const DriverOptions& opt = {})
{
    if (method == Method::bf) return run_bf(inst, opt);
    if (is_generalized(method)) throw std::invalid_argument("run_method: use run_gmethod for generalized methods");
    if (opt.delta < 0.0) throw std::invalid_argument("run_method: delta must be nonnegative");
    if (method == Method::hybrid && opt.K < 1) throw std::invalid_argument("run_method: K must be at least 1");

    SolveTrace t;
    t.instance = inst.name;
    t.method = method;
    detail::Clock clock(opt.time_limit);
    InnerSolver inner(inst, opt, opt.seed);
    Discretization yd;
    std::optional<GlobalResult> cached;  // LBP of an accepted candidate
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
        rec.cutset_size = static_cast<int>(yd.size());
        const GlobalResult lbp = cached ? *cached : solve_lbp(inst, yd, detail::global_for(opt, clock));
        cached.reset();
        rec.lbd = lbp.value;
        rec.x = lbp.arg;
        rec.certified = lbp.certified();
        const GlobalResult llp = solve_llp(inst, rec.x, detail::global_for(opt, clock));
        rec.g_xk = llp.value;
        rec.yhat = llp.arg;
        rec.certified = rec.certified && llp.certified();

        const bool done_vstar = opt.stop_at_vstar && inst.vstar && lbd_converged(rec.lbd, *inst.vstar, opt.conv_tol);
        if (done_vstar || rec.g_xk <= opt.eps_f) {
            t.records.push_back(rec);
            t.status = done_vstar ? TraceStatus::converged_to_vstar : TraceStatus::eps_feasible;
            break;
        }

        Discretization base = yd;
        Discretization fallback = yd;
        fallback.push_back(rec.yhat);
        detail::MaxMin mm;
        const bool joint = method == Method::opt || (method == Method::hybrid && k <= opt.K);
        if (joint) {
            std::vector<Vec> start = yd;
            start.push_back(rec.yhat);
            mm = detail::solve_maxmin(inst, opt, inner, {}, start, k);
        } else if (method == Method::greedy || method == Method::hybrid) {
            mm = detail::solve_maxmin(inst, opt, inner, yd, {rec.yhat}, k);
        } else {
            base = fallback;
            Vec y0(static_cast<std::size_t>(inst.dy));
            for (int j = 0; j < inst.dy; ++j) y0[j] = 0.99 * rec.yhat[j] + 0.005 * (inst.Y.lo[j] + inst.Y.hi[j]);
            mm = detail::solve_maxmin(inst, opt, inner, base, {y0}, k);
        }

        if (mm.ok && !clock.expired()) {
            rec.maxmin_local = mm.value;
            const GlobalResult cand = solve_lbp(inst, mm.points, detail::global_for(opt, clock));
            rec.maxmin = cand.value;
            if (cand.certified() && cand.value >= rec.lbd + opt.delta) {
                rec.accepted = true;
                yd = mm.points;
                cached = cand;
            }
        }
        if (!rec.accepted) yd = fallback;
        t.records.push_back(rec);
    }
    return t;
}

}  // namespace sipd

#endif  // SIPD_DISCRETIZE_HPP
