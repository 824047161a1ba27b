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


#ifndef SIPD_CONTRACT_HPP
#define SIPD_CONTRACT_HPP

#include <cmath>
#include <span>
#include <vector>

#include "sipd/expr.hpp"
#include "sipd/interval.hpp"

namespace sipd {

namespace detail {

// v := v ∩ w, treating NaN endpoints of w as unbounded. False if empty.
// w is widened slightly to absorb rounding in the inverse operations.
inline bool narrow(Interval& v, Interval w)
{
    if (std::isnan(w.lo)) w.lo = -kInf;
    if (std::isnan(w.hi)) w.hi = kInf;
    if (std::isfinite(w.lo)) w.lo -= 1e-13 * (1.0 + std::abs(w.lo));
    if (std::isfinite(w.hi)) w.hi += 1e-13 * (1.0 + std::abs(w.hi));
    v = intersect(v, w);
    return !v.empty();
}

inline double signed_root(double v, int n)
{
    if (std::isinf(v)) return v;
    return v < 0.0 ? -std::pow(-v, 1.0 / n) : std::pow(v, 1.0 / n);
}

// Preimage of r under an even function |a|^k style map restricted to a.
inline bool narrow_even(Interval& a, const Interval& root)
{
    // Feasible set is [-root.hi, -root.lo] ∪ [root.lo, root.hi].
    if (a.lo > -root.lo) return narrow(a, root);
    if (a.hi < root.lo) return narrow(a, -root);
    return narrow(a, {-root.hi, root.hi});
}

}  // namespace detail

/**
 * Forward-backward constraint propagation of e(x) ∈ target over the x-box.
 *
 * Other variable kinds must be bound to constants. Returns false if the box
 * is proven to contain no point with e(x) ∈ target.
 */
inline bool hc4_revise(const Expr& e, Interval target, std::vector<Interval>& x)
{
    using detail::narrow;
    std::vector<Interval> v;
    try {
        evaluate_all<Interval>(e, Env<Interval>{x, {}, {}}, v);
    } catch (const DomainError&) {
        return true;
    } catch (const std::out_of_range&) {
        return true;
    }
    const auto& nodes = e.nodes();
    if (!narrow(v.back(), target)) return false;
    for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        const Interval r = v[static_cast<std::size_t>(i)];
        Interval* a = n.a >= 0 ? &v[static_cast<std::size_t>(n.a)] : nullptr;
        Interval* b = n.b >= 0 ? &v[static_cast<std::size_t>(n.b)] : nullptr;
        bool ok = true;
        switch (n.op) {
        case Op::Const: ok = r.contains(n.value); break;
        case Op::Var:
            if (n.kind == VarKind::X) ok = narrow(x[static_cast<std::size_t>(n.index) - 1], r);
            break;
        case Op::Neg: ok = narrow(*a, -r); break;
        case Op::Add: ok = narrow(*a, r - *b) && narrow(*b, r - *a); break;
        case Op::Sub: ok = narrow(*a, r + *b) && narrow(*b, *a - r); break;
        case Op::Mul:
            if (!b->contains(0.0)) ok = narrow(*a, r / *b);
            if (ok && !a->contains(0.0)) ok = narrow(*b, r / *a);
            break;
        case Op::Div:
            ok = narrow(*a, r * *b);
            if (ok && !r.contains(0.0)) ok = narrow(*b, *a / r);
            break;
        case Op::Exp: {
            Interval rr = r;
            if (!narrow(rr, {0.0, kInf}) || rr.hi <= 0.0) {
                ok = false;
                break;
            }
            ok = narrow(*a, {rr.lo > 0.0 ? std::log(rr.lo) : -kInf, std::log(rr.hi)});
            break;
        }
        case Op::Log: ok = narrow(*a, sipd::exp(r)); break;
        case Op::Sqrt: {
            Interval rr = r;
            if (!narrow(rr, {0.0, kInf})) {
                ok = false;
                break;
            }
            ok = narrow(*a, {rr.lo * rr.lo, rr.hi * rr.hi});
            break;
        }
        case Op::Abs: {
            Interval rr = r;
            if (!narrow(rr, {0.0, kInf})) {
                ok = false;
                break;
            }
            ok = detail::narrow_even(*a, rr);
            break;
        }
        case Op::Pow: {
            const auto k = detail::integer_exponent(nodes[static_cast<std::size_t>(n.b)]);
            if (!k || *k < 1) break;
            if (*k % 2 == 0) {
                Interval rr = r;
                if (!narrow(rr, {0.0, kInf})) {
                    ok = false;
                    break;
                }
                const Interval root{std::pow(rr.lo, 1.0 / *k), std::isinf(rr.hi) ? kInf : std::pow(rr.hi, 1.0 / *k)};
                ok = detail::narrow_even(*a, root);
            } else {
                ok = narrow(*a, {detail::signed_root(r.lo, *k), detail::signed_root(r.hi, *k)});
            }
            break;
        }
        case Op::Clamp: {
            Interval rr = r;
            if (!narrow(rr, {n.lo, n.hi})) {
                ok = false;
                break;
            }
            ok = narrow(*a, {rr.lo > n.lo ? rr.lo : -kInf, rr.hi < n.hi ? rr.hi : kInf});
            break;
        }
        case Op::SoftClamp: break;
        }
        if (!ok) return false;
    }
    return true;
}

/**
 * Linear (mean-value) contraction of e(x) <= rhs over the x-box.
 *
 * Uses e(x) ∈ e(m) + G·(x - m) with G an interval gradient enclosure and m the
 * box midpoint, solving for each coordinate in turn.
 */
inline bool mv_contract(const Expr& e, double rhs, std::vector<Interval>& x)
{
    const std::size_t n = x.size();
    std::vector<double> m(n);
    for (std::size_t j = 0; j < n; ++j) m[j] = x[j].mid();
    double em;
    Dual<Interval> g;
    try {
        em = eval(e, m);
        g = grad_interval(e, vars_of(VarKind::X, static_cast<int>(n)), x);
    } catch (const DomainError&) {
        return true;
    } catch (const std::out_of_range&) {
        return true;
    }
    if (!std::isfinite(em)) return true;
    std::vector<double> low(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        low[j] = (g.d[j] * (x[j] - Interval(m[j]))).lo;
        total += low[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double others = total - low[j];
        if (!std::isfinite(others)) continue;
        const double r = rhs - em - others;
        const double gl = g.d[j].lo;
        const double gh = g.d[j].hi;
        // Allowed t = x_j - m_j with min(g t) <= r for some g in [gl, gh].
        Interval pos{0.0, kInf};
        bool pos_ok = true;
        if (gl > 0.0) {
            if (r < 0.0) {
                pos_ok = false;
            } else {
                pos.hi = r / gl;
            }
        } else if (r < 0.0) {
            if (gl < 0.0) {
                pos.lo = r / gl;
            } else {
                pos_ok = false;
            }
        }
        Interval neg{-kInf, 0.0};
        bool neg_ok = true;
        if (gh < 0.0) {
            if (r < 0.0) {
                neg_ok = false;
            } else {
                neg.lo = r / gh;
            }
        } else if (r < 0.0) {
            if (gh > 0.0) {
                neg.hi = r / gh;
            } else {
                neg_ok = false;
            }
        }
        const Interval t = x[j] - Interval(m[j]);
        Interval allowed;
        bool any = false;
        for (auto [ok, part] : {std::pair{pos_ok, pos}, std::pair{neg_ok, neg}}) {
            if (!ok) continue;
            Interval piece = intersect(part, t);
            if (piece.empty()) continue;
            allowed = any ? hull(allowed, piece) : piece;
            any = true;
        }
        if (!any) return false;
        const Interval nx{m[j] + allowed.lo, m[j] + allowed.hi};
        x[j] = intersect(x[j], nx);
        if (x[j].empty()) return false;
        total -= low[j];
        low[j] = (g.d[j] * (x[j] - Interval(m[j]))).lo;
        total += low[j];
    }
    return true;
}

}  // namespace sipd

#endif  // SIPD_CONTRACT_HPP
