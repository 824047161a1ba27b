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


#ifndef SIPD_GLOBAL_HPP
#define SIPD_GLOBAL_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "sipd/box.hpp"
#include "sipd/contract.hpp"
#include "sipd/expr.hpp"
#include "sipd/nlp.hpp"
#include "sipd/qp.hpp"

namespace sipd {

/// min f(x) s.t. c_i(x) <= 0, x in box; expressions over x only.
struct GlobalProblem {
    Expr objective;
    std::vector<Expr> constraints;
    Box box;
};

enum class GlobalStatus { optimal, gap_limit, node_limit, infeasible };

inline const char* to_string(GlobalStatus s)
{
    switch (s) {
    case GlobalStatus::optimal: return "optimal";
    case GlobalStatus::gap_limit: return "gap_limit";
    case GlobalStatus::node_limit: return "node_limit";
    case GlobalStatus::infeasible: return "infeasible";
    }
    return "?";
}

struct GlobalOptions {
    double tol = 1e-6;
    long node_limit = 1000000;
    double time_limit = std::numeric_limits<double>::infinity();  // seconds
    double feas_tol = 1e-8;
    int polish_every = 16;
    int root_starts = 4;
    std::uint64_t seed = 0;
};

struct GlobalResult {
    double value = std::numeric_limits<double>::infinity();
    Vec arg;
    double bound = -std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    long nodes = 0;
    GlobalStatus status = GlobalStatus::infeasible;

    [[nodiscard]] bool certified() const { return status == GlobalStatus::optimal || status == GlobalStatus::infeasible; }
};

namespace detail {

class BranchAndBound {
public:
    BranchAndBound(const GlobalProblem& prob, const GlobalOptions& opt)
        : prob_(prob), opt_(opt), n_(static_cast<int>(prob.box.size())), wrt_(vars_of(VarKind::X, n_))
    {
        nlp_.objective = prob.objective;
        nlp_.constraints = prob.constraints;
        nlp_.box = prob.box;
    }

    GlobalResult run()
    {
        const auto start = std::chrono::steady_clock::now();
        GlobalResult res;
        if (!prob_.box.valid()) throw std::invalid_argument("global solve over an invalid box");

        // Root incumbents.
        std::vector<Vec> cands{prob_.box.mid()};
        for (Vec& v : latin_hypercube(prob_.box, opt_.root_starts, opt_.seed)) cands.push_back(std::move(v));
        for (const Vec& z : cands) {
            try_point(z);
            polish(z);
        }

        std::priority_queue<Item> queue;
        long next_id = 0;
        std::vector<std::vector<Interval>> boxes;
        double lost_bound = kInf;    // bound of boxes too small to split further
        double pruned_bound = kInf;  // smallest bound among boxes fathomed by the incumbent

        auto push = [&](std::vector<Interval> b) {
            double lb;
            if (!process(b, lb)) return;
            if (lb > ub_ - opt_.tol) {
                pruned_bound = std::min(pruned_bound, lb);
                return;
            }
            boxes.push_back(std::move(b));
            queue.push({lb, next_id++, static_cast<std::size_t>(boxes.size() - 1)});
        };
        push(prob_.box.intervals());

        long processed = 0;
        bool limit = false;
        while (!queue.empty()) {
            const Item top = queue.top();
            if (top.lb >= ub_ - opt_.tol) break;
            if (processed >= opt_.node_limit) {
                limit = true;
                break;
            }
            if ((processed & 63) == 0 && std::isfinite(opt_.time_limit)) {
                const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                if (el > opt_.time_limit) {
                    limit = true;
                    break;
                }
            }
            queue.pop();
            ++processed;
            std::vector<Interval> b = std::move(boxes[top.slot]);
            boxes[top.slot].clear();

            if (opt_.polish_every > 0 && processed % opt_.polish_every == 0) polish(mid_of(b));

            // Widest coordinate relative to the root box.
            int split = -1;
            double best = 0.0;
            for (int j = 0; j < n_; ++j) {
                const double w0 = prob_.box.width(j);
                const double w = b[j].width();
                const double rel = w0 > 0.0 ? w / w0 : 0.0;
                if (w > 1e-15 * (1.0 + std::abs(b[j].mid())) && rel > best) {
                    best = rel;
                    split = j;
                }
            }
            if (split < 0 || best < 1e-13) {
                lost_bound = std::min(lost_bound, top.lb);
                continue;
            }
            const double c = b[split].mid();
            std::vector<Interval> left = b;
            std::vector<Interval> right = std::move(b);
            left[split].hi = c;
            right[split].lo = c;
            push(std::move(left));
            push(std::move(right));
        }

        double bound = std::min({lost_bound, pruned_bound, ub_});
        if (!queue.empty()) bound = std::min(bound, queue.top().lb);
        res.nodes = processed + 1;
        res.value = ub_;
        res.arg = arg_;
        res.bound = bound;
        if (!std::isfinite(ub_)) {
            res.gap = kInf;
            if (queue.empty() && !std::isfinite(lost_bound)) {
                res.status = GlobalStatus::infeasible;
                res.gap = 0.0;
            } else {
                res.status = limit ? GlobalStatus::node_limit : GlobalStatus::gap_limit;
            }
            return res;
        }
        res.gap = std::max(0.0, ub_ - bound);
        if (res.gap <= opt_.tol) {
            res.status = GlobalStatus::optimal;
        } else {
            res.status = limit ? GlobalStatus::node_limit : GlobalStatus::gap_limit;
        }
        return res;
    }

private:
    struct Item {
        double lb;
        long id;
        std::size_t slot;
        bool operator<(const Item& o) const
        {
            // priority_queue pops the largest: invert for best-first, then lowest id.
            if (lb != o.lb) return lb > o.lb;
            return id > o.id;
        }
    };

    static Vec mid_of(const std::vector<Interval>& b)
    {
        Vec m(b.size());
        for (std::size_t j = 0; j < b.size(); ++j) m[j] = b[j].mid();
        return m;
    }

    void try_point(const Vec& z)
    {
        try {
            for (const Expr& c : prob_.constraints) {
                if (!(eval(c, z) <= opt_.feas_tol)) return;
            }
            const double f = eval(prob_.objective, z);
            if (std::isfinite(f) && f < ub_) {
                ub_ = f;
                arg_ = z;
            }
        } catch (const DomainError&) {
        }
    }

    void polish(const Vec& z0)
    {
        NlpOptions o;
        o.max_outer = 50;
        o.max_inner = 100;
        KktSolution s = solve_local(nlp_, z0, o);
        if (s.z.size() == static_cast<std::size_t>(n_)) try_point(s.z);
    }

    // Contracts the box and computes its lower bound; false if the box is excluded.
    bool process(std::vector<Interval>& b, double& lb)
    {
        for (int round = 0; round < 4; ++round) {
            const std::vector<Interval> before = b;
            for (const Expr& c : prob_.constraints) {
                if (!hc4_revise(c, {-kInf, opt_.feas_tol}, b)) return false;
                if (!mv_contract(c, opt_.feas_tol, b)) return false;
            }
            if (std::isfinite(ub_)) {
                if (!hc4_revise(prob_.objective, {-kInf, ub_}, b)) return false;
                if (!mv_contract(prob_.objective, ub_, b)) return false;
            }
            if (!monotonicity(b)) return false;
            double shrink = 0.0;
            for (int j = 0; j < n_; ++j) {
                const double w = before[j].width();
                if (w > 0.0) shrink = std::max(shrink, 1.0 - b[j].width() / w);
            }
            if (shrink < 0.1) break;
        }
        try {
            Interval nat = eval_interval(prob_.objective, b);
            lb = nat.lo;
            const Vec m = mid_of(b);
            const double fm = eval(prob_.objective, m);
            const Dual<Interval> g = grad_interval(prob_.objective, wrt_, b);
            Interval mv(fm);
            for (int j = 0; j < n_; ++j) mv = mv + g.d[j] * (b[j] - Interval(m[j]));
            if (std::isfinite(mv.lo)) lb = std::max(lb, mv.lo);
        } catch (const DomainError&) {
            try {
                lb = eval_interval(prob_.objective, b).lo;
            } catch (const DomainError&) {
                return false;
            }
        }
        if (std::isnan(lb)) lb = -kInf;
        if (lb <= ub_ - opt_.tol) lb = std::max(lb, relaxation_bound(b));
        try_point(mid_of(b));
        return true;
    }

    struct Piece {
        double r;
        Eigen::VectorXd a;  // value r + a'u, u in [0, 1]^n scaled box coordinates
    };

    // Corner expansions h(x) >= h(v) + G (x - v) with G the lower (v = lower
    // corner) or upper (v = upper corner) gradient enclosure endpoints.
    void pieces(const Expr& e, const std::vector<Interval>& b, std::vector<Piece>& out) const
    {
        Dual<Interval> g;
        try {
            g = grad_interval(e, wrt_, b);
        } catch (const DomainError&) {
            return;
        }
        for (int side = 0; side < 2; ++side) {
            Vec v(static_cast<std::size_t>(n_));
            for (int j = 0; j < n_; ++j) v[j] = side == 0 ? b[j].lo : b[j].hi;
            double hv;
            try {
                hv = eval(e, v);
            } catch (const DomainError&) {
                continue;
            }
            if (!std::isfinite(hv)) continue;
            Piece p{hv, Eigen::VectorXd(n_)};
            bool ok = true;
            for (int j = 0; j < n_ && ok; ++j) {
                const double gj = side == 0 ? g.partial(j).lo : g.partial(j).hi;
                ok = std::isfinite(gj);
                const double w = b[j].width();
                p.a(j) = gj * w;
                if (side == 1) p.r -= gj * w;
            }
            if (ok) out.push_back(std::move(p));
        }
    }

    // Lower bound from the affine relaxation. The LP multipliers are only used
    // to form a Lagrangian dual bound, which is valid for any nonnegative values.
    double relaxation_bound(const std::vector<Interval>& b) const
    {
        std::vector<Piece> fp;
        std::vector<Piece> cp;
        pieces(prob_.objective, b, fp);
        if (fp.empty()) return -kInf;
        for (const Expr& c : prob_.constraints) pieces(c, b, cp);
        const auto n = static_cast<Eigen::Index>(n_);
        const auto nf = static_cast<Eigen::Index>(fp.size());
        const auto nc = static_cast<Eigen::Index>(cp.size());
        const Eigen::Index rows = nf + nc + 2 * n;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n + 1);
        Eigen::VectorXd rhs(rows);
        for (Eigen::Index i = 0; i < nf; ++i) {
            a.row(i).head(n) = fp[i].a.transpose();
            a(i, n) = -1.0;
            rhs(i) = -fp[i].r;
        }
        for (Eigen::Index i = 0; i < nc; ++i) {
            a.row(nf + i).head(n) = cp[i].a.transpose();
            rhs(nf + i) = opt_.feas_tol - cp[i].r;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            a(nf + nc + j, j) = 1.0;
            rhs(nf + nc + j) = 1.0;
            a(nf + nc + n + j, j) = -1.0;
            rhs(nf + nc + n + j) = 0.0;
        }
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
        c(n) = 1.0;
        const QpResult qp = solve_qp(Eigen::MatrixXd::Zero(n + 1, n + 1), c, a, rhs, 1e-10, 60);
        if (qp.lambda.size() != rows || !qp.lambda.allFinite()) return -kInf;

        double msum = 0.0;
        for (Eigen::Index i = 0; i < nf; ++i) msum += std::max(qp.lambda(i), 0.0);
        if (!(msum > 0.0)) return -kInf;
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
        double bound = 0.0;
        for (Eigen::Index i = 0; i < nf; ++i) {
            const double mu = std::max(qp.lambda(i), 0.0) / msum;
            coef += mu * fp[i].a;
            bound += mu * fp[i].r;
        }
        for (Eigen::Index i = 0; i < nc; ++i) {
            const double l = std::max(qp.lambda(nf + i), 0.0) / msum;
            coef += l * cp[i].a;
            bound += l * (cp[i].r - opt_.feas_tol);
        }
        for (Eigen::Index j = 0; j < n; ++j) bound += std::min(coef(j), 0.0);
        if (!std::isfinite(bound)) return -kInf;
        return bound - 1e-12 * (1.0 + std::abs(bound));
    }

    // Fixes coordinates along which the objective is strictly monotone and no
    // constraint gets harder when moving toward the improving bound.
    bool monotonicity(std::vector<Interval>& b)
    {
        Dual<Interval> gf;
        std::vector<Dual<Interval>> gc;
        try {
            gf = grad_interval(prob_.objective, wrt_, b);
            for (const Expr& c : prob_.constraints) gc.push_back(grad_interval(c, wrt_, b));
        } catch (const DomainError&) {
            return true;
        }
        for (int j = 0; j < n_; ++j) {
            if (gf.d[j].lo > 0.0) {
                bool ok = true;
                for (const auto& g : gc) ok = ok && g.d[j].lo >= 0.0;
                if (ok) b[j].hi = b[j].lo;
            } else if (gf.d[j].hi < 0.0) {
                bool ok = true;
                for (const auto& g : gc) ok = ok && g.d[j].hi <= 0.0;
                if (ok) b[j].lo = b[j].hi;
            }
        }
        return true;
    }

    const GlobalProblem& prob_;
    GlobalOptions opt_;
    int n_;
    std::vector<VarRef> wrt_;
    Nlp nlp_;
    double ub_ = kInf;
    Vec arg_;
};

}  // namespace detail

/// Certified (to opt.tol) global minimum by interval branch and bound.
inline GlobalResult minimize_global(const GlobalProblem& prob, const GlobalOptions& opt = {})
{
    return detail::BranchAndBound(prob, opt).run();
}

}  // namespace sipd

#endif  // SIPD_GLOBAL_HPP
