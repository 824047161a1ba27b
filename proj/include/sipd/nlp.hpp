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


#ifndef SIPD_NLP_HPP
#define SIPD_NLP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sipd/box.hpp"
#include "sipd/expr.hpp"

namespace sipd {

/**
 * min (or max) F(z, p) s.t. c_i(z, p) <= 0, z in box.
 *
 * Decision variables are the x-kind variables of the expressions and
 * parameters the p-kind ones.
 */
struct Nlp {
    Expr objective;
    std::vector<Expr> constraints;
    Box box;
    Vec p;
    bool maximize = false;

    [[nodiscard]] int n() const { return static_cast<int>(box.size()); }
    [[nodiscard]] int m() const { return static_cast<int>(constraints.size()); }
};

enum class KktStatus { kkt_ok, max_iter, infeasible };

inline const char* to_string(KktStatus s)
{
    switch (s) {
    case KktStatus::kkt_ok: return "kkt_ok";
    case KktStatus::max_iter: return "max_iter";
    case KktStatus::infeasible: return "infeasible";
    }
    return "?";
}

/// Multipliers and active-set indices are ordered [general constraints, lower bounds, upper bounds].
struct KktSolution {
    Vec z;
    double value = std::numeric_limits<double>::quiet_NaN();
    Vec lambda;
    std::vector<int> active_set;
    double kkt_residual = std::numeric_limits<double>::infinity();
    double max_violation = std::numeric_limits<double>::infinity();
    KktStatus status = KktStatus::infeasible;

    [[nodiscard]] bool ok() const { return status == KktStatus::kkt_ok; }
};

struct NlpOptions {
    double tol = 1e-8;
    double act_tol = 1e-6;
    double feas_tol = 1e-6;  // violations above this after the cap mean "infeasible"
    int max_outer = 200;
    int max_inner = 500;
};

namespace detail {

class NlpModel {
public:
    explicit NlpModel(const Nlp& nlp)
        : nlp_(nlp), s_(nlp.maximize ? -1.0 : 1.0), n_(nlp.n()), m_(nlp.m()), wrt_(vars_of(VarKind::X, nlp.n()))
    {
    }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] double sign() const { return s_; }

    // Signed objective and constraint values; false on a domain error.
    bool values(const Vec& z, double& f, Vec& c) const
    {
        try {
            const Point3 at{z, {}, nlp_.p};
            f = s_ * eval(nlp_.objective, at.x, at.y, at.p);
            c.resize(static_cast<std::size_t>(m_));
            for (int i = 0; i < m_; ++i) c[i] = eval(nlp_.constraints[i], at.x, at.y, at.p);
            return std::isfinite(f) && std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
        } catch (const DomainError&) {
            return false;
        }
    }

    bool first(const Vec& z, double& f, Vec& gf, Vec& c, Matrix& jc) const
    {
        try {
            const Point3 at{z, {}, nlp_.p};
            DualVec d = grad_dual(nlp_.objective, wrt_, at);
            f = s_ * d.v;
            gf = d.d;
            for (double& v : gf) v *= s_;
            c.resize(static_cast<std::size_t>(m_));
            jc.resize(m_, n_);
            for (int i = 0; i < m_; ++i) {
                DualVec di = grad_dual(nlp_.constraints[i], wrt_, at);
                c[i] = di.v;
                for (int j = 0; j < n_; ++j) jc(i, j) = di.d[j];
            }
            return std::isfinite(f);
        } catch (const DomainError&) {
            return false;
        }
    }

    bool second(const Vec& z, double& f, Vec& gf, Matrix& hf, Vec& c, Matrix& jc, std::vector<Matrix>& hc) const
    {
        try {
            const Point3 at{z, {}, nlp_.p};
            Taylor2 t = taylor2(nlp_.objective, wrt_, at);
            f = s_ * t.value;
            gf = t.grad;
            for (double& v : gf) v *= s_;
            hf = s_ * t.hess;
            c.resize(static_cast<std::size_t>(m_));
            jc.resize(m_, n_);
            hc.resize(static_cast<std::size_t>(m_));
            for (int i = 0; i < m_; ++i) {
                Taylor2 ti = taylor2(nlp_.constraints[i], wrt_, at);
                c[i] = ti.value;
                for (int j = 0; j < n_; ++j) jc(i, j) = ti.grad[j];
                hc[i] = std::move(ti.hess);
            }
            return std::isfinite(f);
        } catch (const DomainError&) {
            return false;
        }
    }

private:
    const Nlp& nlp_;
    double s_;
    int n_;
    int m_;
    std::vector<VarRef> wrt_;
};

inline Eigen::VectorXd to_eigen(const Vec& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline double inf_norm(const Vec& v)
{
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
}

// Augmented Lagrangian (PHR) merit and its derivatives for fixed (mu, rho).
struct AlState {
    const NlpModel* model;
    const Box* box;
    Vec mu;
    double rho;

    bool value(const Vec& z, double& phi) const
    {
        double f;
        Vec c;
        if (!model->values(z, f, c)) return false;
        phi = f;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double t = std::max(0.0, mu[i] + rho * c[i]);
            phi += (t * t - mu[i] * mu[i]) / (2.0 * rho);
        }
        return std::isfinite(phi);
    }

    bool derivs(const Vec& z, double& phi, Vec& g, Matrix& h) const
    {
        double f;
        Vec gf, c;
        Matrix hf, jc;
        std::vector<Matrix> hc;
        if (!model->second(z, f, gf, hf, c, jc, hc)) return false;
        const int n = model->n();
        phi = f;
        g = gf;
        h = hf;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double t = mu[i] + rho * c[i];
            if (t > 0.0) {
                phi += (t * t - mu[i] * mu[i]) / (2.0 * rho);
                for (int j = 0; j < n; ++j) g[j] += t * jc(static_cast<Eigen::Index>(i), j);
                h += t * hc[i] + rho * jc.row(static_cast<Eigen::Index>(i)).transpose() * jc.row(static_cast<Eigen::Index>(i));
            } else {
                phi -= mu[i] * mu[i] / (2.0 * rho);
            }
        }
        return std::isfinite(phi);
    }
};

inline double projected_gradient_norm(const Box& box, const Vec& z, const Vec& g)
{
    double r = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double t = std::clamp(z[j] - g[j], box.lo[j], box.hi[j]);
        r = std::max(r, std::abs(z[j] - t));
    }
    return r;
}

// Projected Newton on the box (binding set from an epsilon-active test, modified
// Hessian on the free variables, Armijo search along the projection arc).
inline bool minimize_box(const AlState& al, Vec& z, int max_iter, double tol)
{
    const Box& box = *al.box;
    const std::size_t n = z.size();
    double phi;
    Vec g;
    Matrix h;
    if (!al.derivs(z, phi, g, h)) return false;
    for (int it = 0; it < max_iter; ++it) {
        const double pg = projected_gradient_norm(box, z, g);
        if (pg <= tol) return true;
        const double eps = std::min(1e-6, pg);
        std::vector<int> freev;
        std::vector<char> bind(n, 0);
        for (std::size_t j = 0; j < n; ++j) {
            const bool at_lo = z[j] - box.lo[j] <= eps && g[j] > 0.0;
            const bool at_hi = box.hi[j] - z[j] <= eps && g[j] < 0.0;
            if (at_lo || at_hi) {
                bind[j] = 1;
            } else {
                freev.push_back(static_cast<int>(j));
            }
        }
        Vec d(n, 0.0);
        bool modified = false;
        if (!freev.empty()) {
            const auto nf = static_cast<Eigen::Index>(freev.size());
            Matrix hf(nf, nf);
            Eigen::VectorXd gfree(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gfree(a) = g[freev[a]];
                for (Eigen::Index b = 0; b < nf; ++b) hf(a, b) = h(freev[a], freev[b]);
            }
            Eigen::SelfAdjointEigenSolver<Matrix> es(hf);
            Eigen::VectorXd ev = es.eigenvalues();
            const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
            for (Eigen::Index a = 0; a < nf; ++a) {
                if (ev(a) < 1e-8 * scale) modified = true;
                ev(a) = std::max(std::abs(ev(a)), 1e-8 * scale);
            }
            const Eigen::VectorXd step =
                -(es.eigenvectors() * (es.eigenvectors().transpose() * gfree).cwiseQuotient(ev));
            for (Eigen::Index a = 0; a < nf; ++a) d[freev[a]] = step(a);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (bind[j]) d[j] = -g[j];
        }
        // Steps of a flat or indefinite model (and gradient steps) are capped at
        // a tenth of the box width per coordinate so they cannot cross the box at once.
        auto cap = [&](Vec& v) {
            double r = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double lim = 0.1 * box.width(j);
                if (std::abs(v[j]) * r > lim && lim > 0.0) r = lim / std::abs(v[j]);
            }
            for (double& t : v) t *= r;
        };
        if (modified) cap(d);
        bool moved = false;
        for (int attempt = 0; attempt < 2 && !moved; ++attempt) {
            if (attempt == 1) {
                // Fallback: projected steepest descent.
                for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];
                cap(d);
            }
            double alpha = 1.0;
            for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
                Vec zt(n);
                double slope = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    zt[j] = std::clamp(z[j] + alpha * d[j], box.lo[j], box.hi[j]);
                    slope += g[j] * (zt[j] - z[j]);
                }
                if (!(slope < 0.0)) {
                    if (ls == 0 && attempt == 0) break;
                    continue;
                }
                double pt;
                if (!al.value(zt, pt)) continue;
                if (pt <= phi + 1e-4 * slope) {
                    z = zt;
                    moved = true;
                    break;
                }
                if (std::abs(pt - phi) <= 1e-15 * (1.0 + std::abs(phi)) && alpha < 1e-8) break;
            }
        }
        if (!moved) return projected_gradient_norm(box, z, g) <= std::max(tol, 1e-9);
        if (!al.derivs(z, phi, g, h)) return false;
    }
    return false;
}

}  // namespace detail

namespace detail {

// Bound multipliers, stationarity and residuals for given general multipliers.
inline void finish_kkt(const NlpModel& model, const Box& box, const Vec& z, const Vec& lam_g, const NlpOptions& opt,
                       KktSolution& out)
{
    const int n = model.n();
    const int m = model.m();
    double f;
    Vec gf, c;
    Matrix jc;
    out.z = z;
    out.lambda.assign(static_cast<std::size_t>(m + 2 * n), 0.0);
    if (!model.first(z, f, gf, c, jc)) {
        out.status = KktStatus::infeasible;
        return;
    }
    out.value = model.sign() * f;
    Vec r = gf;
    double viol = 0.0;
    double compl_res = 0.0;
    for (int i = 0; i < m; ++i) {
        out.lambda[i] = std::max(0.0, lam_g[i]);
        for (int j = 0; j < n; ++j) r[j] += out.lambda[i] * jc(i, j);
        viol = std::max(viol, c[i]);
        compl_res = std::max(compl_res, std::abs(out.lambda[i] * c[i]));
    }
    double stat = 0.0;
    for (int j = 0; j < n; ++j) {
        const bool at_lo = z[j] <= box.lo[j];
        const bool at_hi = z[j] >= box.hi[j];
        if (at_lo && at_hi) {
            (r[j] > 0.0 ? out.lambda[m + j] : out.lambda[m + n + j]) = std::abs(r[j]);
        } else if (at_lo && r[j] > 0.0) {
            out.lambda[m + j] = r[j];
        } else if (at_hi && r[j] < 0.0) {
            out.lambda[m + n + j] = -r[j];
        } else {
            stat = std::max(stat, std::abs(r[j]));
        }
    }
    out.max_violation = std::max(0.0, viol);
    out.kkt_residual = std::max({stat, compl_res, out.max_violation});
    out.active_set.clear();
    for (int i = 0; i < m; ++i) {
        if (c[i] >= -opt.act_tol) out.active_set.push_back(i);
    }
    for (int j = 0; j < n; ++j) {
        if (box.lo[j] - z[j] >= -opt.act_tol) out.active_set.push_back(m + j);
    }
    for (int j = 0; j < n; ++j) {
        if (z[j] - box.hi[j] >= -opt.act_tol) out.active_set.push_back(m + n + j);
    }
}

// Newton iterations on the equality-constrained KKT system of a guessed active set.
inline bool polish_active_set(const NlpModel& model, const Box& box, Vec& z, Vec& lam_g, const NlpOptions& opt)
{
    const int n = model.n();
    const int m = model.m();
    double f;
    Vec gf, c;
    Matrix hf, jc;
    std::vector<Matrix> hc;
    if (!model.second(z, f, gf, hf, c, jc, hc)) return false;

    std::vector<int> act;
    for (int i = 0; i < m; ++i) {
        if (c[i] >= -opt.act_tol || lam_g[i] > opt.tol) act.push_back(i);
    }
    std::vector<int> freev;
    std::vector<char> fixed(n, 0);
    for (int j = 0; j < n; ++j) {
        if (z[j] <= box.lo[j] || z[j] >= box.hi[j]) {
            fixed[j] = 1;
        } else {
            freev.push_back(j);
        }
    }

    for (int drop_round = 0; drop_round <= m; ++drop_round) {
        Vec zt = z;
        Vec lt(static_cast<std::size_t>(m), 0.0);
        for (int i : act) lt[i] = lam_g[i];
        const auto nf = static_cast<Eigen::Index>(freev.size());
        const auto na = static_cast<Eigen::Index>(act.size());
        if (na > nf) return false;
        bool ok = true;
        double res = kInf;
        for (int it = 0; it < 30 && ok; ++it) {
            if (!model.second(zt, f, gf, hf, c, jc, hc)) {
                ok = false;
                break;
            }
            Matrix hl = hf;
            Eigen::VectorXd gl = detail::to_eigen(gf);
            for (int i : act) {
                hl += lt[i] * hc[i];
                gl += lt[i] * jc.row(i).transpose();
            }
            Matrix k = Matrix::Zero(nf + na, nf + na);
            Eigen::VectorXd rhs(nf + na);
            for (Eigen::Index a = 0; a < nf; ++a) {
                rhs(a) = -gl(freev[a]);
                for (Eigen::Index b = 0; b < nf; ++b) k(a, b) = hl(freev[a], freev[b]);
                for (Eigen::Index q = 0; q < na; ++q) {
                    k(a, nf + q) = jc(act[q], freev[a]);
                    k(nf + q, a) = jc(act[q], freev[a]);
                }
            }
            for (Eigen::Index q = 0; q < na; ++q) rhs(nf + q) = -c[act[q]];
            res = rhs.size() == 0 ? 0.0 : rhs.cwiseAbs().maxCoeff();
            if (res <= 1e-14 * (1.0 + std::abs(f))) break;
            Eigen::FullPivLU<Matrix> lu(k);
            if (!lu.isInvertible()) {
                ok = false;
                break;
            }
            const Eigen::VectorXd step = lu.solve(rhs);
            for (Eigen::Index a = 0; a < nf; ++a) {
                const int j = freev[a];
                zt[j] += step(a);
                if (zt[j] < box.lo[j] || zt[j] > box.hi[j]) ok = false;
            }
            for (Eigen::Index q = 0; q < na; ++q) lt[act[q]] += step(nf + q);
        }
        if (!ok || !(res <= 1e-9)) return false;
        // Drop the most negative multiplier and retry.
        int worst = -1;
        for (int i : act) {
            if (lt[i] < -opt.tol && (worst < 0 || lt[i] < lt[worst])) worst = i;
        }
        if (worst < 0) {
            z = zt;
            lam_g = lt;
            return true;
        }
        act.erase(std::find(act.begin(), act.end(), worst));
    }
    return false;
}

}  // namespace detail

/**
 * Local KKT point of an Nlp from z0.
 *
 * Augmented Lagrangian outer loop with a projected Newton inner solve, then an
 * active-set Newton polish of (z, lambda). Maximization problems are solved as
 * minimization of -F; the returned value is F and the multipliers satisfy
 * grad F = sum lambda_i grad c_i.
 */
inline KktSolution solve_local(const Nlp& nlp, Vec z0, const NlpOptions& opt = {})
{
    const detail::NlpModel model(nlp);
    const int n = model.n();
    const int m = model.m();
    const Box& box = nlp.box;
    z0.resize(static_cast<std::size_t>(n), 0.0);
    z0 = box.project(z0);
    for (int j = 0; j < n; ++j) {
        const double w = box.width(j);
        if (z0[j] <= box.lo[j]) z0[j] = std::min(box.hi[j], box.lo[j] + 1e-9 * w);
        if (z0[j] >= box.hi[j]) z0[j] = std::max(box.lo[j], box.hi[j] - 1e-9 * w);
    }

    KktSolution out;
    out.z = z0;
    {
        double f;
        Vec c;
        if (!model.values(z0, f, c)) {
            // Start outside the domain: try the box centre instead.
            z0 = box.mid();
            if (!model.values(z0, f, c)) return out;
        }
    }

    // Initial penalty balances the objective against the violation at the start.
    double rho0 = 10.0;
    {
        double f;
        Vec c;
        model.values(z0, f, c);
        double v2 = 0.0;
        for (double ci : c) v2 += std::max(ci, 0.0) * std::max(ci, 0.0);
        rho0 = std::clamp(10.0 * std::max(1.0, std::abs(f)) / std::max(1.0, 0.5 * v2), 10.0, 1e8);
    }
    detail::AlState al{&model, &box, Vec(static_cast<std::size_t>(m), 0.0), rho0};
    Vec z = z0;
    double prev_viol = kInf;
    bool converged = false;
    const double inner_tol = std::max(1e-13, 1e-2 * opt.tol);
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        const bool inner_ok = detail::minimize_box(al, z, opt.max_inner, inner_tol);
        double f;
        Vec c;
        if (!model.values(z, f, c)) break;
        double viol = 0.0;
        double compl_res = 0.0;
        Vec mu_new(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            mu_new[i] = std::max(0.0, al.mu[i] + al.rho * c[i]);
            viol = std::max(viol, c[i]);
            compl_res = std::max(compl_res, std::min(-c[i], mu_new[i]));
        }
        al.mu = mu_new;
        if (m == 0 || (viol <= opt.tol && std::abs(compl_res) <= opt.tol)) {
            converged = inner_ok;
            if (converged || m == 0) break;
        }
        if (viol > 0.25 * prev_viol) al.rho = std::min(al.rho * 10.0, 1e12);
        prev_viol = viol;
    }

    KktSolution al_sol;
    detail::finish_kkt(model, box, z, al.mu, opt, al_sol);

    Vec zp = z;
    Vec lp = al.mu;
    if (detail::polish_active_set(model, box, zp, lp, opt)) {
        KktSolution pol;
        detail::finish_kkt(model, box, zp, lp, opt, pol);
        if (pol.kkt_residual <= al_sol.kkt_residual) al_sol = pol;
    }
    out = al_sol;
    if (out.kkt_residual <= opt.tol) {
        out.status = KktStatus::kkt_ok;
    } else if (out.max_violation > opt.feas_tol) {
        out.status = KktStatus::infeasible;
    } else {
        out.status = KktStatus::max_iter;
    }
    (void)converged;
    return out;
}

/// Seeded Latin-hypercube sample of `count` points in the box.
inline std::vector<Vec> latin_hypercube(const Box& box, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = box.size();
    std::vector<Vec> pts(static_cast<std::size_t>(count), Vec(n));
    std::vector<int> perm(static_cast<std::size_t>(count));
    for (std::size_t j = 0; j < n; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int i = 0; i < count; ++i) {
            const double t = (perm[i] + u(rng)) / count;
            pts[i][j] = box.lo[j] + t * box.width(j);
        }
    }
    return pts;
}

/**
 * Best of several local solves: caller candidates first, then `starts`
 * Latin-hypercube points. Lowest (signed) objective wins; ties keep the
 * earlier start.
 */
inline KktSolution multistart_local(const Nlp& nlp, int starts, std::uint64_t seed, const NlpOptions& opt = {},
                                    const std::vector<Vec>& candidates = {})
{
    std::vector<Vec> zs = candidates;
    for (Vec& v : latin_hypercube(nlp.box, std::max(starts, 0), seed)) zs.push_back(std::move(v));
    if (zs.empty()) zs.push_back(nlp.box.mid());
    const double s = nlp.maximize ? -1.0 : 1.0;
    KktSolution best;
    int best_rank = 3;
    for (const Vec& z0 : zs) {
        KktSolution r = solve_local(nlp, z0, opt);
        const int rank = r.status == KktStatus::kkt_ok ? 0 : (r.status == KktStatus::max_iter ? 1 : 2);
        bool better;
        if (rank != best_rank) {
            better = rank < best_rank;
        } else if (rank == 2) {
            better = r.max_violation < best.max_violation;
        } else {
            better = s * r.value < s * best.value - 1e-12 * (1.0 + std::abs(best.value));
        }
        if (better) {
            best = std::move(r);
            best_rank = rank;
        }
    }
    return best;
}

}  // namespace sipd

#endif  // SIPD_NLP_HPP
