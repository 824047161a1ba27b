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


#ifndef SIPD_SENSITIVITY_HPP
#define SIPD_SENSITIVITY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sipd/expr.hpp"
#include "sipd/nlp.hpp"

namespace sipd {

enum class SensCase { full_active, ssosc, not_applicable };

inline const char* to_string(SensCase c)
{
    switch (c) {
    case SensCase::full_active: return "full_active";
    case SensCase::ssosc: return "ssosc";
    case SensCase::not_applicable: return "not_applicable";
    }
    return "?";
}

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SensOptions {
    double rank_tol = 1e-8;    // relative to the largest pivot
    double ssosc_tol = 1e-8;
    double sc_tol = 1e-8;
    double weak_lambda = 1e-6; // weakly active: lambda below this and |c| < act_tol
    double act_tol = 1e-6;
    bool keep_weak_general = true;  // weakly active non-bound constraints stay in the active set
};

struct SensReport {
    bool licq = false;
    bool sc = false;
    SensCase kind = SensCase::not_applicable;
    Vec value_grad;
    std::optional<Matrix> sol_jac;
    std::vector<int> active;                // indices used in the linear systems
    std::vector<int> dropped_weakly_active;

    [[nodiscard]] bool applicable() const { return kind != SensCase::not_applicable; }
};

namespace detail {

struct SensData {
    int n = 0;
    int m = 0;
    int np = 0;
    Vec c;           // general constraint values
    Matrix jz;       // rows: active constraints
    Matrix jp;
    Matrix hzz;      // Hessian of the internal (minimization) Lagrangian in z
    Matrix hzp;      // mixed block
    Vec grad_p;      // gradient of the value function
};

}  // namespace detail

/**
 * Classification and derivatives of a parametric KKT point.
 *
 * With L = s F + sum lambda_i c_i (s = -1 for maximization), the value
 * gradient is s * dL/dp and the solution Jacobian solves
 *   case (a), |A| = n:  J_z dz = -J_p
 *   case (b), SSOSC:    [H  J_z'; J_z 0] [dz; dl] = -[H_zp; J_p].
 */
inline SensReport analyze(const Nlp& nlp, const KktSolution& sol, const SensOptions& opt = {})
{
    SensReport rep;
    const int n = nlp.n();
    const int m = nlp.m();
    const int np = static_cast<int>(nlp.p.size());
    if (sol.status != KktStatus::kkt_ok || sol.z.size() != static_cast<std::size_t>(n)) return rep;
    const double s = nlp.maximize ? -1.0 : 1.0;

    std::vector<VarRef> all = vars_of(VarKind::X, n);
    for (int k = 1; k <= np; ++k) all.push_back({VarKind::P, k});
    const Point3 at{sol.z, {}, nlp.p};
    const auto nz = static_cast<Eigen::Index>(n);
    const auto npp = static_cast<Eigen::Index>(np);

    // Lagrangian blocks and constraint gradients.
    Taylor2 tf;
    std::vector<Taylor2> tc(static_cast<std::size_t>(m));
    try {
        tf = taylor2(nlp.objective, all, at);
        for (int i = 0; i < m; ++i) tc[i] = taylor2(nlp.constraints[i], all, at);
    } catch (const DomainError&) {
        return rep;
    }
    Matrix hl = s * tf.hess;
    Vec vg(static_cast<std::size_t>(np));
    for (int k = 0; k < np; ++k) vg[k] = tf.grad[n + k];
    for (int i = 0; i < m; ++i) {
        const double li = sol.lambda[i];
        hl += li * tc[i].hess;
        for (int k = 0; k < np; ++k) vg[k] += s * li * tc[i].grad[n + k];
    }

    // Active set with weakly active filtering.
    std::vector<int> act;
    bool sc = true;
    for (int idx : sol.active_set) {
        double cval;
        if (idx < m) {
            cval = tc[idx].value;
        } else if (idx < m + n) {
            cval = nlp.box.lo[idx - m] - sol.z[idx - m];
        } else {
            cval = sol.z[idx - m - n] - nlp.box.hi[idx - m - n];
        }
        const double lam = sol.lambda[idx];
        if (!(lam + std::abs(cval) > opt.sc_tol)) sc = false;
        const bool weak = lam < opt.weak_lambda && std::abs(cval) < opt.act_tol;
        if (weak && (idx >= m || !opt.keep_weak_general)) {
            rep.dropped_weakly_active.push_back(idx);
            continue;
        }
        act.push_back(idx);
    }
    rep.sc = sc;
    rep.active = act;

    const auto na = static_cast<Eigen::Index>(act.size());
    Matrix jz = Matrix::Zero(na, nz);
    Matrix jp = Matrix::Zero(na, npp);
    for (Eigen::Index r = 0; r < na; ++r) {
        const int idx = act[static_cast<std::size_t>(r)];
        if (idx < m) {
            for (int j = 0; j < n; ++j) jz(r, j) = tc[idx].grad[j];
            for (int k = 0; k < np; ++k) jp(r, k) = tc[idx].grad[n + k];
        } else if (idx < m + n) {
            jz(r, idx - m) = -1.0;
        } else {
            jz(r, idx - m - n) = 1.0;
        }
    }

    // LICQ by a column-pivoted QR rank test on J_z'.
    if (na == 0) {
        rep.licq = true;
    } else if (na > nz) {
        rep.licq = false;
    } else {
        Eigen::ColPivHouseholderQR<Matrix> qr(jz.transpose());
        const double top = qr.matrixR().diagonal().cwiseAbs().maxCoeff();
        qr.setThreshold(opt.rank_tol);
        rep.licq = top > 0.0 && qr.rank() == na;
    }
    if (!rep.licq) return rep;

    const Matrix hzz = hl.topLeftCorner(nz, nz);
    const Matrix hzp = hl.topRightCorner(nz, npp);

    if (na == nz) {
        rep.kind = SensCase::full_active;
    } else {
        Matrix z;
        if (na == 0) {
            z = Matrix::Identity(nz, nz);
        } else {
            Eigen::JacobiSVD<Matrix> svd(jz, Eigen::ComputeFullV);
            z = svd.matrixV().rightCols(nz - na);
        }
        const Matrix red = z.transpose() * hzz * z;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (red + red.transpose()));
        if (es.eigenvalues().minCoeff() > opt.ssosc_tol) rep.kind = SensCase::ssosc;
    }
    if (!rep.applicable()) return rep;
    rep.value_grad = vg;

    if (rep.kind == SensCase::full_active) {
        Eigen::PartialPivLU<Matrix> lu(jz);
        rep.sol_jac = Matrix(-lu.solve(jp));
    } else {
        Matrix k = Matrix::Zero(nz + na, nz + na);
        k.topLeftCorner(nz, nz) = hzz;
        k.topRightCorner(nz, na) = jz.transpose();
        k.bottomLeftCorner(na, nz) = jz;
        Matrix rhs(nz + na, npp);
        rhs.topRows(nz) = -hzp;
        rhs.bottomRows(na) = -jp;
        Eigen::FullPivLU<Matrix> check(k);
        if (check.isInvertible()) {
            Eigen::PartialPivLU<Matrix> lu(k);
            rep.sol_jac = Matrix(lu.solve(rhs).topRows(nz));
        }
    }
    return rep;
}

/// Flags only (LICQ, SC, case).
inline SensReport classify(const Nlp& nlp, const KktSolution& sol, const SensOptions& opt = {})
{
    SensReport r = analyze(nlp, sol, opt);
    r.value_grad.clear();
    r.sol_jac.reset();
    return r;
}

/// Gradient of the optimal value with respect to p; nullopt when the hypotheses fail.
inline std::optional<Vec> value_gradient(const Nlp& nlp, const KktSolution& sol, const SensOptions& opt = {})
{
    SensReport r = analyze(nlp, sol, opt);
    if (!r.applicable()) return std::nullopt;
    return r.value_grad;
}

/// dz*/dp; throws SingularSystem when the hypotheses fail or the system is singular.
inline Matrix solution_jacobian(const Nlp& nlp, const KktSolution& sol, const SensOptions& opt = {})
{
    SensReport r = analyze(nlp, sol, opt);
    if (!r.applicable()) throw SingularSystem("sensitivity hypotheses do not hold at this point");
    if (!r.sol_jac) throw SingularSystem("singular sensitivity system");
    return *r.sol_jac;
}

}  // namespace sipd

#endif  // SIPD_SENSITIVITY_HPP
