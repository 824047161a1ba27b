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


#ifndef SIPD_QP_HPP
#define SIPD_QP_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace sipd {

struct QpResult {
    Eigen::VectorXd z;
    Eigen::VectorXd lambda;
    bool ok = false;
    int iterations = 0;
};

/**
 * Dense convex QP  min 1/2 z'Hz + c'z  s.t.  Az <= b  (H positive semidefinite).
 *
 * Mehrotra predictor-corrector interior point method; intended for the small
 * subproblems of the bundle method.
 */
inline QpResult solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                         const Eigen::VectorXd& b, double tol = 1e-12, int max_iter = 100)
{
    using Eigen::VectorXd;
    const Eigen::Index n = c.size();
    const Eigen::Index m = b.size();
    QpResult out;
    VectorXd z = VectorXd::Zero(n);
    VectorXd s = (b - a * z).cwiseMax(1.0);
    VectorXd lam = VectorXd::Ones(m);
    const double scale = 1.0 + std::max(c.cwiseAbs().maxCoeff(), m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);

    auto max_step = [](const VectorXd& v, const VectorXd& dv) {
        double alpha = 1.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
        }
        return alpha;
    };

    // Best iterate by max(residual, complementarity); late iterations can stall
    // and drift on degenerate problems.
    double best_err = std::numeric_limits<double>::infinity();
    VectorXd best_z = z, best_lam = lam;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        const VectorXd rd = h * z + c + a.transpose() * lam;
        const VectorXd rp = a * z + s - b;
        const double mu = m > 0 ? s.dot(lam) / static_cast<double>(m) : 0.0;
        const double res = std::max(rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0, rp.size() ? rp.cwiseAbs().maxCoeff() : 0.0);
        if (std::max(res, mu) < best_err) {
            best_err = std::max(res, mu);
            best_z = z;
            best_lam = lam;
        }
        if (res <= tol * scale && mu <= tol * scale) {
            out.ok = true;
            break;
        }
        const VectorXd w = lam.cwiseQuotient(s);
        Eigen::MatrixXd k = h + a.transpose() * w.asDiagonal() * a;
        k.diagonal().array() += 1e-14 * (1.0 + k.diagonal().cwiseAbs().maxCoeff());
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(k);

        auto direction = [&](const VectorXd& rc, VectorXd& dz, VectorXd& ds, VectorXd& dl) {
            // rc = lam.*s - target
            const VectorXd t = (lam.cwiseProduct(rp) - rc).cwiseQuotient(s);
            dz = ldlt.solve(-rd - a.transpose() * t);
            ds = -rp - a * dz;
            dl = (-rc - lam.cwiseProduct(ds)).cwiseQuotient(s);
        };

        VectorXd dz, ds, dl;
        direction(lam.cwiseProduct(s), dz, ds, dl);
        const double ap = max_step(s, ds);
        const double ad = max_step(lam, dl);
        const double mu_aff = m > 0 ? (s + ap * ds).dot(lam + ad * dl) / static_cast<double>(m) : 0.0;
        const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;
        const VectorXd rc = lam.cwiseProduct(s) + ds.cwiseProduct(dl) - VectorXd::Constant(m, sigma * mu);
        direction(rc, dz, ds, dl);
        const double step = 0.99 * std::min(max_step(s, ds), max_step(lam, dl));
        z += step * dz;
        s += step * ds;
        lam += step * dl;
        s = s.cwiseMax(1e-300);
        lam = lam.cwiseMax(1e-300);
    }
    if (out.ok) {
        out.z = z;
        out.lambda = lam;
    } else {
        // Accept a nearly converged iterate.
        out.z = best_z;
        out.lambda = best_lam;
        out.ok = best_err <= 1e-7 * scale;
    }
    return out;
}

}  // namespace sipd

#endif  // SIPD_QP_HPP
