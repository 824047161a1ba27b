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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace sipd {
namespace {

GenCut zero_cut(const SipInstance& inst, const Vec& y)
{
    return {Matrix::Zero(inst.dy, inst.dx), y};
}

TEST(GDiscretize, SmoothProjection)
{
    const Vec lo{-1.0, 0.0}, hi{1.0, 2.0};
    for (double v : {-5.0, -1.0, -0.3, 0.0, 0.99, 1.0, 3.0}) {
        const auto [y, d] = smooth_proj({v, v}, lo, hi, 100.0);
        for (int i = 0; i < 2; ++i) {
            EXPECT_GE(y[i], lo[i]);
            EXPECT_LE(y[i], hi[i]);
            const double fd =
                (smooth_proj({v + 1e-6, v + 1e-6}, lo, hi, 100.0).first[i] - smooth_proj({v - 1e-6, v - 1e-6}, lo, hi, 100.0).first[i]) / 2e-6;
            EXPECT_NEAR(d[i], fd, 1e-5);
            EXPECT_NEAR(smooth_proj({v, v}, lo, hi, 1e8).first[i], std::clamp(v, lo[i], hi[i]), 1e-7);
        }
    }
    EXPECT_THROW(smooth_proj({0.0}, {1.0}, {1.0}, 100.0), std::invalid_argument);
    EXPECT_THROW(smooth_proj({0.0}, {0.0}, {1.0}, 0.0), std::invalid_argument);
}

TEST(GDiscretize, CutVectorRoundTrip)
{
    const SipInstance s = builtin("seidel");
    GenCut c{Matrix(1, 2), {0.25}};
    c.A << 0.5, -1.5;
    const Vec v = detail::cut_to_vec(c);
    ASSERT_EQ(static_cast<int>(v.size()), detail::cut_size(s));
    const GenCut back = detail::cut_from_vec(s, v.data());
    EXPECT_EQ(back.A, c.A);
    EXPECT_EQ(back.b, c.b);
    const GenCutSet two{c, zero_cut(s, {0.1})};
    EXPECT_EQ(detail::cuts_to_vec(detail::cuts_from_vec(s, detail::cuts_to_vec(two))), detail::cuts_to_vec(two));
}

// Zero-slope cuts are plain discretization points.
TEST(GDiscretize, ZeroSlopeCutsMatchPointDiscretization)
{
    std::mt19937_64 rng(71);
    for (const char* name : {"dp", "seidel", "tsoukalas", "mitsos_h"}) {
        const SipInstance s = builtin(name);
        for (int t = 0; t < 4; ++t) {
            std::vector<Vec> pts;
            GenCutSet cuts;
            for (int i = 0; i <= t % 3; ++i) {
                std::uniform_real_distribution<double> u(s.Y.lo[0], s.Y.hi[0]);
                pts.push_back({u(rng)});
                cuts.push_back(zero_cut(s, pts.back()));
            }
            const GlobalResult a = solve_lbp(s, pts);
            const GlobalResult b = solve_glbp(s, cuts);
            ASSERT_TRUE(a.certified() && b.certified()) << name;
            EXPECT_NEAR(a.value, b.value, 2e-6 * std::max(1.0, std::abs(a.value))) << name;
        }
    }
}

TEST(GDiscretize, FirstOrderCutOnSeidelIsExact)
{
    // y*(x) = x1 is linear, so the cut (J, y - J x) reproduces the lower level exactly.
    const SipInstance s = builtin("seidel");
    GenCut c{Matrix(1, 2), {0.0}};
    c.A << 1.0, 0.0;
    EXPECT_NEAR(solve_glbp(s, {c}).value, -1.0 / 6.0, 1e-6);
}

TEST(GDiscretize, LlpJacobianMatchesFiniteDifferences)
{
    const SipInstance s = builtin("tsoukalas");
    // Away from x = 0 the maximizer y* = x is interior and dy*/dx = 1.
    for (double x : {-3.0, -1.2, 0.7, 2.5}) {
        const LlpJacobian j = llp_jacobian(s, {x});
        ASSERT_TRUE(j.J.has_value()) << x;
        const double fd = (solve_llp(s, {x + 1e-5}).arg[0] - solve_llp(s, {x - 1e-5}).arg[0]) / 2e-5;
        EXPECT_NEAR((*j.J)(0, 0), fd, 1e-4) << x;
    }
    DriverOptions o;
    o.force_sensitivity_failure = true;
    EXPECT_FALSE(llp_jacobian(s, {1.0}, o).J.has_value());
}

TEST(GDiscretize, SmoothedValueApproachesCertifiedValue)
{
    const SipInstance s = builtin("dp");
    GenCut c{Matrix(1, 1), {0.5}};
    c.A << 0.8;
    const double exact = phi_g(s, {c}, false).value;
    DriverOptions sharp;
    sharp.smoothing = 1e4;
    const ValueResult smooth = phi_g(s, {c}, true, sharp);
    ASSERT_TRUE(std::isfinite(exact));
    EXPECT_NEAR(smooth.value, exact, 1e-3);
}

TEST(GDiscretize, GreedyCountsAndMonotonicity)
{
    for (const char* name : {"dp", "seidel", "tsoukalas", "mitsos_h"}) {
        for (Method m : {Method::g_opt, Method::g_greedy, Method::g_two_greedy, Method::g_hybrid}) {
            const SolveTrace t = run_gmethod(builtin(name), m);
            EXPECT_TRUE(t.converged()) << name << " " << to_string(m);
            EXPECT_LE(t.iterations(), 4) << name << " " << to_string(m);
            for (std::size_t k = 1; k < t.records.size(); ++k) EXPECT_GE(t.records[k].lbd, t.records[k - 1].lbd - 2e-6);
        }
    }
}

TEST(GDiscretize, FailingSensitivityDegradesToBf)
{
    DriverOptions o;
    o.force_sensitivity_failure = true;
    for (const char* name : {"dp", "seidel", "tsoukalas"}) {
        const SolveTrace bf = run_bf(builtin(name));
        const SolveTrace g = run_gmethod(builtin(name), Method::g_greedy, o);
        ASSERT_EQ(bf.records.size(), g.records.size()) << name;
        for (std::size_t k = 0; k < bf.records.size(); ++k) EXPECT_NEAR(bf.records[k].lbd, g.records[k].lbd, 2e-6) << name;
    }
}

TEST(GDiscretize, Validation)
{
    const SipInstance s = builtin("seidel");
    EXPECT_THROW(solve_glbp(s, {GenCut{Matrix::Zero(2, 2), {0.0}}}), std::invalid_argument);
    EXPECT_THROW(run_gmethod(s, Method::greedy), std::invalid_argument);
}

}  // namespace
}  // namespace sipd
