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

#include "sipd/global.hpp"
#include "sipd/parse.hpp"

namespace sipd {
namespace {

TEST(Global, SixHumpCamel)
{
    const GlobalProblem p{parse("4*x1^2 - 2.1*x1^4 + x1^6/3 + x1*x2 - 4*x2^2 + 4*x2^4"), {}, Box({-3, -2}, {3, 2})};
    const GlobalResult r = minimize_global(p);
    ASSERT_EQ(r.status, GlobalStatus::optimal);
    EXPECT_NEAR(r.value, -1.0316284534898774, 1e-6);
    EXPECT_LE(r.bound, r.value);
    EXPECT_GE(r.bound, r.value - 1e-6 - 1e-6 * std::abs(r.value));
}

TEST(Global, ConstrainedNonconvex)
{
    // min -x1 - x2 s.t. x1 x2 <= 1 on [0, 4]^2: optimum 1/4 + 4 at a corner of the hyperbola.
    const GlobalProblem p{parse("-x1 - x2"), {parse("x1*x2 - 1")}, Box({0, 0}, {4, 4})};
    const GlobalResult r = minimize_global(p);
    ASSERT_TRUE(r.certified());
    EXPECT_NEAR(r.value, -4.25, 1e-6);
    EXPECT_LE(eval(p.constraints[0], r.arg), 1e-8);
}

TEST(Global, InfeasibleIsCertified)
{
    const GlobalProblem p{parse("x1"), {parse("x1^2 + 1")}, Box({-1}, {1})};
    const GlobalResult r = minimize_global(p);
    EXPECT_EQ(r.status, GlobalStatus::infeasible);
    EXPECT_TRUE(r.certified());
}

TEST(Global, NodeLimitIsReported)
{
    GlobalOptions o;
    o.node_limit = 3;
    o.root_starts = 0;
    const GlobalProblem p{parse("sqrt(1 + (x1 - 0.3)^2) * exp(x2) - x2^3 + x1*x2"), {}, Box({-2, -2}, {2, 2})};
    const GlobalResult r = minimize_global(p, o);
    EXPECT_FALSE(r.certified());
    EXPECT_LE(r.bound, r.value);
}

// Random one-dimensional polynomials against a fine grid.
TEST(Global, RandomPolynomialsMatchGrid)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Expr f(0.0);
        for (int k = 1; k <= 6; ++k) f = f + Expr(u(rng)) * pow(Expr::x(1), Expr(static_cast<double>(k)));
        const GlobalResult r = minimize_global({f, {}, Box({-1.5}, {1.5})});
        double grid = kInf;
        for (int i = 0; i <= 300000; ++i) grid = std::min(grid, eval(f, Vec{-1.5 + 3.0 * i / 300000}));
        ASSERT_EQ(r.status, GlobalStatus::optimal);
        EXPECT_LE(r.value, grid + 1e-9);
        EXPECT_NEAR(r.value, grid, 1e-6);
    }
}

// Adding constraints can only raise the optimal value.
TEST(Global, MoreConstraintsNeverLowerTheValue)
{
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 15; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng);
        const Expr f = parse("x1^2 - x2");
        std::vector<Expr> cons{Expr(a) * Expr::x(1) + Expr(b) * Expr::x(2) - Expr(0.5)};
        const GlobalResult small = minimize_global({f, cons, Box({-1, -1}, {1, 1})});
        cons.push_back(Expr::x(2) * Expr::x(2) + Expr(c) * Expr::x(1) - Expr(0.3));
        const GlobalResult large = minimize_global({f, cons, Box({-1, -1}, {1, 1})});
        ASSERT_TRUE(small.certified() && large.certified());
        EXPECT_GE(large.value, small.value - 2e-6);
    }
}

}  // namespace
}  // namespace sipd
