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
#include <string>

#include <gtest/gtest.h>

#include "sipd/instance.hpp"
#include "sipd/subproblems.hpp"

namespace sipd {
namespace {

// Dense-sampling lower-level value, used as an oracle for builtins with d_y = 1.
double sampled_llp(const SipInstance& s, const Vec& x, int n = 200001)
{
    double best = -kInf;
    for (int i = 0; i < n; ++i) {
        const double y = s.Y.lo[0] + (s.Y.hi[0] - s.Y.lo[0]) * i / (n - 1);
        best = std::max(best, eval(s.g, x, Vec{y}));
    }
    return best;
}

int error_line(const std::string& text)
{
    try {
        load_string(text);
    } catch (const InstanceError& e) {
        return e.line();
    }
    return -1;
}

TEST(Instances, BuiltinsAreValidAndFeasibleAtTheKnownSolution)
{
    for (const std::string& name : builtin_names()) {
        const Params p = name == "hijazi" ? Params{{"d_x", 3}} : Params{};
        const SipInstance s = builtin(name, p);
        ASSERT_TRUE(s.vstar && s.xstar) << name;
        EXPECT_NEAR(eval(s.f, *s.xstar), *s.vstar, 1e-12) << name;
        const GlobalResult llp = solve_llp(s, *s.xstar);
        EXPECT_LE(llp.value, 1e-6) << name;
    }
}

TEST(Instances, KnownOptimalValues)
{
    EXPECT_DOUBLE_EQ(*builtin("dp").vstar, 8.0);
    EXPECT_DOUBLE_EQ(*builtin("seidel").vstar, -1.0 / 6.0);
    EXPECT_DOUBLE_EQ(*builtin("tsoukalas").vstar, 8.0);
    EXPECT_DOUBLE_EQ(*builtin("mitsos_h").vstar, 0.0);
    for (int d = 2; d <= 5; ++d) EXPECT_DOUBLE_EQ(*builtin("hijazi", {{"d_x", d}}).vstar, 1.0 - d);
}

TEST(Instances, ParameterValidation)
{
    EXPECT_THROW(builtin("hijazi"), InstanceError);
    EXPECT_THROW(builtin("hijazi", {{"d_x", 1}}), InstanceError);
    EXPECT_THROW(builtin("hijazi", {{"d_x", 3}, {"q", 1}}), InstanceError);
    EXPECT_THROW(builtin("dp", {{"d_x", 3}}), InstanceError);
    try {
        builtin("nosuch");
        FAIL();
    } catch (const InstanceError& e) {
        EXPECT_NE(std::string(e.what()).find("unknown instance"), std::string::npos);
    }
}

TEST(Instances, LowerLevelMatchesSampling)
{
    for (const char* name : {"dp", "seidel", "tsoukalas", "mitsos_h"}) {
        const SipInstance s = builtin(name);
        std::mt19937_64 rng(3);
        for (int t = 0; t < 5; ++t) {
            Vec x;
            for (int i = 0; i < s.dx; ++i) {
                std::uniform_real_distribution<double> u(s.X.lo[i], s.X.hi[i]);
                x.push_back(u(rng));
            }
            const double ref = sampled_llp(s, x);
            const GlobalResult r = solve_llp(s, x);
            EXPECT_NEAR(r.value, ref, 1e-5 * (1 + std::abs(ref))) << name;
            EXPECT_GE(r.value, ref - 1e-6 * (1 + std::abs(ref))) << name;
        }
    }
}

TEST(Instances, HijaziSphere)
{
    const SipInstance s = builtin("hijazi", {{"d_x", 3}});
    const double r = std::sqrt(2.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const Vec x{n(rng), n(rng), n(rng)};
        const Vec y = s.project_y(x);
        EXPECT_TRUE(s.y_contains(y, 1e-12));
        // Closed form against random points of the sphere.
        const LlpPoint p = s.analytic_llp(x);
        EXPECT_NEAR(p.value, eval(s.g, x, y), 1e-12);
        for (int k = 0; k < 20; ++k) {
            Vec z = s.project_y({n(rng), n(rng), n(rng)});
            EXPECT_LE(eval(s.g, x, z), p.value + 1e-12);
        }
        // Jacobian of the projection against central differences.
        const Matrix J = *s.analytic_llp_jacobian(x);
        for (int j = 0; j < 3; ++j) {
            Vec a = x, b = x;
            a[j] += 1e-6;
            b[j] -= 1e-6;
            const Vec ya = s.project_y(a), yb = s.project_y(b);
            for (int i = 0; i < 3; ++i) EXPECT_NEAR(J(i, j), (ya[i] - yb[i]) / 2e-6, 1e-5);
        }
    }
    EXPECT_NEAR(s.project_y({0, 0, 0})[0], r, 1e-15);
}

TEST(Instances, FileFormatRoundTrip)
{
    for (const char* name : {"dp", "seidel", "tsoukalas", "mitsos_h"}) {
        const SipInstance s = builtin(name);
        const SipInstance back = load_string(dump_string(s));
        EXPECT_EQ(back.name, s.name);
        EXPECT_EQ(back.dx, s.dx);
        EXPECT_EQ(back.X.lo, s.X.lo);
        EXPECT_EQ(back.Y.hi, s.Y.hi);
        EXPECT_EQ(*back.vstar, *s.vstar);
        EXPECT_EQ(*back.xstar, *s.xstar);
        EXPECT_EQ(dump_string(back), dump_string(s));
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 10; ++t) {
            Vec x, y;
            for (int i = 0; i < s.dx; ++i) x.push_back(s.X.mid()[i] + 0.5 * s.X.width(i) * u(rng));
            for (int i = 0; i < s.dy; ++i) y.push_back(s.Y.mid()[i] + 0.5 * s.Y.width(i) * u(rng));
            EXPECT_EQ(eval(back.g, x, y), eval(s.g, x, y));
            EXPECT_EQ(eval(back.f, x), eval(s.f, x));
        }
    }
}

TEST(Instances, LoadErrorsReportLines)
{
    const std::string ok = "name = \"t\"\ndims.x = 1\ndims.y = 1\nbox_x = [[0, 1]]\nbox_y = [[0, 1]]\n"
                           "objective = \"x1\"\nconstraint = \"y1 - x1\"\n";
    EXPECT_NO_THROW(load_string(ok));
    EXPECT_EQ(load_string(ok + "# trailing comment\n").name, "t");
    std::string bad = ok;
    bad.replace(bad.find("[[0, 1]]"), 8, "[[1, 0]]");
    EXPECT_EQ(error_line(bad), 4);
    EXPECT_EQ(error_line(ok + "vstar = \"x\"\n"), 8);
    EXPECT_EQ(error_line(ok + "name = \"u\"\n"), 8);
    EXPECT_EQ(error_line(ok + "colour = 3\n"), 8);
    EXPECT_EQ(error_line("name = \"t\"\nconstraint = \"y1 +\"\n"), 2);
    std::string wide = ok;
    wide.replace(wide.find("\"y1 - x1\""), 9, "\"y3 - x1\"");
    EXPECT_EQ(error_line(wide), 7);
    EXPECT_THROW(load_string("dims.x = 1\n"), InstanceError);
    EXPECT_THROW(load("/nonexistent/file.sip"), InstanceError);
}

}  // namespace
}  // namespace sipd
