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

#include <gtest/gtest.h>

#include "sipd/sipd.hpp"

namespace sipd {
namespace {

RunConfig config(const std::string& instance, Method m)
{
    RunConfig c;
    c.instance = instance;
    c.method = m;
    return c;
}

TEST(Report, JsonRoundTrip)
{
    const Report r = run_config(config("dp", Method::greedy));
    const std::string text = to_json(r).dump();
    const Report back = report_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(to_json(back), to_json(r));
    ASSERT_EQ(back.trace.records.size(), r.trace.records.size());
    for (std::size_t k = 0; k < r.trace.records.size(); ++k) {
        EXPECT_EQ(back.trace.records[k].lbd, r.trace.records[k].lbd);
        EXPECT_EQ(back.trace.records[k].x, r.trace.records[k].x);
        EXPECT_EQ(back.trace.records[k].maxmin, r.trace.records[k].maxmin);
    }
    EXPECT_EQ(back.summary.iterations_to_converge, 2);
}

TEST(Report, Schema)
{
    const nlohmann::json j = to_json(run_config(config("seidel", Method::bf)));
    for (const char* k : {"instance", "params", "method", "eps_f", "delta", "K", "iter_cap", "seed", "tol"})
        EXPECT_TRUE(j.at("config").contains(k)) << k;
    ASSERT_TRUE(j.at("trace").is_array());
    for (const auto& t : j.at("trace")) {
        EXPECT_TRUE(t.at("k").is_number_integer());
        EXPECT_TRUE(t.at("lbd").is_number_float());
        EXPECT_TRUE(t.at("x").is_array());
        EXPECT_TRUE(t.at("g_xk").is_number());
        EXPECT_TRUE(t.at("accepted").is_boolean());
        EXPECT_TRUE(t.at("maxmin").is_null() || t.at("maxmin").is_number());
        EXPECT_TRUE(t.at("certified").is_boolean());
    }
    const auto& s = j.at("summary");
    EXPECT_EQ(s.at("iterations_to_converge"), 8);
    EXPECT_TRUE(s.at("final_lbd").is_number());
    EXPECT_NEAR(s.at("vstar_gap").get<double>(), 0.0, 1e-3);
    EXPECT_TRUE(s.at("certified_all").get<bool>());
    EXPECT_TRUE(s.at("wall_ms").is_number());
    EXPECT_EQ(s.at("status"), "converged_to_vstar");
}

TEST(Report, DeterministicModuloWallTime)
{
    RunConfig c = config("seidel", Method::two_greedy);
    c.seed = 3;
    nlohmann::json a = to_json(run_config(c));
    nlohmann::json b = to_json(run_config(c));
    a["summary"].erase("wall_ms");
    b["summary"].erase("wall_ms");
    EXPECT_EQ(a, b);
}

TEST(Report, CompareCells)
{
    RunConfig c = config("dp", Method::bf);
    EXPECT_EQ(compare_cell(run_config(c).trace), "28");
    c.iter_cap = 2;
    EXPECT_EQ(compare_cell(run_config(c).trace), "ITER");
    c.iter_cap = 100;
    c.time_limit = 1e-9;
    EXPECT_EQ(compare_cell(run_config(c).trace), "TLE");
}

TEST(Report, ConfigValidation)
{
    RunConfig c = config("dp", Method::bf);
    EXPECT_NO_THROW(c.validate());
    for (auto mutate : std::vector<std::function<void(RunConfig&)>>{
             [](RunConfig& r) { r.instance.clear(); }, [](RunConfig& r) { r.eps_f = -1; },
             [](RunConfig& r) { r.delta = -1; }, [](RunConfig& r) { r.K = 0; }, [](RunConfig& r) { r.iter_cap = 0; },
             [](RunConfig& r) { r.tol = 0; }, [](RunConfig& r) { r.format = "xml"; }}) {
        RunConfig bad = c;
        mutate(bad);
        EXPECT_THROW(bad.validate(), ConfigError);
    }
    EXPECT_THROW(run_config(config("nosuch", Method::bf)), InstanceError);
}

TEST(Report, InstanceSpecs)
{
    const auto [name, params] = parse_instance_spec("hijazi:d_x=4");
    EXPECT_EQ(name, "hijazi");
    EXPECT_EQ(params.at("d_x"), 4);
    EXPECT_EQ(resolve_instance(name, params).dx, 4);
    EXPECT_THROW(parse_instance_spec("hijazi:d_x"), ConfigError);
    EXPECT_THROW(parse_instance_spec("hijazi:d_x=2.5"), ConfigError);
    try {
        resolve_instance("nosuch");
        FAIL();
    } catch (const InstanceError& e) {
        EXPECT_NE(std::string(e.what()).find("unknown instance"), std::string::npos);
    }
}

TEST(Scan, DpPhi1)
{
    const ScanTable t = scan(builtin("dp"), ScanKind::phi1, 21);
    ASSERT_EQ(t.rows.size(), 21u);
    EXPECT_EQ(t.header, (std::vector<std::string>{"y1", "phi1"}));
    EXPECT_NEAR(t.rows[0][1], 8.0, 1e-3);  // y = 2
    for (const Vec& r : t.rows) EXPECT_LE(r[1], 8.0 + 1e-6);
}

TEST(Scan, SeidelSolutionMapping)
{
    const ScanTable t = scan(builtin("seidel"), ScanKind::yx, 11, {0.2});
    for (const Vec& r : t.rows) {
        EXPECT_NEAR(r[1], r[0], 1e-4);
        EXPECT_NEAR(r[2], r[0] * r[0] - 0.2, 1e-6);  // G(x) = x1^2 - x2
    }
}

TEST(Scan, PsiIncludesFixedPoints)
{
    const ScanTable t = scan(builtin("dp"), ScanKind::psi, 5, {2.0});
    for (const Vec& r : t.rows) EXPECT_NEAR(r[1], 8.0, 1e-3);
}

TEST(Scan, DimensionGuards)
{
    const SipInstance h = builtin("hijazi", {{"d_x", 3}});
    EXPECT_THROW(scan(h, ScanKind::phi1, 5), std::invalid_argument);
    EXPECT_THROW(scan(builtin("seidel"), ScanKind::yx, 5, {0.1, 0.2}), std::invalid_argument);
    EXPECT_THROW(scan(builtin("dp"), ScanKind::phi1, 5, {2.0}), std::invalid_argument);
    EXPECT_THROW(scan(builtin("dp"), ScanKind::psi, 5, {9.0}), std::invalid_argument);
    EXPECT_THROW(scan(builtin("dp"), ScanKind::phi1, 0), std::invalid_argument);
}

}  // namespace
}  // namespace sipd
