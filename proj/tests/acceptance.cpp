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


// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace sipd;

namespace {

std::vector<SolveTrace> g_traces;  // every trace of criteria 1-4

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

SolveTrace traced(const SipInstance& inst, Method m, const DriverOptions& o = {})
{
    SolveTrace t = run(inst, m, o);
    g_traces.push_back(t);
    return t;
}

std::string count_of(const SolveTrace& t)
{
    return t.instance + "/" + to_string(t.method) + "=" + (t.converged() ? std::to_string(t.iterations()) : compare_cell(t));
}

Outcome criterion1()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const SolveTrace t = traced(builtin("dp"), Method::bf);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int ks[] = {1, 5, 10, 15, 20, 25, 28};
    const double ref[] = {4, 4.74, 5.62, 6.41, 7.12, 7.73, 8};
    for (int i = 0; i < 7; ++i) {
        const int k = ks[i];
        if (static_cast<int>(t.records.size()) < k) {
            o.require(false, "missing iteration " + std::to_string(k));
            continue;
        }
        const double lbd = t.records[k - 1].lbd;
        o.require(std::abs(lbd - ref[i]) <= 0.05, "LBD at k=" + std::to_string(k) + " is " + fmt("%.4f", lbd));
        o.note("k=" + std::to_string(k) + ":" + fmt("%.3f", lbd));
    }
    o.require(t.status == TraceStatus::converged_to_vstar && t.iterations() == 28,
              "converged at " + std::to_string(t.iterations()));
    for (std::size_t k = 0; k + 1 < t.records.size(); ++k)
        o.require(std::abs(t.records[k].lbd - 8.0) > 1e-3, "converged early at k=" + std::to_string(k + 1));
    o.require(secs < 60.0, "runtime " + fmt("%.1f s", secs));
    o.note(fmt("%.2f s", secs));
    return o;
}

Outcome criterion2()
{
    Outcome o;
    const std::pair<const char*, int> want[] = {{"dp", 28}, {"seidel", 8}, {"tsoukalas", 8}};
    for (const auto& [name, n] : want) {
        const SolveTrace t = traced(builtin(name), Method::bf);
        o.require(t.converged() && t.iterations() == n, count_of(t));
        o.note(count_of(t));
    }
    return o;
}

Outcome criterion3()
{
    Outcome o;
    for (const char* name : {"dp", "seidel"}) {
        for (Method m : {Method::greedy, Method::two_greedy, Method::hybrid, Method::opt}) {
            const SolveTrace t = traced(builtin(name), m);
            o.require(t.converged() && t.iterations() <= 3, count_of(t));
            o.note(count_of(t));
        }
    }
    const SolveTrace t = traced(builtin("tsoukalas"), Method::greedy);
    o.require(t.converged() && t.iterations() <= 6, count_of(t));
    o.note(count_of(t));
    return o;
}

Outcome criterion4()
{
    Outcome o;
    const std::pair<const char*, int> want[] = {{"dp", 3}, {"seidel", 4}, {"tsoukalas", 3}};
    for (const auto& [name, n] : want) {
        const SolveTrace t = traced(builtin(name), Method::g_greedy);
        o.require(t.converged() && t.iterations() <= n, count_of(t));
        o.note(count_of(t));
    }
    return o;
}

Outcome criterion5()
{
    Outcome o;
    const SipInstance h = builtin("hijazi", {{"d_x", 3}});
    std::mt19937_64 rng(2026);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec> yd;
        for (int k = 1; k <= 7; ++k) {
            yd.push_back(h.project_y({nd(rng), nd(rng), nd(rng)}));
            const GlobalResult r = solve_lbp(h, yd);
            o.require(r.certified() && std::abs(r.value + 3.0) <= 1e-6,
                      "LBP with " + std::to_string(k) + " points = " + fmt("%.8f", r.value));
        }
    }
    o.note("35 nested discretizations of 1..7 sphere points give -3");
    GlobalOptions go;
    go.node_limit = 20000;
    const GenCut cut{Matrix::Identity(3, 3), Vec(3, 0.0)};
    const GlobalResult g = solve_glbp(h, {cut}, go);
    o.require(std::abs(g.value + 2.0) <= 1e-6, "G-LBP (I, 0) = " + fmt("%.8f", g.value));
    o.note("G-LBP (I,0) = " + fmt("%.9f", g.value) + " (" + to_string(g.status) + ", bound " + fmt("%.5f", g.bound) +
           ")");
    return o;
}

Outcome criterion6()
{
    Outcome o;
    std::mt19937_64 rng(606);
    int usable = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Nlp nlp = oracle::random_parametric_qp(rng);
        const oracle::FdCheck c = oracle::fd_value_gradient(nlp, multistart_local(nlp, 4, trial).z);
        if (!c.usable) continue;
        ++usable;
        worst = std::max(worst, c.max_rel_err);
        o.require(c.max_rel_err < 1e-4, "QP " + std::to_string(trial) + " rel err " + fmt("%.2e", c.max_rel_err));
    }
    o.note(std::to_string(usable) + "/100 QPs classified, worst rel err " + fmt("%.1e", worst));
    const SipInstance dp = builtin("dp");
    std::uniform_real_distribution<double> u(2.0, 6.0);
    int dp_usable = 0;
    double dp_worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double y = u(rng);
        const ValueResult v = psi(dp, {}, {y});
        if (!v.valid) continue;
        const oracle::FdCheck c = oracle::fd_value_gradient(oracle::psi1_nlp(dp, {y}), v.x, 1e-6);
        if (!c.usable) continue;
        ++dp_usable;
        const double err = std::abs(v.subgrad[0] - c.numeric[0]) / std::max(1.0, std::abs(c.numeric[0]));
        dp_worst = std::max(dp_worst, err);
        o.require(err < 1e-4, "DP psi1 at y=" + fmt("%.4f", y) + " rel err " + fmt("%.2e", err));
    }
    o.note(std::to_string(dp_usable) + "/20 DP psi1 classified, worst rel err " + fmt("%.1e", dp_worst));
    o.require(usable > 0 && dp_usable > 0, "no classifiable cases");
    return o;
}

GlobalProblem random_problem(std::mt19937_64& rng, int index)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int d = 1 + index % 2;
    GlobalProblem p;
    p.box = Box(Vec(d, -1.5), Vec(d, 1.5));
    Expr f(0.0);
    for (int i = 1; i <= d; ++i)
        for (int k = 1; k <= 4; ++k) f = f + Expr(u(rng)) * pow(Expr::x(i), Expr(static_cast<double>(k)));
    if (d == 2) f = f + Expr(u(rng)) * Expr::x(1) * Expr::x(2) + Expr(0.5 * u(rng)) * exp(Expr(0.5) * Expr::x(1) * Expr::x(2));
    p.objective = f;
    if (index % 4 >= 2) {
        // Quadratic constraint that keeps the origin strictly feasible.
        Expr c(-0.5 - 0.5 * std::abs(u(rng)));
        for (int i = 1; i <= d; ++i) c = c + Expr(0.5 + std::abs(u(rng))) * Expr::x(i) * Expr::x(i) + Expr(u(rng)) * Expr::x(i);
        p.constraints.push_back(c);
    }
    return p;
}

Outcome criterion7()
{
    Outcome o;
    std::mt19937_64 rng(707);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const GlobalProblem p = random_problem(rng, i);
        const GlobalResult r = minimize_global(p);
        const double ref = oracle::grid_polish_min(p, 1000000);
        const double diff = std::abs(r.value - ref);
        worst = std::max(worst, diff);
        o.require(r.certified() && diff <= 2e-6, "instance " + std::to_string(i) + " B&B " + fmt("%.9f", r.value) +
                                                     " oracle " + fmt("%.9f", ref));
    }
    o.note("50 instances, worst |B&B - grid| " + fmt("%.1e", worst));
    int pairs = 0;
    const char* names[] = {"dp", "seidel", "tsoukalas", "mitsos_h"};
    for (int i = 0; i < 200; ++i) {
        const SipInstance s = builtin(names[i % 4]);
        std::uniform_real_distribution<double> u(s.Y.lo[0], s.Y.hi[0]);
        std::uniform_int_distribution<int> cnt(0, 3);
        std::vector<Vec> small;
        for (int k = cnt(rng); k > 0; --k) small.push_back({u(rng)});
        std::vector<Vec> large = small;
        for (int k = 1 + cnt(rng) % 2; k > 0; --k) large.push_back({u(rng)});
        const GlobalResult a = solve_lbp(s, small);
        const GlobalResult b = solve_lbp(s, large);
        o.require(a.certified() && b.certified() && a.value <= b.value + 2e-6,
                  std::string(names[i % 4]) + " pair " + std::to_string(i));
        ++pairs;
    }
    o.note(std::to_string(pairs) + " nested pairs ordered");
    return o;
}

Outcome criterion8()
{
    Outcome o;
    DriverOptions failing;
    failing.fail_maxmin_oracle = true;
    int compared = 0;
    for (const std::string& name : builtin_names()) {
        const Params p = name == "hijazi" ? Params{{"d_x", 3}} : Params{};
        const SipInstance s = builtin(name, p);
        const SolveTrace bf = run_bf(s);
        std::vector<Method> methods{Method::greedy, Method::two_greedy, Method::hybrid, Method::opt};
        if (name == "hijazi") methods = {Method::greedy};
        for (Method m : methods) {
            const SolveTrace t = run_method(s, m, failing);
            bool same = t.records.size() == bf.records.size() && t.status == bf.status;
            for (std::size_t k = 0; same && k < t.records.size(); ++k)
                same = std::abs(t.records[k].lbd - bf.records[k].lbd) <= 1e-9;
            o.require(same, name + "/" + to_string(m));
            ++compared;
        }
        o.note(name + ":" + std::to_string(bf.records.size()) + " it");
    }
    o.note(std::to_string(compared) + " traces identical to BF");
    return o;
}

Outcome criterion9()
{
    Outcome o;
    const ScanTable dp = scan(builtin("dp"), ScanKind::phi1, 101);
    double mx = -kInf;
    for (double v : dp.column(1)) mx = std::max(mx, v);
    o.require(std::abs(mx - 8.0) <= 1e-3, "DP phi1 max " + fmt("%.6f", mx));
    o.note("DP phi1 max " + fmt("%.6f", mx));
    const ScanTable sk = scan(builtin("seidel"), ScanKind::yx, 101);
    double dev = 0.0;
    for (const Vec& r : sk.rows) dev = std::max(dev, std::abs(r[1] - r[0]));
    o.require(dev <= 1e-4, "Seidel y*(x) deviation " + fmt("%.2e", dev));
    o.note("Seidel max |y* - x1| " + fmt("%.1e", dev));
    const ScanTable ts = scan(builtin("tsoukalas"), ScanKind::phi1, 101);
    double jump = 0.0;
    for (std::size_t i = 1; i < ts.rows.size(); ++i) jump = std::max(jump, std::abs(ts.rows[i][1] - ts.rows[i - 1][1]));
    o.require(jump > 1.0, "Tsoukalas largest jump " + fmt("%.3f", jump));
    o.note("Tsoukalas largest jump " + fmt("%.3f", jump));
    return o;
}

Outcome criterion10()
{
    Outcome o;
    std::size_t steps = 0;
    for (const SolveTrace& t : g_traces) {
        for (std::size_t k = 1; k < t.records.size(); ++k, ++steps)
            o.require(t.records[k].lbd >= t.records[k - 1].lbd - 2e-6,
                      t.instance + "/" + to_string(t.method) + " k=" + std::to_string(k + 1));
    }
    o.require(!g_traces.empty(), "no traces");
    o.note(std::to_string(g_traces.size()) + " traces, " + std::to_string(steps) + " steps");
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"DP brute-force trace", criterion1},        {"brute-force iteration counts", criterion2},
        {"optimality-based counts", criterion3},     {"generalized counts", criterion4},
        {"sphere vertex exclusion", criterion5},     {"value-gradient accuracy", criterion6},
        {"global solver certification", criterion7}, {"degradation to brute force", criterion8},
        {"scan fidelity", criterion9},               {"monotone lower bounds", criterion10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2zu %s  %s (%.1fs): %s\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                    r.detail.c_str());
        std::fflush(stdout);
        failed += r.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
