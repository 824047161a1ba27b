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


#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sipd/sipd.hpp"

namespace {

using namespace sipd;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLimit = 2;

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Vec parse_numbers(const std::string& s)
{
    Vec out;
    for (const std::string& item : split_list(s)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError("not a number: '" + item + "'");
        }
    }
    return out;
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
}

Params merge_params(const std::string& instance, const std::vector<std::string>& extra, std::string& name)
{
    auto [n, params] = parse_instance_spec(instance);
    for (const std::string& p : extra) {
        for (auto& [k, v] : parse_instance_spec("_:" + p).second) params[k] = v;
    }
    name = n;
    return params;
}

Method method_or_throw(const std::string& s)
{
    const auto m = parse_method(s);
    if (!m) throw ConfigError("unknown method '" + s + "'");
    return *m;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sipd: discretization methods for semi-infinite programs"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string solve_instance, solve_method = "bf";
    std::vector<std::string> solve_params;
    auto* solve = app.add_subcommand("solve", "run one method on one instance");
    solve->add_option("--instance", solve_instance, "builtin name (name:key=val) or instance file")->required();
    solve->add_option("--param", solve_params, "instance parameter key=value");
    solve->add_option("--method", solve_method, "bf|opt|greedy|2greedy|hybrid|g-opt|g-greedy|g-2greedy|g-hybrid");
    solve->add_option("--eps-f", cfg.eps_f, "feasibility tolerance");
    solve->add_option("--delta", cfg.delta, "required lower bound increase");
    solve->add_option("--K", cfg.K, "hybrid switch iteration");
    solve->add_option("--iter-cap", cfg.iter_cap, "iteration limit");
    solve->add_option("--seed", cfg.seed, "random seed");
    solve->add_option("--tol", cfg.tol, "global solver tolerance");
    solve->add_option("--time-limit", cfg.time_limit, "wall-clock limit in seconds");
    solve->add_option("--format", cfg.format, "json|csv");
    solve->add_option("--out", cfg.out, "output file (default stdout)");

    std::string cmp_instances, cmp_methods, cmp_out;
    double cell_timeout = 600.0;
    int cmp_iter_cap = 100;
    auto* compare = app.add_subcommand("compare", "iteration counts for instances x methods");
    compare->add_option("--instances", cmp_instances, "comma separated instances")->required();
    compare->add_option("--methods", cmp_methods, "comma separated methods")->required();
    compare->add_option("--out", cmp_out, "CSV output (default stdout)");
    compare->add_option("--cell-timeout", cell_timeout, "seconds per cell");
    compare->add_option("--iter-cap", cmp_iter_cap, "iteration limit per cell");

    std::string scan_instance, scan_kind, scan_fixed, scan_out;
    std::vector<std::string> scan_params;
    int grid = 101;
    auto* scan_cmd = app.add_subcommand("scan", "value function and solution mapping scans");
    scan_cmd->add_option("--instance", scan_instance, "instance")->required();
    scan_cmd->add_option("--param", scan_params, "instance parameter key=value");
    scan_cmd->add_option("--kind", scan_kind, "phi1|psi|yx")->required();
    scan_cmd->add_option("--grid", grid, "number of grid points");
    scan_cmd->add_option("--fixed", scan_fixed, "comma separated fixed points (psi) or coordinates (yx)");
    scan_cmd->add_option("--out", scan_out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*solve) {
            std::string name;
            cfg.params = merge_params(solve_instance, solve_params, name);
            cfg.instance = name;
            cfg.method = method_or_throw(solve_method);
            const Report r = run_config(cfg);
            emit(cfg.out, cfg.format == "csv" ? trace_csv(r) : to_json(r).dump(2) + "\n");
            if (!cfg.out.empty()) {
                std::cout << r.config.instance << ' ' << to_string(r.config.method) << ": " << to_string(r.summary.status)
                          << " after " << r.trace.iterations() << " iterations, LBD " << r.summary.final_lbd << '\n';
            }
            const bool ok = r.summary.status == TraceStatus::converged_to_vstar ||
                            r.summary.status == TraceStatus::eps_feasible;
            return ok ? kExitOk : kExitLimit;
        }
        if (*compare) {
            const auto instances = split_list(cmp_instances);
            const auto method_names = split_list(cmp_methods);
            if (instances.empty()) throw ConfigError("no instances given");
            if (method_names.empty()) throw ConfigError("no methods given");
            if (!(cell_timeout > 0.0)) throw ConfigError("cell-timeout must be positive");
            std::vector<Method> methods;
            for (const auto& m : method_names) methods.push_back(method_or_throw(m));
            std::ostringstream os;
            os << "instance";
            for (Method m : methods) os << ',' << to_string(m);
            os << '\n';
            for (const std::string& spec : instances) {
                os << spec;
                for (Method m : methods) {
                    std::string cell;
                    try {
                        RunConfig c;
                        auto [name, params] = parse_instance_spec(spec);
                        c.instance = name;
                        c.params = params;
                        c.method = m;
                        c.iter_cap = cmp_iter_cap;
                        c.time_limit = cell_timeout;
                        cell = compare_cell(run_config(c).trace);
                    } catch (const std::exception& e) {
                        std::cerr << spec << ' ' << to_string(m) << ": " << e.what() << '\n';
                        cell = "ERR";
                    }
                    os << ',' << cell;
                }
                os << '\n';
            }
            emit(cmp_out, os.str());
            return kExitOk;
        }
        if (*scan_cmd) {
            ScanKind kind;
            if (scan_kind == "phi1") kind = ScanKind::phi1;
            else if (scan_kind == "psi") kind = ScanKind::psi;
            else if (scan_kind == "yx") kind = ScanKind::yx;
            else throw ConfigError("unknown scan kind '" + scan_kind + "'");
            std::string name;
            const Params params = merge_params(scan_instance, scan_params, name);
            const SipInstance inst = resolve_instance(name, params);
            emit(scan_out, scan(inst, kind, grid, parse_numbers(scan_fixed)).csv());
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
