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


#ifndef SIPD_REPORT_HPP
#define SIPD_REPORT_HPP

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sipd/gdiscretize.hpp"
#include "sipd/instance.hpp"

namespace sipd {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Splits "name:key=value,key=value" into a name and parameters.
inline std::pair<std::string, Params> parse_instance_spec(const std::string& spec)
{
    const auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    Params params;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("bad parameter '" + item + "', expected key=value");
            try {
                std::size_t used = 0;
                const std::string v = item.substr(eq + 1);
                params[item.substr(0, eq)] = std::stoi(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
            } catch (const std::logic_error&) {
                throw ConfigError("parameter '" + item.substr(0, eq) + "' needs an integer value");
            }
        }
    }
    return {name, params};
}

/// Builtin by name, otherwise an instance file.
inline SipInstance resolve_instance(const std::string& name, const Params& params = {})
{
    const auto& names = builtin_names();
    if (std::find(names.begin(), names.end(), name) != names.end()) return builtin(name, params);
    std::error_code ec;
    if (std::filesystem::is_regular_file(name, ec)) {
        if (!params.empty()) throw InstanceError("parameters are only supported for builtin instances");
        return load(name);
    }
    throw InstanceError("unknown instance '" + name + "'");
}

struct RunConfig {
    std::string instance;
    Params params;
    Method method = Method::bf;
    double eps_f = 1e-8;
    double delta = 1e-8;
    int K = 3;
    int iter_cap = 100;
    std::uint64_t seed = 0;
    double tol = 1e-6;
    double time_limit = kInf;
    std::string out;
    std::string format = "json";

    void validate() const
    {
        if (instance.empty()) throw ConfigError("instance is required");
        if (!(eps_f >= 0.0)) throw ConfigError("eps-f must be nonnegative");
        if (!(delta >= 0.0)) throw ConfigError("delta must be nonnegative");
        if (K < 1) throw ConfigError("K must be at least 1");
        if (iter_cap < 1) throw ConfigError("iter-cap must be at least 1");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
        if (!(time_limit > 0.0)) throw ConfigError("time limit must be positive");
        if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");
    }

    [[nodiscard]] DriverOptions driver() const
    {
        DriverOptions o;
        o.eps_f = eps_f;
        o.delta = delta;
        o.K = K;
        o.iter_cap = iter_cap;
        o.seed = seed;
        o.global.tol = tol;
        o.global.seed = seed;
        o.time_limit = time_limit;
        o.bundle.seed = seed;
        return o;
    }
};

struct Summary {
    std::optional<int> iterations_to_converge;
    double final_lbd = -kInf;
    std::optional<double> vstar_gap;
    bool certified_all = true;
    double wall_ms = 0.0;
    TraceStatus status = TraceStatus::iter_limit;
};

struct Report {
    RunConfig config;
    SolveTrace trace;
    Summary summary;
};

inline Summary summarize(const SipInstance& inst, const SolveTrace& t, double wall_ms)
{
    Summary s;
    if (t.converged()) s.iterations_to_converge = t.iterations();
    s.final_lbd = t.final_lbd();
    if (inst.vstar && !t.records.empty()) s.vstar_gap = *inst.vstar - t.final_lbd();
    s.certified_all = t.certified_all();
    s.wall_ms = wall_ms;
    s.status = t.status;
    return s;
}

inline Report run_config(const RunConfig& cfg)
{
    cfg.validate();
    const SipInstance inst = resolve_instance(cfg.instance, cfg.params);
    const auto t0 = std::chrono::steady_clock::now();
    Report r;
    r.config = cfg;
    r.trace = run(inst, cfg.method, cfg.driver());
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.summary = summarize(inst, r.trace, ms);
    return r;
}

namespace detail {

using nlohmann::json;

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double num_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

inline std::optional<double> opt_from(const json& j)
{
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

inline TraceStatus status_from(const std::string& s)
{
    for (TraceStatus t : {TraceStatus::converged_to_vstar, TraceStatus::eps_feasible, TraceStatus::iter_limit,
                          TraceStatus::time_limit}) {
        if (s == to_string(t)) return t;
    }
    throw ConfigError("unknown status '" + s + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const Report& r)
{
    using detail::json;
    using detail::num;
    json cfg{{"instance", r.config.instance},
             {"params", r.config.params},
             {"method", to_string(r.config.method)},
             {"eps_f", r.config.eps_f},
             {"delta", r.config.delta},
             {"K", r.config.K},
             {"iter_cap", r.config.iter_cap},
             {"seed", r.config.seed},
             {"tol", r.config.tol},
             {"time_limit", num(r.config.time_limit)}};
    json trace = json::array();
    for (const TraceRecord& t : r.trace.records) {
        trace.push_back({{"k", t.k},
                         {"lbd", num(t.lbd)},
                         {"x", t.x},
                         {"g_xk", num(t.g_xk)},
                         {"yhat", t.yhat},
                         {"accepted", t.accepted},
                         {"maxmin", t.maxmin ? num(*t.maxmin) : json(nullptr)},
                         {"maxmin_local", t.maxmin_local ? num(*t.maxmin_local) : json(nullptr)},
                         {"cutset_size", t.cutset_size},
                         {"certified", t.certified}});
    }
    const Summary& s = r.summary;
    json sum{{"iterations_to_converge", s.iterations_to_converge ? json(*s.iterations_to_converge) : json(nullptr)},
             {"final_lbd", num(s.final_lbd)},
             {"vstar_gap", s.vstar_gap ? num(*s.vstar_gap) : json(nullptr)},
             {"certified_all", s.certified_all},
             {"wall_ms", s.wall_ms},
             {"status", to_string(s.status)}};
    return {{"config", cfg}, {"trace", trace}, {"summary", sum}};
}

inline Report report_from_json(const nlohmann::json& j)
{
    using detail::num_from;
    using detail::opt_from;
    Report r;
    const auto& c = j.at("config");
    r.config.instance = c.at("instance").get<std::string>();
    r.config.params = c.at("params").get<Params>();
    const auto m = parse_method(c.at("method").get<std::string>());
    if (!m) throw ConfigError("unknown method in report");
    r.config.method = *m;
    r.config.eps_f = c.at("eps_f").get<double>();
    r.config.delta = c.at("delta").get<double>();
    r.config.K = c.at("K").get<int>();
    r.config.iter_cap = c.at("iter_cap").get<int>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.config.tol = c.at("tol").get<double>();
    r.config.time_limit = c.at("time_limit").is_null() ? kInf : c.at("time_limit").get<double>();
    r.trace.instance = r.config.instance;
    r.trace.method = r.config.method;
    for (const auto& t : j.at("trace")) {
        TraceRecord rec;
        rec.k = t.at("k").get<int>();
        rec.lbd = num_from(t.at("lbd"));
        rec.x = t.at("x").get<Vec>();
        rec.g_xk = num_from(t.at("g_xk"));
        rec.yhat = t.at("yhat").get<Vec>();
        rec.accepted = t.at("accepted").get<bool>();
        rec.maxmin = opt_from(t.at("maxmin"));
        rec.maxmin_local = opt_from(t.at("maxmin_local"));
        rec.cutset_size = t.at("cutset_size").get<int>();
        rec.certified = t.at("certified").get<bool>();
        r.trace.records.push_back(std::move(rec));
    }
    const auto& s = j.at("summary");
    if (!s.at("iterations_to_converge").is_null()) r.summary.iterations_to_converge = s.at("iterations_to_converge").get<int>();
    r.summary.final_lbd = s.at("final_lbd").is_null() ? -kInf : s.at("final_lbd").get<double>();
    r.summary.vstar_gap = opt_from(s.at("vstar_gap"));
    r.summary.certified_all = s.at("certified_all").get<bool>();
    r.summary.wall_ms = s.at("wall_ms").get<double>();
    r.summary.status = detail::status_from(s.at("status").get<std::string>());
    r.trace.status = r.summary.status;
    return r;
}

/// Trace as CSV: one row per iteration.
inline std::string trace_csv(const Report& r)
{
    std::ostringstream os;
    os.precision(17);
    os << "k,lbd,g_xk,accepted,maxmin,certified\n";
    for (const TraceRecord& t : r.trace.records) {
        os << t.k << ',' << t.lbd << ',' << t.g_xk << ',' << (t.accepted ? 1 : 0) << ',';
        if (t.maxmin) os << *t.maxmin;
        os << ',' << (t.certified ? 1 : 0) << '\n';
    }
    return os.str();
}

/// Compare cell: iterations to converge, or ITER / TLE markers.
inline std::string compare_cell(const SolveTrace& t)
{
    switch (t.status) {
    case TraceStatus::converged_to_vstar:
    case TraceStatus::eps_feasible: return std::to_string(t.iterations());
    case TraceStatus::iter_limit: return "ITER";
    case TraceStatus::time_limit: return "TLE";
    }
    return "?";
}

}  // namespace sipd

#endif  // SIPD_REPORT_HPP
