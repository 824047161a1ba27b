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


#ifndef SIPD_INSTANCE_HPP
#define SIPD_INSTANCE_HPP

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sipd/box.hpp"
#include "sipd/expr.hpp"
#include "sipd/parse.hpp"

namespace sipd {

class InstanceError : public std::runtime_error {
public:
    explicit InstanceError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

struct LlpPoint {
    double value = 0.0;
    Vec y;
};

/**
 * One SIP: min f(x) over X s.t. g(x, y) <= 0 for all y in Y.
 *
 * Y is the box `Y` unless `sphere_radius` is set, in which case Y is the
 * centred sphere of that radius and `Y` is its bounding box. Non-box sets
 * must supply the analytic lower-level solution and projection.
 */
struct SipInstance {
    std::string name;
    int dx = 0;
    int dy = 0;
    Box X;
    Box Y;
    std::optional<double> sphere_radius;
    Expr f;
    Expr g;
    std::function<LlpPoint(const Vec&)> analytic_llp;
    std::function<std::optional<Matrix>(const Vec&)> analytic_llp_jacobian;
    std::function<Vec(const Vec&)> proj_Y;
    std::function<std::vector<Expr>(const std::vector<Expr>&)> proj_Y_expr;
    std::optional<double> vstar;
    std::optional<Vec> xstar;

    [[nodiscard]] bool y_is_box() const { return !sphere_radius.has_value(); }

    /// Projection onto Y (exact clamp for boxes).
    [[nodiscard]] Vec project_y(const Vec& v) const
    {
        if (proj_Y) return proj_Y(v);
        return Y.project(v);
    }

    /// Expression form of the projection; boxes use mid() or its smooth version.
    [[nodiscard]] std::vector<Expr> project_y_expr(const std::vector<Expr>& v, bool smooth, double t) const
    {
        if (proj_Y_expr) return proj_Y_expr(v);
        std::vector<Expr> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(smooth ? softclamp(v[i], Y.lo[i], Y.hi[i], t) : clamp(v[i], Y.lo[i], Y.hi[i]));
        }
        return out;
    }

    [[nodiscard]] bool y_contains(const Vec& y, double tol) const
    {
        if (!Y.contains(y, tol)) return false;
        if (sphere_radius) {
            double s = 0.0;
            for (double v : y) s += v * v;
            return std::abs(std::sqrt(s) - *sphere_radius) <= tol * (1.0 + *sphere_radius);
        }
        return true;
    }

    void validate() const
    {
        if (dx < 1 || dy < 1) throw InstanceError("dimensions must be positive");
        if (X.size() != static_cast<std::size_t>(dx)) throw InstanceError("box_x has " + std::to_string(X.size()) + " entries, dims.x = " + std::to_string(dx));
        if (Y.size() != static_cast<std::size_t>(dy)) throw InstanceError("box_y has " + std::to_string(Y.size()) + " entries, dims.y = " + std::to_string(dy));
        if (!X.valid()) throw InstanceError("box_x must have finite bounds with lower <= upper");
        if (!Y.valid()) throw InstanceError("box_y must have finite bounds with lower <= upper");
        if (f.max_index(VarKind::X) > dx) throw InstanceError("objective references x" + std::to_string(f.max_index(VarKind::X)) + " but dims.x = " + std::to_string(dx));
        if (f.max_index(VarKind::Y) > 0 || f.max_index(VarKind::P) > 0) throw InstanceError("objective may only reference x variables");
        if (g.max_index(VarKind::X) > dx) throw InstanceError("constraint references x" + std::to_string(g.max_index(VarKind::X)) + " but dims.x = " + std::to_string(dx));
        if (g.max_index(VarKind::Y) > dy) throw InstanceError("constraint references y" + std::to_string(g.max_index(VarKind::Y)) + " but dims.y = " + std::to_string(dy));
        if (g.max_index(VarKind::P) > 0) throw InstanceError("constraint may not reference p variables");
        if (!y_is_box() && !(analytic_llp && proj_Y)) throw InstanceError("non-box Y requires analytic overrides");
    }
};

using Params = std::map<std::string, int>;

namespace detail {

inline SipInstance make_box_instance(std::string name, Box x, Box y, const std::string& f, const std::string& g,
                                     std::optional<double> vstar, std::optional<Vec> xstar)
{
    SipInstance s;
    s.name = std::move(name);
    s.dx = static_cast<int>(x.size());
    s.dy = static_cast<int>(y.size());
    s.X = std::move(x);
    s.Y = std::move(y);
    s.f = parse(f);
    s.g = parse(g);
    s.vstar = vstar;
    s.xstar = std::move(xstar);
    return s;
}

inline SipInstance make_hijazi(int d)
{
    const double r = std::sqrt(static_cast<double>(d - 1));
    SipInstance s;
    s.name = "hijazi";
    s.dx = d;
    s.dy = d;
    s.X = Box(Vec(d, -1.0), Vec(d, 1.0));
    s.Y = Box(Vec(d, -r), Vec(d, r));
    s.sphere_radius = r;
    Expr f(0.0);
    Expr g(0.0);
    for (int i = 1; i <= d; ++i) {
        f = i == 1 ? Expr::x(i) * Expr::x(i) : f + Expr::x(i) * Expr::x(i);
        const Expr term = (Expr::x(i) - Expr::y(i)) * Expr::y(i);
        g = i == 1 ? term : g + term;
    }
    s.f = -f;
    s.g = g;
    s.vstar = 1.0 - d;
    Vec xs(d, 1.0);
    xs[d - 1] = 0.0;
    s.xstar = xs;

    auto radial = [r, d](const Vec& v) {
        double nv = 0.0;
        for (double t : v) nv += t * t;
        nv = std::sqrt(nv);
        Vec y(d, 0.0);
        if (nv == 0.0) {
            y[0] = r;
            return y;
        }
        for (int i = 0; i < d; ++i) y[i] = r * v[i] / nv;
        return y;
    };
    s.proj_Y = radial;
    s.analytic_llp = [radial, r](const Vec& x) {
        LlpPoint p;
        p.y = radial(x);
        double nx = 0.0;
        for (double t : x) nx += t * t;
        nx = std::sqrt(nx);
        // g(x, y*) = y*.x - r^2 = r|x| - r^2 (also at x = 0 for any y on the sphere).
        p.value = r * nx - r * r;
        return p;
    };
    s.analytic_llp_jacobian = [r, d](const Vec& x) -> std::optional<Matrix> {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), d);
        const double nv = v.norm();
        if (nv == 0.0) return std::nullopt;
        return Matrix(r * (Matrix::Identity(d, d) / nv - v * v.transpose() / (nv * nv * nv)));
    };
    s.proj_Y_expr = [r](const std::vector<Expr>& v) {
        Expr ss(0.0);
        for (std::size_t i = 0; i < v.size(); ++i) ss = i == 0 ? v[i] * v[i] : ss + v[i] * v[i];
        const Expr nv = sqrt(ss);
        std::vector<Expr> out;
        for (const Expr& e : v) out.push_back(Expr(r) * e / nv);
        return out;
    };
    return s;
}

}  // namespace detail

inline const std::vector<std::string>& builtin_names()
{
    static const std::vector<std::string> names{"dp", "seidel", "tsoukalas", "mitsos_h", "hijazi"};
    return names;
}

/// Built-in instances; hijazi needs params {"d_x": n} with n >= 2.
inline SipInstance builtin(const std::string& name, const Params& params = {})
{
    auto no_params = [&] {
        if (!params.empty()) throw InstanceError("instance '" + name + "' takes no parameters");
    };
    SipInstance s;
    if (name == "dp") {
        no_params();
        s = detail::make_box_instance("dp", Box({0.0}, {6.0}), Box({2.0}, {6.0}), "10 - x1",
                                      "y1^2/(1 + exp(-40*(x1 - y1))) + x1 - y1 - 2", 8.0, Vec{2.0});
    } else if (name == "seidel") {
        no_params();
        s = detail::make_box_instance("seidel", Box({-1.0, -1.0}, {1.0, 1.0}), Box({-1.0}, {1.0}), "-x1 + 1.5*x2",
                                      "-y1^2 + 2*y1*x1 - x2", -1.0 / 6.0, Vec{1.0 / 3.0, 1.0 / 9.0});
    } else if (name == "tsoukalas") {
        no_params();
        s = detail::make_box_instance("tsoukalas", Box({-6.0}, {6.0}), Box({-6.0}, {6.0}), "10 - x1",
                                      "-x1^4 + x1^2 - x1^2*y1^2 + 2*x1^3*y1 - 4", 8.0, Vec{2.0});
    } else if (name == "mitsos_h") {
        no_params();
        s = detail::make_box_instance("mitsos_h", Box({0.0, -1000.0}, {1.0, 1000.0}), Box({-1.0}, {1.0}), "x2",
                                      "-(x1 - y1)^2 - x2", 0.0, Vec{0.5, 0.0});
    } else if (name == "hijazi") {
        auto it = params.find("d_x");
        if (it == params.end()) throw InstanceError("hijazi requires parameter d_x");
        for (const auto& [k, v] : params) {
            if (k != "d_x") throw InstanceError("unknown parameter '" + k + "' for hijazi");
        }
        if (it->second < 2) throw InstanceError("hijazi requires d_x >= 2");
        s = detail::make_hijazi(it->second);
    } else {
        throw InstanceError("unknown instance '" + name + "'");
    }
    s.validate();
    return s;
}

/**
 * Parses the line-oriented instance format (key = value, '#' starts a comment).
 * Values are JSON literals; expressions are JSON strings.
 */
inline SipInstance load_string(const std::string& text)
{
    SipInstance s;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<std::pair<double, double>> bx, by;
    std::string fs, gs;
    auto pairs = [](const nlohmann::json& j, int ln) {
        std::vector<std::pair<double, double>> out;
        if (!j.is_array()) throw InstanceError("expected a list of [lo, hi] pairs", ln);
        for (const auto& p : j) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw InstanceError("expected a list of [lo, hi] pairs", ln);
            out.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) {
                line.resize(i);
                break;
            }
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InstanceError("expected 'key = value'", lineno);
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        const std::string raw = line.substr(eq + 1);
        nlohmann::json v;
        try {
            v = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error& e) {
            throw InstanceError("bad value for '" + key + "'", lineno);
        }
        if (seen.count(key)) throw InstanceError("duplicate key '" + key + "'", lineno);
        seen[key] = lineno;
        try {
            if (key == "name") {
                s.name = v.get<std::string>();
            } else if (key == "dims.x") {
                s.dx = v.get<int>();
            } else if (key == "dims.y") {
                s.dy = v.get<int>();
            } else if (key == "box_x") {
                bx = pairs(v, lineno);
            } else if (key == "box_y") {
                by = pairs(v, lineno);
            } else if (key == "objective") {
                fs = v.get<std::string>();
                s.f = parse(fs);
            } else if (key == "constraint") {
                gs = v.get<std::string>();
                s.g = parse(gs);
            } else if (key == "vstar") {
                s.vstar = v.get<double>();
            } else if (key == "xstar") {
                s.xstar = v.get<Vec>();
            } else {
                throw InstanceError("unknown key '" + key + "'", lineno);
            }
        } catch (const nlohmann::json::exception&) {
            throw InstanceError("wrong value type for '" + key + "'", lineno);
        } catch (const ParseError& e) {
            throw InstanceError(std::string("expression: ") + e.what(), lineno);
        }
    }
    for (const char* k : {"dims.x", "dims.y", "box_x", "box_y", "objective", "constraint"}) {
        if (!seen.count(k)) throw InstanceError(std::string("missing key '") + k + "'");
    }
    auto to_box = [](const std::vector<std::pair<double, double>>& ps) {
        Box b;
        for (auto [l, h] : ps) {
            b.lo.push_back(l);
            b.hi.push_back(h);
        }
        return b;
    };
    s.X = to_box(bx);
    s.Y = to_box(by);
    try {
        s.validate();
    } catch (const InstanceError& e) {
        int ln = 0;
        const std::string w = e.what();
        if (w.find("box_x") != std::string::npos) ln = seen["box_x"];
        if (w.find("box_y") != std::string::npos) ln = seen["box_y"];
        if (w.find("objective") != std::string::npos) ln = seen["objective"];
        if (w.find("constraint") != std::string::npos) ln = seen["constraint"];
        throw InstanceError(w, ln);
    }
    if (s.xstar && s.xstar->size() != static_cast<std::size_t>(s.dx)) throw InstanceError("xstar dimension mismatch", seen["xstar"]);
    return s;
}

inline SipInstance load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_string(ss.str());
}

/// Serializes a box-Y instance in the file format accepted by load().
inline std::string dump_string(const SipInstance& s)
{
    auto box = [](const Box& b) {
        nlohmann::json j = nlohmann::json::array();
        for (std::size_t i = 0; i < b.size(); ++i) j.push_back({b.lo[i], b.hi[i]});
        return j.dump();
    };
    std::ostringstream o;
    o << "name = " << nlohmann::json(s.name).dump() << "\n";
    o << "dims.x = " << s.dx << "\n";
    o << "dims.y = " << s.dy << "\n";
    o << "box_x = " << box(s.X) << "\n";
    o << "box_y = " << box(s.Y) << "\n";
    o << "objective = " << nlohmann::json(to_string(s.f)).dump() << "\n";
    o << "constraint = " << nlohmann::json(to_string(s.g)).dump() << "\n";
    if (s.vstar) o << "vstar = " << nlohmann::json(*s.vstar).dump() << "\n";
    if (s.xstar) o << "xstar = " << nlohmann::json(*s.xstar).dump() << "\n";
    return o.str();
}

}  // namespace sipd

#endif  // SIPD_INSTANCE_HPP
