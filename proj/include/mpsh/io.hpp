#pragma once

// JSON conversions for configs and reports. Needs nlohmann/json (json.hpp).

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "mpsh/regularization.hpp"

namespace mpsh::io {

using json = nlohmann::json;

/// Matrices are {"re": [[..]], "im": [[..]]} (im optional) or a bare nested real array.
inline CMatrix matrix_from_json(const json& j) {
    const json& re = j.is_object() ? j.at("re") : j;
    require(re.is_array() && !re.empty(), "matrix: expected a non-empty nested array");
    const auto n = static_cast<Eigen::Index>(re.size());
    CMatrix a(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const json& row = re.at(static_cast<std::size_t>(r));
        require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n, "matrix: rows must have length n");
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    if (j.is_object() && j.contains("im")) {
        const json& im = j.at("im");
        require(im.is_array() && static_cast<Eigen::Index>(im.size()) == n, "matrix: im must match re");
        for (Eigen::Index r = 0; r < n; ++r) {
            const json& row = im.at(static_cast<std::size_t>(r));
            require(static_cast<Eigen::Index>(row.size()) == n, "matrix: im rows must have length n");
            for (Eigen::Index c = 0; c < n; ++c) a(r, c) += cplx(0.0, row.at(static_cast<std::size_t>(c)).get<double>());
        }
    }
    if (j.is_object() && j.contains("n"))
        require(j.at("n").get<Eigen::Index>() == n, "matrix: n does not match the entries");
    return a;
}

inline json matrix_to_json(const CMatrix& a) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        json rr = json::array(), ri = json::array();
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            rr.push_back(a(r, c).real());
            ri.push_back(a(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    return {{"n", a.rows()}, {"re", re}, {"im", im}};
}

inline json to_json(const ConeVerdict& v) { return {{"member", v.member}, {"margin", v.margin}, {"witness", v.witness}}; }

inline const char* to_string(InitMode m) { return m == InitMode::Direct ? "direct" : "continuity"; }

/// Reads solver settings over `cfg`; unknown keys are rejected.
inline SolverConfig solver_config_from_json(const json& j, SolverConfig cfg = {}) {
    require(j.is_object(), "solver config: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "m") cfg.m = it->get<int>();
        else if (k == "tolerance") cfg.tolerance = it->get<double>();
        else if (k == "max_iterations") cfg.max_iterations = it->get<int>();
        else if (k == "t_steps") cfg.t_steps = it->get<int>();
        else if (k == "cone_floor") cfg.cone_floor = it->get<double>();
        else if (k == "damping_min_step") cfg.damping_min_step = it->get<double>();
        else if (k == "linear_tolerance") cfg.linear_tolerance = it->get<double>();
        else if (k == "max_path_refinements") cfg.max_path_refinements = it->get<int>();
        else if (k == "init") {
            const auto s = it->get<std::string>();
            require(s == "continuity" || s == "direct", "solver config: init must be continuity or direct");
            cfg.init = s == "direct" ? InitMode::Direct : InitMode::Continuity;
        } else if (k == "grid" || k == "rhs" || k == "metric") {
            continue;  // consumed by the caller
        } else {
            fail(ErrorKind::InvalidArgument, "solver config: unknown key '" + k + "'");
        }
    }
    require(cfg.m >= 1, "solver config: m must be >= 1");
    require(cfg.tolerance > 0.0, "solver config: tolerance must be positive");
    require(cfg.max_iterations >= 1, "solver config: max_iterations must be >= 1");
    require(cfg.t_steps >= 1, "solver config: t_steps must be >= 1");
    require(cfg.cone_floor >= 0.0, "solver config: cone_floor must be >= 0");
    require(cfg.damping_min_step > 0.0 && cfg.damping_min_step <= 1.0, "solver config: damping_min_step in (0, 1]");
    require(cfg.linear_tolerance > 0.0, "solver config: linear_tolerance must be positive");
    return cfg;
}

inline json to_json(const SolverConfig& c) {
    return {{"m", c.m},
            {"tolerance", c.tolerance},
            {"max_iterations", c.max_iterations},
            {"t_steps", c.t_steps},
            {"cone_floor", c.cone_floor},
            {"damping_min_step", c.damping_min_step},
            {"linear_tolerance", c.linear_tolerance},
            {"max_path_refinements", c.max_path_refinements},
            {"init", to_string(c.init)}};
}

/// {"kind": "ball"|"torus", "n", "points", "radius"}; `points_override` > 0 replaces points.
inline GridDomain grid_from_json(const json& j, int points_override = 0) {
    require(j.is_object(), "grid: expected an object");
    const std::string kind = j.value("kind", std::string("ball"));
    const int n = j.at("n").get<int>();
    const int points = points_override > 0 ? points_override : j.at("points").get<int>();
    if (kind == "ball") return GridDomain::ball(n, points, j.value("radius", 1.0));
    if (kind == "torus") return GridDomain::torus(n, points);
    fail(ErrorKind::InvalidArgument, "grid: kind must be ball or torus");
}

inline json to_json(const GridDomain& d) {
    json j = {{"kind", d.is_torus() ? "torus" : "ball"}, {"n", d.n()}, {"points", d.points_per_axis()},
              {"spacing", d.spacing()}, {"nodes", d.size()}, {"interior", d.interior_nodes().size()}};
    if (!d.is_torus()) {
        j["radius"] = d.radius();
        j["boundary"] = d.boundary_nodes().size();
    }
    return j;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"final_residual", r.final_residual},
            {"min_cone_margin", r.min_cone_margin},
            {"max_principle_gap", finite_or_null(r.max_principle_gap)},
            {"residual_history", r.residual_history},
            {"path_constant", r.path_constant},
            {"path_steps", r.path_steps}};
}

inline json to_json(const IterateRecord& r) {
    return {{"index", r.index},
            {"beta", r.beta},
            {"constant", r.constant},
            {"newton_iterations", r.newton_iterations},
            {"final_residual", r.final_residual},
            {"cone_margin", r.cone_margin},
            {"upper_bound_gap", finite_or_null(r.upper_bound_gap)},
            {"lower_bound_gap", finite_or_null(r.lower_bound_gap)},
            {"sandwich_gaps",
             {finite_or_null(r.sandwich_gaps[0]), finite_or_null(r.sandwich_gaps[1]), finite_or_null(r.sandwich_gaps[2])}},
            {"max_principle_gap", finite_or_null(r.max_principle_gap)}};
}

inline json to_json(const ConvergenceReport& r) {
    return {{"monotone_gap", r.monotone_gap},         {"lower_gap", r.lower_gap},
            {"sup_deviation", r.sup_deviation},       {"deviations_nonincreasing", r.deviations_nonincreasing},
            {"pass", r.pass},                         {"violation_iterate", r.violation_iterate},
            {"violation_node", r.violation_node},     {"message", r.message}};
}

/// 64-bit FNV-1a, used for content hashes in run manifests.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, origin + ": " + e.what());
    }
}

} // namespace mpsh::io
