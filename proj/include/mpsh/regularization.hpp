#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mpsh/solver.hpp"

namespace mpsh {

inline constexpr double kEuler = 2.718281828459045;
inline constexpr double kDefaultClipFloor = -1e6;
inline constexpr double kBetaCap = 1e6;

/// Decreasing smooth data f_j with the penalty parameters β(j) and constants
/// c_j (local upper bound) or C_j (global). `subsolution_constant` is the bowl constant C;
/// zero means "compute it".
struct ApproximationSchedule {
    std::vector<GridFunction> f_sequence;
    std::vector<double> beta_schedule;
    std::vector<double> c_constants;
    double subsolution_constant = 0.0;
    double radius = 1.0;
};

struct RegularizationConfig {
    SolverConfig solver;
    int min_iterates = 2;
    double convergence_target = std::numeric_limits<double>::infinity();
    double clip_floor = kDefaultClipFloor;
};

/// Bookkeeping for one emitted iterate. Local runs fill the bound gaps,
/// global runs the three sandwich gaps (≤ 0 means the inequality holds).
struct IterateRecord {
    int index = 0;
    double beta = 0.0;
    double constant = 0.0;
    int newton_iterations = 0;
    double final_residual = 0.0;
    double cone_margin = 0.0;
    double upper_bound_gap = std::numeric_limits<double>::quiet_NaN();
    double lower_bound_gap = std::numeric_limits<double>::quiet_NaN();
    double sandwich_gaps[3] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN()};
    double max_principle_gap = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
};

struct RegularizationResult {
    std::vector<GridFunction> u_sequence;
    std::vector<IterateRecord> records;
    double monotone_gap = -std::numeric_limits<double>::infinity();
    double lower_gap = -std::numeric_limits<double>::infinity();
    std::vector<double> sup_deviation;
    double min_cone_margin = std::numeric_limits<double>::infinity();
};

struct ConvergenceReport {
    double monotone_gap = -std::numeric_limits<double>::infinity();
    double lower_gap = -std::numeric_limits<double>::infinity();
    std::vector<double> sup_deviation;
    bool deviations_nonincreasing = true;
    bool pass = false;
    // First located violation, if any: iterate index and node.
    int violation_iterate = -1;
    long violation_node = -1;
    std::string message;
};

namespace detail {

inline bool on_domain(const GridDomain& d, std::size_t i) { return d.tag(i) != NodeTag::Exterior; }

inline double sup_on_domain(const GridFunction& u) {
    const GridDomain& d = u.domain();
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.size(); ++i)
        if (on_domain(d, i)) s = std::max(s, u[i]);
    return s;
}

inline double inf_on_domain(const GridFunction& u) {
    const GridDomain& d = u.domain();
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.size(); ++i)
        if (on_domain(d, i)) s = std::min(s, u[i]);
    return s;
}

/// Max over the window [−1, 1] along one axis (wrapping on the torus).
inline GridFunction axis_max(const GridFunction& u, int axis) {
    const GridDomain& d = u.domain();
    GridFunction out = u;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (int s : {-1, 1})
            if (auto j = d.shift(i, axis, s)) out[i] = std::max(out[i], u[*j]);
    return out;
}

/// (1/4, 1/2, 1/4) along one axis (wrapping on the torus). Nodes missing a
/// neighbour on a ball grid keep their value, so affine data pass unchanged.
inline GridFunction axis_average(const GridFunction& u, int axis) {
    const GridDomain& d = u.domain();
    GridFunction out = u;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto lo = d.shift(i, axis, -1), hi = d.shift(i, axis, 1);
        if (lo && hi) out[i] = 0.5 * u[i] + 0.25 * (u[*lo] + u[*hi]);
    }
    return out;
}

} // namespace detail

/// Replaces −∞, NaN and values below `floor` by `floor`.
inline GridFunction clip_target(const GridFunction& target, double floor = kDefaultClipFloor) {
    GridFunction out = target;
    for (double& v : out.values())
        if (!(v >= floor)) v = floor;
    return out;
}

/// Shifts u down so that its sup over grid nodes is at most `level`.
inline GridFunction normalize_sup(const GridFunction& u, double level = -2.0) {
    const double s = detail::sup_on_domain(u);
    GridFunction out = u;
    if (s > level)
        for (double& v : out.values()) v -= s - level;
    return out;
}

/// Cube max filter of the given radius (in cells).
inline GridFunction max_filter(const GridFunction& u, int radius) {
    GridFunction out = u;
    for (int k = 0; k < radius; ++k)
        for (int a = 0; a < u.domain().real_dim(); ++a) out = detail::axis_max(out, a);
    return out;
}

/// One separable averaging pass over every real axis.
inline GridFunction smoothing_pass(const GridFunction& u) {
    GridFunction out = u;
    for (int a = 0; a < u.domain().real_dim(); ++a) out = detail::axis_average(out, a);
    return out;
}

/// f_j = A^k M_k target with k = count − 1 − j, where M_k is the cube max
/// filter of radius k and A one smoothing pass. Since A M_{k+1} ≥ M_k, the
/// sequence is nodewise nonincreasing, stays ≥ target and ends at the
/// (clipped) target itself.
inline std::vector<GridFunction> upper_smooth_sequence(const GridFunction& target, int count,
                                                       double floor = kDefaultClipFloor) {
    require(count >= 1, "upper_smooth_sequence: need count >= 1");
    bool any_finite = false;
    for (double v : target.values()) any_finite = any_finite || (std::isfinite(v) && v > floor);
    if (!any_finite) fail(ErrorKind::TargetNotAdmissible, "upper_smooth_sequence: target is identically -inf");
    const GridFunction clipped = clip_target(target, floor);
    std::vector<GridFunction> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        const int k = count - 1 - j;
        GridFunction f = max_filter(clipped, k);
        for (int s = 0; s < k; ++s) f = smoothing_pass(f);
        out.push_back(std::move(f));
    }
    return out;
}

/// Bowl constant of the local lower bound: the smallest C = 2^k ≥ 1 with C F_m[i∂∂̄(|z|² − r²)] ≥ 1
/// at every interior node.
inline double bowl_constant(const GridDomain& d, const MetricField& g, int m) {
    const double r2 = d.radius() * d.radius();
    const GridFunction psi = GridFunction::sample(d, [&](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s - r2;
    });
    const FmField fm = fm_field(psi, g, m);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i : d.interior_nodes()) lo = std::min(lo, fm.in_cone[i] ? fm.value[i] : 0.0);
    require(lo > 0.0, "bowl_constant: |z|^2 is not strictly m-subharmonic on this grid");
    double c = 1.0;
    while (c * lo < 1.0 - 1e-12) c *= 2.0;  // FD rounding on exact quadratics
    return c;
}

/// F_m^+ of (χ +) i∂∂̄f at every evaluated node, zero where the form leaves the cone.
inline GridFunction fm_plus_field(const GridFunction& f, const MetricField& g, int m,
                                  const std::optional<HermitianMatrix>& chi = std::nullopt) {
    const FmField fm = fm_field(f, g, m, chi);
    GridFunction out(f.domain(), 0.0);
    for (std::size_t i = 0; i < f.domain().size(); ++i)
        if (fm.evaluated[i] && fm.in_cone[i]) out[i] = fm.value[i];
    return out;
}

/// c_j = max{sup F_m[i∂∂̄f_j], e} over interior nodes.
inline std::vector<double> local_constants(const std::vector<GridFunction>& fs, const MetricField& g, int m) {
    std::vector<double> c;
    for (const auto& f : fs) {
        const GridFunction fp = fm_plus_field(f, g, m);
        double s = kEuler;
        for (std::size_t i : f.domain().interior_nodes()) s = std::max(s, fp[i]);
        c.push_back(s);
    }
    return c;
}

/// β(j) = max(e + 1, log c_j)·2^j, capped; the schedule is cut where the cap
/// would stop strict growth.
inline std::vector<double> default_local_betas(const std::vector<double>& c) {
    std::vector<double> b;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double v = std::min(kBetaCap, std::max(kEuler + 1.0, std::log(c[j])) * std::ldexp(1.0, static_cast<int>(j)));
        if (!b.empty() && v <= b.back()) break;
        b.push_back(v);
    }
    return b;
}

/// Corridor function F_m^j: F^+ + 3/4, one smoothing pass, clamped into [F^+ + 1/2, F^+ + 1].
inline GridFunction corridor_function(const GridFunction& fplus) {
    GridFunction shifted = fplus;
    for (double& v : shifted.values()) v += 0.75;
    GridFunction out = smoothing_pass(shifted);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], fplus[i] + 0.5, fplus[i] + 1.0);
    return out;
}

/// β(j) = max(e + 1, exp(−inf f_j + C_j + 1))·2^j capped at 1e6, cut where growth stops.
inline std::vector<double> default_global_betas(const std::vector<GridFunction>& fs, const std::vector<double>& cj) {
    require(fs.size() == cj.size(), "default_global_betas: size mismatch");
    std::vector<double> b;
    for (std::size_t j = 0; j < fs.size(); ++j) {
        const double base = std::max(kEuler + 1.0, std::exp(std::min(50.0, -detail::inf_on_domain(fs[j]) + cj[j] + 1.0)));
        const double v = std::min(kBetaCap, base * std::ldexp(1.0, static_cast<int>(j)));
        if (!b.empty() && v <= b.back()) break;
        b.push_back(v);
    }
    return b;
}

/// Checks the schedule invariants against a target. A β schedule that fails
/// to grow strictly raises ScheduleExhausted; other violations InvalidArgument.
inline void validate_schedule(const ApproximationSchedule& s, const GridFunction& target) {
    require(!s.f_sequence.empty(), "schedule: empty f_sequence");
    require(s.beta_schedule.size() == s.f_sequence.size(), "schedule: beta_schedule and f_sequence sizes differ");
    require(s.c_constants.empty() || s.c_constants.size() == s.f_sequence.size(),
            "schedule: c_constants and f_sequence sizes differ");
    const GridDomain& d = target.domain();
    require(detail::sup_on_domain(target) <= -2.0 + 1e-12, "schedule: sup of the target must be <= -2 (see normalize_sup)");
    for (std::size_t j = 0; j < s.f_sequence.size(); ++j) {
        const GridFunction& f = s.f_sequence[j];
        require(f.domain() == d, "schedule: f_j lives on a different grid");
        require(f.finite_on_domain(), "schedule: f_j must be finite");
        require(detail::sup_on_domain(f) <= -1.0 + 1e-12, "schedule: sup of each f_j must be <= -1");
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!detail::on_domain(d, i)) continue;
            require(f[i] >= target[i] - 1e-12, "schedule: f_" + std::to_string(j) + " is below the target at node " + std::to_string(i));
            if (j > 0)
                require(f[i] <= s.f_sequence[j - 1][i] + 1e-12,
                        "schedule: f_sequence is not nonincreasing at index " + std::to_string(j));
        }
        const double b = s.beta_schedule[j];
        require(b > kEuler, "schedule: every beta must exceed e");
        if (j > 0 && !(b > s.beta_schedule[j - 1]))
            fail(ErrorKind::ScheduleExhausted, "schedule: beta must increase strictly, correction terms cannot shrink");
    }
    require(s.radius > 0.0, "schedule: radius must be positive");
}

/// Monotonicity, lower bound and sup-deviations of an emitted sequence.
inline ConvergenceReport verify_monotone_convergence(const std::vector<GridFunction>& us, const GridFunction& target,
                                                     double convergence_target = std::numeric_limits<double>::infinity(),
                                                     double floor = kDefaultClipFloor) {
    ConvergenceReport rep;
    if (us.empty()) {
        rep.message = "empty sequence";
        return rep;
    }
    const GridDomain& d = target.domain();
    for (std::size_t k = 0; k < us.size(); ++k) {
        require(us[k].domain() == d, "verify_monotone_convergence: iterate on a different grid");
        double dev = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!detail::on_domain(d, i)) continue;
            const double t = std::max(target[i], floor);
            const double lo = t - us[k][i];
            if (lo > rep.lower_gap) rep.lower_gap = lo;
            if (lo > 1e-8 && rep.violation_iterate < 0) {
                rep.violation_iterate = static_cast<int>(k);
                rep.violation_node = static_cast<long>(i);
                rep.message = "iterate " + std::to_string(k) + " below the target at node " + std::to_string(i);
            }
            if (std::isfinite(target[i]) && target[i] > floor) dev = std::max(dev, std::abs(us[k][i] - target[i]));
            if (k > 0) {
                const double up = us[k][i] - us[k - 1][i];
                if (up > rep.monotone_gap) rep.monotone_gap = up;
                if (up > 1e-8 && rep.violation_iterate < 0) {
                    rep.violation_iterate = static_cast<int>(k);
                    rep.violation_node = static_cast<long>(i);
                    rep.message = "iterate " + std::to_string(k) + " exceeds its predecessor at node " + std::to_string(i);
                }
            }
        }
        rep.sup_deviation.push_back(dev);
        if (k > 0 && dev > rep.sup_deviation[k - 1] + 1e-12) rep.deviations_nonincreasing = false;
    }
    if (us.size() == 1) rep.monotone_gap = 0.0;
    rep.pass = rep.monotone_gap <= 1e-8 && rep.lower_gap <= 1e-8 && rep.deviations_nonincreasing &&
               rep.sup_deviation.back() <= convergence_target;
    if (rep.pass) rep.message = "pass";
    else if (rep.message.empty())
        rep.message = rep.deviations_nonincreasing ? "final sup-deviation above the convergence target"
                                                   : "sup-deviations increase";
    return rep;
}

namespace detail {

inline void finish(RegularizationResult& res, const GridFunction& target, double floor) {
    const auto rep = verify_monotone_convergence(res.u_sequence, target, std::numeric_limits<double>::infinity(), floor);
    res.monotone_gap = rep.monotone_gap;
    res.lower_gap = rep.lower_gap;
    res.sup_deviation = rep.sup_deviation;
}

/// Greedy selection: after index j, the next index is the first j' > j whose
/// envelope lies below the current iterate at every grid node.
inline std::optional<std::size_t> next_index(const std::vector<GridFunction>& envelopes, std::size_t after,
                                             const GridFunction& current) {
    const GridDomain& d = current.domain();
    for (std::size_t j = after + 1; j < envelopes.size(); ++j) {
        bool below = true;
        for (std::size_t i = 0; i < d.size() && below; ++i)
            if (on_domain(d, i)) below = envelopes[j][i] <= current[i];
        if (below) return j;
    }
    return std::nullopt;
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Decreasing approximation of an m-psh function on a ball grid by the
/// penalized Dirichlet solutions u_j^β, F_m[i∂∂̄u] = e^{β(u − f_j)} + 1/(2β),
/// u = f_j on the boundary, shifted to û_j = u_j^β + 2Cr²/β − (1/β)log(1/(2β)).
inline RegularizationResult local_regularize(const GridFunction& u, const MetricField& g, int m,
                                             ApproximationSchedule schedule, const RegularizationConfig& cfg) {
    const GridDomain& d = u.domain();
    require(!d.is_torus(), "local_regularize: needs a ball grid");
    require(g.domain() == d, "local_regularize: metric field lives on a different grid");
    require(m >= 1 && m <= d.n(), "local_regularize: need 1 <= m <= n");
    const GridFunction target = clip_target(u, cfg.clip_floor);
    const ConeField cf = cone_field(target, g, m, std::nullopt, 1e-6);
    if (!cf.all_members)
        fail(ErrorKind::TargetNotAdmissible, "local_regularize: target is not m-subharmonic (margin " +
                                                 std::to_string(cf.min_margin) + ")");
    if (schedule.c_constants.empty()) schedule.c_constants = local_constants(schedule.f_sequence, g, m);
    validate_schedule(schedule, target);
    const double C = schedule.subsolution_constant > 0.0 ? schedule.subsolution_constant : bowl_constant(d, g, m);
    const double r2 = schedule.radius * schedule.radius;

    SolverConfig scfg = cfg.solver;
    scfg.m = m;
    const std::size_t count = schedule.f_sequence.size();
    auto shift_of = [&](std::size_t j) {
        const double b = schedule.beta_schedule[j];
        return 2.0 * C * r2 / b - std::log(1.0 / (2.0 * b)) / b;
    };
    std::vector<GridFunction> envelopes;
    for (std::size_t j = 0; j < count; ++j) {
        GridFunction e = schedule.f_sequence[j];
        const double add = shift_of(j) + std::log(schedule.c_constants[j]) / schedule.beta_schedule[j];
        for (double& v : e.values()) v += add;
        envelopes.push_back(std::move(e));
    }

    RegularizationResult res;
    auto solve_index = [&](std::size_t j) {
        const auto t0 = std::chrono::steady_clock::now();
        const GridFunction& f = schedule.f_sequence[j];
        const double b = schedule.beta_schedule[j];
        const auto rhs = exponential_rhs(GridFunction(d, 1.0), f, b, 1.0 / (2.0 * b));
        SolveReport rep;
        try {
            rep = solve_dirichlet(f, rhs, g, scfg);
        } catch (const Error& e) {
            fail(ErrorKind::DirichletFailure, "local_regularize: Dirichlet solve " + std::to_string(j) + " failed (" +
                                                  to_string(e.kind()) + "): " + e.what());
        }
        IterateRecord rec;
        rec.index = static_cast<int>(j);
        rec.beta = b;
        rec.constant = schedule.c_constants[j];
        rec.newton_iterations = rep.iterations;
        rec.final_residual = rep.final_residual;
        rec.cone_margin = rep.min_cone_margin;
        rec.max_principle_gap = rep.max_principle_gap;
        rec.upper_bound_gap = rec.lower_bound_gap = -std::numeric_limits<double>::infinity();
        const double c1 = std::log(schedule.c_constants[j]) / b;
        const double c2 = C * r2 / b - std::log(1.0 / (2.0 * b)) / b;
        GridFunction hat = rep.solution;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!detail::on_domain(d, i)) continue;
            rec.upper_bound_gap = std::max(rec.upper_bound_gap, rep.solution[i] - f[i] - c1);
            rec.lower_bound_gap = std::max(rec.lower_bound_gap, target[i] - rep.solution[i] - c2);
        }
        const double add = shift_of(j);
        for (double& v : hat.values()) v += add;
        rec.seconds = detail::elapsed(t0);
        res.min_cone_margin = std::min(res.min_cone_margin, rec.cone_margin);
        res.records.push_back(rec);
        res.u_sequence.push_back(std::move(hat));
    };

    std::size_t j = 0;
    solve_index(j);
    while (auto next = detail::next_index(envelopes, j, res.u_sequence.back())) {
        j = *next;
        solve_index(j);
    }
    if (static_cast<int>(res.u_sequence.size()) < cfg.min_iterates)
        fail(ErrorKind::ScheduleExhausted, "local_regularize: only " + std::to_string(res.u_sequence.size()) +
                                               " admissible indices in the schedule; extend beta_schedule");
    detail::finish(res, target, cfg.clip_floor);
    return res;
}

/// Builds a local schedule from the target: f_j by upper_smooth_sequence,
/// c_j = max{sup F_m[i∂∂̄f_j], e} and the default β(j).
inline ApproximationSchedule default_local_schedule(const GridFunction& target, const MetricField& g, int m, int count,
                                                    double floor = kDefaultClipFloor) {
    ApproximationSchedule s;
    s.f_sequence = upper_smooth_sequence(target, count, floor);
    s.c_constants = local_constants(s.f_sequence, g, m);
    s.beta_schedule = default_local_betas(s.c_constants);
    s.f_sequence.resize(s.beta_schedule.size(), s.f_sequence.front());
    s.c_constants.resize(s.beta_schedule.size());
    s.radius = target.domain().radius();
    return s;
}

namespace detail {

struct GlobalData {
    std::vector<GridFunction> corridor;  // F_m^j
    std::vector<double> cj;              // sup log(2 F_m^j / F_m[χ])
    GridFunction fchi;
};

inline GlobalData global_data(const std::vector<GridFunction>& fs, const HermitianMatrix& chi, const MetricField& g,
                              int m) {
    const GridDomain& d = g.domain();
    GlobalData out{{}, {}, GridFunction(d, 0.0)};
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto lambdas = relative_eigenvalues_only(chi, g.at(i));
        if (!(smallest_m_sum(lambdas, m) > kConeTolerance))
            fail(ErrorKind::ChiNotPositive, "chi is not strictly m-positive at node " + std::to_string(i));
        out.fchi[i] = fm_value_from_spectrum(lambdas, m).value;
    }
    for (const auto& f : fs) {
        GridFunction fj = corridor_function(fm_plus_field(f, g, m, chi));
        double c = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.size(); ++i) c = std::max(c, std::log(2.0 * fj[i] / out.fchi[i]));
        out.corridor.push_back(std::move(fj));
        out.cj.push_back(c);
    }
    return out;
}

} // namespace detail

/// Builds a global schedule on the torus: f_j by upper_smooth_sequence, C_j
/// from the corridor functions and the default β(j).
inline ApproximationSchedule default_global_schedule(const GridFunction& phi, const HermitianMatrix& chi,
                                                     const MetricField& g, int m, int count,
                                                     double floor = kDefaultClipFloor) {
    ApproximationSchedule s;
    s.f_sequence = upper_smooth_sequence(phi, count, floor);
    const auto data = detail::global_data(s.f_sequence, chi, g, m);
    s.c_constants = data.cj;
    s.beta_schedule = default_global_betas(s.f_sequence, s.c_constants);
    s.f_sequence.resize(s.beta_schedule.size(), s.f_sequence.front());
    s.c_constants.resize(s.beta_schedule.size());
    return s;
}

/// Decreasing approximation of a χ-m-subharmonic function on the torus by the
/// solutions φ̃_j of F_m[χ + i∂∂̄u] = e^{β(u − f_j)} F_m^j + F_m[χ]/(2β),
/// shifted to φ_j = φ̃_j − (2/β)log(1/β).
inline RegularizationResult global_regularize(const GridFunction& phi, const HermitianMatrix& chi, const MetricField& g,
                                              int m, ApproximationSchedule schedule, const RegularizationConfig& cfg) {
    const GridDomain& d = phi.domain();
    require(d.is_torus(), "global_regularize: needs a torus grid");
    require(g.domain() == d, "global_regularize: metric field lives on a different grid");
    require(m >= 1 && m <= d.n(), "global_regularize: need 1 <= m <= n");
    require(chi.dim() == d.n(), "global_regularize: chi dimension mismatch");
    const GridFunction target = clip_target(phi, cfg.clip_floor);
    const auto data = detail::global_data(schedule.f_sequence, chi, g, m);  // raises ChiNotPositive
    const ConeField cf = cone_field(target, g, m, chi, 1e-6);
    if (!cf.all_members)
        fail(ErrorKind::TargetNotAdmissible, "global_regularize: chi + i ddbar phi leaves the cone (margin " +
                                                 std::to_string(cf.min_margin) + ")");
    if (schedule.c_constants.empty()) schedule.c_constants = data.cj;
    if (schedule.beta_schedule.empty()) {
        schedule.beta_schedule = default_global_betas(schedule.f_sequence, schedule.c_constants);
        schedule.f_sequence.resize(schedule.beta_schedule.size(), schedule.f_sequence.front());
        schedule.c_constants.resize(schedule.beta_schedule.size());
    }
    validate_schedule(schedule, target);

    SolverConfig scfg = cfg.solver;
    scfg.m = m;
    const std::size_t count = schedule.f_sequence.size();
    auto shift_of = [&](std::size_t j) { return -2.0 / schedule.beta_schedule[j] * std::log(1.0 / schedule.beta_schedule[j]); };
    std::vector<GridFunction> envelopes;
    for (std::size_t j = 0; j < count; ++j) {
        GridFunction e = schedule.f_sequence[j];
        for (double& v : e.values()) v += shift_of(j);
        envelopes.push_back(std::move(e));
    }
    detail::NewtonSystem probe(d, g, m, chi);

    RegularizationResult res;
    auto solve_index = [&](std::size_t j) {
        const auto t0 = std::chrono::steady_clock::now();
        const GridFunction& f = schedule.f_sequence[j];
        const GridFunction& fj = data.corridor[j];
        const double b = schedule.beta_schedule[j];
        GridFunction offset = data.fchi;
        for (double& v : offset.values()) v /= 2.0 * b;
        const auto rhs = exponential_rhs(fj, f, b, offset);
        // Seed: the nodewise root of F_m[χ] = G(z, t), used when it keeps χ + Hessian in the cone.
        GridFunction seed = f;
        for (std::size_t i = 0; i < d.size(); ++i)
            seed[i] += std::log((1.0 - 1.0 / (2.0 * b)) * data.fchi[i] / fj[i]) / b;
        std::optional<GridFunction> start;
        if (probe.min_margin(seed) > scfg.cone_floor) start = std::move(seed);
        SolveReport rep;
        try {
            rep = solve_torus(chi, rhs, g, scfg, start);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ChiNotPositive) throw;
            if (!start) throw;
            rep = solve_torus(chi, rhs, g, scfg);
        }
        IterateRecord rec;
        rec.index = static_cast<int>(j);
        rec.beta = b;
        rec.constant = schedule.c_constants[j];
        rec.newton_iterations = rep.iterations;
        rec.final_residual = rep.final_residual;
        rec.cone_margin = rep.min_cone_margin;
        for (double& s : rec.sandwich_gaps) s = -std::numeric_limits<double>::infinity();
        const double lb = -2.0 / b * std::log(1.0 / b);
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double scaled = (1.0 - 1.0 / b) * target[i];
            rec.sandwich_gaps[0] = std::max(rec.sandwich_gaps[0], target[i] - scaled);
            rec.sandwich_gaps[1] = std::max(rec.sandwich_gaps[1], scaled - (rep.solution[i] + lb));
            rec.sandwich_gaps[2] = std::max(rec.sandwich_gaps[2], rep.solution[i] - f[i]);
        }
        GridFunction out = rep.solution;
        for (double& v : out.values()) v += shift_of(j);
        rec.seconds = detail::elapsed(t0);
        res.min_cone_margin = std::min(res.min_cone_margin, rec.cone_margin);
        res.records.push_back(rec);
        res.u_sequence.push_back(std::move(out));
    };

    std::size_t j = 0;
    solve_index(j);
    while (auto next = detail::next_index(envelopes, j, res.u_sequence.back())) {
        j = *next;
        solve_index(j);
    }
    if (static_cast<int>(res.u_sequence.size()) < cfg.min_iterates)
        fail(ErrorKind::ScheduleExhausted, "global_regularize: only " + std::to_string(res.u_sequence.size()) +
                                               " admissible indices in the schedule; extend beta_schedule");
    detail::finish(res, target, cfg.clip_floor);
    return res;
}

} // namespace mpsh
