#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "mpsh/fm_operator.hpp"
#include "mpsh/grid.hpp"

namespace mpsh {

/// Right-hand side G(z, t) of F_m[·] = G(z, u) with its t-derivative.
/// Nodes are grid node ids; `t` is the unknown's value at that node.
class RightHandSide {
public:
    using Fn = std::function<double(std::size_t node, double t)>;

    RightHandSide() = default;
    RightHandSide(Fn value, Fn dt) : value_(std::move(value)), dt_(std::move(dt)) {}

    double value(std::size_t node, double t) const { return value_(node, t); }
    double dt(std::size_t node, double t) const { return dt_(node, t); }
    explicit operator bool() const { return static_cast<bool>(value_); }

private:
    Fn value_;
    Fn dt_;
};

/// Exponent above which e^x continues linearly (C¹, still increasing) so that
/// transient Newton states cannot overflow.
inline constexpr double kExponentCap = 40.0;

inline double capped_exp(double x) { return x <= kExponentCap ? std::exp(x) : std::exp(kExponentCap) * (1.0 + x - kExponentCap); }
inline double capped_exp_slope(double x) { return std::exp(std::min(x, kExponentCap)); }

/// G(z, t) = A(z)·exp(β(t − ref(z))) + B(z), evaluated in log space.
/// Covers the manufactured problems (β = 1, B = 0), the local penalty
/// e^{β(t − f_j)} + 1/(2β) and the torus right-hand side
/// e^{β(t − f_j)} F_m^j + F_m[χ]/(2β).
inline RightHandSide exponential_rhs(GridFunction amplitude, GridFunction reference, double beta,
                                     GridFunction offset) {
    require(beta > 0.0, "exponential_rhs: need beta > 0");
    struct Data {
        GridFunction a, ref, b;
        double beta;
    };
    auto data = std::make_shared<Data>(Data{std::move(amplitude), std::move(reference), std::move(offset), beta});
    auto value = [data](std::size_t node, double t) {
        const double a = data->a[node];
        if (a <= 0.0) return data->b[node];
        return capped_exp(data->beta * (t - data->ref[node]) + std::log(a)) + data->b[node];
    };
    auto dt = [data](std::size_t node, double t) {
        const double a = data->a[node];
        if (a <= 0.0) return 0.0;
        return data->beta * capped_exp_slope(data->beta * (t - data->ref[node]) + std::log(a));
    };
    return RightHandSide(value, dt);
}

inline RightHandSide exponential_rhs(GridFunction amplitude, GridFunction reference, double beta, double offset) {
    GridFunction b(amplitude.domain(), offset);
    return exponential_rhs(std::move(amplitude), std::move(reference), beta, std::move(b));
}

enum class InitMode { Continuity, Direct };

struct SolverConfig {
    int m = 1;
    double tolerance = 1e-9;          // max-norm residual of F_m − G over unknown nodes
    int max_iterations = 100;         // per Newton solve (per path step)
    int t_steps = 8;
    double cone_floor = 1e-10;        // minimal m-sum every accepted iterate keeps
    double damping_min_step = 1.0 / 1048576.0;  // 2^-20
    double linear_tolerance = 1e-10;  // relative residual of each linear solve
    int max_path_refinements = 8;     // bisections of a failing continuity step
    InitMode init = InitMode::Continuity;
};

struct SolveReport {
    GridFunction solution;
    int iterations = 0;
    double final_residual = 0.0;
    double min_cone_margin = 0.0;
    double max_principle_gap = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> residual_history;
    double path_constant = 0.0;  // C of the continuity seed C(|z|² − r²) + f
    int path_steps = 0;          // continuity steps actually taken (after refinement)
};

/// Sup over interior nodes of u − sup_{∂U} f; ≤ 0 certifies the discrete maximum principle.
inline double max_principle_check(const SolveReport& report, const GridFunction& f) {
    const GridDomain& d = report.solution.domain();
    require(!d.is_torus(), "max_principle_check: needs a ball solve");
    require(f.domain() == d, "max_principle_check: boundary data lives on a different grid");
    double sup_b = -std::numeric_limits<double>::infinity();
    for (std::size_t b : d.boundary_nodes()) sup_b = std::max(sup_b, f[b]);
    double gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i : d.interior_nodes()) gap = std::max(gap, report.solution[i] - sup_b);
    return gap;
}

namespace detail {

/// The discrete map u ↦ F_m[χ + i∂∂̄u] − G(z, u) on the unknown nodes, with
/// its Jacobian. Ball grids keep boundary values fixed; torus grids solve at
/// every node.
class NewtonSystem {
public:
    using Rhs = std::function<double(std::size_t, double)>;

    NewtonSystem(const GridDomain& d, const MetricField& g, int m, std::optional<HermitianMatrix> chi)
        : d_(d), g_(g), m_(m), chi_(std::move(chi)) {
        require(m >= 1 && m <= d.n(), "solver: need 1 <= m <= n");
        require(g.domain() == d, "solver: metric field lives on a different grid");
        const auto& unknowns = d.interior_nodes();
        column_.assign(d.size(), -1);
        for (std::size_t k = 0; k < unknowns.size(); ++k) column_[unknowns[k]] = static_cast<long>(k);
        // Complex Hessian response to a unit symmetric change in each real Hessian slot (a, b), a <= b.
        const int dim = d.real_dim();
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                RMatrix e = RMatrix::Zero(dim, dim);
                e(a, b) = 1.0;
                e(b, a) = 1.0;
                unit_.push_back(complex_hessian_point(e).matrix());
            }
    }

    std::size_t unknowns() const { return d_.interior_nodes().size(); }

    struct Eval {
        Eigen::VectorXd residual;
        double max_residual = 0.0;
        double min_margin = std::numeric_limits<double>::infinity();
        bool in_cone = true;
        std::vector<Eigen::Triplet<double>> triplets;
    };

    /// Evaluates at u. With `jacobian` the triplets are filled; evaluation stops
    /// early (in_cone = false) once a node's margin drops to `floor` or below.
    Eval evaluate(const GridFunction& u, const Rhs& g_value, const Rhs& g_dt, double floor, bool jacobian) const {
        const auto& nodes = d_.interior_nodes();
        Eval ev;
        ev.residual.resize(static_cast<Eigen::Index>(nodes.size()));
        if (jacobian) ev.triplets.reserve(nodes.size() * static_cast<std::size_t>(1 + 2 * d_.real_dim() * d_.real_dim()));
        const int dim = d_.real_dim();
        const double h2 = d_.spacing() * d_.spacing();
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const std::size_t node = nodes[k];
            HermitianMatrix form = fd_complex_hessian(u, node);
            if (chi_) form = *chi_ + form;
            const MetricMatrix& gm = g_.at(node);
            RelativeSpectrum spec;
            std::vector<double> lambdas;
            if (jacobian) {
                spec = relative_eigenvalues(form, gm);
                lambdas = spec.lambdas;
            } else {
                lambdas = relative_eigenvalues_only(form, gm);
            }
            const double margin = smallest_m_sum(lambdas, m_);
            ev.min_margin = std::min(ev.min_margin, margin);
            if (!(margin > floor)) {
                ev.in_cone = false;
                return ev;
            }
            const double t = u[node];
            const double gv = g_value(node, t);
            const double gd = g_dt(node, t);
            if (!std::isfinite(gv) || !(gv > 0.0) || !std::isfinite(gd) || gd < 0.0 || (!d_.is_torus() && !(gd > 0.0)))
                fail(ErrorKind::IllPosedRHS, "right-hand side violates G > 0, dG/dt > 0 at node " + std::to_string(node));
            const double fv = fm_value_from_spectrum(lambdas, m_).value;
            const double r = fv - gv;
            ev.residual(static_cast<Eigen::Index>(k)) = r;
            ev.max_residual = std::max(ev.max_residual, std::abs(r));
            if (!jacobian) continue;

            const CMatrix grad = fm_gradient_matrix(spec, m_);
            const auto row = static_cast<int>(k);
            double diag = -gd;
            std::size_t slot = 0;
            for (int a = 0; a < dim; ++a) {
                const std::size_t ap = *d_.shift(node, a, 1);
                const std::size_t am = *d_.shift(node, a, -1);
                for (int b = a; b < dim; ++b, ++slot) {
                    const double w = (grad.cwiseProduct(unit_[slot])).sum().real();
                    if (w == 0.0) continue;
                    if (a == b) {
                        const double c = w / h2;
                        add(ev, row, ap, c);
                        add(ev, row, am, c);
                        diag -= 2.0 * c;
                    } else {
                        const double c = w / (4.0 * h2);
                        add(ev, row, *d_.shift(ap, b, 1), c);
                        add(ev, row, *d_.shift(ap, b, -1), -c);
                        add(ev, row, *d_.shift(am, b, 1), -c);
                        add(ev, row, *d_.shift(am, b, -1), c);
                    }
                }
            }
            ev.triplets.emplace_back(row, row, diag);
        }
        return ev;
    }

    /// Minimal m-sum over unknown nodes, or −inf-like values when outside.
    double min_margin(const GridFunction& u) const {
        double mm = std::numeric_limits<double>::infinity();
        for (std::size_t node : d_.interior_nodes()) {
            HermitianMatrix form = fd_complex_hessian(u, node);
            if (chi_) form = *chi_ + form;
            mm = std::min(mm, smallest_m_sum(relative_eigenvalues_only(form, g_.at(node)), m_));
        }
        return mm;
    }

    const std::vector<std::size_t>& nodes() const { return d_.interior_nodes(); }

private:
    void add(Eval& ev, int row, std::size_t node, double c) const {
        const long col = column_[node];
        if (col >= 0) ev.triplets.emplace_back(row, static_cast<int>(col), c);
    }

    const GridDomain& d_;
    const MetricField& g_;
    int m_;
    std::optional<HermitianMatrix> chi_;
    std::vector<long> column_;
    std::vector<CMatrix> unit_;
};

/// Solves J x = b to relative residual `tol`: Jacobi-preconditioned BiCGSTAB,
/// then ILUT-preconditioned BiCGSTAB, then sparse LU.
inline Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& jac, const Eigen::VectorXd& b, double tol) {
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Eigen::VectorXd::Zero(b.size());
    auto good = [&](const Eigen::VectorXd& x) { return x.allFinite() && (jac * x - b).norm() <= tol * bnorm; };
    {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
        it.setTolerance(0.01 * tol);
        it.setMaxIterations(std::max<Eigen::Index>(1000, 4 * b.size()));
        it.compute(jac);
        Eigen::VectorXd x = it.solve(b);
        if (good(x)) return x;
    }
    {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
        it.setTolerance(0.01 * tol);
        it.compute(jac);
        if (it.info() == Eigen::Success) {
            Eigen::VectorXd x = it.solve(b);
            if (good(x)) return x;
        }
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) fail(ErrorKind::NewtonDiverged, "singular Newton Jacobian");
    Eigen::VectorXd x = lu.solve(b);
    x += lu.solve(Eigen::VectorXd(b - jac * x));  // one refinement step
    const double rel = (jac * x - b).norm() / bnorm;
    if (!(rel <= tol)) fail(ErrorKind::NewtonDiverged, "linear solve residual " + std::to_string(rel) + " above tolerance");
    return x;
}

struct NewtonOutcome {
    int iterations = 0;
    double residual = 0.0;
    double min_margin = 0.0;
};

/// Damped Newton: each step is halved until the trial iterate keeps every
/// node's minimal m-sum above the floor and lowers the max residual.
inline NewtonOutcome newton(const NewtonSystem& sys, GridFunction& u, const NewtonSystem::Rhs& gv,
                            const NewtonSystem::Rhs& gd, const SolverConfig& cfg, std::vector<double>& history) {
    using SpMat = Eigen::SparseMatrix<double>;
    const auto& nodes = sys.nodes();
    const auto n_unknown = static_cast<Eigen::Index>(nodes.size());

    auto ev = sys.evaluate(u, gv, gd, cfg.cone_floor, true);
    if (!ev.in_cone)
        fail(ErrorKind::ConeEscape, "Newton seed is not strictly inside the cone (margin " + std::to_string(ev.min_margin) + ")");
    NewtonOutcome out;
    for (int it = 0;; ++it) {
        history.push_back(ev.max_residual);
        out.residual = ev.max_residual;
        out.min_margin = ev.min_margin;
        out.iterations = it;
        if (ev.max_residual <= cfg.tolerance) return out;
        if (it >= cfg.max_iterations)
            fail(ErrorKind::NewtonDiverged, "residual " + std::to_string(ev.max_residual) + " after " +
                                                std::to_string(cfg.max_iterations) + " iterations");
        SpMat jac(n_unknown, n_unknown);
        jac.setFromTriplets(ev.triplets.begin(), ev.triplets.end());
        jac.makeCompressed();
        const Eigen::VectorXd rhs = -ev.residual;
        const Eigen::VectorXd step = solve_linear(jac, rhs, cfg.linear_tolerance);
        bool any_in_cone = false;
        bool accepted = false;
        for (double s = 1.0; s >= cfg.damping_min_step; s *= 0.5) {
            GridFunction trial = u;
            for (Eigen::Index k = 0; k < n_unknown; ++k) trial[nodes[static_cast<std::size_t>(k)]] += s * step(k);
            auto tev = sys.evaluate(trial, gv, gd, cfg.cone_floor, false);
            if (!tev.in_cone) continue;
            any_in_cone = true;
            if (tev.max_residual <= (1.0 - 1e-4 * s) * ev.max_residual || tev.max_residual <= cfg.tolerance) {
                u = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!any_in_cone)
                fail(ErrorKind::ConeEscape, "no damped step keeps the iterate inside the cone");
            fail(ErrorKind::NewtonDiverged, "line search stalled at residual " + std::to_string(ev.max_residual));
        }
        ev = sys.evaluate(u, gv, gd, cfg.cone_floor, true);
    }
}

} // namespace detail

/// Direct damped Newton for the Dirichlet problem from a given seed. Boundary
/// values of the seed are overwritten by f.
inline SolveReport solve_dirichlet_direct(const GridFunction& f, const RightHandSide& rhs, const MetricField& g,
                                          const SolverConfig& cfg, GridFunction seed) {
    const GridDomain& d = f.domain();
    require(!d.is_torus(), "solve_dirichlet: needs a ball grid");
    require(seed.domain() == d, "solve_dirichlet: seed lives on a different grid");
    require(f.finite_on_domain(), "solve_dirichlet: boundary data must be finite");
    require(static_cast<bool>(rhs), "solve_dirichlet: missing right-hand side");
    for (std::size_t b : d.boundary_nodes()) seed[b] = f[b];
    detail::NewtonSystem sys(d, g, cfg.m, std::nullopt);
    SolveReport rep;
    auto gv = [&](std::size_t node, double t) { return rhs.value(node, t); };
    auto gd = [&](std::size_t node, double t) { return rhs.dt(node, t); };
    const auto out = detail::newton(sys, seed, gv, gd, cfg, rep.residual_history);
    rep.solution = std::move(seed);
    rep.iterations = out.iterations;
    rep.final_residual = out.residual;
    rep.min_cone_margin = out.min_margin;
    rep.max_principle_gap = max_principle_check(rep, f);
    return rep;
}

/// Smallest C = 2^k ≥ 1 such that C(|z|² − r²) + f is strictly m-subharmonic
/// at every interior node (minimal m-sum above the floor).
inline double subsolution_constant(const GridFunction& f, const MetricField& g, const SolverConfig& cfg) {
    const GridDomain& d = f.domain();
    detail::NewtonSystem sys(d, g, cfg.m, std::nullopt);
    const double r2 = d.radius() * d.radius();
    for (double c = 1.0; c <= 1e12; c *= 2.0) {
        GridFunction u0 = f;
        for (std::size_t i = 0; i < d.size(); ++i) u0[i] += c * (d.norm2(i) - r2);
        if (sys.min_margin(u0) > cfg.cone_floor) return c;
    }
    fail(ErrorKind::IllPosedRHS, "no constant C makes C(|z|^2 - r^2) + f strictly m-subharmonic");
}

/// Continuity path F_m[u_t] = t G(z, u_t) + (1 − t) F_m[u_0] from
/// u_0 = C(|z|² − r²) + f. On the grid the boundary nodes carry
/// u_t = f + (1 − t) C(|z|² − r²), which equals f on the sphere itself and
/// makes u_0 the exact discrete solution at t = 0.
inline SolveReport continuity_path(const GridFunction& f, const RightHandSide& rhs, const MetricField& g,
                                   const SolverConfig& cfg, int t_steps) {
    const GridDomain& d = f.domain();
    require(!d.is_torus(), "continuity_path: needs a ball grid");
    require(t_steps >= 1, "continuity_path: need t_steps >= 1");
    require(f.finite_on_domain(), "continuity_path: boundary data must be finite");
    require(static_cast<bool>(rhs), "continuity_path: missing right-hand side");
    const double r2 = d.radius() * d.radius();
    const double c = subsolution_constant(f, g, cfg);
    std::vector<double> psi(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) psi[i] = c * (d.norm2(i) - r2);

    GridFunction u = f;
    for (std::size_t i = 0; i < d.size(); ++i) u[i] += psi[i];
    const FmField f0 = fm_field(u, g, cfg.m);

    detail::NewtonSystem sys(d, g, cfg.m, std::nullopt);
    SolveReport rep;
    rep.path_constant = c;

    // Moves the iterate from t_from to t_to; returns false when Newton fails.
    auto advance = [&](double t_from, double t_to, GridFunction& v) -> bool {
        auto gv = [&](std::size_t node, double t) { return t_to * rhs.value(node, t) + (1.0 - t_to) * f0.value[node]; };
        auto gd = [&](std::size_t node, double t) { return t_to * rhs.dt(node, t); };
        // Warm starts: shift by the same quadratic the boundary moves by, or keep the interior.
        for (int variant = 0; variant < 2; ++variant) {
            GridFunction trial = v;
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (variant == 0 || d.tag(i) == NodeTag::Boundary) trial[i] -= (t_to - t_from) * psi[i];
            }
            if (!(sys.min_margin(trial) > cfg.cone_floor)) continue;
            try {
                const auto out = detail::newton(sys, trial, gv, gd, cfg, rep.residual_history);
                rep.iterations += out.iterations;
                rep.final_residual = out.residual;
                rep.min_cone_margin = out.min_margin;
                v = std::move(trial);
                return true;
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::IllPosedRHS) throw;
            }
        }
        return false;
    };

    std::function<void(double, double, int)> step = [&](double t_from, double t_to, int depth) {
        if (advance(t_from, t_to, u)) {
            ++rep.path_steps;
            return;
        }
        if (depth >= cfg.max_path_refinements)
            fail(ErrorKind::NewtonDiverged, "continuity path stalled at t = " + std::to_string(t_to));
        const double mid = 0.5 * (t_from + t_to);
        step(t_from, mid, depth + 1);
        step(mid, t_to, depth + 1);
    };

    if (t_steps >= 1) {
        for (int k = 1; k <= t_steps; ++k)
            step(static_cast<double>(k - 1) / t_steps, static_cast<double>(k) / t_steps, 0);
    }
    for (std::size_t b : d.boundary_nodes()) u[b] = f[b];
    rep.solution = std::move(u);
    rep.max_principle_gap = max_principle_check(rep, f);
    return rep;
}

/// Default seed for direct Newton: f + C(|z|² − R²) with R the outermost
/// boundary-node radius, so resetting the boundary to f only raises values.
/// C is the first of 1, 2, 1/2, 4, 1/4, ... that keeps the seed strictly in the cone.
inline GridFunction direct_seed(const GridFunction& f, const MetricField& g, const SolverConfig& cfg) {
    const GridDomain& d = f.domain();
    double r2 = d.radius() * d.radius();
    for (std::size_t b : d.boundary_nodes()) r2 = std::max(r2, d.norm2(b));
    detail::NewtonSystem sys(d, g, cfg.m, std::nullopt);
    for (int k = 0; k <= 40; ++k) {
        const double c = std::ldexp(1.0, k % 2 ? (k + 1) / 2 : -k / 2);
        GridFunction s = f;
        for (std::size_t i : d.interior_nodes()) s[i] += c * (d.norm2(i) - r2);
        if (sys.min_margin(s) > cfg.cone_floor) return s;
    }
    fail(ErrorKind::ConeEscape, "no bowl C(|z|^2 - R^2) + f is strictly inside the cone");
}

/// Dirichlet problem F_m[i∂∂̄u] = G(z, u) in the ball, u = f on the boundary
/// nodes. Default initialization runs the continuity path; InitMode::Direct
/// runs Newton from `seed` (or from direct_seed).
inline SolveReport solve_dirichlet(const GridFunction& f, const RightHandSide& rhs, const MetricField& g,
                                   const SolverConfig& cfg, std::optional<GridFunction> seed = std::nullopt) {
    if (cfg.init == InitMode::Continuity && !seed) return continuity_path(f, rhs, g, cfg, cfg.t_steps);
    if (!seed) seed = direct_seed(f, g, cfg);
    return solve_dirichlet_direct(f, rhs, g, cfg, std::move(*seed));
}

/// Periodic problem F_m[χ + i∂∂̄u] = G(z, u) on a torus grid with constant χ.
/// Without a seed, Newton starts from the largest constant c with
/// G(z, c) ≤ F_m[χ] everywhere (found by bisection), a subsolution with zero Hessian.
inline SolveReport solve_torus(const HermitianMatrix& chi, const RightHandSide& rhs, const MetricField& g,
                               const SolverConfig& cfg, std::optional<GridFunction> seed = std::nullopt) {
    const GridDomain& d = g.domain();
    require(d.is_torus(), "solve_torus: needs a torus grid");
    require(chi.dim() == d.n(), "solve_torus: chi dimension mismatch");
    require(static_cast<bool>(rhs), "solve_torus: missing right-hand side");
    require(cfg.m >= 1 && cfg.m <= d.n(), "solve_torus: need 1 <= m <= n");
    std::vector<double> fchi(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto lambdas = relative_eigenvalues_only(chi, g.at(i));
        if (!(smallest_m_sum(lambdas, cfg.m) > cfg.cone_floor))
            fail(ErrorKind::ChiNotPositive, "chi is not strictly m-positive at node " + std::to_string(i));
        fchi[i] = fm_value_from_spectrum(lambdas, cfg.m).value;
    }
    if (!seed) {
        auto sub = [&](double c) {
            for (std::size_t i = 0; i < d.size(); ++i)
                if (rhs.value(i, c) > fchi[i]) return false;
            return true;
        };
        double lo = -1.0;
        while (!sub(lo) && lo > -1e6) lo *= 2.0;
        if (sub(lo)) {
            // Largest constant subsolution, where ∂G/∂t is not negligible.
            double hi = lo + 1.0;
            while (sub(hi) && hi < 1e6) {
                lo = hi;
                hi += 2.0 * (hi - lo + 1.0);
            }
            for (int k = 0; k < 60; ++k) {
                const double mid = 0.5 * (lo + hi);
                (sub(mid) ? lo : hi) = mid;
            }
        }
        seed = GridFunction(d, lo);
    }
    require(seed->domain() == d, "solve_torus: seed lives on a different grid");
    detail::NewtonSystem sys(d, g, cfg.m, chi);
    SolveReport rep;
    auto gv = [&](std::size_t node, double t) { return rhs.value(node, t); };
    auto gd = [&](std::size_t node, double t) { return rhs.dt(node, t); };
    GridFunction u = std::move(*seed);
    const auto out = detail::newton(sys, u, gv, gd, cfg, rep.residual_history);
    rep.solution = std::move(u);
    rep.iterations = out.iterations;
    rep.final_residual = out.residual;
    rep.min_cone_margin = out.min_margin;
    return rep;
}

} // namespace mpsh
