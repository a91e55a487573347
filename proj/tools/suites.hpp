#pragma once

// Seeded property suites behind `verify-suite`.

#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mpsh/mpsh.hpp"

namespace mpsh::cli {

struct SuiteRow {
    std::string name;
    std::string module;
    std::string operation;
    long trials = 0;
    long violations = 0;
    double worst = 0.0;  // largest observed error or gap
    double seconds = 0.0;
};

class SuiteRunner {
public:
    SuiteRunner(std::uint64_t seed, int scale) : rng_(seed), scale_(scale) {}

    std::vector<SuiteRow> run_all() {
        std::vector<SuiteRow> rows;
        rows.push_back(timed("cone_oracle", "positivity-cones", "strong_positivity_oracle", [&](SuiteRow& r) { cone_oracle(r); }));
        rows.push_back(timed("cone_monotone_m", "positivity-cones", "is_m_semipositive", [&](SuiteRow& r) { monotone_m(r); }));
        rows.push_back(timed("cone_convexity", "positivity-cones", "is_m_semipositive", [&](SuiteRow& r) { convexity(r); }));
        rows.push_back(timed("curvature_bounds", "curvature-operator", "verify_bound_regime", [&](SuiteRow& r) { curvature(r); }));
        rows.push_back(timed("fm_gradient", "fm-operator", "fm_gradient_diagonal", [&](SuiteRow& r) { gradient(r); }));
        rows.push_back(timed("fm_determinant", "fm-operator", "fm_via_determinant", [&](SuiteRow& r) { determinant(r); }));
        rows.push_back(timed("fm_product_bound", "fm-operator", "fm_product_bound", [&](SuiteRow& r) { product_bound(r); }));
        rows.push_back(timed("fm_concavity", "fm-operator", "concavity_probe", [&](SuiteRow& r) { concavity(r); }));
        rows.push_back(timed("l2_constants", "curvature-operator", "l2_constant", [&](SuiteRow& r) { l2(r); }));
        rows.push_back(timed("solver_quadratic", "elliptic-solver", "solve_dirichlet", [&](SuiteRow& r) { solver(r); }));
        return rows;
    }

private:
    std::mt19937_64 rng_;
    int scale_;

    template <class Fn>
    SuiteRow timed(const char* name, const char* module, const char* op, Fn&& fn) {
        SuiteRow r{name, module, op};
        const auto t0 = std::chrono::steady_clock::now();
        fn(r);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    int pick(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }

    HermitianMatrix random_hermitian(int n) {
        CMatrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = cplx(uniform(-1, 1), uniform(-1, 1));
        return HermitianMatrix(CMatrix(0.5 * (a + a.adjoint())));
    }

    MetricMatrix random_metric(int n) {
        CMatrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = cplx(uniform(-1, 1), uniform(-1, 1));
        return MetricMatrix(HermitianMatrix(CMatrix(a * a.adjoint() + 0.2 * CMatrix::Identity(n, n))));
    }

    std::vector<double> interior_spectrum(int n, int m) {
        for (;;) {
            std::vector<double> l(n);
            for (double& v : l) v = uniform(-1, 3);
            std::sort(l.begin(), l.end());
            if (smallest_m_sum(l, m) > 0.05) return l;
        }
    }

    void cone_oracle(SuiteRow& r) {
        for (int k = 0; k < 1000 * scale_; ++k) {
            const int n = pick(1, 4), m = pick(1, n);
            const auto t = random_hermitian(n);
            const auto w = random_metric(n);
            ++r.trials;
            const auto a = is_m_semipositive(t, w, m), b = strong_positivity_oracle(t, w, m);
            if (a.member != b.member) ++r.violations;
            r.worst = std::max(r.worst, std::abs(a.margin - b.margin));
        }
    }

    void monotone_m(SuiteRow& r) {
        for (int k = 0; k < 1000 * scale_; ++k) {
            const int n = pick(2, 4);
            const auto t = random_hermitian(n);
            const auto w = random_metric(n);
            for (int m = 1; m < n; ++m) {
                ++r.trials;
                if (is_m_semipositive(t, w, m).member && !is_m_semipositive(t, w, m + 1).member) ++r.violations;
            }
        }
    }

    void convexity(SuiteRow& r) {
        for (int k = 0; k < 500 * scale_; ++k) {
            const int n = pick(1, 4), m = pick(1, n);
            const auto w = random_metric(n);
            // Shift by a multiple of ω into the cone when needed.
            auto member = [&]() {
                auto t = random_hermitian(n);
                const double s = is_m_semipositive(t, w, m).margin;
                return s >= 0.0 ? t : t + (-s / m + 0.01) * w.base();
            };
            const auto a = member(), b = member();
            for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                ++r.trials;
                const HermitianMatrix mix(CMatrix(t * a.matrix() + (1 - t) * b.matrix()));
                const auto v = is_m_semipositive(mix, w, m);
                if (!v.member) ++r.violations;
            }
        }
    }

    void curvature(SuiteRow& r) {
        for (BoundCase c : {BoundCase::p0, BoundCase::zero_q, BoundCase::nq, BoundCase::pn}) {
            for (int k = 0; k < 500 * scale_; ++k) {
                const int n = pick(1, 4);
                const bool negative = c == BoundCase::p0 || c == BoundCase::zero_q;
                const int l = negative ? pick(0, n - 1) : pick(1, n);
                const double cc = uniform(0.1, 2.0);
                std::vector<double> lam(n);
                for (double& v : lam) v = negative ? -cc - uniform(0, 2) : cc + uniform(0, 2);
                ++r.trials;
                if (!verify_bound_regime(c, lam, cc, l)) ++r.violations;
            }
        }
    }

    void gradient(SuiteRow& r) {
        const double h = 1e-5;
        for (int k = 0; k < 200 * scale_; ++k) {
            const int n = pick(1, 5), m = pick(1, n);
            const auto l = interior_spectrum(n, m);
            const auto g = fm_gradient_diagonal(l, m);
            for (int p = 0; p < n; ++p) {
                auto up = l, dn = l;
                up[p] += h;
                dn[p] -= h;
                const double fd = (fm_value_from_spectrum(up, m).value - fm_value_from_spectrum(dn, m).value) / (2 * h);
                const double rel = std::abs(fd - g[p]) / std::max(1e-12, std::abs(g[p]));
                ++r.trials;
                r.worst = std::max(r.worst, rel);
                if (rel > 1e-6) ++r.violations;
            }
        }
    }

    void determinant(SuiteRow& r) {
        for (int k = 0; k < 500 * scale_; ++k) {
            const int n = pick(1, 4), m = pick(1, n);
            const auto w = random_metric(n);
            auto t = random_hermitian(n);
            const double s = is_m_semipositive(t, w, m).margin;
            if (s <= 0.05) t = t + (-s / m + 0.1) * w.base();
            const double a = fm_value(t, w, m).value, b = fm_via_determinant(t, w, m);
            const double rel = std::abs(a - b) / std::abs(a);
            ++r.trials;
            r.worst = std::max(r.worst, rel);
            if (rel > 1e-9) ++r.violations;
        }
    }

    void product_bound(SuiteRow& r) {
        for (int n = 1; n <= 4; ++n)
            for (int m = 1; m <= n; ++m) {
                const double nu = fm_product_bound(n, m);
                for (int k = 0; k < 2000 * scale_; ++k) {
                    const auto g = fm_gradient_diagonal(interior_spectrum(n, m), m);
                    double prod = 1.0;
                    for (double v : g) prod *= v;
                    ++r.trials;
                    r.worst = std::max(r.worst, nu - prod);
                    if (prod < nu - 1e-12) ++r.violations;
                }
            }
    }

    void concavity(SuiteRow& r) {
        for (int k = 0; k < 500 * scale_; ++k) {
            const int n = pick(1, 4), m = pick(1, n);
            const auto w = random_metric(n);
            auto inside = [&]() {
                auto t = random_hermitian(n);
                const double s = is_m_semipositive(t, w, m).margin;
                return s > 0.05 ? t : t + (-s / m + 0.1) * w.base();
            };
            ++r.trials;
            if (!concavity_probe(inside(), inside(), w, m, 11)) ++r.violations;
        }
    }

    void l2(SuiteRow& r) {
        for (int n = 1; n <= 4; ++n)
            for (int l = 0; l <= n; ++l) {
                const double c = 0.5 * (n + l + 1);
                if (l < n) {
                    ++r.trials;
                    if (l2_constant(BoundCase::zero_q, c, n, l) != 1.0 / (c * (n - l))) ++r.violations;
                }
                if (l >= 1) {
                    r.trials += 2;
                    if (l2_constant(BoundCase::nq, c, n, l) != 1.0 / (c * l)) ++r.violations;
                    if (l2_constant(BoundCase::pn, c, n, l) != 1.0 / (c * l)) ++r.violations;
                }
            }
    }

    void solver(SuiteRow& r) {
        for (int m : {1}) {
            const auto d = GridDomain::ball(1, 17, 1.0);
            const auto g = MetricField::flat(d);
            GridFunction exact(d), amp(d, static_cast<double>(m));
            for (std::size_t i = 0; i < d.size(); ++i) exact[i] = d.norm2(i);
            SolverConfig cfg;
            cfg.m = m;
            const auto rep = solve_dirichlet(exact, exponential_rhs(amp, exact, 1.0, 0.0), g, cfg);
            double err = 0.0;
            for (std::size_t i : d.interior_nodes()) err = std::max(err, std::abs(rep.solution[i] - exact[i]));
            ++r.trials;
            r.worst = std::max(r.worst, err);
            if (err > 1e-10 || rep.max_principle_gap > 1e-8) ++r.violations;
        }
    }
};

} // namespace mpsh::cli
