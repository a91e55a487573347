#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "mpsh/combinatorics.hpp"
#include "mpsh/cones.hpp"
#include "mpsh/hermitian.hpp"

namespace mpsh {

/// F_m evaluated at a point: the C(n,m)-th root of the product of the m-fold
/// eigenvalue sums σ_J, which are kept in lexicographic order of J.
struct FmValue {
    double value = 0.0;
    std::vector<double> msums;
};

/// F_m from a spectrum in the closed cone. Sums within `tolerance` below zero
/// are clamped to zero; anything further out is an error.
inline FmValue fm_value_from_spectrum(const std::vector<double>& lambdas, int m, double tolerance = kConeTolerance) {
    const int n = static_cast<int>(lambdas.size());
    require(m >= 1 && m <= n, "fm_value: need 1 <= m <= n");
    FmValue out;
    out.msums = wedge_coefficients(lambdas, m);
    double log_sum = 0.0;
    bool zero = false;
    for (double& s : out.msums) {
        if (s < -tolerance)
            fail(ErrorKind::OutsideCone, "fm_value: m-sum " + std::to_string(s) + " outside the closed cone");
        if (s <= 0.0) {
            s = 0.0;
            zero = true;
            continue;
        }
        log_sum += std::log(s);
    }
    out.value = zero ? 0.0 : std::exp(log_sum / static_cast<double>(out.msums.size()));
    return out;
}

inline FmValue fm_value(const HermitianMatrix& t, const MetricMatrix& omega, int m,
                        double tolerance = kConeTolerance) {
    require(m >= 1 && m <= t.dim(), "fm_value: need 1 <= m <= n");
    return fm_value_from_spectrum(relative_eigenvalues_only(t, omega), m, tolerance);
}

/// Diagonal first derivatives F^{p p̄} = (1/C(n,m)) F_m Σ_{J∋p} 1/σ_J at a
/// diagonal matrix with the given eigenvalues. Off-diagonal derivatives vanish
/// there. Requires every σ_J > tolerance.
inline std::vector<double> fm_gradient_diagonal(const std::vector<double>& lambdas, int m,
                                                double tolerance = kConeTolerance) {
    const int n = static_cast<int>(lambdas.size());
    require(m >= 1 && m <= n, "fm_gradient_diagonal: need 1 <= m <= n");
    const auto index = subsets(n, m);
    std::vector<double> inv(index.size());
    double log_sum = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k) {
        double s = 0.0;
        for (int j : index[k]) s += lambdas[j];
        if (!(s > tolerance))
            fail(ErrorKind::OutsideCone, "fm_gradient_diagonal: spectrum on or beyond the cone boundary");
        inv[k] = 1.0 / s;
        log_sum += std::log(s);
    }
    const double count = static_cast<double>(index.size());
    const double f = std::exp(log_sum / count);
    std::vector<double> grad(n, 0.0);
    for (std::size_t k = 0; k < index.size(); ++k)
        for (int p : index[k]) grad[p] += inv[k];
    for (double& g : grad) g *= f / count;
    return grad;
}

/// Universal lower bound ν = (m/n)^n for Π_p F^{p p̄}. AM-GM on each group
/// {1/σ_J : J ∋ p} of size C(n−1,m−1) together with Π_J σ_J = F_m^{C(n,m)}
/// gives Π_p F^{p p̄} ≥ (C(n−1,m−1)/C(n,m))^n = (m/n)^n.
inline double fm_product_bound(int n, int m) {
    require(m >= 1 && m <= n, "fm_product_bound: need 1 <= m <= n");
    return std::pow(static_cast<double>(m) / static_cast<double>(n), n);
}

/// Matrix of the derivation D_A on Λ^m C^n in the lexicographic basis
/// e_{i_1} ∧ ... ∧ e_{i_m}. Works for any square A.
inline CMatrix derivation_matrix(const CMatrix& a, int m) {
    const int n = static_cast<int>(a.rows());
    require(a.rows() == a.cols(), "derivation_matrix: need a square matrix");
    require(m >= 1 && m <= n, "derivation_matrix: need 1 <= m <= n");
    const auto basis = subsets(n, m);
    const auto dim = static_cast<Eigen::Index>(basis.size());
    CMatrix d = CMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const MultiIndex& J = basis[static_cast<std::size_t>(col)];
        for (int pos = 0; pos < m; ++pos) {
            const int j = J[pos];
            // Replace e_j at slot `pos` by A e_j = Σ_i A(i,j) e_i.
            for (int i = 0; i < n; ++i) {
                const cplx aij = a(i, j);
                if (aij == cplx(0.0)) continue;
                if (i != j && std::binary_search(J.begin(), J.end(), i)) continue;  // repeated factor
                MultiIndex I = J;
                I[pos] = i;
                // Bubble i to its sorted slot; each adjacent swap flips the sign.
                int q = pos;
                while (q > 0 && I[q - 1] > I[q]) {
                    std::swap(I[q - 1], I[q]);
                    --q;
                }
                while (q + 1 < m && I[q + 1] < I[q]) {
                    std::swap(I[q + 1], I[q]);
                    ++q;
                }
                const double sign = ((q - pos) % 2 == 0) ? 1.0 : -1.0;
                d(static_cast<Eigen::Index>(subset_rank(I, n)), col) += sign * aij;
            }
        }
    }
    return d;
}

inline CMatrix derivation_matrix(const HermitianMatrix& a, int m) { return derivation_matrix(a.matrix(), m); }

/// F_m through the determinant of the derivation: det(D_{g⁻¹U})^{1/C(n,m)}.
inline double fm_via_determinant(const HermitianMatrix& u_hessian, const MetricMatrix& g, int m) {
    require(u_hessian.dim() == g.dim(), "fm_via_determinant: dimension mismatch");
    require(m >= 1 && m <= u_hessian.dim(), "fm_via_determinant: need 1 <= m <= n");
    const CMatrix a = g.llt().solve(u_hessian.matrix());
    const CMatrix d = derivation_matrix(a, m);
    const cplx det = Eigen::PartialPivLU<CMatrix>(d).determinant();
    if (!(det.real() > 0.0))
        fail(ErrorKind::OutsideCone, "fm_via_determinant: non-positive determinant, spectrum outside the cone");
    return std::pow(det.real(), 1.0 / static_cast<double>(d.rows()));
}

/// F_m where T ≥_{m,ω} 0, zero elsewhere. Continuous across the boundary.
inline double fm_plus(const HermitianMatrix& t, const MetricMatrix& omega, int m) {
    require(t.dim() == omega.dim(), "fm_plus: dimension mismatch");
    require(m >= 1 && m <= t.dim(), "fm_plus: need 1 <= m <= n");
    const auto lambdas = relative_eigenvalues_only(t, omega);
    if (smallest_m_sum(lambdas, m) < 0.0) return 0.0;
    return fm_value_from_spectrum(lambdas, m).value;
}

/// A ∈ P_m^n(B): A in the cone and F_m[A] ≥ F_m[B] − tolerance. B must be in the cone.
inline bool cone_PmnB_membership(const HermitianMatrix& a, const HermitianMatrix& b, const MetricMatrix& g, int m,
                                 double tolerance = kConeTolerance) {
    require(a.dim() == g.dim() && b.dim() == g.dim(), "cone_PmnB_membership: dimension mismatch");
    require(m >= 1 && m <= g.dim(), "cone_PmnB_membership: need 1 <= m <= n");
    const auto lb = relative_eigenvalues_only(b, g);
    if (smallest_m_sum(lb, m) < -tolerance) fail(ErrorKind::OutsideCone, "cone_PmnB_membership: B not in the cone");
    const auto la = relative_eigenvalues_only(a, g);
    if (smallest_m_sum(la, m) < -tolerance) return false;
    return fm_value_from_spectrum(la, m, tolerance).value >= fm_value_from_spectrum(lb, m, tolerance).value - tolerance;
}

/// Checks F_m[tA + (1−t)B] ≥ t F_m[A] + (1−t) F_m[B] − 1e-10 on `steps` uniform t in [0,1].
inline bool concavity_probe(const HermitianMatrix& a, const HermitianMatrix& b, const MetricMatrix& g, int m,
                            int steps) {
    require(steps >= 1, "concavity_probe: need steps >= 1");
    require(a.dim() == g.dim() && b.dim() == g.dim(), "concavity_probe: dimension mismatch");
    const auto la = relative_eigenvalues_only(a, g);
    const auto lb = relative_eigenvalues_only(b, g);
    require(m >= 1 && m <= g.dim(), "concavity_probe: need 1 <= m <= n");
    if (smallest_m_sum(la, m) <= kConeTolerance || smallest_m_sum(lb, m) <= kConeTolerance)
        fail(ErrorKind::OutsideCone, "concavity_probe: inputs must lie in the open cone");
    const double fa = fm_value_from_spectrum(la, m).value;
    const double fb = fm_value_from_spectrum(lb, m).value;
    for (int k = 0; k < steps; ++k) {
        const double t = steps == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(steps - 1);
        const HermitianMatrix mix(CMatrix(t * a.matrix() + (1.0 - t) * b.matrix()));
        const double fmix = fm_value(mix, g, m).value;
        if (fmix < t * fa + (1.0 - t) * fb - 1e-10) return false;
    }
    return true;
}

/// dF_m/dT_{a b̄} at a general point, from the relative eigenbasis:
/// dF = Re Σ_{ab} M_{ab} dT_{ab} with M = conj(B) diag(F^{pp̄}) Bᵀ.
inline CMatrix fm_gradient_matrix(const RelativeSpectrum& spec, int m) {
    const auto grad = fm_gradient_diagonal(spec.lambdas, m);
    const auto n = static_cast<Eigen::Index>(grad.size());
    RVector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = grad[static_cast<std::size_t>(i)];
    return spec.basis.conjugate() * d.asDiagonal() * spec.basis.transpose();
}

} // namespace mpsh
