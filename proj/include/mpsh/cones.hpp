#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "mpsh/combinatorics.hpp"
#include "mpsh/hermitian.hpp"

namespace mpsh {

/// Absolute slack on eigenvalue sums used by every membership test.
inline constexpr double kConeTolerance = 1e-9;

/// Outcome of an m-positivity test. `margin` is the minimal m-fold eigenvalue
/// sum and `witness` a multi-index (zero-based) attaining it.
struct ConeVerdict {
    bool member = false;
    double margin = 0.0;
    MultiIndex witness;
};

/// Sum of the m smallest entries of an ascending spectrum.
inline double smallest_m_sum(const std::vector<double>& sorted_lambdas, int m) {
    return std::accumulate(sorted_lambdas.begin(), sorted_lambdas.begin() + m, 0.0);
}

/// Verdict from an ascending spectrum. T ≥_{m,ω} 0 iff λ_1 + ... + λ_m ≥ 0.
inline ConeVerdict m_semipositive_from_spectrum(const std::vector<double>& sorted_lambdas, int m,
                                                double tolerance = kConeTolerance) {
    const int n = static_cast<int>(sorted_lambdas.size());
    require(m >= 1 && m <= n, "m-positivity: need 1 <= m <= n");
    ConeVerdict v;
    v.margin = smallest_m_sum(sorted_lambdas, m);
    v.member = v.margin >= -tolerance;
    v.witness.resize(m);
    std::iota(v.witness.begin(), v.witness.end(), 0);
    return v;
}

inline ConeVerdict is_m_semipositive(const HermitianMatrix& t, const MetricMatrix& omega, int m,
                                     double tolerance = kConeTolerance) {
    require(m >= 1 && m <= t.dim(), "is_m_semipositive: need 1 <= m <= n");
    return m_semipositive_from_spectrum(relative_eigenvalues_only(t, omega), m, tolerance);
}

/// Coefficients Σ_{j∈J} λ_j of T ∧ ω^{m−1}/(m−1)! on dz_J ∧ dz̄_J, in the
/// lexicographic order of J, for a frame diagonalizing ω and T simultaneously.
inline std::vector<double> wedge_coefficients(const std::vector<double>& lambdas, int m) {
    const int n = static_cast<int>(lambdas.size());
    std::vector<double> out;
    for (const auto& J : subsets(n, m)) {
        double s = 0.0;
        for (int j : J) s += lambdas[j];
        out.push_back(s);
    }
    return out;
}

/// Strong positivity of T ∧ ω^{m−1} checked coefficient by coefficient over
/// all C(n,m) multi-indices.
inline ConeVerdict strong_positivity_from_spectrum(const std::vector<double>& lambdas, int m,
                                                   double tolerance = kConeTolerance) {
    const int n = static_cast<int>(lambdas.size());
    require(m >= 1 && m <= n, "strong_positivity_oracle: need 1 <= m <= n");
    const auto index = subsets(n, m);
    const auto coeffs = wedge_coefficients(lambdas, m);
    const auto it = std::min_element(coeffs.begin(), coeffs.end());
    ConeVerdict v;
    v.margin = *it;
    v.witness = index[static_cast<std::size_t>(it - coeffs.begin())];
    v.member = std::all_of(coeffs.begin(), coeffs.end(), [&](double c) { return c >= -tolerance; });
    return v;
}

inline ConeVerdict strong_positivity_oracle(const HermitianMatrix& t, const MetricMatrix& omega, int m,
                                            double tolerance = kConeTolerance) {
    require(m >= 1 && m <= t.dim(), "strong_positivity_oracle: need 1 <= m <= n");
    return strong_positivity_from_spectrum(relative_eigenvalues_only(t, omega), m, tolerance);
}

/// Membership of the g-Hermitian matrix A = g⁻¹Ã in P_m^k, with Ã passed
/// directly. Non-negativity of every m-dimensional subspace trace is equivalent
/// (Ky Fan) to the m smallest relative eigenvalues having non-negative sum.
inline ConeVerdict cone_Pmk_membership(const HermitianMatrix& a_tilde, const MetricMatrix& g, int m,
                                       double tolerance = kConeTolerance) {
    require(a_tilde.dim() == g.dim(), "cone_Pmk_membership: dimension mismatch");
    require(m >= 1 && m <= a_tilde.dim(), "cone_Pmk_membership: need 1 <= m <= n");
    return is_m_semipositive(a_tilde, g, m, tolerance);
}

} // namespace mpsh
