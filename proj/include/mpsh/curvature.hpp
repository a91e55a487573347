#pragma once

#include <string>
#include <vector>

#include "mpsh/combinatorics.hpp"
#include "mpsh/cones.hpp"
#include "mpsh/hermitian.hpp"

namespace mpsh {

/// Coefficients u_{J K̄} of an L-valued (p,q)-form at a point, stored row-major
/// over (rank(J), rank(K)) with both multi-indices in lexicographic order.
/// `weight` is the squared fibre norm |e|²_h of the line-bundle frame.
class BidegreeForm {
public:
    BidegreeForm(int n, int p, int q, double weight = 1.0)
        : n_(n), p_(p), q_(q), weight_(weight) {
        require(n >= 1 && p >= 0 && p <= n && q >= 0 && q <= n, "BidegreeForm: need 0 <= p, q <= n");
        require(weight > 0.0, "BidegreeForm: weight must be positive");
        rows_ = static_cast<std::size_t>(binomial(n, p));
        cols_ = static_cast<std::size_t>(binomial(n, q));
        coeffs_.assign(rows_ * cols_, cplx(0.0));
    }

    /// The basis form dz_J ∧ dz̄_K.
    static BidegreeForm basis(int n, const MultiIndex& J, const MultiIndex& K, double weight = 1.0) {
        BidegreeForm u(n, static_cast<int>(J.size()), static_cast<int>(K.size()), weight);
        u.at(J, K) = 1.0;
        return u;
    }

    int n() const { return n_; }
    int p() const { return p_; }
    int q() const { return q_; }
    double weight() const { return weight_; }
    std::size_t size() const { return coeffs_.size(); }

    cplx& at(const MultiIndex& J, const MultiIndex& K) { return coeffs_[subset_rank(J, n_) * cols_ + subset_rank(K, n_)]; }
    cplx at(const MultiIndex& J, const MultiIndex& K) const {
        return coeffs_[subset_rank(J, n_) * cols_ + subset_rank(K, n_)];
    }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }
    cplx operator[](std::size_t i) const { return coeffs_[i]; }

    /// Pointwise inner product Σ u_{JK̄} conj(v_{JK̄}) |e|²_h.
    cplx inner(const BidegreeForm& v) const {
        require(same_shape(v), "BidegreeForm::inner: bidegree mismatch");
        cplx s = 0.0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) s += coeffs_[i] * std::conj(v.coeffs_[i]);
        return s * weight_;
    }
    double norm2() const { return inner(*this).real(); }

    bool same_shape(const BidegreeForm& v) const { return n_ == v.n_ && p_ == v.p_ && q_ == v.q_; }

private:
    int n_, p_, q_;
    double weight_;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> coeffs_;
};

/// Scalar by which [T∧·, Λ_ω] multiplies dz_J ∧ dz̄_K in a frame where T and ω
/// are simultaneously diagonal: Σ_{j∈J} λ_j + Σ_{k∈K} λ_k − Σ_l λ_l.
inline double curvature_factor(const std::vector<double>& lambdas, const MultiIndex& J, const MultiIndex& K) {
    double s = 0.0;
    for (int j : J) s += lambdas[j];
    for (int k : K) s += lambdas[k];
    for (double l : lambdas) s -= l;
    return s;
}

inline BidegreeForm apply_curvature_operator(const BidegreeForm& u, const std::vector<double>& lambdas) {
    require(static_cast<int>(lambdas.size()) == u.n(), "apply_curvature_operator: dimension mismatch");
    BidegreeForm out = u;
    const auto js = subsets(u.n(), u.p());
    const auto ks = subsets(u.n(), u.q());
    std::size_t i = 0;
    for (const auto& J : js)
        for (const auto& K : ks) {
            out[i] = u[i] * curvature_factor(lambdas, J, K);
            ++i;
        }
    return out;
}

/// The four bidegree regimes: (l,0), (0,l) under a negativity hypothesis and
/// (n,l), (l,n) under a positivity hypothesis on the curvature.
enum class BoundCase { p0, zero_q, nq, pn };

inline const char* to_string(BoundCase c) {
    switch (c) {
    case BoundCase::p0: return "p0";
    case BoundCase::zero_q: return "0q";
    case BoundCase::nq: return "nq";
    case BoundCase::pn: return "pn";
    }
    return "?";
}

inline BoundCase parse_bound_case(const std::string& s) {
    if (s == "p0") return BoundCase::p0;
    if (s == "0q") return BoundCase::zero_q;
    if (s == "nq") return BoundCase::nq;
    if (s == "pn") return BoundCase::pn;
    fail(ErrorKind::InvalidArgument, "unknown bound case '" + s + "'");
}

/// Curvature hypothesis of a regime, at hypothesis index k (p or q):
///  p0/0q: iΘ ≤_{n−k,ω} −cω, i.e. every (n−k)-fold sum of (λ_j + c) is ≤ 0;
///  nq/pn: iΘ ≥_{k,ω} cω, i.e. every k-fold sum of (λ_j − c) is ≥ 0.
inline bool bound_hypothesis_holds(BoundCase c_case, const std::vector<double>& lambdas, double c, int k,
                                   double tolerance = kConeTolerance) {
    const int n = static_cast<int>(lambdas.size());
    require(k >= 0 && k <= n, "bound hypothesis: index out of range");
    std::vector<double> shifted(lambdas);
    const bool negative = (c_case == BoundCase::p0 || c_case == BoundCase::zero_q);
    const int level = negative ? n - k : k;
    if (level == 0) return true;
    for (double& l : shifted) l = negative ? -(l + c) : (l - c);
    std::sort(shifted.begin(), shifted.end());
    return smallest_m_sum(shifted, level) >= -tolerance;
}

/// Checks ⟨A u, u⟩ ≥ bound |u|² on every basis form of the regime's bidegree
/// at level l, with bound c(n−l) for p0/0q and c·l for nq/pn. The hypothesis
/// is taken at index `hyp_index` (l when negative); it must satisfy l ≤ k for
/// p0/0q and l ≥ k for nq/pn. Throws if the hypothesis fails.
inline bool verify_bound_regime(BoundCase c_case, const std::vector<double>& lambdas, double c, int l,
                                int hyp_index = -1, double weight = 1.0) {
    const int n = static_cast<int>(lambdas.size());
    require(n >= 1, "verify_bound_regime: empty spectrum");
    require(c > 0.0, "verify_bound_regime: need c > 0");
    require(l >= 0 && l <= n, "verify_bound_regime: level out of range");
    const int k = hyp_index < 0 ? l : hyp_index;
    const bool negative = (c_case == BoundCase::p0 || c_case == BoundCase::zero_q);
    require(negative ? (l <= k) : (l >= k), "verify_bound_regime: level incompatible with hypothesis index");
    if (!bound_hypothesis_holds(c_case, lambdas, c, k))
        fail(ErrorKind::InvalidArgument,
             std::string("verify_bound_regime: curvature hypothesis violated for case ") + to_string(c_case));

    const double bound = negative ? c * (n - l) : c * l;
    MultiIndex full(n);
    for (int i = 0; i < n; ++i) full[i] = i;
    const auto levels = subsets(n, l);
    for (const auto& I : levels) {
        MultiIndex J, K;
        switch (c_case) {
        case BoundCase::p0: J = I; break;
        case BoundCase::zero_q: K = I; break;
        case BoundCase::nq: J = full; K = I; break;
        case BoundCase::pn: J = I; K = full; break;
        }
        const BidegreeForm u = BidegreeForm::basis(n, J, K, weight);
        const BidegreeForm au = apply_curvature_operator(u, lambdas);
        const double lhs = au.inner(u).real();
        if (lhs < bound * u.norm2() - kConeTolerance * std::max(1.0, std::abs(bound))) return false;
    }
    return true;
}

/// Constant of the L² estimate: 1/(c(n−l)) for 0q, 1/(c·l) for nq and pn.
inline double l2_constant(BoundCase c_case, double c, int n, int l) {
    require(c > 0.0, "l2_constant: need c > 0");
    require(n >= 1 && l >= 0 && l <= n, "l2_constant: need 0 <= l <= n");
    switch (c_case) {
    case BoundCase::zero_q:
        require(l < n, "l2_constant: need l < n for case 0q");
        return 1.0 / (c * static_cast<double>(n - l));
    case BoundCase::nq:
    case BoundCase::pn:
        require(l >= 1, "l2_constant: need l >= 1 for cases nq, pn");
        return 1.0 / (c * static_cast<double>(l));
    case BoundCase::p0: break;
    }
    fail(ErrorKind::InvalidArgument, "l2_constant: case p0 has no L2 constant");
}

} // namespace mpsh
