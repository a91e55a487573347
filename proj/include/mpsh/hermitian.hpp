#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mpsh/errors.hpp"

namespace mpsh {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Coefficient matrix (T_{j k̄}) of a real (1,1)-form T = i Σ T_{j k̄} dz_j ∧ dz̄_k
/// in fixed local coordinates. Entries satisfy T_{k j̄} = conj(T_{j k̄}).
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    /// Validates Hermitian symmetry (relative 1e-12) and stores the exact
    /// symmetrization (A + A*)/2.
    explicit HermitianMatrix(const CMatrix& a) {
        require(a.rows() == a.cols() && a.rows() >= 1, "HermitianMatrix: need a square matrix of size >= 1");
        require(a.allFinite(), "HermitianMatrix: non-finite entry");
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
        require(asym <= 1e-12 * scale, "HermitianMatrix: input is not Hermitian (asymmetry " + std::to_string(asym) + ")");
        m_ = 0.5 * (a + a.adjoint());
        for (Eigen::Index i = 0; i < m_.rows(); ++i) m_(i, i) = cplx(m_(i, i).real(), 0.0);
    }

    static HermitianMatrix from_real(const RMatrix& a) { return HermitianMatrix(CMatrix(a.cast<cplx>())); }

    static HermitianMatrix identity(int n) { return HermitianMatrix(CMatrix(CMatrix::Identity(n, n))); }
    static HermitianMatrix zero(int n) { return HermitianMatrix(CMatrix(CMatrix::Zero(n, n))); }
    static HermitianMatrix diagonal(const std::vector<double>& d) {
        CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
        return HermitianMatrix(a);
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    cplx operator()(int j, int k) const { return m_(j, k); }

    friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
        require(a.dim() == b.dim(), "HermitianMatrix: dimension mismatch in +");
        return HermitianMatrix(CMatrix(a.m_ + b.m_));
    }
    friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
        require(a.dim() == b.dim(), "HermitianMatrix: dimension mismatch in -");
        return HermitianMatrix(CMatrix(a.m_ - b.m_));
    }
    friend HermitianMatrix operator*(double s, const HermitianMatrix& a) { return HermitianMatrix(CMatrix(s * a.m_)); }

private:
    CMatrix m_;
};

/// A Hermitian matrix that is positive definite: the coefficients g_{j k̄} of a
/// Hermitian metric ω at a point.
class MetricMatrix {
public:
    static constexpr double kDefinitenessThreshold = 1e-12;

    MetricMatrix() = default;

    explicit MetricMatrix(HermitianMatrix base) : base_(std::move(base)) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(base_.matrix(), Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(hi > 0.0) || !(lo > kDefinitenessThreshold * hi))
            fail(ErrorKind::InvalidArgument, "MetricMatrix: not positive definite (smallest eigenvalue " +
                                                 std::to_string(lo) + ", largest " + std::to_string(hi) + ")");
        llt_.compute(base_.matrix());
    }

    static MetricMatrix identity(int n) { return MetricMatrix(HermitianMatrix::identity(n)); }

    int dim() const { return base_.dim(); }
    const HermitianMatrix& base() const { return base_; }
    const CMatrix& matrix() const { return base_.matrix(); }
    /// Lower Cholesky factor L with ω = L L*.
    CMatrix cholesky_factor() const { return llt_.matrixL(); }
    const Eigen::LLT<CMatrix>& llt() const { return llt_; }

private:
    HermitianMatrix base_;
    Eigen::LLT<CMatrix> llt_;
};

/// Eigenvalues of a form T relative to a metric ω, sorted ascending, together
/// with a basis (columns) in which basis*·ω·basis = Id and basis*·T·basis = diag(lambdas).
struct RelativeSpectrum {
    std::vector<double> lambdas;
    CMatrix basis;
};

/// Solves det(T − λω) = 0 by Cholesky reduction: ω = L L*, then the ordinary
/// spectrum of L⁻¹ T L⁻*.
inline RelativeSpectrum relative_eigenvalues(const HermitianMatrix& t, const MetricMatrix& omega) {
    require(t.dim() == omega.dim(), "relative_eigenvalues: dimension mismatch");
    const int n = t.dim();
    const auto& llt = omega.llt();
    // M = L⁻¹ T L⁻*
    CMatrix x = llt.matrixL().solve(t.matrix());
    CMatrix m = llt.matrixL().solve(CMatrix(x.adjoint())).adjoint();
    m = 0.5 * (m + m.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    RelativeSpectrum out;
    out.lambdas.resize(n);
    for (int i = 0; i < n; ++i) out.lambdas[i] = es.eigenvalues()(i);  // ascending already
    out.basis = llt.matrixU().solve(es.eigenvectors());                // L⁻* V
    return out;
}

/// Spectrum only; skips the eigenvector computation.
inline std::vector<double> relative_eigenvalues_only(const HermitianMatrix& t, const MetricMatrix& omega) {
    require(t.dim() == omega.dim(), "relative_eigenvalues: dimension mismatch");
    const auto& llt = omega.llt();
    CMatrix x = llt.matrixL().solve(t.matrix());
    CMatrix m = llt.matrixL().solve(CMatrix(x.adjoint())).adjoint();
    m = 0.5 * (m + m.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return out;
}

/// Complex Hessian u_{j k̄} = ∂²u/∂z_j∂z̄_k from the real Hessian in the
/// coordinates (x_1, y_1, ..., x_n, y_n):
///   u_{j k̄} = ¼[(u_{x_j x_k} + u_{y_j y_k}) + i(u_{x_j y_k} − u_{y_j x_k})].
inline HermitianMatrix complex_hessian_point(const RMatrix& d) {
    require(d.rows() == d.cols() && d.rows() >= 2 && d.rows() % 2 == 0,
            "complex_hessian_point: need a 2n x 2n real matrix");
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    require((d - d.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, "complex_hessian_point: real Hessian is not symmetric");
    const RMatrix s = 0.5 * (d + d.transpose());
    const Eigen::Index n = s.rows() / 2;
    CMatrix h(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double re = s(2 * j, 2 * k) + s(2 * j + 1, 2 * k + 1);
            const double im = s(2 * j, 2 * k + 1) - s(2 * j + 1, 2 * k);
            h(j, k) = 0.25 * cplx(re, im);
        }
    return HermitianMatrix(h);
}

/// Trace of ω⁻¹ T; equals the sum of the relative eigenvalues.
inline double relative_trace(const HermitianMatrix& t, const MetricMatrix& omega) {
    return omega.llt().solve(t.matrix()).trace().real();
}

} // namespace mpsh
