#include <gtest/gtest.h>

#include "mpsh/hermitian.hpp"
#include "mpsh/combinatorics.hpp"
#include "oracles.hpp"

using namespace mpsh;

namespace {

HermitianMatrix diag(std::vector<double> d) { return HermitianMatrix::diagonal(d); }

} // namespace

TEST(Combinatorics, BinomialAndSubsets) {
    EXPECT_EQ(binomial(5, 2), 10u);
    EXPECT_EQ(binomial(4, 0), 1u);
    EXPECT_EQ(binomial(3, 4), 0u);
    const auto s = subsets(4, 2);
    ASSERT_EQ(s.size(), 6u);
    EXPECT_EQ(s.front(), (MultiIndex{0, 1}));
    EXPECT_EQ(s.back(), (MultiIndex{2, 3}));
    for (std::size_t r = 0; r < s.size(); ++r) EXPECT_EQ(subset_rank(s[r], 4), r);
    EXPECT_EQ(complement(MultiIndex{1, 3}, 5), (MultiIndex{0, 2, 4}));
}

TEST(HermitianMatrix, RejectsNonHermitian) {
    CMatrix a(2, 2);
    a << 1.0, 2.0, 0.0, 1.0;
    EXPECT_THROW(HermitianMatrix{a}, Error);
    CMatrix b(2, 2);
    b << 1.0, cplx(0, 1), cplx(0, -1), 2.0;
    EXPECT_NO_THROW(HermitianMatrix{b});
}

TEST(HermitianMatrix, SymmetrizesWithinTolerance) {
    CMatrix a(2, 2);
    a << 1.0, cplx(1.0, 1e-15), cplx(1.0, 0.0), 3.0;
    const HermitianMatrix h(a);
    EXPECT_LE(std::abs(h(0, 1) - std::conj(h(1, 0))), 1e-14);
}

TEST(MetricMatrix, RejectsIndefiniteAndNearlySingular) {
    EXPECT_THROW(MetricMatrix(diag({1.0, -1.0})), Error);
    EXPECT_THROW(MetricMatrix(diag({1.0, 1e-14})), Error);
    EXPECT_NO_THROW(MetricMatrix(diag({1.0, 1e-9})));
}

TEST(RelativeEigenvalues, CounterexampleMetric) {
    const auto s = relative_eigenvalues(diag({1, 1, -1}), MetricMatrix(diag({1, 1, 3})));
    ASSERT_EQ(s.lambdas.size(), 3u);
    EXPECT_NEAR(s.lambdas[0], -1.0 / 3.0, 1e-14);
    EXPECT_NEAR(s.lambdas[1], 1.0, 1e-14);
    EXPECT_NEAR(s.lambdas[2], 1.0, 1e-14);
}

TEST(RelativeEigenvalues, IdentityPencil) {
    oracle::Rng rng(1);
    for (int n = 1; n <= 4; ++n) {
        const MetricMatrix w(HermitianMatrix(rng.metric(n)));
        const auto s = relative_eigenvalues(w.base(), w);
        for (double l : s.lambdas) EXPECT_NEAR(l, 1.0, 1e-12);
    }
}

TEST(RelativeEigenvalues, MatchesCharacteristicPolynomialRoots) {
    oracle::Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 4;
        const CMatrix t = rng.hermitian(n);
        const CMatrix w = trial % 2 ? CMatrix(CMatrix::Identity(n, n)) : rng.metric(n);
        const auto lib = relative_eigenvalues(HermitianMatrix(t), MetricMatrix(HermitianMatrix(w))).lambdas;
        const auto ref = oracle::pencil_eigenvalues(t, w);
        ASSERT_EQ(ref.size(), lib.size());
        for (int i = 0; i < n; ++i) EXPECT_NEAR(lib[i], ref[i], 1e-9 * std::max(1.0, std::abs(ref[i])));
    }
}

TEST(RelativeEigenvalues, BasisDiagonalizesBoth) {
    oracle::Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 4;
        const HermitianMatrix t(rng.hermitian(n));
        const MetricMatrix w(HermitianMatrix(rng.metric(n)));
        const auto s = relative_eigenvalues(t, w);
        for (int i = 0; i + 1 < n; ++i) EXPECT_LE(s.lambdas[i], s.lambdas[i + 1]);
        const CMatrix gb = s.basis.adjoint() * w.matrix() * s.basis;
        const CMatrix tb = s.basis.adjoint() * t.matrix() * s.basis;
        CMatrix d = CMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) d(i, i) = s.lambdas[i];
        EXPECT_LE((gb - CMatrix::Identity(n, n)).norm(), 1e-10);
        EXPECT_LE((tb - d).norm(), 1e-10 * std::max(1.0, d.norm()));
    }
}

TEST(RelativeEigenvalues, ScalingAndTrace) {
    oracle::Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 4;
        const HermitianMatrix t(rng.hermitian(n));
        const MetricMatrix w(HermitianMatrix(rng.metric(n)));
        const auto base = relative_eigenvalues_only(t, w);
        const double alpha = rng.uniform(-3, 3);
        const auto scaled = relative_eigenvalues_only(alpha * t, w);
        std::vector<double> expect(base);
        for (double& v : expect) v *= alpha;
        std::sort(expect.begin(), expect.end());
        for (int i = 0; i < n; ++i) EXPECT_NEAR(scaled[i], expect[i], 1e-10);
        double sum = 0.0;
        for (double v : base) sum += v;
        const double tr = (w.matrix().inverse() * t.matrix()).trace().real();
        EXPECT_NEAR(sum, tr, 1e-10 * std::max(1.0, std::abs(tr)));
        EXPECT_NEAR(relative_trace(t, w), tr, 1e-10 * std::max(1.0, std::abs(tr)));
    }
}

TEST(RelativeEigenvalues, DimensionMismatch) {
    EXPECT_THROW(relative_eigenvalues(diag({1, 2}), MetricMatrix::identity(3)), Error);
}

TEST(ComplexHessian, PointExamples) {
    RMatrix d = RMatrix::Zero(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 2;  // |z|^2
    EXPECT_NEAR(std::abs(complex_hessian_point(d)(0, 0) - 1.0), 0.0, 1e-15);
    d(1, 1) = -2;  // Re(z^2) = x^2 - y^2
    EXPECT_NEAR(std::abs(complex_hessian_point(d)(0, 0)), 0.0, 1e-15);

    // x1 x2 + y1 y2 = Re(z1 conj z2)
    RMatrix h = RMatrix::Zero(4, 4);
    h(0, 2) = h(2, 0) = 1;
    h(1, 3) = h(3, 1) = 1;
    const auto c = complex_hessian_point(h);
    EXPECT_NEAR(std::abs(c(0, 1) - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(c(1, 0) - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(c(0, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(c(1, 1)), 0.0, 1e-15);
}

TEST(ComplexHessian, FiniteDifferenceCrossCheck) {
    // u = x1 x2 + y1 y2 + 0.3 x1 y2, real Hessian by central differences.
    auto u = [](const Eigen::Vector4d& x) { return x(0) * x(2) + x(1) * x(3) + 0.3 * x(0) * x(3); };
    RMatrix h(4, 4);
    const double e = 1e-3;
    const Eigen::Vector4d x0(0.1, -0.2, 0.3, 0.05);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            Eigen::Vector4d pa = Eigen::Vector4d::Zero(), pb = Eigen::Vector4d::Zero();
            pa(a) = e;
            pb(b) = e;
            h(a, b) = (u(x0 + pa + pb) - u(x0 + pa - pb) - u(x0 - pa + pb) + u(x0 - pa - pb)) / (4 * e * e);
        }
    h = 0.5 * (h + h.transpose()).eval();
    const auto c = complex_hessian_point(h);
    // u_{1 2̄} = (2 + 0.3 i)/4.
    EXPECT_NEAR(c(0, 1).real(), 0.5, 1e-6);
    EXPECT_NEAR(c(0, 1).imag(), 0.075, 1e-6);
}

TEST(ComplexHessian, PluriharmonicQuadraticsVanish) {
    oracle::Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 3;
        // Re(Σ a_jk z_j z_k) with complex symmetric a: real Hessian from the bilinear form.
        CMatrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        a = 0.5 * (a + a.transpose()).eval();
        RMatrix h(2 * n, 2 * n);
        // u = Re(z^T a z), z = x + iy: u = x^T Re(a) x − y^T Re(a) y − 2 x^T Im(a) y.
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                h(2 * j, 2 * k) = 2 * a(j, k).real();
                h(2 * j + 1, 2 * k + 1) = -2 * a(j, k).real();
                h(2 * j, 2 * k + 1) = -2 * a(j, k).imag();
                h(2 * j + 1, 2 * k) = -2 * a(j, k).imag();
            }
        EXPECT_LE(complex_hessian_point(h).matrix().norm(), 1e-12);
    }
}

TEST(ComplexHessian, RejectsAsymmetric) {
    RMatrix d = RMatrix::Zero(2, 2);
    d(0, 1) = 1.0;
    EXPECT_THROW(complex_hessian_point(d), Error);
    EXPECT_THROW(complex_hessian_point(RMatrix::Zero(3, 3)), Error);
}
