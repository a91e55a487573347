#include <gtest/gtest.h>

#include "mpsh/cones.hpp"
#include "oracles.hpp"

using namespace mpsh;

namespace {

HermitianMatrix diag(std::vector<double> d) { return HermitianMatrix::diagonal(d); }

std::pair<HermitianMatrix, MetricMatrix> random_pair(oracle::Rng& rng, int n) {
    return {HermitianMatrix(rng.hermitian(n)), MetricMatrix(HermitianMatrix(rng.metric(n)))};
}

} // namespace

TEST(IsMSemipositive, CounterexampleMetric) {
    const auto t = diag({1, 1, -1});
    const auto v = is_m_semipositive(t, MetricMatrix(diag({1, 1, 3})), 2);
    EXPECT_TRUE(v.member);
    EXPECT_NEAR(v.margin, 2.0 / 3.0, 1e-12);
    EXPECT_EQ(v.witness, (MultiIndex{0, 1}));
    const auto w = is_m_semipositive(t, MetricMatrix(diag({1, 1, 0.5})), 2);
    EXPECT_FALSE(w.member);
    EXPECT_NEAR(w.margin, -1.0, 1e-12);  // (−2) + 1
}

TEST(IsMSemipositive, ZeroForm) {
    oracle::Rng rng(5);
    for (int n = 1; n <= 4; ++n)
        for (int m = 1; m <= n; ++m) {
            const auto v = is_m_semipositive(HermitianMatrix::zero(n), MetricMatrix(HermitianMatrix(rng.metric(n))), m);
            EXPECT_TRUE(v.member);
            EXPECT_NEAR(v.margin, 0.0, 1e-15);
        }
}

TEST(IsMSemipositive, RangeErrors) {
    EXPECT_THROW(is_m_semipositive(diag({1, 2}), MetricMatrix::identity(2), 0), Error);
    EXPECT_THROW(is_m_semipositive(diag({1, 2}), MetricMatrix::identity(2), 3), Error);
}

TEST(IsMSemipositive, DiagonalFamilyMatchesRatios) {
    // diag(p,q,r) against diag(a,b,c): relative eigenvalues are p/a, q/b, r/c.
    oracle::Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> num(3), den(3), ratio(3);
        for (int i = 0; i < 3; ++i) {
            num[i] = rng.uniform(-2, 2);
            den[i] = rng.uniform(0.2, 3);
            ratio[i] = num[i] / den[i];
        }
        std::sort(ratio.begin(), ratio.end());
        for (int m = 1; m <= 3; ++m) {
            double s = 0;
            for (int i = 0; i < m; ++i) s += ratio[i];
            const auto v = is_m_semipositive(diag(num), MetricMatrix(diag(den)), m);
            EXPECT_NEAR(v.margin, s, 1e-12);
            EXPECT_EQ(v.member, s >= -kConeTolerance);
        }
    }
}

TEST(StrongPositivity, CounterexampleCoefficients) {
    const auto c = wedge_coefficients({-1.0 / 3.0, 1.0, 1.0}, 2);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_NEAR(c[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(c[1], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(c[2], 2.0, 1e-15);
    const auto v = strong_positivity_from_spectrum({-1.0 / 3.0, 1.0, 1.0}, 2);
    EXPECT_TRUE(v.member);
    EXPECT_NEAR(v.margin, 2.0 / 3.0, 1e-15);
}

TEST(StrongPositivity, IdentitySpectrum) {
    for (int n = 1; n <= 5; ++n)
        for (int m = 1; m <= n; ++m)
            for (double c : wedge_coefficients(std::vector<double>(n, 1.0), m)) EXPECT_DOUBLE_EQ(c, m);
}

TEST(StrongPositivity, CoefficientsMatchEnumeration) {
    oracle::Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.pick(1, 5), m = rng.pick(1, n);
        std::vector<double> l(n);
        for (double& v : l) v = rng.uniform(-2, 2);
        auto lib = wedge_coefficients(l, m);
        std::sort(lib.begin(), lib.end());
        const auto ref = oracle::msums(l, m);
        ASSERT_EQ(lib.size(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(lib[i], ref[i], 1e-13);
    }
}

TEST(StrongPositivity, OracleEquivalence) {
    oracle::Rng rng(2024);
    int disagreements = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = rng.pick(1, 4), m = rng.pick(1, n);
        const auto [t, w] = random_pair(rng, n);
        const auto a = is_m_semipositive(t, w, m);
        const auto b = strong_positivity_oracle(t, w, m);
        if (a.member != b.member) ++disagreements;
        EXPECT_NEAR(a.margin, b.margin, 1e-12);
        // Independent spectrum: roots of the characteristic polynomial.
        const auto ref = oracle::msums(oracle::pencil_eigenvalues(t.matrix(), w.matrix()), m);
        EXPECT_NEAR(a.margin, ref.front(), 1e-8);
    }
    EXPECT_EQ(disagreements, 0);
}

TEST(MSemipositivity, MonotoneInM) {
    oracle::Rng rng(2024);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = rng.pick(2, 4);
        const auto [t, w] = random_pair(rng, n);
        for (int m = 1; m < n; ++m)
            if (is_m_semipositive(t, w, m).member && !is_m_semipositive(t, w, m + 1).member) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(MSemipositivity, ConeIsConvex) {
    oracle::Rng rng(29);
    int violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = rng.pick(1, 4), m = rng.pick(1, n);
        const MetricMatrix w(HermitianMatrix(rng.metric(n)));
        auto member = [&] {
            const HermitianMatrix t(rng.hermitian(n));
            const double s = is_m_semipositive(t, w, m).margin;
            return s >= 0 ? t : t + (-s / m) * w.base();  // lands on the boundary
        };
        const auto a = member(), b = member();
        for (double s : {0.0, 0.25, 0.5, 0.75, 1.0})
            if (!is_m_semipositive(HermitianMatrix(CMatrix(s * a.matrix() + (1 - s) * b.matrix())), w, m).member)
                ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(ConePmk, TrivialExamples) {
    for (int m = 1; m <= 3; ++m) {
        const auto v = cone_Pmk_membership(HermitianMatrix::identity(3), MetricMatrix::identity(3), m);
        EXPECT_TRUE(v.member);
        EXPECT_NEAR(v.margin, m, 1e-14);
    }
    const auto v = cone_Pmk_membership(diag({-1, 2}), MetricMatrix::identity(2), 1);
    EXPECT_FALSE(v.member);
    EXPECT_NEAR(v.margin, -1.0, 1e-14);
    EXPECT_THROW(cone_Pmk_membership(diag({1, 2}), MetricMatrix::identity(3), 1), Error);
}

TEST(ConePmk, SubspaceTraceMonteCarlo) {
    oracle::Rng rng(31);
    const double slack = 0.5;
    int decided = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const CMatrix t = rng.hermitian(3);
        const CMatrix g = trial % 2 ? CMatrix(CMatrix::Identity(3, 3)) : rng.metric(3);
        const auto v = cone_Pmk_membership(HermitianMatrix(t), MetricMatrix(HermitianMatrix(g)), 2);
        const double mc = oracle::grassmann_min_trace(t, g, 2, 200, rng);
        // Every frame trace bounds the minimum from above.
        EXPECT_GE(mc, v.margin - 1e-9);
        EXPECT_LE(mc - v.margin, slack);
        if (std::abs(v.margin) > slack) {
            ++decided;
            EXPECT_EQ(v.member, mc >= 0.0);
        }
    }
    EXPECT_GT(decided, 0);
}
