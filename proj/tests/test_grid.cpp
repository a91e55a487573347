#include <gtest/gtest.h>

#include <sstream>

#include "mpsh/grid.hpp"
#include "mpsh/regularization.hpp"
#include "oracles.hpp"

using namespace mpsh;

namespace {

double sq(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return s;
}

double max_entry(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

} // namespace

TEST(GridDomain, Construction) {
    const auto b = GridDomain::ball(2, 9, 0.5);
    EXPECT_DOUBLE_EQ(b.spacing(), 2 * 0.5 / 8);
    EXPECT_EQ(b.size(), 9u * 9 * 9 * 9);
    const auto t = GridDomain::torus(1, 7);
    EXPECT_DOUBLE_EQ(t.spacing(), 1.0 / 7);
    EXPECT_EQ(t.interior_nodes().size(), 49u);
    EXPECT_THROW(GridDomain::ball(1, 8), Error);
    EXPECT_THROW(GridDomain::ball(1, 3), Error);
    EXPECT_THROW(GridDomain::ball(1, 9, -1.0), Error);
    EXPECT_THROW(GridDomain::torus(5, 9), Error);
}

TEST(GridDomain, TagsFollowRadius) {
    const auto d = GridDomain::ball(1, 17, 1.0);
    std::size_t interior = 0, boundary = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r2 = d.norm2(i);
        switch (d.tag(i)) {
        case NodeTag::Interior:
            ++interior;
            EXPECT_LT(r2, 1.0);
            // Full stencil available.
            for (int a = 0; a < 2; ++a)
                for (int s : {-1, 1}) {
                    const auto nb = d.shift(i, a, s);
                    ASSERT_TRUE(nb.has_value());
                    EXPECT_NE(d.tag(*nb), NodeTag::Exterior);
                }
            break;
        case NodeTag::Boundary: ++boundary; break;
        case NodeTag::Exterior: EXPECT_GE(r2, 1.0 - 1e-12); break;
        }
    }
    EXPECT_EQ(interior, d.interior_nodes().size());
    EXPECT_EQ(boundary, d.boundary_nodes().size());
    EXPECT_GT(boundary, 0u);
}

TEST(GridDomain, TorusWraps) {
    const auto d = GridDomain::torus(2, 5);
    const auto node = d.node_of({4, 0, 2, 3});
    EXPECT_EQ(*d.shift(node, 0, 1), d.node_of({0, 0, 2, 3}));
    EXPECT_EQ(*d.shift(node, 1, -1), d.node_of({4, 4, 2, 3}));
    EXPECT_EQ(d.multi_index(node), (std::vector<int>{4, 0, 2, 3}));
}

TEST(FdHessian, ExactOnQuadratics) {
    oracle::Rng rng(127);
    for (int n = 1; n <= 2; ++n) {
        const auto d = GridDomain::ball(n, n == 1 ? 17 : 9, 1.0);
        for (int trial = 0; trial < 5; ++trial) {
            RMatrix q(2 * n, 2 * n);
            for (int a = 0; a < 2 * n; ++a)
                for (int b = 0; b <= a; ++b) q(a, b) = q(b, a) = rng.uniform(-2, 2);
            const auto u = GridFunction::sample(d, [&](const std::vector<double>& x) {
                double s = 0.3 * x[0];
                for (int a = 0; a < 2 * n; ++a)
                    for (int b = 0; b < 2 * n; ++b) s += 0.5 * q(a, b) * x[a] * x[b];
                return s;
            });
            const CMatrix expect = complex_hessian_point(q).matrix();
            for (std::size_t i : d.interior_nodes()) {
                EXPECT_LE((fd_real_hessian(u, i) - q).cwiseAbs().maxCoeff(), 1e-10);
                ASSERT_LE(max_entry(fd_complex_hessian(u, i).matrix() - expect), 1e-12 * 40);
            }
        }
    }
}

TEST(FdHessian, Examples) {
    const auto d = GridDomain::ball(1, 17, 1.0);
    const auto sqn = GridFunction::sample(d, sq);
    const auto re = GridFunction::sample(d, [](const std::vector<double>& x) { return x[0] * x[0] - x[1] * x[1]; });
    for (std::size_t i : d.interior_nodes()) {
        EXPECT_NEAR(std::abs(fd_complex_hessian(sqn, i)(0, 0) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(fd_complex_hessian(re, i)(0, 0)), 0.0, 1e-12);
    }
    EXPECT_THROW(fd_complex_hessian(sqn, d.boundary_nodes().front()), Error);
}

TEST(FdHessian, SecondOrderExpX1) {
    std::vector<double> errs;
    for (int p : {17, 33, 65}) {
        const auto d = GridDomain::ball(1, p, 1.0);
        const auto u = GridFunction::sample(d, [](const std::vector<double>& x) { return std::exp(x[0]); });
        double err = 0.0;
        for (std::size_t i : d.interior_nodes()) {
            const double x = d.coordinates(i)[0];
            const double e = std::abs(fd_complex_hessian(u, i)(0, 0).real() - std::exp(x) / 4);
            // Truncation bound (h²/48) e^{x+h} from the Taylor remainder of the second difference.
            EXPECT_LE(e, d.spacing() * d.spacing() / 48 * std::exp(x + d.spacing()) * (1 + 1e-6) + 1e-12);
            err = std::max(err, e);
        }
        errs.push_back(err);
    }
    EXPECT_GE(errs[0] / errs[1], 3.5);
    EXPECT_GE(errs[1] / errs[2], 3.5);
}

TEST(FdHessian, SecondOrderMixedC2) {
    std::vector<double> errs;
    for (int p : {9, 17, 33}) {
        const auto d = GridDomain::ball(2, p, 1.0);
        const auto u = GridFunction::sample(d, [](const std::vector<double>& x) { return std::exp(x[0]) * std::cos(x[3]); });
        double err = 0.0;
        for (std::size_t i : d.interior_nodes()) {
            const auto x = d.coordinates(i);
            const double v = std::exp(x[0]) * std::cos(x[3]);
            CMatrix exact(2, 2);
            exact(0, 0) = v / 4;
            exact(1, 1) = -v / 4;
            exact(0, 1) = cplx(0, -std::exp(x[0]) * std::sin(x[3]) / 4);
            exact(1, 0) = std::conj(exact(0, 1));
            err = std::max(err, max_entry(fd_complex_hessian(u, i).matrix() - exact));
        }
        errs.push_back(err);
    }
    EXPECT_GE(errs[0] / errs[1], 3.5);
    EXPECT_GE(errs[1] / errs[2], 3.5);
}

TEST(FmField, Examples) {
    const auto d = GridDomain::ball(2, 9, 1.0);
    const auto g = MetricField::flat(d);
    const auto u = GridFunction::sample(d, sq);
    for (int m = 1; m <= 2; ++m) {
        const auto f = fm_field(u, g, m);
        const auto f3 = fm_field(GridFunction::sample(d, [](const auto& x) { return 3 * sq(x); }), g, m);
        for (std::size_t i : d.interior_nodes()) {
            EXPECT_TRUE(f.in_cone[i]);
            EXPECT_NEAR(f.value[i], m, 1e-12);
            EXPECT_NEAR(f3.value[i], 3 * m, 1e-11);
        }
    }
    // |z|² + 0.1 Re(z1²): the added term is pluriharmonic, so the spectrum stays (1, 1).
    const auto v = GridFunction::sample(d, [](const auto& x) { return sq(x) + 0.1 * (x[0] * x[0] - x[1] * x[1]); });
    const auto f = fm_field(v, g, 2);
    for (std::size_t i : d.interior_nodes()) {
        EXPECT_NEAR(f.value[i], 2.0, 1e-12);
        const auto l = relative_eigenvalues_only(fd_complex_hessian(v, i), g.at(i));
        EXPECT_NEAR(l[0], 1.0, 1e-12);
        EXPECT_NEAR(l[1], 1.0, 1e-12);
    }
    // Outside the cone: flagged with the signed margin.
    const auto neg = fm_field(GridFunction::sample(d, [](const auto& x) { return -sq(x); }), g, 1);
    for (std::size_t i : d.interior_nodes()) {
        EXPECT_FALSE(neg.in_cone[i]);
        EXPECT_NEAR(neg.value[i], -1.0, 1e-12);
    }
    for (std::size_t b : d.boundary_nodes()) EXPECT_FALSE(neg.evaluated[b]);
}

TEST(FmField, NonFlatMetric) {
    const auto d = GridDomain::ball(2, 9, 1.0);
    oracle::Rng rng(131);
    const CMatrix w = rng.metric(2);
    const MetricField g(d, MetricMatrix(HermitianMatrix(w)));
    const auto u = GridFunction::sample(d, sq);
    const auto f = fm_field(u, g, 1);
    const auto ref = oracle::fm_product(oracle::pencil_eigenvalues(CMatrix::Identity(2, 2), w), 1);
    for (std::size_t i : d.interior_nodes()) EXPECT_NEAR(f.value[i], ref, 1e-9);
}

TEST(ConeField, Examples) {
    const auto d = GridDomain::ball(2, 9, 1.0);
    const auto g = MetricField::flat(d);
    for (int m = 1; m <= 2; ++m) {
        const auto c = cone_field(GridFunction::sample(d, sq), g, m);
        EXPECT_TRUE(c.all_members);
        EXPECT_NEAR(c.min_margin, m, 1e-12);
        const auto neg = cone_field(GridFunction::sample(d, [](const auto& x) { return -sq(x); }), g, m);
        for (std::size_t i : d.interior_nodes()) EXPECT_FALSE(neg.verdicts[i].member);
    }
    const auto mx = GridFunction::sample(d, [](const auto& x) { return std::max(x[0], x[2]); });
    const auto smooth = smoothing_pass(mx);
    const auto c = cone_field(smooth, g, 2, std::nullopt, 1e-6);
    EXPECT_TRUE(c.all_members);
    EXPECT_GE(c.min_margin, -1e-6);
}

TEST(FmField, TorusTranslationInvariant) {
    const auto d = GridDomain::torus(2, 7);
    const auto g = MetricField::flat(d);
    const auto chi = HermitianMatrix::diagonal({0.5, 2.0});
    const auto f = fm_field(GridFunction(d, -3.0), g, 2, chi);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(f.value[i], 2.5, 1e-12);
    // A periodic function is differenced across the seam exactly like in the middle.
    const auto u = GridFunction::sample(d, [](const auto& x) { return 0.01 * std::cos(2 * M_PI * x[0]); });
    const auto fu = fm_field(u, g, 2, chi);
    const auto first = fu.value[d.node_of({0, 3, 3, 3})];
    const auto last = fu.value[d.node_of({0, 1, 2, 4})];
    EXPECT_NEAR(first, last, 1e-12);
}

TEST(Serialization, CsvAndBinaryRoundTrip) {
    const auto d = GridDomain::ball(1, 9, 0.7);
    const auto u = GridFunction::sample(d, [](const auto& x) { return std::sin(x[0]) + 1e-300 * x[1] + 1.0 / 3.0; });
    std::ostringstream csv;
    write_csv(csv, u);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x1,y1,tag,value");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        ASSERT_EQ(vals.size(), 4u);
        const double expect = std::sin(vals[0]) + 1e-300 * vals[1] + 1.0 / 3.0;
        EXPECT_EQ(vals[3], expect);  // %.17g round-trips doubles
        ++rows;
    }
    EXPECT_EQ(rows, d.interior_nodes().size() + d.boundary_nodes().size());

    std::stringstream bin;
    write_binary(bin, u);
    EXPECT_EQ(bin.str().substr(0, 4), "MPSG");
    const auto back = read_binary(bin);
    EXPECT_TRUE(back.domain() == d);
    EXPECT_EQ(back.values(), u.values());

    const auto t = GridFunction::sample(GridDomain::torus(2, 5), [](const auto& x) { return x[0] - x[3]; });
    std::stringstream tb;
    write_binary(tb, t);
    EXPECT_EQ(read_binary(tb).values(), t.values());
}

TEST(Serialization, RejectsCorruptDumps) {
    const auto u = GridFunction(GridDomain::ball(1, 5), 1.0);
    std::stringstream bin;
    write_binary(bin, u);
    std::string bytes = bin.str();
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream s1(bad);
    EXPECT_THROW(read_binary(s1), Error);
    std::istringstream s2(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_binary(s2), Error);
    std::string wrong_version = bytes;
    wrong_version[4] = 2;
    std::istringstream s3(wrong_version);
    EXPECT_THROW(read_binary(s3), Error);
}
