// Domains (parsing, membership, wrapping, distances), metrics (evaluation,
// definiteness, Christoffel symbols against hand computations), and midpoint
// quadrature grids with volume oracles.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "vfspec/error.hpp"
#include "vfspec/geometry.hpp"

namespace vfspec {
namespace {

const double kTwoPi = 2.0 * kPi;

TEST(Domain, ParseAndSpecRoundTrip) {
    for (const char* spec :
         {"box:-2,2,-2,2", "disc:0,0,1", "annulus:0.5,2", "punctured-disc:1,0.01",
          "plane-minus-line:2,0.05", "torus:6.283185307179586,6.283185307179586",
          "box:0,1,0,1,0,1"}) {
        const Domain d = Domain::parse(spec);
        EXPECT_EQ(Domain::parse(d.spec()).spec(), d.spec());
    }
    EXPECT_EQ(Domain::parse("box:0,1,0,1,0,1").dimension(), 3u);
    EXPECT_THROW(Domain::parse("sphere:1"), ParseError);
    EXPECT_THROW(Domain::parse("box:0,1,0"), Error);        // odd bound count
    EXPECT_THROW(Domain::parse("disc:0,0"), ParseError);    // missing radius
    EXPECT_THROW(Domain::parse("disc:0,0,-1"), Error);      // negative radius
    EXPECT_THROW(Domain::parse("punctured-disc:1,2"), Error);  // guard >= radius
    EXPECT_THROW(Domain::parse(""), ParseError);
}

TEST(Domain, MembershipSemantics) {
    const Domain box = Domain::parse("box:-2,2,-2,2");
    EXPECT_TRUE(box.membership(std::vector<double>{2.0, -2.0}));   // closed
    EXPECT_FALSE(box.membership(std::vector<double>{2.0001, 0.0}));

    const Domain disc = Domain::parse("disc:0,0,1");
    EXPECT_TRUE(disc.membership(std::vector<double>{0.999, 0.0}));
    EXPECT_FALSE(disc.membership(std::vector<double>{1.0, 0.0}));  // open

    const Domain ann = Domain::parse("annulus:0.5,2");
    EXPECT_TRUE(ann.membership(std::vector<double>{0.5, 0.0}));    // closed ring
    EXPECT_TRUE(ann.membership(std::vector<double>{0.0, 2.0}));
    EXPECT_FALSE(ann.membership(std::vector<double>{0.49, 0.0}));

    const Domain punc = Domain::parse("punctured-disc:1,0.01");
    EXPECT_FALSE(punc.membership(std::vector<double>{0.0, 0.0}));  // guard hole
    EXPECT_TRUE(punc.membership(std::vector<double>{0.01, 0.0}));
    EXPECT_FALSE(punc.membership(std::vector<double>{1.0, 0.0}));  // open rim

    const Domain omega = Domain::parse("plane-minus-line:2,0.05");
    EXPECT_FALSE(omega.membership(std::vector<double>{0.0, 1.0}));   // slit
    EXPECT_FALSE(omega.membership(std::vector<double>{0.049, 1.0})); // guard
    EXPECT_TRUE(omega.membership(std::vector<double>{-0.05, 1.0}));
    EXPECT_TRUE(omega.membership(std::vector<double>{2.0, 2.0}));    // corner kept

    const Domain torus = Domain::parse("torus:6.283185307179586,6.283185307179586");
    EXPECT_TRUE(torus.compact());
    EXPECT_FALSE(omega.compact());
    EXPECT_TRUE(torus.membership(std::vector<double>{100.0, -3.0}));  // wraps
}

TEST(Domain, TorusWrapAndDistance) {
    const Domain t = Domain::parse("torus:6.283185307179586,6.283185307179586");
    const Vec w = t.wrap(std::vector<double>{-0.1, kTwoPi + 0.25});
    EXPECT_NEAR(w[0], kTwoPi - 0.1, 1e-12);
    EXPECT_NEAR(w[1], 0.25, 1e-12);
    // Shorter arc across the seam.
    EXPECT_NEAR(t.distance(std::vector<double>{0.1, 0.0}, std::vector<double>{kTwoPi - 0.1, 0.0}),
                0.2, 1e-12);

    const Domain box = Domain::parse("box:0,1,0,1");
    EXPECT_DOUBLE_EQ(box.distance(std::vector<double>{0.0, 0.0}, std::vector<double>{3.0, 4.0}),
                     5.0);
}

TEST(MatOps, DetInversePd) {
    Mat m(2);
    m.at(0, 0) = 4;  m.at(0, 1) = 1;
    m.at(1, 0) = 1;  m.at(1, 1) = 3;
    EXPECT_DOUBLE_EQ(mat_det(m), 11.0);
    const Mat inv = mat_inverse(m);
    EXPECT_DOUBLE_EQ(inv.at(0, 0), 3.0 / 11.0);
    EXPECT_DOUBLE_EQ(inv.at(0, 1), -1.0 / 11.0);
    EXPECT_TRUE(positive_definite(m));

    Mat nd(2);
    nd.at(0, 0) = 1;  nd.at(0, 1) = 2;
    nd.at(1, 0) = 2;  nd.at(1, 1) = 1;
    EXPECT_FALSE(positive_definite(nd));  // leading minors 1, -3

    Mat m3(3);
    // det = 1*(2*2-1*1) - 0 + 1*(0*1-2*1) = 3 - 2 = 1 for this matrix:
    const double rows[9] = {1, 0, 1, 0, 2, 1, 1, 1, 2};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) m3.at(i, j) = rows[3 * i + j];
    EXPECT_NEAR(mat_det(m3), 1.0, 1e-14);
    const Mat i3 = mat_inverse(m3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < 3; ++k) s += m3.at(i, k) * i3.at(k, j);
            EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-13);
        }
}

TEST(Metric, ParseAndEvaluate) {
    const Metric eu = Metric::parse(" euclidean ", 2);
    const Mat g = eu.evaluate(std::vector<double>{0.3, 0.7});
    EXPECT_DOUBLE_EQ(g.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(g.at(0, 1), 0.0);

    // Polar-style chart metric diag(1, r^2) with r named x.
    const Metric polar = Metric::parse("1; 0; 0; x^2", 2);
    const Mat gp = polar.evaluate(std::vector<double>{2.0, 0.7});
    EXPECT_DOUBLE_EQ(gp.at(1, 1), 4.0);
    EXPECT_DOUBLE_EQ(gp.at(0, 1), 0.0);
    const std::vector<Vec> samples{Vec{2.0, 0.7}, Vec{0.5, -1.0}};
    EXPECT_NO_THROW(polar.check_symmetry(samples));

    EXPECT_THROW(Metric::parse("1; 0; 0", 2), ParseError);           // wrong count
    EXPECT_THROW(Metric::parse("1; 0; 0; x^2; 0", 2), ParseError);
}

TEST(Metric, ChristoffelOracles) {
    // diag(1, r^2) at r = 2: Gamma^r_tt = -r, Gamma^t_rt = 1/r.
    const Metric polar = Metric::parse("1; 0; 0; x^2", 2);
    const Christoffels c = christoffels_at(polar, std::vector<double>{2.0, 0.7});
    EXPECT_NEAR(c.at(0, 1, 1), -2.0, 1e-12);
    EXPECT_NEAR(c.at(1, 0, 1), 0.5, 1e-12);
    EXPECT_NEAR(c.at(1, 1, 0), 0.5, 1e-12);
    EXPECT_NEAR(c.at(0, 0, 0), 0.0, 1e-12);
    EXPECT_NEAR(c.at(0, 0, 1), 0.0, 1e-12);

    // diag(e^{2x}, 1) at the origin: Gamma^x_xx = 1, everything else 0
    // except nothing: dg_yy = 0 and dg_xx/dy = 0.
    const Metric expm = Metric::parse("exp(2*x); 0; 0; 1", 2);
    const Christoffels ce = christoffels_at(expm, std::vector<double>{0.0, 0.0});
    EXPECT_NEAR(ce.at(0, 0, 0), 1.0, 1e-12);
    EXPECT_NEAR(ce.at(1, 0, 0), 0.0, 1e-12);
    EXPECT_NEAR(ce.at(0, 1, 1), 0.0, 1e-12);

    // Euclidean metrics have identically zero symbols.
    const Christoffels c0 = christoffels_at(Metric::euclidean(3),
                                            std::vector<double>{1.0, 2.0, 3.0});
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(c0.at(k, i, j), 0.0);
}

TEST(Grid, VolumeOracles) {
    // Unit box: midpoint sums of equal cells are exact to roundoff.
    const Grid unit = build_grid(Domain::parse("box:0,1,0,1"), Metric::euclidean(2), 100);
    EXPECT_NEAR(unit.total_weight(), 1.0, 1e-12);

    // Disc area converges like the boundary cell count.
    const Grid disc = build_grid(Domain::parse("disc:0,0,1"), Metric::euclidean(2), 400);
    EXPECT_NEAR(disc.total_weight(), kPi, 5e-3);

    // Riemannian volume: sqrt(det g) = r over r in [0.1, 1], theta in [0, pi/2].
    const Grid polar = build_grid(Domain::parse("box:0.1,1,0,1.5707963267948966"),
                                  Metric::parse("1; 0; 0; x^2", 2), 200);
    EXPECT_NEAR(polar.total_weight(), (kPi / 2) * (1.0 - 0.01) / 2.0, 1e-3);
}

TEST(Grid, PointsAreMembersAndDeterministic) {
    const Domain omega = Domain::parse("plane-minus-line:2,0.1");
    const Metric eu = Metric::euclidean(2);
    const Grid a = build_grid(omega, eu, 200);
    ASSERT_GT(a.size(), 0u);
    for (std::size_t i = 0; i < a.size(); i += 997)
        EXPECT_TRUE(omega.membership(a.points()[i]));

    const Grid b = build_grid(omega, eu, 200);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a.weights()[i], b.weights()[i]);
        for (std::size_t d = 0; d < 2; ++d) ASSERT_EQ(a.points()[i][d], b.points()[i][d]);
    }

    // Guard band respected: no grid point inside |x| < 0.1.
    for (const Vec& p : a.points()) ASSERT_GE(std::abs(p[0]), 0.1);
}

TEST(Grid, RejectsDegenerateInputs) {
    EXPECT_THROW(build_grid(Domain::parse("box:0,1,0,1"), Metric::euclidean(3), 10),
                 InvalidArgument);
    EXPECT_THROW(build_grid(Domain::parse("box:0,1,0,1"), Metric::euclidean(2), 1),
                 InvalidArgument);
    // Indefinite metric rejected up front.
    EXPECT_THROW(build_grid(Domain::parse("box:0,1,0,1"), Metric::parse("1; 0; 0; -1", 2), 10),
                 Error);
    // Anisotropic resolutions are allowed.
    const Grid g = build_grid(Domain::parse("box:0,2,0,1"), Metric::euclidean(2),
                              std::vector<std::size_t>{40, 20});
    EXPECT_NEAR(g.total_weight(), 2.0, 1e-12);
    EXPECT_EQ(g.size(), 800u);
}

TEST(ParallelFor, WorkerCountInvariance) {
    const std::size_t n = 40000;
    std::vector<double> one(n), five(n);
    const auto fill = [](std::vector<double>& out) {
        return [&out](std::size_t i) {
            const double x = 1e-3 * double(i);
            out[i] = std::sin(x) * std::exp(-x * 0.1);
        };
    };
    parallel_for(n, fill(one), 1);
    parallel_for(n, fill(five), 5);
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(one[i], five[i]);
    ASSERT_EQ(pairwise_sum(one), pairwise_sum(five));
}

}  // namespace
}  // namespace vfspec
