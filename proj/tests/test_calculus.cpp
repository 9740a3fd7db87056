// Differential operators against hand computations: field application,
// metric gradients, Lie brackets, Lie derivatives of metrics, covariant
// derivatives through Christoffel symbols, pushforwards, and the
// Killing/homothetic/concurrent classifier.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "vfspec/calculus.hpp"
#include "vfspec/geometry.hpp"

namespace vfspec {
namespace {

const Domain kBox = Domain::parse("box:-2,2,-2,2");
const Metric kEu = Metric::euclidean(2);

TEST(Fields, ParseAndApply) {
    const VectorField rot = VectorField::parse("-y, x", kBox);
    const ScalarField len = ScalarField::parse("x^2 + y^2", kBox);
    const std::vector<double> p{0.7, -1.2};
    EXPECT_DOUBLE_EQ(apply_field(rot, len, p), 0.0);  // rotation kills the length

    const VectorField rad = VectorField::parse("x, y", kBox);
    // X.r^2 = 2 r^2.
    EXPECT_DOUBLE_EQ(apply_field(rad, len, p), 2.0 * (0.49 + 1.44));

    // Component splitting respects parentheses around commas.
    const VectorField tricky = VectorField::parse("atan2(x, y), x + 1", kBox);
    const Vec v = tricky.eval(std::vector<double>{1.0, 1.0});
    EXPECT_DOUBLE_EQ(v[0], kPi / 4);
    EXPECT_DOUBLE_EQ(v[1], 2.0);

    // Wrong arity is a semantic error, empty pieces are syntax errors.
    EXPECT_THROW(VectorField::parse("x", kBox), InvalidArgument);
    EXPECT_THROW(VectorField::parse("x, y, x", kBox), InvalidArgument);
    EXPECT_THROW(VectorField::parse("x, ", kBox), ParseError);
}

TEST(Gradient, MetricInverseApplied) {
    const ScalarField len = ScalarField::parse("x^2 + y^2", kBox);
    const Vec g = gradient(kEu, len, std::vector<double>{1.0, 2.0});
    EXPECT_DOUBLE_EQ(g[0], 2.0);
    EXPECT_DOUBLE_EQ(g[1], 4.0);

    // diag(1, r^2) chart: grad of the angle coordinate is (0, 1/r^2).
    const Metric polar = Metric::parse("1; 0; 0; x^2", 2);
    const ScalarField theta = ScalarField::parse("y", kBox);
    const Vec gp = gradient(polar, theta, std::vector<double>{2.0, 0.7});
    EXPECT_DOUBLE_EQ(gp[0], 0.0);
    EXPECT_DOUBLE_EQ(gp[1], 0.25);
}

TEST(LieBracket, HandOracles) {
    const VectorField rot = VectorField::parse("-y, x", kBox);
    const VectorField rad = VectorField::parse("x, y", kBox);
    const std::vector<double> p{0.8, -0.3};
    const Vec zero = lie_bracket(rot, rad, p);
    EXPECT_NEAR(zero[0], 0.0, 1e-15);
    EXPECT_NEAR(zero[1], 0.0, 1e-15);

    // [ (y,0), (0,x) ] = (-x, y).
    const VectorField a = VectorField::parse("y, 0", kBox);
    const VectorField b = VectorField::parse("0, x", kBox);
    const Vec c = lie_bracket(a, b, p);
    EXPECT_DOUBLE_EQ(c[0], -0.8);
    EXPECT_DOUBLE_EQ(c[1], -0.3);
}

TEST(LieDerivative, MetricOracles) {
    const std::vector<double> p{0.5, -1.1};
    // Rotations are isometries of the plane.
    const Mat zero = lie_derivative_metric(VectorField::parse("-y, x", kBox), kEu, p);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(zero.at(i, j), 0.0, 1e-15);

    // Position field: L_X g = 2 g.
    const Mat two = lie_derivative_metric(VectorField::parse("x, y", kBox), kEu, p);
    EXPECT_DOUBLE_EQ(two.at(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(two.at(1, 1), 2.0);
    EXPECT_DOUBLE_EQ(two.at(0, 1), 0.0);

    // Curved metric diag(1+x^2, 1) with X = (x, 0):
    // (L_X g)_xx = 2x^2 + 2(1+x^2) = 2 + 4x^2, other entries 0.
    const Metric curved = Metric::parse("1 + x^2; 0; 0; 1", 2);
    const Mat l = lie_derivative_metric(VectorField::parse("x, 0", kBox), curved, p);
    EXPECT_NEAR(l.at(0, 0), 2.0 + 4.0 * 0.25, 1e-12);
    EXPECT_NEAR(l.at(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(l.at(1, 1), 0.0, 1e-12);
}

TEST(CovariantDerivative, ChristoffelTerms) {
    // Euclidean position field reproduces every direction: nabla_Y X = Y.
    const VectorField pos = VectorField::parse("x, y", kBox);
    const VectorField dir = VectorField::parse("0.3, -0.9", kBox);
    const Vec d = covariant_derivative(dir, pos, kEu, std::vector<double>{1.0, 1.0});
    EXPECT_DOUBLE_EQ(d[0], 0.3);
    EXPECT_DOUBLE_EQ(d[1], -0.9);

    // Polar chart: nabla_{d_r} d_theta = (1/r) d_theta.
    const Metric polar = Metric::parse("1; 0; 0; x^2", 2);
    const VectorField dtheta = VectorField::parse("0, 1", kBox);
    const VectorField dr = VectorField::parse("1, 0", kBox);
    const Vec cd = covariant_derivative(dr, dtheta, polar, std::vector<double>{2.0, 0.7});
    EXPECT_NEAR(cd[0], 0.0, 1e-12);
    EXPECT_NEAR(cd[1], 0.5, 1e-12);
}

TEST(Pushforward, JacobianAtPreimage) {
    const Domain target = Domain::parse("box:1,5,-2,2");
    const DiffeoMap shift = DiffeoMap::parse("x + 3, y", "x - 3, y", kBox, target);
    const VectorField pos = VectorField::parse("x, y", kBox);
    const Vec v = shift.forward(std::vector<double>{0.5, 0.5});
    EXPECT_DOUBLE_EQ(v[0], 3.5);
    const Vec push = pushforward(shift, pos, std::vector<double>{3.5, 0.5});
    EXPECT_DOUBLE_EQ(push[0], 0.5);  // field translated, not re-read at q
    EXPECT_DOUBLE_EQ(push[1], 0.5);

    // The antipodal map preserves the rotation field.
    const DiffeoMap anti = DiffeoMap::parse("-x, -y", "-x, -y", kBox, kBox);
    const VectorField rot = VectorField::parse("-y, x", kBox);
    const Vec q{1.0, 0.5};
    const Vec pushed = pushforward(anti, rot, q);
    EXPECT_DOUBLE_EQ(pushed[0], -0.5);
    EXPECT_DOUBLE_EQ(pushed[1], 1.0);
}

TEST(DiffeoMap, RoundTripValidation) {
    const std::vector<Vec> src{Vec{0.5, 0.5}, Vec{-1.0, 1.5}};
    const std::vector<Vec> dst{Vec{1.5, 0.5}, Vec{-0.25, 1.0}};
    const DiffeoMap ok = DiffeoMap::parse("x + 1, y", "x - 1, y", kBox, kBox);
    EXPECT_NO_THROW(ok.check_roundtrip(src, dst));

    const DiffeoMap bad = DiffeoMap::parse("x + 1, y", "x - 2, y", kBox, kBox);
    EXPECT_THROW(bad.check_roundtrip(src, dst), Error);

    EXPECT_THROW(DiffeoMap::parse("x + 1, y", "x - 1, y", kBox,
                                  Domain::parse("box:0,1,0,1,0,1")),
                 Error);
}

TEST(Classify, VerdictsAndConstants) {
    const Grid grid = build_grid(kBox, kEu, 60);

    const ClassificationReport killing =
        classify(VectorField::parse("-y, x", kBox), kEu, grid);
    EXPECT_EQ(killing.verdict, FieldClass::Killing);
    EXPECT_LT(killing.killing_residual, 1e-12);

    const ClassificationReport conc =
        classify(VectorField::parse("x, y", kBox), kEu, grid);
    EXPECT_EQ(conc.verdict, FieldClass::Concurrent);
    EXPECT_DOUBLE_EQ(conc.fitted_c, 1.0);
    EXPECT_LT(conc.concurrent_residual, 1e-12);
    EXPECT_LT(conc.homothetic_residual, 1e-12);

    // Spiral field: L_X g = 2g exactly, but nabla X has a rotation part,
    // so the verdict is homothetic with c = 1 and not concurrent.
    const ClassificationReport spiral =
        classify(VectorField::parse("x + y, y - x", kBox), kEu, grid);
    EXPECT_EQ(spiral.verdict, FieldClass::Homothetic);
    EXPECT_DOUBLE_EQ(spiral.fitted_c, 1.0);
    // nabla_Y X - Y = rotation matrix applied to Y: unit-size residual.
    EXPECT_GE(spiral.concurrent_residual, 1.0);

    const ClassificationReport none =
        classify(VectorField::parse("x, -y", kBox), kEu, grid);
    EXPECT_EQ(none.verdict, FieldClass::None);

    EXPECT_EQ(to_string(FieldClass::Killing), "killing");
    EXPECT_EQ(to_string(FieldClass::Homothetic), "homothetic");
    EXPECT_EQ(to_string(FieldClass::Concurrent), "concurrent");
    EXPECT_EQ(to_string(FieldClass::None), "none");
}

TEST(Classify, CurvedMetricKilling) {
    // Rotation is Killing for any radially symmetric metric; use
    // conformal factor 1/(1+r^2)^2 (a stereographic-style chart).
    const Metric conf =
        Metric::parse("1/(1 + x^2 + y^2)^2; 0; 0; 1/(1 + x^2 + y^2)^2", 2);
    const Grid grid = build_grid(kBox, conf, 40);
    const ClassificationReport r = classify(VectorField::parse("-y, x", kBox), conf, grid);
    EXPECT_EQ(r.verdict, FieldClass::Killing);
    EXPECT_LT(r.killing_residual, 1e-12);
}

}  // namespace
}  // namespace vfspec
