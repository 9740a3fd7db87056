// Quadrature norms against closed-form integrals, inner-product properties,
// and the operator-norm bound ||Xf|| <= ||X||_inf ||f||_H1 over a seeded
// function family with no counterexample allowed.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "vfspec/analysis.hpp"
#include "vfspec/families.hpp"

namespace vfspec {
namespace {

const Domain kUnit = Domain::parse("box:0,1,0,1");
const Metric kEu = Metric::euclidean(2);

TEST(Norms, ClosedFormOracles) {
    const Grid grid = build_grid(kUnit, kEu, 100);

    EXPECT_NEAR(l2_norm(ScalarField::parse("1", kUnit), grid), 1.0, 1e-12);

    // int x^2 = 1/3; midpoint error is O(h^2).
    const ScalarField fx = ScalarField::parse("x", kUnit);
    EXPECT_NEAR(l2_norm(fx, grid), std::sqrt(1.0 / 3.0), 1e-4);

    // ||x||_H1^2 = 1/3 + 1.
    EXPECT_NEAR(h1_norm(fx, kEu, grid), std::sqrt(4.0 / 3.0), 1e-4);

    // int over [0,1]^2 of sin(pi x)^2 = 1/2, |grad|^2 integrates to pi^2/2.
    const ScalarField s = ScalarField::parse("sin(pi*x)", kUnit);
    EXPECT_NEAR(l2_norm(s, grid), std::sqrt(0.5), 1e-4);
    EXPECT_NEAR(h1_norm(s, kEu, grid), std::sqrt(0.5 + kPi * kPi / 2.0), 1e-3);

    // Riemannian volume element enters the norm: g = diag(4, 4) doubles
    // lengths, so sqrt(det g) = 4 scales ||1||_L2 by 2.
    const Grid scaled = build_grid(kUnit, Metric::parse("4; 0; 0; 4", 2), 50);
    EXPECT_NEAR(l2_norm(ScalarField::parse("1", kUnit), scaled), 2.0, 1e-12);
}

TEST(Norms, InnerProductProperties) {
    const Grid grid = build_grid(kUnit, kEu, 60);
    const std::vector<ScalarField> family = box_family(kUnit, 99, 8);

    for (std::size_t a = 0; a < family.size(); ++a) {
        for (std::size_t b = a + 1; b < family.size(); ++b) {
            const double fg = l2_inner(family[a], family[b], grid);
            const double gf = l2_inner(family[b], family[a], grid);
            // w*f*h is left associated, so the swap reorders two roundings
            // per term; symmetry holds to quadrature roundoff.
            EXPECT_NEAR(fg, gf, 1e-13);

            // Cauchy-Schwarz in both products.
            EXPECT_LE(std::abs(fg),
                      l2_norm(family[a], grid) * l2_norm(family[b], grid) * (1 + 1e-12));
            const double h = h1_inner(family[a], family[b], kEu, grid);
            EXPECT_LE(std::abs(h), h1_norm(family[a], kEu, grid) *
                                       h1_norm(family[b], kEu, grid) * (1 + 1e-12));
        }
        EXPECT_LE(l2_norm(family[a], grid), h1_norm(family[a], kEu, grid) * (1 + 1e-15));
    }
}

TEST(Norms, SupNorm) {
    const Grid grid = build_grid(kUnit, kEu, 200);
    const VectorField rot = VectorField::parse("-y, x", kUnit);
    const double sup = sup_norm_field(rot, kEu, grid);
    EXPECT_LE(sup, std::sqrt(2.0));
    EXPECT_GE(sup, std::sqrt(2.0) * 0.99);  // midpoint grid stops short of the corner

    // Metric lengths, not chart lengths: diag(4,4) doubles the sup norm.
    const Grid scaled = build_grid(kUnit, Metric::parse("4; 0; 0; 4", 2), 100);
    EXPECT_NEAR(sup_norm_field(VectorField::parse("1, 0", kUnit), kEu, scaled), 1.0, 1e-12);
    EXPECT_NEAR(sup_norm_field(VectorField::parse("1, 0", kUnit),
                               Metric::parse("4; 0; 0; 4", 2), scaled),
                2.0, 1e-12);
}

TEST(Norms, RayleighBoundFamily50) {
    const Grid grid = build_grid(kUnit, kEu, 100);
    const VectorField rot = VectorField::parse("-y, x", kUnit);
    const double sup = sup_norm_field(rot, kEu, grid);
    const std::vector<ScalarField> family = box_family(kUnit, 42, 50);
    ASSERT_EQ(family.size(), 50u);
    for (const ScalarField& f : family) {
        const double q = rayleigh_quotient(rot, f, kEu, grid);
        EXPECT_LE(q, sup * (1.0 + kBoundSlack)) << f.spec();
    }
}

TEST(Norms, ReportBundle) {
    const Grid grid = build_grid(kUnit, kEu, 80);
    const VectorField rot = VectorField::parse("-y, x", kUnit);
    const NormReport r =
        compute_norms(rot, ScalarField::parse("sin(pi*x)*y", kUnit), kEu, grid);
    EXPECT_GT(r.l2, 0.0);
    EXPECT_GE(r.h1, r.l2);
    EXPECT_TRUE(r.bound_satisfied);
    EXPECT_TRUE(r.sup_norm_is_estimate);  // a chart box is not the compact case
    EXPECT_EQ(r.resolution, (std::vector<std::size_t>{80, 80}));

    EXPECT_THROW(rayleigh_quotient(rot, ScalarField::parse("0", kUnit), kEu, grid), Error);
}

}  // namespace
}  // namespace vfspec
