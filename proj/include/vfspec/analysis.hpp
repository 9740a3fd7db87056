#pragma once

// Quadrature realizations of the L2 and H1 inner products, the sup norm of
// a vector field, and the Rayleigh quotient ||Xf||_L2 / ||f||_H1 used to
// check the operator-norm bound against ||X||_inf.
//
// All reductions go through pairwise_sum over index-addressed buffers, so
// results are bit-identical for any worker count.

#include <vector>

#include "vfspec/calculus.hpp"
#include "vfspec/error.hpp"
#include "vfspec/geometry.hpp"
#include "vfspec/util.hpp"

namespace vfspec {

inline double l2_inner(const ScalarField& f, const ScalarField& h, const Grid& grid) {
    std::vector<double> terms(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const Vec& p = grid.points()[i];
        terms[i] = grid.weights()[i] * f.eval(p) * h.eval(p);
    });
    return pairwise_sum(terms);
}

/// g(grad f, grad h) at p equals g^{kl} d_k f d_l h.
inline double gradient_pairing(const Metric& m, const DualValue& df, const DualValue& dh,
                               std::span<const double> p) {
    const std::size_t n = m.dimension();
    double s = 0.0;
    if (m.is_euclidean()) {
        for (std::size_t k = 0; k < n; ++k) s += df.partials[k] * dh.partials[k];
        return s;
    }
    const Mat ginv = mat_inverse(m.evaluate(p));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) s += ginv.at(k, l) * df.partials[k] * dh.partials[l];
    return s;
}

inline double h1_inner(const ScalarField& f, const ScalarField& h, const Metric& m,
                       const Grid& grid) {
    std::vector<double> terms(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const Vec& p = grid.points()[i];
        const DualValue df = f.eval_dual(p);
        const DualValue dh = h.eval_dual(p);
        terms[i] = grid.weights()[i] *
                   (df.value * dh.value + gradient_pairing(m, df, dh, p));
    });
    return pairwise_sum(terms);
}

inline double l2_norm(const ScalarField& f, const Grid& grid) {
    return std::sqrt(std::max(0.0, l2_inner(f, f, grid)));
}

inline double h1_norm(const ScalarField& f, const Metric& m, const Grid& grid) {
    return std::sqrt(std::max(0.0, h1_inner(f, f, m, grid)));
}

/// max over the grid of sqrt(g_ij X^i X^j). On non-compact domains this is
/// a lower estimate taken over the guarded region (see NormReport flag).
inline double sup_norm_field(const VectorField& X, const Metric& m, const Grid& grid) {
    if (grid.size() == 0) throw InvalidArgument("sup norm needs a nonempty grid");
    std::vector<double> lengths(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const Vec& p = grid.points()[i];
        const Vec x = X.eval(p);
        double len2 = 0.0;
        if (m.is_euclidean()) {
            for (std::size_t k = 0; k < x.size(); ++k) len2 += x[k] * x[k];
        } else {
            const Mat g = m.evaluate(p);
            for (std::size_t a = 0; a < x.size(); ++a)
                for (std::size_t b = 0; b < x.size(); ++b) len2 += g.at(a, b) * x[a] * x[b];
        }
        lengths[i] = std::sqrt(std::max(0.0, len2));
    });
    double best = 0.0;
    for (double v : lengths) best = std::max(best, v);
    return best;
}

/// ||Xf||_L2 / ||f||_H1. The H1 denominator must be positive.
inline double rayleigh_quotient(const VectorField& X, const ScalarField& f, const Metric& m,
                                const Grid& grid) {
    const double denom = h1_norm(f, m, grid);
    if (!(denom > 0.0)) throw Error("Rayleigh quotient needs ||f||_H1 > 0");
    std::vector<double> terms(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const Vec& p = grid.points()[i];
        const double xf = apply_field(X, f, p);
        terms[i] = grid.weights()[i] * xf * xf;
    });
    return std::sqrt(std::max(0.0, pairwise_sum(terms))) / denom;
}

/// Bundle emitted by the norms subcommand. `bound_slack` is the quadrature
/// allowance in rayleigh <= sup_norm * (1 + bound_slack).
struct NormReport {
    double l2 = 0.0;
    double h1 = 0.0;
    double sup_norm_x = 0.0;
    double rayleigh = 0.0;
    bool bound_satisfied = false;
    bool sup_norm_is_estimate = false;  // non-compact domain: max over guarded grid only
    std::vector<std::size_t> resolution;
};

inline constexpr double kBoundSlack = 2e-2;

inline NormReport compute_norms(const VectorField& X, const ScalarField& f, const Metric& m,
                                const Grid& grid) {
    NormReport r;
    r.l2 = l2_norm(f, grid);
    r.h1 = h1_norm(f, m, grid);
    r.sup_norm_x = sup_norm_field(X, m, grid);
    r.rayleigh = rayleigh_quotient(X, f, m, grid);
    r.bound_satisfied = r.rayleigh <= r.sup_norm_x * (1.0 + kBoundSlack);
    r.sup_norm_is_estimate = !grid.domain().compact();
    r.resolution = grid.resolution();
    return r;
}

}  // namespace vfspec
