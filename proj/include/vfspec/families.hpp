#pragma once

// Seeded test-function families. The triviality battery draws periodic
// trigonometric polynomials (globally smooth on a torus); the operator-bound
// check draws polynomials of degree <= 3 with coefficients in [-1,1]
// alternating with sin/cos combinations on a box. A (seed, count) pair fully
// determines each family.

#include <cstdint>
#include <vector>

#include "vfspec/calculus.hpp"
#include "vfspec/expr.hpp"
#include "vfspec/geometry.hpp"
#include "vfspec/util.hpp"

namespace vfspec {
namespace detail {

/// c * prod over axes of sin/cos(k_i w_i (x_i - lo_i)), skipping axes with
/// k_i = 0. `w` is 2*pi/period for tori and pi/side for boxes.
inline Expr trig_term(const Domain& d, Rng& rng, double omega_scale) {
    const std::size_t n = d.dimension();
    Expr term = Expr::constant(rng.uniform(-1.0, 1.0));
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t k = rng.uniform_int(0, 3);
        const bool use_sin = rng.coin();
        if (k == 0 && i + 1 == n && !any) k = 1;
        if (k == 0) continue;
        any = true;
        const double w = omega_scale / d.period(i);
        Expr arg = Expr::variable(i, n);
        if (d.lo(i) != 0.0) arg = Expr::sub(std::move(arg), Expr::constant(d.lo(i)));
        arg = Expr::mul(Expr::constant(static_cast<double>(k) * w), std::move(arg));
        term = Expr::mul(std::move(term),
                         Expr::call(use_sin ? Func::Sin : Func::Cos, {std::move(arg)}));
    }
    return term;
}

/// All monomials of total degree <= max_degree with fresh coefficients.
inline Expr random_polynomial(const Domain& d, Rng& rng, std::size_t max_degree) {
    const std::size_t n = d.dimension();
    Expr sum = Expr::constant(rng.uniform(-1.0, 1.0));
    std::vector<std::size_t> exps(n, 0);
    const auto emit = [&](const std::vector<std::size_t>& e) {
        Expr mono = Expr::constant(rng.uniform(-1.0, 1.0));
        for (std::size_t i = 0; i < n; ++i) {
            if (e[i] == 0) continue;
            Expr v = Expr::variable(i, n);
            if (e[i] > 1)
                v = Expr::pow(std::move(v), Expr::constant(static_cast<double>(e[i])));
            mono = Expr::mul(std::move(mono), std::move(v));
        }
        sum = Expr::add(std::move(sum), std::move(mono));
    };
    // Enumerate multi-indices of total degree 1..max_degree in fixed order.
    const std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t axis,
                                                                  std::size_t budget) {
        if (axis == n) {
            std::size_t total = 0;
            for (std::size_t e : exps) total += e;
            if (total > 0) emit(exps);
            return;
        }
        for (std::size_t e = 0; e <= budget; ++e) {
            exps[axis] = e;
            rec(axis + 1, budget - e);
        }
        exps[axis] = 0;
    };
    rec(0, max_degree);
    return sum;
}

}  // namespace detail

/// Periodic trigonometric polynomials of degree <= 3 on a periodic box.
inline std::vector<ScalarField> trig_family(const Domain& d, std::uint64_t seed,
                                            std::size_t count) {
    if (!d.periodic()) throw InvalidArgument("trig family needs a periodic-box domain");
    Rng rng(seed);
    std::vector<ScalarField> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        Expr f = Expr::constant(rng.uniform(-1.0, 1.0));
        for (int term = 0; term < 4; ++term)
            f = Expr::add(std::move(f), detail::trig_term(d, rng, 2.0 * kPi));
        out.emplace_back(std::move(f), d);
    }
    return out;
}

/// Alternating degree-<=3 polynomials and sin/cos combinations on a box.
inline std::vector<ScalarField> box_family(const Domain& d, std::uint64_t seed,
                                           std::size_t count) {
    if (d.shape() != Shape::Box) throw InvalidArgument("box family needs a box domain");
    Rng rng(seed);
    std::vector<ScalarField> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        if (j % 2 == 0) {
            out.emplace_back(detail::random_polynomial(d, rng, 3), d);
        } else {
            Expr f = Expr::constant(rng.uniform(-1.0, 1.0));
            for (int term = 0; term < 3; ++term)
                f = Expr::add(std::move(f), detail::trig_term(d, rng, kPi));
            out.emplace_back(std::move(f), d);
        }
    }
    return out;
}

}  // namespace vfspec
