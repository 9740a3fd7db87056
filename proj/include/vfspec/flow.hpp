#pragma once

// Integral curves of vector fields by classical fixed-step 4th-order
// one-step integration, with domain-exit bracketing for non-complete
// domains, coordinate wrapping on tori, and first-return period detection.

#include <optional>
#include <vector>

#include "vfspec/calculus.hpp"
#include "vfspec/error.hpp"
#include "vfspec/geometry.hpp"

namespace vfspec {

struct Trajectory {
    Domain domain;
    std::vector<double> times;   // uniform spacing dt, starting at 0
    std::vector<Vec> points;     // all members of the domain
    double dt = 0.0;
    bool exited = false;
    double exit_inside = 0.0;    // flow still inside at this time
    double exit_outside = 0.0;   // flow already outside at this time
    std::optional<double> period;

    const Vec& endpoint() const { return points.back(); }
    double end_time() const { return times.back(); }
};

namespace detail {

inline Vec rk4_step(const VectorField& X, const Vec& p, double h) {
    const std::size_t n = p.size();
    auto shift = [n](const Vec& base, const Vec& dir, double s) {
        Vec out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + s * dir[i];
        return out;
    };
    const Vec k1 = X.eval(p);
    const Vec k2 = X.eval(shift(p, k1, h / 2));
    const Vec k3 = X.eval(shift(p, k2, h / 2));
    const Vec k4 = X.eval(shift(p, k3, h));
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// Shrinks the step from p at time t until the exit time is bracketed
/// within |h|/16. p is a member; a full step of h is not.
inline std::pair<double, double> bracket_exit(const VectorField& X, const Domain& d,
                                              const Vec& p, double t, double h) {
    double lo = 0.0, hi = h;
    while (std::abs(hi - lo) > std::abs(h) / 16.0) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (d.membership(rk4_step(X, p, mid))) lo = mid;
        else hi = mid;
    }
    return {t + lo, t + hi};
}

}  // namespace detail

/// Integrates from x0 with uniform step dt until t_max or domain exit.
/// Periodic-box coordinates wrap after every step.
inline Trajectory integrate(const VectorField& X, std::span<const double> x0, double t_max,
                            double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(t_max >= 0.0)) throw InvalidArgument("t_max must be nonnegative");
    const Domain& d = X.domain();
    Vec p = d.wrap(x0);
    if (!d.membership(p)) throw InvalidArgument("initial point is outside the domain");

    Trajectory traj;
    traj.domain = d;
    traj.dt = dt;
    const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-12));
    traj.times.reserve(steps + 1);
    traj.points.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.points.push_back(p);

    for (std::size_t i = 1; i <= steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * dt;
        Vec next = detail::rk4_step(X, p, dt);
        if (!d.membership(next)) {
            const auto [t_in, t_out] = detail::bracket_exit(X, d, p, t_prev, dt);
            traj.exited = true;
            traj.exit_inside = t_in;
            traj.exit_outside = t_out;
            return traj;
        }
        p = d.wrap(next);
        traj.times.push_back(static_cast<double>(i) * dt);
        traj.points.push_back(p);
    }
    return traj;
}

/// Endpoint of the flow at time t (either sign). The step count is chosen
/// so a uniform step of magnitude ~dt lands on t exactly; a domain exit
/// raises FlowExitError carrying the bracket.
inline Vec flow_map(const VectorField& X, double t, std::span<const double> x, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    const Domain& d = X.domain();
    Vec p = d.wrap(x);
    if (!d.membership(p)) throw InvalidArgument("initial point is outside the domain");
    if (t == 0.0) return p;

    const auto steps = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(std::abs(t) / dt)));
    const double h = t / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t_prev = static_cast<double>(i) * h;
        Vec next = detail::rk4_step(X, p, h);
        if (!d.membership(next)) {
            const auto [t_in, t_out] = detail::bracket_exit(X, d, p, t_prev, h);
            throw FlowExitError(t_in, t_out);
        }
        p = d.wrap(next);
    }
    return p;
}

/// First-return scan for the smallest period T with ||Phi(T,x0) - x0|| < tol.
/// Local minima of the squared return distance are refined by the vertex of
/// the parabola through the three bracketing samples; the refined miss must
/// beat tol. Distances use the domain metric (shorter arc on tori).
inline std::optional<double> detect_period(const Trajectory& traj, double tol = 1e-5) {
    if (traj.exited || traj.points.size() < 4) return std::nullopt;
    const std::size_t n = traj.points.size();
    const Vec& x0 = traj.points[0];

    std::vector<double> dist(n);
    double max_dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = traj.domain.distance(traj.points[i], x0);
        max_dist = std::max(max_dist, dist[i]);
    }
    // Escape phase: wait until the orbit has moved a macroscopic fraction of
    // its diameter before accepting returns, so t=0 is not rediscovered.
    const double escape = std::max(100.0 * tol, 0.1 * max_dist);
    std::size_t start = 0;
    while (start < n && dist[start] < escape) ++start;
    if (start == n) return std::nullopt;

    for (std::size_t i = start + 1; i + 1 < n; ++i) {
        if (!(dist[i] <= dist[i - 1] && dist[i] <= dist[i + 1])) continue;
        const double y0 = dist[i - 1] * dist[i - 1];
        const double y1 = dist[i] * dist[i];
        const double y2 = dist[i + 1] * dist[i + 1];
        const double curv = y0 - 2.0 * y1 + y2;
        double t_star = traj.times[i];
        double miss2 = y1;
        if (curv > 0.0) {
            t_star += traj.dt * 0.5 * (y0 - y2) / curv;
            miss2 = y1 - (y0 - y2) * (y0 - y2) / (8.0 * curv);
        }
        if (std::sqrt(std::max(0.0, miss2)) < tol) return t_star;
    }
    return std::nullopt;
}

}  // namespace vfspec
