#pragma once

// Point-spectrum machinery: residual verification of eigenpairs Xf = lambda f,
// eigenvalue estimation from the exponential flow law, eigenvalue chains on
// powers, eigenspace dimension probing, the compact-triviality battery,
// critical-point contradiction evidence, and transport of eigenpairs across
// isometries and commuting fields.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vfspec/analysis.hpp"
#include "vfspec/calculus.hpp"
#include "vfspec/error.hpp"
#include "vfspec/expr.hpp"
#include "vfspec/flow.hpp"
#include "vfspec/geometry.hpp"
#include "vfspec/util.hpp"

namespace vfspec {

/// Residual evidence for one (X, f, lambda) triple over a grid.
/// verdict <=> all values finite and max_rel_residual < tol, where the
/// relative residual is |Xf - lambda f| / (1 + |f|); the 1+ keeps
/// exponentially large eigenfunctions comparable.
struct EigenpairReport {
    double lambda = 0.0;
    double max_abs_residual = 0.0;
    double max_rel_residual = 0.0;
    std::size_t samples = 0;
    bool verdict = false;
    bool all_finite = true;
    double min_abs_f = 0.0;  // 0 means f vanishes somewhere on the grid
    double max_abs_f = 0.0;
};

/// Pointwise samples of f and X.f over a grid, computed once and shared by
/// every candidate lambda.
struct ActionSamples {
    std::vector<double> f;
    std::vector<double> xf;
};

inline ActionSamples field_action_samples(const VectorField& X, const ScalarField& f,
                                          const Grid& grid) {
    ActionSamples s;
    s.f.resize(grid.size());
    s.xf.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const Vec& p = grid.points()[i];
        const Vec x = X.eval(p);
        const DualValue df = f.eval_dual(p);
        s.f[i] = df.value;
        double xf = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) xf += x[k] * df.partials[k];
        s.xf[i] = xf;
    });
    return s;
}

inline EigenpairReport report_from_samples(double lambda, const ActionSamples& s, double tol) {
    if (s.f.empty()) throw InvalidArgument("verification needs a nonempty grid");
    EigenpairReport r;
    r.lambda = lambda;
    r.samples = s.f.size();
    r.min_abs_f = std::abs(s.f[0]);
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        const double fv = s.f[i], xfv = s.xf[i];
        if (!std::isfinite(fv) || !std::isfinite(xfv)) {
            r.all_finite = false;
            continue;
        }
        const double res = std::abs(xfv - lambda * fv);
        r.max_abs_residual = std::max(r.max_abs_residual, res);
        r.max_rel_residual = std::max(r.max_rel_residual, res / (1.0 + std::abs(fv)));
        r.min_abs_f = std::min(r.min_abs_f, std::abs(fv));
        r.max_abs_f = std::max(r.max_abs_f, std::abs(fv));
    }
    if (!(r.max_abs_f > 1e-14))
        throw Error("function is numerically zero on the grid; the zero function is excluded");
    r.verdict = r.all_finite && r.max_rel_residual < tol;
    return r;
}

/// Checks Xf = lambda f over the grid by AD-exact residuals.
inline EigenpairReport verify_eigenpair(const VectorField& X, const ScalarField& f,
                                        double lambda, const Grid& grid, double tol = 1e-8) {
    return report_from_samples(lambda, field_action_samples(X, f, grid), tol);
}

/// Eigenvalue chain: verifies (f^k, k*lambda) for k = 1..k_max. A report
/// with all_finite == false marks overflow of f^k at that k.
inline std::vector<EigenpairReport> power_chain_verify(const VectorField& X,
                                                       const ScalarField& f, double lambda,
                                                       std::size_t k_max, const Grid& grid,
                                                       double tol = 1e-8) {
    if (k_max < 1) throw InvalidArgument("k_max must be at least 1");
    std::vector<EigenpairReport> out;
    out.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        const ScalarField fk(
            k == 1 ? f.expr()
                   : Expr::pow(f.expr(), Expr::constant(static_cast<double>(k))),
            f.domain());
        out.push_back(
            verify_eigenpair(X, fk, static_cast<double>(k) * lambda, grid, tol));
    }
    return out;
}

/// Numerical rank of {1, f, f^2, ..., f^{k_max}} in the weighted L2 inner
/// product of the grid, by modified Gram-Schmidt in extended precision with
/// two orthogonalization passes and a relative drop tolerance.
inline std::size_t power_rank(const ScalarField& f, std::size_t k_max, const Grid& grid,
                              double drop_tol = 1e-8) {
    if (k_max > 5) throw InvalidArgument("k_max above 5 rejected: powers too ill-conditioned");
    const std::size_t n = grid.size();
    if (n == 0) throw InvalidArgument("rank probe needs a nonempty grid");

    std::vector<double> fv(n);
    parallel_for(n, [&](std::size_t i) { fv[i] = f.eval(grid.points()[i]); });

    const auto dot = [&](const std::vector<long double>& a, const std::vector<long double>& b) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < n; ++i)
            s += static_cast<long double>(grid.weights()[i]) * a[i] * b[i];
        return s;
    };

    std::vector<std::vector<long double>> basis;
    std::size_t rank = 0;
    std::vector<long double> col(n, 1.0L);
    for (std::size_t k = 0; k <= k_max; ++k) {
        if (k > 0)
            for (std::size_t i = 0; i < n; ++i) col[i] *= static_cast<long double>(fv[i]);
        std::vector<long double> c = col;
        const long double norm0 = std::sqrt(dot(c, c));
        if (!(norm0 > 0.0L) || !std::isfinite(static_cast<double>(norm0)))
            throw Error("power overflow or zero column in the rank probe");
        for (std::size_t i = 0; i < n; ++i) c[i] /= norm0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) {
                const long double proj = dot(c, q);
                for (std::size_t i = 0; i < n; ++i) c[i] -= proj * q[i];
            }
        const long double res = std::sqrt(std::max<long double>(0.0L, dot(c, c)));
        if (static_cast<double>(res) > drop_tol) {
            for (std::size_t i = 0; i < n; ++i) c[i] /= res;
            basis.push_back(std::move(c));
            ++rank;
        }
    }
    return rank;
}

enum class DimVerdict { Dim1, DimInfinityEvidence, Inconclusive };

inline std::string to_string(DimVerdict v) {
    switch (v) {
        case DimVerdict::Dim1: return "dim1";
        case DimVerdict::DimInfinityEvidence: return "dimInfinityEvidence";
        case DimVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct DimProbeReport {
    std::size_t rank = 0;
    std::size_t k_max = 0;
    DimVerdict verdict = DimVerdict::Inconclusive;
    bool in_kernel = false;        // verify_eigenpair(X, f, 0) verdict
    double kernel_residual = 0.0;  // its max relative residual
};

/// Rank evidence for the dim E_0 dichotomy: a kernel function that is not
/// numerically constant makes {1, f, ..., f^{k_max}} independent, so full
/// rank is infinite-dimension evidence, rank 1 means f is constant, and
/// anything between is inconclusive (conditioning, not theory).
inline DimProbeReport eigenspace_dim_probe(const VectorField& X, const ScalarField& f,
                                           std::size_t k_max, const Grid& grid,
                                           double tol = 1e-8) {
    DimProbeReport r;
    r.k_max = k_max;
    r.rank = power_rank(f, k_max, grid);
    const EigenpairReport kernel = verify_eigenpair(X, f, 0.0, grid, tol);
    r.in_kernel = kernel.verdict;
    r.kernel_residual = kernel.max_rel_residual;
    if (r.rank <= 1) r.verdict = DimVerdict::Dim1;
    else if (r.rank == k_max + 1) r.verdict = DimVerdict::DimInfinityEvidence;
    else r.verdict = DimVerdict::Inconclusive;
    return r;
}

/// Flow-law sampling report: lambda_hat is absent when f vanishes or
/// changes sign along the orbit (the law forces constant sign).
struct EstimateReport {
    std::optional<double> lambda_hat;
    double regression_rms = 0.0;
    bool sign_consistent = false;
    std::size_t samples_used = 0;
    bool truncated_by_exit = false;
    double t_end = 0.0;
    double dt = 0.0;
    Vec x0;
};

namespace detail {

/// Trajectory plus f sampled along it; shared by estimation and the
/// flow-law check. Requires at least 20 samples after any exit truncation.
struct OrbitSamples {
    Trajectory traj;
    std::vector<double> f_values;
};

inline OrbitSamples sample_orbit(const VectorField& X, const ScalarField& f,
                                 std::span<const double> x0, double t_max, double dt) {
    OrbitSamples s{integrate(X, x0, t_max, dt), {}};
    if (s.traj.points.size() < 20)
        throw Error(s.traj.exited ? "domain exit left fewer than 20 samples"
                                  : "t_max/dt gives fewer than 20 samples");
    s.f_values.resize(s.traj.points.size());
    for (std::size_t i = 0; i < s.traj.points.size(); ++i)
        s.f_values[i] = f.eval(s.traj.points[i]);
    return s;
}

}  // namespace detail

/// Fits ln|f| along the orbit of X from x0: under the flow law
/// f(Phi(t,x)) = f(x) e^{lambda t}, the slope recovers lambda.
inline EstimateReport estimate_eigenvalue(const VectorField& X, const ScalarField& f,
                                          std::span<const double> x0, double t_max,
                                          double dt = 1e-3) {
    const detail::OrbitSamples s = detail::sample_orbit(X, f, x0, t_max, dt);
    EstimateReport r;
    r.samples_used = s.f_values.size();
    r.truncated_by_exit = s.traj.exited;
    r.t_end = s.traj.end_time();
    r.dt = dt;
    r.x0 = Vec(x0);

    const double f0 = s.f_values[0];
    if (f0 == 0.0) throw Error("f(x0) must be nonzero for flow-law estimation");
    const double sign = f0 > 0.0 ? 1.0 : -1.0;
    r.sign_consistent =
        std::all_of(s.f_values.begin(), s.f_values.end(),
                    [sign](double v) { return std::isfinite(v) && sign * v > 0.0; });
    if (!r.sign_consistent) return r;

    const std::size_t n = s.f_values.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::log(std::abs(s.f_values[i]));
    const double t_mean = pairwise_sum(s.traj.times) / static_cast<double>(n);
    const double z_mean = pairwise_sum(z) / static_cast<double>(n);
    std::vector<double> stz(n), stt(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double td = s.traj.times[i] - t_mean;
        stz[i] = td * (z[i] - z_mean);
        stt[i] = td * td;
    }
    const double slope = pairwise_sum(stz) / pairwise_sum(stt);
    r.lambda_hat = slope;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = z_mean + slope * (s.traj.times[i] - t_mean);
        sq[i] = (z[i] - fit) * (z[i] - fit);
    }
    r.regression_rms = std::sqrt(pairwise_sum(sq) / static_cast<double>(n));
    return r;
}

/// Max over the orbit of |f(Phi(t,x0)) - f(x0) e^{lambda t}| scaled by
/// 1 + |f(x0) e^{lambda t}|.
inline double flow_law_check(const VectorField& X, const ScalarField& f, double lambda,
                             std::span<const double> x0, double t_max, double dt = 1e-3) {
    const detail::OrbitSamples s = detail::sample_orbit(X, f, x0, t_max, dt);
    const double f0 = s.f_values[0];
    double dev = 0.0;
    for (std::size_t i = 0; i < s.f_values.size(); ++i) {
        const double expected = f0 * std::exp(lambda * s.traj.times[i]);
        dev = std::max(dev,
                       std::abs(s.f_values[i] - expected) / (1.0 + std::abs(expected)));
    }
    return dev;
}

struct ScanEntry {
    double lambda = 0.0;
    bool verdict = false;
    double residual = 0.0;
};

struct SpectralScanReport {
    std::vector<ScanEntry> entries;  // sorted by lambda ascending
    std::string field_spec;
    std::string function_spec;
    std::string domain_spec;
    std::size_t violations = 0;  // battery only: verified eigenpairs that the
                                 // compactness theorem forbids
};

/// Substitutes a numeric value for the whole word "lambda" so scans can use
/// candidate-dependent eigenfunction templates like "exp(lambda*atan(y/x))".
inline std::string substitute_lambda(std::string_view text, double value) {
    const std::string token = "lambda";
    const std::string repl = "(" + detail::format_double(value) + ")";
    std::string out;
    std::size_t i = 0;
    const auto word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    while (i < text.size()) {
        if (text.compare(i, token.size(), token) == 0 &&
            (i == 0 || !word_char(text[i - 1])) &&
            (i + token.size() >= text.size() || !word_char(text[i + token.size()]))) {
            out += repl;
            i += token.size();
        } else {
            out += text[i++];
        }
    }
    return out;
}

/// Verifies a list of candidate eigenvalues against a function template that
/// may reference "lambda".
inline SpectralScanReport scan_candidates(const VectorField& X,
                                          std::string_view function_template,
                                          std::vector<double> lambdas, const Grid& grid,
                                          double tol = 1e-8) {
    std::sort(lambdas.begin(), lambdas.end());
    SpectralScanReport report;
    report.field_spec = X.spec();
    report.function_spec = std::string(function_template);
    report.domain_spec = X.domain().spec();
    for (double lambda : lambdas) {
        const ScalarField f =
            ScalarField::parse(substitute_lambda(function_template, lambda), X.domain());
        const EigenpairReport r = verify_eigenpair(X, f, lambda, grid, tol);
        report.entries.push_back({lambda, r.verdict, r.max_rel_residual});
    }
    return report;
}

namespace detail {

/// True when the field numerically vanishes on the outermost cell band of
/// the grid's bounding box (compact support at grid scale).
inline bool vanishes_on_boundary_band(const VectorField& X, const Grid& grid) {
    const Domain& d = grid.domain();
    const std::size_t n = d.dimension();
    Vec width(n);
    for (std::size_t i = 0; i < n; ++i)
        width[i] = (d.hi(i) - d.lo(i)) / static_cast<double>(grid.resolution()[i]);
    double worst = 0.0;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const Vec& p = grid.points()[idx];
        bool band = false;
        for (std::size_t i = 0; i < n; ++i)
            band = band || p[i] - d.lo(i) < 1.5 * width[i] || d.hi(i) - p[i] < 1.5 * width[i];
        if (!band) continue;
        const Vec x = X.eval(p);
        for (double c : x) worst = std::max(worst, std::abs(c));
    }
    return worst <= 1e-12;
}

}  // namespace detail

/// Compactness battery: on a compact domain (or for a compactly supported
/// field), no nonzero candidate may verify against any test function, while
/// lambda = 0 must verify with f = 1. Entry verdict records whether any test
/// function verified at that candidate; `violations` counts verified
/// nonzero-lambda pairs plus a failed lambda = 0 baseline.
inline SpectralScanReport triviality_battery(const VectorField& X,
                                             std::vector<double> candidates,
                                             const std::vector<ScalarField>& test_functions,
                                             const Grid& grid, double tol = 1e-8) {
    if (!grid.domain().compact() && !detail::vanishes_on_boundary_band(X, grid))
        throw InvalidArgument(
            "battery needs a compact domain or a compactly supported field");
    std::sort(candidates.begin(), candidates.end());

    SpectralScanReport report;
    report.field_spec = X.spec();
    report.function_spec =
        "seeded family (" + std::to_string(test_functions.size()) + " functions)";
    report.domain_spec = grid.domain().spec();

    std::vector<ActionSamples> samples;
    samples.reserve(test_functions.size());
    for (const ScalarField& f : test_functions)
        samples.push_back(field_action_samples(X, f, grid));
    const ScalarField one(Expr::constant(1.0), grid.domain());
    const ActionSamples one_samples = field_action_samples(X, one, grid);

    for (double lambda : candidates) {
        ScanEntry entry{lambda, false, std::numeric_limits<double>::infinity()};
        if (lambda == 0.0) {
            const EigenpairReport r = report_from_samples(0.0, one_samples, tol);
            entry.verdict = r.verdict;
            entry.residual = r.max_rel_residual;
            if (!r.verdict) ++report.violations;
        } else {
            for (const ActionSamples& s : samples) {
                const EigenpairReport r = report_from_samples(lambda, s, tol);
                entry.residual = std::min(entry.residual, r.max_rel_residual);
                if (r.verdict) {
                    entry.verdict = true;
                    ++report.violations;
                }
            }
        }
        report.entries.push_back(entry);
    }
    return report;
}

/// Extremum evidence: at a grid argmax/argmin of f, X.f is near zero, so a
/// genuine eigenpair with nonzero lambda would force lambda f = 0 there.
struct CriticalPointReport {
    Vec argmax, argmin;
    double f_max = 0.0, f_min = 0.0;
    double xf_at_max = 0.0, xf_at_min = 0.0;
    double lambda_f_at_max = 0.0, lambda_f_at_min = 0.0;
    bool contradiction = false;
};

inline CriticalPointReport critical_point_check(const VectorField& X, const ScalarField& f,
                                                double lambda, const Grid& grid) {
    if (!grid.domain().compact())
        throw InvalidArgument("critical-point check needs a compact domain");
    const ActionSamples s = field_action_samples(X, f, grid);
    std::size_t imax = 0, imin = 0;
    for (std::size_t i = 1; i < s.f.size(); ++i) {
        if (s.f[i] > s.f[imax]) imax = i;
        if (s.f[i] < s.f[imin]) imin = i;
    }
    CriticalPointReport r;
    r.argmax = grid.points()[imax];
    r.argmin = grid.points()[imin];
    r.f_max = s.f[imax];
    r.f_min = s.f[imin];
    r.xf_at_max = std::abs(s.xf[imax]);
    r.xf_at_min = std::abs(s.xf[imin]);
    r.lambda_f_at_max = std::abs(lambda * s.f[imax]);
    r.lambda_f_at_min = std::abs(lambda * s.f[imin]);
    const auto witnessed = [](double lf, double xf) {
        return lf > std::max(10.0 * xf, 1e-9);
    };
    r.contradiction = witnessed(r.lambda_f_at_max, r.xf_at_max) ||
                      witnessed(r.lambda_f_at_min, r.xf_at_min);
    return r;
}

/// Transport of a verified eigenpair through an isometry phi: the
/// pushforward field keeps lambda with eigenfunction f o phi^{-1}.
struct IsometryTransportReport {
    EigenpairReport pair;
    double isometry_residual = 0.0;  // max |(phi^* h) - g| over sampled points
    std::size_t transported_samples = 0;
};

inline IsometryTransportReport isometry_transport(const DiffeoMap& phi, const VectorField& X,
                                                  const ScalarField& f, double lambda,
                                                  const Metric& source_metric,
                                                  const Metric& target_metric,
                                                  const Grid& target_grid, double tol = 1e-8) {
    const std::size_t n = phi.source().dimension();

    // Target points whose preimage lands in the source domain.
    std::vector<Vec> qs, ps;
    for (const Vec& q : target_grid.points()) {
        const Vec p = phi.inverse(q);
        if (phi.source().membership(p)) {
            qs.push_back(q);
            ps.push_back(p);
        }
    }
    if (qs.size() < 10)
        throw Error("too few target grid points have preimages in the source domain");

    const std::size_t check_count = std::min<std::size_t>(ps.size(), 25);
    phi.check_roundtrip(std::span(ps.data(), check_count),
                        std::span(qs.data(), check_count));

    // Isometry precheck: (phi^* h)_ij(p) = J^k_i h_kl(phi(p)) J^l_j == g_ij(p).
    double residual = 0.0;
    for (std::size_t c = 0; c < check_count; ++c) {
        const Vec& p = ps[c];
        const Mat jac = phi.forward_jacobian(p);
        const Mat h = target_metric.evaluate(phi.forward(p));
        const Mat g = source_metric.evaluate(p);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double pb = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l)
                        pb += jac.at(k, i) * h.at(k, l) * jac.at(l, j);
                residual = std::max(residual, std::abs(pb - g.at(i, j)));
            }
        }
    }
    if (residual > tol)
        throw Error("map is not an isometry of the supplied metrics (residual " +
                    detail::format_double(residual) + ")");

    // Verify (f o phi^{-1}, lambda) for Y = phi_* X on the target samples.
    // d(f o phi^{-1})_i(q) = df_k(p) * d(phi^{-1})^k_i(q) by the chain rule,
    // with every factor AD-exact.
    ActionSamples s;
    s.f.resize(qs.size());
    s.xf.resize(qs.size());
    parallel_for(qs.size(), [&](std::size_t idx) {
        const Vec& q = qs[idx];
        const Vec& p = ps[idx];
        const DualValue df = f.eval_dual(p);
        Mat jinv(n);
        for (std::size_t k = 0; k < n; ++k) {
            const DualValue comp = phi.inverse_component_dual(k, q);
            for (std::size_t i = 0; i < n; ++i) jinv.at(k, i) = comp.partials[i];
        }
        const Vec y = pushforward(phi, X, q);
        s.f[idx] = df.value;
        double xf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double grad_i = 0.0;
            for (std::size_t k = 0; k < n; ++k) grad_i += df.partials[k] * jinv.at(k, i);
            xf += y[i] * grad_i;
        }
        s.xf[idx] = xf;
    });

    IsometryTransportReport out;
    out.pair = report_from_samples(lambda, s, tol);
    out.isometry_residual = residual;
    out.transported_samples = qs.size();
    return out;
}

/// Transport within one field: if [X,Y] = 0 and Xf = lambda f, then
/// g = Y.f satisfies Xg = lambda g. X.g needs a second derivative of f, so
/// it is formed by a central difference of the AD-exact g along X.
struct CommutingTransportReport {
    EigenpairReport pair;
    double bracket_residual = 0.0;
    bool zero_image = false;  // Y.f numerically zero: trivially in E_lambda
};

inline CommutingTransportReport commuting_transport(const VectorField& X,
                                                    const VectorField& Y,
                                                    const ScalarField& f, double lambda,
                                                    const Grid& grid, double tol = 1e-8) {
    const std::size_t count = grid.size();
    if (count == 0) throw InvalidArgument("transport needs a nonempty grid");

    std::vector<double> bracket(count);
    parallel_for(count, [&](std::size_t i) {
        const Vec b = lie_bracket(X, Y, grid.points()[i]);
        double worst = 0.0;
        for (double c : b) worst = std::max(worst, std::abs(c));
        bracket[i] = worst;
    });
    CommutingTransportReport out;
    for (double b : bracket) out.bracket_residual = std::max(out.bracket_residual, b);
    if (out.bracket_residual > tol)
        throw Error("fields do not commute: max bracket norm " +
                    detail::format_double(out.bracket_residual) + " exceeds tolerance");

    const auto yf = [&](std::span<const double> p) {
        const Vec y = Y.eval(p);
        const DualValue df = f.eval_dual(p);
        double v = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) v += y[k] * df.partials[k];
        return v;
    };

    std::vector<double> g_vals(count), g_scale(count);
    parallel_for(count, [&](std::size_t i) {
        const Vec& p = grid.points()[i];
        const Vec y = Y.eval(p);
        const DualValue df = f.eval_dual(p);
        double v = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            v += y[k] * df.partials[k];
            scale += std::abs(y[k] * df.partials[k]);
        }
        g_vals[i] = v;
        g_scale[i] = scale;
    });
    double max_g = 0.0, max_scale = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        max_g = std::max(max_g, std::abs(g_vals[i]));
        max_scale = std::max(max_scale, g_scale[i]);
    }
    // The scale-aware threshold distinguishes a genuinely zero image from
    // cancellation noise of order eps * |Y||df|.
    if (max_g <= 1e-12 * (1.0 + max_scale)) {
        out.zero_image = true;
        out.pair.lambda = lambda;
        out.pair.samples = count;
        out.pair.verdict = true;
        return out;
    }

    ActionSamples s;
    s.f = g_vals;
    s.xf.resize(count);
    parallel_for(count, [&](std::size_t i) {
        const Vec& p = grid.points()[i];
        const Vec v = X.eval(p);
        double speed = 0.0;
        for (double c : v) speed += c * c;
        speed = std::sqrt(speed);
        if (speed <= 1e-14) {
            s.xf[i] = 0.0;
            return;
        }
        const double tau = 1e-6 / std::max(1.0, speed);
        Vec plus(p), minus(p);
        for (std::size_t k = 0; k < p.size(); ++k) {
            plus[k] += tau * v[k];
            minus[k] -= tau * v[k];
        }
        s.xf[i] = (yf(plus) - yf(minus)) / (2.0 * tau);
    });
    out.pair = report_from_samples(lambda, s, tol);
    return out;
}

}  // namespace vfspec
