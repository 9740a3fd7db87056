#pragma once

// Named instances bundling domain, metric, field, candidate eigenpairs, and
// expected verdicts, with marked extra checks (flow law, battery, chain,
// dimension probe, estimation, closed-orbit obstruction). Running an entry
// executes every bundled check and reports mismatches against expectations;
// the full catalog at default settings is the repository's golden suite.

#include <optional>
#include <string>
#include <vector>

#include "vfspec/analysis.hpp"
#include "vfspec/calculus.hpp"
#include "vfspec/families.hpp"
#include "vfspec/flow.hpp"
#include "vfspec/geometry.hpp"
#include "vfspec/spectral.hpp"

namespace vfspec {

struct ExpectedPair {
    std::string function_spec;
    double lambda = 0.0;
    bool expected_verdict = true;
};

struct CatalogEntry {
    std::string name;
    std::string domain_spec;
    std::string metric_spec = "euclidean";
    std::string field_spec;
    std::string notes;

    // Grid used for verification; defaults to the entry domain. A positive
    // clip radius drops grid points with ||p|| beyond it (used to keep
    // atan(y/x) well-conditioned on the slit plane).
    std::string verify_domain_spec;
    double clip_radius = 0.0;

    std::vector<ExpectedPair> eigenpairs;
    std::optional<FieldClass> expected_class;
    std::optional<double> expected_c;

    // Always-run chain check (k = 1..k_max at lambda, 2 lambda, ...).
    std::string chain_function;
    double chain_lambda = 0.0;
    std::size_t chain_k_max = 5;

    // Marked checks.
    bool check_flow_law = false;
    std::string flow_function;
    double flow_lambda = 0.0;
    std::vector<double> flow_x0;
    double flow_t_max = 0.0;

    bool check_estimate = false;
    std::string estimate_function;
    double estimate_lambda = 0.0;
    std::vector<double> estimate_x0;
    double estimate_t_max = 0.0;

    bool check_dim_probe = false;
    std::string dim_function;
    std::size_t dim_k_max = 4;
    std::size_t expected_rank = 0;

    bool check_battery = false;
    std::vector<double> battery_candidates;

    bool check_period = false;
    std::vector<double> period_x0;
    double period_t_max = 0.0;
    double expected_period = 0.0;
    std::string period_function;  // obstruction probe along the closed orbit
};

namespace detail {

inline std::string bump_chi() {
    // Smooth cutoff exp(-1/q) for q = 1 - (x^2+y^2)/1.5^2 > 0, exactly 0
    // outside: (q + |q|)/2 is +0 there, and exp(-1/1e-280) underflows to 0.
    const std::string q = "(1 - (x^2 + y^2)/2.25)";
    return "exp(-1/((" + q + " + abs(" + q + "))/2 + 1e-280))";
}

}  // namespace detail

inline const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> list;

        {
            CatalogEntry e;
            e.name = "rotation-omega";
            e.domain_spec = "plane-minus-line:2,0.05";
            e.field_spec = "-y, x";
            e.verify_domain_spec = "plane-minus-line:2,0.1";
            e.clip_radius = 2.0;
            for (double lambda : {-2.0, -1.0, 0.5, 1.0, 3.0})
                e.eigenpairs.push_back(
                    {substitute_lambda("exp(lambda*atan(y/x))", lambda), lambda, true});
            e.eigenpairs.push_back({"exp(1*atan(y/x))", 0.9, false});
            e.expected_class = FieldClass::Killing;
            e.expected_c = 0.0;
            e.chain_function = "exp(atan(y/x))";
            e.chain_lambda = 1.0;
            e.check_flow_law = true;
            e.flow_function = "exp(2*atan(y/x))";
            e.flow_lambda = 2.0;
            e.flow_x0 = {1.0, 0.0};
            e.flow_t_max = 1.3;
            e.check_estimate = true;
            e.estimate_function = "exp(2*atan(y/x))";
            e.estimate_lambda = 2.0;
            e.estimate_x0 = {1.0, 0.0};
            e.estimate_t_max = 1.3;
            e.notes =
                "Rotation field on the slit plane. Every real lambda admits the "
                "eigenfunction exp(lambda*atan(y/x)), so the point spectrum fills "
                "the whole line.";
            list.push_back(std::move(e));
        }

        {
            CatalogEntry e;
            e.name = "radial-punctured-disc";
            e.domain_spec = "punctured-disc:1,0.01";
            e.field_spec = "x, y";
            e.eigenpairs.push_back({"sqrt(x^2 + y^2)", 1.0, true});
            e.eigenpairs.push_back({"sqrt(x^2 + y^2)", 0.5, false});
            e.expected_class = FieldClass::Concurrent;
            e.expected_c = 1.0;
            e.chain_function = "sqrt(x^2 + y^2)";
            e.chain_lambda = 1.0;
            e.check_flow_law = true;
            e.flow_function = "sqrt(x^2 + y^2)";
            e.flow_lambda = 1.0;
            e.flow_x0 = {0.1, 0.0};
            e.flow_t_max = 2.0;
            e.check_estimate = true;
            e.estimate_function = "sqrt(x^2 + y^2)";
            e.estimate_lambda = 1.0;
            e.estimate_x0 = {0.1, 0.0};
            e.estimate_t_max = 2.0;
            e.notes =
                "Radial position field on the punctured unit disc. The distance "
                "function r satisfies X.r = r, and its powers extend the chain "
                "to every positive integer eigenvalue.";
            list.push_back(std::move(e));
        }

        {
            CatalogEntry e;
            e.name = "concurrent-plane";
            e.domain_spec = "box:-2,2,-2,2";
            e.field_spec = "x, y";
            e.eigenpairs.push_back({"x^2 + y^2", 2.0, true});
            e.expected_class = FieldClass::Concurrent;
            e.expected_c = 1.0;
            e.chain_function = "x^2 + y^2";
            e.chain_lambda = 2.0;
            e.check_estimate = true;
            e.estimate_function = "x^2 + y^2";
            e.estimate_lambda = 2.0;
            e.estimate_x0 = {0.1, 0.0};
            e.estimate_t_max = 2.0;
            e.notes =
                "Position field on a flat box is concurrent (covariant "
                "derivative reproduces every direction), so the squared length "
                "x^2 + y^2 is an eigenfunction with eigenvalue 2 = 2c.";
            list.push_back(std::move(e));
        }

        {
            CatalogEntry e;
            e.name = "killing-rotation";
            e.domain_spec = "box:-2,2,-2,2";
            e.field_spec = "-y, x";
            e.eigenpairs.push_back({"x^2 + y^2", 0.0, true});
            e.expected_class = FieldClass::Killing;
            e.expected_c = 0.0;
            e.chain_function = "x^2 + y^2";
            e.chain_lambda = 0.0;
            e.check_dim_probe = true;
            e.dim_function = "x^2 + y^2";
            e.dim_k_max = 4;
            e.expected_rank = 5;
            e.notes =
                "Rotation preserves the flat metric, so its length function "
                "x^2 + y^2 lies in the kernel; the powers of a non-constant "
                "kernel function stay independent, evidence that the zero "
                "eigenspace is infinite-dimensional.";
            list.push_back(std::move(e));
        }

        {
            CatalogEntry e;
            e.name = "torus-translation";
            e.domain_spec = "torus:6.283185307179586,6.283185307179586";
            e.field_spec = "1, 0";
            e.eigenpairs.push_back({"1", 0.0, true});
            e.eigenpairs.push_back({"2 + sin(x)", 1.0, false});
            e.expected_class = FieldClass::Killing;
            e.expected_c = 0.0;
            e.chain_function = "1";
            e.chain_lambda = 0.0;
            e.check_battery = true;
            e.battery_candidates = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
            e.check_period = true;
            e.period_x0 = {1.0, 1.0};
            e.period_t_max = 10.0;
            e.expected_period = 2.0 * kPi;
            e.period_function = "2 + sin(x)";
            e.notes =
                "Unit translation on the flat torus. All orbits close after one "
                "period, so the only eigenvalue is zero: the battery must reject "
                "every nonzero candidate.";
            list.push_back(std::move(e));
        }

        {
            CatalogEntry e;
            e.name = "bump-field";
            e.domain_spec = "box:-2,2,-2,2";
            const std::string chi = detail::bump_chi();
            e.field_spec = "-y * " + chi + ", x * " + chi;
            e.eigenpairs.push_back({"1", 0.0, true});
            e.expected_class = FieldClass::None;
            e.chain_function = "1";
            e.chain_lambda = 0.0;
            e.check_battery = true;
            e.battery_candidates = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
            e.notes =
                "Rotation modulated by a smooth cutoff that vanishes identically "
                "beyond r = 1.5. Compact support plays the role of compactness: "
                "the battery must reject every nonzero candidate.";
            list.push_back(std::move(e));
        }

        return list;
    }();
    return entries;
}

inline std::vector<std::string> list_entries() {
    std::vector<std::string> names;
    for (const CatalogEntry& e : catalog_entries()) names.push_back(e.name);
    return names;
}

inline const CatalogEntry& find_entry(std::string_view name) {
    for (const CatalogEntry& e : catalog_entries())
        if (e.name == name) return e;
    throw InvalidArgument("unknown catalog entry '" + std::string(name) + "'");
}

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CatalogRunReport {
    std::string entry;
    std::vector<CheckResult> checks;
    std::size_t mismatches = 0;
};

/// Executes every bundled check of one entry against its expectations.
inline CatalogRunReport run_entry(std::string_view name, double tol = 1e-8,
                                  std::size_t resolution = 200, std::uint64_t seed = 42) {
    const CatalogEntry& e = find_entry(name);
    CatalogRunReport report;
    report.entry = e.name;
    const auto record = [&](std::string check, bool passed, std::string detail) {
        if (!passed) ++report.mismatches;
        report.checks.push_back({std::move(check), passed, std::move(detail)});
    };

    const Domain domain = Domain::parse(e.domain_spec);
    const Metric metric = Metric::parse(e.metric_spec, domain.dimension());
    const VectorField X = VectorField::parse(e.field_spec, domain);

    const Domain verify_domain =
        Domain::parse(e.verify_domain_spec.empty() ? e.domain_spec : e.verify_domain_spec);
    Grid grid = build_grid(verify_domain, metric, resolution);
    if (e.clip_radius > 0.0) {
        const double r2 = e.clip_radius * e.clip_radius;
        grid = grid.filter([r2](std::span<const double> p) {
            double s = 0.0;
            for (double c : p) s += c * c;
            return s <= r2;
        });
    }
    const VectorField X_verify = VectorField::parse(e.field_spec, verify_domain);

    for (const ExpectedPair& pair : e.eigenpairs) {
        const ScalarField f = ScalarField::parse(pair.function_spec, verify_domain);
        const EigenpairReport r = verify_eigenpair(X_verify, f, pair.lambda, grid, tol);
        record("verify lambda=" + detail::format_double(pair.lambda),
               r.verdict == pair.expected_verdict,
               "max_rel_residual=" + detail::format_double(r.max_rel_residual));
    }

    if (e.expected_class) {
        const ClassificationReport c = classify(X_verify, metric, grid, tol);
        bool ok = c.verdict == *e.expected_class;
        std::string detail = "verdict=" + to_string(c.verdict);
        if (e.expected_c) {
            ok = ok && std::abs(c.fitted_c - *e.expected_c) < 1e-9;
            detail += " fitted_c=" + detail::format_double(c.fitted_c);
        }
        record("classify", ok, detail);
    }

    if (!e.chain_function.empty()) {
        const ScalarField f = ScalarField::parse(e.chain_function, verify_domain);
        const auto chain =
            power_chain_verify(X_verify, f, e.chain_lambda, e.chain_k_max, grid, 1e-7);
        bool ok = true;
        double worst = 0.0;
        for (const EigenpairReport& r : chain) {
            ok = ok && r.verdict;
            worst = std::max(worst, r.max_rel_residual);
        }
        record("power-chain", ok, "worst_rel_residual=" + detail::format_double(worst));
    }

    if (e.check_flow_law) {
        const ScalarField f = ScalarField::parse(e.flow_function, domain);
        const double dev = flow_law_check(X, f, e.flow_lambda, e.flow_x0, e.flow_t_max);
        record("flow-law", dev < 1e-6, "max_deviation=" + detail::format_double(dev));
    }

    if (e.check_estimate) {
        const ScalarField f = ScalarField::parse(e.estimate_function, domain);
        const EstimateReport r =
            estimate_eigenvalue(X, f, e.estimate_x0, e.estimate_t_max);
        const bool ok =
            r.lambda_hat && std::abs(*r.lambda_hat - e.estimate_lambda) < 1e-4;
        record("estimate", ok,
               r.lambda_hat ? "lambda_hat=" + detail::format_double(*r.lambda_hat)
                            : "no estimate (sign inconsistency)");
    }

    if (e.check_dim_probe) {
        const ScalarField f = ScalarField::parse(e.dim_function, verify_domain);
        const DimProbeReport r = eigenspace_dim_probe(X_verify, f, e.dim_k_max, grid, tol);
        record("dim-probe",
               r.rank == e.expected_rank && r.verdict == DimVerdict::DimInfinityEvidence,
               "rank=" + std::to_string(r.rank) + " verdict=" + to_string(r.verdict));
    }

    if (e.check_battery) {
        const std::vector<ScalarField> family =
            domain.periodic() ? trig_family(domain, seed, 30) : box_family(domain, seed, 30);
        const SpectralScanReport r =
            triviality_battery(X, e.battery_candidates, family, grid, tol);
        record("battery", r.violations == 0,
               "violations=" + std::to_string(r.violations));
    }

    if (e.check_period) {
        const Trajectory traj = integrate(X, e.period_x0, e.period_t_max, 1e-3);
        const std::optional<double> T = detect_period(traj);
        bool ok = T && std::abs(*T - e.expected_period) < 1e-6;
        std::string detail = T ? "T=" + detail::format_double(*T) : "no period found";
        if (ok && !e.period_function.empty()) {
            // Closed-orbit obstruction: a full period must return f to its
            // start, so the flow-law rate over one period is forced to zero.
            const ScalarField f = ScalarField::parse(e.period_function, domain);
            const double f0 = f.eval(e.period_x0);
            const double fT = f.eval(flow_map(X, *T, e.period_x0, 1e-3));
            const double gap = std::abs(fT - f0);
            const double lambda_hat = std::log(std::abs(fT / f0)) / *T;
            ok = gap < 1e-6 && std::abs(lambda_hat) < 1e-4;
            detail += " return_gap=" + detail::format_double(gap) +
                      " lambda_hat=" + detail::format_double(lambda_hat);
        }
        record("period-obstruction", ok, detail);
    }

    return report;
}

}  // namespace vfspec
