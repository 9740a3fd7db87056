// Command-line front end: parses domain/metric/field/function specs,
// dispatches to the library, and emits JSON reports (or CSV for flow).
// Exit codes: 0 success, 1 verification failure under --expect-true or
// --expect-clean (or catalog mismatches), 2 usage or spec-parse errors.
// Identical argv + seed produce byte-identical output.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vfspec/catalog.hpp"
#include "vfspec/flow.hpp"
#include "vfspec/json_io.hpp"

namespace {

using nlohmann::json;
using namespace vfspec;

constexpr double kDefaultTol = 1e-8;
constexpr double kDefaultDt = 1e-3;
constexpr std::size_t kDefaultResolution = 200;
constexpr std::uint64_t kDefaultSeed = 42;

double parse_real(std::string_view text) {
    const std::string t{trim(text)};
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw InvalidArgument("expected a real number, got '" + t + "'");
    return value;
}

std::vector<double> parse_reals(std::string_view text, char sep = ',') {
    std::vector<double> values;
    for (const std::string& piece : split_trim(text, sep)) values.push_back(parse_real(piece));
    return values;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw InvalidArgument("cannot open output file '" + out_path + "'");
    file << text;
}

void emit_report(json config, const json& report, const std::string& out_path) {
    const json doc{{"config", std::move(config)}, {"report", report}};
    emit(doc.dump(2) + "\n", out_path);
}

std::string coordinate_name(std::size_t i, std::size_t dim) {
    if (dim <= 3) return {"xyz"[i]};
    return "x" + std::to_string(i + 1);
}

struct CommonOpts {
    std::string domain;
    std::string metric = "euclidean";
    std::string field;
    std::string function;
    std::string out;
    double tol = kDefaultTol;
    std::size_t resolution = kDefaultResolution;
};

void add_grid_flags(CLI::App* cmd, CommonOpts& o, bool with_metric = true,
                    bool with_function = true) {
    cmd->add_option("--domain", o.domain, "Domain spec, e.g. box:-2,2,-2,2")->required();
    if (with_metric) cmd->add_option("--metric", o.metric, "Metric spec (default euclidean)");
    cmd->add_option("--field", o.field, "Vector field components, comma separated")->required();
    if (with_function)
        cmd->add_option("--function", o.function, "Scalar function spec")->required();
    cmd->add_option("--tol", o.tol, "Verification tolerance");
    cmd->add_option("--resolution", o.resolution, "Grid resolution per axis");
    cmd->add_option("--out", o.out, "Output path (default stdout)");
}

json base_config(const std::string& subcommand, const CommonOpts& o, bool with_metric = true,
                 bool with_function = true) {
    json c{{"subcommand", subcommand},
           {"domain", o.domain},
           {"field", o.field},
           {"tol", o.tol},
           {"resolution", o.resolution}};
    if (with_metric) c["metric"] = o.metric;
    if (with_function) c["function"] = o.function;
    return c;
}

int run_verify(const CommonOpts& o, double lambda, bool expect_true) {
    const Domain dom = Domain::parse(o.domain);
    const Metric metric = Metric::parse(o.metric, dom.dimension());
    const VectorField X = VectorField::parse(o.field, dom);
    const ScalarField f = ScalarField::parse(o.function, dom);
    const Grid grid = build_grid(dom, metric, o.resolution);
    const EigenpairReport report = verify_eigenpair(X, f, lambda, grid, o.tol);

    json config = base_config("verify", o);
    config["lambda"] = lambda;
    config["expect_true"] = expect_true;
    emit_report(std::move(config), report, o.out);
    return (expect_true && !report.verdict) ? 1 : 0;
}

int run_estimate(const CommonOpts& o, const std::string& x0_text, double t_max, double dt) {
    const Domain dom = Domain::parse(o.domain);
    const VectorField X = VectorField::parse(o.field, dom);
    const ScalarField f = ScalarField::parse(o.function, dom);
    const std::vector<double> x0 = parse_reals(x0_text);
    const EstimateReport report = estimate_eigenvalue(X, f, x0, t_max, dt);

    json config{{"subcommand", "estimate"},
                {"domain", o.domain},
                {"field", o.field},
                {"function", o.function}};
    config["x0"] = x0;
    config["tmax"] = t_max;
    config["dt"] = dt;
    emit_report(std::move(config), report, o.out);
    return 0;
}

int run_scan(const CommonOpts& o, const std::string& lambdas_text,
             const std::string& range_text, double restrict_radius) {
    const Domain dom = Domain::parse(o.domain);
    const Metric metric = Metric::parse(o.metric, dom.dimension());
    const VectorField X = VectorField::parse(o.field, dom);

    std::vector<double> lambdas;
    if (!lambdas_text.empty()) lambdas = parse_reals(lambdas_text);
    if (!range_text.empty()) {
        const std::vector<double> r = parse_reals(range_text, ':');
        if (r.size() != 3 || r[2] <= 0.0)
            throw InvalidArgument("--lambda-range wants lo:hi:step with step > 0");
        const auto count = static_cast<std::size_t>(std::llround((r[1] - r[0]) / r[2]));
        for (std::size_t i = 0; i <= count; ++i) lambdas.push_back(r[0] + double(i) * r[2]);
    }
    if (lambdas.empty()) throw InvalidArgument("scan needs --lambdas or --lambda-range");

    Grid grid = build_grid(dom, metric, o.resolution);
    if (restrict_radius > 0.0) {
        const double r2 = restrict_radius * restrict_radius;
        grid = grid.filter([r2](std::span<const double> p) {
            double s = 0.0;
            for (double c : p) s += c * c;
            return s <= r2;
        });
    }
    const SpectralScanReport report = scan_candidates(X, o.function, lambdas, grid, o.tol);

    json config = base_config("scan", o);
    config["lambdas"] = lambdas;
    config["restrict_radius"] = restrict_radius;
    emit_report(std::move(config), report, o.out);
    return 0;
}

int run_battery(const CommonOpts& o, const std::string& candidates_text, std::size_t count,
                std::uint64_t seed, bool expect_clean) {
    const Domain dom = Domain::parse(o.domain);
    const Metric metric = Metric::parse(o.metric, dom.dimension());
    const VectorField X = VectorField::parse(o.field, dom);
    const std::vector<double> candidates = parse_reals(candidates_text);
    const std::vector<ScalarField> family =
        dom.periodic() ? trig_family(dom, seed, count) : box_family(dom, seed, count);
    const Grid grid = build_grid(dom, metric, o.resolution);
    const SpectralScanReport report = triviality_battery(X, candidates, family, grid, o.tol);

    json config = base_config("battery", o, /*with_metric=*/true, /*with_function=*/false);
    config["candidates"] = candidates;
    config["count"] = count;
    config["seed"] = seed;
    config["expect_clean"] = expect_clean;
    emit_report(std::move(config), report, o.out);
    return (expect_clean && report.violations > 0) ? 1 : 0;
}

int run_flow(const CommonOpts& o, const std::string& x0_text, double t_max, double dt) {
    const Domain dom = Domain::parse(o.domain);
    const VectorField X = VectorField::parse(o.field, dom);
    const std::vector<double> x0 = parse_reals(x0_text);
    const Trajectory traj = integrate(X, x0, t_max, dt);
    const std::optional<double> period = detect_period(traj);

    std::string text;
    text += "# domain: " + dom.spec() + "\n";
    text += "# field: " + X.spec() + "\n";
    text += "# dt: " + detail::format_double(dt) + "\n";
    text += "# columns: t";
    for (std::size_t i = 0; i < dom.dimension(); ++i)
        text += "," + coordinate_name(i, dom.dimension());
    text += "\n";
    for (std::size_t k = 0; k < traj.points.size(); ++k) {
        text += detail::format_double(traj.times[k]);
        for (double c : traj.points[k]) text += "," + detail::format_double(c);
        text += "\n";
    }
    json tail{{"samples", traj.points.size()},
              {"exited", traj.exited},
              {"exit_bracket", nullptr},
              {"period", nullptr}};
    if (traj.exited) tail["exit_bracket"] = json::array({traj.exit_inside, traj.exit_outside});
    if (period) tail["period"] = *period;
    text += tail.dump() + "\n";
    emit(text, o.out);
    return 0;
}

int run_norms(const CommonOpts& o, bool expect_true) {
    const Domain dom = Domain::parse(o.domain);
    const Metric metric = Metric::parse(o.metric, dom.dimension());
    const VectorField X = VectorField::parse(o.field, dom);
    const ScalarField f = ScalarField::parse(o.function, dom);
    const Grid grid = build_grid(dom, metric, o.resolution);
    const NormReport report = compute_norms(X, f, metric, grid);

    json config = base_config("norms", o);
    emit_report(std::move(config), report, o.out);
    return (expect_true && !report.bound_satisfied) ? 1 : 0;
}

int run_classify(const CommonOpts& o) {
    const Domain dom = Domain::parse(o.domain);
    const Metric metric = Metric::parse(o.metric, dom.dimension());
    const VectorField X = VectorField::parse(o.field, dom);
    const Grid grid = build_grid(dom, metric, o.resolution);
    const ClassificationReport report = classify(X, metric, grid, o.tol);

    json config = base_config("classify", o, /*with_metric=*/true, /*with_function=*/false);
    emit_report(std::move(config), report, o.out);
    return 0;
}

int run_dim_probe(const CommonOpts& o, std::size_t k_max) {
    const Domain dom = Domain::parse(o.domain);
    const Metric metric = Metric::parse(o.metric, dom.dimension());
    const VectorField X = VectorField::parse(o.field, dom);
    const ScalarField f = ScalarField::parse(o.function, dom);
    const Grid grid = build_grid(dom, metric, o.resolution);
    const DimProbeReport report = eigenspace_dim_probe(X, f, k_max, grid, o.tol);

    json config = base_config("dim-probe", o);
    config["kmax"] = k_max;
    emit_report(std::move(config), report, o.out);
    return 0;
}

int run_transport_isometry(const CommonOpts& o, double lambda, const std::string& fwd,
                           const std::string& inv, const std::string& target_domain,
                           const std::string& target_metric, bool expect_true) {
    const Domain source = Domain::parse(o.domain);
    const Domain target = Domain::parse(target_domain.empty() ? o.domain : target_domain);
    const Metric g = Metric::parse(o.metric, source.dimension());
    const Metric h = Metric::parse(target_metric, target.dimension());
    const DiffeoMap phi = DiffeoMap::parse(fwd, inv, source, target);
    const VectorField X = VectorField::parse(o.field, source);
    const ScalarField f = ScalarField::parse(o.function, source);
    const Grid grid = build_grid(target, h, o.resolution);
    const IsometryTransportReport report =
        isometry_transport(phi, X, f, lambda, g, h, grid, o.tol);

    json config = base_config("transport isometry", o);
    config["lambda"] = lambda;
    config["map_forward"] = fwd;
    config["map_inverse"] = inv;
    config["target_domain"] = target.spec();
    config["target_metric"] = target_metric;
    config["expect_true"] = expect_true;
    emit_report(std::move(config), report, o.out);
    return (expect_true && !report.pair.verdict) ? 1 : 0;
}

int run_transport_commuting(const CommonOpts& o, double lambda, const std::string& y_spec,
                            bool expect_true) {
    const Domain dom = Domain::parse(o.domain);
    const Metric metric = Metric::parse(o.metric, dom.dimension());
    const VectorField X = VectorField::parse(o.field, dom);
    const VectorField Y = VectorField::parse(y_spec, dom);
    const ScalarField f = ScalarField::parse(o.function, dom);
    const Grid grid = build_grid(dom, metric, o.resolution);
    const CommutingTransportReport report = commuting_transport(X, Y, f, lambda, grid, o.tol);

    json config = base_config("transport commuting", o);
    config["lambda"] = lambda;
    config["commuting_field"] = y_spec;
    config["expect_true"] = expect_true;
    emit_report(std::move(config), report, o.out);
    return (expect_true && !report.pair.verdict) ? 1 : 0;
}

int run_catalog_list(const std::string& out) {
    const json doc{{"config", json{{"subcommand", "catalog list"}}},
                   {"report", json{{"entries", list_entries()}}}};
    emit(doc.dump(2) + "\n", out);
    return 0;
}

int run_catalog_run(const std::string& name, double tol, std::size_t resolution,
                    std::uint64_t seed, const std::string& out) {
    const CatalogRunReport report = run_entry(name, tol, resolution, seed);
    json config{{"subcommand", "catalog run"},
                {"entry", name},
                {"tol", tol},
                {"resolution", resolution},
                {"seed", seed}};
    emit_report(std::move(config), report, out);
    return report.mismatches > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-spectrum toolkit for vector fields on coordinate domains"};
    app.require_subcommand(1);

    int exit_code = 0;

    CommonOpts verify_o;
    double verify_lambda = 0.0;
    bool verify_expect = false;
    CLI::App* verify = app.add_subcommand("verify", "Check Xf = lambda f over a grid");
    add_grid_flags(verify, verify_o);
    verify->add_option("--lambda", verify_lambda, "Candidate eigenvalue")->required();
    verify->add_flag("--expect-true", verify_expect, "Exit 1 unless the verdict is true");
    verify->callback([&] { exit_code = run_verify(verify_o, verify_lambda, verify_expect); });

    CommonOpts est_o;
    std::string est_x0;
    double est_tmax = 1.0, est_dt = kDefaultDt;
    CLI::App* estimate = app.add_subcommand("estimate", "Fit lambda from f along the flow");
    estimate->add_option("--domain", est_o.domain, "Domain spec")->required();
    estimate->add_option("--field", est_o.field, "Vector field components")->required();
    estimate->add_option("--function", est_o.function, "Scalar function spec")->required();
    estimate->add_option("--out", est_o.out, "Output path (default stdout)");
    estimate->add_option("--x0", est_x0, "Start point, comma separated")->required();
    estimate->add_option("--tmax", est_tmax, "Integration horizon")->required();
    estimate->add_option("--dt", est_dt, "Integrator step");
    estimate->callback([&] { exit_code = run_estimate(est_o, est_x0, est_tmax, est_dt); });

    CommonOpts scan_o;
    std::string scan_lambdas, scan_range;
    double scan_radius = 0.0;
    CLI::App* scan = app.add_subcommand("scan", "Verify a lambda-template over candidates");
    add_grid_flags(scan, scan_o);
    scan->add_option("--lambdas", scan_lambdas, "Comma-separated candidate eigenvalues");
    scan->add_option("--lambda-range", scan_range, "Candidates lo:hi:step inclusive");
    scan->add_option("--restrict-radius", scan_radius,
                     "Drop grid points with Euclidean norm beyond this radius");
    scan->callback(
        [&] { exit_code = run_scan(scan_o, scan_lambdas, scan_range, scan_radius); });

    CommonOpts bat_o;
    std::string bat_candidates;
    std::size_t bat_count = 30;
    std::uint64_t bat_seed = kDefaultSeed;
    bool bat_expect = false;
    CLI::App* battery =
        app.add_subcommand("battery", "Reject nonzero candidates against a seeded family");
    add_grid_flags(battery, bat_o, /*with_metric=*/true, /*with_function=*/false);
    battery->add_option("--candidates", bat_candidates, "Comma-separated eigenvalues")
        ->required();
    battery->add_option("--count", bat_count, "Family size");
    battery->add_option("--seed", bat_seed, "Family seed");
    battery->add_flag("--expect-clean", bat_expect, "Exit 1 on any violation");
    battery->callback([&] {
        exit_code = run_battery(bat_o, bat_candidates, bat_count, bat_seed, bat_expect);
    });

    CommonOpts flow_o;
    std::string flow_x0;
    double flow_tmax = 1.0, flow_dt = kDefaultDt;
    CLI::App* flow = app.add_subcommand("flow", "Integrate an orbit, emit CSV + metadata");
    flow->add_option("--domain", flow_o.domain, "Domain spec")->required();
    flow->add_option("--field", flow_o.field, "Vector field components")->required();
    flow->add_option("--x0", flow_x0, "Start point, comma separated")->required();
    flow->add_option("--tmax", flow_tmax, "Integration horizon")->required();
    flow->add_option("--dt", flow_dt, "Integrator step");
    flow->add_option("--out", flow_o.out, "Output path (default stdout)");
    flow->callback([&] { exit_code = run_flow(flow_o, flow_x0, flow_tmax, flow_dt); });

    CommonOpts norms_o;
    bool norms_expect = false;
    CLI::App* norms = app.add_subcommand("norms", "L2/H1 norms and the Rayleigh bound");
    add_grid_flags(norms, norms_o);
    norms->add_flag("--expect-true", norms_expect, "Exit 1 unless the bound holds");
    norms->callback([&] { exit_code = run_norms(norms_o, norms_expect); });

    CommonOpts cls_o;
    CLI::App* cls = app.add_subcommand("classify", "Killing/homothetic/concurrent verdict");
    add_grid_flags(cls, cls_o, /*with_metric=*/true, /*with_function=*/false);
    cls->callback([&] { exit_code = run_classify(cls_o); });

    CommonOpts dim_o;
    std::size_t dim_kmax = 4;
    CLI::App* dim = app.add_subcommand("dim-probe", "Rank of {1, f, ..., f^k} on the grid");
    add_grid_flags(dim, dim_o);
    dim->add_option("--kmax", dim_kmax, "Highest power (max 5)");
    dim->callback([&] { exit_code = run_dim_probe(dim_o, dim_kmax); });

    CLI::App* transport = app.add_subcommand("transport", "Move eigenpairs between fields");
    transport->require_subcommand(1);

    CommonOpts iso_o;
    double iso_lambda = 0.0;
    std::string iso_fwd, iso_inv, iso_tdom, iso_tmetric = "euclidean";
    bool iso_expect = false;
    CLI::App* iso = transport->add_subcommand("isometry", "Transport along an isometry");
    add_grid_flags(iso, iso_o);
    iso->add_option("--lambda", iso_lambda, "Verified eigenvalue")->required();
    iso->add_option("--map-forward", iso_fwd, "Map components, comma separated")->required();
    iso->add_option("--map-inverse", iso_inv, "Inverse map components")->required();
    iso->add_option("--target-domain", iso_tdom, "Target domain (default source)");
    iso->add_option("--target-metric", iso_tmetric, "Target metric (default euclidean)");
    iso->add_flag("--expect-true", iso_expect, "Exit 1 unless the verdict is true");
    iso->callback([&] {
        exit_code = run_transport_isometry(iso_o, iso_lambda, iso_fwd, iso_inv, iso_tdom,
                                           iso_tmetric, iso_expect);
    });

    CommonOpts com_o;
    double com_lambda = 0.0;
    std::string com_field;
    bool com_expect = false;
    CLI::App* com = transport->add_subcommand("commuting", "Transport along a commuting field");
    add_grid_flags(com, com_o);
    com->add_option("--lambda", com_lambda, "Verified eigenvalue")->required();
    com->add_option("--commuting-field", com_field, "Second field Y with [X,Y] = 0")
        ->required();
    com->add_flag("--expect-true", com_expect, "Exit 1 unless the verdict is true");
    com->callback([&] {
        exit_code = run_transport_commuting(com_o, com_lambda, com_field, com_expect);
    });

    CLI::App* catalog = app.add_subcommand("catalog", "Bundled worked examples");
    catalog->require_subcommand(1);

    std::string cat_out;
    CLI::App* cat_list = catalog->add_subcommand("list", "Names of all entries");
    cat_list->add_option("--out", cat_out, "Output path (default stdout)");
    cat_list->callback([&] { exit_code = run_catalog_list(cat_out); });

    std::string cat_name, cat_run_out;
    double cat_tol = 1e-8;
    std::size_t cat_res = kDefaultResolution;
    std::uint64_t cat_seed = kDefaultSeed;
    CLI::App* cat_run = catalog->add_subcommand("run", "Execute one entry's bundled checks");
    cat_run->add_option("name", cat_name, "Entry name")->required();
    cat_run->add_option("--tol", cat_tol, "Verification tolerance");
    cat_run->add_option("--resolution", cat_res, "Grid resolution per axis");
    cat_run->add_option("--seed", cat_seed, "Battery family seed");
    cat_run->add_option("--out", cat_run_out, "Output path (default stdout)");
    cat_run->callback(
        [&] { exit_code = run_catalog_run(cat_name, cat_tol, cat_res, cat_seed, cat_run_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const vfspec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
