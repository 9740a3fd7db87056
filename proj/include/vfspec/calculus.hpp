#pragma once

// Differential operators on expression-defined fields: the derivation X.f,
// metric gradients, Lie bracket, Lie derivative of the metric, covariant
// derivative, diffeomorphism pushforward, and the Killing / homothetic /
// concurrent classifier.

#include <string>
#include <vector>

#include "vfspec/error.hpp"
#include "vfspec/expr.hpp"
#include "vfspec/geometry.hpp"
#include "vfspec/util.hpp"

namespace vfspec {

class ScalarField {
public:
    ScalarField(Expr expr, Domain domain) : expr_(std::move(expr)), domain_(std::move(domain)) {}

    static ScalarField parse(std::string_view text, const Domain& domain) {
        return ScalarField(parse_scalar(text, domain.dimension()), domain);
    }

    std::size_t dimension() const { return domain_.dimension(); }
    const Domain& domain() const { return domain_; }
    const Expr& expr() const { return expr_; }

    double eval(std::span<const double> p) const { return expr_.eval(p); }
    DualValue eval_dual(std::span<const double> p) const { return expr_.eval_dual(p); }
    std::string spec() const { return expr_.print(); }

private:
    Expr expr_;
    Domain domain_;
};

/// Value and Jacobian of a vector field at one point;
/// jacobian(k, i) = d X^k / d x^i.
struct FieldJet {
    Vec value;
    Mat jacobian;
};

class VectorField {
public:
    VectorField(std::vector<Expr> components, Domain domain)
        : components_(std::move(components)), domain_(std::move(domain)) {
        if (components_.size() != domain_.dimension())
            throw InvalidArgument("vector field needs one component per coordinate");
    }

    /// Comma-separated component expressions, split outside parentheses so
    /// two-argument calls survive, e.g. "-y, x" or "atan2(y, x), 1".
    static VectorField parse(std::string_view text, const Domain& domain) {
        std::vector<Expr> comps;
        for (const std::string& piece : split_components(text))
            comps.push_back(parse_scalar(piece, domain.dimension()));
        return VectorField(std::move(comps), domain);
    }

    std::size_t dimension() const { return domain_.dimension(); }
    const Domain& domain() const { return domain_; }
    const Expr& component(std::size_t k) const { return components_[k]; }

    Vec eval(std::span<const double> p) const {
        Vec out(dimension());
        for (std::size_t k = 0; k < components_.size(); ++k) out[k] = components_[k].eval(p);
        return out;
    }

    FieldJet jet(std::span<const double> p) const {
        const std::size_t n = dimension();
        FieldJet out{Vec(n), Mat(n)};
        for (std::size_t k = 0; k < n; ++k) {
            const DualValue v = components_[k].eval_dual(p);
            out.value[k] = v.value;
            for (std::size_t i = 0; i < n; ++i) out.jacobian.at(k, i) = v.partials[i];
        }
        return out;
    }

    std::string spec() const {
        std::string s;
        for (std::size_t k = 0; k < components_.size(); ++k) {
            if (k) s += ", ";
            s += components_[k].print();
        }
        return s;
    }

private:
    static std::vector<std::string> split_components(std::string_view text) {
        std::vector<std::string> out;
        int depth = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= text.size(); ++i) {
            if (i < text.size() && text[i] == '(') ++depth;
            else if (i < text.size() && text[i] == ')') --depth;
            else if (i == text.size() || (text[i] == ',' && depth == 0)) {
                out.emplace_back(trim(text.substr(start, i - start)));
                start = i + 1;
            }
        }
        return out;
    }

    std::vector<Expr> components_;
    Domain domain_;
};

/// Diffeomorphism between chart domains, given by forward and inverse
/// component expressions.
class DiffeoMap {
public:
    DiffeoMap(std::vector<Expr> forward, std::vector<Expr> inverse, Domain source, Domain target)
        : forward_(std::move(forward)),
          inverse_(std::move(inverse)),
          source_(std::move(source)),
          target_(std::move(target)) {
        if (source_.dimension() != target_.dimension() ||
            forward_.size() != source_.dimension() || inverse_.size() != source_.dimension())
            throw InvalidArgument("diffeomorphism components must match the chart dimension");
    }

    static DiffeoMap parse(std::string_view forward, std::string_view inverse,
                           const Domain& source, const Domain& target) {
        const VectorField f = VectorField::parse(forward, source);
        const VectorField g = VectorField::parse(inverse, target);
        std::vector<Expr> fc, gc;
        for (std::size_t k = 0; k < source.dimension(); ++k) {
            fc.push_back(f.component(k));
            gc.push_back(g.component(k));
        }
        return DiffeoMap(std::move(fc), std::move(gc), source, target);
    }

    const Domain& source() const { return source_; }
    const Domain& target() const { return target_; }

    Vec forward(std::span<const double> p) const { return eval_components(forward_, p); }
    Vec inverse(std::span<const double> q) const { return eval_components(inverse_, q); }

    /// Value and partials of the k-th inverse component at a target point.
    DualValue inverse_component_dual(std::size_t k, std::span<const double> q) const {
        return inverse_[k].eval_dual(q);
    }

    /// J(k, i) = d phi^k / d x^i at p.
    Mat forward_jacobian(std::span<const double> p) const {
        const std::size_t n = source_.dimension();
        Mat jac(n);
        for (std::size_t k = 0; k < n; ++k) {
            const DualValue v = forward_[k].eval_dual(p);
            for (std::size_t i = 0; i < n; ++i) jac.at(k, i) = v.partials[i];
        }
        return jac;
    }

    /// Verifies forward and inverse compose to the identity at the samples.
    void check_roundtrip(std::span<const Vec> source_samples,
                         std::span<const Vec> target_samples, double tol = 1e-10) const {
        for (const Vec& p : source_samples) {
            const Vec back = inverse(forward(p));
            for (std::size_t i = 0; i < p.size(); ++i)
                if (std::abs(back[i] - p[i]) > tol)
                    throw Error("map is not invertible: inverse(forward(p)) != p");
        }
        for (const Vec& q : target_samples) {
            const Vec there = forward(inverse(q));
            for (std::size_t i = 0; i < q.size(); ++i)
                if (std::abs(there[i] - q[i]) > tol)
                    throw Error("map is not invertible: forward(inverse(q)) != q");
        }
    }

    std::string forward_spec() const { return components_spec(forward_); }
    std::string inverse_spec() const { return components_spec(inverse_); }

private:
    static Vec eval_components(const std::vector<Expr>& comps, std::span<const double> p) {
        Vec out(comps.size());
        for (std::size_t k = 0; k < comps.size(); ++k) out[k] = comps[k].eval(p);
        return out;
    }

    static std::string components_spec(const std::vector<Expr>& comps) {
        std::string s;
        for (std::size_t k = 0; k < comps.size(); ++k) {
            if (k) s += ", ";
            s += comps[k].print();
        }
        return s;
    }

    std::vector<Expr> forward_, inverse_;
    Domain source_, target_;
};

/// X.f at p: the derivation sum X^i df/dx^i with AD-exact partials.
inline double apply_field(const VectorField& X, const ScalarField& f,
                          std::span<const double> p) {
    const Vec x = X.eval(p);
    const DualValue df = f.eval_dual(p);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * df.partials[i];
    return s;
}

/// Metric gradient (grad f)^k = g^{kl} d_l f.
inline Vec gradient(const Metric& m, const ScalarField& f, std::span<const double> p) {
    const DualValue df = f.eval_dual(p);
    const std::size_t n = m.dimension();
    Vec out(n);
    if (m.is_euclidean()) {
        for (std::size_t k = 0; k < n; ++k) out[k] = df.partials[k];
        return out;
    }
    const Mat g = m.evaluate(p);
    if (!positive_definite(g)) throw Error("metric is singular at the requested point");
    const Mat ginv = mat_inverse(g);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) out[k] += ginv.at(k, l) * df.partials[l];
    return out;
}

/// [X,Y]^k = X^i d_i Y^k - Y^i d_i X^k.
inline Vec lie_bracket(const VectorField& X, const VectorField& Y, std::span<const double> p) {
    if (X.dimension() != Y.dimension()) throw InvalidArgument("field dimension mismatch");
    const FieldJet jx = X.jet(p);
    const FieldJet jy = Y.jet(p);
    const std::size_t n = X.dimension();
    Vec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += jx.value[i] * jy.jacobian.at(k, i) - jy.value[i] * jx.jacobian.at(k, i);
        out[k] = s;
    }
    return out;
}

/// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k.
inline Mat lie_derivative_metric(const VectorField& X, const Metric& m,
                                 std::span<const double> p) {
    const std::size_t n = m.dimension();
    const FieldJet jx = X.jet(p);
    const Metric::Jet gj = m.jet(p);
    Mat out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                s += jx.value[k] * gj.d(i, j, k);
                s += gj.g.at(k, j) * jx.jacobian.at(k, i);
                s += gj.g.at(i, k) * jx.jacobian.at(k, j);
            }
            out.at(i, j) = out.at(j, i) = s;
        }
    }
    return out;
}

/// (nabla_Y X)^k = Y^i d_i X^k + Gamma^k_ij Y^i X^j.
inline Vec covariant_derivative(const VectorField& Y, const VectorField& X, const Metric& m,
                                std::span<const double> p) {
    const std::size_t n = m.dimension();
    const Vec y = Y.eval(p);
    const FieldJet jx = X.jet(p);
    const Christoffels gamma = christoffels_at(m, p);
    Vec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += y[i] * jx.jacobian.at(k, i);
            for (std::size_t j = 0; j < n; ++j) s += gamma.at(k, i, j) * y[i] * jx.value[j];
        }
        out[k] = s;
    }
    return out;
}

/// (phi_* X)(q) = J_phi(p) X(p) with p = phi^{-1}(q).
inline Vec pushforward(const DiffeoMap& phi, const VectorField& X, std::span<const double> q) {
    const Vec p = phi.inverse(q);
    if (!phi.source().membership(p))
        throw InvalidArgument("target point has no preimage in the source domain");
    const Mat jac = phi.forward_jacobian(p);
    const Vec x = X.eval(p);
    const std::size_t n = p.size();
    Vec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += jac.at(k, i) * x[i];
        out[k] = s;
    }
    return out;
}

enum class FieldClass { Killing, Homothetic, Concurrent, None };

inline std::string to_string(FieldClass c) {
    switch (c) {
        case FieldClass::Killing: return "killing";
        case FieldClass::Homothetic: return "homothetic";
        case FieldClass::Concurrent: return "concurrent";
        case FieldClass::None: return "none";
    }
    return "none";
}

struct ClassificationReport {
    double killing_residual = 0.0;     // max |(L_X g)_ij| over the grid
    double homothetic_residual = 0.0;  // max |(L_X g - 2c g)_ij|
    double fitted_c = 0.0;             // mean trace(g^{-1} L_X g) / (2n)
    double concurrent_residual = 0.0;  // max |(nabla_{e_i} X - e_i)^k|
    double length_variance = 0.0;      // variance of ||X||_g over the grid
    FieldClass verdict = FieldClass::None;
};

/// Classifies X against the Killing (L_X g = 0), homothetic (L_X g = 2cg)
/// and concurrent (nabla_Y X = Y) equations over the grid. The homothetic
/// constant is fitted by trace averaging before its residual is formed.
/// Concurrent implies homothetic with c = 1, so it wins when both pass.
inline ClassificationReport classify(const VectorField& X, const Metric& m, const Grid& grid,
                                     double tol = 1e-8) {
    if (grid.size() == 0) throw InvalidArgument("classification needs a nonempty grid");
    const std::size_t n = m.dimension();
    const std::size_t count = grid.size();

    struct PointData {
        Mat lie;
        Mat g;
        double trace = 0.0;
        double length = 0.0;
        double concurrent = 0.0;
        double killing = 0.0;
    };
    std::vector<PointData> data(count);

    parallel_for(count, [&](std::size_t idx) {
        const Vec& p = grid.points()[idx];
        PointData& d = data[idx];
        d.lie = lie_derivative_metric(X, m, p);
        d.g = m.evaluate(p);
        const Mat ginv = mat_inverse(d.g);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                d.trace += ginv.at(i, j) * d.lie.at(j, i);
                d.killing = std::max(d.killing, std::abs(d.lie.at(i, j)));
            }

        const Vec x = X.eval(p);
        double len2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) len2 += d.g.at(i, j) * x[i] * x[j];
        d.length = std::sqrt(std::max(0.0, len2));

        const FieldJet jx = X.jet(p);
        const Christoffels gamma = christoffels_at(m, p);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t k = 0; k < n; ++k) {
                double v = jx.jacobian.at(k, a);
                for (std::size_t j = 0; j < n; ++j) v += gamma.at(k, a, j) * jx.value[j];
                v -= (k == a) ? 1.0 : 0.0;
                d.concurrent = std::max(d.concurrent, std::abs(v));
            }
        }
    });

    ClassificationReport report;
    std::vector<double> traces(count), lengths(count), lengths_sq(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        report.killing_residual = std::max(report.killing_residual, data[idx].killing);
        report.concurrent_residual = std::max(report.concurrent_residual, data[idx].concurrent);
        traces[idx] = data[idx].trace;
        lengths[idx] = data[idx].length;
        lengths_sq[idx] = data[idx].length * data[idx].length;
    }
    report.fitted_c = pairwise_sum(traces) / (2.0 * static_cast<double>(n) *
                                              static_cast<double>(count));
    const double mean_len = pairwise_sum(lengths) / static_cast<double>(count);
    report.length_variance =
        std::max(0.0, pairwise_sum(lengths_sq) / static_cast<double>(count) -
                          mean_len * mean_len);

    for (std::size_t idx = 0; idx < count; ++idx) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                report.homothetic_residual = std::max(
                    report.homothetic_residual,
                    std::abs(data[idx].lie.at(i, j) -
                             2.0 * report.fitted_c * data[idx].g.at(i, j)));
    }

    if (report.killing_residual <= tol) report.verdict = FieldClass::Killing;
    else if (report.concurrent_residual <= tol) report.verdict = FieldClass::Concurrent;
    else if (report.homothetic_residual <= tol) report.verdict = FieldClass::Homothetic;
    else report.verdict = FieldClass::None;
    return report;
}

}  // namespace vfspec
