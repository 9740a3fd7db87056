#pragma once

// Chart domains, Riemannian metrics given by expression matrices, and
// midpoint quadrature grids carrying the volume element sqrt(det g).
//
// Domains are regions of R^n with a decidable membership test. The
// non-complete examples keep a positive guard band around their singular
// sets: punctured-disc excludes ||p|| < eps and plane-minus-line excludes
// |x| < delta. periodic-box (spelled "torus" in spec strings) is the only
// compact-without-boundary shape; its coordinates wrap into [0, period).

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vfspec/error.hpp"
#include "vfspec/expr.hpp"
#include "vfspec/util.hpp"

namespace vfspec {

enum class Shape { Box, Disc, Annulus, PuncturedDisc, PlaneMinusLine, PeriodicBox };

class Domain {
public:
    static Domain box(const std::vector<double>& bounds) {
        if (bounds.size() < 2 || bounds.size() % 2 != 0)
            throw InvalidArgument("box needs lo,hi per axis");
        Domain d;
        d.shape_ = Shape::Box;
        d.params_ = bounds;
        for (std::size_t i = 0; i + 1 < bounds.size(); i += 2) {
            if (!(bounds[i] < bounds[i + 1])) throw InvalidArgument("box interval is empty");
            d.lo_.push_back(bounds[i]);
            d.hi_.push_back(bounds[i + 1]);
        }
        return d;
    }

    static Domain disc(double cx, double cy, double r) {
        if (!(r > 0)) throw InvalidArgument("disc radius must be positive");
        Domain d;
        d.shape_ = Shape::Disc;
        d.params_ = {cx, cy, r};
        d.lo_ = {cx - r, cy - r};
        d.hi_ = {cx + r, cy + r};
        return d;
    }

    static Domain annulus(double r_in, double r_out) {
        if (!(0 < r_in && r_in < r_out)) throw InvalidArgument("annulus needs 0 < r_in < r_out");
        Domain d;
        d.shape_ = Shape::Annulus;
        d.params_ = {r_in, r_out};
        d.lo_ = {-r_out, -r_out};
        d.hi_ = {r_out, r_out};
        return d;
    }

    static Domain punctured_disc(double r, double eps) {
        if (!(0 < eps && eps < r))
            throw InvalidArgument("punctured-disc needs 0 < excision < radius");
        Domain d;
        d.shape_ = Shape::PuncturedDisc;
        d.params_ = {r, eps};
        d.lo_ = {-r, -r};
        d.hi_ = {r, r};
        return d;
    }

    static Domain plane_minus_line(double half_width, double guard) {
        if (!(0 < guard && guard < half_width))
            throw InvalidArgument("plane-minus-line needs 0 < guard < half-width");
        Domain d;
        d.shape_ = Shape::PlaneMinusLine;
        d.params_ = {half_width, guard};
        d.lo_ = {-half_width, -half_width};
        d.hi_ = {half_width, half_width};
        return d;
    }

    static Domain periodic_box(const std::vector<double>& periods) {
        if (periods.empty()) throw InvalidArgument("torus needs at least one period");
        Domain d;
        d.shape_ = Shape::PeriodicBox;
        d.params_ = periods;
        for (double p : periods) {
            if (!(p > 0)) throw InvalidArgument("torus periods must be positive");
            d.lo_.push_back(0.0);
            d.hi_.push_back(p);
        }
        return d;
    }

    /// Parses a domain spec string, e.g. "box:-2,2,-2,2", "disc:0,0,1",
    /// "annulus:0.5,1", "punctured-disc:1,0.01", "plane-minus-line:2,0.05",
    /// "torus:6.2831853,6.2831853".
    static Domain parse(std::string_view spec) {
        const std::size_t colon = spec.find(':');
        if (colon == std::string_view::npos)
            throw ParseError("domain spec needs 'shape:params'", 0);
        const std::string_view name = spec.substr(0, colon);
        std::vector<double> params;
        for (const std::string& piece : split_trim(spec.substr(colon + 1), ',')) {
            try {
                std::size_t used = 0;
                params.push_back(std::stod(piece, &used));
                if (used != piece.size()) throw std::invalid_argument(piece);
            } catch (const std::exception&) {
                throw ParseError("bad domain parameter '" + piece + "'", colon + 1);
            }
        }
        if (name == "box") return box(params);
        if (name == "disc") {
            expect_params(name, params, 3);
            return disc(params[0], params[1], params[2]);
        }
        if (name == "annulus") {
            expect_params(name, params, 2);
            return annulus(params[0], params[1]);
        }
        if (name == "punctured-disc") {
            expect_params(name, params, 2);
            return punctured_disc(params[0], params[1]);
        }
        if (name == "plane-minus-line") {
            expect_params(name, params, 2);
            return plane_minus_line(params[0], params[1]);
        }
        if (name == "torus" || name == "periodic-box") return periodic_box(params);
        throw ParseError("unknown domain shape '" + std::string(name) + "'", 0);
    }

    std::string spec() const {
        std::string s;
        switch (shape_) {
            case Shape::Box: s = "box"; break;
            case Shape::Disc: s = "disc"; break;
            case Shape::Annulus: s = "annulus"; break;
            case Shape::PuncturedDisc: s = "punctured-disc"; break;
            case Shape::PlaneMinusLine: s = "plane-minus-line"; break;
            case Shape::PeriodicBox: s = "torus"; break;
        }
        s += ':';
        for (std::size_t i = 0; i < params_.size(); ++i) {
            if (i) s += ',';
            s += detail::format_double(params_[i]);
        }
        return s;
    }

    Shape shape() const { return shape_; }
    std::size_t dimension() const { return lo_.size(); }
    bool compact() const { return shape_ == Shape::PeriodicBox; }
    bool periodic() const { return shape_ == Shape::PeriodicBox; }
    double lo(std::size_t axis) const { return lo_[axis]; }
    double hi(std::size_t axis) const { return hi_[axis]; }
    double period(std::size_t axis) const { return hi_[axis] - lo_[axis]; }

    bool membership(std::span<const double> p) const {
        if (p.size() != dimension()) throw InvalidArgument("point dimension mismatch");
        switch (shape_) {
            case Shape::Box:
                for (std::size_t i = 0; i < p.size(); ++i)
                    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
                return true;
            case Shape::Disc: {
                const double dx = p[0] - params_[0], dy = p[1] - params_[1];
                return dx * dx + dy * dy < params_[2] * params_[2];
            }
            case Shape::Annulus: {
                const double r2 = p[0] * p[0] + p[1] * p[1];
                return params_[0] * params_[0] <= r2 && r2 <= params_[1] * params_[1];
            }
            case Shape::PuncturedDisc: {
                const double r2 = p[0] * p[0] + p[1] * p[1];
                return params_[1] * params_[1] <= r2 && r2 < params_[0] * params_[0];
            }
            case Shape::PlaneMinusLine:
                return std::abs(p[0]) >= params_[1] && std::abs(p[0]) <= params_[0] &&
                       std::abs(p[1]) <= params_[0];
            case Shape::PeriodicBox: return true;
        }
        return false;
    }

    /// Canonical representative: periodic axes reduce into [0, period).
    Vec wrap(std::span<const double> p) const {
        Vec q(p);
        if (!periodic()) return q;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double P = period(i);
            q[i] = std::fmod(q[i], P);
            if (q[i] < 0) q[i] += P;
            if (q[i] == P) q[i] = 0.0;  // fmod can return P after rounding
        }
        return q;
    }

    /// Euclidean chart distance; periodic axes use the shorter arc.
    double distance(std::span<const double> a, std::span<const double> b) const {
        double s = 0.0;
        for (std::size_t i = 0; i < dimension(); ++i) {
            double d = std::abs(a[i] - b[i]);
            if (periodic()) {
                const double P = period(i);
                d = std::fmod(d, P);
                d = std::min(d, P - d);
            }
            s += d * d;
        }
        return std::sqrt(s);
    }

private:
    static void expect_params(std::string_view name, const std::vector<double>& params,
                              std::size_t want) {
        if (params.size() != want)
            throw ParseError(std::string(name) + " takes " + std::to_string(want) +
                                 " parameters, got " + std::to_string(params.size()),
                             0);
    }

    Shape shape_ = Shape::Box;
    std::vector<double> params_;
    Vec lo_, hi_;
};

// Dense linear algebra on evaluated metric matrices. Closed form for
// n <= 3, Gauss-Jordan with partial pivoting above that.

inline double mat_det(const Mat& m) {
    const std::size_t n = m.dim();
    if (n == 1) return m.at(0, 0);
    if (n == 2) return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
    if (n == 3)
        return m.at(0, 0) * (m.at(1, 1) * m.at(2, 2) - m.at(1, 2) * m.at(2, 1)) -
               m.at(0, 1) * (m.at(1, 0) * m.at(2, 2) - m.at(1, 2) * m.at(2, 0)) +
               m.at(0, 2) * (m.at(1, 0) * m.at(2, 1) - m.at(1, 1) * m.at(2, 0));
    Mat a = m;
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a.at(r, c)) > std::abs(a.at(pivot, c))) pivot = r;
        if (a.at(pivot, c) == 0.0) return 0.0;
        if (pivot != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a.at(pivot, j), a.at(c, j));
            det = -det;
        }
        det *= a.at(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a.at(r, c) / a.at(c, c);
            for (std::size_t j = c; j < n; ++j) a.at(r, j) -= f * a.at(c, j);
        }
    }
    return det;
}

inline Mat mat_inverse(const Mat& m) {
    const std::size_t n = m.dim();
    Mat inv(n);
    if (n <= 3) {
        const double det = mat_det(m);
        if (det == 0.0) throw Error("singular matrix");
        if (n == 1) {
            inv.at(0, 0) = 1.0 / det;
            return inv;
        }
        if (n == 2) {
            inv.at(0, 0) = m.at(1, 1) / det;
            inv.at(0, 1) = -m.at(0, 1) / det;
            inv.at(1, 0) = -m.at(1, 0) / det;
            inv.at(1, 1) = m.at(0, 0) / det;
            return inv;
        }
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                const std::size_t r0 = (i + 1) % 3, r1 = (i + 2) % 3;
                const std::size_t c0 = (j + 1) % 3, c1 = (j + 2) % 3;
                // Adjugate transpose: inv[j][i] from the (i,j) cofactor.
                inv.at(j, i) =
                    (m.at(r0, c0) * m.at(r1, c1) - m.at(r0, c1) * m.at(r1, c0)) / det;
            }
        }
        return inv;
    }
    Mat a = m;
    inv = Mat::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a.at(r, c)) > std::abs(a.at(pivot, c))) pivot = r;
        if (a.at(pivot, c) == 0.0) throw Error("singular matrix");
        if (pivot != c)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a.at(pivot, j), a.at(c, j));
                std::swap(inv.at(pivot, j), inv.at(c, j));
            }
        const double d = a.at(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a.at(c, j) /= d;
            inv.at(c, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a.at(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                a.at(r, j) -= f * a.at(c, j);
                inv.at(r, j) -= f * inv.at(c, j);
            }
        }
    }
    return inv;
}

/// Sylvester criterion on the leading principal minors.
inline bool positive_definite(const Mat& m) {
    const std::size_t n = m.dim();
    for (std::size_t k = 1; k <= n; ++k) {
        Mat lead(k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) lead.at(i, j) = m.at(i, j);
        if (!(mat_det(lead) > 0.0)) return false;
    }
    return true;
}

/// Symmetric metric tensor whose entries are coordinate expressions.
/// Evaluation mirrors the upper triangle so g(p) is exactly symmetric even
/// when the two stored expressions round differently.
class Metric {
public:
    static Metric euclidean(std::size_t n) {
        if (n == 0) throw InvalidArgument("dimension must be at least one");
        Metric m;
        m.n_ = n;
        m.euclidean_ = true;
        m.entries_.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m.entries_[i * n + j] = Expr::constant(i == j ? 1.0 : 0.0);
        return m;
    }

    static Metric from_entries(std::vector<Expr> row_major, std::size_t n) {
        if (row_major.size() != n * n)
            throw InvalidArgument("metric needs n*n entries");
        Metric m;
        m.n_ = n;
        m.euclidean_ = false;
        m.entries_ = std::move(row_major);
        return m;
    }

    /// "euclidean" or a semicolon-separated row-major list of n*n expressions.
    static Metric parse(std::string_view spec, std::size_t n) {
        if (trim(spec) == "euclidean") return euclidean(n);
        const std::vector<std::string> pieces = split_trim(spec, ';');
        if (pieces.size() != n * n)
            throw ParseError("metric spec needs " + std::to_string(n * n) +
                                 " entries, got " + std::to_string(pieces.size()),
                             0);
        std::vector<Expr> entries;
        entries.reserve(pieces.size());
        for (const std::string& piece : pieces) entries.push_back(parse_scalar(piece, n));
        return from_entries(std::move(entries), n);
    }

    std::size_t dimension() const { return n_; }
    bool is_euclidean() const { return euclidean_; }
    const Expr& entry(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

    std::string spec() const {
        if (euclidean_) return "euclidean";
        std::string s;
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            if (k) s += "; ";
            s += entries_[k].print();
        }
        return s;
    }

    Mat evaluate(std::span<const double> p) const {
        Mat g(n_);
        if (euclidean_) return Mat::identity(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i; j < n_; ++j)
                g.at(i, j) = g.at(j, i) = entry(i, j).eval(p);
        return g;
    }

    /// Entry values and partials: g(p) and dg(i,j,l) = d g_ij / d x_l.
    struct Jet {
        Mat g;
        InlineVec<27> dg;
        std::size_t n;
        double d(std::size_t i, std::size_t j, std::size_t l) const {
            return dg[(i * n + j) * n + l];
        }
    };

    Jet jet(std::span<const double> p) const {
        Jet out{Mat(n_), InlineVec<27>(n_ * n_ * n_), n_};
        if (euclidean_) {
            out.g = Mat::identity(n_);
            return out;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                const DualValue v = entry(i, j).eval_dual(p);
                out.g.at(i, j) = out.g.at(j, i) = v.value;
                for (std::size_t l = 0; l < n_; ++l)
                    out.dg[(i * n_ + j) * n_ + l] = out.dg[(j * n_ + i) * n_ + l] =
                        v.partials[l];
            }
        }
        return out;
    }

    /// Checks g_ij == g_ji as evaluated expressions at the sample points.
    void check_symmetry(std::span<const Vec> samples, double tol = 1e-9) const {
        if (euclidean_) return;
        for (const Vec& p : samples) {
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double a = entry(i, j).eval(p);
                    const double b = entry(j, i).eval(p);
                    if (std::abs(a - b) > tol * (1.0 + std::abs(a)))
                        throw Error("metric is not symmetric: g_" + std::to_string(i + 1) +
                                    std::to_string(j + 1) + " != g_" + std::to_string(j + 1) +
                                    std::to_string(i + 1));
                }
            }
        }
    }

private:
    std::size_t n_ = 0;
    bool euclidean_ = false;
    std::vector<Expr> entries_;
};

/// Quadrature nodes restricted to a domain. weight = cell volume * sqrt(det g).
class Grid {
public:
    Grid(Domain domain, std::vector<Vec> points, std::vector<double> weights,
         std::vector<std::size_t> resolution)
        : domain_(std::move(domain)),
          points_(std::move(points)),
          weights_(std::move(weights)),
          resolution_(std::move(resolution)) {}

    const Domain& domain() const { return domain_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::size_t>& resolution() const { return resolution_; }

    double total_weight() const { return pairwise_sum(weights_); }

    Grid filter(const std::function<bool(std::span<const double>)>& keep) const {
        std::vector<Vec> pts;
        std::vector<double> wts;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (keep(points_[i])) {
                pts.push_back(points_[i]);
                wts.push_back(weights_[i]);
            }
        }
        return Grid(domain_, std::move(pts), std::move(wts), resolution_);
    }

private:
    Domain domain_;
    std::vector<Vec> points_;
    std::vector<double> weights_;
    std::vector<std::size_t> resolution_;
};

/// Midpoint tensor grid clipped to domain membership. Outer-axis slabs may
/// be processed in parallel; output ordering is the serial lattice order.
inline Grid build_grid(const Domain& d, const Metric& m,
                       const std::vector<std::size_t>& resolution) {
    const std::size_t n = d.dimension();
    if (m.dimension() != n) throw InvalidArgument("metric dimension mismatch");
    if (resolution.size() != n) throw InvalidArgument("resolution needs one count per axis");
    for (std::size_t r : resolution)
        if (r < 2) throw InvalidArgument("resolution must be at least 2 per axis");

    Vec width(n);
    double cell = 1.0;
    std::size_t inner = 1;
    for (std::size_t i = 0; i < n; ++i) {
        width[i] = (d.hi(i) - d.lo(i)) / static_cast<double>(resolution[i]);
        cell *= width[i];
        if (i > 0) inner *= resolution[i];
    }

    struct Slab {
        std::vector<Vec> pts;
        std::vector<double> wts;
        std::string error;
    };
    std::vector<Slab> slabs(resolution[0]);

    parallel_for(resolution[0], [&](std::size_t i0) {
        Slab& slab = slabs[i0];
        Vec p(n);
        p[0] = d.lo(0) + (static_cast<double>(i0) + 0.5) * width[0];
        for (std::size_t flat = 0; flat < inner; ++flat) {
            std::size_t rem = flat;
            for (std::size_t axis = n; axis-- > 1;) {
                const std::size_t idx = rem % resolution[axis];
                rem /= resolution[axis];
                p[axis] = d.lo(axis) + (static_cast<double>(idx) + 0.5) * width[axis];
            }
            if (!d.membership(p)) continue;
            double w = cell;
            if (!m.is_euclidean()) {
                const Mat g = m.evaluate(p);
                if (!positive_definite(g)) {
                    if (slab.error.empty())
                        slab.error = "metric is not positive-definite at grid point";
                    return;
                }
                w *= std::sqrt(mat_det(g));
            }
            slab.pts.push_back(p);
            slab.wts.push_back(w);
        }
    });

    std::vector<Vec> points;
    std::vector<double> weights;
    for (const Slab& slab : slabs) {
        if (!slab.error.empty()) throw Error(slab.error);
        points.insert(points.end(), slab.pts.begin(), slab.pts.end());
        weights.insert(weights.end(), slab.wts.begin(), slab.wts.end());
    }
    if (points.empty()) throw Error("grid has no member points; raise the resolution");

    Grid grid(d, std::move(points), std::move(weights), resolution);
    std::vector<Vec> samples(grid.points().begin(),
                             grid.points().begin() +
                                 std::min<std::size_t>(grid.size(), 5));
    m.check_symmetry(samples);
    return grid;
}

inline Grid build_grid(const Domain& d, const Metric& m, std::size_t resolution) {
    return build_grid(d, m, std::vector<std::size_t>(d.dimension(), resolution));
}

/// Christoffel symbols of the Levi-Civita connection at one point,
/// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
struct Christoffels {
    std::size_t n = 0;
    InlineVec<27> data;
    double& at(std::size_t k, std::size_t i, std::size_t j) {
        return data[(k * n + i) * n + j];
    }
    double at(std::size_t k, std::size_t i, std::size_t j) const {
        return data[(k * n + i) * n + j];
    }
};

inline Christoffels christoffels_at(const Metric& m, std::span<const double> p) {
    const std::size_t n = m.dimension();
    Christoffels out;
    out.n = n;
    out.data.resize(n * n * n);
    if (m.is_euclidean()) return out;

    const Metric::Jet jet = m.jet(p);
    if (!positive_definite(jet.g)) throw Error("metric is singular at the requested point");
    const Mat ginv = mat_inverse(jet.g);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < n; ++l)
                    s += ginv.at(k, l) * (jet.d(j, l, i) + jet.d(i, l, j) - jet.d(i, j, l));
                out.at(k, i, j) = out.at(k, j, i) = 0.5 * s;
            }
        }
    }
    return out;
}

}  // namespace vfspec
