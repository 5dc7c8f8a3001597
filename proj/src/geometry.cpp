#include "hadeq/geometry.hpp"

#include <cmath>
#include <sstream>

namespace hadeq {

GeometryTolerances& geometry_tolerances() {
    static GeometryTolerances tols;
    return tols;
}

ManifoldDescriptor ManifoldDescriptor::euclidean(int n) {
    if (n < 1) throw DomainMismatchError("euclidean dimension must be positive");
    ManifoldDescriptor m;
    m.kind = ManifoldKind::Euclidean;
    m.n = n;
    return m;
}

ManifoldDescriptor ManifoldDescriptor::hyperbolic(int n) {
    if (n < 1) throw DomainMismatchError("hyperbolic dimension must be positive");
    ManifoldDescriptor m;
    m.kind = ManifoldKind::Hyperbolic;
    m.n = n;
    return m;
}

ManifoldDescriptor ManifoldDescriptor::product(std::vector<ManifoldDescriptor> factors) {
    if (factors.size() < 2) throw DomainMismatchError("product needs at least two factors");
    ManifoldDescriptor m;
    m.kind = ManifoldKind::Product;
    m.n = 0;
    m.factors = std::move(factors);
    return m;
}

int ManifoldDescriptor::ambient_dim() const {
    switch (kind) {
        case ManifoldKind::Euclidean: return n;
        case ManifoldKind::Hyperbolic: return n + 1;
        case ManifoldKind::Product: {
            int d = 0;
            for (const auto& f : factors) d += f.ambient_dim();
            return d;
        }
    }
    return 0;
}

int ManifoldDescriptor::intrinsic_dim() const {
    switch (kind) {
        case ManifoldKind::Euclidean: return n;
        case ManifoldKind::Hyperbolic: return n;
        case ManifoldKind::Product: {
            int d = 0;
            for (const auto& f : factors) d += f.intrinsic_dim();
            return d;
        }
    }
    return 0;
}

bool ManifoldDescriptor::flat() const {
    switch (kind) {
        case ManifoldKind::Euclidean: return true;
        case ManifoldKind::Hyperbolic: return n == 1;
        case ManifoldKind::Product: {
            for (const auto& f : factors)
                if (!f.flat()) return false;
            return true;
        }
    }
    return false;
}

bool ManifoldDescriptor::operator==(const ManifoldDescriptor& other) const {
    if (kind != other.kind) return false;
    if (kind == ManifoldKind::Product) {
        if (factors.size() != other.factors.size()) return false;
        for (std::size_t i = 0; i < factors.size(); ++i)
            if (!(factors[i] == other.factors[i])) return false;
        return true;
    }
    return n == other.n;
}

std::string ManifoldDescriptor::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case ManifoldKind::Euclidean: os << "R^" << n; break;
        case ManifoldKind::Hyperbolic: os << "H^" << n; break;
        case ManifoldKind::Product: {
            for (std::size_t i = 0; i < factors.size(); ++i) {
                if (i) os << " x ";
                os << factors[i].to_string();
            }
            break;
        }
    }
    return os.str();
}

namespace {

using Eigen::VectorXd;
using Seg = Eigen::Ref<const Eigen::VectorXd>;

double lorentz_inner(const Seg& a, const Seg& b) {
    const Eigen::Index m = a.size();
    return a.head(m - 1).dot(b.head(m - 1)) - a[m - 1] * b[m - 1];
}

// sinh(t)/t with a series branch near zero
double sinhc(double t) {
    if (std::abs(t) < geometry_tolerances().series_cutoff) return 1.0 + t * t / 6.0;
    return std::sinh(t) / t;
}

void check_same_manifold(const ManifoldDescriptor& a, const ManifoldDescriptor& b,
                         const char* op) {
    if (a != b)
        throw DomainMismatchError(std::string(op) + ": points on different manifolds (" +
                                  a.to_string() + " vs " + b.to_string() + ")");
}

void hyp_validate_point(const Seg& x) {
    const double q = lorentz_inner(x, x);
    if (std::abs(q + 1.0) > geometry_tolerances().hyperboloid || x[x.size() - 1] <= 0.0)
        throw DegenerateInputError("point is not on the hyperboloid sheet");
}

void hyp_renormalize(Eigen::Ref<Eigen::VectorXd> p) {
    const double q = -lorentz_inner(p, p);
    p /= std::sqrt(q > 0.0 ? q : 1.0);
}

// ----- per-block kernels; all segments refer to one factor's ambient slice -----

void block_exp(const ManifoldDescriptor& m, const Seg& x, const Seg& v,
               Eigen::Ref<Eigen::VectorXd> out);
void block_log(const ManifoldDescriptor& m, const Seg& x, const Seg& y,
               Eigen::Ref<Eigen::VectorXd> out);
double block_dist(const ManifoldDescriptor& m, const Seg& x, const Seg& y);

void block_exp(const ManifoldDescriptor& m, const Seg& x, const Seg& v,
               Eigen::Ref<Eigen::VectorXd> out) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            out = x + v;
            return;
        case ManifoldKind::Hyperbolic: {
            const double t2 = lorentz_inner(v, v);
            const double t = std::sqrt(t2 > 0.0 ? t2 : 0.0);
            out = std::cosh(t) * x + sinhc(t) * v;
            hyp_renormalize(out);
            return;
        }
        case ManifoldKind::Product: {
            int off = 0;
            for (const auto& f : m.factors) {
                const int d = f.ambient_dim();
                block_exp(f, x.segment(off, d), v.segment(off, d), out.segment(off, d));
                off += d;
            }
            return;
        }
    }
}

// Hyperbolic distance through the Lorentz-orthogonal components of each
// endpoint; symmetric by construction and stable for nearby points, where
// arccosh(-<x,y>) loses half the working precision.
double hyp_dist(const Seg& x, const Seg& y) {
    const double c = -lorentz_inner(x, y);
    VectorXd wx = y - c * x;
    VectorXd wy = x - c * y;
    const double qx = lorentz_inner(wx, wx);
    const double qy = lorentz_inner(wy, wy);
    const double sx = std::sqrt(qx > 0.0 ? qx : 0.0);
    const double sy = std::sqrt(qy > 0.0 ? qy : 0.0);
    return std::asinh(0.5 * (sx + sy));
}

void hyp_log(const Seg& x, const Seg& y, Eigen::Ref<Eigen::VectorXd> out) {
    const double c = -lorentz_inner(x, y);
    VectorXd w = y - c * x;
    const double q = lorentz_inner(w, w);
    const double s = std::sqrt(q > 0.0 ? q : 0.0);
    if (s == 0.0) {
        out.setZero();
        return;
    }
    out = (hyp_dist(x, y) / s) * w;
}

void block_log(const ManifoldDescriptor& m, const Seg& x, const Seg& y,
               Eigen::Ref<Eigen::VectorXd> out) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            out = y - x;
            return;
        case ManifoldKind::Hyperbolic:
            hyp_log(x, y, out);
            return;
        case ManifoldKind::Product: {
            int off = 0;
            for (const auto& f : m.factors) {
                const int d = f.ambient_dim();
                block_log(f, x.segment(off, d), y.segment(off, d), out.segment(off, d));
                off += d;
            }
            return;
        }
    }
}

double block_dist(const ManifoldDescriptor& m, const Seg& x, const Seg& y) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            return (y - x).norm();
        case ManifoldKind::Hyperbolic:
            return hyp_dist(x, y);
        case ManifoldKind::Product: {
            double sq = 0.0;
            int off = 0;
            for (const auto& f : m.factors) {
                const int d = f.ambient_dim();
                const double di = block_dist(f, x.segment(off, d), y.segment(off, d));
                sq += di * di;
                off += d;
            }
            return std::sqrt(sq);
        }
    }
    return 0.0;
}

double block_metric(const ManifoldDescriptor& m, const Seg& u, const Seg& v) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            return u.dot(v);
        case ManifoldKind::Hyperbolic:
            return lorentz_inner(u, v);
        case ManifoldKind::Product: {
            double s = 0.0;
            int off = 0;
            for (const auto& f : m.factors) {
                const int d = f.ambient_dim();
                s += block_metric(f, u.segment(off, d), v.segment(off, d));
                off += d;
            }
            return s;
        }
    }
    return 0.0;
}

void block_validate_point(const ManifoldDescriptor& m, const Seg& x) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            if (!x.allFinite()) throw DegenerateInputError("non-finite coordinates");
            return;
        case ManifoldKind::Hyperbolic:
            if (!x.allFinite()) throw DegenerateInputError("non-finite coordinates");
            hyp_validate_point(x);
            return;
        case ManifoldKind::Product: {
            int off = 0;
            for (const auto& f : m.factors) {
                const int d = f.ambient_dim();
                block_validate_point(f, x.segment(off, d));
                off += d;
            }
            return;
        }
    }
}

void block_validate_tangent(const ManifoldDescriptor& m, const Seg& x, const Seg& v) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            if (!v.allFinite()) throw DegenerateInputError("non-finite tangent");
            return;
        case ManifoldKind::Hyperbolic: {
            if (!v.allFinite()) throw DegenerateInputError("non-finite tangent");
            if (std::abs(lorentz_inner(x, v)) > geometry_tolerances().tangency)
                throw DegenerateInputError("vector is not tangent to the hyperboloid");
            return;
        }
        case ManifoldKind::Product: {
            int off = 0;
            for (const auto& f : m.factors) {
                const int d = f.ambient_dim();
                block_validate_tangent(f, x.segment(off, d), v.segment(off, d));
                off += d;
            }
            return;
        }
    }
}

// Lorentz-orthogonal projection onto the tangent space, blockwise.
void block_project_tangent(const ManifoldDescriptor& m, const Seg& x,
                           Eigen::Ref<Eigen::VectorXd> v) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            return;
        case ManifoldKind::Hyperbolic: {
            v += lorentz_inner(x, v) * x;
            return;
        }
        case ManifoldKind::Product: {
            int off = 0;
            for (const auto& f : m.factors) {
                const int d = f.ambient_dim();
                block_project_tangent(f, x.segment(off, d), v.segment(off, d));
                off += d;
            }
            return;
        }
    }
}

void block_from_chart(const ManifoldDescriptor& m, const Seg& u,
                      Eigen::Ref<Eigen::VectorXd> out) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            out = u;
            return;
        case ManifoldKind::Hyperbolic: {
            if (m.n == 1) {
                out[0] = std::sinh(u[0]);
                out[1] = std::cosh(u[0]);
                return;
            }
            // exponential chart at the apex (0,...,0,1)
            VectorXd apex = VectorXd::Zero(m.n + 1);
            apex[m.n] = 1.0;
            VectorXd v(m.n + 1);
            v.head(m.n) = u;
            v[m.n] = 0.0;
            block_exp(m, apex, v, out);
            return;
        }
        case ManifoldKind::Product: {
            int coff = 0, aoff = 0;
            for (const auto& f : m.factors) {
                const int cd = f.intrinsic_dim(), ad = f.ambient_dim();
                block_from_chart(f, u.segment(coff, cd), out.segment(aoff, ad));
                coff += cd;
                aoff += ad;
            }
            return;
        }
    }
}

void block_to_chart(const ManifoldDescriptor& m, const Seg& x,
                    Eigen::Ref<Eigen::VectorXd> out) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            out = x;
            return;
        case ManifoldKind::Hyperbolic: {
            if (m.n == 1) {
                out[0] = std::asinh(x[0]);
                return;
            }
            VectorXd apex = VectorXd::Zero(m.n + 1);
            apex[m.n] = 1.0;
            VectorXd v(m.n + 1);
            block_log(m, apex, x, v);
            out = v.head(m.n);
            return;
        }
        case ManifoldKind::Product: {
            int coff = 0, aoff = 0;
            for (const auto& f : m.factors) {
                const int cd = f.intrinsic_dim(), ad = f.ambient_dim();
                block_to_chart(f, x.segment(aoff, ad), out.segment(coff, cd));
                coff += cd;
                aoff += ad;
            }
            return;
        }
    }
}

void block_chart_tangent(const ManifoldDescriptor& m, const Seg& x, const Seg& cv,
                         Eigen::Ref<Eigen::VectorXd> out) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            out = cv;
            return;
        case ManifoldKind::Hyperbolic: {
            if (m.n != 1)
                throw CapabilityError("chart tangents require a flat manifold");
            // unit tangent at (sinh t, cosh t) is (cosh t, sinh t)
            out[0] = cv[0] * x[1];
            out[1] = cv[0] * x[0];
            return;
        }
        case ManifoldKind::Product: {
            int coff = 0, aoff = 0;
            for (const auto& f : m.factors) {
                const int cd = f.intrinsic_dim(), ad = f.ambient_dim();
                block_chart_tangent(f, x.segment(aoff, ad), cv.segment(coff, cd),
                                    out.segment(aoff, ad));
                coff += cd;
                aoff += ad;
            }
            return;
        }
    }
}

void block_tangent_chart(const ManifoldDescriptor& m, const Seg& x, const Seg& v,
                         Eigen::Ref<Eigen::VectorXd> out) {
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            out = v;
            return;
        case ManifoldKind::Hyperbolic: {
            if (m.n != 1)
                throw CapabilityError("chart tangents require a flat manifold");
            out[0] = v[0] * x[1] - v[1] * x[0];
            return;
        }
        case ManifoldKind::Product: {
            int coff = 0, aoff = 0;
            for (const auto& f : m.factors) {
                const int cd = f.intrinsic_dim(), ad = f.ambient_dim();
                block_tangent_chart(f, x.segment(aoff, ad), v.segment(aoff, ad),
                                    out.segment(coff, cd));
                coff += cd;
                aoff += ad;
            }
            return;
        }
    }
}

}  // namespace

ManifoldPoint make_point(const ManifoldDescriptor& m, const Eigen::VectorXd& coords) {
    if (coords.size() != m.ambient_dim())
        throw DomainMismatchError("coordinate size does not match the manifold's ambient dimension");
    block_validate_point(m, coords);
    return ManifoldPoint{m, coords};
}

TangentVector make_tangent(const ManifoldPoint& base, const Eigen::VectorXd& coords) {
    if (coords.size() != base.manifold.ambient_dim())
        throw DomainMismatchError("tangent size does not match the manifold's ambient dimension");
    block_validate_tangent(base.manifold, base.coords, coords);
    return TangentVector{base, coords};
}

ManifoldPoint zero_point(const ManifoldDescriptor& m) {
    Eigen::VectorXd chart = Eigen::VectorXd::Zero(m.intrinsic_dim());
    return from_chart(m, chart);
}

TangentVector zero_tangent(const ManifoldPoint& x) {
    return TangentVector{x, Eigen::VectorXd::Zero(x.manifold.ambient_dim())};
}

double inner(const ManifoldPoint& x, const TangentVector& u, const TangentVector& v) {
    check_same_manifold(x.manifold, u.base.manifold, "inner");
    check_same_manifold(x.manifold, v.base.manifold, "inner");
    if (u.base.coords != x.coords || v.base.coords != x.coords)
        throw DomainMismatchError("inner: tangent vectors are not based at the given point");
    return block_metric(x.manifold, u.coords, v.coords);
}

double inner(const TangentVector& u, const TangentVector& v) {
    return inner(u.base, u, v);
}

double norm(const TangentVector& v) {
    const double q = block_metric(v.base.manifold, v.coords, v.coords);
    return std::sqrt(q > 0.0 ? q : 0.0);
}

ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v) {
    check_same_manifold(x.manifold, v.base.manifold, "exp_map");
    Eigen::VectorXd out(x.coords.size());
    block_exp(x.manifold, x.coords, v.coords, out);
    return ManifoldPoint{x.manifold, std::move(out)};
}

TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y) {
    check_same_manifold(x.manifold, y.manifold, "log_map");
    Eigen::VectorXd out(x.coords.size());
    if (x.coords == y.coords)
        out.setZero();
    else
        block_log(x.manifold, x.coords, y.coords, out);
    return TangentVector{x, std::move(out)};
}

double dist(const ManifoldPoint& x, const ManifoldPoint& y) {
    check_same_manifold(x.manifold, y.manifold, "dist");
    if (x.coords == y.coords) return 0.0;
    return block_dist(x.manifold, x.coords, y.coords);
}

ManifoldPoint geodesic_point(const ManifoldPoint& x, const ManifoldPoint& y, double t) {
    if (t == 0.0) return x;
    if (t == 1.0) return y;
    TangentVector v = log_map(x, y);
    v.coords *= t;
    return exp_map(x, v);
}

TangentVector scaled(const TangentVector& v, double s) {
    return TangentVector{v.base, s * v.coords};
}

ComparisonSlacks comparison_slacks(const ManifoldPoint& x1, const ManifoldPoint& x2,
                                   const ManifoldPoint& x3) {
    const double d12 = dist(x1, x2);
    const double d23 = dist(x2, x3);
    const double d31 = dist(x3, x1);
    if (d12 == 0.0 || d23 == 0.0 || d31 == 0.0)
        throw DegenerateInputError("comparison_slacks: coincident vertices");

    const TangentVector l32 = log_map(x3, x2);
    const TangentVector l31 = log_map(x3, x1);
    const double s_triangle =
        d23 * d23 + d31 * d31 - 2.0 * block_metric(x3.manifold, l32.coords, l31.coords) -
        d12 * d12;

    const TangentVector lxz = log_map(x1, x3);
    const TangentVector lxy = log_map(x1, x2);
    const TangentVector lyz = log_map(x2, x3);
    const TangentVector lyx = log_map(x2, x1);
    const double s_pair = block_metric(x1.manifold, lxz.coords, lxy.coords) +
                          block_metric(x2.manifold, lyz.coords, lyx.coords) - d12 * d12;

    return ComparisonSlacks{s_triangle, s_pair};
}

ManifoldPoint from_chart(const ManifoldDescriptor& m, const Eigen::VectorXd& chart_coords) {
    if (chart_coords.size() != m.intrinsic_dim())
        throw DomainMismatchError("chart coordinate size does not match the intrinsic dimension");
    Eigen::VectorXd out(m.ambient_dim());
    block_from_chart(m, chart_coords, out);
    return ManifoldPoint{m, std::move(out)};
}

Eigen::VectorXd to_chart(const ManifoldPoint& x) {
    Eigen::VectorXd out(x.manifold.intrinsic_dim());
    block_to_chart(x.manifold, x.coords, out);
    return out;
}

TangentVector chart_tangent(const ManifoldPoint& x, const Eigen::VectorXd& chart_vec) {
    if (!x.manifold.flat())
        throw CapabilityError("chart_tangent requires a flat manifold");
    if (chart_vec.size() != x.manifold.intrinsic_dim())
        throw DomainMismatchError("chart vector size does not match the intrinsic dimension");
    Eigen::VectorXd out(x.manifold.ambient_dim());
    block_chart_tangent(x.manifold, x.coords, chart_vec, out);
    return TangentVector{x, std::move(out)};
}

Eigen::VectorXd tangent_chart(const TangentVector& v) {
    if (!v.base.manifold.flat())
        throw CapabilityError("tangent_chart requires a flat manifold");
    Eigen::VectorXd out(v.base.manifold.intrinsic_dim());
    block_tangent_chart(v.base.manifold, v.base.coords, v.coords, out);
    return out;
}

ManifoldPoint sample_point(const ManifoldDescriptor& m, std::mt19937_64& rng, double radius) {
    ManifoldPoint base = zero_point(m);
    TangentVector v = sample_tangent(base, rng, radius);
    return exp_map(base, v);
}

TangentVector sample_tangent(const ManifoldPoint& x, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd g(x.manifold.ambient_dim());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gauss(rng);
    block_project_tangent(x.manifold, x.coords, g);
    const double q = block_metric(x.manifold, g, g);
    const double nrm = std::sqrt(q > 0.0 ? q : 0.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double target = scale * unif(rng);
    if (nrm == 0.0) return TangentVector{x, Eigen::VectorXd::Zero(g.size())};
    return TangentVector{x, (target / nrm) * g};
}

}  // namespace hadeq
