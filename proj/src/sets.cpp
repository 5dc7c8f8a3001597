#include "hadeq/sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hadeq {

namespace {

constexpr int kAltProjMaxSweeps = 500;
constexpr double kAltProjTol = 1e-10;
constexpr int kSampleMaxTries = 100000;

double clampv(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

ConvexSet::ConvexSet(ManifoldDescriptor m,
                     std::variant<Interval, Box, Ball, ChartBox, Intersection> d)
    : manifold_(std::move(m)), desc_(std::move(d)) {}

ConvexSet ConvexSet::interval(double lo, double hi) {
    if (!(lo <= hi)) throw DomainMismatchError("interval: lo must not exceed hi");
    return ConvexSet(ManifoldDescriptor::euclidean(1), Interval{lo, hi});
}

ConvexSet ConvexSet::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (lo.size() != hi.size() || lo.size() < 1)
        throw DomainMismatchError("box: bound sizes disagree");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i])) throw DomainMismatchError("box: lo must not exceed hi");
    return ConvexSet(ManifoldDescriptor::euclidean(static_cast<int>(lo.size())), Box{lo, hi});
}

ConvexSet ConvexSet::geodesic_ball(const ManifoldPoint& center, double radius) {
    if (!(radius >= 0.0)) throw DomainMismatchError("geodesic_ball: negative radius");
    return ConvexSet(center.manifold, Ball{center, radius});
}

ConvexSet ConvexSet::chart_box(const ManifoldDescriptor& m, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
    if (!m.flat())
        throw CapabilityError("chart_box requires a flat manifold; boxes in normal "
                              "coordinates are not geodesically convex otherwise");
    if (lo.size() != m.intrinsic_dim() || hi.size() != m.intrinsic_dim())
        throw DomainMismatchError("chart_box: bound sizes do not match the intrinsic dimension");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i])) throw DomainMismatchError("chart_box: lo must not exceed hi");
    return ConvexSet(m, ChartBox{lo, hi});
}

ConvexSet ConvexSet::intersection(std::vector<ConvexSet> parts) {
    if (parts.empty()) throw DomainMismatchError("intersection: no parts");
    for (std::size_t i = 1; i < parts.size(); ++i)
        if (parts[i].manifold() != parts[0].manifold())
            throw DomainMismatchError("intersection: parts live on different manifolds");
    ManifoldDescriptor m = parts[0].manifold();
    return ConvexSet(std::move(m), Intersection{std::move(parts)});
}

bool ConvexSet::is_intersection() const {
    return std::holds_alternative<Intersection>(desc_);
}

bool ConvexSet::contains(const ManifoldPoint& x, double tol) const {
    if (x.manifold != manifold_)
        throw DomainMismatchError("contains: point is on a different manifold");
    if (const auto* iv = std::get_if<Interval>(&desc_)) {
        const double v = x.coords[0];
        return v >= iv->lo - tol && v <= iv->hi + tol;
    }
    if (const auto* bx = std::get_if<Box>(&desc_)) {
        for (Eigen::Index i = 0; i < x.coords.size(); ++i)
            if (x.coords[i] < bx->lo[i] - tol || x.coords[i] > bx->hi[i] + tol) return false;
        return true;
    }
    if (const auto* bl = std::get_if<Ball>(&desc_)) {
        return dist(x, bl->center) <= bl->radius + tol;
    }
    if (const auto* cb = std::get_if<ChartBox>(&desc_)) {
        const Eigen::VectorXd u = to_chart(x);
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (u[i] < cb->lo[i] - tol || u[i] > cb->hi[i] + tol) return false;
        return true;
    }
    const auto& parts = std::get<Intersection>(desc_).parts;
    for (const auto& p : parts)
        if (!p.contains(x, tol)) return false;
    return true;
}

ManifoldPoint ConvexSet::project(const ManifoldPoint& x) const {
    if (x.manifold != manifold_)
        throw DomainMismatchError("project: point is on a different manifold");
    if (const auto* iv = std::get_if<Interval>(&desc_)) {
        Eigen::VectorXd c(1);
        c[0] = clampv(x.coords[0], iv->lo, iv->hi);
        return ManifoldPoint{manifold_, std::move(c)};
    }
    if (const auto* bx = std::get_if<Box>(&desc_)) {
        Eigen::VectorXd c = x.coords;
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = clampv(c[i], bx->lo[i], bx->hi[i]);
        return ManifoldPoint{manifold_, std::move(c)};
    }
    if (const auto* bl = std::get_if<Ball>(&desc_)) {
        const double d = dist(x, bl->center);
        if (d <= bl->radius) return x;
        TangentVector dir = log_map(bl->center, x);
        return exp_map(bl->center, scaled(dir, bl->radius / d));
    }
    if (const auto* cb = std::get_if<ChartBox>(&desc_)) {
        Eigen::VectorXd u = to_chart(x);
        bool inside = true;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double v = clampv(u[i], cb->lo[i], cb->hi[i]);
            if (v != u[i]) inside = false;
            u[i] = v;
        }
        return inside ? x : from_chart(manifold_, u);
    }
    // alternating projections onto the parts
    const auto& parts = std::get<Intersection>(desc_).parts;
    ManifoldPoint cur = x;
    for (int sweep = 0; sweep < kAltProjMaxSweeps; ++sweep) {
        ManifoldPoint prev = cur;
        for (const auto& p : parts) cur = p.project(cur);
        if (dist(prev, cur) <= kAltProjTol && contains(cur, kAltProjTol)) break;
    }
    return cur;
}

double ConvexSet::distance_to(const ManifoldPoint& x) const {
    return dist(x, project(x));
}

void ConvexSet::chart_bounds(double halfwidth, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    const int d = manifold_.intrinsic_dim();
    lo.resize(d);
    hi.resize(d);
    if (const auto* iv = std::get_if<Interval>(&desc_)) {
        lo[0] = iv->lo;
        hi[0] = iv->hi;
        return;
    }
    if (const auto* bx = std::get_if<Box>(&desc_)) {
        lo = bx->lo;
        hi = bx->hi;
        return;
    }
    if (const auto* bl = std::get_if<Ball>(&desc_)) {
        // factor distances never exceed the product distance
        const Eigen::VectorXd c = to_chart(bl->center);
        lo = c.array() - bl->radius;
        hi = c.array() + bl->radius;
        return;
    }
    if (const auto* cb = std::get_if<ChartBox>(&desc_)) {
        lo = cb->lo;
        hi = cb->hi;
    } else {
        const auto& parts = std::get<Intersection>(desc_).parts;
        lo.setConstant(-std::numeric_limits<double>::infinity());
        hi.setConstant(std::numeric_limits<double>::infinity());
        Eigen::VectorXd plo(d), phi(d);
        for (const auto& p : parts) {
            p.chart_bounds(halfwidth, plo, phi);
            lo = lo.cwiseMax(plo);
            hi = hi.cwiseMin(phi);
        }
    }
    for (int i = 0; i < d; ++i) {
        if (!std::isfinite(lo[i])) lo[i] = -halfwidth;
        if (!std::isfinite(hi[i])) hi[i] = halfwidth;
        if (lo[i] > hi[i]) throw DegenerateInputError("chart_bounds: empty bounding box");
    }
}

ManifoldPoint ConvexSet::sample(std::mt19937_64& rng, double halfwidth) const {
    if (const auto* bl = std::get_if<Ball>(&desc_)) {
        if (!manifold_.flat()) {
            TangentVector v = sample_tangent(bl->center, rng, bl->radius);
            return exp_map(bl->center, v);
        }
    }
    Eigen::VectorXd lo, hi;
    chart_bounds(halfwidth, lo, hi);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd u(lo.size());
    for (int tries = 0; tries < kSampleMaxTries; ++tries) {
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = lo[i] + (hi[i] - lo[i]) * unif(rng);
        ManifoldPoint p = from_chart(manifold_, u);
        if (contains(p, 1e-12)) return p;
    }
    throw InsufficientEvidenceError("sample: rejection sampling failed; set may be thin in its "
                                    "bounding box");
}

}  // namespace hadeq
