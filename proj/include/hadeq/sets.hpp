#pragma once

#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "hadeq/geometry.hpp"

namespace hadeq {

/// Closed geodesically convex subset of a manifold with membership,
/// metric projection and distance.
///
/// Descriptors:
///   Interval  — [lo, hi] on Euclidean(1)
///   Box       — coordinate box on Euclidean(n)
///   Ball      — geodesic ball B(center, radius) on any manifold
///   ChartBox  — box in chart coordinates on a flat manifold (factor-wise
///               interval per Euclidean/H^1 axis; +-inf edges allowed)
///   Intersection — finite intersection of the above
///
/// Projection is exact for Interval/Box/ChartBox (factor-wise clamp, the
/// chart being an isometry) and for Ball (radial). Intersections use
/// alternating projections (500 sweeps, tol 1e-10), which reach a member
/// but not necessarily the nearest one in more than one dimension.
class ConvexSet {
public:
    struct Interval {
        double lo, hi;
    };
    struct Box {
        Eigen::VectorXd lo, hi;
    };
    struct Ball {
        ManifoldPoint center;
        double radius;
    };
    struct ChartBox {
        Eigen::VectorXd lo, hi;  // entries may be +-infinity
    };
    struct Intersection {
        std::vector<ConvexSet> parts;
    };

    static ConvexSet interval(double lo, double hi);
    static ConvexSet box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static ConvexSet geodesic_ball(const ManifoldPoint& center, double radius);
    static ConvexSet chart_box(const ManifoldDescriptor& m, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi);
    static ConvexSet intersection(std::vector<ConvexSet> parts);

    const ManifoldDescriptor& manifold() const { return manifold_; }

    bool contains(const ManifoldPoint& x, double tol = 1e-10) const;
    ManifoldPoint project(const ManifoldPoint& x) const;
    double distance_to(const ManifoldPoint& x) const;

    /// Finite chart box that contains (Interval/Box/ChartBox/Ball) or bounds
    /// (Intersection) the set; infinite edges are clipped to +-halfwidth
    /// around the canonical chart origin.
    void chart_bounds(double halfwidth, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const;

    /// Uniform-ish member sample: rejection from chart_bounds on flat
    /// manifolds, exponential sampling for balls on curved ones.
    ManifoldPoint sample(std::mt19937_64& rng, double halfwidth = 3.0) const;

    bool is_intersection() const;
    const std::variant<Interval, Box, Ball, ChartBox, Intersection>& descriptor() const {
        return desc_;
    }

private:
    ConvexSet(ManifoldDescriptor m, std::variant<Interval, Box, Ball, ChartBox, Intersection> d);

    ManifoldDescriptor manifold_;
    std::variant<Interval, Box, Ball, ChartBox, Intersection> desc_;
};

}  // namespace hadeq
