#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hadeq/errors.hpp"

namespace hadeq {

/// Numerical knobs shared by the geometry kernel and its property tests.
struct GeometryTolerances {
    double hyperboloid = 1e-10;   // |<x,x>_L + 1| allowed on point validation
    double tangency = 1e-10;      // |<x,v>_L| allowed on tangent validation
    double roundtrip = 1e-9;      // log(x, exp(x,v)) vs v, componentwise
    double metric_identity = 1e-9;  // | ||log(x,y)|| - dist(x,y) |
    double triangle = 1e-12;      // triangle-inequality slack on sampled triples
    double comparison = 1e-9;     // slack sign tolerance for curvature inequalities
    double series_cutoff = 1e-8;  // below this argument, sinh(t)/t uses its series
};

GeometryTolerances& geometry_tolerances();

enum class ManifoldKind { Euclidean, Hyperbolic, Product };

/// Descriptor of a Hadamard manifold: Euclidean(n), the Lorentz-model
/// hyperbolic space Hyperbolic(n) (ambient dimension n+1), or a product.
struct ManifoldDescriptor {
    ManifoldKind kind = ManifoldKind::Euclidean;
    int n = 1;  // intrinsic dimension for Euclidean/Hyperbolic
    std::vector<ManifoldDescriptor> factors;

    static ManifoldDescriptor euclidean(int n);
    static ManifoldDescriptor hyperbolic(int n);
    static ManifoldDescriptor product(std::vector<ManifoldDescriptor> factors);

    int ambient_dim() const;
    int intrinsic_dim() const;

    /// True when every factor is Euclidean or Hyperbolic(1); such manifolds
    /// have null sectional curvature and an isometric global chart.
    bool flat() const;

    bool operator==(const ManifoldDescriptor& other) const;
    bool operator!=(const ManifoldDescriptor& other) const { return !(*this == other); }

    std::string to_string() const;
};

struct ManifoldPoint {
    ManifoldDescriptor manifold;
    Eigen::VectorXd coords;  // ambient coordinates
};

struct TangentVector {
    ManifoldPoint base;
    Eigen::VectorXd coords;  // ambient coordinates
};

/// Validating constructors; throw DomainMismatchError on bad shape and
/// DegenerateInputError when the hyperboloid/tangency invariants fail.
ManifoldPoint make_point(const ManifoldDescriptor& m, const Eigen::VectorXd& coords);
TangentVector make_tangent(const ManifoldPoint& base, const Eigen::VectorXd& coords);

ManifoldPoint zero_point(const ManifoldDescriptor& m);  // canonical base point
TangentVector zero_tangent(const ManifoldPoint& x);

/// Riemannian inner product of two tangent vectors based at x.
double inner(const ManifoldPoint& x, const TangentVector& u, const TangentVector& v);
double inner(const TangentVector& u, const TangentVector& v);
double norm(const TangentVector& v);

ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v);
TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y);
double dist(const ManifoldPoint& x, const ManifoldPoint& y);

/// Point on the geodesic from x to y at parameter t in [0,1].
ManifoldPoint geodesic_point(const ManifoldPoint& x, const ManifoldPoint& y, double t);

TangentVector scaled(const TangentVector& v, double s);

struct ComparisonSlacks {
    double s_triangle;  // law-of-cosines slack, nonpositive on Hadamard manifolds
    double s_pair;      // two-point log-product slack, nonnegative
};

/// Curvature comparison quantities for a geodesic triangle (x1, x2, x3).
/// Throws DegenerateInputError when two vertices coincide exactly.
ComparisonSlacks comparison_slacks(const ManifoldPoint& x1, const ManifoldPoint& x2,
                                   const ManifoldPoint& x3);

// --- Global chart (normal coordinates at the canonical base point) ---
//
// Euclidean factors use the identity, Hyperbolic(1) uses t -> (sinh t, cosh t),
// Hyperbolic(n>=2) uses the exponential chart at the apex. For flat()
// manifolds the chart is a global isometry.

ManifoldPoint from_chart(const ManifoldDescriptor& m, const Eigen::VectorXd& chart_coords);
Eigen::VectorXd to_chart(const ManifoldPoint& x);

/// Convert between chart coordinates and tangent vectors. Only valid on
/// flat() manifolds, where the chart is an isometry; throws CapabilityError
/// otherwise.
TangentVector chart_tangent(const ManifoldPoint& x, const Eigen::VectorXd& chart_vec);
Eigen::VectorXd tangent_chart(const TangentVector& v);

// --- Random sampling (deterministic given the engine state) ---

/// Point within geodesic distance <= radius of the canonical base point.
ManifoldPoint sample_point(const ManifoldDescriptor& m, std::mt19937_64& rng, double radius);

/// Tangent vector at x with norm <= scale.
TangentVector sample_tangent(const ManifoldPoint& x, std::mt19937_64& rng, double scale);

}  // namespace hadeq
