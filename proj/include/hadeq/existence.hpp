#pragma once

#include <optional>
#include <vector>

#include "hadeq/bifunction.hpp"

namespace hadeq {

/// Rectangular grid in chart coordinates; the desk-scale discretization
/// behind the gap residual and the brute-force equilibrium oracle.
struct GridSpec {
    std::vector<int> resolution;  // points per axis, each >= 2
    Eigen::VectorXd lo, hi;       // finite chart bounds

    void validate(const ManifoldDescriptor& m) const;
};

/// Nodes of the grid, filtered to members of the set (boundary tol 1e-10).
/// Node order is lexicographic with the last axis fastest; reductions over
/// nodes break ties toward the lowest index.
std::vector<ManifoldPoint> grid_nodes(const GridSpec& spec, const ConvexSet& domain);

/// Default grid for a set: 201 points per axis up to 2 intrinsic dimensions,
/// 51 for 3 and beyond; unbounded edges clipped to +-halfwidth.
GridSpec default_grid(const ConvexSet& domain, double halfwidth = 3.0);

/// Equilibrium residual of x: max over grid nodes y of max(0, -F(x, y)).
/// Zero exactly at grid-relative equilibria.
double gap(const Bifunction& F, const ConvexSet& domain, const ManifoldPoint& x,
           const std::vector<ManifoldPoint>& nodes);
double gap(const Bifunction& F, const ConvexSet& domain, const ManifoldPoint& x,
           const GridSpec& spec);

/// All grid nodes whose gap does not exceed tol; the desk-scale ground
/// truth for the solution set.
std::vector<ManifoldPoint> brute_force_equilibria(const Bifunction& F, const ConvexSet& domain,
                                                  const GridSpec& spec, double tol);

/// Truncation of the domain to the closed geodesic ball B(z0, k).
ConvexSet truncate_to_ball(const ConvexSet& domain, const ManifoldPoint& z0, double k);

struct DivergenceAnchorReport {
    bool found = false;
    std::optional<ManifoldPoint> anchor;
    std::optional<std::size_t> onset_index;  // first path index from which F(z^k, anchor) <= 0
};

/// Searches the candidate list for a point that the supplied divergent path
/// eventually cannot improve on: F(z^k, x*) <= 1e-10 for all k >= k0.
/// Candidates are scanned in order; the first success is reported.
/// Preconditions: path has >= 3 points and d(z^k, z0) strictly increases.
DivergenceAnchorReport check_divergence_anchor(const Bifunction& F, const ManifoldPoint& z0,
                                               const std::vector<ManifoldPoint>& path,
                                               const std::vector<ManifoldPoint>& candidates);

struct CoercivityReport {
    bool passed = false;
    std::size_t samples_outside = 0;
    std::optional<ManifoldPoint> witness;  // sample violating strict negativity
    // when passed, the divergence-anchor condition follows for this bifunction
    bool anchor_condition_implied = false;
};

/// Samples x in domain \ B and tests F(x, y0) < -1e-12. A pass implies the
/// anchor condition exercised by check_divergence_anchor.
CoercivityReport check_coercivity(const Bifunction& F, const ConvexSet& domain,
                                  const ConvexSet& B, const ManifoldPoint& y0,
                                  std::size_t sample_count, std::uint64_t seed);

/// Two-point level-set covering: for sampled pairs (y1, y2) in the truncated
/// domain and 11 points on the geodesic segment between them, verifies
/// min(F(y1, g(t)), F(y2, g(t))) <= 1e-10.
PropertyReport check_segment_level_cover(const Bifunction& F, const ConvexSet& truncated,
                                         std::size_t pair_samples, std::uint64_t seed);

}  // namespace hadeq
