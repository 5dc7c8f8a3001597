#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "hadeq/sets.hpp"

namespace hadeq {

/// Evaluable bifunction F(x, y) on a closed convex domain, vanishing on the
/// diagonal. Optional attachments: an exact resolvent map (lambda, x) -> z
/// solving the regularized problem in closed form, and a subgradient oracle
/// for y -> F(z, y) in chart coordinates (flat manifolds).
class Bifunction {
public:
    using Eval = std::function<double(const ManifoldPoint&, const ManifoldPoint&)>;
    using ClosedFormResolvent = std::function<ManifoldPoint(double, const ManifoldPoint&)>;
    using DiagSubgradient =
        std::function<Eigen::VectorXd(const ManifoldPoint&, const ManifoldPoint&)>;

    Bifunction(std::string label, ConvexSet domain, Eval eval);

    double operator()(const ManifoldPoint& x, const ManifoldPoint& y) const { return eval_(x, y); }

    const std::string& label() const { return label_; }
    const ConvexSet& domain() const { return domain_; }
    const ManifoldDescriptor& manifold() const { return domain_.manifold(); }

    Bifunction& with_closed_form_resolvent(ClosedFormResolvent f);
    Bifunction& with_diag_subgradient(DiagSubgradient g);

    bool has_closed_form_resolvent() const { return static_cast<bool>(closed_form_); }
    ManifoldPoint closed_form_resolvent(double lambda, const ManifoldPoint& x) const;

    bool has_diag_subgradient() const { return static_cast<bool>(diag_subgrad_); }
    Eigen::VectorXd diag_subgradient(const ManifoldPoint& z, const ManifoldPoint& y) const;

private:
    std::string label_;
    ConvexSet domain_;
    Eval eval_;
    ClosedFormResolvent closed_form_;
    DiagSubgradient diag_subgrad_;
};

/// Tikhonov-type regularization F(x,y) - lambda * <log_x z, log_x y>,
/// anchored at z. Throws DomainMismatchError for lambda <= 0 or z off the
/// domain's manifold.
Bifunction regularized(const Bifunction& F, double lambda, const ManifoldPoint& anchor);

/// Sign-flipped handle (losses <-> advantages).
Bifunction negated(const Bifunction& F);

// --- catalog ---

/// Built-in problems addressable by name from experiment configs:
///   "example41" — F(x,y) = x(x-y) on [1/2, 1]
///   "example31" — F(x,y) = (2-x_1)((y_2^2+z_2^2)-(y_1^2+z_1^2)) on the
///                 [0,1] x H^1 ray region of R x H^1
Bifunction make_catalog_bifunction(const std::string& name);

/// F(x,y) = phi(y) - phi(x) for a potential phi given in chart coordinates.
Bifunction make_potential(std::function<double(const Eigen::VectorXd&)> phi,
                          std::function<Eigen::VectorXd(const Eigen::VectorXd&)> phi_grad,
                          ConvexSet domain, std::string label);

/// Convenience potentials (flat manifolds; chart coordinates).
Bifunction make_polynomial_potential(const Eigen::VectorXd& coeffs, ConvexSet domain);
Bifunction make_dist_power_potential(const Eigen::VectorXd& center_chart, double power,
                                     double scale, ConvexSet domain);

/// scale * dist(y, center)^power on an arbitrary manifold; the curved-space
/// entry point for experimental runs. The squared case carries the geodesic
/// interpolation as its proximal step.
Bifunction make_dist_power_potential_at(const ManifoldPoint& center, double power, double scale,
                                        ConvexSet domain);

/// F(x,y) = <V(x), log_x y> for the affine field V(u) = A u + b in chart
/// coordinates (flat manifolds).
Bifunction make_affine_vector_field(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                    ConvexSet domain);

// --- empirical property checks (sampling falsifiers, not provers) ---

enum class BifProperty {
    Monotone,
    Pseudomonotone,
    ThetaUndermonotone,
    ConvexInY,
    DiagonalZero,
    SegmentLevelCover,
};

enum class CheckVerdict { PassedOnSamples, CounterexampleFound };

struct PropertyReport {
    BifProperty property;
    CheckVerdict verdict = CheckVerdict::PassedOnSamples;
    std::optional<std::pair<ManifoldPoint, ManifoldPoint>> witness;
    std::optional<double> theta_estimate;
    double violation = 0.0;  // margin by which the witness breaks the inequality
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

/// F(x,y) + F(y,x) <= 0 on sampled pairs (margin 1e-10).
PropertyReport check_monotone(const Bifunction& F, std::size_t samples, std::uint64_t seed);

/// F(x,y) >= 0 implies F(y,x) <= 0 on sampled pairs (margin 1e-10 on both sides).
PropertyReport check_pseudomonotone(const Bifunction& F, std::size_t samples, std::uint64_t seed);

/// Smallest theta compatible with the samples:
/// max over pairs of (F(x,y)+F(y,x)) / d^2(x,y), clamped below at 0;
/// pairs closer than 1e-6 are skipped.
PropertyReport estimate_theta(const Bifunction& F, std::size_t samples, std::uint64_t seed);

/// Geodesic midpoint convexity of y -> F(x,y) (margin 1e-9).
PropertyReport check_convexity_in_y(const Bifunction& F, std::size_t samples, std::uint64_t seed);

/// |F(x,x)| <= 1e-12 on sampled x.
PropertyReport check_diagonal_zero(const Bifunction& F, std::size_t samples, std::uint64_t seed);

}  // namespace hadeq
