#include "hadeq/bifunction.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace hadeq {

namespace {

constexpr double kMonotoneTol = 1e-10;
constexpr double kPseudoTol = 1e-10;
constexpr double kConvexityTol = 1e-9;
constexpr double kDiagonalTol = 1e-12;
constexpr double kThetaMinDist = 1e-6;

bool box_like_domain(const ConvexSet& s) {
    return std::holds_alternative<ConvexSet::Interval>(s.descriptor()) ||
           std::holds_alternative<ConvexSet::Box>(s.descriptor()) ||
           std::holds_alternative<ConvexSet::ChartBox>(s.descriptor());
}

}  // namespace

Bifunction::Bifunction(std::string label, ConvexSet domain, Eval eval)
    : label_(std::move(label)), domain_(std::move(domain)), eval_(std::move(eval)) {}

Bifunction& Bifunction::with_closed_form_resolvent(ClosedFormResolvent f) {
    closed_form_ = std::move(f);
    return *this;
}

Bifunction& Bifunction::with_diag_subgradient(DiagSubgradient g) {
    diag_subgrad_ = std::move(g);
    return *this;
}

ManifoldPoint Bifunction::closed_form_resolvent(double lambda, const ManifoldPoint& x) const {
    if (!closed_form_)
        throw CapabilityError("bifunction '" + label_ + "' has no closed-form resolvent");
    return closed_form_(lambda, x);
}

Eigen::VectorXd Bifunction::diag_subgradient(const ManifoldPoint& z,
                                             const ManifoldPoint& y) const {
    if (!diag_subgrad_)
        throw CapabilityError("bifunction '" + label_ + "' has no subgradient oracle");
    return diag_subgrad_(z, y);
}

Bifunction regularized(const Bifunction& F, double lambda, const ManifoldPoint& anchor) {
    if (!(lambda > 0.0)) throw DomainMismatchError("regularized: lambda must be positive");
    if (anchor.manifold != F.manifold())
        throw DomainMismatchError("regularized: anchor is on a different manifold");
    Bifunction out(
        F.label() + "_reg",
        F.domain(),
        [F, lambda, anchor](const ManifoldPoint& x, const ManifoldPoint& y) {
            const TangentVector lx_anchor = log_map(x, anchor);
            const TangentVector lx_y = log_map(x, y);
            return F(x, y) - lambda * inner(lx_anchor, lx_y);
        });
    if (F.has_diag_subgradient() && F.manifold().flat()) {
        const Eigen::VectorXd anchor_chart = to_chart(anchor);
        out.with_diag_subgradient(
            [F, lambda, anchor_chart](const ManifoldPoint& z, const ManifoldPoint& y) {
                return Eigen::VectorXd(F.diag_subgradient(z, y) -
                                       lambda * (anchor_chart - to_chart(z)));
            });
    }
    return out;
}

Bifunction negated(const Bifunction& F) {
    Bifunction out("neg_" + F.label(), F.domain(),
                   [F](const ManifoldPoint& x, const ManifoldPoint& y) { return -F(x, y); });
    return out;
}

Bifunction make_catalog_bifunction(const std::string& name) {
    if (name == "example41") {
        ConvexSet dom = ConvexSet::interval(0.5, 1.0);
        Bifunction F("example41", dom, [](const ManifoldPoint& x, const ManifoldPoint& y) {
            return x.coords[0] * (x.coords[0] - y.coords[0]);
        });
        F.with_closed_form_resolvent([dom](double lambda, const ManifoldPoint& x) {
            if (!(lambda > 1.0))
                throw CapabilityError("example41 closed form needs lambda > 1");
            Eigen::VectorXd c(1);
            c[0] = lambda * x.coords[0] / (lambda - 1.0);
            return dom.project(ManifoldPoint{x.manifold, std::move(c)});
        });
        F.with_diag_subgradient([](const ManifoldPoint& z, const ManifoldPoint&) {
            Eigen::VectorXd g(1);
            g[0] = -z.coords[0];
            return g;
        });
        return F;
    }
    if (name == "example31") {
        const ManifoldDescriptor m = ManifoldDescriptor::product(
            {ManifoldDescriptor::euclidean(1), ManifoldDescriptor::hyperbolic(1)});
        Eigen::VectorXd lo(2), hi(2);
        lo << 0.0, 0.0;
        hi << 1.0, std::numeric_limits<double>::infinity();
        ConvexSet dom = ConvexSet::chart_box(m, lo, hi);
        Bifunction F("example31", dom, [](const ManifoldPoint& x, const ManifoldPoint& y) {
            const double qx = x.coords[1] * x.coords[1] + x.coords[2] * x.coords[2];
            const double qy = y.coords[1] * y.coords[1] + y.coords[2] * y.coords[2];
            return (2.0 - x.coords[0]) * (qy - qx);
        });
        F.with_diag_subgradient([](const ManifoldPoint& z, const ManifoldPoint& y) {
            Eigen::VectorXd g(2);
            const double t = std::asinh(y.coords[1]);
            g[0] = 0.0;
            g[1] = (2.0 - z.coords[0]) * 2.0 * std::sinh(2.0 * t);
            return g;
        });
        return F;
    }
    throw ConfigError("unknown catalog bifunction '" + name + "'");
}

Bifunction make_potential(std::function<double(const Eigen::VectorXd&)> phi,
                          std::function<Eigen::VectorXd(const Eigen::VectorXd&)> phi_grad,
                          ConvexSet domain, std::string label) {
    if (!domain.manifold().flat())
        throw CapabilityError("chart-coordinate potentials require a flat manifold");
    Bifunction F(std::move(label), std::move(domain),
                 [phi](const ManifoldPoint& x, const ManifoldPoint& y) {
                     if (x.coords == y.coords) return 0.0;
                     return phi(to_chart(y)) - phi(to_chart(x));
                 });
    if (phi_grad)
        F.with_diag_subgradient([phi_grad](const ManifoldPoint&, const ManifoldPoint& y) {
            return phi_grad(to_chart(y));
        });
    return F;
}

Bifunction make_polynomial_potential(const Eigen::VectorXd& coeffs, ConvexSet domain) {
    if (domain.manifold().intrinsic_dim() != 1)
        throw CapabilityError("polynomial potentials are one-dimensional");
    auto phi = [coeffs](const Eigen::VectorXd& u) {
        double v = 0.0;
        for (Eigen::Index i = coeffs.size() - 1; i >= 0; --i) v = v * u[0] + coeffs[i];
        return v;
    };
    auto grad = [coeffs](const Eigen::VectorXd& u) {
        double v = 0.0;
        for (Eigen::Index i = coeffs.size() - 1; i >= 1; --i)
            v = v * u[0] + static_cast<double>(i) * coeffs[i];
        Eigen::VectorXd g(1);
        g[0] = v;
        return g;
    };
    Bifunction F = make_potential(phi, grad, domain, "potential_poly");
    // quadratic case has an exact proximal step on box-like domains
    if (coeffs.size() <= 3 && box_like_domain(domain) &&
        (coeffs.size() < 3 || coeffs[2] >= 0.0)) {
        const double c1 = coeffs.size() > 1 ? coeffs[1] : 0.0;
        const double c2 = coeffs.size() > 2 ? coeffs[2] : 0.0;
        ConvexSet dom = domain;
        F.with_closed_form_resolvent([c1, c2, dom](double lambda, const ManifoldPoint& x) {
            Eigen::VectorXd u = to_chart(x);
            u[0] = (lambda * u[0] - c1) / (lambda + 2.0 * c2);
            return dom.project(from_chart(x.manifold, u));
        });
    }
    return F;
}

Bifunction make_dist_power_potential(const Eigen::VectorXd& center_chart, double power,
                                     double scale, ConvexSet domain) {
    if (!(power >= 1.0)) throw DomainMismatchError("dist-power potential needs power >= 1");
    if (!(scale > 0.0)) throw DomainMismatchError("dist-power potential needs scale > 0");
    if (center_chart.size() != domain.manifold().intrinsic_dim())
        throw DomainMismatchError("dist-power potential: center size mismatch");
    auto phi = [center_chart, power, scale](const Eigen::VectorXd& u) {
        return scale * std::pow((u - center_chart).norm(), power);
    };
    auto grad = [center_chart, power, scale](const Eigen::VectorXd& u) {
        const Eigen::VectorXd r = u - center_chart;
        const double d = r.norm();
        if (d == 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(u.size()));
        return Eigen::VectorXd(scale * power * std::pow(d, power - 2.0) * r);
    };
    Bifunction F = make_potential(phi, grad, domain, "potential_dist_pow");
    if (box_like_domain(domain)) {
        ConvexSet dom = domain;
        if (power == 2.0) {
            F.with_closed_form_resolvent(
                [center_chart, scale, dom](double lambda, const ManifoldPoint& x) {
                    Eigen::VectorXd u =
                        (lambda * to_chart(x) + 2.0 * scale * center_chart) / (lambda + 2.0 * scale);
                    return dom.project(from_chart(x.manifold, u));
                });
        } else if (power == 1.0 && center_chart.size() == 1) {
            F.with_closed_form_resolvent(
                [center_chart, scale, dom](double lambda, const ManifoldPoint& x) {
                    Eigen::VectorXd u = to_chart(x);
                    const double r = u[0] - center_chart[0];
                    const double shrink = scale / lambda;
                    u[0] = std::abs(r) <= shrink ? center_chart[0]
                                                 : u[0] - shrink * (r > 0.0 ? 1.0 : -1.0);
                    return dom.project(from_chart(x.manifold, u));
                });
        }
    }
    return F;
}

Bifunction make_dist_power_potential_at(const ManifoldPoint& center, double power, double scale,
                                        ConvexSet domain) {
    if (!(power >= 1.0)) throw DomainMismatchError("dist-power potential needs power >= 1");
    if (!(scale > 0.0)) throw DomainMismatchError("dist-power potential needs scale > 0");
    if (center.manifold != domain.manifold())
        throw DomainMismatchError("dist-power potential: center is on a different manifold");
    Bifunction F("potential_dist_pow_at", domain,
                 [center, power, scale](const ManifoldPoint& x, const ManifoldPoint& y) {
                     if (x.coords == y.coords) return 0.0;
                     return scale * (std::pow(dist(y, center), power) -
                                     std::pow(dist(x, center), power));
                 });
    if (power == 2.0) {
        // the proximal step of a squared distance moves along the geodesic
        // toward the center; exact whenever that point stays feasible
        ConvexSet dom = domain;
        F.with_closed_form_resolvent([center, scale, dom](double lambda, const ManifoldPoint& x) {
            const double t = 2.0 * scale / (lambda + 2.0 * scale);
            return dom.project(geodesic_point(x, center, t));
        });
    }
    if (domain.manifold().flat()) {
        const Eigen::VectorXd cc = to_chart(center);
        F.with_diag_subgradient([cc, power, scale](const ManifoldPoint&, const ManifoldPoint& y) {
            const Eigen::VectorXd r = to_chart(y) - cc;
            const double d = r.norm();
            if (d == 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(r.size()));
            return Eigen::VectorXd(scale * power * std::pow(d, power - 2.0) * r);
        });
    }
    return F;
}

Bifunction make_affine_vector_field(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                    ConvexSet domain) {
    const int d = domain.manifold().intrinsic_dim();
    if (A.rows() != d || A.cols() != d || b.size() != d)
        throw DomainMismatchError("affine vector field: shape mismatch");
    if (!domain.manifold().flat())
        throw CapabilityError("affine vector fields require a flat manifold");
    Bifunction F("vector_field", domain,
                 [A, b](const ManifoldPoint& x, const ManifoldPoint& y) {
                     if (x.coords == y.coords) return 0.0;
                     const Eigen::VectorXd u = to_chart(x);
                     return ((A * u + b).dot(to_chart(y) - u));
                 });
    F.with_diag_subgradient([A, b](const ManifoldPoint& z, const ManifoldPoint&) {
        return Eigen::VectorXd(A * to_chart(z) + b);
    });
    if (d == 1 && A(0, 0) >= 0.0 && box_like_domain(domain)) {
        const double a = A(0, 0), b0 = b[0];
        ConvexSet dom = domain;
        F.with_closed_form_resolvent([a, b0, dom](double lambda, const ManifoldPoint& x) {
            Eigen::VectorXd u = to_chart(x);
            u[0] = (lambda * u[0] - b0) / (a + lambda);
            return dom.project(from_chart(x.manifold, u));
        });
    }
    return F;
}

namespace {

PropertyReport pair_falsifier(const Bifunction& F, std::size_t samples, std::uint64_t seed,
                              BifProperty prop,
                              const std::function<double(const ManifoldPoint&,
                                                         const ManifoldPoint&)>& violation) {
    std::mt19937_64 rng(seed);
    PropertyReport rep;
    rep.property = prop;
    rep.samples = samples;
    rep.seed = seed;
    for (std::size_t i = 0; i < samples; ++i) {
        ManifoldPoint x = F.domain().sample(rng);
        ManifoldPoint y = F.domain().sample(rng);
        const double v = violation(x, y);
        if (v > 0.0) {
            rep.verdict = CheckVerdict::CounterexampleFound;
            rep.witness = std::make_pair(std::move(x), std::move(y));
            rep.violation = v;
            return rep;
        }
    }
    rep.verdict = CheckVerdict::PassedOnSamples;
    return rep;
}

}  // namespace

PropertyReport check_monotone(const Bifunction& F, std::size_t samples, std::uint64_t seed) {
    return pair_falsifier(F, samples, seed, BifProperty::Monotone,
                          [&F](const ManifoldPoint& x, const ManifoldPoint& y) {
                              return F(x, y) + F(y, x) - kMonotoneTol;
                          });
}

PropertyReport check_pseudomonotone(const Bifunction& F, std::size_t samples,
                                    std::uint64_t seed) {
    return pair_falsifier(F, samples, seed, BifProperty::Pseudomonotone,
                          [&F](const ManifoldPoint& x, const ManifoldPoint& y) {
                              const double fxy = F(x, y);
                              if (fxy <= kPseudoTol) return 0.0;
                              return F(y, x) - kPseudoTol;
                          });
}

PropertyReport estimate_theta(const Bifunction& F, std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PropertyReport rep;
    rep.property = BifProperty::ThetaUndermonotone;
    rep.verdict = CheckVerdict::PassedOnSamples;
    rep.samples = samples;
    rep.seed = seed;
    double theta = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const ManifoldPoint x = F.domain().sample(rng);
        const ManifoldPoint y = F.domain().sample(rng);
        const double d = dist(x, y);
        if (d < kThetaMinDist) continue;  // the defining ratio is 0/0 on the diagonal
        theta = std::max(theta, (F(x, y) + F(y, x)) / (d * d));
    }
    rep.theta_estimate = theta;
    return rep;
}

PropertyReport check_convexity_in_y(const Bifunction& F, std::size_t samples,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PropertyReport rep;
    rep.property = BifProperty::ConvexInY;
    rep.samples = samples;
    rep.seed = seed;
    for (std::size_t i = 0; i < samples; ++i) {
        const ManifoldPoint x = F.domain().sample(rng);
        ManifoldPoint y1 = F.domain().sample(rng);
        ManifoldPoint y2 = F.domain().sample(rng);
        const ManifoldPoint mid = geodesic_point(y1, y2, 0.5);
        const double v = F(x, mid) - 0.5 * (F(x, y1) + F(x, y2)) - kConvexityTol;
        if (v > 0.0) {
            rep.verdict = CheckVerdict::CounterexampleFound;
            rep.witness = std::make_pair(std::move(y1), std::move(y2));
            rep.violation = v;
            return rep;
        }
    }
    rep.verdict = CheckVerdict::PassedOnSamples;
    return rep;
}

PropertyReport check_diagonal_zero(const Bifunction& F, std::size_t samples,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PropertyReport rep;
    rep.property = BifProperty::DiagonalZero;
    rep.samples = samples;
    rep.seed = seed;
    for (std::size_t i = 0; i < samples; ++i) {
        ManifoldPoint x = F.domain().sample(rng);
        const double v = std::abs(F(x, x)) - kDiagonalTol;
        if (v > 0.0) {
            rep.verdict = CheckVerdict::CounterexampleFound;
            rep.witness = std::make_pair(x, x);
            rep.violation = v;
            return rep;
        }
    }
    rep.verdict = CheckVerdict::PassedOnSamples;
    return rep;
}

}  // namespace hadeq
