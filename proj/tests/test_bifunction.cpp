#include <doctest.h>

#include <cmath>

#include "hadeq/bifunction.hpp"
#include "test_helpers.hpp"

using namespace hadeq;
using namespace hadeq::test;

namespace {

Bifunction quadratic_potential_on_segment() {
    // phi(t) = t^2 on [-1, 1]
    return make_polynomial_potential(vec({0, 0, 1}), ConvexSet::interval(-1.0, 1.0));
}

}  // namespace

TEST_CASE("catalog evaluations") {
    const Bifunction f41 = make_catalog_bifunction("example41");
    CHECK(f41(pt(e1(), {0.5}), pt(e1(), {1.0})) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(f41(pt(e1(), {0.7}), pt(e1(), {0.7})) == 0.0);

    const Bifunction f31 = make_catalog_bifunction("example31");
    const ManifoldPoint star = pt(r_x_h1(), {1, 0, 1});
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i)
        CHECK(f31(star, f31.domain().sample(rng)) >= 0.0);  // apex point is never improved on

    CHECK_THROWS_AS((void)make_catalog_bifunction("nope"), ConfigError);
}

TEST_CASE("diagonal vanishes across the catalog") {
    const Bifunction entries[] = {
        make_catalog_bifunction("example41"),
        make_catalog_bifunction("example31"),
        quadratic_potential_on_segment(),
        make_affine_vector_field(Eigen::MatrixXd::Identity(1, 1), vec({-0.3}),
                                 ConvexSet::interval(-1.0, 2.0)),
    };
    for (const auto& F : entries) {
        const PropertyReport rep = check_diagonal_zero(F, 1000, 5);
        CHECK(rep.verdict == CheckVerdict::PassedOnSamples);
    }
}

TEST_CASE("regularization keeps the diagonal at zero") {
    const Bifunction f31 = make_catalog_bifunction("example31");
    const ManifoldPoint z = pt(r_x_h1(), {0.5, std::sinh(0.3), std::cosh(0.3)});
    const Bifunction reg = regularized(f31, 3.0, z);
    const PropertyReport rep = check_diagonal_zero(reg, 500, 7);
    CHECK(rep.verdict == CheckVerdict::PassedOnSamples);
    CHECK_THROWS_AS((void)regularized(f31, 0.0, z), DomainMismatchError);
}

TEST_CASE("regularized example41 vanishes at the resolvent point") {
    // F_{lambda,z}(x,y) = (x - y)(x + lambda (z - x)); the bracket root is
    // lambda z / (lambda - 1)
    const Bifunction f41 = make_catalog_bifunction("example41");
    const double lambda = 7.0;
    const ManifoldPoint z = pt(e1(), {0.5});
    const Bifunction reg = regularized(f41, lambda, z);
    const double root = lambda * 0.5 / (lambda - 1.0);
    CHECK(root == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    for (double y : {0.5, 0.61, 0.75, 0.9, 1.0})
        CHECK(reg(pt(e1(), {root}), pt(e1(), {y})) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("regularizing a vector field shifts it by the proximal term") {
    const ConvexSet dom = ConvexSet::interval(-2.0, 2.0);
    const Bifunction F =
        make_affine_vector_field(2.0 * Eigen::MatrixXd::Identity(1, 1), vec({0.5}), dom);
    const double lambda = 3.0;
    const ManifoldPoint z = pt(e1(), {0.25});
    const Bifunction reg = regularized(F, lambda, z);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const ManifoldPoint x = dom.sample(rng);
        const ManifoldPoint y = dom.sample(rng);
        const double vx = 2.0 * x.coords[0] + 0.5;
        const double shifted = (vx - lambda * (z.coords[0] - x.coords[0])) *
                               (y.coords[0] - x.coords[0]);
        CHECK(reg(x, y) == doctest::Approx(shifted).epsilon(1e-12));
    }
}

TEST_CASE("example41 is 1-undermonotone and pseudomonotone but not monotone") {
    const Bifunction F = make_catalog_bifunction("example41");
    const PropertyReport mono = check_monotone(F, 20000, 17);
    CHECK(mono.verdict == CheckVerdict::CounterexampleFound);
    REQUIRE(mono.witness.has_value());
    const double sum = F(mono.witness->first, mono.witness->second) +
                       F(mono.witness->second, mono.witness->first);
    CHECK(sum > 1e-10);

    CHECK(check_pseudomonotone(F, 20000, 17).verdict == CheckVerdict::PassedOnSamples);

    const PropertyReport theta = estimate_theta(F, 20000, 17);
    CHECK(*theta.theta_estimate == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("example31 is pseudomonotone but not monotone") {
    const Bifunction F = make_catalog_bifunction("example31");
    CHECK(check_monotone(F, 20000, 19).verdict == CheckVerdict::CounterexampleFound);
    CHECK(check_pseudomonotone(F, 20000, 19).verdict == CheckVerdict::PassedOnSamples);
}

TEST_CASE("potentials are monotone with exactly cancelling sums") {
    const Bifunction F = quadratic_potential_on_segment();
    CHECK(check_monotone(F, 5000, 23).verdict == CheckVerdict::PassedOnSamples);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const ManifoldPoint x = F.domain().sample(rng);
        const ManifoldPoint y = F.domain().sample(rng);
        CHECK(F(x, y) + F(y, x) == 0.0);
    }
}

TEST_CASE("convexity in the second argument") {
    CHECK(check_convexity_in_y(quadratic_potential_on_segment(), 3000, 29).verdict ==
          CheckVerdict::PassedOnSamples);
    CHECK(check_convexity_in_y(make_catalog_bifunction("example41"), 3000, 29).verdict ==
          CheckVerdict::PassedOnSamples);
    CHECK(check_convexity_in_y(make_catalog_bifunction("example31"), 3000, 29).verdict ==
          CheckVerdict::PassedOnSamples);

    // concave potential must be caught
    const Bifunction concave =
        make_polynomial_potential(vec({0, 0, -1}), ConvexSet::interval(-1.0, 1.0));
    CHECK(check_convexity_in_y(concave, 3000, 29).verdict == CheckVerdict::CounterexampleFound);
}

TEST_CASE("undermonotone bifunctions regularize to monotone ones") {
    const Bifunction F = make_catalog_bifunction("example41");
    std::mt19937_64 rng(31);
    for (double lambda : {1.0, 2.0, 7.0}) {
        for (int i = 0; i < 5; ++i) {
            const ManifoldPoint z = F.domain().sample(rng);
            const Bifunction reg = regularized(F, lambda, z);
            CHECK(check_monotone(reg, 2000, 37 + i).verdict == CheckVerdict::PassedOnSamples);
        }
    }
}

TEST_CASE("dist-power potentials evaluate as advertised") {
    const ConvexSet dom = ConvexSet::interval(-1.0, 1.0);
    const Bifunction lin = make_dist_power_potential(vec({0.25}), 1.0, 0.5, dom);
    CHECK(lin(pt(e1(), {0.25}), pt(e1(), {0.75})) == doctest::Approx(0.25).epsilon(1e-14));
    const Bifunction quad = make_dist_power_potential(vec({0.0}), 2.0, 1.0, dom);
    CHECK(quad(pt(e1(), {0.5}), pt(e1(), {-1.0})) == doctest::Approx(0.75).epsilon(1e-14));
}
