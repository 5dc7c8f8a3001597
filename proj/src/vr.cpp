#include "hadeq/vr.hpp"

#include <cmath>

namespace hadeq {

namespace {

constexpr double kPayoffBand = 1e-10;   // classification band around zero payoff
constexpr double kStepTol = 1e-9;       // worthwhile-step slack along traces
constexpr double kResolventTol = 1e-8;
constexpr double kProbeDistance = 1e-12;

}  // namespace

double inconvenience(const Experience& e, const ManifoldPoint& y) {
    if (e.past.manifold != e.current.manifold || y.manifold != e.current.manifold)
        throw DomainMismatchError("inconvenience: mixed manifolds");
    const ManifoldPoint& z = e.current;
    return inner(log_map(z, e.past), log_map(z, y));
}

double worthwhile_payoff(const Bifunction& A, double lambda, const Experience& e,
                         const ManifoldPoint& y) {
    if (!(lambda > 0.0)) throw DomainMismatchError("worthwhile_payoff: lambda must be positive");
    return A(e.current, y) - lambda * inconvenience(e, y);
}

TrapReport classify_stationary_trap(const Bifunction& A, double lambda_star,
                                    const Experience& e_star, const ManifoldPoint& x_star,
                                    const ConvexSet& domain, std::size_t samples,
                                    std::uint64_t seed) {
    if (dist(e_star.current, x_star) > 1e-12)
        throw DomainMismatchError("classify_stationary_trap: experience's current action must "
                                  "be the candidate point");
    if (!domain.contains(x_star, 1e-9))
        throw DomainMismatchError("classify_stationary_trap: x* is not in the domain");

    std::mt19937_64 rng(seed);
    TrapReport rep;
    rep.lambda_star = lambda_star;

    bool all_strictly_negative = true;
    double max_payoff = 0.0;
    bool any_evidence = false;
    std::size_t probes_left = 8;

    auto consider = [&](const ManifoldPoint& y) -> bool {
        if (y.coords == x_star.coords) return false;  // the stay move is always neutral
        const double delta = worthwhile_payoff(A, lambda_star, e_star, y);
        any_evidence = true;
        max_payoff = std::max(max_payoff, delta);
        if (delta > kPayoffBand) {
            rep.verdict = TrapVerdict::NotStationary;
            rep.witness = y;
            rep.max_payoff_found = delta;
            return true;
        }
        if (delta >= -kPayoffBand) all_strictly_negative = false;
        return false;
    };

    for (std::size_t i = 0; i < samples; ++i) {
        const ManifoldPoint y = domain.sample(rng);
        if (consider(y)) return rep;
        // shadow each early sample with a move just off the stay point, so the
        // vanishing-payoff band near x* is observed
        if (probes_left > 0 && y.coords != x_star.coords) {
            const double d = dist(x_star, y);
            if (d > kProbeDistance) {
                --probes_left;
                const ManifoldPoint near = geodesic_point(x_star, y, kProbeDistance / d);
                if (consider(near)) return rep;
            }
        }
    }

    rep.max_payoff_found = any_evidence ? max_payoff : 0.0;
    rep.verdict = (!any_evidence || all_strictly_negative) ? TrapVerdict::StrongStationary
                                                           : TrapVerdict::WeakStationary;
    return rep;
}

TrapReport certify_variational_trap(const Bifunction& A, const IterationTrace& trace,
                                    const LambdaSchedule& lambdas, const ConvexSet& domain,
                                    std::size_t samples, std::uint64_t seed) {
    if (trace.records.size() < 2)
        throw InsufficientEvidenceError("certify_variational_trap: trace needs >= 2 iterates");

    const std::size_t T = trace.records.size() - 1;
    for (std::size_t k = 0; k < T; ++k) {
        const Experience e{trace.records[k > 0 ? k - 1 : 0].x, trace.records[k].x};
        const double delta =
            worthwhile_payoff(A, lambdas.at(static_cast<int>(k)), e, trace.records[k + 1].x);
        if (delta < -kStepTol) {
            TrapReport rep;
            rep.verdict = TrapVerdict::NotCertified;
            rep.lambda_star = lambdas.at(static_cast<int>(k));
            rep.max_payoff_found = delta;
            rep.trace_worthwhile_ok = false;
            rep.failing_step = k + 1;
            return rep;
        }
    }

    const double lambda_star = lambdas.at(static_cast<int>(T) - 1);
    const Experience e_star{trace.records[T - 1].x, trace.records[T].x};
    TrapReport rep = classify_stationary_trap(A, lambda_star, e_star, trace.records[T].x, domain,
                                              samples, seed);
    rep.trace_worthwhile_ok = true;
    if (rep.verdict == TrapVerdict::StrongStationary || rep.verdict == TrapVerdict::WeakStationary)
        rep.verdict = TrapVerdict::VariationalTrap;
    else
        rep.verdict = TrapVerdict::NotCertified;
    return rep;
}

bool resolvent_lemma_check(const Bifunction& A, double lambda, const ManifoldPoint& x,
                           const ManifoldPoint& z, std::size_t samples, std::uint64_t seed) {
    if (!(lambda > 0.0)) throw DomainMismatchError("resolvent_lemma_check: lambda must be positive");

    const PropertyReport mono = check_monotone(negated(A), samples, seed);
    if (mono.verdict == CheckVerdict::CounterexampleFound)
        throw NotMonotoneError("advantages bifunction is not monotone on samples");

    // z in J^A_lambda(x): A(z, y) + lambda <log_z x, log_z y> <= 0 on probes
    const Experience e{x, z};
    std::mt19937_64 rng(seed);
    double residual = std::max(0.0, A(z, x) + lambda * inconvenience(e, x));
    for (std::size_t i = 0; i < samples; ++i) {
        const ManifoldPoint y = A.domain().sample(rng);
        residual = std::max(residual, A(z, y) + lambda * inconvenience(e, y));
    }
    if (residual > kResolventTol)
        throw NotAResolventError("z does not solve the resolvent subproblem at x (residual " +
                                 std::to_string(residual) + ")");

    const double d = dist(x, z);
    const double advantage_forward = A(x, z);
    const double advantage_back = -A(z, x);
    const double threshold = lambda * d * d;
    return advantage_forward >= advantage_back - kStepTol &&
           advantage_back >= threshold - kStepTol;
}

}  // namespace hadeq
