#pragma once

#include "hadeq/solver.hpp"

namespace hadeq {

/// Short-memory experience of an agent: the move done two periods back and
/// the last one. Both points share a manifold.
struct Experience {
    ManifoldPoint past;     // action x, two periods back
    ManifoldPoint current;  // action z, last period
};

/// Inconvenience of moving from the current action z to y, given experience
/// e = (x, z): <log_z x, log_z y>. Reduces to <x - z, y - z> on flat spaces.
double inconvenience(const Experience& e, const ManifoldPoint& y);

/// Worthwhile-change payoff Delta_{lambda,e}(z, y) = A(z, y) - lambda * I_e(z, y)
/// for an advantages bifunction A; zero at y = z.
double worthwhile_payoff(const Bifunction& A, double lambda, const Experience& e,
                         const ManifoldPoint& y);

enum class TrapVerdict {
    StrongStationary,
    WeakStationary,
    NotStationary,
    VariationalTrap,
    NotCertified,
};

struct TrapReport {
    TrapVerdict verdict = TrapVerdict::NotCertified;
    double lambda_star = 0.0;
    double max_payoff_found = 0.0;
    std::optional<ManifoldPoint> witness;        // payoff-positive move, if any
    std::optional<bool> trace_worthwhile_ok;     // every trace step had payoff >= -1e-9
    std::optional<std::size_t> failing_step;     // first unworthwhile step (target index)
};

/// Samples candidate moves y and classifies x* under ratio lambda_star and
/// experience e* (whose current action must be x*):
///   every payoff < -1e-10            -> StrongStationary
///   some payoff  >  1e-10            -> NotStationary (witness attached)
///   otherwise                        -> WeakStationary
/// Deterministic near-x* probes are added to the samples so that the payoff
/// band around the stay point is observed.
TrapReport classify_stationary_trap(const Bifunction& A, double lambda_star,
                                    const Experience& e_star, const ManifoldPoint& x_star,
                                    const ConvexSet& domain, std::size_t samples,
                                    std::uint64_t seed);

/// Certifies a trace as a variational trap: every step x^k -> x^{k+1} must be
/// worthwhile under experience e^k = (x^{k-1}, x^k) (e^0 degenerate) and the
/// terminal point must classify as a stationary trap. Otherwise NotCertified
/// with the first failing step index.
TrapReport certify_variational_trap(const Bifunction& A, const IterationTrace& trace,
                                    const LambdaSchedule& lambdas, const ConvexSet& domain,
                                    std::size_t samples, std::uint64_t seed);

class NotAResolventError : public std::runtime_error {
public:
    explicit NotAResolventError(const std::string& what) : std::runtime_error(what) {}
};

class NotMonotoneError : public std::runtime_error {
public:
    explicit NotMonotoneError(const std::string& what) : std::runtime_error(what) {}
};

/// Checks the worthwhile-to-change chain for a resolvent step x -> z of the
/// advantages bifunction A:
///   A(x,z) >= -A(z,x) >= lambda * d^2(x,z) >= 0
/// Preconditions (reported distinctly when violated): z solves the resolvent
/// subproblem at x to residual 1e-8, and A is monotone on samples.
bool resolvent_lemma_check(const Bifunction& A, double lambda, const ManifoldPoint& x,
                           const ManifoldPoint& z, std::size_t samples, std::uint64_t seed);

}  // namespace hadeq
