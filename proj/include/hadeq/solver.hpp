#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "hadeq/existence.hpp"

namespace hadeq {

// --- inner subproblem methods ---

/// Exact resolvent map registered on the bifunction handle.
struct ClosedFormMethod {};

/// Argmin of the regularized gap over grid nodes (lowest index wins ties).
/// Accuracy is limited by the grid spacing.
struct GridOracleMethod {
    GridSpec grid;
};

/// Two projected subgradient steps per iteration on the regularized
/// problem; requires a flat manifold and a subgradient oracle.
/// sigma <= 0 selects the default step 0.5 / lambda.
struct ExtragradientMethod {
    double sigma = 0.0;
    int max_iters = 10000;
    double tol = 1e-10;
};

using InnerMethod = std::variant<ClosedFormMethod, GridOracleMethod, ExtragradientMethod>;

struct ResolventResult {
    ManifoldPoint point;
    double residual;  // max over probe nodes of max(0, -F_reg(point, y))
};

/// Thrown when an inner solve cannot reach its tolerance; carries the best
/// iterate found and its residual.
class InnerSolveError : public std::runtime_error {
public:
    InnerSolveError(const std::string& what, ManifoldPoint best, double residual)
        : std::runtime_error(what), best_point(std::move(best)), residual(residual) {}
    ManifoldPoint best_point;
    double residual;
};

/// Solve the regularized equilibrium subproblem anchored at x:
/// find z with F(z,y) - lambda <log_z x, log_z y> >= 0 for all y.
/// The returned residual is certified on the probe nodes.
ResolventResult resolvent(const Bifunction& F, double lambda, const ManifoldPoint& x,
                          const ConvexSet& domain, const InnerMethod& method,
                          const std::vector<ManifoldPoint>& probe_nodes);

// --- proximal outer loop ---

struct LambdaSchedule {
    std::vector<double> values;  // singleton = constant; otherwise per-step, last repeated
    double at(int k) const {
        return values[static_cast<std::size_t>(k) < values.size() ? k : values.size() - 1];
    }
    static LambdaSchedule constant(double lambda) { return LambdaSchedule{{lambda}}; }
};

struct ProximalConfig {
    LambdaSchedule lambdas = LambdaSchedule::constant(1.0);
    double theta_bound = 0.0;  // every lambda_k must exceed this
    InnerMethod inner = ClosedFormMethod{};
    double outer_tol = 1e-9;   // stop when gap(x^k) <= outer_tol on the stop grid
    int max_outer = 100;
    std::optional<GridSpec> stop_grid;  // defaults to default_grid(domain)
    double oracle_match_tol = 1e-12;    // dist-to-oracle threshold for exact arrival

    void validate() const;
};

enum class TerminalStatus { StoppedAtEquilibrium, MaxIters, FiniteTermination };

struct TraceRecord {
    int k = 0;
    ManifoldPoint x;
    double gap = 0.0;
    std::optional<double> dist_to_S;
    // outgoing step fields; absent on the terminal record
    std::optional<double> lambda;
    std::optional<double> step_dist;
    std::optional<double> fejer_slack;  // worst slack over the oracle set
    std::optional<double> inner_residual;
};

struct IterationTrace {
    ManifoldDescriptor manifold;
    std::string problem;
    bool curved_experimental = false;
    std::vector<TraceRecord> records;
    TerminalStatus status = TerminalStatus::MaxIters;
    std::optional<int> k0;  // set for FiniteTermination

    const ManifoldPoint& iterate(std::size_t k) const { return records.at(k).x; }
    std::size_t size() const { return records.size(); }
};

/// Carries the partial trace out of a failed run.
class SolveAbortedError : public std::runtime_error {
public:
    SolveAbortedError(const std::string& what, IterationTrace partial)
        : std::runtime_error(what), partial_trace(std::move(partial)) {}
    IterationTrace partial_trace;
};

/// Proximal point outer loop: x^{k+1} solves the subproblem regularized at
/// x^k, until the gap stop rule fires or max_outer is reached. An iterate is
/// accepted when its inner residual is at most min(1e-8, outer_tol/10);
/// otherwise the run aborts with the partial trace.
///
/// Terminal status: FiniteTermination(k) when the stop fires at k >= 1 at an
/// exactly certified equilibrium (closed-form fixed point, or oracle distance
/// <= oracle_match_tol); StoppedAtEquilibrium otherwise.
IterationTrace proximal_solve(const Bifunction& F, const ConvexSet& domain,
                              const ManifoldPoint& x0, const ProximalConfig& config,
                              const std::vector<ManifoldPoint>* S_oracle = nullptr);

/// Per-step slacks d(x^{k+1}, x_ref) - d(x^k, x_ref); nonpositive iff the
/// trace is Fejer monotone with respect to x_ref.
std::vector<double> fejer_slacks(const IterationTrace& trace, const ManifoldPoint& x_ref);

/// Per-step values <log_{x^{k+1}} x^k, log_{x^{k+1}} x_ref>; nonpositive for
/// pseudomonotone problems, the inner-product form of the Fejer argument.
std::vector<double> backstep_inner_products(const IterationTrace& trace,
                                            const ManifoldPoint& x_ref);

struct ConditioningEstimate {
    bool conditioned = true;
    double tau = 0.0;   // adjusted down so -F(x, P_S(x)) >= tau * dist^rho on all samples
    double rho = 0.0;   // log-log least-squares slope
    double fit_residual = 0.0;  // RMS residual of the fit
    std::size_t sample_count = 0;
    std::optional<ManifoldPoint> violation_witness;  // sample with -F(x, P_S(x)) <= 0
};

/// Growth-exponent fit of -F(x, P_S(x)) against dist(x, S) over sampled x
/// with dist > 1e-6; S is the finite oracle solution set.
ConditioningEstimate estimate_conditioning(const Bifunction& F, const ConvexSet& domain,
                                           const std::vector<ManifoldPoint>& S,
                                           std::size_t samples, std::uint64_t seed);

/// Smallest k with dist(x^k, S) <= tol, if any.
std::optional<std::size_t> finite_termination_index(const IterationTrace& trace,
                                                    const std::vector<ManifoldPoint>& S,
                                                    double tol);

/// <log_{T(x)} T(y), log_{T(x)} x> + <log_{T(y)} T(x), log_{T(y)} y> for the
/// resolvent T = J_lambda. A positive value certifies that T is not firmly
/// nonexpansive.
double firmly_nonexpansive_probe(const Bifunction& F, double lambda, const ManifoldPoint& x,
                                 const ManifoldPoint& y, const InnerMethod& method,
                                 const std::vector<ManifoldPoint>& probe_nodes);

}  // namespace hadeq
