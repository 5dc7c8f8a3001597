#include "hadeq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hadeq {

namespace {

constexpr double kInnerAcceptCeiling = 1e-8;
constexpr double kConditioningMinDist = 1e-6;

double dist_to_set(const ManifoldPoint& x, const std::vector<ManifoldPoint>& S) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : S) best = std::min(best, dist(x, s));
    return best;
}

const ManifoldPoint& nearest_in_set(const ManifoldPoint& x,
                                    const std::vector<ManifoldPoint>& S) {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < S.size(); ++i) {
        const double d = dist(x, S[i]);
        if (d < best) {
            best = d;
            arg = i;
        }
    }
    return S[arg];
}

// max over probe nodes of max(0, -F_{lambda,x}(z, y)), with log_z x hoisted
double probe_residual(const Bifunction& F, double lambda, const ManifoldPoint& x,
                      const ManifoldPoint& z, const std::vector<ManifoldPoint>& probe) {
    const TangentVector lzx = log_map(z, x);
    double worst = 0.0;
    for (const auto& y : probe) {
        const double v = -(F(z, y) - lambda * inner(lzx, log_map(z, y)));
        if (v > worst) worst = v;
    }
    return worst;
}

ResolventResult solve_grid_oracle(const Bifunction& F, double lambda, const ManifoldPoint& x,
                                  const ConvexSet& domain, const GridSpec& grid) {
    const std::vector<ManifoldPoint> nodes = grid_nodes(grid, domain);
    double best_res = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const ManifoldPoint& z = nodes[i];
        const TangentVector lzx = log_map(z, x);
        double partial = 0.0;
        for (const auto& y : nodes) {
            const double v = -(F(z, y) - lambda * inner(lzx, log_map(z, y)));
            if (v > partial) {
                partial = v;
                if (partial >= best_res) break;  // cannot beat the incumbent
            }
        }
        if (partial < best_res) {
            best_res = partial;
            best = i;
        }
    }
    return ResolventResult{nodes[best], std::max(0.0, best_res)};
}

ResolventResult solve_extragradient(const Bifunction& F, double lambda, const ManifoldPoint& x,
                                    const ConvexSet& domain, const ExtragradientMethod& m,
                                    const std::vector<ManifoldPoint>& probe) {
    if (!domain.manifold().flat())
        throw CapabilityError("extragradient requires a flat manifold; use the grid oracle");
    if (!F.has_diag_subgradient())
        throw CapabilityError("extragradient needs a subgradient oracle on the bifunction");
    double sigma = m.sigma > 0.0 ? m.sigma : 0.5 / lambda;
    const Eigen::VectorXd x_chart = to_chart(x);

    auto field = [&](const ManifoldPoint& z, const Eigen::VectorXd& z_chart) {
        return Eigen::VectorXd(F.diag_subgradient(z, z) - lambda * (x_chart - z_chart));
    };

    ManifoldPoint z = domain.project(x);
    Eigen::VectorXd z_chart = to_chart(z);
    bool converged = false;
    for (int it = 0; it < m.max_iters; ++it) {
        const Eigen::VectorXd w = field(z, z_chart);
        const ManifoldPoint u = domain.project(from_chart(z.manifold, z_chart - sigma * w));
        const Eigen::VectorXd u_chart = to_chart(u);
        const Eigen::VectorXd t = field(u, u_chart);
        // the step is admissible only while sigma stays below the reciprocal
        // of the observed Lipschitz constant; back off decisively when it is
        // not, so boundary jitter cannot re-trigger the shrink every pass
        const double du = (u_chart - z_chart).norm();
        if (du > 0.0) {
            const double lip = (t - w).norm() / du;
            if (sigma * lip > 0.95) {
                sigma = 0.5 / lip;
                continue;
            }
        }
        const ManifoldPoint z_next = domain.project(from_chart(z.manifold, z_chart - sigma * t));
        const Eigen::VectorXd z_next_chart = to_chart(z_next);
        const double nat_res = du / sigma;
        const double step = (z_next_chart - z_chart).norm() / sigma;
        z = z_next;
        z_chart = z_next_chart;
        if (nat_res <= m.tol && step <= m.tol) {
            converged = true;
            break;
        }
    }
    const double res = probe_residual(F, lambda, x, z, probe);
    if (!converged)
        throw InnerSolveError("extragradient did not reach its tolerance", z, res);
    return ResolventResult{z, res};
}

}  // namespace

ResolventResult resolvent(const Bifunction& F, double lambda, const ManifoldPoint& x,
                          const ConvexSet& domain, const InnerMethod& method,
                          const std::vector<ManifoldPoint>& probe_nodes) {
    if (!(lambda > 0.0)) throw DomainMismatchError("resolvent: lambda must be positive");
    if (const auto* cf = std::get_if<ClosedFormMethod>(&method)) {
        (void)cf;
        ManifoldPoint z = F.closed_form_resolvent(lambda, x);
        return ResolventResult{z, probe_residual(F, lambda, x, z, probe_nodes)};
    }
    if (const auto* go = std::get_if<GridOracleMethod>(&method))
        return solve_grid_oracle(F, lambda, x, domain, go->grid);
    return solve_extragradient(F, lambda, x, domain, std::get<ExtragradientMethod>(method),
                               probe_nodes);
}

void ProximalConfig::validate() const {
    if (lambdas.values.empty()) throw ConfigError("lambda schedule is empty");
    for (double l : lambdas.values) {
        if (!(l > 0.0) || !std::isfinite(l))
            throw ConfigError("lambda values must be positive and finite");
        if (!(l > theta_bound))
            throw ConfigError("every lambda must exceed the undermonotonicity bound");
    }
    if (!(outer_tol > 0.0)) throw ConfigError("outer_tol must be positive");
    if (max_outer < 0) throw ConfigError("max_outer must be nonnegative");
}

IterationTrace proximal_solve(const Bifunction& F, const ConvexSet& domain,
                              const ManifoldPoint& x0, const ProximalConfig& config,
                              const std::vector<ManifoldPoint>* S_oracle) {
    config.validate();
    if (!domain.contains(x0, 1e-9))
        throw DomainMismatchError("proximal_solve: x0 is not in the domain");

    const GridSpec stop_grid = config.stop_grid ? *config.stop_grid : default_grid(domain);
    const std::vector<ManifoldPoint> stop_nodes = grid_nodes(stop_grid, domain);
    const double accept_tol = std::min(kInnerAcceptCeiling, config.outer_tol / 10.0);
    const bool closed_form_run =
        std::holds_alternative<ClosedFormMethod>(config.inner) && F.has_closed_form_resolvent();

    IterationTrace trace;
    trace.manifold = domain.manifold();
    trace.problem = F.label();
    trace.curved_experimental = !domain.manifold().flat();

    ManifoldPoint x = x0;
    for (int k = 0;; ++k) {
        TraceRecord rec;
        rec.k = k;
        rec.x = x;
        rec.gap = gap(F, domain, x, stop_nodes);
        if (S_oracle) rec.dist_to_S = dist_to_set(x, *S_oracle);

        if (rec.gap <= config.outer_tol) {
            bool exact = false;
            if (S_oracle && *rec.dist_to_S <= config.oracle_match_tol) {
                exact = true;
            } else if (closed_form_run) {
                const ManifoldPoint z = F.closed_form_resolvent(config.lambdas.at(k), x);
                exact = (z.coords == x.coords);
            }
            trace.records.push_back(std::move(rec));
            if (exact && k >= 1) {
                trace.status = TerminalStatus::FiniteTermination;
                trace.k0 = k;
            } else {
                trace.status = TerminalStatus::StoppedAtEquilibrium;
            }
            return trace;
        }
        if (k >= config.max_outer) {
            trace.records.push_back(std::move(rec));
            trace.status = TerminalStatus::MaxIters;
            return trace;
        }

        const double lambda = config.lambdas.at(k);
        ResolventResult step;
        try {
            step = resolvent(F, lambda, x, domain, config.inner, stop_nodes);
        } catch (const InnerSolveError& e) {
            trace.records.push_back(std::move(rec));
            trace.status = TerminalStatus::MaxIters;
            std::ostringstream os;
            os << "inner solve failed at k=" << k << ": " << e.what()
               << " (residual " << e.residual << ")";
            throw SolveAbortedError(os.str(), std::move(trace));
        }
        if (step.residual > accept_tol) {
            trace.records.push_back(std::move(rec));
            trace.status = TerminalStatus::MaxIters;
            std::ostringstream os;
            os << "inner residual " << step.residual << " exceeds the acceptance tolerance "
               << accept_tol << " at k=" << k;
            throw SolveAbortedError(os.str(), std::move(trace));
        }

        rec.lambda = lambda;
        rec.step_dist = dist(x, step.point);
        rec.inner_residual = step.residual;
        if (S_oracle) {
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& s : *S_oracle) worst = std::max(worst, dist(step.point, s) - dist(x, s));
            rec.fejer_slack = worst;
        }
        trace.records.push_back(std::move(rec));
        x = step.point;
    }
}

std::vector<double> fejer_slacks(const IterationTrace& trace, const ManifoldPoint& x_ref) {
    std::vector<double> out;
    if (trace.records.size() < 2) return out;
    out.reserve(trace.records.size() - 1);
    double prev = dist(trace.records[0].x, x_ref);
    for (std::size_t k = 1; k < trace.records.size(); ++k) {
        const double cur = dist(trace.records[k].x, x_ref);
        out.push_back(cur - prev);
        prev = cur;
    }
    return out;
}

std::vector<double> backstep_inner_products(const IterationTrace& trace,
                                            const ManifoldPoint& x_ref) {
    std::vector<double> out;
    if (trace.records.size() < 2) return out;
    out.reserve(trace.records.size() - 1);
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const ManifoldPoint& next = trace.records[k + 1].x;
        out.push_back(inner(log_map(next, trace.records[k].x), log_map(next, x_ref)));
    }
    return out;
}

ConditioningEstimate estimate_conditioning(const Bifunction& F, const ConvexSet& domain,
                                           const std::vector<ManifoldPoint>& S,
                                           std::size_t samples, std::uint64_t seed) {
    if (S.empty()) throw DegenerateInputError("conditioning: empty solution set");
    std::mt19937_64 rng(seed);
    ConditioningEstimate est;
    std::vector<double> log_d, log_m, ratio_base;
    std::vector<std::pair<double, double>> md;
    for (std::size_t i = 0; i < samples; ++i) {
        ManifoldPoint x = domain.sample(rng);
        const ManifoldPoint& ps = nearest_in_set(x, S);
        const double d = dist(x, ps);
        if (d <= kConditioningMinDist) continue;
        const double m = -F(x, ps);
        if (m <= 0.0) {
            est.conditioned = false;
            est.violation_witness = std::move(x);
            return est;
        }
        log_d.push_back(std::log(d));
        log_m.push_back(std::log(m));
        md.emplace_back(m, d);
    }
    est.sample_count = log_d.size();
    if (log_d.size() < 2)
        throw InsufficientEvidenceError("conditioning: too few usable samples");

    // The exponent is a growth rate toward the solution set, so the fit is
    // restricted to the near-set quartile of the samples; the global fit is
    // biased whenever the modulus varies across the domain.
    std::vector<double> sorted_d;
    sorted_d.reserve(md.size());
    for (const auto& p : md) sorted_d.push_back(p.second);
    std::sort(sorted_d.begin(), sorted_d.end());
    double cutoff = sorted_d[sorted_d.size() / 4];
    if (std::count_if(md.begin(), md.end(),
                      [cutoff](const auto& p) { return p.second <= cutoff; }) < 20)
        cutoff = sorted_d.back();

    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < log_d.size(); ++i) {
        if (md[i].second > cutoff) continue;
        n += 1.0;
        sx += log_d[i];
        sy += log_m[i];
        sxx += log_d[i] * log_d[i];
        sxy += log_d[i] * log_m[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / n;

    est.rho = slope;
    double tau = std::exp(intercept);
    double ss = 0.0;
    for (std::size_t i = 0; i < log_d.size(); ++i) {
        if (md[i].second <= cutoff) {
            const double r = log_m[i] - (intercept + slope * log_d[i]);
            ss += r * r;
        }
        tau = std::min(tau, md[i].first / std::pow(md[i].second, slope));
    }
    est.tau = tau;
    est.fit_residual = std::sqrt(ss / n);
    return est;
}

std::optional<std::size_t> finite_termination_index(const IterationTrace& trace,
                                                    const std::vector<ManifoldPoint>& S,
                                                    double tol) {
    for (std::size_t k = 0; k < trace.records.size(); ++k)
        if (dist_to_set(trace.records[k].x, S) <= tol) return k;
    return std::nullopt;
}

double firmly_nonexpansive_probe(const Bifunction& F, double lambda, const ManifoldPoint& x,
                                 const ManifoldPoint& y, const InnerMethod& method,
                                 const std::vector<ManifoldPoint>& probe_nodes) {
    const ManifoldPoint tx = resolvent(F, lambda, x, F.domain(), method, probe_nodes).point;
    const ManifoldPoint ty = resolvent(F, lambda, y, F.domain(), method, probe_nodes).point;
    return inner(log_map(tx, ty), log_map(tx, x)) + inner(log_map(ty, tx), log_map(ty, y));
}

}  // namespace hadeq
