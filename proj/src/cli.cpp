#include "hadeq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "hadeq/serialization.hpp"
#include "hadeq/vr.hpp"

namespace hadeq::cli {

using nlohmann::json;

namespace {

constexpr double kOracleTol = 1e-9;

Eigen::VectorXd get_vec(const json& j, const char* field) {
    if (!j.is_array()) throw ConfigError(std::string(field) + ": expected an array of numbers");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

void write_file(const std::filesystem::path& p, const std::string& contents) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + p.string());
    os << contents;
}

GridSpec resolve_grid(const ExperimentConfig& cfg, const ConvexSet& domain) {
    if (!cfg.grid.is_null() && !cfg.grid.empty()) return grid_from_json(cfg.grid);
    return default_grid(domain);
}

InnerMethod resolve_inner(const json& solver, const GridSpec& fallback_grid) {
    if (!solver.contains("inner_method")) return ClosedFormMethod{};
    const json& m = solver.at("inner_method");
    const std::string type = m.value("type", "closed_form");
    if (type == "closed_form") return ClosedFormMethod{};
    if (type == "grid") {
        GridOracleMethod g;
        g.grid = m.contains("grid") ? grid_from_json(m.at("grid")) : fallback_grid;
        return g;
    }
    if (type == "extragradient") {
        ExtragradientMethod e;
        e.sigma = m.value("sigma", 0.0);
        e.max_iters = m.value("max_iters", 10000);
        e.tol = m.value("tol", 1e-10);
        return e;
    }
    throw ConfigError("solver.inner_method.type: unknown method '" + type + "'");
}

LambdaSchedule resolve_lambdas(const json& solver, const Bifunction& F, std::size_t samples,
                               std::uint64_t seed) {
    if (solver.contains("lambda_schedule"))
        return LambdaSchedule{solver.at("lambda_schedule").get<std::vector<double>>()};
    if (solver.contains("lambda"))
        return LambdaSchedule::constant(solver.at("lambda").get<double>());
    // default: twice the estimated undermonotonicity constant, at least 2
    const PropertyReport theta = estimate_theta(F, samples, seed);
    return LambdaSchedule::constant(2.0 * std::max(*theta.theta_estimate, 1.0));
}

int run_solve(const ExperimentConfig& cfg) {
    Bifunction F = build_problem(cfg.problem);
    const ConvexSet& domain = F.domain();
    const GridSpec grid = resolve_grid(cfg, domain);
    const json& solver = cfg.solver;
    if (!solver.contains("x0")) throw ConfigError("solver.x0: required for the solve task");

    ProximalConfig pc;
    pc.lambdas = resolve_lambdas(solver, F, cfg.samples, cfg.seed);
    pc.theta_bound = solver.value("theta_bound", 0.0);
    pc.inner = resolve_inner(solver, grid);
    pc.outer_tol = solver.value("outer_tol", 1e-9);
    pc.max_outer = solver.value("max_outer", 100);
    pc.stop_grid = grid;

    const ManifoldPoint x0 = from_chart(domain.manifold(), get_vec(solver.at("x0"), "solver.x0"));

    std::optional<std::vector<ManifoldPoint>> oracle;
    if (solver.value("use_oracle", true))
        oracle = brute_force_equilibria(F, domain, grid, solver.value("oracle_tol", kOracleTol));

    if (!domain.manifold().flat())
        std::cout << "note: curved manifold; convergence is experimental, not asserted\n";

    IterationTrace trace;
    bool aborted = false;
    std::string abort_reason;
    try {
        trace = proximal_solve(F, domain, x0, pc, oracle ? &*oracle : nullptr);
    } catch (const SolveAbortedError& e) {
        trace = e.partial_trace;
        aborted = true;
        abort_reason = e.what();
    }

    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    {
        std::ostringstream os;
        write_trace_jsonl(os, trace);
        write_file(out / "trace.jsonl", os.str());
    }
    {
        std::ostringstream os;
        write_trace_csv(os, trace);
        write_file(out / "trace.csv", os.str());
    }
    json rep;
    rep["problem"] = F.label();
    rep["status"] = status_name(trace.status);
    if (trace.k0) rep["k0"] = *trace.k0;
    rep["iterations"] = trace.records.size();
    rep["final_gap"] = trace.records.back().gap;
    if (oracle) rep["oracle_size"] = oracle->size();
    if (aborted) rep["aborted"] = abort_reason;
    write_file(out / "solve_report.json", rep.dump(2) + "\n");

    const TraceRecord& last = trace.records.back();
    std::cout << "solve " << F.label() << ": k=" << last.k << " gap=" << format_double(last.gap)
              << " status=" << status_name(trace.status);
    if (trace.k0) std::cout << "(" << *trace.k0 << ")";
    std::cout << "\n";
    if (aborted) {
        std::cout << "aborted: " << abort_reason << "\n";
        return 1;
    }
    return 0;
}

int run_properties(const ExperimentConfig& cfg) {
    Bifunction F = build_problem(cfg.problem);
    std::vector<PropertyReport> reports;
    reports.push_back(check_diagonal_zero(F, std::min<std::size_t>(cfg.samples, 1000), cfg.seed));
    reports.push_back(check_monotone(F, cfg.samples, cfg.seed));
    reports.push_back(check_pseudomonotone(F, cfg.samples, cfg.seed));
    reports.push_back(estimate_theta(F, cfg.samples, cfg.seed));
    reports.push_back(check_convexity_in_y(F, cfg.samples, cfg.seed));

    json rep;
    rep["problem"] = F.label();
    json checks = json::array();
    bool counterexample = false;
    for (const auto& r : reports) {
        checks.push_back(to_json(r));
        if (r.verdict == CheckVerdict::CounterexampleFound) counterexample = true;
        std::cout << "properties " << F.label() << ": " << property_name(r.property) << " = "
                  << verdict_name(r.verdict);
        if (r.theta_estimate) std::cout << " theta=" << format_double(*r.theta_estimate);
        std::cout << "\n";
    }
    // upper semicontinuity in the first argument has no finite-sample test
    rep["upper_semicontinuity_in_x"] = "assumed";
    rep["checks"] = checks;

    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    write_file(out / "properties_report.json", rep.dump(2) + "\n");
    return counterexample ? 2 : 0;
}

int run_existence(const ExperimentConfig& cfg) {
    Bifunction F = build_problem(cfg.problem);
    const ConvexSet& domain = F.domain();
    const GridSpec grid = resolve_grid(cfg, domain);
    const json& ex = cfg.existence;

    const double tol = ex.is_object() ? ex.value("tol", kOracleTol) : kOracleTol;
    std::vector<ManifoldPoint> S = brute_force_equilibria(F, domain, grid, tol);

    const ManifoldPoint z0 = (ex.is_object() && ex.contains("z0_chart"))
                                 ? from_chart(domain.manifold(), get_vec(ex.at("z0_chart"), "z0"))
                                 : domain.project(zero_point(domain.manifold()));
    const double ball_k = ex.is_object() ? ex.value("truncation_radius", 1.0) : 1.0;
    ConvexSet omega_k = truncate_to_ball(domain, z0, ball_k);
    const PropertyReport segment =
        check_segment_level_cover(F, omega_k, std::max<std::size_t>(cfg.samples / 10, 100), cfg.seed);

    // divergent path in chart coordinates: explicit, or a ray along the
    // domain's unbounded axes when it has any
    std::vector<ManifoldPoint> path;
    if (ex.is_object() && ex.contains("path_chart")) {
        for (const auto& p : ex.at("path_chart"))
            path.push_back(from_chart(domain.manifold(), get_vec(p, "path_chart")));
    } else {
        Eigen::VectorXd lo, hi;
        domain.chart_bounds(std::numeric_limits<double>::infinity(), lo, hi);
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) {
            if (std::isinf(hi[i])) dir[i] = 1.0;
            else if (std::isinf(lo[i])) dir[i] = -1.0;
        }
        if (dir.norm() > 0.0) {
            const Eigen::VectorXd base = to_chart(domain.project(z0));
            for (int j = 1; j <= 10; ++j)
                path.push_back(from_chart(domain.manifold(), base + j * dir));
        }
    }
    std::optional<DivergenceAnchorReport> anchor;
    if (!path.empty()) {
        std::vector<ManifoldPoint> candidates;
        if (ex.is_object() && ex.contains("candidates_chart")) {
            for (const auto& c : ex.at("candidates_chart"))
                candidates.push_back(from_chart(domain.manifold(), get_vec(c, "candidates_chart")));
        } else {
            candidates = S;
        }
        anchor = check_divergence_anchor(F, z0, path, candidates);
    }

    const double b_radius = ex.is_object() ? ex.value("coercivity_ball_radius", 2.0) : 2.0;
    const ManifoldPoint b_center =
        (ex.is_object() && ex.contains("coercivity_ball_center_chart"))
            ? from_chart(domain.manifold(), get_vec(ex.at("coercivity_ball_center_chart"), "center"))
            : z0;
    const ManifoldPoint y0 = (ex.is_object() && ex.contains("y0_chart"))
                                 ? from_chart(domain.manifold(), get_vec(ex.at("y0_chart"), "y0"))
                                 : z0;
    std::optional<CoercivityReport> coercivity;
    std::string coercivity_error;
    try {
        coercivity = check_coercivity(F, domain, ConvexSet::geodesic_ball(b_center, b_radius), y0,
                                      std::max<std::size_t>(cfg.samples / 10, 100), cfg.seed);
    } catch (const InsufficientEvidenceError& e) {
        coercivity_error = e.what();
    }

    json rep;
    rep["problem"] = F.label();
    rep["equilibria_found"] = S.size();
    json snodes = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(S.size(), 8); ++i) {
        json c = json::array();
        for (Eigen::Index a = 0; a < S[i].coords.size(); ++a) c.push_back(S[i].coords[a]);
        snodes.push_back(c);
    }
    rep["equilibria_sample"] = snodes;
    rep["segment_level_cover"] = to_json(segment);
    if (anchor) rep["divergence_anchor"] = to_json(*anchor);
    if (coercivity) rep["coercivity"] = to_json(*coercivity);
    if (!coercivity_error.empty()) rep["coercivity_error"] = coercivity_error;

    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    write_file(out / "existence_report.json", rep.dump(2) + "\n");

    std::cout << "existence " << F.label() << ": equilibria=" << S.size() << "\n";
    std::cout << "existence " << F.label() << ": segment_level_cover = "
              << verdict_name(segment.verdict) << "\n";
    if (anchor)
        std::cout << "existence " << F.label() << ": divergence_anchor = "
                  << (anchor->found ? "found" : "not_found")
                  << (anchor->found ? " onset=" + std::to_string(*anchor->onset_index) : "")
                  << "\n";
    if (coercivity)
        std::cout << "existence " << F.label() << ": coercivity = "
                  << (coercivity->passed ? "pass" : "fail") << "\n";
    return segment.verdict == CheckVerdict::CounterexampleFound ? 2 : 0;
}

int run_conditioning(const ExperimentConfig& cfg) {
    Bifunction F = build_problem(cfg.problem);
    const GridSpec grid = resolve_grid(cfg, F.domain());
    const double tol = cfg.solver.is_object() ? cfg.solver.value("oracle_tol", kOracleTol)
                                              : kOracleTol;
    std::vector<ManifoldPoint> S = brute_force_equilibria(F, F.domain(), grid, tol);
    const ConditioningEstimate est = estimate_conditioning(F, F.domain(), S, cfg.samples, cfg.seed);

    json rep;
    rep["problem"] = F.label();
    rep["oracle_size"] = S.size();
    rep["estimate"] = to_json(est);
    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    write_file(out / "conditioning_report.json", rep.dump(2) + "\n");

    if (est.conditioned)
        std::cout << "conditioning " << F.label() << ": rho=" << format_double(est.rho)
                  << " tau=" << format_double(est.tau) << "\n";
    else
        std::cout << "conditioning " << F.label() << ": not conditioned on samples\n";
    return est.conditioned ? 0 : 2;
}

int run_trap(const ExperimentConfig& cfg) {
    Bifunction F = build_problem(cfg.problem);
    Bifunction A = negated(F);
    const json& t = cfg.trap;
    if (!t.is_object() || !t.contains("trace"))
        throw ConfigError("trap.trace: path to a trace file is required");

    std::ifstream is(t.at("trace").get<std::string>());
    if (!is) throw ConfigError("trap.trace: cannot open " + t.at("trace").get<std::string>());
    IterationTrace trace = read_trace_jsonl(is);

    LambdaSchedule lambdas = LambdaSchedule::constant(1.0);
    if (t.contains("lambda_schedule"))
        lambdas = LambdaSchedule{t.at("lambda_schedule").get<std::vector<double>>()};
    else if (t.contains("lambda"))
        lambdas = LambdaSchedule::constant(t.at("lambda").get<double>());
    else if (trace.records.front().lambda)
        lambdas = LambdaSchedule::constant(*trace.records.front().lambda);
    else
        throw ConfigError("trap.lambda: no ratio given and the trace carries none");

    const TrapReport cert =
        certify_variational_trap(A, trace, lambdas, F.domain(), cfg.samples, cfg.seed);

    const std::size_t T = trace.records.size() - 1;
    const Experience e_star{trace.records[T > 0 ? T - 1 : 0].x, trace.records[T].x};
    const TrapReport terminal =
        classify_stationary_trap(A, lambdas.at(static_cast<int>(T) - (T > 0 ? 1 : 0)), e_star,
                                 trace.records[T].x, F.domain(), cfg.samples, cfg.seed);

    json rep;
    rep["problem"] = F.label();
    rep["certification"] = to_json(cert);
    rep["terminal_classification"] = to_json(terminal);
    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    write_file(out / "trap_report.json", rep.dump(2) + "\n");

    std::cout << "trap " << F.label() << ": certification = " << trap_verdict_name(cert.verdict);
    if (cert.failing_step) std::cout << " failing_step=" << *cert.failing_step;
    std::cout << "\n";
    std::cout << "trap " << F.label()
              << ": terminal = " << trap_verdict_name(terminal.verdict) << "\n";
    return cert.verdict == TrapVerdict::VariationalTrap ? 0 : 2;
}

int run_geometry_test(const ExperimentConfig& cfg) {
    const json& g = cfg.geometry;
    if (!g.is_object() || !g.contains("manifold"))
        throw ConfigError("geometry.manifold: required for the geometry-test task");
    const ManifoldDescriptor m = manifold_from_json(g.at("manifold"));
    const double radius = g.value("radius", 2.0);
    const std::size_t n = cfg.samples;

    std::mt19937_64 rng(cfg.seed);
    double worst_triangle = -std::numeric_limits<double>::infinity();
    double worst_pair = std::numeric_limits<double>::infinity();
    double worst_roundtrip = 0.0, worst_norm_identity = 0.0;
    std::size_t violations = 0;
    const GeometryTolerances& tol = geometry_tolerances();

    for (std::size_t i = 0; i < n; ++i) {
        const ManifoldPoint x1 = sample_point(m, rng, radius);
        const ManifoldPoint x2 = sample_point(m, rng, radius);
        const ManifoldPoint x3 = sample_point(m, rng, radius);
        if (dist(x1, x2) == 0.0 || dist(x2, x3) == 0.0 || dist(x3, x1) == 0.0) continue;
        const ComparisonSlacks s = comparison_slacks(x1, x2, x3);
        worst_triangle = std::max(worst_triangle, s.s_triangle);
        worst_pair = std::min(worst_pair, s.s_pair);
        if (s.s_triangle > tol.comparison || s.s_pair < -tol.comparison) ++violations;

        const TangentVector v = sample_tangent(x1, rng, radius);
        const ManifoldPoint y = exp_map(x1, v);
        const TangentVector back = log_map(x1, y);
        const double rt = (back.coords - v.coords).cwiseAbs().maxCoeff();
        worst_roundtrip = std::max(worst_roundtrip, rt);
        worst_norm_identity =
            std::max(worst_norm_identity, std::abs(norm(back) - dist(x1, y)));
        if (rt > tol.roundtrip) ++violations;
    }

    json rep;
    rep["manifold"] = to_json(m);
    rep["samples"] = n;
    rep["worst_triangle_slack"] = worst_triangle;
    rep["worst_pair_slack"] = worst_pair;
    rep["worst_roundtrip_error"] = worst_roundtrip;
    rep["worst_log_norm_error"] = worst_norm_identity;
    rep["violations"] = violations;
    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    write_file(out / "geometry_report.json", rep.dump(2) + "\n");

    std::cout << "geometry-test " << m.to_string() << ": triangle<=" << format_double(worst_triangle)
              << " pair>=" << format_double(worst_pair)
              << " roundtrip<=" << format_double(worst_roundtrip)
              << (violations == 0 ? " ok" : " VIOLATIONS") << "\n";
    return violations == 0 ? 0 : 2;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    cfg.task = j.value("task", "");
    if (j.contains("problem")) cfg.problem = j.at("problem");
    if (j.contains("solver")) cfg.solver = j.at("solver");
    if (j.contains("grid")) cfg.grid = j.at("grid");
    if (j.contains("existence")) cfg.existence = j.at("existence");
    if (j.contains("trap")) cfg.trap = j.at("trap");
    if (j.contains("geometry")) cfg.geometry = j.at("geometry");
    cfg.samples = j.value("samples", static_cast<std::size_t>(10000));
    cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));
    cfg.out_dir = j.value("out", "out");
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

Bifunction build_problem(const json& problem) {
    if (!problem.is_object() || !problem.contains("catalog"))
        throw ConfigError("problem.catalog: required");
    const std::string name = problem.at("catalog").get<std::string>();
    if (name == "example41" || name == "example31") return make_catalog_bifunction(name);

    if (name == "potential" || name == "vector_field") {
        if (!problem.contains("manifold") || !problem.contains("domain"))
            throw ConfigError("problem: '" + name + "' needs manifold and domain fields");
        const ManifoldDescriptor m = manifold_from_json(problem.at("manifold"));
        ConvexSet domain = set_from_json(problem.at("domain"), m);
        if (name == "vector_field") {
            const auto rows = problem.at("A").get<std::vector<std::vector<double>>>();
            const int d = static_cast<int>(rows.size());
            Eigen::MatrixXd A(d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) A(r, c) = rows[r].at(c);
            return make_affine_vector_field(A, get_vec(problem.at("b"), "problem.b"), domain);
        }
        const json& phi = problem.at("phi");
        const std::string type = phi.value("type", "");
        if (type == "poly")
            return make_polynomial_potential(get_vec(phi.at("coeffs"), "phi.coeffs"), domain);
        if (type == "dist_power") {
            if (phi.contains("center_ambient"))
                return make_dist_power_potential_at(
                    make_point(m, get_vec(phi.at("center_ambient"), "phi.center_ambient")),
                    phi.value("power", 2.0), phi.value("scale", 1.0), domain);
            return make_dist_power_potential(get_vec(phi.at("center"), "phi.center"),
                                             phi.value("power", 2.0), phi.value("scale", 1.0),
                                             domain);
        }
        throw ConfigError("problem.phi.type: expected 'poly' or 'dist_power'");
    }
    throw ConfigError("problem.catalog: unknown catalog entry '" + name + "'");
}

int run(const ExperimentConfig& cfg) {
    try {
        if (cfg.task == "solve") return run_solve(cfg);
        if (cfg.task == "properties") return run_properties(cfg);
        if (cfg.task == "existence") return run_existence(cfg);
        if (cfg.task == "conditioning") return run_conditioning(cfg);
        if (cfg.task == "trap") return run_trap(cfg);
        if (cfg.task == "geometry-test") return run_geometry_test(cfg);
        throw ConfigError("task: unknown task '" + cfg.task + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace hadeq::cli
