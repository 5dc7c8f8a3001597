#include "hadeq/serialization.hpp"

#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

namespace hadeq {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// entries may be null, meaning +-infinity depending on side
json bound_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i]))
            a.push_back(v[i]);
        else
            a.push_back(nullptr);
    }
    return a;
}

Eigen::VectorXd json_to_vec(const json& j, const char* field) {
    if (!j.is_array()) throw ConfigError(std::string(field) + ": expected an array of numbers");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(std::string(field) + ": expected numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Eigen::VectorXd json_to_bound(const json& j, const char* field, double inf_sign) {
    if (!j.is_array()) throw ConfigError(std::string(field) + ": expected an array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].is_null())
            v[static_cast<Eigen::Index>(i)] = inf_sign * std::numeric_limits<double>::infinity();
        else if (j[i].is_number())
            v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
        else
            throw ConfigError(std::string(field) + ": expected numbers or null");
    }
    return v;
}

json optional_to_json(const std::optional<double>& v) {
    if (v) return json(*v);
    return json(nullptr);
}

std::optional<double> json_to_optional(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

json to_json(const ManifoldDescriptor& m) {
    json j;
    switch (m.kind) {
        case ManifoldKind::Euclidean:
            j["kind"] = "euclidean";
            j["n"] = m.n;
            break;
        case ManifoldKind::Hyperbolic:
            j["kind"] = "hyperbolic";
            j["n"] = m.n;
            break;
        case ManifoldKind::Product: {
            j["kind"] = "product";
            json f = json::array();
            for (const auto& fac : m.factors) f.push_back(to_json(fac));
            j["factors"] = f;
            break;
        }
    }
    return j;
}

ManifoldDescriptor manifold_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("manifold: expected an object with a 'kind' field");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "euclidean") return ManifoldDescriptor::euclidean(j.at("n").get<int>());
    if (kind == "hyperbolic") return ManifoldDescriptor::hyperbolic(j.at("n").get<int>());
    if (kind == "product") {
        std::vector<ManifoldDescriptor> factors;
        for (const auto& f : j.at("factors")) factors.push_back(manifold_from_json(f));
        return ManifoldDescriptor::product(std::move(factors));
    }
    throw ConfigError("manifold: unknown kind '" + kind + "'");
}

json to_json(const ConvexSet& s) {
    json j;
    if (const auto* iv = std::get_if<ConvexSet::Interval>(&s.descriptor())) {
        j["type"] = "interval";
        j["lo"] = iv->lo;
        j["hi"] = iv->hi;
        return j;
    }
    if (const auto* bx = std::get_if<ConvexSet::Box>(&s.descriptor())) {
        j["type"] = "box";
        j["lo"] = vec_to_json(bx->lo);
        j["hi"] = vec_to_json(bx->hi);
        return j;
    }
    if (const auto* bl = std::get_if<ConvexSet::Ball>(&s.descriptor())) {
        j["type"] = "ball";
        j["center"] = vec_to_json(bl->center.coords);
        j["radius"] = bl->radius;
        return j;
    }
    if (const auto* cb = std::get_if<ConvexSet::ChartBox>(&s.descriptor())) {
        j["type"] = "param_region";
        j["lo"] = bound_to_json(cb->lo);
        j["hi"] = bound_to_json(cb->hi);
        return j;
    }
    const auto& parts = std::get<ConvexSet::Intersection>(s.descriptor()).parts;
    j["type"] = "intersection";
    json p = json::array();
    for (const auto& part : parts) p.push_back(to_json(part));
    j["parts"] = p;
    return j;
}

ConvexSet set_from_json(const json& j, const ManifoldDescriptor& manifold) {
    if (!j.is_object() || !j.contains("type"))
        throw ConfigError("set: expected an object with a 'type' field");
    const std::string type = j.at("type").get<std::string>();
    if (type == "interval")
        return ConvexSet::interval(j.at("lo").get<double>(), j.at("hi").get<double>());
    if (type == "box")
        return ConvexSet::box(json_to_vec(j.at("lo"), "set.lo"), json_to_vec(j.at("hi"), "set.hi"));
    if (type == "ball") {
        ManifoldPoint center =
            j.contains("center_chart")
                ? from_chart(manifold, json_to_vec(j.at("center_chart"), "set.center_chart"))
                : make_point(manifold, json_to_vec(j.at("center"), "set.center"));
        return ConvexSet::geodesic_ball(center, j.at("radius").get<double>());
    }
    if (type == "param_region" || type == "chart_box")
        return ConvexSet::chart_box(manifold, json_to_bound(j.at("lo"), "set.lo", -1.0),
                                    json_to_bound(j.at("hi"), "set.hi", +1.0));
    if (type == "intersection") {
        std::vector<ConvexSet> parts;
        for (const auto& p : j.at("parts")) parts.push_back(set_from_json(p, manifold));
        return ConvexSet::intersection(std::move(parts));
    }
    throw ConfigError("set: unknown type '" + type + "'");
}

json to_json(const GridSpec& g) {
    json j;
    j["resolution"] = g.resolution;
    j["lo"] = vec_to_json(g.lo);
    j["hi"] = vec_to_json(g.hi);
    return j;
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    if (!j.is_object()) throw ConfigError("grid: expected an object");
    g.resolution = j.at("resolution").get<std::vector<int>>();
    g.lo = json_to_vec(j.at("lo"), "grid.lo");
    g.hi = json_to_vec(j.at("hi"), "grid.hi");
    return g;
}

std::string property_name(BifProperty p) {
    switch (p) {
        case BifProperty::Monotone: return "monotone";
        case BifProperty::Pseudomonotone: return "pseudomonotone";
        case BifProperty::ThetaUndermonotone: return "theta_undermonotone";
        case BifProperty::ConvexInY: return "convex_in_y";
        case BifProperty::DiagonalZero: return "diagonal_zero";
        case BifProperty::SegmentLevelCover: return "segment_level_cover";
    }
    return "?";
}

std::string verdict_name(CheckVerdict v) {
    return v == CheckVerdict::PassedOnSamples ? "passed_on_samples" : "counterexample_found";
}

std::string trap_verdict_name(TrapVerdict v) {
    switch (v) {
        case TrapVerdict::StrongStationary: return "strong_stationary";
        case TrapVerdict::WeakStationary: return "weak_stationary";
        case TrapVerdict::NotStationary: return "not_stationary";
        case TrapVerdict::VariationalTrap: return "variational_trap";
        case TrapVerdict::NotCertified: return "not_certified";
    }
    return "?";
}

std::string status_name(TerminalStatus s) {
    switch (s) {
        case TerminalStatus::StoppedAtEquilibrium: return "stopped_at_equilibrium";
        case TerminalStatus::MaxIters: return "max_iters";
        case TerminalStatus::FiniteTermination: return "finite_termination";
    }
    return "?";
}

json to_json(const PropertyReport& r) {
    json j;
    j["property"] = property_name(r.property);
    j["verdict"] = verdict_name(r.verdict);
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    if (r.theta_estimate) j["theta_estimate"] = *r.theta_estimate;
    if (r.witness) {
        j["witness"] = {{"x", vec_to_json(r.witness->first.coords)},
                        {"y", vec_to_json(r.witness->second.coords)}};
        j["violation"] = r.violation;
    }
    return j;
}

json to_json(const ConditioningEstimate& e) {
    json j;
    j["conditioned"] = e.conditioned;
    j["sample_count"] = e.sample_count;
    if (e.conditioned) {
        j["tau"] = e.tau;
        j["rho"] = e.rho;
        j["fit_residual"] = e.fit_residual;
    }
    if (e.violation_witness) j["violation_witness"] = vec_to_json(e.violation_witness->coords);
    return j;
}

json to_json(const TrapReport& r) {
    json j;
    j["verdict"] = trap_verdict_name(r.verdict);
    j["lambda_star"] = r.lambda_star;
    j["max_payoff_found"] = r.max_payoff_found;
    if (r.witness) j["witness"] = vec_to_json(r.witness->coords);
    if (r.trace_worthwhile_ok) j["trace_worthwhile_ok"] = *r.trace_worthwhile_ok;
    if (r.failing_step) j["failing_step"] = *r.failing_step;
    return j;
}

json to_json(const DivergenceAnchorReport& r) {
    json j;
    j["found"] = r.found;
    if (r.anchor) j["anchor"] = vec_to_json(r.anchor->coords);
    if (r.onset_index) j["onset_index"] = *r.onset_index;
    return j;
}

json to_json(const CoercivityReport& r) {
    json j;
    j["passed"] = r.passed;
    j["samples_outside"] = r.samples_outside;
    j["anchor_condition_implied"] = r.anchor_condition_implied;
    if (r.witness) j["witness"] = vec_to_json(r.witness->coords);
    return j;
}

void write_trace_jsonl(std::ostream& os, const IterationTrace& trace) {
    json header;
    header["type"] = "trace";
    header["problem"] = trace.problem;
    header["manifold"] = to_json(trace.manifold);
    header["curvature"] = trace.curved_experimental ? "curved-experimental" : "flat";
    header["columns"] = {"k",          "coords",      "lambda",         "step_dist",
                         "gap",        "dist_to_S",   "fejer_slack",    "inner_residual"};
    os << header.dump() << "\n";
    for (const auto& r : trace.records) {
        json j;
        j["k"] = r.k;
        j["coords"] = vec_to_json(r.x.coords);
        j["lambda"] = optional_to_json(r.lambda);
        j["step_dist"] = optional_to_json(r.step_dist);
        j["gap"] = r.gap;
        j["dist_to_S"] = optional_to_json(r.dist_to_S);
        j["fejer_slack"] = optional_to_json(r.fejer_slack);
        j["inner_residual"] = optional_to_json(r.inner_residual);
        os << j.dump() << "\n";
    }
    json footer;
    footer["type"] = "status";
    footer["status"] = status_name(trace.status);
    if (trace.k0) footer["k0"] = *trace.k0;
    os << footer.dump() << "\n";
}

IterationTrace read_trace_jsonl(std::istream& is) {
    IterationTrace trace;
    std::string line;
    bool have_header = false, have_status = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        const std::string type = j.value("type", j.contains("k") ? "record" : "?");
        if (type == "trace") {
            trace.manifold = manifold_from_json(j.at("manifold"));
            trace.problem = j.value("problem", "");
            trace.curved_experimental = j.value("curvature", "flat") != std::string("flat");
            have_header = true;
        } else if (type == "record") {
            if (!have_header) throw ConfigError("trace: record before header");
            TraceRecord r;
            r.k = j.at("k").get<int>();
            r.x = make_point(trace.manifold, json_to_vec(j.at("coords"), "trace.coords"));
            r.lambda = json_to_optional(j.at("lambda"));
            r.step_dist = json_to_optional(j.at("step_dist"));
            r.gap = j.at("gap").get<double>();
            r.dist_to_S = json_to_optional(j.at("dist_to_S"));
            r.fejer_slack = json_to_optional(j.at("fejer_slack"));
            r.inner_residual = json_to_optional(j.at("inner_residual"));
            trace.records.push_back(std::move(r));
        } else if (type == "status") {
            const std::string s = j.at("status").get<std::string>();
            if (s == "stopped_at_equilibrium")
                trace.status = TerminalStatus::StoppedAtEquilibrium;
            else if (s == "max_iters")
                trace.status = TerminalStatus::MaxIters;
            else if (s == "finite_termination")
                trace.status = TerminalStatus::FiniteTermination;
            else
                throw ConfigError("trace: unknown status '" + s + "'");
            if (j.contains("k0")) trace.k0 = j.at("k0").get<int>();
            have_status = true;
        } else {
            throw ConfigError("trace: unrecognized line");
        }
    }
    if (!have_header || !have_status) throw ConfigError("trace: missing header or status footer");
    return trace;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
    const int d = trace.manifold.ambient_dim();
    os << "k";
    for (int i = 0; i < d; ++i) os << ",coord" << i;
    os << ",lambda,step_dist,gap,dist_to_S,fejer_slack,inner_residual\n";
    auto cell = [&os](const std::optional<double>& v) {
        os << ',';
        if (v) os << format_double(*v);
    };
    for (const auto& r : trace.records) {
        os << r.k;
        for (int i = 0; i < d; ++i) os << ',' << format_double(r.x.coords[i]);
        cell(r.lambda);
        cell(r.step_dist);
        os << ',' << format_double(r.gap);
        cell(r.dist_to_S);
        cell(r.fejer_slack);
        cell(r.inner_residual);
        os << '\n';
    }
}

}  // namespace hadeq
