#include "hadeq/existence.hpp"

#include <cmath>

namespace hadeq {

namespace {

constexpr double kNodeMembershipTol = 1e-10;
constexpr double kAnchorTol = 1e-10;
constexpr double kCoercivityTol = 1e-12;
constexpr double kSegmentTol = 1e-10;

}  // namespace

void GridSpec::validate(const ManifoldDescriptor& m) const {
    const int d = m.intrinsic_dim();
    if (static_cast<int>(resolution.size()) != d || lo.size() != d || hi.size() != d)
        throw DomainMismatchError("grid: axis count does not match the intrinsic dimension");
    for (int r : resolution)
        if (r < 2) throw DomainMismatchError("grid: need at least 2 points per axis");
    for (int i = 0; i < d; ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
            throw DomainMismatchError("grid: bounds must be finite with lo < hi");
    }
}

std::vector<ManifoldPoint> grid_nodes(const GridSpec& spec, const ConvexSet& domain) {
    spec.validate(domain.manifold());
    const int d = static_cast<int>(spec.resolution.size());
    std::size_t total = 1;
    for (int r : spec.resolution) total *= static_cast<std::size_t>(r);

    std::vector<ManifoldPoint> nodes;
    nodes.reserve(total);
    Eigen::VectorXd u(d);
    std::vector<int> idx(d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = d - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % spec.resolution[a]);
            rem /= spec.resolution[a];
        }
        for (int a = 0; a < d; ++a)
            u[a] = spec.lo[a] +
                   (spec.hi[a] - spec.lo[a]) * idx[a] / static_cast<double>(spec.resolution[a] - 1);
        ManifoldPoint p = from_chart(domain.manifold(), u);
        if (domain.contains(p, kNodeMembershipTol)) nodes.push_back(std::move(p));
    }
    if (nodes.empty()) throw DegenerateInputError("grid: no nodes inside the domain");
    return nodes;
}

GridSpec default_grid(const ConvexSet& domain, double halfwidth) {
    GridSpec spec;
    domain.chart_bounds(halfwidth, spec.lo, spec.hi);
    const int d = domain.manifold().intrinsic_dim();
    spec.resolution.assign(d, d <= 2 ? 201 : 51);
    return spec;
}

double gap(const Bifunction& F, const ConvexSet& domain, const ManifoldPoint& x,
           const std::vector<ManifoldPoint>& nodes) {
    if (nodes.empty()) throw DegenerateInputError("gap: empty grid");
    if (!domain.contains(x, 1e-9))
        throw DomainMismatchError("gap: point is not in the domain");
    double worst = 0.0;
    for (const auto& y : nodes) worst = std::max(worst, -F(x, y));
    return worst;
}

double gap(const Bifunction& F, const ConvexSet& domain, const ManifoldPoint& x,
           const GridSpec& spec) {
    return gap(F, domain, x, grid_nodes(spec, domain));
}

std::vector<ManifoldPoint> brute_force_equilibria(const Bifunction& F, const ConvexSet& domain,
                                                  const GridSpec& spec, double tol) {
    if (!(tol > 0.0)) throw DomainMismatchError("brute_force_equilibria: tol must be positive");
    const std::vector<ManifoldPoint> nodes = grid_nodes(spec, domain);
    std::vector<ManifoldPoint> out;
    for (const auto& x : nodes) {
        bool keep = true;
        for (const auto& y : nodes) {
            if (-F(x, y) > tol) {  // early reject: gap already exceeds tol
                keep = false;
                break;
            }
        }
        if (keep) out.push_back(x);
    }
    return out;
}

ConvexSet truncate_to_ball(const ConvexSet& domain, const ManifoldPoint& z0, double k) {
    if (!(k > 0.0)) throw DomainMismatchError("truncate_to_ball: radius must be positive");
    return ConvexSet::intersection({domain, ConvexSet::geodesic_ball(z0, k)});
}

DivergenceAnchorReport check_divergence_anchor(const Bifunction& F, const ManifoldPoint& z0,
                                               const std::vector<ManifoldPoint>& path,
                                               const std::vector<ManifoldPoint>& candidates) {
    if (path.size() < 3)
        throw InsufficientEvidenceError("divergence anchor: path needs at least 3 points");
    double prev = -1.0;
    for (const auto& z : path) {
        const double d = dist(z, z0);
        if (!(d > prev))
            throw DomainMismatchError("divergence anchor: path distances to z0 must be "
                                      "strictly increasing");
        prev = d;
    }
    DivergenceAnchorReport rep;
    for (const auto& cand : candidates) {
        // smallest index from which the candidate is never improved on
        std::size_t onset = 0;
        for (std::size_t k = 0; k < path.size(); ++k)
            if (F(path[k], cand) > kAnchorTol) onset = k + 1;
        if (onset < path.size()) {
            rep.found = true;
            rep.anchor = cand;
            rep.onset_index = onset;
            return rep;
        }
    }
    return rep;
}

CoercivityReport check_coercivity(const Bifunction& F, const ConvexSet& domain,
                                  const ConvexSet& B, const ManifoldPoint& y0,
                                  std::size_t sample_count, std::uint64_t seed) {
    if (!B.contains(y0, 1e-10) || !domain.contains(y0, 1e-10))
        throw DomainMismatchError("coercivity: y0 must lie in B and in the domain");
    std::mt19937_64 rng(seed);
    CoercivityReport rep;
    std::size_t outside = 0;
    std::size_t attempts = 0;
    const std::size_t max_attempts = sample_count * 50;
    while (outside < sample_count && attempts < max_attempts) {
        ++attempts;
        // widen the sampling window past B so that the complement is reachable
        ManifoldPoint x = domain.sample(rng, 8.0);
        if (B.contains(x, 0.0)) continue;
        ++outside;
        if (!(F(x, y0) < -kCoercivityTol)) {
            rep.passed = false;
            rep.samples_outside = outside;
            rep.witness = std::move(x);
            return rep;
        }
    }
    if (outside == 0)
        throw InsufficientEvidenceError("coercivity: no samples found outside B");
    rep.passed = true;
    rep.samples_outside = outside;
    rep.anchor_condition_implied = true;
    return rep;
}

PropertyReport check_segment_level_cover(const Bifunction& F, const ConvexSet& truncated,
                                         std::size_t pair_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PropertyReport rep;
    rep.property = BifProperty::SegmentLevelCover;
    rep.samples = pair_samples;
    rep.seed = seed;
    for (std::size_t i = 0; i < pair_samples; ++i) {
        ManifoldPoint y1 = truncated.sample(rng);
        ManifoldPoint y2 = truncated.sample(rng);
        for (int j = 0; j <= 10; ++j) {
            const ManifoldPoint g = geodesic_point(y1, y2, j / 10.0);
            const double v = std::min(F(y1, g), F(y2, g)) - kSegmentTol;
            if (v > 0.0) {
                rep.verdict = CheckVerdict::CounterexampleFound;
                rep.witness = std::make_pair(std::move(y1), std::move(y2));
                rep.violation = v;
                return rep;
            }
        }
    }
    rep.verdict = CheckVerdict::PassedOnSamples;
    return rep;
}

}  // namespace hadeq
