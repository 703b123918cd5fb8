#include "hhmmo/local_analysis.hpp"

#include "hhmmo/errors.hpp"
#include "hhmmo/numerics.hpp"
#include "hhmmo/reduction.hpp"

#include <cmath>

namespace hhmmo {

std::string to_string(StabilityKind k) {
    switch (k) {
        case StabilityKind::FocalAttracting: return "FocalAttracting";
        case StabilityKind::NodalAttracting: return "NodalAttracting";
        case StabilityKind::FocalRepelling: return "FocalRepelling";
        case StabilityKind::NodalRepelling: return "NodalRepelling";
    }
    return "";
}

PartialJacobian jacobian_partial(const ReducedState& s, double epsilon_mid, const ModelParameters& p,
                                 Regime regime) {
    const bool h_slow = regime == Regime::h_slow;
    const CriticalResidual w = critical_residual(s.v, s.h, s.n, p);
    const double fast_inf = gate_profile(h_slow ? GateKind::n : GateKind::h, s.v, p).inf;
    if (std::fabs(w.value) > 1e-6 || std::fabs((h_slow ? s.n : s.h) - fast_inf) > 1e-6)
        fail(ErrorKind::NotOnManifold, "jacobian_partial: point is not on the one-dimensional critical manifold");

    ModelParameters q = p;
    q.epsilon_mid = epsilon_mid;
    q.delta_h = h_slow ? 0.0 : 1.0;
    q.delta_n = h_slow ? 1.0 : 0.0;
    const Jacobian3 J = reduced_field_jacobian(s, q);
    const int k = h_slow ? 2 : 1;

    PartialJacobian out;
    out.a = {{{J[0][0], J[0][k]}, {J[k][0], J[k][k]}}};
    out.trace = out.a[0][0] + out.a[1][1];
    out.det = out.a[0][0] * out.a[1][1] - out.a[0][1] * out.a[1][0];
    out.discriminant = out.trace * out.trace - 4.0 * out.det;
    const std::complex<double> root = std::sqrt(std::complex<double>(out.discriminant, 0.0));
    out.eigenvalues = {0.5 * (out.trace - root), 0.5 * (out.trace + root)};
    return out;
}

PartialJacobian jacobian_partial_at(double v, double epsilon_mid, const ModelParameters& p, Regime regime) {
    return jacobian_partial(manifold_point(v, regime, p), epsilon_mid, p, regime);
}

StabilityKind classify_jacobian(const PartialJacobian& j) {
    if (j.det < 0.0) return StabilityKind::NodalRepelling;
    const bool focal = j.discriminant < 0.0;
    if (j.trace < 0.0) return focal ? StabilityKind::FocalAttracting : StabilityKind::NodalAttracting;
    return focal ? StabilityKind::FocalRepelling : StabilityKind::NodalRepelling;
}

namespace {

std::optional<PartialJacobian> try_jacobian(double v, double eps, const ModelParameters& p, Regime regime) {
    try {
        const ReducedState s = manifold_point(v, regime, p);
        if (!(s.h > 0.0 && s.h < 1.0 && s.n > 0.0 && s.n < 1.0)) return std::nullopt;
        return jacobian_partial(s, eps, p, regime);
    } catch (const Error&) {
        return std::nullopt;
    }
}

template <class Select, class Accept>
std::vector<double> roots_of(const ModelParameters& p, double eps, Regime regime, const std::vector<double>& grid,
                             Select select, Accept accept) {
    auto f = [&](double v) {
        const auto j = try_jacobian(v, eps, p, regime);
        return j ? select(*j) : numerics::kNaN;
    };
    std::vector<double> out;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double f0 = f(grid[i - 1]), f1 = f(grid[i]);
        if (!std::isfinite(f0) || !std::isfinite(f1) || (f0 < 0.0) == (f1 < 0.0)) continue;
        const double v = numerics::bisect(f, grid[i - 1], grid[i], f0, 1e-15);
        const auto j = try_jacobian(v, eps, p, regime);
        if (j && accept(*j)) out.push_back(v);
    }
    return out;
}

}  // namespace

std::vector<double> hopf_points(const ModelParameters& p, double eps, Regime regime, const std::vector<double>& grid) {
    return roots_of(
        p, eps, regime, grid, [](const PartialJacobian& j) { return j.trace; },
        [](const PartialJacobian& j) { return j.det > 0.0; });
}

std::vector<double> degenerate_nodes(const ModelParameters& p, double eps, Regime regime,
                                     const std::vector<double>& grid) {
    return roots_of(
        p, eps, regime, grid, [](const PartialJacobian& j) { return j.discriminant; },
        [](const PartialJacobian& j) { return j.trace < 0.0 && j.det > 0.0; });
}

std::vector<StabilitySegment> stability_segments(const ModelParameters& p, double eps, Regime regime,
                                                 const std::vector<double>& grid) {
    std::vector<StabilitySegment> segs;
    for (double v : grid) {
        const auto j = try_jacobian(v, eps, p, regime);
        if (!j) continue;
        const StabilityKind kind = classify_jacobian(*j);
        if (!segs.empty() && segs.back().kind == kind) {
            segs.back().v_interval.second = v;
        } else {
            segs.push_back({{v, v}, kind, std::nullopt, std::nullopt});
        }
    }
    // Attach each special point to the attracting segment bordering it, focal first.
    auto attach = [&](double v, bool hopf) {
        StabilitySegment* best = nullptr;
        double best_dist = INFINITY;
        for (auto& s : segs) {
            if (s.kind != StabilityKind::FocalAttracting && s.kind != StabilityKind::NodalAttracting) continue;
            const double d = std::max(0.0, std::max(s.v_interval.first - v, v - s.v_interval.second));
            const double bias = s.kind == StabilityKind::FocalAttracting ? 0.0 : 1e-12;
            if (d + bias < best_dist) {
                best_dist = d + bias;
                best = &s;
            }
        }
        if (best) (hopf ? best->hopf_v : best->degenerate_v) = v;
    };
    for (double v : hopf_points(p, eps, regime, grid)) attach(v, true);
    for (double v : degenerate_nodes(p, eps, regime, grid)) attach(v, false);
    return segs;
}

}  // namespace hhmmo
