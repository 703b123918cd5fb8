#include "hhmmo/geometry.hpp"

#include "hhmmo/errors.hpp"
#include "hhmmo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace hhmmo {

using numerics::grid_roots;
using numerics::guarded;
using numerics::kNaN;

namespace {

constexpr int kScanPoints = 2000;

bool physical(double x) { return x > 0.0 && x < 1.0; }

bool physical(const ReducedState& s) { return physical(s.h) && physical(s.n); }

// Gate value and slope of the gate that stays on its nullcline in the given regime.
GateProfile fast_gate(double v, Regime regime, const ModelParameters& p) {
    return gate_profile(regime == Regime::h_slow ? GateKind::n : GateKind::h, v, p);
}

double gating_rate(double v, const ReducedState& s, GateKind gate, const ModelParameters& p) {
    return rhs_gate(gate, v, gate == GateKind::h ? s.h : s.n, p);
}

}  // namespace

std::string to_string(Regime r) { return r == Regime::h_slow ? "h_slow" : "n_slow"; }

std::string to_string(SheetLabel s) {
    switch (s) {
        case SheetLabel::S_a_minus: return "S_a_minus";
        case SheetLabel::S_r: return "S_r";
        case SheetLabel::S_a_plus: return "S_a_plus";
    }
    return "";
}

std::string to_string(FoldCurve c) { return c == FoldCurve::L_minus ? "L_minus" : "L_plus"; }

std::string to_string(OrbitalRelationKind k) {
    switch (k) {
        case OrbitalRelationKind::Connected: return "Connected";
        case OrbitalRelationKind::Aligned: return "Aligned";
        case OrbitalRelationKind::Remote: return "Remote";
    }
    return "";
}

std::string to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::fast: return "fast";
        case SegmentKind::intermediate: return "intermediate";
        case SegmentKind::slow: return "slow";
    }
    return "";
}

std::pair<double, double> analysis_window(const ModelParameters& p) {
    return {p.E_K + 1e-3, p.E_Na - 1e-3};
}

std::vector<double> uniform_grid(double a, double b, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = a + (b - a) * i / (points - 1);
    return g;
}

double slow_coordinate(const ReducedState& s, Regime regime) { return regime == Regime::h_slow ? s.h : s.n; }

double slow_coordinate(const FoldedSingularity& q) { return q.regime == Regime::h_slow ? q.h : q.n; }

std::optional<FoldPoint> fold_at_v(double v, const ModelParameters& p) {
    const GateProfile m = gate_profile(GateKind::m, v, p);
    const double m2 = m.inf * m.inf, m3 = m2 * m.inf;
    const double a = (v - p.E_Na) * m3;
    const double b = m3 + 3.0 * (v - p.E_Na) * m2 * m.d_inf;
    const double den = (v - p.E_K) * b - a;
    if (den == 0.0) return std::nullopt;
    const double h = (p.gbar_L * (p.E_K - p.E_L) - p.Ibar) / den;
    const double n4 = -(p.gbar_L + b * h) / p.gbar_K;
    if (!(h > 0.0) || !(n4 > 0.0)) return std::nullopt;
    const double n = std::sqrt(std::sqrt(n4));
    const double wvv = critical_residual(v, h, n, p).d_vv;
    return FoldPoint{v, h, n, wvv > 0.0 ? FoldCurve::L_minus : FoldCurve::L_plus};
}

std::optional<std::pair<double, double>> fold_curve_range(const ModelParameters& p) {
    const auto [a, b] = analysis_window(p);
    double lo = kNaN, hi = kNaN;
    for (double v : uniform_grid(a, b, 4 * kScanPoints)) {
        const auto f = fold_at_v(v, p);
        if (f && physical(f->h) && physical(f->n)) {
            if (std::isnan(lo)) lo = v;
            hi = v;
        }
    }
    if (std::isnan(lo)) return std::nullopt;
    return std::make_pair(lo, hi);
}

namespace {

// Damped Newton for {W = 0, d_v W = 0} in (h, n) at fixed v.
std::optional<std::pair<double, double>> newton_fold(double v, double h, double n, const ModelParameters& p) {
    const GateProfile m = gate_profile(GateKind::m, v, p);
    const double Wvh = -(m.inf * m.inf * m.inf + 3.0 * (v - p.E_Na) * m.inf * m.inf * m.d_inf);
    auto residual = [&](double hh, double nn) {
        const CriticalResidual w = critical_residual(v, hh, nn, p);
        return std::array<double, 4>{w.value, w.d_v, w.d_h, w.d_n};
    };
    auto r = residual(h, n);
    for (int it = 0; it < 50; ++it) {
        const double norm = std::hypot(r[0], r[1]);
        if (norm < 1e-14) return std::make_pair(h, n);
        const double Wvn = -4.0 * p.gbar_K * n * n * n;
        const double det = r[2] * Wvn - r[3] * Wvh;
        if (det == 0.0) return std::nullopt;
        const double dh = -(r[0] * Wvn - r[3] * r[1]) / det;
        const double dn = -(r[2] * r[1] - Wvh * r[0]) / det;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            const double hh = h + lambda * dh, nn = n + lambda * dn;
            if (!(hh > 0.0) || !(nn > 0.0)) continue;
            const auto rr = residual(hh, nn);
            if (std::hypot(rr[0], rr[1]) < norm) {
                h = hh;
                n = nn;
                r = rr;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (norm < 1e-11) return std::make_pair(h, n);
            return std::nullopt;
        }
    }
    if (std::hypot(r[0], r[1]) < 1e-11) return std::make_pair(h, n);
    return std::nullopt;
}

}  // namespace

FoldCurves fold_curves(const ModelParameters& p, const std::vector<double>& v_grid) {
    FoldCurves out;
    double h = 0.5, n = 0.5;
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
        const double v = v_grid[i];
        auto sol = newton_fold(v, h, n, p);
        // Where the curve steepens, continue through intermediate v values.
        for (int sub = 4; !sol && i > 0 && sub <= 1024; sub *= 4) {
            double hh = h, nn = n;
            bool ok = true;
            for (int k = 1; k <= sub && ok; ++k) {
                const double vk = v_grid[i - 1] + (v - v_grid[i - 1]) * k / sub;
                const auto step = newton_fold(vk, hh, nn, p);
                ok = step.has_value();
                if (ok) std::tie(hh, nn) = *step;
            }
            if (ok) sol = std::make_pair(hh, nn);
        }
        if (!sol) fail(ErrorKind::NoFoldAtV, "fold curve: Newton did not converge at v = " + std::to_string(v));
        if (!physical(sol->first) || !physical(sol->second))
            fail(ErrorKind::NoFoldAtV, "fold curve: no physical fold at v = " + std::to_string(v));
        h = sol->first;
        n = sol->second;
        const double wvv = critical_residual(v, h, n, p).d_vv;
        out.points.push_back({v, h, n, wvv > 0.0 ? FoldCurve::L_minus : FoldCurve::L_plus});
    }
    for (std::size_t i = 1; i < out.points.size(); ++i) {
        const FoldPoint& a = out.points[i - 1];
        const FoldPoint& b = out.points[i];
        if (a.curve == b.curve) continue;
        double hs = a.h, ns = a.n;
        auto wvv = [&](double v) {
            auto s = newton_fold(v, hs, ns, p);
            if (!s) return kNaN;
            return critical_residual(v, s->first, s->second, p).d_vv;
        };
        const double vc = numerics::bisect(wvv, a.v, b.v, wvv(a.v), 1e-15);
        auto s = newton_fold(vc, hs, ns, p);
        if (s) out.connection = FoldPoint{vc, s->first, s->second, FoldCurve::L_minus};
        break;
    }
    return out;
}

double tangential_connection_v(const ModelParameters& p) {
    const auto [a, b] = analysis_window(p);
    auto wvv = [&](double v) {
        const auto f = fold_at_v(v, p);
        if (!f) return kNaN;
        return critical_residual(v, f->h, f->n, p).d_vv;
    };
    const auto roots = grid_roots(wvv, a, b, kScanPoints);
    if (roots.empty()) fail(ErrorKind::NotFound, "no tangential connection of the fold curves");
    return roots.front();
}

std::vector<FoldPoint> slice_folds(double level, Regime regime, const ModelParameters& p) {
    const auto [a, b] = analysis_window(p);
    auto g = [&](double v) {
        const auto f = fold_at_v(v, p);
        if (!f || f->h >= 1.0 || f->n >= 1.0) return kNaN;
        return (regime == Regime::h_slow ? f->h : f->n) - level;
    };
    std::vector<FoldPoint> out;
    for (double v : grid_roots(g, a, b, kScanPoints)) {
        if (auto f = fold_at_v(v, p)) out.push_back(*f);
    }
    return out;
}

SheetClassification sheet_of(double v, double h, double n, const ModelParameters& p) {
    const CriticalResidual w = critical_residual(v, h, n, p);
    if (std::fabs(w.value) > 1e-6) fail(ErrorKind::NotOnManifold, "sheet_of: point not on M2");
    if (std::fabs(w.d_v) < 1e-9) return {SheetLabel::S_r, true};
    if (w.d_v > 0.0) return {SheetLabel::S_r, false};
    const auto folds = slice_folds(h, Regime::h_slow, p);
    double split;
    if (folds.size() >= 2) {
        const double lo = folds.front().v, hi = folds.back().v;
        if (v <= lo) return {SheetLabel::S_a_minus, false};
        if (v >= hi) return {SheetLabel::S_a_plus, false};
        split = 0.5 * (lo + hi);
    } else if (folds.size() == 1) {
        split = folds.front().v;
    } else {
        split = tangential_connection_v(p);
    }
    return {v < split ? SheetLabel::S_a_minus : SheetLabel::S_a_plus, false};
}

ReducedState manifold_point(double v, Regime regime, const ModelParameters& p) {
    if (regime == Regime::h_slow) {
        const double n = gate_profile(GateKind::n, v, p).inf;
        return {v, eta(v, n, p).value, n};
    }
    const double h = gate_profile(GateKind::h, v, p).inf;
    return {v, h, nu(v, h, p).value};
}

std::vector<ReducedState> manifold_Mh(const ModelParameters& p, const std::vector<double>& v_grid) {
    std::vector<ReducedState> out;
    out.reserve(v_grid.size());
    for (double v : v_grid) out.push_back(manifold_point(v, Regime::h_slow, p));
    return out;
}

std::vector<ReducedState> manifold_Mn(const ModelParameters& p, const std::vector<double>& v_grid) {
    std::vector<ReducedState> out;
    out.reserve(v_grid.size());
    for (double v : v_grid) out.push_back(manifold_point(v, Regime::n_slow, p));
    return out;
}

double manifold_fold_function(double v, Regime regime, const ModelParameters& p) {
    const ReducedState s = manifold_point(v, regime, p);
    const CriticalResidual w = critical_residual(s.v, s.h, s.n, p);
    const double slope = fast_gate(v, regime, p).d_inf;
    return regime == Regime::h_slow ? w.d_v + w.d_n * slope : w.d_v + w.d_h * slope;
}

std::vector<FoldPoint> fold_points(Regime regime, const ModelParameters& p) {
    const auto [a, b] = analysis_window(p);
    auto f = [&](double v) {
        const ReducedState s = manifold_point(v, regime, p);
        if (!physical(s)) return kNaN;
        return manifold_fold_function(v, regime, p);
    };
    const auto roots = grid_roots(f, a, b, kScanPoints);
    if (roots.size() != 2) return {};
    std::vector<FoldPoint> out;
    for (std::size_t i = 0; i < 2; ++i) {
        const ReducedState s = manifold_point(roots[i], regime, p);
        out.push_back({s.v, s.h, s.n, i == 0 ? FoldCurve::L_minus : FoldCurve::L_plus});
    }
    return out;
}

std::vector<FoldPoint> fold_points_Mh(const ModelParameters& p) { return fold_points(Regime::h_slow, p); }
std::vector<FoldPoint> fold_points_Mn(const ModelParameters& p) { return fold_points(Regime::n_slow, p); }

std::array<FoldedSingularity, 2> folded_singularities(const ModelParameters& p, Regime regime) {
    const auto [a, b] = analysis_window(p);
    auto phi = [&](double v) {
        const ReducedState s = manifold_point(v, regime, p);
        if (!physical(s)) return kNaN;
        return critical_residual(s.v, s.h, s.n, p).d_v;
    };
    const auto roots = grid_roots(phi, a, b, kScanPoints);
    if (roots.size() < 2) fail(ErrorKind::NotFound, "fewer than two folded singularities");
    const ReducedState lo = manifold_point(roots.front(), regime, p);
    const ReducedState hi = manifold_point(roots.back(), regime, p);
    return {FoldedSingularity{lo.v, lo.h, lo.n, Branch::minus, regime},
            FoldedSingularity{hi.v, hi.h, hi.n, Branch::plus, regime}};
}

OrbitalRelation classify_gap(double gap) {
    constexpr double tol = 1e-9;
    if (gap > tol) return {OrbitalRelationKind::Connected, gap};
    if (gap < -tol) return {OrbitalRelationKind::Remote, gap};
    return {OrbitalRelationKind::Aligned, gap};
}

OrbitalRelation orbital_relation(const ModelParameters& p, Regime regime) {
    const auto q = folded_singularities(p, regime);
    // Oriented so that a positive gap always means the cycle through q- reaches q+.
    const double gap = regime == Regime::h_slow ? q[0].h - q[1].h : q[1].n - q[0].n;
    return classify_gap(gap);
}

Equilibrium true_equilibrium(const ModelParameters& p, Regime regime) {
    const auto [a, b] = analysis_window(p);
    auto e = [&](double v) {
        return rhs_V(v, gate_profile(GateKind::m, v, p).inf, gate_profile(GateKind::h, v, p).inf,
                     gate_profile(GateKind::n, v, p).inf, p);
    };
    const auto roots = grid_roots(e, a, b, kScanPoints, 1e-16);
    if (roots.empty()) fail(ErrorKind::NotFound, "no equilibrium in the analysis window");
    const double v = roots.front();
    Equilibrium eq;
    eq.point = {v, gate_profile(GateKind::h, v, p).inf, gate_profile(GateKind::n, v, p).inf};
    eq.sheet = sheet_of(eq.point.v, eq.point.h, eq.point.n, p);
    const std::string base = regime == Regime::h_slow ? "H" : "N";
    // Branches of the whole curve, including stretches where the graph leaves (0, 1).
    auto fold_fn = [&](double x) { return numerics::guarded([&](double y) { return manifold_fold_function(y, regime, p); }, x); };
    const auto folds = grid_roots(fold_fn, a, b, kScanPoints);
    if (folds.size() == 2) {
        eq.branch = base + (v < folds[0] ? "-" : (v > folds[1] ? "+" : "r"));
    } else {
        eq.branch = base;
    }
    return eq;
}

ReducedState project_fold(const FoldPoint& fold, const ModelParameters& p) {
    const auto [a, b] = analysis_window(p);
    const double dir = fold.curve == FoldCurve::L_minus ? 1.0 : -1.0;
    auto W = [&](double v) { return critical_residual(v, fold.h, fold.n, p).value; };
    const double step = 1e-3;
    double x0 = fold.v + dir * 1e-4;
    double f0 = W(x0);
    while (true) {
        double x1 = x0 + dir * step;
        if (x1 < a || x1 > b) break;
        const double f1 = W(x1);
        if ((f0 < 0.0) != (f1 < 0.0)) {
            const double lo = std::min(x0, x1), hi = std::max(x0, x1);
            const double v = numerics::bisect(W, lo, hi, W(lo), 1e-16);
            if (critical_residual(v, fold.h, fold.n, p).d_v < 0.0) return {v, fold.h, fold.n};
        }
        x0 = x1;
        f0 = f1;
    }
    fail(ErrorKind::NoLandingPoint, "fast fibre from fold does not reach an attracting sheet");
}

FibreEnd follow_intermediate_fibre(const ReducedState& start, Regime regime, const ModelParameters& p) {
    const auto [a, b] = analysis_window(p);
    const double level = slow_coordinate(start, regime);
    // Point on the slice at potential v, the fast gate's rate, and the fold function.
    auto lift = [&](double v) -> ReducedState {
        return regime == Regime::h_slow ? ReducedState{v, level, nu(v, level, p).value}
                                        : ReducedState{v, eta(v, level, p).value, level};
    };
    const GateKind fast = regime == Regime::h_slow ? GateKind::n : GateKind::h;
    auto rate = [&](double v) { return gating_rate(v, lift(v), fast, p); };
    auto wv = [&](double v) {
        const ReducedState s = lift(v);
        return critical_residual(s.v, s.h, s.n, p).d_v;
    };
    const double flow = regime == Regime::h_slow ? intermediate_flow_h(start.v, level, p)
                                                 : intermediate_flow_n(start.v, level, p);
    const double dir = flow > 0.0 ? 1.0 : -1.0;
    const double step = 1e-4;
    double x0 = start.v, r0 = rate(x0), w0 = wv(x0);
    while (true) {
        const double x1 = x0 + dir * step;
        if (x1 < a || x1 > b) break;
        const double r1 = guarded(rate, x1), w1 = guarded(wv, x1);
        if (!std::isfinite(r1) || !std::isfinite(w1)) break;
        const double lo = std::min(x0, x1), hi = std::max(x0, x1);
        if ((r0 < 0.0) != (r1 < 0.0)) {
            const double v = numerics::bisect(rate, lo, hi, rate(lo), 1e-16);
            return {lift(v), false};
        }
        if ((w0 < 0.0) != (w1 < 0.0)) {
            const double v = numerics::bisect(wv, lo, hi, wv(lo), 1e-16);
            return {lift(v), true};
        }
        x0 = x1;
        r0 = r1;
        w0 = w1;
    }
    fail(ErrorKind::NotFound, "intermediate fibre leaves the analysis window");
}

SingularCycle singular_cycle(const ModelParameters& p, Regime regime) {
    const auto q = folded_singularities(p, regime);
    SingularCycle cycle;
    cycle.relation = orbital_relation(p, regime);
    auto as_state = [](const FoldedSingularity& s) { return ReducedState{s.v, s.h, s.n}; };
    auto as_fold = [](const ReducedState& s, FoldCurve c) { return FoldPoint{s.v, s.h, s.n, c}; };

    const ReducedState qm = as_state(q[0]), qp = as_state(q[1]);
    const ReducedState land_minus = project_fold(as_fold(qm, FoldCurve::L_minus), p);
    cycle.segments.push_back({SegmentKind::fast, qm, land_minus});
    const FibreEnd upper = follow_intermediate_fibre(land_minus, regime, p);
    cycle.segments.push_back({SegmentKind::intermediate, land_minus, upper.point});

    if (!upper.reached_fold) {
        cycle.segments.push_back({SegmentKind::slow, upper.point, qp});
        const ReducedState land_plus = project_fold(as_fold(qp, FoldCurve::L_plus), p);
        cycle.segments.push_back({SegmentKind::fast, qp, land_plus});
        const FibreEnd lower = follow_intermediate_fibre(land_plus, regime, p);
        cycle.segments.push_back({SegmentKind::intermediate, land_plus, lower.point});
        cycle.segments.push_back({SegmentKind::slow, lower.point, qm});
    } else {
        const ReducedState land = project_fold(as_fold(upper.point, FoldCurve::L_plus), p);
        cycle.segments.push_back({SegmentKind::fast, upper.point, land});
        const FibreEnd lower = follow_intermediate_fibre(land, regime, p);
        cycle.segments.push_back({SegmentKind::intermediate, land, lower.point});
        // At the level of q- the intermediate fibre ends at q- itself, so this slow
        // segment degenerates to a point in the singular limit.
        cycle.segments.push_back({SegmentKind::slow, lower.point, qm});
    }
    return cycle;
}

}  // namespace hhmmo
