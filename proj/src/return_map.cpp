#include "hhmmo/return_map.hpp"

#include "hhmmo/errors.hpp"
#include "hhmmo/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hhmmo {

namespace {

constexpr double kEndpointCut = 1e-8;
constexpr double kSingularTol = 1e-10;
constexpr int kPrescanPoints = 400;
// Near q- numerator and denominator vanish together (removable 0/0); a small denominator
// only counts as singular when the quotient is large as well.
constexpr double kMaxIntegrand = 1e6;

ModelParameters with_current(const ModelParameters& p, double Ibar) {
    ModelParameters q = p;
    q.Ibar = Ibar;
    return q;
}

struct SliceTerms {
    double numerator, denominator;
};

SliceTerms slice_terms(double v, double level, const ModelParameters& p, Regime regime) {
    if (regime == Regime::h_slow) {
        const double n = nu(v, level, p).value;
        const CriticalResidual w = critical_residual(v, level, n, p);
        return {w.d_v * rhs_H(v, level, p), w.d_n * rhs_N(v, n, p)};
    }
    const double h = eta(v, level, p).value;
    const CriticalResidual w = critical_residual(v, h, level, p);
    return {w.d_v * rhs_N(v, level, p), w.d_h * rhs_H(v, h, p)};
}

// Rejects intervals on which the denominator changes sign (the slice crosses the
// one-dimensional critical manifold).
void prescan(double a, double b, double level, const ModelParameters& p, Regime regime) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i <= kPrescanPoints; ++i) {
        const double v = a + (b - a) * i / kPrescanPoints;
        const SliceTerms t = slice_terms(v, level, p, regime);
        const double den = t.denominator;
        const bool blows_up = std::fabs(den) < kSingularTol && std::fabs(t.numerator) > kMaxIntegrand * std::fabs(den);
        if (blows_up || (std::isfinite(prev) && (prev < 0.0) != (den < 0.0)))
            fail(ErrorKind::SingularIntegrand, "displacement: slice meets the one-dimensional critical manifold");
        prev = den;
    }
}

double integrate(double a, double b, double level, const ModelParameters& p, Regime regime, double tol,
                 double& err) {
    prescan(a, b, level, p, regime);
    auto f = [&](double v) { return displacement_integrand(v, level, p, regime); };
    double e = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &e);
    err += std::fabs(e);
    return value;
}

}  // namespace

ExcursionGeometry excursion_geometry(double level, const ModelParameters& p, Regime regime) {
    const auto folds = slice_folds(level, regime, p);
    const FoldPoint* lm = nullptr;
    const FoldPoint* lp = nullptr;
    for (const auto& f : folds) {
        if (f.curve == FoldCurve::L_minus && !lm) lm = &f;
        if (f.curve == FoldCurve::L_plus) lp = &f;
    }
    if (!lm || !lp) fail(ErrorKind::NotFound, "slice at this level does not cross both fold curves");
    ExcursionGeometry g;
    g.v_fold_minus = lm->v;
    g.v_fold_plus = lp->v;
    g.v_min = project_fold(*lp, p).v;
    g.v_max = project_fold(*lm, p).v;
    return g;
}

IntegrationLimits integration_limits(const ModelParameters& p, Regime regime) {
    const auto q = folded_singularities(p, regime);
    const ExcursionGeometry g = excursion_geometry(slow_coordinate(q[0]), p, regime);
    return {g.v_min, g.v_max, q[0].v, q[1].v};
}

double displacement_integrand(double v, double level, const ModelParameters& p, Regime regime) {
    const SliceTerms t = slice_terms(v, level, p, regime);
    if (std::fabs(t.denominator) < kSingularTol && std::fabs(t.numerator) > kMaxIntegrand * std::fabs(t.denominator))
        fail(ErrorKind::SingularIntegrand, "displacement: integrand denominator vanishes");
    return t.numerator / t.denominator;
}

DisplacementResult displacement(double level, const ModelParameters& p, Regime regime, double tol,
                                InnerEndpoints inner) {
    const ExcursionGeometry g = excursion_geometry(level, p, regime);
    double upper_minus = g.v_fold_minus, lower_plus = g.v_fold_plus;
    if (inner == InnerEndpoints::FoldedSingularities) {
        const auto q = folded_singularities(p, regime);
        upper_minus = q[0].v;
        lower_plus = q[1].v;
    }
    DisplacementResult r;
    r.g_minus = -integrate(g.v_min, upper_minus - kEndpointCut, level, p, regime, tol, r.quadrature_error);
    r.g_plus = integrate(lower_plus + kEndpointCut, g.v_max, level, p, regime, tol, r.quadrature_error);
    r.delta = r.g_minus + r.g_plus;
    return r;
}

double return_map_hat(double level, const ModelParameters& p, Regime regime, double delta_slow) {
    if (delta_slow == 0.0) return level;
    return level + delta_slow * displacement(level, p, regime, 1e-12, InnerEndpoints::SliceFolds).delta;
}

double psi(double level, const ModelParameters& p, double /*delta_slow*/, Regime regime) {
    return displacement(level, p, regime).delta;
}

PsiPartials psi_partials(double level, const ModelParameters& p, Regime regime) {
    PsiPartials out{};
    const double base = psi(level, p, 0.0, regime);

    // Central differences at steps e and 2e, Richardson-combined; when the backward side
    // is infeasible (the slice crosses the one-dimensional manifold) fall back to
    // forward differences with the one-sided Richardson weights.
    auto partial = [&](auto eval, double e, double& step1, bool& one_sided) {
        auto fwd = [&](double s) { return (eval(s) - base) / s; };
        try {
            auto central = [&](double s) { return (eval(s) - eval(-s)) / (2.0 * s); };
            const double d1 = central(e), d2 = central(2.0 * e);
            step1 = d2;
            one_sided = false;
            return (4.0 * d1 - d2) / 3.0;
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::SingularIntegrand) throw;
        }
        const double f1 = fwd(e), f2 = fwd(2.0 * e);
        step1 = f2;
        one_sided = true;
        return 2.0 * f1 - f2;
    };

    out.d_level = partial([&](double s) { return psi(level + s, p, 0.0, regime); }, 1e-5, out.d_level_coarse,
                          out.level_one_sided);
    out.d_Ibar = partial([&](double s) { return psi(level, with_current(p, p.Ibar + s), 0.0, regime); }, 1e-6,
                         out.d_Ibar_coarse, out.Ibar_one_sided);
    return out;
}

double folded_singularity_slope(const ModelParameters& p, Regime regime) {
    const auto q = folded_singularities(p, regime);
    const double v = q[0].v;
    if (regime == Regime::h_slow) {
        const double m = gate_profile(GateKind::m, v, p).inf;
        return 1.0 / ((v - p.E_Na) * m * m * m);
    }
    const double n = q[0].n;
    return 1.0 / (4.0 * n * n * n * p.gbar_K * (v - p.E_K));
}

RelaxationFixedPoint relaxation_fixed_point(const ModelParameters& p, double delta_slow) {
    const auto q = folded_singularities(p, Regime::h_slow);
    const double h0 = q[0].h;
    auto f = [&](double h) { return psi(h, p, delta_slow); };
    const double f0 = f(h0);
    if (!(f0 > 0.0)) fail(ErrorKind::NotFound, "relaxation fixed point: displacement at q- is not positive");
    // Offsets grow geometrically so that a root just above q- is not stepped over.
    double lo = h0, hi = h0;
    bool bracketed = false;
    for (double offset = 1e-9; offset < 0.5; offset *= 1.5) {
        hi = h0 + offset;
        double fh;
        try {
            fh = f(hi);
        } catch (const Error&) {
            break;
        }
        if (fh < 0.0) {
            bracketed = true;
            break;
        }
        lo = hi;
    }
    if (!bracketed) fail(ErrorKind::NotFound, "relaxation fixed point: no sign change above q-");
    const double h_fix = numerics::bisect(f, lo, hi, f(lo), 1e-13);
    // Below q- the slice crosses M_h, so the difference step stays above it.
    const double e = std::min(1e-5, 0.5 * (h_fix - h0));
    const double slope = (f(h_fix + e) - f(h_fix - e)) / (2.0 * e);
    RelaxationFixedPoint out;
    out.level = h_fix;
    out.map_derivative = 1.0 + delta_slow * slope;
    out.stable = out.map_derivative > 0.0 && out.map_derivative < 1.0;
    out.outside_funnel = h_fix > h0;
    return out;
}

std::optional<double> relaxation_window_upper(const ModelParameters& p, double delta_slow, double Ibar_hi,
                                              double Ibar_step) {
    std::optional<double> last;
    for (double I = p.Ibar; I <= Ibar_hi; I += Ibar_step) {
        try {
            const auto fp = relaxation_fixed_point(with_current(p, I), delta_slow);
            if (!fp.stable || !fp.outside_funnel) break;
            last = I;
        } catch (const Error&) {
            break;
        }
    }
    return last;
}

std::string to_string(ThresholdName name) {
    switch (name) {
        case ThresholdName::I_minus: return "I_minus";
        case ThresholdName::I_plus: return "I_plus";
        case ThresholdName::I_p: return "I_p";
        case ThresholdName::I_a: return "I_a";
        case ThresholdName::I_r: return "I_r";
    }
    return "";
}

namespace {

// Largest value of the M_h (or M_n) fold function over the physical part of the curve;
// positive exactly when the curve has its two fold points.
double fold_point_indicator(Regime regime, const ModelParameters& p) {
    const auto [a, b] = analysis_window(p);
    auto f = [&](double v) {
        const ReducedState s = manifold_point(v, regime, p);
        if (!(s.h > 0.0 && s.h < 1.0 && s.n > 0.0 && s.n < 1.0)) return numerics::kNaN;
        return manifold_fold_function(v, regime, p);
    };
    const auto grid = uniform_grid(a, b, 2000);
    std::size_t best = grid.size();
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double val = numerics::guarded(f, grid[i]);
        if (std::isfinite(val) && val > best_val) {
            best_val = val;
            best = i;
        }
    }
    if (best == grid.size()) fail(ErrorKind::NotFound, "one-dimensional critical manifold has no physical points");
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    auto neg = [&](double v) {
        const double val = numerics::guarded(f, v);
        return std::isfinite(val) ? -val : std::numeric_limits<double>::infinity();
    };
    const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, std::numeric_limits<double>::digits);
    return std::max(best_val, -r.second);
}

}  // namespace

double threshold_function(ThresholdName name, Regime regime, double Ibar, const ModelParameters& p0) {
    const ModelParameters p = with_current(p0, Ibar);
    switch (name) {
        case ThresholdName::I_minus:
        case ThresholdName::I_plus: {
            const Equilibrium eq = true_equilibrium(p, regime);
            return critical_residual(eq.point.v, eq.point.h, eq.point.n, p).d_v;
        }
        case ThresholdName::I_a:
            return orbital_relation(p, regime).gap;
        case ThresholdName::I_r: {
            const auto q = folded_singularities(p, regime);
            return displacement(slow_coordinate(q[0]), p, regime, 1e-12).delta;
        }
        case ThresholdName::I_p:
            return fold_point_indicator(regime, p);
    }
    return 0.0;
}

ThresholdReport find_threshold(ThresholdName name, Regime regime, std::pair<double, double> bracket,
                               const ModelParameters& p, double tol) {
    auto f = [&](double I) { return threshold_function(name, regime, I, p); };
    double lo = bracket.first, hi = bracket.second;
    double f_lo = f(lo);
    const double f_hi = f(hi);
    if (!((f_lo < 0.0) != (f_hi < 0.0)))
        fail(ErrorKind::NoSignChange, to_string(name) + ": defining function has no sign change on the bracket");
    while (hi - lo > tol * std::max(std::fabs(lo), std::fabs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((fm < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    ThresholdReport r{name, regime, 0.5 * (lo + hi), hi - lo, 0.0};
    r.residual = std::fabs(f(r.Ibar));
    return r;
}

std::optional<std::pair<double, double>> default_threshold_bracket(ThresholdName name, Regime regime) {
    const bool h = regime == Regime::h_slow;
    switch (name) {
        case ThresholdName::I_minus: return std::make_pair(1.0, 20.0);
        case ThresholdName::I_plus: return std::make_pair(200.0, 400.0);
        case ThresholdName::I_p: return h ? std::make_pair(100.0, 140.0) : std::make_pair(60.0, 100.0);
        case ThresholdName::I_a: return h ? std::make_pair(20.0, 28.0) : std::make_pair(7.0, 14.0);
        case ThresholdName::I_r:
            if (h) return std::make_pair(27.0, 32.0);
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace hhmmo
