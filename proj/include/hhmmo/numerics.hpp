#pragma once

#include "hhmmo/errors.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace hhmmo::numerics {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Evaluates f, mapping library errors (points outside the graph's domain) to NaN.
template <class F>
double guarded(F&& f, double x) {
    try {
        return f(x);
    } catch (const Error&) {
        return kNaN;
    }
}

// Bisection on [lo, hi] with f(lo), f(hi) of opposite sign; stops at abs_tol or when
// the midpoint no longer separates the endpoints.
template <class F>
double bisect(F&& f, double lo, double hi, double f_lo, double abs_tol = 0.0, int max_iter = 200) {
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= abs_tol) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// All sign changes of f on a uniform grid over [a, b], refined by bisection.
// Cells with a non-finite endpoint are skipped.
template <class F>
std::vector<double> grid_roots(F&& f, double a, double b, int points, double abs_tol = 0.0) {
    std::vector<double> roots;
    const double dx = (b - a) / (points - 1);
    double x0 = a, f0 = guarded(f, a);
    for (int i = 1; i < points; ++i) {
        const double x1 = a + i * dx;
        const double f1 = guarded(f, x1);
        if (std::isfinite(f0) && std::isfinite(f1)) {
            if (f0 == 0.0) {
                roots.push_back(x0);
            } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
                roots.push_back(bisect([&](double x) { return guarded(f, x); }, x0, x1, f0, abs_tol));
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if (std::isfinite(f0) && f0 == 0.0) roots.push_back(x0);
    return roots;
}

}  // namespace hhmmo::numerics
