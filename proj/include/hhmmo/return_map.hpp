#pragma once

#include "hhmmo/geometry.hpp"

#include <optional>
#include <string>

namespace hhmmo {

struct IntegrationLimits {
    double v_min, v_max, v_q_minus, v_q_plus;
};

struct DisplacementResult {
    double g_minus = 0.0;
    double g_plus = 0.0;
    double delta = 0.0;
    double quadrature_error = 0.0;
};

// Which points close the two integrals on the fold side.
enum class InnerEndpoints {
    FoldedSingularities,  // v of q- and q+ at the current current (the displacement function)
    SliceFolds,           // folds of the slice at the integrated level (one excursion at that level)
};

struct ExcursionGeometry {
    double v_min;        // landing on S_a- of the L+ point at the level
    double v_max;        // landing on S_a+ of the L- point at the level
    double v_fold_minus; // L- point at the level
    double v_fold_plus;  // L+ point at the level
};

ExcursionGeometry excursion_geometry(double level, const ModelParameters& p, Regime regime);
IntegrationLimits integration_limits(const ModelParameters& p, Regime regime);

// Integrand of the two displacement integrals along the slice at the given level,
// i.e. d(slow)/dv divided by -delta_slow; throws SingularIntegrand on a vanishing denominator.
double displacement_integrand(double v, double level, const ModelParameters& p, Regime regime);

DisplacementResult displacement(double level, const ModelParameters& p, Regime regime, double tol = 1e-10,
                                InnerEndpoints inner = InnerEndpoints::FoldedSingularities);

double return_map_hat(double level, const ModelParameters& p, Regime regime, double delta_slow);

double psi(double level, const ModelParameters& p, double delta_slow, Regime regime = Regime::h_slow);

struct PsiPartials {
    double d_level;
    double d_Ibar;
    double d_level_coarse;  // one-sided or central estimate at the larger step, for consistency checks
    double d_Ibar_coarse;
    bool level_one_sided;
    bool Ibar_one_sided;
};
PsiPartials psi_partials(double level, const ModelParameters& p, Regime regime = Regime::h_slow);

// d(slow coordinate of q-)/d Ibar at fixed v of q-, i.e. the slope of eta (or nu) in Ibar.
double folded_singularity_slope(const ModelParameters& p, Regime regime = Regime::h_slow);

struct RelaxationFixedPoint {
    double level;
    double map_derivative;
    bool stable;
    bool outside_funnel;
};
RelaxationFixedPoint relaxation_fixed_point(const ModelParameters& p, double delta_slow);
// Largest Ibar in [I_r, Ibar_hi] (scanned at Ibar_step) for which the fixed point persists
// with a contracting derivative.
std::optional<double> relaxation_window_upper(const ModelParameters& p, double delta_slow, double Ibar_hi,
                                              double Ibar_step);

enum class ThresholdName { I_minus, I_plus, I_p, I_a, I_r };
std::string to_string(ThresholdName name);

struct ThresholdReport {
    ThresholdName name;
    Regime regime;
    double Ibar;
    double bracket_width;
    double residual;
};

// Scalar function whose sign change defines the threshold.
double threshold_function(ThresholdName name, Regime regime, double Ibar, const ModelParameters& p);
ThresholdReport find_threshold(ThresholdName name, Regime regime, std::pair<double, double> bracket,
                               const ModelParameters& p, double tol = 1e-10);
// Physical-current bracket (uA/cm^2) used by the CLI for each threshold; nullopt where the
// threshold does not exist in that regime.
std::optional<std::pair<double, double>> default_threshold_bracket(ThresholdName name, Regime regime);

}  // namespace hhmmo
