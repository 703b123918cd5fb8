#pragma once

#include "hhmmo/geometry.hpp"

#include <array>
#include <complex>
#include <optional>
#include <vector>

namespace hhmmo {

enum class StabilityKind { FocalAttracting, NodalAttracting, FocalRepelling, NodalRepelling };
std::string to_string(StabilityKind k);

struct PartialJacobian {
    std::array<std::array<double, 2>, 2> a;  // rows (U, eps X) / columns (v, fast gate)
    double trace, det, discriminant;
    std::array<std::complex<double>, 2> eigenvalues;
};

// Jacobian of the partially perturbed reduced system (delta of the slow gate set to zero)
// at a point of M_h (h_slow) or M_n (n_slow).
PartialJacobian jacobian_partial(const ReducedState& point, double epsilon_mid, const ModelParameters& p,
                                 Regime regime);
PartialJacobian jacobian_partial_at(double v, double epsilon_mid, const ModelParameters& p, Regime regime);

// Saddles (det < 0) are reported as NodalRepelling.
StabilityKind classify_jacobian(const PartialJacobian& j);

struct StabilitySegment {
    std::pair<double, double> v_interval;
    StabilityKind kind;
    std::optional<double> hopf_v;
    std::optional<double> degenerate_v;
};

std::vector<StabilitySegment> stability_segments(const ModelParameters& p, double epsilon_mid, Regime regime,
                                                 const std::vector<double>& v_grid);

// Trace roots with positive determinant, and discriminant roots on the attracting side.
std::vector<double> hopf_points(const ModelParameters& p, double epsilon_mid, Regime regime,
                                const std::vector<double>& v_grid);
std::vector<double> degenerate_nodes(const ModelParameters& p, double epsilon_mid, Regime regime,
                                     const std::vector<double>& v_grid);

}  // namespace hhmmo
