#pragma once

#include "hhmmo/geometry.hpp"
#include "hhmmo/model_core.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hhmmo {

enum class SystemKind { full4d, reduced3d };
enum class PatternClass { Steady, DoubleEpoch, TransitionalMMO, SingleEpoch, Relaxation, Unclassifiable };

std::string to_string(SystemKind s);
std::string to_string(PatternClass c);

// Parameter set of the two slow-variable regimes: (delta_h, delta_n) = (0.025, 1) or (1, 0.01).
ModelParameters regime_defaults(Regime regime);

struct IntegratorStats {
    std::string method;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double min_step = 0.0;
    double max_step = 0.0;
};

// Times are on the system's own fast time: sigma for full4d, gamma*sigma for reduced3d.
// Reduced states carry m = mu(v,h,n).
struct Trajectory {
    SystemKind system = SystemKind::full4d;
    std::vector<double> times;
    std::vector<FullState> states;
    IntegratorStats meta;
    ModelParameters params;
};

Trajectory integrate(SystemKind system, const FullState& initial, double duration, double rel_tol, double abs_tol,
                     const ModelParameters& p);

// Equilibrium shifted by +0.05 in v and put back on the critical manifold (n from nu at
// the equilibrium's h), with m = m_inf(v).
FullState default_initial_state(const ModelParameters& p, Regime regime);

// Instantaneous dv/dt of the trajectory's own system at a stored state.
double potential_rate(const Trajectory& traj, std::size_t i);

struct ClassifierSettings {
    double amplitude_fraction = 0.5;    // Schmitt hysteresis as a fraction of the v-range
    double slow_rate_fraction = 0.1;    // slow threshold relative to median upstroke |v'|
    double epoch_min_fraction = 0.02;   // minimum slow-run length relative to the mean cycle
    double transient_fraction = 0.3;
    int min_periods = 3;
    double steady_range = 1e-3;         // v-range below which the tail counts as steady
    std::optional<double> v_split;      // default: midpoint of the folded singularities' v
};

struct Lao {
    double t_up, t_down, t_next;  // upstroke, downstroke, next upstroke
    double peak, trough;
};

struct Epoch {
    double t_start, t_end;
    double mean_v;
    bool above;
    int sao_count;
};

struct EventList {
    std::vector<Lao> laos;
    std::vector<Epoch> epochs;
    double slow_rate_threshold = 0.0;
};

EventList extract_events(const Trajectory& traj, double v_split, double amplitude_threshold,
                         const ClassifierSettings& settings = {});
// Same, on a bare sampled signal with its |v'|; used for synthetic checks.
EventList extract_events(const std::vector<double>& t, const std::vector<double>& v,
                         const std::vector<double>& speed, double v_split, double amplitude_threshold,
                         const ClassifierSettings& settings = {});

struct PatternReport {
    PatternClass pattern = PatternClass::Unclassifiable;
    double epochs_above = 0.0;  // per cycle
    double epochs_below = 0.0;
    double lao_count = 0.0;     // LAOs without a slow epoch above, per cycle
    std::vector<int> sao_counts;
    double period_estimate = 0.0;
    int cycles = 0;
    double v_split = 0.0;
};

PatternReport classify_pattern(const Trajectory& traj, const ClassifierSettings& settings = {});

struct SimulationSettings {
    SystemKind system = SystemKind::full4d;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_duration = 2e5;  // sigma
    double max_duration = 3.2e6;
    ClassifierSettings classifier;
};

struct ClassifiedRun {
    PatternReport report;
    Trajectory trajectory;
};

// Integrates from the default initial state, doubling the duration until the classifier
// sees enough cycles.
ClassifiedRun simulate_and_classify(const ModelParameters& p, Regime regime, const SimulationSettings& s);
PatternClass classify_current(double I_physical, const ModelParameters& p, Regime regime, const SimulationSettings& s);

struct SweepPoint {
    double I;
    PatternClass pattern;
};

struct SweepBoundary {
    double I_low, I_high;  // bracket after refinement
    PatternClass below, above;
    double estimate() const { return 0.5 * (I_low + I_high); }
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<SweepBoundary> boundaries;
};

SweepResult sweep_current(double I_min, double I_max, Regime regime, const ModelParameters& p, int n_points,
                          double resolution, int workers, const SimulationSettings& s);

}  // namespace hhmmo
