#include "hhmmo/dynamics.hpp"

#include "hhmmo/errors.hpp"
#include "hhmmo/reduction.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace hhmmo {

namespace odeint = boost::numeric::odeint;

std::string to_string(SystemKind s) { return s == SystemKind::full4d ? "full4d" : "reduced3d"; }

std::string to_string(PatternClass c) {
    switch (c) {
        case PatternClass::Steady: return "Steady";
        case PatternClass::DoubleEpoch: return "DoubleEpoch";
        case PatternClass::TransitionalMMO: return "TransitionalMMO";
        case PatternClass::SingleEpoch: return "SingleEpoch";
        case PatternClass::Relaxation: return "Relaxation";
        case PatternClass::Unclassifiable: return "Unclassifiable";
    }
    return "";
}

ModelParameters regime_defaults(Regime regime) {
    ModelParameters p = ModelParameters::defaults();
    if (regime == Regime::n_slow) {
        p.delta_h = 1.0;
        p.delta_n = 0.01;
    }
    return p;
}

namespace {

bool in_domain(const FullState& s, const ModelParameters& p, bool check_m) {
    constexpr double pad = 0.1;
    auto gate_ok = [](double x) { return x > -pad && x < 1.0 + pad; };
    return std::isfinite(s.v) && s.v > p.E_K - pad && s.v < p.E_Na + pad && (!check_m || gate_ok(s.m)) &&
           gate_ok(s.h) && gate_ok(s.n);
}

double mu_or_nan(double v, double h, double n, const ModelParameters& p) {
    try {
        return mu(v, h, n, p).value;
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

template <std::size_t N, class Rhs, class ToFull>
Trajectory run_dopri(const std::array<double, N>& x0, double duration, double rel_tol, double abs_tol,
                     double max_step, Rhs rhs, ToFull to_full, Trajectory traj) {
    using State = std::array<double, N>;
    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
    State x = x0;
    double t = 0.0;
    double dt = std::min(1e-3, duration);
    traj.meta.method = "runge_kutta_dopri5 (controlled)";
    traj.meta.rel_tol = rel_tol;
    traj.meta.abs_tol = abs_tol;
    traj.meta.min_step = std::numeric_limits<double>::infinity();
    traj.times.push_back(0.0);
    traj.states.push_back(to_full(x));
    while (t < duration) {
        const bool last = dt >= duration - t;
        if (last) dt = duration - t;
        const double t_before = t;
        const State x_before = x;
        odeint::controlled_step_result res;
        try {
            res = stepper.try_step(rhs, x, t, dt);
        } catch (const Error& e) {
            fail(ErrorKind::LeftDomain, std::string("vector field undefined: ") + e.what());
        }
        const bool finite = std::all_of(x.begin(), x.end(), [](double c) { return std::isfinite(c); });
        if (res == odeint::success && !finite) {
            // A NaN error estimate passes the controller; treat it as a rejection.
            dt = 0.2 * (t - t_before);
            x = x_before;
            t = t_before;
            res = odeint::fail;
        }
        if (res == odeint::success) {
            const double taken = t - t_before;
            ++traj.meta.accepted;
            traj.meta.min_step = std::min(traj.meta.min_step, taken);
            traj.meta.max_step = std::max(traj.meta.max_step, taken);
            if (last) t = duration;
            const FullState s = to_full(x);
            if (!in_domain(s, traj.params, N == 4)) fail(ErrorKind::LeftDomain, "state left the analysis domain");
            traj.times.push_back(t);
            traj.states.push_back(s);
            dt = std::min(dt, max_step);
        } else {
            ++traj.meta.rejected;
        }
        if (t < duration && dt < 1e-14) fail(ErrorKind::StepUnderflow, "step size fell below 1e-14");
    }
    if (traj.meta.accepted == 0) traj.meta.min_step = 0.0;
    return traj;
}

}  // namespace

Trajectory integrate(SystemKind system, const FullState& initial, double duration, double rel_tol, double abs_tol,
                     const ModelParameters& p) {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) fail(ErrorKind::ConfigError, "tolerances must be positive");
    if (!(duration >= 0.0)) fail(ErrorKind::ConfigError, "duration must be non-negative");
    if (!in_domain(initial, p, system == SystemKind::full4d))
        fail(ErrorKind::LeftDomain, "initial state outside the analysis domain");
    Trajectory traj;
    traj.system = system;
    traj.params = p;
    if (system == SystemKind::full4d) {
        auto rhs = [&p](const std::array<double, 4>& x, std::array<double, 4>& dx, double) {
            const FullState d = full_vector_field({x[0], x[1], x[2], x[3]}, p);
            dx = {d.v, d.m, d.h, d.n};
        };
        auto to_full = [](const std::array<double, 4>& x) { return FullState{x[0], x[1], x[2], x[3]}; };
        return run_dopri<4>({initial.v, initial.m, initial.h, initial.n}, duration, rel_tol, abs_tol, 50.0, rhs,
                            to_full, std::move(traj));
    }
    auto rhs = [&p](const std::array<double, 3>& x, std::array<double, 3>& dx, double) {
        const ReducedState d = reduced_vector_field({x[0], x[1], x[2]}, p);
        dx = {d.v, d.h, d.n};
    };
    auto to_full = [&p](const std::array<double, 3>& x) {
        return FullState{x[0], mu_or_nan(x[0], x[1], x[2], p), x[1], x[2]};
    };
    Trajectory out = run_dopri<3>({initial.v, initial.h, initial.n}, duration, rel_tol, abs_tol, 50.0 * p.gamma, rhs,
                                  to_full, std::move(traj));
    out.states.front().m = initial.m;
    return out;
}

FullState default_initial_state(const ModelParameters& p, Regime regime) {
    const Equilibrium eq = true_equilibrium(p, regime);
    const double v = eq.point.v + 0.05;
    double h = eq.point.h, n = eq.point.n;
    try {
        n = nu(v, h, p).value;
    } catch (const Error&) {
        h = eta(v, n, p).value;
    }
    return {v, gate_profile(GateKind::m, v, p).inf, h, n};
}

double potential_rate(const Trajectory& traj, std::size_t i) {
    const FullState& s = traj.states[i];
    if (traj.system == SystemKind::full4d) return rhs_V(s.v, s.m, s.h, s.n, traj.params);
    return reduced_vector_field({s.v, s.h, s.n}, traj.params).v;
}

EventList extract_events(const std::vector<double>& t, const std::vector<double>& v,
                         const std::vector<double>& speed, double v_split, double amplitude_threshold,
                         const ClassifierSettings& settings) {
    const std::size_t n = t.size();
    if (n < 3) fail(ErrorKind::TooShort, "trajectory has fewer than three samples");
    EventList ev;
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double vmin = *lo_it, vmax = *hi_it;
    if (vmax - vmin < 1e-12) return ev;

    // Schmitt trigger around the middle of the range; hysteresis = amplitude threshold.
    const double centre = 0.5 * (vmin + vmax);
    const double low = centre - 0.5 * amplitude_threshold, high = centre + 0.5 * amplitude_threshold;
    std::vector<std::size_t> up_idx, down_idx;
    // (|v'|, time weight) pairs; weighting by time keeps the median independent of sampling.
    std::vector<std::pair<double, double>> upstroke_speeds;
    bool is_high = v[0] > centre;
    std::size_t last_low = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_high) {
            if (v[i] < low) last_low = i;
            if (v[i] > high) {
                is_high = true;
                if (v[last_low] < low) {
                    up_idx.push_back(i);
                    for (std::size_t k = last_low + 1; k <= i; ++k) {
                        const double w = 0.5 * (t[std::min(k + 1, n - 1)] - t[k - 1]);
                        upstroke_speeds.emplace_back(std::fabs(speed[k]), w);
                    }
                }
            }
        } else if (v[i] < low) {
            is_high = false;
            last_low = i;
            if (!up_idx.empty() && (down_idx.size() < up_idx.size())) down_idx.push_back(i);
        }
    }
    for (std::size_t k = 0; k + 1 < up_idx.size() && k < down_idx.size(); ++k) {
        const std::size_t a = up_idx[k], b = up_idx[k + 1];
        const auto [mn, mx] = std::minmax_element(v.begin() + a, v.begin() + b);
        ev.laos.push_back({t[a], t[down_idx[k]], t[b], *mx, *mn});
    }

    double threshold = std::numeric_limits<double>::infinity();
    double min_len = 0.0;
    if (!upstroke_speeds.empty()) {
        std::sort(upstroke_speeds.begin(), upstroke_speeds.end());
        double total = 0.0;
        for (const auto& [sp, w] : upstroke_speeds) total += w;
        double acc = 0.0, median = upstroke_speeds.back().first;
        for (const auto& [sp, w] : upstroke_speeds) {
            acc += w;
            if (acc >= 0.5 * total) {
                median = sp;
                break;
            }
        }
        threshold = settings.slow_rate_fraction * median;
    }
    if (!ev.laos.empty()) {
        const double mean_cycle = (ev.laos.back().t_next - ev.laos.front().t_up) / ev.laos.size();
        min_len = settings.epoch_min_fraction * mean_cycle;
    }
    ev.slow_rate_threshold = threshold;

    std::size_t i = 0;
    while (i < n) {
        if (!(std::fabs(speed[i]) < threshold)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && std::fabs(speed[j + 1]) < threshold) ++j;
        if (t[j] - t[i] >= min_len && j > i) {
            double sum = 0.0;
            int saos = 0;
            for (std::size_t k = i; k <= j; ++k) {
                sum += v[k];
                if (k > i && k < j && v[k] > v[k - 1] && v[k] >= v[k + 1]) ++saos;
            }
            const double mean_v = sum / static_cast<double>(j - i + 1);
            ev.epochs.push_back({t[i], t[j], mean_v, mean_v > v_split, saos});
        }
        i = j + 1;
    }
    return ev;
}

EventList extract_events(const Trajectory& traj, double v_split, double amplitude_threshold,
                         const ClassifierSettings& settings) {
    std::vector<double> v(traj.states.size()), speed(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        v[i] = traj.states[i].v;
        speed[i] = potential_rate(traj, i);
    }
    return extract_events(traj.times, v, speed, v_split, amplitude_threshold, settings);
}

namespace {

double default_v_split(const ModelParameters& p, double fallback) {
    const Regime regime = p.delta_n < p.delta_h ? Regime::n_slow : Regime::h_slow;
    try {
        const auto q = folded_singularities(p, regime);
        return 0.5 * (q[0].v + q[1].v);
    } catch (const Error&) {
        return fallback;
    }
}

}  // namespace

PatternReport classify_pattern(const Trajectory& traj, const ClassifierSettings& settings) {
    if (traj.times.size() < 3) fail(ErrorKind::TooShort, "trajectory has fewer than three samples");
    const double t_cut = traj.times.back() * settings.transient_fraction;
    std::size_t first = 0;
    while (first < traj.times.size() && traj.times[first] < t_cut) ++first;
    std::vector<double> t, v, speed;
    for (std::size_t i = first; i < traj.times.size(); ++i) {
        t.push_back(traj.times[i]);
        v.push_back(traj.states[i].v);
        speed.push_back(potential_rate(traj, i));
    }
    if (t.size() < 3) fail(ErrorKind::TooShort, "post-transient part has fewer than three samples");
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double range = *hi_it - *lo_it;

    PatternReport rep;
    rep.v_split = settings.v_split ? *settings.v_split : default_v_split(traj.params, 0.5 * (*lo_it + *hi_it));
    if (range < settings.steady_range) {
        rep.pattern = PatternClass::Steady;
        return rep;
    }
    const EventList ev = extract_events(t, v, speed, rep.v_split, settings.amplitude_fraction * range, settings);
    rep.cycles = static_cast<int>(ev.laos.size());
    if (rep.cycles < settings.min_periods) fail(ErrorKind::TooShort, "fewer than the minimum number of cycles");

    int above = 0, below = 0, spikes = 0;
    for (const Lao& c : ev.laos) {
        int a = 0;
        for (const Epoch& e : ev.epochs) {
            if (e.t_start >= c.t_next || e.t_end < c.t_up) continue;
            if (e.t_start < c.t_up) continue;  // counted with the previous cycle
            if (e.above) {
                ++a;
            } else {
                ++below;
            }
            rep.sao_counts.push_back(e.sao_count);
        }
        above += a;
        if (a == 0) ++spikes;
    }
    const double cycles = rep.cycles;
    rep.epochs_above = above / cycles;
    rep.epochs_below = below / cycles;
    rep.lao_count = spikes / cycles;
    rep.period_estimate = (ev.laos.back().t_next - ev.laos.front().t_up) / cycles;

    if (above > 0 && below > 0) {
        rep.pattern = spikes == 0 ? PatternClass::DoubleEpoch : PatternClass::TransitionalMMO;
    } else if (above == 0 && below > 0) {
        rep.pattern = PatternClass::SingleEpoch;
    } else if (above == 0 && below == 0) {
        rep.pattern = PatternClass::Relaxation;
    } else {
        fail(ErrorKind::Unclassifiable, "slow epochs above without epochs below");
    }
    return rep;
}

ClassifiedRun simulate_and_classify(const ModelParameters& p, Regime regime, const SimulationSettings& s) {
    const FullState x0 = default_initial_state(p, regime);
    const double time_scale = s.system == SystemKind::full4d ? 1.0 : p.gamma;
    for (double duration = s.initial_duration;; duration *= 2.0) {
        Trajectory traj = integrate(s.system, x0, duration * time_scale, s.rel_tol, s.abs_tol, p);
        try {
            PatternReport rep = classify_pattern(traj, s.classifier);
            return {std::move(rep), std::move(traj)};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TooShort || duration * 2.0 > s.max_duration) throw;
        }
    }
}

PatternClass classify_current(double I_physical, const ModelParameters& p0, Regime regime,
                              const SimulationSettings& s) {
    ModelParameters p = p0;
    p.Ibar = rescale_current(I_physical, p);
    try {
        return simulate_and_classify(p, regime, s).report.pattern;
    } catch (const Error&) {
        return PatternClass::Unclassifiable;
    }
}

namespace {

template <class Job>
void run_pool(std::size_t jobs, int workers, Job job) {
    const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(jobs, std::max(1, workers)));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) job(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < w; ++k) pool.emplace_back(loop);
    loop();
    for (auto& th : pool) th.join();
}

}  // namespace

SweepResult sweep_current(double I_min, double I_max, Regime regime, const ModelParameters& p, int n_points,
                          double resolution, int workers, const SimulationSettings& s) {
    SweepResult out;
    out.points.resize(n_points);
    run_pool(n_points, workers, [&](std::size_t i) {
        const double I = n_points == 1 ? I_min : I_min + (I_max - I_min) * i / (n_points - 1);
        out.points[i] = {I, classify_current(I, p, regime, s)};
    });
    for (int i = 1; i < n_points; ++i) {
        if (out.points[i].pattern != out.points[i - 1].pattern)
            out.boundaries.push_back({out.points[i - 1].I, out.points[i].I, out.points[i - 1].pattern,
                                      out.points[i].pattern});
    }
    run_pool(out.boundaries.size(), workers, [&](std::size_t k) {
        SweepBoundary& b = out.boundaries[k];
        while (b.I_high - b.I_low > resolution) {
            const double mid = 0.5 * (b.I_low + b.I_high);
            const PatternClass c = classify_current(mid, p, regime, s);
            if (c == b.below) {
                b.I_low = mid;
            } else {
                b.I_high = mid;
                b.above = c;
            }
        }
    });
    return out;
}

}  // namespace hhmmo
