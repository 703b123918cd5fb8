#pragma once

#include "hhmmo/model_core.hpp"
#include "hhmmo/reduction.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hhmmo {

enum class Regime { h_slow, n_slow };
enum class SheetLabel { S_a_minus, S_r, S_a_plus };
enum class FoldCurve { L_minus, L_plus };
enum class Branch { minus, plus };
enum class OrbitalRelationKind { Connected, Aligned, Remote };
enum class SegmentKind { fast, intermediate, slow };

std::string to_string(Regime r);
std::string to_string(SheetLabel s);
std::string to_string(FoldCurve c);
std::string to_string(OrbitalRelationKind k);
std::string to_string(SegmentKind k);

struct SheetClassification {
    SheetLabel label;
    bool boundary = false;  // on a fold, where d_v W vanishes
    bool attracting() const { return label != SheetLabel::S_r; }
};

struct FoldPoint {
    double v, h, n;
    FoldCurve curve;
};

struct FoldedSingularity {
    double v, h, n;
    Branch branch;
    Regime regime;
};

struct OrbitalRelation {
    OrbitalRelationKind kind;
    double gap;
};

struct CycleSegment {
    SegmentKind kind;
    ReducedState start, end;
};

struct SingularCycle {
    std::vector<CycleSegment> segments;
    OrbitalRelation relation;
};

struct Equilibrium {
    ReducedState point;
    std::string branch;  // H-, Hr, H+ (or N-, Nr, N+); H / N when the curve has no folds
    SheetClassification sheet;
};

struct FoldCurves {
    std::vector<FoldPoint> points;  // increasing v
    std::optional<FoldPoint> connection;
};

// Nernst window shrunk by 1e-3 on each side.
std::pair<double, double> analysis_window(const ModelParameters& p);
std::vector<double> uniform_grid(double a, double b, int points);

double slow_coordinate(const ReducedState& s, Regime regime);
double slow_coordinate(const FoldedSingularity& q);

SheetClassification sheet_of(double v, double h, double n, const ModelParameters& p);

// Exact fold point at fixed v: {W = 0, d_v W = 0} is linear in (h, n^4).
std::optional<FoldPoint> fold_at_v(double v, const ModelParameters& p);
// Damped Newton continuation along v_grid.
FoldCurves fold_curves(const ModelParameters& p, const std::vector<double>& v_grid);
// v-range over which the fold curve is physical (0 < h, n < 1).
std::optional<std::pair<double, double>> fold_curve_range(const ModelParameters& p);
// Points of L- and L+ at a given slow-variable level (h for h_slow, n for n_slow).
std::vector<FoldPoint> slice_folds(double level, Regime regime, const ModelParameters& p);
double tangential_connection_v(const ModelParameters& p);

std::vector<ReducedState> manifold_Mh(const ModelParameters& p, const std::vector<double>& v_grid);
std::vector<ReducedState> manifold_Mn(const ModelParameters& p, const std::vector<double>& v_grid);
ReducedState manifold_point(double v, Regime regime, const ModelParameters& p);

// d/dv of W along the one-dimensional critical manifold, slow variable held fixed.
double manifold_fold_function(double v, Regime regime, const ModelParameters& p);
std::vector<FoldPoint> fold_points(Regime regime, const ModelParameters& p);
std::vector<FoldPoint> fold_points_Mh(const ModelParameters& p);
std::vector<FoldPoint> fold_points_Mn(const ModelParameters& p);

std::array<FoldedSingularity, 2> folded_singularities(const ModelParameters& p, Regime regime);
OrbitalRelation orbital_relation(const ModelParameters& p, Regime regime);
OrbitalRelation classify_gap(double gap);

Equilibrium true_equilibrium(const ModelParameters& p, Regime regime);

ReducedState project_fold(const FoldPoint& fold, const ModelParameters& p);

// Follows the frozen-slow-variable intermediate fibre from start until it meets the
// one-dimensional manifold (returns that point) or a fold (returns the fold point).
struct FibreEnd {
    ReducedState point;
    bool reached_fold;
};
FibreEnd follow_intermediate_fibre(const ReducedState& start, Regime regime, const ModelParameters& p);

SingularCycle singular_cycle(const ModelParameters& p, Regime regime);

}  // namespace hhmmo
