#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curverec/curves.hpp"

namespace curverec {

/// Discretization of a parameter region into half-open cells
/// [center - step/2, center + step/2) with centers lo_k + j_k * step_k.
struct CellGrid {
    ParameterRegion region;
    std::vector<int> samples; // J_k per axis

    int dims() const { return static_cast<int>(samples.size()); }
    std::size_t total_cells() const;

    std::vector<double> center(std::span<const int> index) const;
    std::vector<double> halfwidth() const;

    std::size_t flat_index(std::span<const int> index) const;
    std::vector<int> multi_index(std::size_t flat) const;
};

/// Cells are capped at `cell_cap` (GridTooLarge beyond it).
CellGrid build_grid(const ParameterRegion& region, std::size_t cell_cap = 10'000'000);

enum class Crossing { Crosses, NotCrosses, Undetermined };

/// The hypersurface F(lambda) = 0 traced by one data point.
struct ParamSurface {
    int dims = 0;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> grad;
    std::function<void(std::span<const double>, std::span<double>)> hess;
};

/// Certified cell test. NotCrosses when |F(center)| exceeds the first-order
/// bound B1, Crosses when it is below the existence bound B2, Undetermined
/// otherwise (and immediately when the gradient vanishes at the center).
/// Throws NonFiniteEvaluation if any evaluation is NaN/Inf.
Crossing crossing_cell(const ParamSurface& f, std::span<const double> center,
                       std::span<const double> halfwidth);

/// Corner/center sign test for cells the bounds could not decide:
/// crosses iff a sign change or exact zero occurs among the 2^t corners
/// plus the center.
bool resolve_undetermined(const ParamSurface& f, std::span<const double> center,
                          std::span<const double> halfwidth);

struct Accumulator {
    std::vector<int> votes; // flat, row-major over the grid
    std::vector<int> shape;
    std::size_t skipped_evaluations = 0; // non-finite (point, cell) pairs

    int max_vote() const;
};

struct AccumulateOptions {
    int max_spiral_branches = 12;
};

/// Vote grid: votes[j] counts the points whose hypersurface crosses cell j.
/// Polar families get points converted to (rho, atan2 in (-pi, pi]); spirals
/// vote through every branch theta + 2*pi*k but at most once per cell.
Accumulator accumulate(const std::vector<Vec2>& points, const CurveFamily& family,
                       const CellGrid& grid, const AccumulateOptions& opts = {});

struct DetectedCurve {
    CurveFamily family;
    std::vector<double> lambda; // argmax cell center
    int score = 0;
    int runner_up = 0;
    std::vector<int> cell_index;
    std::vector<std::vector<int>> tied_cells; // all argmax cells, lexicographic order
    std::vector<double> step;                 // grid step the cell was found at
    PlaneFrame frame;
    bool has_frame = false;
    std::size_t grid_cells = 0;

    std::string equation() const;
};

struct DetectOptions {
    std::size_t cell_cap = 10'000'000;
    int max_spiral_branches = 12;
};

/// Runs the voting procedure and returns the curve at the accumulator
/// maximum. Ties break to the lexicographically smallest multi-index; all
/// tied cells are reported. Throws NoVotes when the accumulator is all zero.
DetectedCurve detect_curve(const PlanarSet& z, const CurveFamily& family,
                           const ParameterRegion& region, const DetectOptions& opts = {});

/// Runs detect_curve per candidate and ranks by max vote, ties by fewer
/// parameters then name. Candidates that fail are dropped; throws AllFailed
/// if none survive.
std::vector<DetectedCurve> compete_families(
    const PlanarSet& z,
    const std::vector<std::pair<CurveFamily, ParameterRegion>>& candidates);

/// Samples the detected curve's zero set (polar sweep or marching squares)
/// and lifts it through the plane frame. Throws EmptyLocus.
std::vector<Vec3> lift_to_3d(const DetectedCurve& curve, int samples = 512);

/// 2D locus samples without the lift; polyline order is not guaranteed for
/// marching-squares output.
std::vector<Vec2> trace_locus(const CurveFamily& family, std::span<const double> lambda,
                              int samples);

/// Debug dump, one "j1,...,jt,votes" row per cell.
void dump_accumulator_csv(const Accumulator& acc, const std::string& path);

} // namespace curverec
