#include "curverec/hough.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>

#include "parallel.hpp"

namespace curverec {

namespace {

using std::numbers::pi;

constexpr double kInf = std::numeric_limits<double>::infinity();

int ceil_to_natural(double x) {
    // smallest non-negative integer >= x
    double c = std::ceil(x);
    return c < 0.0 ? 0 : static_cast<int>(c);
}

void ensure_finite(double v, const char* what) {
    if (!std::isfinite(v)) raise(Errc::nonfinite_evaluation, std::string(what) + " is not finite");
}

double norm1_of_transpose(std::span<const double> g) { // column vector: sum of |entries|
    double s = 0;
    for (double v : g) s += std::abs(v);
    return s;
}

double norm1_of_row(std::span<const double> g) { // 1 x t matrix: max |entry|
    double m = 0;
    for (double v : g) m = std::max(m, std::abs(v));
    return m;
}

double norm_inf_matrix(std::span<const double> h, int t) { // max row abs sum
    double m = 0;
    for (int r = 0; r < t; ++r) {
        double s = 0;
        for (int c = 0; c < t; ++c) s += std::abs(h[static_cast<std::size_t>(r * t + c)]);
        m = std::max(m, s);
    }
    return m;
}

// ||g_dagger||_inf for the pseudo-inverse g^T/||g||^2 of a 1 x t row
double norm_inf_pinv(std::span<const double> g) {
    double n2 = 0, mx = 0;
    for (double v : g) {
        n2 += v * v;
        mx = std::max(mx, std::abs(v));
    }
    return n2 > 0 ? mx / n2 : kInf;
}

/// Calls fn with the cell center and each of the 2^t corners.
template <class Fn>
void for_center_and_corners(std::span<const double> center, std::span<const double> halfwidth,
                            Fn&& fn) {
    const int t = static_cast<int>(center.size());
    std::vector<double> pt(center.begin(), center.end());
    fn(std::span<const double>(pt));
    for (unsigned mask = 0; mask < (1u << t); ++mask) {
        for (int k = 0; k < t; ++k)
            pt[static_cast<std::size_t>(k)] =
                center[static_cast<std::size_t>(k)] +
                ((mask >> k) & 1u ? halfwidth[static_cast<std::size_t>(k)]
                                  : -halfwidth[static_cast<std::size_t>(k)]);
        fn(std::span<const double>(pt));
    }
}

} // namespace

std::size_t CellGrid::total_cells() const {
    std::size_t n = 1;
    for (int j : samples) n *= static_cast<std::size_t>(j);
    return n;
}

std::vector<double> CellGrid::center(std::span<const int> index) const {
    std::vector<double> c(index.size());
    for (std::size_t k = 0; k < index.size(); ++k)
        c[k] = region.lo[k] + index[k] * region.step[k];
    return c;
}

std::vector<double> CellGrid::halfwidth() const {
    std::vector<double> h(region.step.size());
    for (std::size_t k = 0; k < h.size(); ++k) h[k] = region.step[k] / 2.0;
    return h;
}

std::size_t CellGrid::flat_index(std::span<const int> index) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < index.size(); ++k)
        flat = flat * static_cast<std::size_t>(samples[k]) + static_cast<std::size_t>(index[k]);
    return flat;
}

std::vector<int> CellGrid::multi_index(std::size_t flat) const {
    std::vector<int> idx(samples.size());
    for (std::size_t k = samples.size(); k-- > 0;) {
        idx[k] = static_cast<int>(flat % static_cast<std::size_t>(samples[k]));
        flat /= static_cast<std::size_t>(samples[k]);
    }
    return idx;
}

CellGrid build_grid(const ParameterRegion& region, std::size_t cell_cap) {
    region.validate();
    CellGrid grid;
    grid.region = region;
    grid.samples.resize(region.lo.size());
    std::size_t cells = 1;
    for (std::size_t k = 0; k < region.lo.size(); ++k) {
        double span = region.hi[k] - region.lo[k] - region.step[k] / 2.0;
        grid.samples[k] = ceil_to_natural(span / region.step[k]) + 1;
        cells *= static_cast<std::size_t>(grid.samples[k]);
        if (cells > cell_cap)
            raise(Errc::grid_too_large,
                  "grid would exceed " + std::to_string(cell_cap) + " cells");
    }
    return grid;
}

Crossing crossing_cell(const ParamSurface& f, std::span<const double> center,
                       std::span<const double> halfwidth) {
    const int t = f.dims;
    const double eps = *std::max_element(halfwidth.begin(), halfwidth.end());

    double f0 = f.value(center);
    ensure_finite(f0, "residual");

    std::vector<double> g0(static_cast<std::size_t>(t));
    f.grad(center, g0);
    for (double v : g0) ensure_finite(v, "gradient");
    if (norm1_of_row(g0) == 0.0) return Crossing::Undetermined;

    // sup norms over the cell, approximated at the center and the corners
    double H = 0.0, Jinv = 0.0;
    std::vector<double> work_g(static_cast<std::size_t>(t));
    std::vector<double> work_h(static_cast<std::size_t>(t) * static_cast<std::size_t>(t));
    for_center_and_corners(center, halfwidth, [&](std::span<const double> pt) {
        f.hess(pt, work_h);
        for (double v : work_h) ensure_finite(v, "hessian");
        H = std::max(H, norm_inf_matrix(work_h, t));
        f.grad(pt, work_g);
        for (double v : work_g) ensure_finite(v, "gradient");
        Jinv = std::max(Jinv, norm_inf_pinv(work_g));
    });

    const double b1 = norm1_of_transpose(g0) * eps + 0.5 * t * H * eps * eps;
    if (std::abs(f0) > b1) return Crossing::NotCrosses;

    const double c = std::max(2.0, std::sqrt(static_cast<double>(t)));
    double b2;
    if (Jinv == kInf) {
        b2 = 0.0;
    } else if (H == 0.0) {
        b2 = 2.0 * eps / (Jinv * c); // R -> eps limit for families linear in lambda
    } else {
        const double R = 0.9 * std::min(eps, norm1_of_row(g0) / H);
        b2 = 2.0 * R / (Jinv * (c + std::pow(t, 2.5) * H * Jinv * R));
    }
    if (std::abs(f0) < b2) return Crossing::Crosses;
    return Crossing::Undetermined;
}

bool resolve_undetermined(const ParamSurface& f, std::span<const double> center,
                          std::span<const double> halfwidth) {
    bool pos = false, neg = false, zero = false;
    for_center_and_corners(center, halfwidth, [&](std::span<const double> pt) {
        double v = f.value(pt);
        ensure_finite(v, "residual");
        if (v == 0.0)
            zero = true;
        else if (v > 0.0)
            pos = true;
        else
            neg = true;
    });
    return zero || (pos && neg);
}

int Accumulator::max_vote() const {
    return votes.empty() ? 0 : *std::max_element(votes.begin(), votes.end());
}

Accumulator accumulate(const std::vector<Vec2>& points, const CurveFamily& family,
                       const CellGrid& grid, const AccumulateOptions& opts) {
    Accumulator acc;
    acc.shape = grid.samples;
    acc.votes.assign(grid.total_cells(), 0);

    const bool polar = family.form == CurveForm::Polar;
    const bool spiral = family.name.rfind("spiral", 0) == 0;

    // per point: the (rho, theta) branches tracing its hypersurfaces
    std::vector<Vec2> base(points.size());
    double rho_max = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (polar) {
            base[i] = Vec2(points[i].norm(), std::atan2(points[i].y(), points[i].x()));
            rho_max = std::max(rho_max, base[i].x());
        } else {
            base[i] = points[i];
        }
    }
    int branches = 1;
    if (spiral) {
        double a_min = grid.region.lo[0];
        double b_min = grid.region.lo[1];
        if (b_min > 0.0 && rho_max > a_min) {
            branches = ceil_to_natural((rho_max - a_min) / (2.0 * pi * b_min)) + 1;
            branches = std::clamp(branches, 1, opts.max_spiral_branches);
        } else {
            branches = opts.max_spiral_branches;
        }
    }

    struct PointBranch {
        ParamSurface surf;
        std::size_t point;
    };
    std::vector<PointBranch> surfaces;
    surfaces.reserve(points.size() * static_cast<std::size_t>(branches));
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int k = 0; k < branches; ++k) {
            Vec2 pt(base[i].x(), base[i].y() + 2.0 * pi * k);
            ParamSurface surf;
            surf.dims = family.num_params;
            surf.value = [fam = &family, pt](std::span<const double> l) {
                return fam->residual(pt, l);
            };
            surf.grad = [fam = &family, pt](std::span<const double> l, std::span<double> g) {
                fam->grad(pt, l, g);
            };
            surf.hess = [fam = &family, pt](std::span<const double> l, std::span<double> h) {
                fam->hess(pt, l, h);
            };
            surfaces.push_back({std::move(surf), i});
        }
    }

    const std::vector<double> half = grid.halfwidth();
    const std::size_t cells = grid.total_cells();
    std::atomic<std::size_t> skipped{0};

    detail::parallel_for(cells, [&](std::size_t flat) {
        auto idx = grid.multi_index(flat);
        auto center = grid.center(idx);
        int vote = 0;
        std::size_t last_voted = std::numeric_limits<std::size_t>::max();
        for (const PointBranch& s : surfaces) {
            if (s.point == last_voted) continue; // one vote per (point, cell)
            try {
                Crossing c = crossing_cell(s.surf, center, half);
                bool hit = c == Crossing::Crosses ||
                           (c == Crossing::Undetermined &&
                            resolve_undetermined(s.surf, center, half));
                if (hit) {
                    ++vote;
                    last_voted = s.point;
                }
            } catch (const Error& e) {
                if (e.code() != Errc::nonfinite_evaluation) throw;
                skipped.fetch_add(1, std::memory_order_relaxed);
            }
        }
        acc.votes[flat] = vote;
    }, /*grain=*/1);

    acc.skipped_evaluations = skipped.load();
    return acc;
}

namespace {

// ---- zero-set tracing ---------------------------------------------------

std::vector<Vec2> polar_trace(const CurveFamily& family, std::span<const double> lambda,
                              int samples, double rho_limit) {
    std::vector<Vec2> out;
    const bool spiral = family.name.rfind("spiral", 0) == 0;
    double t0 = 0.0, t1 = 2.0 * pi;
    if (spiral) {
        // sweep until the spiral leaves the data annulus (or 12 turns)
        double limit = rho_limit > 0 ? rho_limit : family.polar_rho(4.0 * pi, lambda);
        t1 = 4.0 * pi;
        for (double t = 0; t <= 24.0 * pi; t += 0.01) {
            t1 = t;
            if (family.polar_rho(t, lambda) > limit) break;
        }
        if (t1 <= 0.1) t1 = 2.0 * pi;
    }
    for (int i = 0; i <= samples; ++i) {
        double t = t0 + (t1 - t0) * static_cast<double>(i) / samples;
        double rho = family.polar_rho(t, lambda);
        if (!std::isfinite(rho) || rho < 0) continue;
        out.emplace_back(rho * std::cos(t), rho * std::sin(t));
    }
    return out;
}

struct Seg {
    Vec2 a, b;
};

void emit_edge(std::vector<Seg>& segs, const Vec2& a, const Vec2& b) { segs.push_back({a, b}); }

// standard 16-case marching squares over the residual sign
std::vector<Seg> marching_squares(const std::function<double(double, double)>& f, double xmin,
                                  double xmax, double ymin, double ymax, int res) {
    std::vector<double> vals(static_cast<std::size_t>(res + 1) * static_cast<std::size_t>(res + 1));
    auto at = [&](int i, int j) -> double& {
        return vals[static_cast<std::size_t>(j) * static_cast<std::size_t>(res + 1) +
                    static_cast<std::size_t>(i)];
    };
    const double dx = (xmax - xmin) / res, dy = (ymax - ymin) / res;
    for (int j = 0; j <= res; ++j)
        for (int i = 0; i <= res; ++i) at(i, j) = f(xmin + i * dx, ymin + j * dy);

    std::vector<Seg> segs;
    auto interp = [](double x0, double v0, double x1, double v1) {
        double t = v0 / (v0 - v1);
        return x0 + t * (x1 - x0);
    };
    for (int j = 0; j < res; ++j) {
        for (int i = 0; i < res; ++i) {
            double x0 = xmin + i * dx, x1 = x0 + dx;
            double y0 = ymin + j * dy, y1 = y0 + dy;
            double bl = at(i, j), br = at(i + 1, j), tl = at(i, j + 1), tr = at(i + 1, j + 1);
            if (!std::isfinite(bl) || !std::isfinite(br) || !std::isfinite(tl) ||
                !std::isfinite(tr))
                continue;
            int mask = (bl > 0 ? 1 : 0) | (br > 0 ? 2 : 0) | (tr > 0 ? 4 : 0) | (tl > 0 ? 8 : 0);
            if (mask == 0 || mask == 15) continue;
            Vec2 bottom(interp(x0, bl, x1, br), y0);
            Vec2 top(interp(x0, tl, x1, tr), y1);
            Vec2 left(x0, interp(y0, bl, y1, tl));
            Vec2 right(x1, interp(y0, br, y1, tr));
            switch (mask) {
            case 1: case 14: emit_edge(segs, left, bottom); break;
            case 2: case 13: emit_edge(segs, bottom, right); break;
            case 3: case 12: emit_edge(segs, left, right); break;
            case 4: case 11: emit_edge(segs, top, right); break;
            case 6: case 9: emit_edge(segs, bottom, top); break;
            case 7: case 8: emit_edge(segs, left, top); break;
            case 5:
                emit_edge(segs, left, top);
                emit_edge(segs, bottom, right);
                break;
            case 10:
                emit_edge(segs, left, bottom);
                emit_edge(segs, top, right);
                break;
            default: break;
            }
        }
    }
    return segs;
}

std::vector<Vec2> segments_to_points(const std::vector<Seg>& segs) {
    std::vector<Vec2> out;
    out.reserve(segs.size() * 2);
    for (const Seg& s : segs) {
        out.push_back(s.a);
        out.push_back(s.b);
    }
    return out;
}

} // namespace

std::vector<Vec2> trace_locus(const CurveFamily& family, std::span<const double> lambda,
                              int samples) {
    if (family.form == CurveForm::Polar) return polar_trace(family, lambda, samples, -1.0);

    BoundingShape box;
    try {
        box = bounding_box(family, lambda);
    } catch (const Error&) {
        box.xmin = box.ymin = -2.0;
        box.xmax = box.ymax = 2.0; // generic window for unbounded loci
    }
    double padx = 0.05 * (box.xmax - box.xmin) + 1e-12;
    double pady = 0.05 * (box.ymax - box.ymin) + 1e-12;
    auto f = [&](double x, double y) { return family.residual(Vec2(x, y), lambda); };
    int res = std::clamp(samples, 32, 2048);
    auto segs = marching_squares(f, box.xmin - padx, box.xmax + padx, box.ymin - pady,
                                 box.ymax + pady, res);
    return segments_to_points(segs);
}

DetectedCurve detect_curve(const PlanarSet& z, const CurveFamily& family,
                           const ParameterRegion& region, const DetectOptions& opts) {
    if (z.size() < static_cast<std::size_t>(family.num_params) + 1)
        raise(Errc::too_few_points, "need more points than parameters");

    CellGrid grid = build_grid(region, opts.cell_cap);
    AccumulateOptions aopts;
    aopts.max_spiral_branches = opts.max_spiral_branches;
    Accumulator acc = accumulate(z.points2d, family, grid, aopts);

    int best = acc.max_vote();
    if (best == 0) raise(Errc::no_votes, "accumulator is all zero; region is likely wrong");

    DetectedCurve det;
    det.family = family;
    det.score = best;
    det.grid_cells = grid.total_cells();
    int runner = 0;
    for (std::size_t flat = 0; flat < acc.votes.size(); ++flat) {
        if (acc.votes[flat] == best)
            det.tied_cells.push_back(grid.multi_index(flat));
        else
            runner = std::max(runner, acc.votes[flat]);
    }
    det.runner_up = runner;
    det.cell_index = det.tied_cells.front(); // lexicographically smallest
    det.lambda = grid.center(det.cell_index);
    det.step = grid.region.step;
    det.frame = z.frame;
    det.has_frame = true;
    return det;
}

std::string DetectedCurve::equation() const {
    return family.equation ? family.equation(lambda) : std::string{};
}

std::vector<DetectedCurve> compete_families(
    const PlanarSet& z, const std::vector<std::pair<CurveFamily, ParameterRegion>>& candidates) {
    if (candidates.empty()) raise(Errc::all_failed, "no candidate families");
    std::vector<DetectedCurve> results;
    std::string first_error;
    for (const auto& [family, region] : candidates) {
        try {
            results.push_back(detect_curve(z, family, region));
        } catch (const Error& e) {
            if (first_error.empty()) first_error = family.name + ": " + e.what();
        }
    }
    if (results.empty()) raise(Errc::all_failed, "every candidate failed (" + first_error + ")");
    std::stable_sort(results.begin(), results.end(), [](const DetectedCurve& a,
                                                        const DetectedCurve& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.family.num_params != b.family.num_params)
            return a.family.num_params < b.family.num_params;
        return a.family.name < b.family.name;
    });
    return results;
}

std::vector<Vec3> lift_to_3d(const DetectedCurve& curve, int samples) {
    if (!curve.has_frame) raise(Errc::domain_error, "detected curve has no plane frame");
    std::vector<Vec2> locus = trace_locus(curve.family, curve.lambda, samples);
    if (locus.empty()) raise(Errc::empty_locus, "no zero crossings in the sampled window");
    std::vector<Vec3> out;
    out.reserve(locus.size());
    for (const Vec2& p : locus) out.push_back(curve.frame.lift(p));
    return out;
}

void dump_accumulator_csv(const Accumulator& acc, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) raise(Errc::io_error, "cannot write '" + path + "'");
    for (std::size_t k = 0; k < acc.shape.size(); ++k) std::fprintf(out, "j%zu,", k + 1);
    std::fprintf(out, "votes\n");
    CellGrid shape_only;
    shape_only.samples = acc.shape;
    for (std::size_t flat = 0; flat < acc.votes.size(); ++flat) {
        auto idx = shape_only.multi_index(flat);
        for (int j : idx) std::fprintf(out, "%d,", j);
        std::fprintf(out, "%d\n", acc.votes[flat]);
    }
    std::fclose(out);
}

} // namespace curverec
