#include "curverec/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_set>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "spatial.hpp"

namespace curverec {

namespace {

constexpr int kMeshRingDefault = 2;
constexpr int kCloudNeighborsDefault = 16;
constexpr int kQuadricUnknowns = 5;

std::vector<std::vector<int>> vertex_adjacency(const SurfaceModel& model) {
    std::vector<std::vector<int>> adj(model.vertices.size());
    for (const auto& f : model.faces) {
        for (int k = 0; k < 3; ++k) {
            adj[static_cast<std::size_t>(f[k])].push_back(f[(k + 1) % 3]);
            adj[static_cast<std::size_t>(f[k])].push_back(f[(k + 2) % 3]);
        }
    }
    for (auto& nbrs : adj) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return adj;
}

std::vector<Vec3> mesh_vertex_normals(const SurfaceModel& model) {
    std::vector<Vec3> normals(model.vertices.size(), Vec3::Zero());
    for (const auto& f : model.faces) {
        const Vec3& a = model.vertices[static_cast<std::size_t>(f[0])];
        const Vec3& b = model.vertices[static_cast<std::size_t>(f[1])];
        const Vec3& c = model.vertices[static_cast<std::size_t>(f[2])];
        Vec3 n = (b - a).cross(c - a); // area-weighted
        for (int k = 0; k < 3; ++k) normals[static_cast<std::size_t>(f[k])] += n;
    }
    for (auto& n : normals) {
        double len = n.norm();
        if (len > 0) n /= len;
    }
    return normals;
}

/// Vertices within `rings` edge hops of v, v excluded.
std::vector<int> ring_neighborhood(const std::vector<std::vector<int>>& adj, int v, int rings) {
    std::vector<int> frontier{v};
    std::unordered_set<int> seen{v};
    std::vector<int> out;
    for (int r = 0; r < rings; ++r) {
        std::vector<int> next;
        for (int u : frontier)
            for (int w : adj[static_cast<std::size_t>(u)])
                if (seen.insert(w).second) {
                    next.push_back(w);
                    out.push_back(w);
                }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return out;
}

Vec3 pca_normal(const std::vector<Vec3>& pts, const Vec3& center,
                const std::vector<int>& nbrs) {
    Mat3 cov = Mat3::Zero();
    for (int j : nbrs) {
        Vec3 d = pts[static_cast<std::size_t>(j)] - center;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    return eig.eigenvectors().col(0); // smallest eigenvalue
}

/// Principal curvatures at the origin of a normal-aligned frame from the
/// quadric w = a*u^2 + b*u*v + c*v^2 + d*u + e*v fitted to the neighbours.
/// Returns false when the fit is rank-deficient.
bool quadric_curvatures(const std::vector<Vec3>& pts, const Vec3& center, const Vec3& normal,
                        const std::vector<int>& nbrs, double& kmin, double& kmax) {
    if (static_cast<int>(nbrs.size()) < kQuadricUnknowns) return false;

    Vec3 t1 = normal.cross(std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
    t1.normalize();
    Vec3 t2 = normal.cross(t1);

    Eigen::MatrixXd A(nbrs.size(), kQuadricUnknowns);
    Eigen::VectorXd rhs(nbrs.size());
    double scale = 0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        Vec3 d = pts[static_cast<std::size_t>(nbrs[i])] - center;
        double u = d.dot(t1), v = d.dot(t2), w = d.dot(normal);
        A.row(static_cast<Eigen::Index>(i)) << u * u, u * v, v * v, u, v;
        rhs(static_cast<Eigen::Index>(i)) = w;
        scale = std::max({scale, std::abs(u), std::abs(v)});
    }
    if (scale <= 0) return false;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < kQuadricUnknowns) return false;
    Eigen::VectorXd x = qr.solve(rhs);

    double a = x(0), b = x(1), c = x(2), d = x(3), e = x(4);
    double s = std::sqrt(1.0 + d * d + e * e);

    Eigen::Matrix2d first;
    first << 1 + d * d, d * e, d * e, 1 + e * e;
    Eigen::Matrix2d second;
    second << 2 * a / s, b / s, b / s, 2 * c / s;

    Eigen::Matrix2d shape = first.inverse() * second;
    double tr = shape.trace();
    double det = shape.determinant();
    double disc = std::max(0.0, tr * tr / 4.0 - det);
    double root = std::sqrt(disc);
    // sign flip: convex along the outward normal counts positive
    double k1 = -(tr / 2.0 + root);
    double k2 = -(tr / 2.0 - root);
    kmin = std::min(k1, k2);
    kmax = std::max(k1, k2);
    return std::isfinite(kmin) && std::isfinite(kmax);
}

} // namespace

const char* property_name(Property p) {
    switch (p) {
    case Property::Cmin: return "cmin";
    case Property::Cmax: return "cmax";
    case Property::Cmean: return "cmean";
    case Property::CGauss: return "cgauss";
    case Property::Ctot: return "ctot";
    case Property::Luminosity: return "luminosity";
    }
    return "?";
}

Property property_from_name(const std::string& name) {
    for (Property p : {Property::Cmin, Property::Cmax, Property::Cmean, Property::CGauss,
                       Property::Ctot, Property::Luminosity})
        if (name == property_name(p)) return p;
    raise(Errc::domain_error, "unknown property '" + name + "'");
}

std::size_t CurvatureResult::degenerate_count() const {
    return static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
}

CurvatureResult estimate_principal_curvatures(const SurfaceModel& model, int neighborhood) {
    const std::size_t n = model.vertices.size();
    if (neighborhood < 1) raise(Errc::domain_error, "neighborhood must be positive");
    if (n < static_cast<std::size_t>(neighborhood) + 1)
        raise(Errc::too_few_points, "model smaller than requested neighborhood");
    if (!model.is_mesh() && neighborhood < 6)
        raise(Errc::domain_error, "point clouds need neighborhood >= 6");

    CurvatureResult result;
    result.cmin.property = Property::Cmin;
    result.cmax.property = Property::Cmax;
    result.cmin.values.assign(n, 0.0);
    result.cmax.values.assign(n, 0.0);
    result.degenerate.assign(n, 0);

    if (model.is_mesh()) {
        auto adj = vertex_adjacency(model);
        auto normals = mesh_vertex_normals(model);
        detail::parallel_for(n, [&](std::size_t i) {
            int v = static_cast<int>(i);
            auto nbrs = ring_neighborhood(adj, v, neighborhood);
            int grow = neighborhood;
            while (static_cast<int>(nbrs.size()) < kQuadricUnknowns && grow < neighborhood + 3)
                nbrs = ring_neighborhood(adj, v, ++grow);
            double kmin, kmax;
            if (!quadric_curvatures(model.vertices, model.vertices[i], normals[i], nbrs, kmin,
                                    kmax)) {
                result.degenerate[i] = 1;
                return;
            }
            result.cmin.values[i] = kmin;
            result.cmax.values[i] = kmax;
        });
    } else {
        detail::KdTree tree(model.vertices);
        detail::parallel_for(n, [&](std::size_t i) {
            auto knn = tree.knn(static_cast<int>(i), neighborhood);
            std::vector<int> nbrs;
            nbrs.reserve(knn.size());
            for (auto& [d, idx] : knn) nbrs.push_back(idx);
            Vec3 normal = pca_normal(model.vertices, model.vertices[i], nbrs);
            double kmin, kmax;
            if (!quadric_curvatures(model.vertices, model.vertices[i], normal, nbrs, kmin,
                                    kmax)) {
                result.degenerate[i] = 1;
                return;
            }
            result.cmin.values[i] = kmin;
            result.cmax.values[i] = kmax;
        });
    }
    return result;
}

ScalarField derive_property(const ScalarField& cmin, const ScalarField& cmax, Property prop) {
    if (cmin.size() != cmax.size())
        raise(Errc::length_mismatch, "curvature fields differ in length");
    ScalarField out;
    out.property = prop;
    out.values.resize(cmin.size());
    for (std::size_t i = 0; i < cmin.size(); ++i) {
        double lo = cmin.values[i], hi = cmax.values[i];
        switch (prop) {
        case Property::Cmin: out.values[i] = lo; break;
        case Property::Cmax: out.values[i] = hi; break;
        case Property::Cmean: out.values[i] = (lo + hi) / 2.0; break;
        case Property::CGauss: out.values[i] = lo * hi; break;
        case Property::Ctot: out.values[i] = std::abs(lo) + std::abs(hi); break;
        default: raise(Errc::domain_error, "derive_property needs a curvature variant");
        }
    }
    return out;
}

ScalarField luminosity_field(const SurfaceModel& model) {
    if (!model.has_colors())
        raise(Errc::missing_color, "luminosity requested on a colourless model");
    ScalarField out;
    out.property = Property::Luminosity;
    out.values.reserve(model.colors.size());
    for (const auto& c : model.colors) out.values.push_back(rgb_to_cielab(c).L);
    return out;
}

Histogram build_histogram(const ScalarField& field, int nbins) {
    if (field.values.empty()) raise(Errc::empty_field, "cannot bin an empty field");
    if (nbins < 2) raise(Errc::domain_error, "nbins must be >= 2");
    for (double v : field.values)
        if (!std::isfinite(v)) raise(Errc::domain_error, "field contains non-finite values");

    auto [mn_it, mx_it] = std::minmax_element(field.values.begin(), field.values.end());
    double mn = *mn_it, mx = *mx_it;

    Histogram h;
    if (mn == mx) {
        // constant field: one bin widened by an ulp
        double hi = std::nextafter(mx, std::numeric_limits<double>::max());
        if (hi == mx) hi = mx + 1.0;
        h.bin_edges = {mn, hi};
        h.counts = {field.values.size()};
        h.total = field.values.size();
        return h;
    }

    h.bin_edges.resize(static_cast<std::size_t>(nbins) + 1);
    double width = (mx - mn) / nbins;
    for (int i = 0; i <= nbins; ++i) h.bin_edges[static_cast<std::size_t>(i)] = mn + i * width;
    h.bin_edges.back() = mx;
    h.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (double v : field.values) {
        int bin = static_cast<int>((v - mn) / width);
        bin = std::clamp(bin, 0, nbins - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    h.total = field.values.size();
    return h;
}

double filter_threshold(const Histogram& h, double p) {
    if (!(p > 0.0 && p < 1.0)) raise(Errc::domain_error, "threshold p must be in (0,1)");
    const double target = p * static_cast<double>(h.total);
    std::size_t cum = 0, k = 0;
    while (k < h.bins() && static_cast<double>(cum) < target) {
        cum += h.counts[k];
        ++k;
    }
    return h.bin_edges.front() + static_cast<double>(k) * h.bin_width();
}

FeaturePointSet extract_feature_points(const SurfaceModel& model, const ScalarField& field,
                                       double p, int nbins) {
    if (field.size() != model.vertices.size())
        raise(Errc::length_mismatch, "field does not match model");

    // low values are the salient ones for Cmin and Luminosity
    ScalarField work = field;
    if (field.property == Property::Cmin || field.property == Property::Luminosity)
        for (double& v : work.values) v = -v;

    double cut = filter_threshold(build_histogram(work, nbins), p);

    FeaturePointSet out;
    for (std::size_t i = 0; i < work.size(); ++i) {
        if (work.values[i] > cut) {
            out.points.push_back(model.vertices[i]);
            out.vertex_ids.push_back(static_cast<int>(i));
        }
    }
    return out;
}

FeaturePointSet extract_feature_points(const SurfaceModel& model, Property prop, double p,
                                       const FeatureOptions& opts) {
    ScalarField field;
    if (prop == Property::Luminosity) {
        field = luminosity_field(model);
    } else {
        int nb = opts.neighborhood;
        if (nb <= 0) nb = model.is_mesh() ? kMeshRingDefault : kCloudNeighborsDefault;
        auto curv = estimate_principal_curvatures(model, nb);
        field = derive_property(curv.cmin, curv.cmax, prop);
    }
    return extract_feature_points(model, field, p, opts.nbins);
}

FeaturePointSet intersect_features(const FeaturePointSet& a, const FeaturePointSet& b) {
    FeaturePointSet out;
    std::unordered_set<int> in_b(b.vertex_ids.begin(), b.vertex_ids.end());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (in_b.count(a.vertex_ids[i])) {
            out.points.push_back(a.points[i]);
            out.vertex_ids.push_back(a.vertex_ids[i]);
        }
    return out;
}

FeaturePointSet unite_features(const FeaturePointSet& a, const FeaturePointSet& b) {
    FeaturePointSet out = a;
    std::unordered_set<int> in_a(a.vertex_ids.begin(), a.vertex_ids.end());
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!in_a.count(b.vertex_ids[i])) {
            out.points.push_back(b.points[i]);
            out.vertex_ids.push_back(b.vertex_ids[i]);
        }
    // keep ids strictly increasing
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return out.vertex_ids[x] < out.vertex_ids[y]; });
    FeaturePointSet sorted;
    sorted.points.reserve(out.size());
    sorted.vertex_ids.reserve(out.size());
    for (std::size_t idx : order) {
        sorted.points.push_back(out.points[idx]);
        sorted.vertex_ids.push_back(out.vertex_ids[idx]);
    }
    return sorted;
}

void dump_scalar_field_csv(const ScalarField& field, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) raise(Errc::io_error, "cannot write '" + path + "'");
    std::fprintf(out, "vertex_id,value\n");
    for (std::size_t i = 0; i < field.size(); ++i)
        std::fprintf(out, "%zu,%.17g\n", i, field.values[i]);
    std::fclose(out);
}

} // namespace curverec
