#include "curverec/plane.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <Eigen/Dense>

namespace curverec {

namespace {

constexpr double kConditionLimit = 1e8;

Mat3 frame_from_normal(const Vec3& normal, const Vec3& in_plane) {
    Vec3 n = normal.normalized();
    Vec3 v1 = (in_plane - in_plane.dot(n) * n).normalized();
    Vec3 v2 = n.cross(v1); // right-handed: det = +1
    Mat3 rot;
    rot.row(0) = v1;
    rot.row(1) = v2;
    rot.row(2) = n;
    return rot;
}

} // namespace

std::pair<double, double> fit_plane(const std::vector<Vec3>& centered) {
    if (centered.size() < 3) raise(Errc::too_few_points, "plane fit needs >= 3 points");

    double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
    for (const Vec3& p : centered) {
        sxx += p.x() * p.x();
        sxy += p.x() * p.y();
        syy += p.y() * p.y();
        sxz += p.x() * p.z();
        syz += p.y() * p.z();
    }
    Eigen::Matrix2d m;
    m << sxx, sxy, sxy, syy;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
    double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(1);
    if (!(lo > 0) || hi / lo > kConditionLimit)
        raise(Errc::singular_fit, "xy covariance is ill-conditioned");

    Eigen::Vector2d b = m.ldlt().solve(Eigen::Vector2d(sxz, syz));
    return {b(0), b(1)};
}

PlanarSet project_to_plane(const std::vector<Vec3>& points) {
    if (points.size() < 3) raise(Errc::too_few_points, "projection needs >= 3 points");

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());

    std::vector<Vec3> centered;
    centered.reserve(points.size());
    for (const Vec3& p : points) centered.push_back(p - centroid);

    PlanarSet out;
    out.frame.centroid = centroid;

    Mat3 rot;
    bool fell_back = false;
    try {
        auto [b1, b2] = fit_plane(centered);
        Vec3 n(b1, b2, -1.0);
        Vec3 v1(1.0, 0.0, b1);
        rot = frame_from_normal(n, v1);
    } catch (const Error& e) {
        if (e.code() != Errc::singular_fit) throw;
        // PCA basis: normal = smallest-eigenvalue direction of the covariance
        fell_back = true;
        Mat3 cov = Mat3::Zero();
        for (const Vec3& p : centered) cov += p * p.transpose();
        Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
        if (eig.eigenvalues()(1) <= 1e-14 * std::max(1.0, eig.eigenvalues()(2)))
            raise(Errc::degenerate, "cluster is collinear");
        Vec3 n = eig.eigenvectors().col(0);
        rot = frame_from_normal(n, eig.eigenvectors().col(2));
    }
    out.pca_fallback = fell_back;
    out.frame.rotation = rot;

    out.points2d.reserve(points.size());
    out.residuals.reserve(points.size());
    for (const Vec3& p : centered) {
        Vec3 r = rot * p;
        out.points2d.emplace_back(r.x(), r.y());
        out.residuals.push_back(r.z());
    }

    // injectivity check: warn when >1% of projected points collide
    std::unordered_set<long long> cells;
    std::size_t collisions = 0;
    for (const Vec2& p : out.points2d) {
        long long key = (static_cast<long long>(std::llround(p.x() * 1e9)) << 21) ^
                        static_cast<long long>(std::llround(p.y() * 1e9));
        if (!cells.insert(key).second) ++collisions;
    }
    out.overlap_warning = collisions * 100 > points.size();
    return out;
}

PlanarSet project_to_plane(const Cluster& cluster) { return project_to_plane(cluster.points); }

void dump_planar_csv(const PlanarSet& z, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) raise(Errc::io_error, "cannot write '" + path + "'");
    std::fprintf(out, "x,y\n");
    for (const Vec2& p : z.points2d) std::fprintf(out, "%.17g,%.17g\n", p.x(), p.y());
    std::fclose(out);
}

} // namespace curverec
