#pragma once

#include <utility>
#include <vector>

#include "curverec/cluster.hpp"
#include "curverec/geometry.hpp"

namespace curverec {

/// Rigid frame mapping cluster coordinates to the fitting plane: a point q
/// maps to rotation * (q - centroid); rows 0,1 span the plane, row 2 is the
/// unit normal.
struct PlaneFrame {
    Vec3 centroid = Vec3::Zero();
    Mat3 rotation = Mat3::Identity();

    Vec2 to_plane(const Vec3& q) const {
        Vec3 r = rotation * (q - centroid);
        return {r.x(), r.y()};
    }
    Vec3 lift(const Vec2& p, double out_of_plane = 0.0) const {
        return rotation.transpose() * Vec3(p.x(), p.y(), out_of_plane) + centroid;
    }
};

struct PlanarSet {
    std::vector<Vec2> points2d;
    PlaneFrame frame;
    std::vector<double> residuals; // signed out-of-plane coordinate per point
    bool pca_fallback = false;     // regression was ill-conditioned
    bool overlap_warning = false;  // >1% of projected points collide

    std::size_t size() const { return points2d.size(); }
};

/// Least-squares coefficients of z = b1*x + b2*y for centred points.
/// Throws SingularFit when the xy covariance is ill-conditioned
/// (condition number > 1e8).
std::pair<double, double> fit_plane(const std::vector<Vec3>& centered);

/// Centres the cluster, fits the plane, and applies the rigid frame built
/// from n = (b1, b2, -1), v1 = (1, 0, b1), v2 = n x v1. Falls back to a PCA
/// basis when the regression fit is singular.
PlanarSet project_to_plane(const std::vector<Vec3>& points);
PlanarSet project_to_plane(const Cluster& cluster);

/// Debug dump, one "x,y" row per projected point.
void dump_planar_csv(const PlanarSet& z, const std::string& path);

} // namespace curverec
