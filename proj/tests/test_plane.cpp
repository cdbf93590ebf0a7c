#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "curverec/plane.hpp"
#include "support/util.hpp"

using namespace curverec;
using namespace curverec::testing;

namespace {

std::vector<Vec3> plane_samples(std::mt19937_64& rng, std::size_t n, double b1, double b2,
                                double noise) {
    std::uniform_real_distribution<double> u(-2, 2);
    std::normal_distribution<double> g(0.0, noise);
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < n; ++i) {
        double x = u(rng), y = u(rng);
        pts.emplace_back(x, y, b1 * x + b2 * y + (noise > 0 ? g(rng) : 0.0));
    }
    return pts;
}

void center(std::vector<Vec3>& pts) {
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    for (Vec3& p : pts) p -= c;
}

} // namespace

TEST_SUITE_BEGIN("plane");

TEST_CASE("exact plane z = 2x + 3y") {
    std::mt19937_64 rng(1);
    auto pts = plane_samples(rng, 60, 2.0, 3.0, 0.0);
    center(pts);
    auto [b1, b2] = fit_plane(pts);
    CHECK(b1 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(b2 == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("flat data fits z = 0") {
    std::mt19937_64 rng(2);
    auto pts = plane_samples(rng, 40, 0.0, 0.0, 0.0);
    center(pts);
    auto [b1, b2] = fit_plane(pts);
    CHECK(std::abs(b1) < 1e-12);
    CHECK(std::abs(b2) < 1e-12);
}

TEST_CASE("noisy fit matches the closed-form normal equations") {
    std::mt19937_64 rng(3);
    auto pts = plane_samples(rng, 200, -0.7, 1.3, 0.05);
    center(pts);
    auto [b1, b2] = fit_plane(pts);

    // independent 2x2 solve by explicit inversion
    double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
    for (const Vec3& p : pts) {
        sxx += p.x() * p.x();
        sxy += p.x() * p.y();
        syy += p.y() * p.y();
        sxz += p.x() * p.z();
        syz += p.y() * p.z();
    }
    double det = sxx * syy - sxy * sxy;
    double o1 = (syy * sxz - sxy * syz) / det;
    double o2 = (sxx * syz - sxy * sxz) / det;
    CHECK(b1 == doctest::Approx(o1).epsilon(1e-10));
    CHECK(b2 == doctest::Approx(o2).epsilon(1e-10));
}

TEST_CASE("planar cluster maps rigidly onto z = 0") {
    std::mt19937_64 rng(4);
    auto pts = plane_samples(rng, 80, 1.0, 1.0, 0.0);
    for (Vec3& p : pts) p += Vec3(5, -2, 7);
    PlanarSet z = project_to_plane(pts);

    for (double r : z.residuals) CHECK(std::abs(r) <= 1e-10);

    Mat3 should_be_identity = z.frame.rotation * z.frame.rotation.transpose();
    CHECK((should_be_identity - Mat3::Identity()).norm() <= 1e-10);
    CHECK(z.frame.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-10));

    for (std::size_t i = 0; i < pts.size(); i += 7) {
        for (std::size_t j = i + 1; j < pts.size(); j += 11) {
            double d3 = (pts[i] - pts[j]).norm();
            double d2 = (z.points2d[i] - z.points2d[j]).norm();
            CHECK(std::abs(d3 - d2) <= 1e-9);
        }
    }
}

TEST_CASE("noisy ring on a tilted plane keeps residuals under 4 sigma") {
    std::mt19937_64 rng(5);
    const double sigma = 0.01;
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) {
        double t = 2.0 * M_PI * i / 300.0;
        double x = std::cos(t), y = std::sin(t);
        pts.emplace_back(x, y, 0.4 * x - 0.3 * y + g(rng));
    }
    PlanarSet z = project_to_plane(pts);
    double worst = 0;
    for (double r : z.residuals) worst = std::max(worst, std::abs(r));
    CHECK(worst <= 4.0 * sigma);
}

TEST_CASE("vertical plane falls back to the PCA basis") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> pts;
    for (int i = 0; i < 50; ++i) pts.emplace_back(2.0, u(rng), u(rng));
    PlanarSet z = project_to_plane(pts);
    CHECK(z.pca_fallback);
    for (double r : z.residuals) CHECK(std::abs(r) <= 1e-8);
    CHECK(z.frame.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("lifting the projection reproduces the input") {
    std::mt19937_64 rng(7);
    auto pts = plane_samples(rng, 60, 0.3, -0.8, 0.02);
    for (Vec3& p : pts) p += Vec3(1, 2, 3);
    PlanarSet z = project_to_plane(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Vec3 back = z.frame.lift(z.points2d[i], z.residuals[i]);
        CHECK((back - pts[i]).norm() <= 1e-10);
    }
}

TEST_CASE("collinear clusters are rejected as degenerate") {
    std::vector<Vec3> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(i, 2.0 * i, -i);
    try {
        project_to_plane(pts);
        FAIL("expected DegenerateCluster");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::degenerate);
    }
}

TEST_CASE("planar CSV dump") {
    PlanarSet z;
    z.points2d = {{0.5, -1.0}};
    TempDir tmp("planar");
    dump_planar_csv(z, tmp.file("z.csv"));
    CHECK(read_file(tmp.file("z.csv")) == "x,y\n0.5,-1\n");
}

TEST_SUITE_END();
