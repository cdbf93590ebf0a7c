#include <doctest.h>

#include <random>

#include "curverec/features.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/util.hpp"

using namespace curverec;
using namespace curverec::testing;

TEST_SUITE_BEGIN("features");

TEST_CASE("unit sphere curvature is 1 within 5%") {
    SurfaceModel sphere = make_icosphere(3);
    auto curv = estimate_principal_curvatures(sphere, 2);
    CHECK(curv.degenerate_count() == 0);
    for (std::size_t i = 0; i < sphere.vertices.size(); ++i) {
        CHECK(curv.cmin.values[i] == doctest::Approx(1.0).epsilon(0.05));
        CHECK(curv.cmax.values[i] == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("cylinder r=2 gives (0, 0.5) within 5%") {
    SurfaceModel cyl = make_cylinder(2.0, 10.0, 96, 40);
    auto curv = estimate_principal_curvatures(cyl, 2);
    for (std::size_t i = 0; i < cyl.vertices.size(); ++i) {
        CHECK(std::abs(curv.cmin.values[i]) < 0.025); // 5% of 1/r
        CHECK(curv.cmax.values[i] == doctest::Approx(0.5).epsilon(0.05));
    }
}

TEST_CASE("torus curvatures match the analytic oracle within 10%") {
    const double R = 2.0, r = 0.5;
    SurfaceModel torus = make_torus(R, r, 128, 48);
    auto curv = estimate_principal_curvatures(torus, 2);
    for (std::size_t i = 0; i < torus.vertices.size(); ++i) {
        double kmin, kmax;
        torus_curvatures(torus.vertices[i], R, r, kmin, kmax);
        // relative with a floor: the ring curvature passes through zero
        double floor = 0.1 * (1.0 / r);
        CHECK(std::abs(curv.cmin.values[i] - kmin) <= 0.10 * std::max(std::abs(kmin), floor));
        CHECK(std::abs(curv.cmax.values[i] - kmax) <= 0.10 * std::max(std::abs(kmax), floor));
    }
}

TEST_CASE("point-cloud estimation works through the knn path") {
    SurfaceModel sphere = make_icosphere(3);
    SurfaceModel cloud;
    cloud.vertices = sphere.vertices; // same samples, no faces
    auto curv = estimate_principal_curvatures(cloud, 16);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < cloud.vertices.size(); ++i) {
        // normals from PCA have arbitrary sign, so compare magnitudes
        if (std::abs(std::abs(curv.cmin.values[i]) - 1.0) < 0.10 &&
            std::abs(std::abs(curv.cmax.values[i]) - 1.0) < 0.10)
            ++ok;
    }
    CHECK(ok >= cloud.vertices.size() * 95 / 100);

    try {
        estimate_principal_curvatures(cloud, 3);
        FAIL("expected rejection of tiny cloud neighbourhoods");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::domain_error);
    }
}

TEST_CASE("derive_property implements the three derived fields") {
    ScalarField cmin{Property::Cmin, {0.0, -1.0}};
    ScalarField cmax{Property::Cmax, {0.0, 3.0}};
    CHECK(derive_property(cmin, cmax, Property::Cmean).values == std::vector<double>{0.0, 1.0});
    CHECK(derive_property(cmin, cmax, Property::CGauss).values == std::vector<double>{0.0, -3.0});
    CHECK(derive_property(cmin, cmax, Property::Ctot).values == std::vector<double>{0.0, 4.0});

    ScalarField bad{Property::Cmin, {1.0}};
    CHECK_THROWS_AS(derive_property(bad, cmax, Property::Cmean), Error);
}

TEST_CASE("derive_property matches an elementwise oracle on random fields") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5, 5);
    ScalarField lo{Property::Cmin, {}}, hi{Property::Cmax, {}};
    for (int i = 0; i < 500; ++i) {
        double a = u(rng), b = u(rng);
        lo.values.push_back(std::min(a, b));
        hi.values.push_back(std::max(a, b));
    }
    auto mean = derive_property(lo, hi, Property::Cmean);
    auto gauss = derive_property(lo, hi, Property::CGauss);
    auto tot = derive_property(lo, hi, Property::Ctot);
    for (std::size_t i = 0; i < lo.size(); ++i) {
        CHECK(mean.values[i] == (lo.values[i] + hi.values[i]) / 2.0);
        CHECK(gauss.values[i] == lo.values[i] * hi.values[i]);
        CHECK(tot.values[i] == std::abs(lo.values[i]) + std::abs(hi.values[i]));
    }
}

TEST_CASE("histogram of {1..10} in 10 bins is uniform") {
    ScalarField f{Property::Cmax, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
    Histogram h = build_histogram(f, 10);
    CHECK(h.total == 10);
    for (std::size_t c : h.counts) CHECK(c == 1);
}

TEST_CASE("constant field lands in a single widened bin") {
    ScalarField f{Property::Cmax, std::vector<double>(50, 3.25)};
    Histogram h = build_histogram(f, 256);
    CHECK(h.counts.size() == 1);
    CHECK(h.counts[0] == 50);
    CHECK(h.bin_edges[1] > h.bin_edges[0]);

    // filtering a constant field keeps nothing
    double v = filter_threshold(h, 0.8);
    CHECK(v >= 3.25);
}

TEST_CASE("histogram matches the naive binning oracle exactly") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 2.0);
    ScalarField f{Property::Cmax, {}};
    for (int i = 0; i < 100000; ++i) f.values.push_back(gauss(rng));
    Histogram h = build_histogram(f, 256);
    auto oracle = naive_bin_counts(f.values, 256);
    REQUIRE(h.counts.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(h.counts[i] == oracle[i]);
}

TEST_CASE("filter_threshold walks the histogram like the counting loop") {
    Histogram h;
    h.bin_edges = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}; // unit bins from 1
    h.counts = std::vector<std::size_t>(10, 1);
    h.total = 10;
    CHECK(filter_threshold(h, 0.8) == doctest::Approx(9.0)); // cumulates 8 samples

    // p -> 1: upper edge of the last nonempty bin
    CHECK(filter_threshold(h, 0.9999) == doctest::Approx(11.0));

    h.counts.back() = 0;
    h.counts[8] = 2;
    CHECK(filter_threshold(h, 0.9999) == doctest::Approx(10.0));

    CHECK_THROWS_AS(filter_threshold(h, 0.0), Error);
    CHECK_THROWS_AS(filter_threshold(h, 1.0), Error);
}

TEST_CASE("filter_threshold is monotone in p") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    ScalarField f{Property::Cmax, {}};
    for (int i = 0; i < 2000; ++i) f.values.push_back(u(rng) * u(rng));
    Histogram h = build_histogram(f, 64);
    double prev = -1e300;
    for (double p : {0.1, 0.25, 0.5, 0.75, 0.8, 0.9, 0.99}) {
        double v = filter_threshold(h, p);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("flat plane yields an empty feature set") {
    SurfaceModel plane = make_height_grid(30, 30, 1.0, 1.0, [](double, double) { return 0.0; });
    FeaturePointSet x = extract_feature_points(plane, Property::Cmax, 0.8);
    CHECK(x.size() <= plane.vertices.size() / 20);
}

TEST_CASE("an embossed ridge concentrates the feature points") {
    // ridge core about one edge wide so the crest dominates the top bins
    const double R = 0.3, cx = 0.5, cy = 0.5;
    SurfaceModel plane =
        make_height_grid(121, 121, 1.0, 1.0, circular_ridge(cx, cy, R, 0.03, 0.01));
    FeaturePointSet x = extract_feature_points(plane, Property::Cmax, 0.97);
    REQUIRE(x.size() > 20);
    double edge_len = 1.0 / 120.0;
    std::size_t near = 0;
    for (const Vec3& p : x.points)
        if (std::abs(std::hypot(p.x() - cx, p.y() - cy) - R) <= 2.0 * edge_len) ++near;
    CHECK(near * 10 >= x.size() * 9); // >= 90% on the ridge

    // selection is a subset of model vertices with strictly increasing ids
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x.points[i] == plane.vertices[static_cast<std::size_t>(x.vertex_ids[i])]);
        if (i > 0) CHECK(x.vertex_ids[i] > x.vertex_ids[i - 1]);
    }

    // a stricter threshold keeps fewer points
    FeaturePointSet x99 = extract_feature_points(plane, Property::Cmax, 0.99);
    CHECK(x99.size() <= x.size());
}

TEST_CASE("Cmin and luminosity filter the low tail") {
    // valley ridge: most salient points have the most negative Cmin
    SurfaceModel plane =
        make_height_grid(81, 81, 1.0, 1.0, circular_ridge(0.5, 0.5, 0.3, -0.05, 0.02));
    FeaturePointSet x = extract_feature_points(plane, Property::Cmin, 0.9);
    REQUIRE(x.size() > 0);
    auto curv = estimate_principal_curvatures(plane, 2);
    double cut = 0;
    for (int id : x.vertex_ids) cut = std::min(cut, curv.cmin.values[static_cast<std::size_t>(id)]);
    // all selected vertices sit in the negative tail
    for (int id : x.vertex_ids)
        CHECK(curv.cmin.values[static_cast<std::size_t>(id)] < -1e-3);
}

TEST_CASE("luminosity extraction needs colours") {
    SurfaceModel plane = make_height_grid(5, 5, 1.0, 1.0, [](double, double) { return 0.0; });
    try {
        extract_feature_points(plane, Property::Luminosity, 0.8);
        FAIL("expected MissingColor");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::missing_color);
    }
}

TEST_CASE("feature set combinators intersect and unite by vertex id") {
    FeaturePointSet a, b;
    a.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    a.vertex_ids = {0, 1, 2};
    b.points = {{1, 0, 0}, {3, 0, 0}};
    b.vertex_ids = {1, 3};
    auto i = intersect_features(a, b);
    CHECK(i.vertex_ids == std::vector<int>{1});
    auto u = unite_features(a, b);
    CHECK(u.vertex_ids == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("scalar field CSV dump") {
    TempDir tmp("csv");
    ScalarField f{Property::Cmax, {1.5, -2.0}};
    dump_scalar_field_csv(f, tmp.file("f.csv"));
    std::string text = read_file(tmp.file("f.csv"));
    CHECK(text.find("vertex_id,value") == 0);
    CHECK(text.find("0,1.5") != std::string::npos);
}

TEST_SUITE_END();
