#include <doctest.h>

#include <numbers>
#include <set>

#include "curverec/pipeline.hpp"
#include "support/synthetic.hpp"
#include "support/util.hpp"

using namespace curverec;
using namespace curverec::testing;
using std::numbers::pi;

namespace {

// plane with embossed circular ridges; the standard end-to-end fixture
SurfaceModel embossed_circles(const std::vector<std::array<double, 3>>& rings, int res) {
    return make_height_grid(res, res, 4.0, 4.0, [rings](double x, double y) {
        double z = 0;
        for (const auto& [cx, cy, R] : rings)
            z += circular_ridge(cx, cy, R, 0.05, 0.018)(x, y);
        return z;
    });
}

RunConfig base_config(const std::string& model_path) {
    RunConfig cfg;
    cfg.model_path = model_path;
    cfg.property = Property::Cmax;
    cfg.threshold = 0.9;
    cfg.density.k = 10;
    cfg.density.min_pts = 5;
    FamilySelection circle;
    circle.name = "circle";
    cfg.families.push_back(circle);
    cfg.overlay = false;
    cfg.plots = false;
    return cfg;
}

} // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("three embossed circles are recovered end to end") {
    TempDir tmp("e2e");
    SurfaceModel plane = embossed_circles({{1.0, 1.0, 0.5}, {3.0, 1.1, 0.8}, {1.9, 2.9, 1.1}}, 201);
    save_obj(plane, tmp.file("plane.obj"));

    RunConfig cfg = base_config(tmp.file("plane.obj"));
    cfg.out_dir = tmp.dir() + "/out";
    RunReport report = run_pipeline(cfg);

    REQUIRE(report.clusters.size() == 3);
    std::vector<double> expected{0.5, 0.8, 1.1};
    std::vector<bool> found(3, false);
    for (const auto& rec : report.clusters) {
        REQUIRE(!rec.detections.empty());
        const DetectedCurve& det = rec.detections.front();
        CHECK(det.family.name == "circle");
        double radius = det.lambda[2];
        double cell = det.grid_cells > 0 ? 1.0 : 0.0; // sanity only
        (void)cell;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (std::abs(radius - expected[i]) <= 0.08) found[i] = true;
        }
    }
    CHECK(found == std::vector<bool>{true, true, true});
    CHECK(report.total_detections >= 3);
    CHECK(report.timings_ms.count("features") == 1);
    CHECK(report.timings_ms.count("detect") == 1);

    // report written and parseable
    std::string text = read_file(cfg.out_dir + "/report.json");
    auto j = nlohmann::json::parse(text);
    CHECK(j["clusters"].size() == 3);
}

TEST_CASE("config validation rejects a threshold outside (0,1)") {
    RunConfig cfg = base_config("whatever.obj");
    cfg.threshold = 1.5;
    try {
        run_pipeline(cfg);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::config_error);
    }

    RunConfig none = base_config("whatever.obj");
    none.families.clear();
    CHECK_THROWS_AS(run_pipeline(none), Error);
}

TEST_CASE("config json round trip") {
    RunConfig cfg = base_config("m.obj");
    cfg.property2 = Property::Luminosity;
    cfg.combine = Combine::Intersect;
    cfg.families[0].fixed["m"] = 4;
    ParameterRegion r;
    r.lo = {0, 0, 0.1};
    r.hi = {1, 1, 1.0};
    r.step = {0.05, 0.05, 0.045};
    cfg.families[0].region = r;
    RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.model_path == cfg.model_path);
    CHECK(back.combine == Combine::Intersect);
    CHECK(back.property2 == Property::Luminosity);
    REQUIRE(back.families.size() == 1);
    CHECK(back.families[0].fixed.at("m") == 4);
    REQUIRE(back.families[0].region.has_value());
    CHECK(back.families[0].region->step == r.step);
}

TEST_CASE("same config and seed give a byte-identical report modulo timings") {
    TempDir tmp("det");
    SurfaceModel plane = embossed_circles({{2.0, 2.0, 0.8}}, 141);
    save_obj(plane, tmp.file("plane.obj"));
    RunConfig cfg = base_config(tmp.file("plane.obj"));
    cfg.seed = 42;

    auto strip = [](RunReport&& rep) {
        nlohmann::json j = rep.to_json();
        j.erase("timings_ms");
        return j.dump();
    };
    std::string a = strip(run_pipeline(cfg));
    std::string b = strip(run_pipeline(cfg));
    CHECK(a == b);
}

TEST_CASE("every non-noise, non-small cluster is reported exactly once") {
    TempDir tmp("cover");
    SurfaceModel plane = embossed_circles({{1.2, 1.2, 0.6}, {2.9, 2.9, 0.7}}, 161);
    save_obj(plane, tmp.file("plane.obj"));
    RunConfig cfg = base_config(tmp.file("plane.obj"));
    RunReport report = run_pipeline(cfg);
    std::set<int> ids;
    for (const auto& rec : report.clusters) {
        CHECK(!ids.count(rec.id));
        ids.insert(rec.id);
        if (!rec.small) CHECK(!rec.skipped);
    }
}

TEST_CASE("overlay OBJ reloads with the model intact") {
    TempDir tmp("ovl");
    SurfaceModel plane = embossed_circles({{2.0, 2.0, 0.9}}, 121);
    save_obj(plane, tmp.file("plane.obj"));
    RunConfig cfg = base_config(tmp.file("plane.obj"));
    RunReport report = run_pipeline(cfg);
    REQUIRE(!report.clusters.empty());
    REQUIRE(!report.clusters[0].detections.empty());

    SurfaceModel model = load_model(tmp.file("plane.obj"));
    emit_overlay(model, {report.clusters[0].detections.front()}, tmp.file("overlay.obj"));
    SurfaceModel back = load_model(tmp.file("overlay.obj"));
    CHECK(back.vertices.size() > model.vertices.size()); // curve points appended
    CHECK(back.faces.size() == model.faces.size());
    std::string text = read_file(tmp.file("overlay.obj"));
    CHECK(text.find("\nl ") != std::string::npos);
}

TEST_CASE("cluster plot SVG is well formed") {
    TempDir tmp("svg");
    PlanarSet z;
    for (int i = 0; i < 32; ++i) {
        double t = 2.0 * pi * i / 32.0;
        z.points2d.emplace_back(std::cos(t), std::sin(t));
    }
    DetectedCurve det;
    det.family = make_circle();
    det.lambda = {0.0, 0.0, 1.0};
    det.has_frame = true;
    emit_cluster_plot(z, &det, tmp.file("plot.svg"));
    std::string text = read_file(tmp.file("plot.svg"));
    CHECK(text.find("<?xml") == 0);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);
    CHECK(text.find("circle cx=") != std::string::npos);

    // byte-stable across runs
    emit_cluster_plot(z, &det, tmp.file("plot2.svg"));
    CHECK(read_file(tmp.file("plot2.svg")) == text);

    // no detection: points-only plot still valid
    emit_cluster_plot(z, nullptr, tmp.file("plain.svg"));
    std::string plain = read_file(tmp.file("plain.svg"));
    CHECK(plain.find("</svg>") != std::string::npos);
}

TEST_CASE("debug dumps land in the output directory") {
    TempDir tmp("dumps");
    SurfaceModel plane = embossed_circles({{2.0, 2.0, 0.9}}, 101);
    save_obj(plane, tmp.file("plane.obj"));
    RunConfig cfg = base_config(tmp.file("plane.obj"));
    cfg.out_dir = tmp.dir() + "/out";
    cfg.dumps = true;
    std::filesystem::create_directories(cfg.out_dir);
    run_pipeline(cfg);
    CHECK(std::filesystem::exists(cfg.out_dir + "/field.csv"));
    CHECK(std::filesystem::exists(cfg.out_dir + "/clusters.csv"));
    CHECK(std::filesystem::exists(cfg.out_dir + "/report.json"));
}

TEST_SUITE_END();
