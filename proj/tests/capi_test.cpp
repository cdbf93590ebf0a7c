// Exercises the shared-library C interface exactly as an external client
// would: only curverec.h plus the JSON payloads.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "curverec.h"

namespace {

std::string write_plane_obj(const std::string& path) {
    // 41x41 grid with one embossed circular ridge
    std::FILE* out = std::fopen(path.c_str(), "w");
    REQUIRE(out != nullptr);
    const int n = 81;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double x = 4.0 * i / (n - 1), y = 4.0 * j / (n - 1);
            double d = std::hypot(x - 2.0, y - 2.0) - 1.2;
            double z = 0.05 * std::exp(-d * d / (2 * 0.03 * 0.03));
            std::fprintf(out, "v %.17g %.17g %.17g\n", x, y, z);
        }
    }
    auto vid = [n](int i, int j) { return j * n + i + 1; };
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            std::fprintf(out, "f %d %d %d\n", vid(i, j), vid(i + 1, j), vid(i + 1, j + 1));
            std::fprintf(out, "f %d %d %d\n", vid(i, j), vid(i + 1, j + 1), vid(i, j + 1));
        }
    std::fclose(out);
    return path;
}

std::filesystem::path temp_root() {
    auto p = std::filesystem::temp_directory_path() / "curverec_capi";
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("version and error strings are always present") {
    CHECK(cr_version() != nullptr);
    CHECK(cr_last_error() != nullptr);
}

TEST_CASE("model lifecycle through the C API") {
    auto path = (temp_root() / "plane.obj").string();
    write_plane_obj(path);

    cr_model* model = nullptr;
    REQUIRE(cr_model_load(path.c_str(), nullptr, &model) == CR_OK);
    CHECK(cr_model_vertex_count(model) == 81 * 81);
    CHECK(cr_model_face_count(model) == 80 * 80 * 2);
    CHECK(cr_model_has_colors(model) == 0);

    auto copy = (temp_root() / "copy.obj").string();
    CHECK(cr_model_save_obj(model, copy.c_str()) == CR_OK);
    cr_model* reread = nullptr;
    REQUIRE(cr_model_load(copy.c_str(), "obj", &reread) == CR_OK);
    CHECK(cr_model_vertex_count(reread) == cr_model_vertex_count(model));
    cr_model_free(reread);
    cr_model_free(model);
}

TEST_CASE("loading a missing file reports CR_ERROR_IO") {
    cr_model* model = nullptr;
    CHECK(cr_model_load("/nonexistent/file.obj", nullptr, &model) == CR_ERROR_IO);
    CHECK(std::string(cr_last_error()).find("cannot open") != std::string::npos);
    CHECK(cr_model_load(nullptr, nullptr, &model) == CR_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("colour conversion endpoints") {
    double L, a, b;
    REQUIRE(cr_rgb_to_cielab(255, 255, 255, &L, &a, &b) == CR_OK);
    CHECK(L == doctest::Approx(100.0).epsilon(0.001));
    REQUIRE(cr_rgb_to_cielab(0, 0, 0, &L, &a, &b) == CR_OK);
    CHECK(L == doctest::Approx(0.0));
    CHECK(cr_rgb_to_cielab(300, 0, 0, &L, &a, &b) == CR_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("catalogue JSON lists the families") {
    char* text = nullptr;
    REQUIRE(cr_catalogue_json(&text) == CR_OK);
    auto arr = nlohmann::json::parse(text);
    cr_string_free(text);
    CHECK(arr.size() == 15);
    bool has_petal = false;
    for (const auto& f : arr)
        if (f["name"] == "petal") has_petal = true;
    CHECK(has_petal);
}

TEST_CASE("pipeline run through the C API") {
    auto path = (temp_root() / "ring.obj").string();
    write_plane_obj(path);

    nlohmann::json cfg{{"model", path},
                       {"property", "cmax"},
                       {"threshold", 0.9},
                       {"k", 10},
                       {"minpts", 5},
                       {"overlay", false},
                       {"plots", false},
                       {"families", {{{"name", "circle"}}}}};
    cr_report* report = nullptr;
    REQUIRE(cr_run_pipeline(cfg.dump().c_str(), &report) == CR_OK);
    CHECK(cr_report_cluster_count(report) >= 1);
    CHECK(cr_report_detection_count(report) >= 1);

    auto j = nlohmann::json::parse(cr_report_json(report));
    REQUIRE(j.contains("clusters"));
    const auto& det = j["clusters"][0]["detections"][0];
    CHECK(det["family"] == "circle");
    CHECK(std::abs(det["lambda"][2].get<double>() - 1.2) < 0.1);
    cr_report_free(report);
}

TEST_CASE("invalid configs are rejected with a message") {
    cr_report* report = nullptr;
    CHECK(cr_run_pipeline("not json at all", &report) == CR_ERROR_INVALID_ARGUMENT);
    CHECK(cr_run_pipeline("{}", &report) == CR_ERROR_INVALID_ARGUMENT);
    nlohmann::json cfg{{"model", "x.obj"}, {"threshold", 2.0}, {"families", {{{"name", "circle"}}}}};
    CHECK(cr_run_pipeline(cfg.dump().c_str(), &report) == CR_ERROR_INVALID_ARGUMENT);
    CHECK(cr_last_error()[0] != '\0');
}
