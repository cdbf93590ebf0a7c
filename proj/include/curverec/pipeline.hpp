#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curverec/hough.hpp"

namespace curverec {

enum class Combine { Single, Intersect, Union };

struct FamilySelection {
    std::string name;
    std::map<std::string, int> fixed;
    std::optional<ParameterRegion> region; // lo/hi override; empty step = default
};

struct RunConfig {
    std::string model_path;
    std::optional<ModelFormat> format; // default: from extension

    Property property = Property::Cmax;
    double threshold = 0.8;
    Combine combine = Combine::Single;
    std::optional<Property> property2;
    double threshold2 = 0.8;

    int neighborhood = 0; // 0 = per-model default
    int nbins = 256;
    DensityParams density;
    bool include_small_clusters = false;

    std::vector<FamilySelection> families;

    std::string out_dir;
    std::uint64_t seed = 0;
    bool dumps = false;
    bool overlay = true;
    bool plots = true;
    int lift_samples = 512;
    std::size_t cell_cap = 10'000'000;

    void validate() const; // throws ConfigError

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct ClusterRecord {
    int id = 0;
    std::size_t size = 0;
    bool small = false;
    bool skipped = false;
    PlaneFrame frame;
    double residual_max = 0;
    double residual_mean = 0;
    bool pca_fallback = false;
    std::vector<DetectedCurve> detections; // ranked, best first
    std::string error;                     // failure note when detection broke down
};

struct RunReport {
    nlohmann::json config_echo;
    std::size_t vertex_count = 0;
    std::size_t feature_count = 0;
    double epsilon = 0;
    std::size_t noise_count = 0;
    std::vector<ClusterRecord> clusters;
    std::map<std::string, double> timings_ms;
    int total_detections = 0;

    nlohmann::json to_json() const;
};

/// Full run: extract feature points once, aggregate once, then project and
/// detect per cluster. Writes report.json (plus overlay/plots/dumps) into
/// config.out_dir when set.
RunReport run_pipeline(const RunConfig& config);

/// OBJ with the model vertices plus one "l" polyline per lifted curve.
void emit_overlay(const SurfaceModel& model, const std::vector<DetectedCurve>& curves,
                  const std::string& path, int samples = 512);

/// Equal-aspect SVG of the projected cluster with the detected locus overlaid.
void emit_cluster_plot(const PlanarSet& z, const DetectedCurve* curve, const std::string& path);

} // namespace curverec
