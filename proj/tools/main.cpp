// curverec command line: assembles a pipeline config from flags (or a JSON
// config file), runs it through the C API, and prints a summary.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "curverec.h"

using nlohmann::json;

namespace {

// exit codes: 0 detections, 2 validation error, 3 no detections, 4 I/O error
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNoDetections = 3;
constexpr int kExitIo = 4;

int exit_code_for(cr_status status) {
    switch (status) {
    case CR_OK: return kExitOk;
    case CR_ERROR_PARSE:
    case CR_ERROR_IO: return kExitIo;
    case CR_ERROR_NO_DETECTIONS: return kExitNoDetections;
    default: return kExitValidation;
    }
}

// "petal:n=50,stretched" -> {"name":"petal","fixed":{"n":50,"stretched":1}}
json parse_family_spec(const std::string& spec) {
    json out;
    auto colon = spec.find(':');
    out["name"] = spec.substr(0, colon);
    json fixed = json::object();
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos)
                fixed[item] = 1;
            else
                fixed[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
        }
    }
    if (!fixed.empty()) out["fixed"] = fixed;
    return out;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

// "--region circle:lo1,hi1,lo2,hi2,..." / "--step circle:d1,d2,..."
void apply_region_overrides(json& families, const std::vector<std::string>& regions,
                            const std::vector<std::string>& steps) {
    auto find_family = [&](const std::string& name) -> json* {
        for (auto& f : families)
            if (f["name"] == name) return &f;
        throw CLI::ValidationError("--region/--step names unknown family '" + name + "'");
    };
    for (const auto& spec : regions) {
        auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--region expects family:lo1,hi1,lo2,hi2,...");
        json* fam = find_family(spec.substr(0, colon));
        auto vals = parse_csv_doubles(spec.substr(colon + 1));
        if (vals.size() < 2 || vals.size() % 2 != 0)
            throw CLI::ValidationError("--region needs an even number of bounds");
        json lo = json::array(), hi = json::array();
        for (std::size_t i = 0; i < vals.size(); i += 2) {
            lo.push_back(vals[i]);
            hi.push_back(vals[i + 1]);
        }
        (*fam)["region"] = {{"lo", lo}, {"hi", hi}};
    }
    for (const auto& spec : steps) {
        auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--step expects family:d1,d2,...");
        json* fam = find_family(spec.substr(0, colon));
        if (!fam->contains("region"))
            throw CLI::ValidationError("--step requires --region for the same family");
        (*fam)["region"]["step"] = parse_csv_doubles(spec.substr(colon + 1));
    }
}

int run_command(const json& config) {
    cr_report* report = nullptr;
    cr_status status = cr_run_pipeline(config.dump().c_str(), &report);
    if (status != CR_OK) {
        std::cerr << "error: " << cr_last_error() << "\n";
        return exit_code_for(status);
    }
    json rep = json::parse(cr_report_json(report));
    std::size_t detections = cr_report_detection_count(report);

    std::cout << "vertices: " << rep["model"]["vertices"] << "\n";
    std::cout << "feature points: " << rep["features"]["count"] << "\n";
    std::cout << "clusters: " << rep["clusters"].size() << " (noise "
              << rep["clustering"]["noise"] << ", epsilon " << rep["clustering"]["epsilon"]
              << ")\n";
    for (const auto& c : rep["clusters"]) {
        std::cout << "  cluster " << c["id"] << " size " << c["size"];
        if (c.value("skipped", false)) {
            std::cout << " [skipped: small]\n";
            continue;
        }
        if (c.contains("error")) {
            std::cout << " [failed: " << c["error"].get<std::string>() << "]\n";
            continue;
        }
        std::cout << "\n";
        for (const auto& d : c["detections"])
            std::cout << "    " << d["family"].get<std::string>() << " score " << d["score"]
                      << "/" << c["size"] << "  " << d["equation"].get<std::string>() << "\n";
    }
    if (config.contains("out"))
        std::cout << "report: " << config["out"].get<std::string>() << "/report.json\n";
    cr_report_free(report);

    if (detections == 0) {
        std::cerr << "no curves detected\n";
        return kExitNoDetections;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"curverec — feature-curve recognition on 3D meshes and point clouds"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run the recognition pipeline");
    std::string config_path, model, property = "cmax", property2, combine = "single", out_dir;
    double threshold = 0.8, threshold2 = 0.8, epsilon = 0.0;
    int k = 50, minpts = 5, neighborhood = 0, nbins = 256;
    std::uint64_t seed = 0;
    bool dumps = false, include_small = false;
    std::vector<std::string> family_specs, region_specs, step_specs;

    run->add_option("--config", config_path, "JSON config file (flags override it)");
    run->add_option("--model", model, "model file (.obj/.ply/.xyz)");
    run->add_option("--property", property, "cmin|cmax|cmean|cgauss|ctot|luminosity");
    run->add_option("--threshold", threshold, "histogram filter threshold in (0,1)");
    run->add_option("--property2", property2, "second property for combined filtering");
    run->add_option("--threshold2", threshold2, "threshold for the second property");
    run->add_option("--combine", combine, "single|intersect|union");
    run->add_option("--family", family_specs,
                    "curve family, repeatable; e.g. circle or petal:n=50,stretched");
    run->add_option("--region", region_specs, "family:lo1,hi1,lo2,hi2,... region override");
    run->add_option("--step", step_specs, "family:d1,d2,... grid steps (needs --region)");
    run->add_option("--k", k, "neighbour count for the epsilon estimate");
    run->add_option("--minpts", minpts, "DBSCAN MinPts");
    run->add_option("--epsilon", epsilon, "density radius override");
    run->add_option("--neighborhood", neighborhood, "curvature neighbourhood (rings or knn)");
    run->add_option("--nbins", nbins, "histogram bins");
    run->add_option("--out", out_dir, "output directory for report and artifacts");
    run->add_option("--seed", seed, "random seed recorded in the report");
    run->add_flag("--dumps", dumps, "write CSV debug dumps");
    run->add_flag("--include-small", include_small, "detect on small clusters too");

    // catalogue
    auto* cat = app.add_subcommand("catalogue", "list the curve family catalogue");

    // info
    auto* info = app.add_subcommand("info", "load a model and print its stats");
    std::string info_model;
    info->add_option("model", info_model, "model file")->required();

    CLI11_PARSE(app, argc, argv);

    if (cat->parsed()) {
        char* text = nullptr;
        if (cr_catalogue_json(&text) != CR_OK) {
            std::cerr << "error: " << cr_last_error() << "\n";
            return kExitValidation;
        }
        json arr = json::parse(text);
        cr_string_free(text);
        for (const auto& f : arr) {
            std::cout << f["name"].get<std::string>() << " (" << f["form"].get<std::string>()
                      << ", " << f["params"] << " params";
            if (!f["fixed"].empty()) {
                std::cout << ", fixed:";
                for (const auto& fx : f["fixed"]) std::cout << " " << fx.get<std::string>();
            }
            std::cout << ")\n    " << f["equation"].get<std::string>() << "\n";
        }
        return kExitOk;
    }

    if (info->parsed()) {
        cr_model* handle = nullptr;
        cr_status status = cr_model_load(info_model.c_str(), nullptr, &handle);
        if (status != CR_OK) {
            std::cerr << "error: " << cr_last_error() << "\n";
            return exit_code_for(status);
        }
        std::cout << "vertices: " << cr_model_vertex_count(handle) << "\n"
                  << "faces: " << cr_model_face_count(handle) << "\n"
                  << "colors: " << (cr_model_has_colors(handle) ? "yes" : "no") << "\n";
        cr_model_free(handle);
        return kExitOk;
    }

    // run
    json config = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config '" << config_path << "'\n";
            return kExitIo;
        }
        config = json::parse(in, nullptr, false);
        if (config.is_discarded()) {
            std::cerr << "error: config is not valid JSON\n";
            return kExitValidation;
        }
    }
    if (!model.empty()) config["model"] = model;
    if (run->count("--property") || !config.contains("property")) config["property"] = property;
    if (run->count("--threshold") || !config.contains("threshold"))
        config["threshold"] = threshold;
    if (!property2.empty()) config["property2"] = property2;
    if (run->count("--threshold2")) config["threshold2"] = threshold2;
    if (run->count("--combine") || !config.contains("combine")) config["combine"] = combine;
    if (run->count("--k")) config["k"] = k;
    if (run->count("--minpts")) config["minpts"] = minpts;
    if (epsilon > 0) config["epsilon"] = epsilon;
    if (neighborhood > 0) config["neighborhood"] = neighborhood;
    if (run->count("--nbins")) config["nbins"] = nbins;
    if (!out_dir.empty()) config["out"] = out_dir;
    if (run->count("--seed")) config["seed"] = seed;
    if (dumps) config["dumps"] = true;
    if (include_small) config["include_small_clusters"] = true;
    if (!family_specs.empty()) {
        config["families"] = json::array();
        for (const auto& spec : family_specs)
            config["families"].push_back(parse_family_spec(spec));
    }
    if (!config.contains("families")) config["families"] = json::array();
    try {
        apply_region_overrides(config["families"], region_specs, step_specs);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return run_command(config);
}
