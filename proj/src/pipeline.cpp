#include "curverec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "parallel.hpp"

namespace curverec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
    template <class Fn>
    auto run(const std::string& name, Fn&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            sink_[name] = ms_since(t0);
        } else {
            auto out = fn();
            sink_[name] = ms_since(t0);
            return out;
        }
    }

private:
    static double ms_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
    std::map<std::string, double>& sink_;
};

json region_to_json(const ParameterRegion& r) {
    return json{{"lo", r.lo}, {"hi", r.hi}, {"step", r.step}};
}

ParameterRegion region_from_json(const json& j) {
    ParameterRegion r;
    r.lo = j.at("lo").get<std::vector<double>>();
    r.hi = j.at("hi").get<std::vector<double>>();
    if (j.contains("step"))
        r.step = j.at("step").get<std::vector<double>>();
    else {
        r.step.resize(r.lo.size());
        for (std::size_t k = 0; k < r.lo.size(); ++k) r.step[k] = (r.hi[k] - r.lo[k]) / 20.0;
    }
    return r;
}

json frame_to_json(const PlaneFrame& f) {
    json rot = json::array();
    for (int r = 0; r < 3; ++r)
        rot.push_back({f.rotation(r, 0), f.rotation(r, 1), f.rotation(r, 2)});
    return json{{"centroid", {f.centroid.x(), f.centroid.y(), f.centroid.z()}},
                {"rotation", rot}};
}

json detection_to_json(const DetectedCurve& d) {
    json fixed = json::object();
    for (const auto& [k, v] : d.family.fixed) fixed[k] = v;
    return json{{"family", d.family.name},
                {"fixed", fixed},
                {"lambda", d.lambda},
                {"score", d.score},
                {"runner_up", d.runner_up},
                {"cell_index", d.cell_index},
                {"tied_cells", d.tied_cells},
                {"step", d.step},
                {"grid_cells", d.grid_cells},
                {"equation", d.equation()}};
}

std::string svg_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

} // namespace

void RunConfig::validate() const {
    if (model_path.empty()) raise(Errc::config_error, "model path is required");
    if (!(threshold > 0.0 && threshold < 1.0))
        raise(Errc::config_error, "threshold must be in (0,1)");
    if (combine != Combine::Single) {
        if (!property2) raise(Errc::config_error, "combined filtering needs a second property");
        if (!(threshold2 > 0.0 && threshold2 < 1.0))
            raise(Errc::config_error, "threshold2 must be in (0,1)");
    }
    if (families.empty()) raise(Errc::config_error, "select at least one curve family");
    if (nbins < 2) raise(Errc::config_error, "nbins must be >= 2");
    try {
        density.validate();
        for (const auto& sel : families) {
            CurveFamily fam = make_family(sel.name, sel.fixed); // name + constants must resolve
            if (sel.region) {
                if (sel.region->dims() != fam.num_params)
                    raise(Errc::config_error, sel.name + " region has wrong dimension");
                sel.region->validate();
            }
        }
    } catch (const Error& e) {
        if (e.code() == Errc::config_error) throw;
        raise(Errc::config_error, e.what());
    }
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    try {
        cfg.model_path = j.at("model").get<std::string>();
        if (j.contains("format")) {
            std::string f = j.at("format").get<std::string>();
            if (f == "obj") cfg.format = ModelFormat::Obj;
            else if (f == "ply") cfg.format = ModelFormat::Ply;
            else if (f == "xyz") cfg.format = ModelFormat::Xyz;
            else raise(Errc::config_error, "unknown format '" + f + "'");
        }
        if (j.contains("property")) cfg.property = property_from_name(j.at("property"));
        if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<double>();
        if (j.contains("combine")) {
            std::string c = j.at("combine").get<std::string>();
            if (c == "single") cfg.combine = Combine::Single;
            else if (c == "intersect") cfg.combine = Combine::Intersect;
            else if (c == "union") cfg.combine = Combine::Union;
            else raise(Errc::config_error, "unknown combine mode '" + c + "'");
        }
        if (j.contains("property2")) cfg.property2 = property_from_name(j.at("property2"));
        if (j.contains("threshold2")) cfg.threshold2 = j.at("threshold2").get<double>();
        if (j.contains("neighborhood")) cfg.neighborhood = j.at("neighborhood").get<int>();
        if (j.contains("nbins")) cfg.nbins = j.at("nbins").get<int>();
        if (j.contains("k")) cfg.density.k = j.at("k").get<int>();
        if (j.contains("minpts")) cfg.density.min_pts = j.at("minpts").get<int>();
        if (j.contains("epsilon")) cfg.density.epsilon = j.at("epsilon").get<double>();
        if (j.contains("include_small_clusters"))
            cfg.include_small_clusters = j.at("include_small_clusters").get<bool>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("dumps")) cfg.dumps = j.at("dumps").get<bool>();
        if (j.contains("overlay")) cfg.overlay = j.at("overlay").get<bool>();
        if (j.contains("plots")) cfg.plots = j.at("plots").get<bool>();
        if (j.contains("lift_samples")) cfg.lift_samples = j.at("lift_samples").get<int>();
        if (j.contains("cell_cap")) cfg.cell_cap = j.at("cell_cap").get<std::size_t>();
        const json families = j.value("families", json::array());
        for (const auto& fj : families) {
            FamilySelection sel;
            sel.name = fj.at("name").get<std::string>();
            const json fixed = fj.value("fixed", json::object());
            for (const auto& [k, v] : fixed.items()) sel.fixed[k] = v.get<int>();
            if (fj.contains("region")) sel.region = region_from_json(fj.at("region"));
            cfg.families.push_back(std::move(sel));
        }
    } catch (const json::exception& e) {
        raise(Errc::config_error, std::string("bad config: ") + e.what());
    }
    return cfg;
}

json RunConfig::to_json() const {
    json j;
    j["model"] = model_path;
    if (format) {
        switch (*format) {
        case ModelFormat::Obj: j["format"] = "obj"; break;
        case ModelFormat::Ply: j["format"] = "ply"; break;
        case ModelFormat::Xyz: j["format"] = "xyz"; break;
        }
    }
    j["property"] = property_name(property);
    j["threshold"] = threshold;
    j["combine"] = combine == Combine::Single     ? "single"
                   : combine == Combine::Intersect ? "intersect"
                                                   : "union";
    if (property2) j["property2"] = property_name(*property2);
    if (combine != Combine::Single) j["threshold2"] = threshold2;
    j["neighborhood"] = neighborhood;
    j["nbins"] = nbins;
    j["k"] = density.k;
    j["minpts"] = density.min_pts;
    if (density.epsilon > 0) j["epsilon"] = density.epsilon;
    j["include_small_clusters"] = include_small_clusters;
    j["families"] = json::array();
    for (const auto& sel : families) {
        json fj{{"name", sel.name}};
        if (!sel.fixed.empty()) fj["fixed"] = sel.fixed;
        if (sel.region) fj["region"] = region_to_json(*sel.region);
        j["families"].push_back(fj);
    }
    if (!out_dir.empty()) j["out"] = out_dir;
    j["seed"] = seed;
    j["dumps"] = dumps;
    j["overlay"] = overlay;
    j["plots"] = plots;
    j["lift_samples"] = lift_samples;
    j["cell_cap"] = cell_cap;
    return j;
}

json RunReport::to_json() const {
    json j;
    j["config"] = config_echo;
    j["model"] = {{"vertices", vertex_count}};
    j["features"] = {{"count", feature_count}};
    j["clustering"] = {{"epsilon", epsilon}, {"noise", noise_count}};
    j["clusters"] = json::array();
    for (const auto& rec : clusters) {
        json cj{{"id", rec.id},
                {"size", rec.size},
                {"small", rec.small},
                {"skipped", rec.skipped}};
        if (!rec.skipped) {
            cj["frame"] = frame_to_json(rec.frame);
            cj["residual_stats"] = {{"max", rec.residual_max}, {"mean", rec.residual_mean}};
            cj["pca_fallback"] = rec.pca_fallback;
            cj["detections"] = json::array();
            for (const auto& d : rec.detections) cj["detections"].push_back(detection_to_json(d));
        }
        if (!rec.error.empty()) cj["error"] = rec.error;
        j["clusters"].push_back(cj);
    }
    j["total_detections"] = total_detections;
    j["timings_ms"] = timings_ms;
    return j;
}

RunReport run_pipeline(const RunConfig& config) {
    config.validate();

    RunReport report;
    report.config_echo = config.to_json();
    StageTimer timer(report.timings_ms);

    SurfaceModel model = timer.run("load", [&] {
        return config.format ? load_model(config.model_path, *config.format)
                             : load_model(config.model_path);
    });
    report.vertex_count = model.vertices.size();

    // stage 1: feature points (curvature estimated once, reused per property)
    FeaturePointSet features = timer.run("features", [&] {
        FeatureOptions opts;
        opts.neighborhood = config.neighborhood;
        opts.nbins = config.nbins;

        CurvatureResult curv;
        bool have_curv = false;
        auto field_for = [&](Property prop) {
            if (prop == Property::Luminosity) return luminosity_field(model);
            if (!have_curv) {
                int nb = opts.neighborhood > 0 ? opts.neighborhood : (model.is_mesh() ? 2 : 16);
                curv = estimate_principal_curvatures(model, nb);
                have_curv = true;
            }
            return derive_property(curv.cmin, curv.cmax, prop);
        };

        ScalarField field = field_for(config.property);
        if (config.dumps && !config.out_dir.empty())
            dump_scalar_field_csv(field, (fs::path(config.out_dir) / "field.csv").string());
        FeaturePointSet x = extract_feature_points(model, field, config.threshold, config.nbins);
        if (config.combine != Combine::Single) {
            FeaturePointSet x2 = extract_feature_points(model, field_for(*config.property2),
                                                        config.threshold2, config.nbins);
            x = config.combine == Combine::Intersect ? intersect_features(x, x2)
                                                     : unite_features(x, x2);
        }
        return x;
    });
    report.feature_count = features.size();

    // stage 2: aggregation
    ClusterResult clusters = timer.run("cluster", [&] { return dbscan(features, config.density); });
    report.epsilon = clusters.epsilon;
    report.noise_count = clusters.noise_ids.size();
    if (config.dumps && !config.out_dir.empty())
        dump_labels_csv(clusters, (fs::path(config.out_dir) / "clusters.csv").string());

    // stage 3: projection + detection per cluster
    std::vector<ClusterRecord> records(clusters.clusters.size());
    std::vector<PlanarSet> planar(clusters.clusters.size());
    timer.run("detect", [&] {
        detail::parallel_for(clusters.clusters.size(), [&](std::size_t ci) {
            const Cluster& cluster = clusters.clusters[ci];
            ClusterRecord& rec = records[ci];
            rec.id = cluster.label;
            rec.size = cluster.points.size();
            rec.small = cluster.small;
            if (cluster.small && !config.include_small_clusters) {
                rec.skipped = true;
                return;
            }
            try {
                PlanarSet z = project_to_plane(cluster);
                planar[ci] = z;
                rec.frame = z.frame;
                rec.pca_fallback = z.pca_fallback;
                double sum = 0;
                for (double r : z.residuals) {
                    rec.residual_max = std::max(rec.residual_max, std::abs(r));
                    sum += std::abs(r);
                }
                rec.residual_mean = z.residuals.empty() ? 0 : sum / z.residuals.size();

                std::vector<std::pair<CurveFamily, ParameterRegion>> candidates;
                for (const auto& sel : config.families) {
                    auto fixed = sel.fixed;
                    if ((sel.name == "petal" || sel.name == "petal_stretched") &&
                        fixed.count("n") && fixed["n"] <= 0) {
                        // exponent from the cluster's extent ratio
                        double y_half = 0, x_max = 0, y_at_xmax = 0;
                        for (const Vec2& p : z.points2d) {
                            y_half = std::max(y_half, std::abs(p.y()));
                            if (std::abs(p.x()) > x_max) {
                                x_max = std::abs(p.x());
                                y_at_xmax = std::abs(p.y());
                            }
                        }
                        fixed["n"] = estimate_petal_exponent(y_half, y_at_xmax);
                    }
                    CurveFamily fam = make_family(sel.name, fixed);
                    ParameterRegion region = sel.region ? *sel.region : suggest_region(fam, z);
                    candidates.emplace_back(std::move(fam), std::move(region));
                }
                DetectOptions dopts;
                dopts.cell_cap = config.cell_cap;
                rec.detections = compete_families(z, candidates);
            } catch (const Error& e) {
                rec.error = e.what();
            }
        }, /*grain=*/1);
    });
    report.clusters = std::move(records);
    for (const auto& rec : report.clusters)
        report.total_detections += static_cast<int>(rec.detections.size());

    // artifacts
    if (!config.out_dir.empty()) {
        timer.run("emit", [&] {
            fs::create_directories(config.out_dir);
            if (config.overlay) {
                std::vector<DetectedCurve> winners;
                for (const auto& rec : report.clusters)
                    if (!rec.detections.empty()) winners.push_back(rec.detections.front());
                if (!winners.empty())
                    emit_overlay(model, winners,
                                 (fs::path(config.out_dir) / "overlay.obj").string(),
                                 config.lift_samples);
            }
            if (config.plots) {
                for (std::size_t ci = 0; ci < report.clusters.size(); ++ci) {
                    const auto& rec = report.clusters[ci];
                    if (rec.skipped) continue;
                    std::string path =
                        (fs::path(config.out_dir) / ("cluster_" + std::to_string(rec.id) + ".svg"))
                            .string();
                    emit_cluster_plot(planar[ci],
                                      rec.detections.empty() ? nullptr : &rec.detections.front(),
                                      path);
                }
            }
        });
        json j = report.to_json();
        std::ofstream out(fs::path(config.out_dir) / "report.json");
        if (!out) raise(Errc::io_error, "cannot write report into '" + config.out_dir + "'");
        out << j.dump(2) << "\n";
    }
    return report;
}

void emit_overlay(const SurfaceModel& model, const std::vector<DetectedCurve>& curves,
                  const std::string& path, int samples) {
    std::vector<std::vector<Vec3>> polylines;
    for (const auto& c : curves) {
        try {
            polylines.push_back(lift_to_3d(c, samples));
        } catch (const Error& e) {
            if (e.code() != Errc::empty_locus) throw;
        }
    }
    save_obj(model, path, polylines);
}

void emit_cluster_plot(const PlanarSet& z, const DetectedCurve* curve, const std::string& path) {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    auto grow = [&](const Vec2& p) {
        if (first) {
            xmin = xmax = p.x();
            ymin = ymax = p.y();
            first = false;
        } else {
            xmin = std::min(xmin, p.x());
            xmax = std::max(xmax, p.x());
            ymin = std::min(ymin, p.y());
            ymax = std::max(ymax, p.y());
        }
    };
    for (const Vec2& p : z.points2d) grow(p);

    std::vector<Vec2> locus;
    if (curve) {
        try {
            locus = trace_locus(curve->family, curve->lambda, 512);
        } catch (const Error&) {
            locus.clear();
        }
        for (const Vec2& p : locus) grow(p);
    }
    if (first) {
        xmin = ymin = -1;
        xmax = ymax = 1;
    }

    const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
    const double pad = 0.05 * span;
    const double scale = 560.0 / (span + 2 * pad);
    auto sx = [&](double x) { return (x - xmin + pad) * scale + 20.0; };
    auto sy = [&](double y) { return 580.0 - ((y - ymin + pad) * scale + 20.0); }; // y up

    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) raise(Errc::io_error, "cannot write '" + path + "'");
    std::fprintf(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    std::fprintf(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
                 "viewBox=\"0 0 600 600\">\n");
    std::fprintf(out, "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n");
    for (const Vec2& p : z.points2d)
        std::fprintf(out, "<circle cx=\"%s\" cy=\"%s\" r=\"1.5\" fill=\"#336699\"/>\n",
                     svg_coord(sx(p.x())).c_str(), svg_coord(sy(p.y())).c_str());
    for (const Vec2& p : locus)
        std::fprintf(out, "<circle cx=\"%s\" cy=\"%s\" r=\"1\" fill=\"#cc2222\"/>\n",
                     svg_coord(sx(p.x())).c_str(), svg_coord(sy(p.y())).c_str());
    if (curve && locus.empty())
        std::fprintf(out,
                     "<text x=\"30\" y=\"40\" fill=\"#cc2222\">no curve locus in window</text>\n");
    if (curve)
        std::fprintf(out, "<text x=\"30\" y=\"580\" fill=\"#333333\">%s</text>\n",
                     curve->equation().c_str());
    std::fprintf(out, "</svg>\n");
    std::fclose(out);
}

} // namespace curverec
