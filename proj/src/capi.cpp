#include "curverec.h"

#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "curverec/pipeline.hpp"

using nlohmann::json;

struct cr_model {
    curverec::SurfaceModel model;
};

struct cr_report {
    curverec::RunReport report;
    std::string json_text;
    std::size_t detections = 0;
};

namespace {

thread_local std::string g_last_error;

cr_status status_from(const curverec::Error& e) {
    using curverec::Errc;
    switch (e.code()) {
    case Errc::parse_error:
    case Errc::index_error: return CR_ERROR_PARSE;
    case Errc::io_error: return CR_ERROR_IO;
    case Errc::domain_error:
    case Errc::length_mismatch:
    case Errc::empty_field:
    case Errc::missing_color:
    case Errc::ratio_out_of_range:
    case Errc::layout_mismatch:
    case Errc::config_error: return CR_ERROR_INVALID_ARGUMENT;
    case Errc::degenerate:
    case Errc::singular_fit: return CR_ERROR_DEGENERATE;
    case Errc::too_few_points: return CR_ERROR_TOO_FEW_POINTS;
    case Errc::grid_too_large: return CR_ERROR_GRID_TOO_LARGE;
    case Errc::no_votes:
    case Errc::all_failed:
    case Errc::empty_locus: return CR_ERROR_NO_DETECTIONS;
    case Errc::nonfinite_evaluation: return CR_ERROR_NONFINITE;
    case Errc::unsupported_family: return CR_ERROR_UNSUPPORTED;
    }
    return CR_ERROR_INTERNAL;
}

template <class Fn>
cr_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const curverec::Error& e) {
        g_last_error = e.what();
        return status_from(e);
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CR_ERROR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CR_ERROR_INTERNAL;
    }
}

} // namespace

extern "C" {

const char* cr_version(void) { return "0.1.0"; }

const char* cr_last_error(void) { return g_last_error.c_str(); }

cr_status cr_model_load(const char* path, const char* format, cr_model** out) {
    if (!path || !out) {
        g_last_error = "path and out must not be NULL";
        return CR_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> cr_status {
        curverec::SurfaceModel model;
        if (format) {
            std::string f = format;
            curverec::ModelFormat mf;
            if (f == "obj") mf = curverec::ModelFormat::Obj;
            else if (f == "ply") mf = curverec::ModelFormat::Ply;
            else if (f == "xyz") mf = curverec::ModelFormat::Xyz;
            else {
                g_last_error = "unknown format '" + f + "'";
                return CR_ERROR_INVALID_ARGUMENT;
            }
            model = curverec::load_model(path, mf);
        } else {
            model = curverec::load_model(path);
        }
        *out = new cr_model{std::move(model)};
        return CR_OK;
    });
}

size_t cr_model_vertex_count(const cr_model* model) {
    return model ? model->model.vertices.size() : 0;
}

size_t cr_model_face_count(const cr_model* model) {
    return model ? model->model.faces.size() : 0;
}

int cr_model_has_colors(const cr_model* model) {
    return model && model->model.has_colors() ? 1 : 0;
}

cr_status cr_model_save_obj(const cr_model* model, const char* path) {
    if (!model || !path) {
        g_last_error = "model and path must not be NULL";
        return CR_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> cr_status {
        curverec::save_obj(model->model, path);
        return CR_OK;
    });
}

void cr_model_free(cr_model* model) { delete model; }

cr_status cr_rgb_to_cielab(double r, double g, double b, double* out_l, double* out_a,
                           double* out_b) {
    if (!out_l || !out_a || !out_b) {
        g_last_error = "output pointers must not be NULL";
        return CR_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> cr_status {
        curverec::LabColor lab = curverec::rgb_to_cielab({r, g, b});
        *out_l = lab.L;
        *out_a = lab.a;
        *out_b = lab.b;
        return CR_OK;
    });
}

cr_status cr_catalogue_json(char** out_json) {
    if (!out_json) {
        g_last_error = "out_json must not be NULL";
        return CR_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> cr_status {
        json arr = json::array();
        for (const auto& info : curverec::catalogue_info()) {
            arr.push_back({{"name", info.name},
                           {"params", info.num_params},
                           {"param_names", info.param_names},
                           {"fixed", info.fixed_names},
                           {"form", info.form == curverec::CurveForm::Polar ? "polar" : "cartesian"},
                           {"equation", info.equation_template}});
        }
        std::string text = arr.dump(2);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out_json = buf;
        return CR_OK;
    });
}

void cr_string_free(char* s) { delete[] s; }

cr_status cr_run_pipeline(const char* config_json, cr_report** out) {
    if (!config_json || !out) {
        g_last_error = "config and out must not be NULL";
        return CR_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&]() -> cr_status {
        json j = json::parse(config_json, nullptr, false);
        if (j.is_discarded()) {
            g_last_error = "config is not valid JSON";
            return CR_ERROR_INVALID_ARGUMENT;
        }
        curverec::RunConfig cfg = curverec::RunConfig::from_json(j);
        curverec::RunReport rep = curverec::run_pipeline(cfg);
        auto* handle = new cr_report;
        handle->detections = static_cast<std::size_t>(rep.total_detections);
        handle->json_text = rep.to_json().dump(2);
        handle->report = std::move(rep);
        *out = handle;
        return CR_OK;
    });
}

const char* cr_report_json(const cr_report* report) {
    return report ? report->json_text.c_str() : "";
}

size_t cr_report_cluster_count(const cr_report* report) {
    return report ? report->report.clusters.size() : 0;
}

size_t cr_report_detection_count(const cr_report* report) {
    return report ? report->detections : 0;
}

void cr_report_free(cr_report* report) { delete report; }

} // extern "C"
