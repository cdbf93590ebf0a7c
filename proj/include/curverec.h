/* curverec — feature-curve recognition on 3D meshes and point clouds.
 *
 * C interface to the shared library. All objects are opaque handles owned
 * by the library; every fallible call returns a cr_status and leaves a
 * human-readable message in cr_last_error() (thread-local).
 */
#ifndef CURVEREC_H
#define CURVEREC_H

#include <stddef.h>

#if defined(_WIN32)
#define CR_API __declspec(dllexport)
#else
#define CR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cr_status {
    CR_OK = 0,
    CR_ERROR_PARSE = 1,          /* malformed model file */
    CR_ERROR_IO = 2,             /* missing file / unwritable output */
    CR_ERROR_INVALID_ARGUMENT = 3, /* bad config, domain or layout error */
    CR_ERROR_DEGENERATE = 4,     /* degenerate geometry (cluster, fit, ...) */
    CR_ERROR_TOO_FEW_POINTS = 5,
    CR_ERROR_GRID_TOO_LARGE = 6,
    CR_ERROR_NO_DETECTIONS = 7,  /* pipeline ran but nothing was found */
    CR_ERROR_NONFINITE = 8,
    CR_ERROR_UNSUPPORTED = 9,
    CR_ERROR_INTERNAL = 10
} cr_status;

typedef struct cr_model cr_model;
typedef struct cr_report cr_report;

CR_API const char* cr_version(void);

/* Message for the most recent failure on this thread; never NULL. */
CR_API const char* cr_last_error(void);

/* --- models ------------------------------------------------------------ */

/* format: "obj", "ply", "xyz", or NULL to infer from the extension. */
CR_API cr_status cr_model_load(const char* path, const char* format, cr_model** out);
CR_API size_t cr_model_vertex_count(const cr_model* model);
CR_API size_t cr_model_face_count(const cr_model* model);
CR_API int cr_model_has_colors(const cr_model* model);
CR_API cr_status cr_model_save_obj(const cr_model* model, const char* path);
CR_API void cr_model_free(cr_model* model);

/* sRGB channels in [0,255] to CIELab. */
CR_API cr_status cr_rgb_to_cielab(double r, double g, double b,
                                  double* out_l, double* out_a, double* out_b);

/* --- catalogue ---------------------------------------------------------- */

/* JSON array of curve families: name, parameter count/names, fixed
 * constants, coordinate form, equation template. Free with cr_string_free. */
CR_API cr_status cr_catalogue_json(char** out_json);
CR_API void cr_string_free(char* s);

/* --- pipeline ----------------------------------------------------------- */

/* Runs the full recognition pipeline from a JSON configuration (the same
 * schema the CLI assembles; see README). On success *out holds the report
 * even when nothing was detected — check cr_report_detection_count. */
CR_API cr_status cr_run_pipeline(const char* config_json, cr_report** out);
CR_API const char* cr_report_json(const cr_report* report);
CR_API size_t cr_report_cluster_count(const cr_report* report);
CR_API size_t cr_report_detection_count(const cr_report* report);
CR_API void cr_report_free(cr_report* report);

#ifdef __cplusplus
}
#endif

#endif /* CURVEREC_H */
