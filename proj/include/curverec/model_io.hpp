#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "curverec/error.hpp"
#include "curverec/geometry.hpp"

namespace curverec {

enum class ModelFormat { Obj, Ply, Xyz };

/// Per-vertex colour, channels in [0, 255].
struct RgbColor {
    double r = 0, g = 0, b = 0;
};

/// CIELab colour; L in [0, 100].
struct LabColor {
    double L = 0, a = 0, b = 0;
};

/// A 3D model: triangle mesh (faces present) or point cloud (faces empty),
/// with optional per-vertex colour.
struct SurfaceModel {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<RgbColor> colors;

    bool is_mesh() const { return !faces.empty(); }
    bool has_colors() const { return !colors.empty(); }

    /// Throws IndexError for out-of-range or degenerate faces and
    /// LengthMismatch when colours do not pair with vertices.
    void validate() const;
};

ModelFormat format_from_path(const std::string& path);

SurfaceModel load_model(const std::string& path, ModelFormat format);
SurfaceModel load_model(const std::string& path); // format inferred from extension

/// Writes an ASCII OBJ. Vertex coordinates use round-trip precision.
/// Optional polylines are appended as extra vertices plus "l" records.
void save_obj(const SurfaceModel& model, const std::string& path,
              const std::vector<std::vector<Vec3>>& polylines = {});

/// sRGB (D65) to CIELab. Channels must be in [0, 255].
LabColor rgb_to_cielab(const RgbColor& rgb);

} // namespace curverec
