#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curverec/model_io.hpp"

namespace curverec {

enum class Property { Cmin, Cmax, Cmean, CGauss, Ctot, Luminosity };

const char* property_name(Property p);
Property property_from_name(const std::string& name); // throws DomainError

/// One real value per model vertex.
struct ScalarField {
    Property property = Property::Cmax;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

struct Histogram {
    std::vector<double> bin_edges;      // ascending, size = bins + 1
    std::vector<std::size_t> counts;    // size = bins
    std::size_t total = 0;

    std::size_t bins() const { return counts.size(); }
    double bin_width() const { return bin_edges.size() > 1 ? bin_edges[1] - bin_edges[0] : 0.0; }
};

/// Vertices whose property survived the percentile filter.
struct FeaturePointSet {
    std::vector<Vec3> points;
    std::vector<int> vertex_ids; // strictly increasing indices into the source model

    std::size_t size() const { return points.size(); }
};

/// Principal curvature fields plus a per-vertex flag marking neighbourhoods
/// too degenerate to fit (those vertices get zero curvature).
struct CurvatureResult {
    ScalarField cmin;
    ScalarField cmax;
    std::vector<std::uint8_t> degenerate;
    std::size_t degenerate_count() const;
};

struct FeatureOptions {
    int neighborhood = 0; // 0 = default: 2 rings (mesh) / 16 neighbours (cloud)
    int nbins = 256;
};

/// Per-vertex principal curvatures from a local quadric fit in a
/// normal-aligned frame. `neighborhood` is the ring depth for meshes and the
/// neighbour count for point clouds (>= 6). Convex regions (bulging along
/// the outward normal) get positive curvature.
CurvatureResult estimate_principal_curvatures(const SurfaceModel& model, int neighborhood);

/// Cmean = (Cmin+Cmax)/2, CGauss = Cmin*Cmax, Ctot = |Cmin|+|Cmax|.
ScalarField derive_property(const ScalarField& cmin, const ScalarField& cmax, Property prop);

/// CIELab L channel of the model colours. Throws MissingColor.
ScalarField luminosity_field(const SurfaceModel& model);

/// Uniform-width bins spanning [min, max] of the values. A constant field
/// yields a single bin widened by one ulp.
Histogram build_histogram(const ScalarField& field, int nbins);

/// Cut value: min edge + k * width, where k is the smallest 1-based bin
/// index whose cumulative count reaches p * total.
double filter_threshold(const Histogram& h, double p);

/// Full extraction: property field, histogram, percentile cut, selection of
/// vertices with field value strictly above the cut. Cmin and Luminosity are
/// low-salient and get negated before filtering.
FeaturePointSet extract_feature_points(const SurfaceModel& model, Property prop, double p,
                                       const FeatureOptions& opts = {});

/// Same, reusing already-computed curvatures (the pipeline estimates once).
FeaturePointSet extract_feature_points(const SurfaceModel& model, const ScalarField& field,
                                       double p, int nbins = 256);

FeaturePointSet intersect_features(const FeaturePointSet& a, const FeaturePointSet& b);
FeaturePointSet unite_features(const FeaturePointSet& a, const FeaturePointSet& b);

/// Debug dump, one "vertex_id,value" row per vertex.
void dump_scalar_field_csv(const ScalarField& field, const std::string& path);

} // namespace curverec
