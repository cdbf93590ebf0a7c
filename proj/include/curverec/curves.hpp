#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curverec/geometry.hpp"
#include "curverec/plane.hpp"

namespace curverec {

enum class CurveForm { Cartesian, Polar };

/// An implicit plane-curve family F(point; lambda) = 0 with analytic
/// derivatives in the parameters. Cartesian families take points (x, y);
/// polar families take (rho, theta). grad fills t values, hess fills t*t
/// values row-major.
struct CurveFamily {
    std::string name;
    CurveForm form = CurveForm::Cartesian;
    int num_params = 0;
    std::vector<std::string> param_names;
    std::vector<std::pair<std::string, int>> fixed; // non-searched integer constants

    std::function<double(const Vec2&, std::span<const double>)> residual;
    std::function<void(const Vec2&, std::span<const double>, std::span<double>)> grad;
    std::function<void(const Vec2&, std::span<const double>, std::span<double>)> hess;

    /// Exact locus samples in Cartesian (x, y), used by tests and plots.
    std::function<std::vector<Vec2>(std::span<const double>, int)> sample;

    /// rho(theta) for polar families that are graphs over theta.
    std::function<double(double, std::span<const double>)> polar_rho;

    /// Printable implicit equation with parameters substituted.
    std::function<std::string(std::span<const double>)> equation;
};

struct ParameterRegion {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> step;

    int dims() const { return static_cast<int>(lo.size()); }
    void validate() const; // throws DomainError on malformed bounds/steps
};

/// Analytic extent of a curve: an axis-aligned rectangle for Cartesian
/// families, concentric radii for the polar ones.
struct BoundingShape {
    enum class Kind { Box, Annulus } kind = Kind::Box;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0; // Box
    double r_inner = 0, r_outer = 0;               // Annulus
};

// catalogue constructors
CurveFamily make_line();                   // y - a*x - b,        lambda = (a, b)
CurveFamily make_circle();                 // (x-A)^2+(y-B)^2-R^2, lambda = (A, B, R)
CurveFamily make_ellipse();                // x^2/a^2+y^2/b^2-1,  lambda = (a, b)
CurveFamily make_lamet(int m);             // b*x^m + a^m*y^m - a^m*b, even m >= 2
CurveFamily make_citrus(bool stretched);   // a^4[c^2]y^2 + (x-a/2)^3(x+a/2)^3
CurveFamily make_spiral(bool generalized); // rho - a - b*theta [- c*theta^2]
CurveFamily make_m_convexities(int m);     // rho*(1 + b*cos(m*theta)) - a
CurveFamily make_petal(int n, bool stretched); // (cx^2+y^2)^(2n+1) - a[(cx^2+y^2)^n - c^n x^(2n)]^2

// compound curves: products of factor residuals over one shared parameter vector
CurveFamily make_compound(std::vector<CurveFamily> factors, const std::string& name = "");
CurveFamily make_citrus_circle();          // citrus times circle of radius a/8, lambda = (a)
CurveFamily make_citrus_line();            // y times citrus,                    lambda = (a)
CurveFamily make_convexities_circle(int m = 5); // convexity times circle rho=r, lambda = (a, b, r)
CurveFamily make_triple_ellipse();         // three coupled ellipses,            lambda = (a, b)

/// Builds a catalogue family by name ("circle", "petal", ...) with fixed
/// constants such as {"m",4}, {"n",50}, {"stretched",1}, {"generalized",1}.
CurveFamily make_family(const std::string& name, const std::map<std::string, int>& fixed = {});

struct FamilyInfo {
    std::string name;
    int num_params = 0;
    CurveForm form = CurveForm::Cartesian;
    std::vector<std::string> param_names;
    std::vector<std::string> fixed_names; // accepted fixed-constant keys
    std::string equation_template;
};

/// Descriptors for every family constructor, for the catalogue listing.
std::vector<FamilyInfo> catalogue_info();

/// Smallest exponent n >= 1 whose bounding-box height ratio
/// (2n/(2n+1)) * (1 - (2n+1)^(-1/n))^(1/2) best matches yB/yA.
/// Results at n_max set *capped when provided. Throws RatioOutOfRange.
int estimate_petal_exponent(double yA, double yB, int n_max = 200, bool* capped = nullptr);

/// Analytic bounding box / annulus for the given parameters; spirals report
/// the first-turning annulus. Falls back to dense locus sampling where no
/// closed form applies; throws UnsupportedFamily for unbounded loci.
BoundingShape bounding_box(const CurveFamily& family, std::span<const double> lambda);

/// Data-driven parameter region for a projected cluster; steps default to
/// 1/20 of each bound width. Throws TooFewPoints.
ParameterRegion suggest_region(const CurveFamily& family, const PlanarSet& z);

} // namespace curverec
