#include "curverec/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace curverec {

namespace {

std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& msg) {
    raise(Errc::parse_error, path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok, const std::string& path, std::size_t line) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    // result_out_of_range covers subnormals, which are fine to keep
    if (end != tok.data() + tok.size() ||
        (ec != std::errc{} && ec != std::errc::result_out_of_range))
        parse_fail(path, line, "bad number '" + tok + "'");
    return v;
}

// OBJ face corners may carry /vt/vn suffixes; only the vertex index matters here.
int obj_vertex_index(const std::string& tok, std::size_t vcount, const std::string& path,
                     std::size_t line) {
    std::string head = tok.substr(0, tok.find('/'));
    long idx = 0;
    try {
        idx = std::stol(head);
    } catch (const std::exception&) {
        parse_fail(path, line, "bad face index '" + tok + "'");
    }
    if (idx < 0) idx = static_cast<long>(vcount) + idx + 1; // relative indexing
    if (idx < 1 || idx > static_cast<long>(vcount))
        raise(Errc::index_error,
              path + ":" + std::to_string(line) + ": face references missing vertex " + head);
    return static_cast<int>(idx - 1);
}

SurfaceModel load_obj(std::istream& in, const std::string& path) {
    SurfaceModel model;
    bool any_color = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "v") {
            if (toks.size() < 4) parse_fail(path, lineno, "vertex needs 3 coordinates");
            Vec3 v(to_double(toks[1], path, lineno), to_double(toks[2], path, lineno),
                   to_double(toks[3], path, lineno));
            model.vertices.push_back(v);
            if (toks.size() >= 7) {
                // vertex-colour extension: r g b in [0,1]
                RgbColor c{to_double(toks[4], path, lineno) * 255.0,
                           to_double(toks[5], path, lineno) * 255.0,
                           to_double(toks[6], path, lineno) * 255.0};
                model.colors.resize(model.vertices.size() - 1);
                model.colors.push_back(c);
                any_color = true;
            } else if (any_color) {
                model.colors.push_back(RgbColor{});
            }
        } else if (toks[0] == "f") {
            if (toks.size() < 4) parse_fail(path, lineno, "face needs at least 3 corners");
            std::vector<int> idx;
            for (std::size_t i = 1; i < toks.size(); ++i)
                idx.push_back(obj_vertex_index(toks[i], model.vertices.size(), path, lineno));
            for (std::size_t i = 1; i + 1 < idx.size(); ++i) // fan triangulation
                model.faces.push_back({idx[0], idx[i], idx[i + 1]});
        }
        // vn/vt/usemtl/l/... are ignored
    }
    if (!any_color) model.colors.clear();
    return model;
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
};

SurfaceModel load_ply(std::istream& in, const std::string& path) {
    std::string line;
    std::size_t lineno = 0;

    auto next_line = [&]() -> std::string {
        if (!std::getline(in, line)) parse_fail(path, lineno, "unexpected end of file");
        ++lineno;
        return line;
    };

    if (split_ws(next_line()) != std::vector<std::string>{"ply"})
        parse_fail(path, lineno, "missing ply magic");

    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<PlyProperty> props;
    };
    std::vector<Element> elements;
    bool ascii = false;
    while (true) {
        auto toks = split_ws(next_line());
        if (toks.empty() || toks[0] == "comment") continue;
        if (toks[0] == "format") {
            if (toks.size() < 2 || toks[1] != "ascii")
                parse_fail(path, lineno, "only ascii PLY is supported");
            ascii = true;
        } else if (toks[0] == "element") {
            if (toks.size() < 3) parse_fail(path, lineno, "malformed element");
            elements.push_back({toks[1], static_cast<std::size_t>(std::stoul(toks[2])), {}});
        } else if (toks[0] == "property") {
            if (elements.empty() || toks.size() < 3) parse_fail(path, lineno, "stray property");
            if (toks[1] == "list")
                elements.back().props.push_back({toks.back(), true});
            else
                elements.back().props.push_back({toks.back(), false});
        } else if (toks[0] == "end_header") {
            break;
        } else {
            parse_fail(path, lineno, "unknown header record '" + toks[0] + "'");
        }
    }
    if (!ascii) parse_fail(path, lineno, "missing format line");

    SurfaceModel model;
    for (const auto& elem : elements) {
        if (elem.name == "vertex") {
            int xi = -1, yi = -1, zi = -1, ri = -1, gi = -1, bi = -1;
            for (std::size_t i = 0; i < elem.props.size(); ++i) {
                const auto& n = elem.props[i].name;
                int ii = static_cast<int>(i);
                if (n == "x") xi = ii;
                else if (n == "y") yi = ii;
                else if (n == "z") zi = ii;
                else if (n == "red") ri = ii;
                else if (n == "green") gi = ii;
                else if (n == "blue") bi = ii;
            }
            if (xi < 0 || yi < 0 || zi < 0) parse_fail(path, lineno, "vertex element lacks x/y/z");
            bool has_rgb = ri >= 0 && gi >= 0 && bi >= 0;
            model.vertices.reserve(elem.count);
            if (has_rgb) model.colors.reserve(elem.count);
            for (std::size_t v = 0; v < elem.count; ++v) {
                auto toks = split_ws(next_line());
                if (toks.size() < elem.props.size())
                    parse_fail(path, lineno, "short vertex row");
                model.vertices.emplace_back(to_double(toks[xi], path, lineno),
                                            to_double(toks[yi], path, lineno),
                                            to_double(toks[zi], path, lineno));
                if (has_rgb)
                    model.colors.push_back({to_double(toks[ri], path, lineno),
                                            to_double(toks[gi], path, lineno),
                                            to_double(toks[bi], path, lineno)});
            }
        } else if (elem.name == "face") {
            for (std::size_t f = 0; f < elem.count; ++f) {
                auto toks = split_ws(next_line());
                if (toks.empty()) parse_fail(path, lineno, "empty face row");
                std::size_t n = static_cast<std::size_t>(to_double(toks[0], path, lineno));
                if (toks.size() < n + 1) parse_fail(path, lineno, "short face row");
                std::vector<int> idx;
                for (std::size_t i = 1; i <= n; ++i) {
                    long raw = static_cast<long>(to_double(toks[i], path, lineno));
                    if (raw < 0 || raw >= static_cast<long>(model.vertices.size()))
                        raise(Errc::index_error, path + ":" + std::to_string(lineno) +
                                                     ": face references missing vertex");
                    idx.push_back(static_cast<int>(raw));
                }
                for (std::size_t i = 1; i + 1 < idx.size(); ++i)
                    model.faces.push_back({idx[0], idx[i], idx[i + 1]});
            }
        } else {
            for (std::size_t r = 0; r < elem.count; ++r) next_line(); // skip unknown elements
        }
    }
    return model;
}

SurfaceModel load_xyz(std::istream& in, const std::string& path) {
    SurfaceModel model;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks.size() < 3) parse_fail(path, lineno, "point needs 3 coordinates");
        model.vertices.emplace_back(to_double(toks[0], path, lineno),
                                    to_double(toks[1], path, lineno),
                                    to_double(toks[2], path, lineno));
    }
    return model;
}

double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t)
                                     : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

} // namespace

void SurfaceModel::validate() const {
    const int n = static_cast<int>(vertices.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& tri = faces[f];
        for (int k = 0; k < 3; ++k)
            if (tri[k] < 0 || tri[k] >= n)
                raise(Errc::index_error, "face " + std::to_string(f) + " references missing vertex");
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            raise(Errc::index_error, "face " + std::to_string(f) + " is degenerate");
    }
    if (!colors.empty() && colors.size() != vertices.size())
        raise(Errc::length_mismatch, "colors must have one entry per vertex");
}

ModelFormat format_from_path(const std::string& path) {
    std::string ext = lower_ext(path);
    if (ext == "obj") return ModelFormat::Obj;
    if (ext == "ply") return ModelFormat::Ply;
    if (ext == "xyz" || ext == "pts" || ext == "txt") return ModelFormat::Xyz;
    raise(Errc::domain_error, "cannot infer model format from '" + path + "'");
}

SurfaceModel load_model(const std::string& path, ModelFormat format) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open '" + path + "'");
    SurfaceModel model;
    switch (format) {
    case ModelFormat::Obj: model = load_obj(in, path); break;
    case ModelFormat::Ply: model = load_ply(in, path); break;
    case ModelFormat::Xyz: model = load_xyz(in, path); break;
    }
    if (model.vertices.empty()) raise(Errc::parse_error, path + ": no vertices");
    model.validate();
    return model;
}

SurfaceModel load_model(const std::string& path) {
    return load_model(path, format_from_path(path));
}

void save_obj(const SurfaceModel& model, const std::string& path,
              const std::vector<std::vector<Vec3>>& polylines) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) raise(Errc::io_error, "cannot write '" + path + "'");
    for (std::size_t i = 0; i < model.vertices.size(); ++i) {
        const Vec3& v = model.vertices[i];
        if (model.has_colors()) {
            const RgbColor& c = model.colors[i];
            std::fprintf(out, "v %.17g %.17g %.17g %.17g %.17g %.17g\n", v.x(), v.y(), v.z(),
                         c.r / 255.0, c.g / 255.0, c.b / 255.0);
        } else {
            std::fprintf(out, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        }
    }
    for (const auto& f : model.faces)
        std::fprintf(out, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    std::size_t base = model.vertices.size();
    for (const auto& line : polylines) {
        if (line.size() < 2) continue;
        for (const Vec3& v : line)
            std::fprintf(out, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        std::fprintf(out, "l");
        for (std::size_t i = 0; i < line.size(); ++i)
            std::fprintf(out, " %zu", base + i + 1);
        std::fprintf(out, "\n");
        base += line.size();
    }
    std::fclose(out);
}

LabColor rgb_to_cielab(const RgbColor& rgb) {
    for (double c : {rgb.r, rgb.g, rgb.b})
        if (!(c >= 0.0 && c <= 255.0))
            raise(Errc::domain_error, "RGB channel out of [0,255]");

    double r = srgb_to_linear(rgb.r / 255.0);
    double g = srgb_to_linear(rgb.g / 255.0);
    double b = srgb_to_linear(rgb.b / 255.0);

    // sRGB D65 reference white
    double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    constexpr double Xn = 0.95047, Yn = 1.0, Zn = 1.08883;
    double fx = lab_f(X / Xn), fy = lab_f(Y / Yn), fz = lab_f(Z / Zn);

    LabColor lab;
    lab.L = 116.0 * fy - 16.0;
    lab.a = 500.0 * (fx - fy);
    lab.b = 200.0 * (fy - fz);
    lab.L = std::clamp(lab.L, 0.0, 100.0);
    return lab;
}

} // namespace curverec
