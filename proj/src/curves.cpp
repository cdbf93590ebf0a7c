#include "curverec/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "curverec/error.hpp"

namespace curverec {

namespace {

using std::numbers::pi;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<Vec2> sweep(int count, const std::function<Vec2(double)>& at, double t0 = 0.0,
                        double t1 = 2.0 * pi, bool closed = true) {
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(count));
    const double span = t1 - t0;
    const int denom = closed ? count : count - 1;
    for (int i = 0; i < count; ++i)
        out.push_back(at(t0 + span * static_cast<double>(i) / denom));
    return out;
}

void check_params(const CurveFamily& f, std::span<const double> lambda) {
    if (static_cast<int>(lambda.size()) != f.num_params)
        raise(Errc::layout_mismatch, f.name + " expects " + std::to_string(f.num_params) +
                                         " parameters, got " + std::to_string(lambda.size()));
}

// 2D stats used by the region heuristics
struct PlanarStats {
    double xmin, xmax, ymin, ymax;
    double x_half, y_half, half_diag;
    double rho_min, rho_max;
    double x_at_max_abs_x_y; // |y| at the point with the largest |x|
};

PlanarStats planar_stats(const PlanarSet& z) {
    PlanarStats s{};
    s.xmin = s.ymin = std::numeric_limits<double>::infinity();
    s.xmax = s.ymax = -std::numeric_limits<double>::infinity();
    s.rho_min = std::numeric_limits<double>::infinity();
    s.rho_max = 0;
    double best_abs_x = -1;
    for (const Vec2& p : z.points2d) {
        s.xmin = std::min(s.xmin, p.x());
        s.xmax = std::max(s.xmax, p.x());
        s.ymin = std::min(s.ymin, p.y());
        s.ymax = std::max(s.ymax, p.y());
        double rho = p.norm();
        s.rho_min = std::min(s.rho_min, rho);
        s.rho_max = std::max(s.rho_max, rho);
        if (std::abs(p.x()) > best_abs_x) {
            best_abs_x = std::abs(p.x());
            s.x_at_max_abs_x_y = std::abs(p.y());
        }
    }
    s.x_half = (s.xmax - s.xmin) / 2.0;
    s.y_half = (s.ymax - s.ymin) / 2.0;
    s.half_diag = std::hypot(s.x_half, s.y_half) <= 0 ? 1e-9 : std::hypot(s.x_half, s.y_half);
    return s;
}

ParameterRegion with_default_steps(std::vector<double> lo, std::vector<double> hi) {
    ParameterRegion r;
    r.lo = std::move(lo);
    r.hi = std::move(hi);
    r.step.resize(r.lo.size());
    for (std::size_t k = 0; k < r.lo.size(); ++k) r.step[k] = (r.hi[k] - r.lo[k]) / 20.0;
    return r;
}

} // namespace

void ParameterRegion::validate() const {
    if (lo.empty() || lo.size() != hi.size() || lo.size() != step.size())
        raise(Errc::domain_error, "region bounds/steps have inconsistent lengths");
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (!(lo[k] < hi[k]))
            raise(Errc::domain_error, "region axis " + std::to_string(k) + " has lo >= hi");
        // a step wider than the axis is allowed and collapses it to one sample
        if (!(step[k] > 0.0) || !std::isfinite(step[k]))
            raise(Errc::domain_error, "region axis " + std::to_string(k) + " has a bad step");
    }
}

CurveFamily make_line() {
    CurveFamily f;
    f.name = "line";
    f.form = CurveForm::Cartesian;
    f.num_params = 2;
    f.param_names = {"a", "b"};
    f.residual = [](const Vec2& p, std::span<const double> l) {
        return p.y() - l[0] * p.x() - l[1];
    };
    f.grad = [](const Vec2& p, std::span<const double>, std::span<double> g) {
        g[0] = -p.x();
        g[1] = -1.0;
    };
    f.hess = [](const Vec2&, std::span<const double>, std::span<double> h) {
        std::fill(h.begin(), h.end(), 0.0);
    };
    f.sample = [](std::span<const double> l, int count) {
        double a = l[0], b = l[1];
        return sweep(count, [&](double t) { return Vec2(t, a * t + b); }, -2.0, 2.0, false);
    };
    f.equation = [](std::span<const double> l) {
        return "y - " + fmt(l[0]) + "*x - " + fmt(l[1]) + " = 0";
    };
    return f;
}

CurveFamily make_circle() {
    CurveFamily f;
    f.name = "circle";
    f.form = CurveForm::Cartesian;
    f.num_params = 3;
    f.param_names = {"A", "B", "R"};
    f.residual = [](const Vec2& p, std::span<const double> l) {
        double dx = p.x() - l[0], dy = p.y() - l[1];
        return dx * dx + dy * dy - l[2] * l[2];
    };
    f.grad = [](const Vec2& p, std::span<const double> l, std::span<double> g) {
        g[0] = -2.0 * (p.x() - l[0]);
        g[1] = -2.0 * (p.y() - l[1]);
        g[2] = -2.0 * l[2];
    };
    f.hess = [](const Vec2&, std::span<const double>, std::span<double> h) {
        std::fill(h.begin(), h.end(), 0.0);
        h[0] = 2.0;
        h[4] = 2.0;
        h[8] = -2.0;
    };
    f.sample = [](std::span<const double> l, int count) {
        double A = l[0], B = l[1], R = l[2];
        return sweep(count, [&](double t) { return Vec2(A + R * std::cos(t), B + R * std::sin(t)); });
    };
    f.equation = [](std::span<const double> l) {
        return "(x - " + fmt(l[0]) + ")^2 + (y - " + fmt(l[1]) + ")^2 - " + fmt(l[2] * l[2]) +
               " = 0";
    };
    return f;
}

CurveFamily make_ellipse() {
    CurveFamily f;
    f.name = "ellipse";
    f.form = CurveForm::Cartesian;
    f.num_params = 2;
    f.param_names = {"a", "b"};
    f.residual = [](const Vec2& p, std::span<const double> l) {
        return p.x() * p.x() / (l[0] * l[0]) + p.y() * p.y() / (l[1] * l[1]) - 1.0;
    };
    f.grad = [](const Vec2& p, std::span<const double> l, std::span<double> g) {
        g[0] = -2.0 * p.x() * p.x() / (l[0] * l[0] * l[0]);
        g[1] = -2.0 * p.y() * p.y() / (l[1] * l[1] * l[1]);
    };
    f.hess = [](const Vec2& p, std::span<const double> l, std::span<double> h) {
        h[0] = 6.0 * p.x() * p.x() / (l[0] * l[0] * l[0] * l[0]);
        h[1] = h[2] = 0.0;
        h[3] = 6.0 * p.y() * p.y() / (l[1] * l[1] * l[1] * l[1]);
    };
    f.sample = [](std::span<const double> l, int count) {
        double a = l[0], b = l[1];
        return sweep(count, [&](double t) { return Vec2(a * std::cos(t), b * std::sin(t)); });
    };
    f.equation = [](std::span<const double> l) {
        return "x^2/" + fmt(l[0] * l[0]) + " + y^2/" + fmt(l[1] * l[1]) + " - 1 = 0";
    };
    return f;
}

CurveFamily make_lamet(int m) {
    if (m < 2 || m % 2 != 0) raise(Errc::domain_error, "lamet degree m must be even and >= 2");
    CurveFamily f;
    f.name = "lamet";
    f.form = CurveForm::Cartesian;
    f.num_params = 2;
    f.param_names = {"a", "b"};
    f.fixed = {{"m", m}};
    f.residual = [m](const Vec2& p, std::span<const double> l) {
        double am = std::pow(l[0], m);
        return l[1] * std::pow(p.x(), m) + am * std::pow(p.y(), m) - am * l[1];
    };
    f.grad = [m](const Vec2& p, std::span<const double> l, std::span<double> g) {
        double am1 = std::pow(l[0], m - 1);
        double ym = std::pow(p.y(), m);
        g[0] = m * am1 * (ym - l[1]);
        g[1] = std::pow(p.x(), m) - std::pow(l[0], m);
    };
    f.hess = [m](const Vec2& p, std::span<const double> l, std::span<double> h) {
        double ym = std::pow(p.y(), m);
        h[0] = m * (m - 1) * std::pow(l[0], m - 2) * (ym - l[1]);
        h[1] = h[2] = -m * std::pow(l[0], m - 1);
        h[3] = 0.0;
    };
    f.sample = [m](std::span<const double> l, int count) {
        double a = l[0], b = l[1];
        return sweep(count, [&](double t) {
            double c = std::cos(t);
            double x = a * c;
            double inner = std::max(0.0, b * (1.0 - std::pow(std::abs(c), m)));
            double y = std::copysign(std::pow(inner, 1.0 / m), std::sin(t));
            if (std::sin(t) == 0.0) y = 0.0;
            return Vec2(x, y);
        });
    };
    f.equation = [m](std::span<const double> l) {
        return fmt(l[1]) + "*x^" + std::to_string(m) + " + " + fmt(std::pow(l[0], m)) + "*y^" +
               std::to_string(m) + " - " + fmt(std::pow(l[0], m) * l[1]) + " = 0";
    };
    return f;
}

CurveFamily make_citrus(bool stretched) {
    CurveFamily f;
    f.name = stretched ? "citrus_stretched" : "citrus";
    f.form = CurveForm::Cartesian;
    f.num_params = stretched ? 2 : 1;
    f.param_names = stretched ? std::vector<std::string>{"a", "c"} : std::vector<std::string>{"a"};

    auto wcube = [](double x, double a) {
        double w = x * x - a * a / 4.0;
        return w * w * w;
    };
    if (!stretched) {
        f.residual = [wcube](const Vec2& p, std::span<const double> l) {
            double a = l[0];
            return a * a * a * a * p.y() * p.y() + wcube(p.x(), a);
        };
        f.grad = [](const Vec2& p, std::span<const double> l, std::span<double> g) {
            double a = l[0];
            double w = p.x() * p.x() - a * a / 4.0;
            g[0] = 4.0 * a * a * a * p.y() * p.y() - 1.5 * a * w * w;
        };
        f.hess = [](const Vec2& p, std::span<const double> l, std::span<double> h) {
            double a = l[0];
            double w = p.x() * p.x() - a * a / 4.0;
            h[0] = 12.0 * a * a * p.y() * p.y() - 1.5 * w * w + 1.5 * a * a * w;
        };
    } else {
        f.residual = [wcube](const Vec2& p, std::span<const double> l) {
            double a = l[0], c = l[1];
            return a * a * a * a * c * c * p.y() * p.y() + wcube(p.x(), a);
        };
        f.grad = [](const Vec2& p, std::span<const double> l, std::span<double> g) {
            double a = l[0], c = l[1];
            double w = p.x() * p.x() - a * a / 4.0;
            g[0] = 4.0 * a * a * a * c * c * p.y() * p.y() - 1.5 * a * w * w;
            g[1] = 2.0 * a * a * a * a * c * p.y() * p.y();
        };
        f.hess = [](const Vec2& p, std::span<const double> l, std::span<double> h) {
            double a = l[0], c = l[1];
            double w = p.x() * p.x() - a * a / 4.0;
            h[0] = 12.0 * a * a * c * c * p.y() * p.y() - 1.5 * w * w + 1.5 * a * a * w;
            h[1] = h[2] = 8.0 * a * a * a * c * p.y() * p.y();
            h[3] = 2.0 * a * a * a * a * p.y() * p.y();
        };
    }
    f.sample = [stretched](std::span<const double> l, int count) {
        double a = l[0];
        double c = stretched ? l[1] : 1.0;
        return sweep(count, [&](double t) {
            double x = 0.5 * a * std::cos(t);
            double w = x * x - a * a / 4.0; // <= 0 inside the lens
            double y = std::copysign(std::sqrt(std::max(0.0, -w * w * w)) / (a * a * c),
                                     std::sin(t));
            return Vec2(x, y);
        });
    };
    if (!stretched) {
        f.equation = [](std::span<const double> l) {
            return fmt(std::pow(l[0], 4)) + "*y^2 + (x - " + fmt(l[0] / 2) + ")^3*(x + " +
                   fmt(l[0] / 2) + ")^3 = 0";
        };
    } else {
        f.equation = [](std::span<const double> l) {
            return fmt(std::pow(l[0], 4) * l[1] * l[1]) + "*y^2 + (x - " + fmt(l[0] / 2) +
                   ")^3*(x + " + fmt(l[0] / 2) + ")^3 = 0";
        };
    }
    return f;
}

CurveFamily make_spiral(bool generalized) {
    CurveFamily f;
    f.name = generalized ? "spiral_generalized" : "spiral";
    f.form = CurveForm::Polar;
    f.num_params = generalized ? 3 : 2;
    f.param_names = generalized ? std::vector<std::string>{"a", "b", "c"}
                                : std::vector<std::string>{"a", "b"};
    f.residual = [generalized](const Vec2& p, std::span<const double> l) {
        double rho = p.x(), theta = p.y();
        double r = rho - l[0] - l[1] * theta;
        if (generalized) r -= l[2] * theta * theta;
        return r;
    };
    f.grad = [generalized](const Vec2& p, std::span<const double>, std::span<double> g) {
        g[0] = -1.0;
        g[1] = -p.y();
        if (generalized) g[2] = -p.y() * p.y();
    };
    f.hess = [](const Vec2&, std::span<const double>, std::span<double> h) {
        std::fill(h.begin(), h.end(), 0.0);
    };
    f.polar_rho = [generalized](double theta, std::span<const double> l) {
        double r = l[0] + l[1] * theta;
        if (generalized) r += l[2] * theta * theta;
        return r;
    };
    f.sample = [f_rho = f.polar_rho](std::span<const double> l, int count) {
        return sweep(count, [&](double t) {
            double rho = f_rho(t, l);
            return Vec2(rho * std::cos(t), rho * std::sin(t));
        }, 0.0, 4.0 * pi, false);
    };
    f.equation = [generalized](std::span<const double> l) {
        std::string eq = "rho - " + fmt(l[0]) + " - " + fmt(l[1]) + "*theta";
        if (generalized) eq += " - " + fmt(l[2]) + "*theta^2";
        return eq + " = 0";
    };
    return f;
}

CurveFamily make_m_convexities(int m) {
    if (m < 2) raise(Errc::domain_error, "convexity count m must be >= 2");
    CurveFamily f;
    f.name = "convexities";
    f.form = CurveForm::Polar;
    f.num_params = 2;
    f.param_names = {"a", "b"};
    f.fixed = {{"m", m}};
    f.residual = [m](const Vec2& p, std::span<const double> l) {
        return p.x() * (1.0 + l[1] * std::cos(m * p.y())) - l[0];
    };
    f.grad = [m](const Vec2& p, std::span<const double>, std::span<double> g) {
        g[0] = -1.0;
        g[1] = p.x() * std::cos(m * p.y());
    };
    f.hess = [](const Vec2&, std::span<const double>, std::span<double> h) {
        std::fill(h.begin(), h.end(), 0.0);
    };
    f.polar_rho = [m](double theta, std::span<const double> l) {
        return l[0] / (1.0 + l[1] * std::cos(m * theta));
    };
    f.sample = [f_rho = f.polar_rho](std::span<const double> l, int count) {
        return sweep(count, [&](double t) {
            double rho = f_rho(t, l);
            return Vec2(rho * std::cos(t), rho * std::sin(t));
        });
    };
    f.equation = [m](std::span<const double> l) {
        return "rho*(1 + " + fmt(l[1]) + "*cos(" + std::to_string(m) + "*theta)) - " + fmt(l[0]) +
               " = 0";
    };
    return f;
}

CurveFamily make_petal(int n, bool stretched) {
    if (n < 1) raise(Errc::domain_error, "petal exponent n must be >= 1");
    CurveFamily f;
    f.name = stretched ? "petal_stretched" : "petal";
    f.form = CurveForm::Cartesian;
    f.num_params = stretched ? 2 : 1;
    f.param_names = stretched ? std::vector<std::string>{"a", "c"} : std::vector<std::string>{"a"};
    f.fixed = {{"n", n}};

    // u = c*x^2 + y^2, B = u^n - c^n*x^(2n), F = u^(2n+1) - a*B^2
    auto eval_parts = [n](const Vec2& p, double c, double& u, double& B, double& x2n) {
        u = c * p.x() * p.x() + p.y() * p.y();
        x2n = std::pow(p.x() * p.x(), n);
        B = std::pow(u, n) - std::pow(c, n) * x2n;
    };

    if (!stretched) {
        f.residual = [eval_parts, n](const Vec2& p, std::span<const double> l) {
            double u, B, x2n;
            eval_parts(p, 1.0, u, B, x2n);
            return std::pow(u, 2 * n + 1) - l[0] * B * B;
        };
        f.grad = [eval_parts](const Vec2& p, std::span<const double>, std::span<double> g) {
            double u, B, x2n;
            eval_parts(p, 1.0, u, B, x2n);
            g[0] = -B * B;
        };
        f.hess = [](const Vec2&, std::span<const double>, std::span<double> h) { h[0] = 0.0; };
    } else {
        f.residual = [eval_parts, n](const Vec2& p, std::span<const double> l) {
            double u, B, x2n;
            eval_parts(p, l[1], u, B, x2n);
            return std::pow(u, 2 * n + 1) - l[0] * B * B;
        };
        f.grad = [eval_parts, n](const Vec2& p, std::span<const double> l, std::span<double> g) {
            double u, B, x2n;
            eval_parts(p, l[1], u, B, x2n);
            double c = l[1], x2 = p.x() * p.x();
            double Bc = n * std::pow(u, n - 1) * x2 - n * std::pow(c, n - 1) * x2n;
            g[0] = -B * B;
            g[1] = (2 * n + 1) * std::pow(u, 2 * n) * x2 - 2.0 * l[0] * B * Bc;
        };
        f.hess = [eval_parts, n](const Vec2& p, std::span<const double> l, std::span<double> h) {
            double u, B, x2n;
            eval_parts(p, l[1], u, B, x2n);
            double c = l[1], x2 = p.x() * p.x(), x4 = x2 * x2;
            double Bc = n * std::pow(u, n - 1) * x2 - n * std::pow(c, n - 1) * x2n;
            double Bcc = n * (n - 1) * std::pow(u, n - 2) * x4 -
                         n * (n - 1) * std::pow(c, n - 2) * x2n;
            h[0] = 0.0;
            h[1] = h[2] = -2.0 * B * Bc;
            h[3] = (2 * n + 1) * (2 * n) * std::pow(u, 2 * n - 1) * x4 -
                   2.0 * l[0] * (Bc * Bc + B * Bcc);
        };
    }
    f.sample = [n, stretched](std::span<const double> l, int count) {
        double sqrt_a = std::sqrt(l[0]);
        double inv_sqrt_c = stretched ? 1.0 / std::sqrt(l[1]) : 1.0;
        return sweep(count, [&](double t) {
            double rho = sqrt_a * (1.0 - std::pow(std::cos(t) * std::cos(t), n));
            return Vec2(rho * std::cos(t) * inv_sqrt_c, rho * std::sin(t));
        });
    };
    f.equation = [n, stretched](std::span<const double> l) {
        std::string u = stretched ? "(" + fmt(l[1]) + "*x^2 + y^2)" : "(x^2 + y^2)";
        std::string cn = stretched ? fmt(std::pow(l[1], n)) + "*" : "";
        return u + "^" + std::to_string(2 * n + 1) + " - " + fmt(l[0]) + "*(" + u + "^" +
               std::to_string(n) + " - " + cn + "x^" + std::to_string(2 * n) + ")^2 = 0";
    };
    return f;
}

CurveFamily make_compound(std::vector<CurveFamily> factors, const std::string& name) {
    if (factors.empty()) raise(Errc::layout_mismatch, "compound needs at least one factor");
    const int t = factors[0].num_params;
    const CurveForm form = factors[0].form;
    for (const auto& g : factors) {
        if (g.num_params != t)
            raise(Errc::layout_mismatch, "compound factors must share one parameter vector");
        if (g.form != form)
            raise(Errc::layout_mismatch, "compound factors must share the coordinate form");
    }

    CurveFamily f;
    if (name.empty()) {
        f.name = factors[0].name;
        for (std::size_t i = 1; i < factors.size(); ++i) f.name += "*" + factors[i].name;
    } else {
        f.name = name;
    }
    f.form = form;
    f.num_params = t;
    f.param_names = factors[0].param_names;
    for (const auto& g : factors)
        for (const auto& fx : g.fixed)
            if (std::find(f.fixed.begin(), f.fixed.end(), fx) == f.fixed.end())
                f.fixed.push_back(fx);

    auto shared = std::make_shared<std::vector<CurveFamily>>(std::move(factors));

    f.residual = [shared](const Vec2& p, std::span<const double> l) {
        double prod = 1.0;
        for (const auto& g : *shared) prod *= g.residual(p, l);
        return prod;
    };
    f.grad = [shared, t](const Vec2& p, std::span<const double> l, std::span<double> g) {
        const std::size_t k = shared->size();
        std::vector<double> vals(k);
        std::vector<double> grads(k * static_cast<std::size_t>(t));
        for (std::size_t i = 0; i < k; ++i) {
            vals[i] = (*shared)[i].residual(p, l);
            (*shared)[i].grad(p, l, std::span<double>(grads.data() + i * t, static_cast<std::size_t>(t)));
        }
        for (int d = 0; d < t; ++d) {
            double sum = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                double prod = grads[i * static_cast<std::size_t>(t) + static_cast<std::size_t>(d)];
                for (std::size_t j = 0; j < k; ++j)
                    if (j != i) prod *= vals[j];
                sum += prod;
            }
            g[d] = sum;
        }
    };
    f.hess = [shared, t](const Vec2& p, std::span<const double> l, std::span<double> h) {
        const std::size_t k = shared->size();
        const std::size_t td = static_cast<std::size_t>(t);
        std::vector<double> vals(k);
        std::vector<double> grads(k * td);
        std::vector<double> hesss(k * td * td);
        for (std::size_t i = 0; i < k; ++i) {
            vals[i] = (*shared)[i].residual(p, l);
            (*shared)[i].grad(p, l, std::span<double>(grads.data() + i * td, td));
            (*shared)[i].hess(p, l, std::span<double>(hesss.data() + i * td * td, td * td));
        }
        auto prod_except = [&](std::size_t skip1, std::size_t skip2) {
            double prod = 1.0;
            for (std::size_t j = 0; j < k; ++j)
                if (j != skip1 && j != skip2) prod *= vals[j];
            return prod;
        };
        for (std::size_t r = 0; r < td; ++r) {
            for (std::size_t c = 0; c < td; ++c) {
                double sum = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                    sum += prod_except(i, i) * hesss[i * td * td + r * td + c];
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j)
                        if (i != j)
                            sum += prod_except(i, j) * grads[i * td + r] * grads[j * td + c];
                h[r * td + c] = sum;
            }
        }
    };
    f.sample = [shared](std::span<const double> l, int count) {
        std::vector<Vec2> out;
        int per = std::max(8, count / static_cast<int>(shared->size()));
        for (const auto& g : *shared) {
            if (!g.sample) continue;
            auto part = g.sample(l, per);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    };
    f.equation = [shared](std::span<const double> l) {
        std::string eq;
        for (const auto& g : *shared) {
            std::string part = g.equation(l);
            part = part.substr(0, part.rfind(" = 0"));
            eq += "(" + part + ")";
        }
        return eq + " = 0";
    };
    return f;
}

CurveFamily make_citrus_circle() {
    CurveFamily circle;
    circle.name = "circle_a8"; // radius locked to a/8
    circle.form = CurveForm::Cartesian;
    circle.num_params = 1;
    circle.param_names = {"a"};
    circle.residual = [](const Vec2& p, std::span<const double> l) {
        return p.x() * p.x() + p.y() * p.y() - l[0] * l[0] / 64.0;
    };
    circle.grad = [](const Vec2&, std::span<const double> l, std::span<double> g) {
        g[0] = -l[0] / 32.0;
    };
    circle.hess = [](const Vec2&, std::span<const double>, std::span<double> h) {
        h[0] = -1.0 / 32.0;
    };
    circle.sample = [](std::span<const double> l, int count) {
        double r = l[0] / 8.0;
        return sweep(count, [&](double t) { return Vec2(r * std::cos(t), r * std::sin(t)); });
    };
    circle.equation = [](std::span<const double> l) {
        return "x^2 + y^2 - " + fmt(l[0] * l[0] / 64.0) + " = 0";
    };
    return make_compound({make_citrus(false), std::move(circle)}, "citrus_circle");
}

CurveFamily make_citrus_line() {
    CurveFamily axis;
    axis.name = "axis";
    axis.form = CurveForm::Cartesian;
    axis.num_params = 1;
    axis.param_names = {"a"};
    axis.residual = [](const Vec2& p, std::span<const double>) { return p.y(); };
    axis.grad = [](const Vec2&, std::span<const double>, std::span<double> g) { g[0] = 0.0; };
    axis.hess = [](const Vec2&, std::span<const double>, std::span<double> h) { h[0] = 0.0; };
    axis.sample = [](std::span<const double> l, int count) {
        double half = l[0] / 2.0; // the segment inside the citrus box
        return sweep(count, [&](double t) { return Vec2(t, 0.0); }, -half, half, false);
    };
    axis.equation = [](std::span<const double>) { return std::string("y = 0"); };
    return make_compound({make_citrus(false), std::move(axis)}, "citrus_line");
}

CurveFamily make_convexities_circle(int m) {
    CurveFamily conv = make_m_convexities(m);
    // widen to the shared (a, b, r) layout
    CurveFamily star;
    star.name = "convexities";
    star.form = CurveForm::Polar;
    star.num_params = 3;
    star.param_names = {"a", "b", "r"};
    star.fixed = conv.fixed;
    star.residual = [m](const Vec2& p, std::span<const double> l) {
        return p.x() * (1.0 + l[1] * std::cos(m * p.y())) - l[0];
    };
    star.grad = [m](const Vec2& p, std::span<const double>, std::span<double> g) {
        g[0] = -1.0;
        g[1] = p.x() * std::cos(m * p.y());
        g[2] = 0.0;
    };
    star.hess = [](const Vec2&, std::span<const double>, std::span<double> h) {
        std::fill(h.begin(), h.end(), 0.0);
    };
    star.polar_rho = [m](double theta, std::span<const double> l) {
        return l[0] / (1.0 + l[1] * std::cos(m * theta));
    };
    star.sample = [rho = star.polar_rho](std::span<const double> l, int count) {
        return sweep(count, [&](double t) {
            double r = rho(t, l);
            return Vec2(r * std::cos(t), r * std::sin(t));
        });
    };
    star.equation = [m](std::span<const double> l) {
        return "rho*(1 + " + fmt(l[1]) + "*cos(" + std::to_string(m) + "*theta)) - " + fmt(l[0]) +
               " = 0";
    };

    CurveFamily ring;
    ring.name = "ring";
    ring.form = CurveForm::Polar;
    ring.num_params = 3;
    ring.param_names = {"a", "b", "r"};
    ring.residual = [](const Vec2& p, std::span<const double> l) { return p.x() - l[2]; };
    ring.grad = [](const Vec2&, std::span<const double>, std::span<double> g) {
        g[0] = 0.0;
        g[1] = 0.0;
        g[2] = -1.0;
    };
    ring.hess = [](const Vec2&, std::span<const double>, std::span<double> h) {
        std::fill(h.begin(), h.end(), 0.0);
    };
    ring.polar_rho = [](double, std::span<const double> l) { return l[2]; };
    ring.sample = [](std::span<const double> l, int count) {
        double r = l[2];
        return sweep(count, [&](double t) { return Vec2(r * std::cos(t), r * std::sin(t)); });
    };
    ring.equation = [](std::span<const double> l) { return "rho - " + fmt(l[2]) + " = 0"; };

    CurveFamily out = make_compound({std::move(star), std::move(ring)}, "convexities_circle");
    return out;
}

CurveFamily make_triple_ellipse() {
    auto ellipse_factor = [](int which) {
        CurveFamily e;
        e.name = "e" + std::to_string(which);
        e.form = CurveForm::Cartesian;
        e.num_params = 2;
        e.param_names = {"a", "b"};
        switch (which) {
        case 1:
            e.residual = [](const Vec2& p, std::span<const double> l) {
                return p.x() * p.x() / (l[0] * l[0]) + p.y() * p.y() / (l[1] * l[1]) - 1.0;
            };
            e.grad = [](const Vec2& p, std::span<const double> l, std::span<double> g) {
                g[0] = -2.0 * p.x() * p.x() / std::pow(l[0], 3);
                g[1] = -2.0 * p.y() * p.y() / std::pow(l[1], 3);
            };
            e.hess = [](const Vec2& p, std::span<const double> l, std::span<double> h) {
                h[0] = 6.0 * p.x() * p.x() / std::pow(l[0], 4);
                h[1] = h[2] = 0.0;
                h[3] = 6.0 * p.y() * p.y() / std::pow(l[1], 4);
            };
            e.sample = [](std::span<const double> l, int count) {
                return sweep(count, [&](double t) {
                    return Vec2(l[0] * std::cos(t), l[1] * std::sin(t));
                });
            };
            break;
        case 2:
            e.residual = [](const Vec2& p, std::span<const double> l) {
                double dy = 2.0 * p.y() - l[1];
                return 16.0 * p.x() * p.x() / (9.0 * l[0] * l[0]) + dy * dy / (l[1] * l[1]) - 1.0;
            };
            e.grad = [](const Vec2& p, std::span<const double> l, std::span<double> g) {
                double dy = 2.0 * p.y() - l[1];
                g[0] = -32.0 * p.x() * p.x() / (9.0 * std::pow(l[0], 3));
                g[1] = -2.0 * dy / (l[1] * l[1]) - 2.0 * dy * dy / std::pow(l[1], 3);
            };
            e.hess = [](const Vec2& p, std::span<const double> l, std::span<double> h) {
                double dy = 2.0 * p.y() - l[1];
                h[0] = 96.0 * p.x() * p.x() / (9.0 * std::pow(l[0], 4));
                h[1] = h[2] = 0.0;
                h[3] = 2.0 / (l[1] * l[1]) + 8.0 * dy / std::pow(l[1], 3) +
                       6.0 * dy * dy / std::pow(l[1], 4);
            };
            e.sample = [](std::span<const double> l, int count) {
                return sweep(count, [&](double t) {
                    return Vec2(0.75 * l[0] * std::cos(t), 0.5 * l[1] * (std::sin(t) + 1.0));
                });
            };
            break;
        default:
            e.residual = [](const Vec2& p, std::span<const double> l) {
                return (4.0 * p.x() * p.x() + p.y() * p.y()) / (l[1] * l[1]) - 1.0;
            };
            e.grad = [](const Vec2& p, std::span<const double> l, std::span<double> g) {
                g[0] = 0.0;
                g[1] = -2.0 * (4.0 * p.x() * p.x() + p.y() * p.y()) / std::pow(l[1], 3);
            };
            e.hess = [](const Vec2& p, std::span<const double> l, std::span<double> h) {
                h[0] = h[1] = h[2] = 0.0;
                h[3] = 6.0 * (4.0 * p.x() * p.x() + p.y() * p.y()) / std::pow(l[1], 4);
            };
            e.sample = [](std::span<const double> l, int count) {
                return sweep(count, [&](double t) {
                    return Vec2(0.5 * l[1] * std::cos(t), l[1] * std::sin(t));
                });
            };
            break;
        }
        e.equation = [which](std::span<const double> l) {
            switch (which) {
            case 1: return "x^2/" + fmt(l[0] * l[0]) + " + y^2/" + fmt(l[1] * l[1]) + " - 1 = 0";
            case 2:
                return "16x^2/" + fmt(9.0 * l[0] * l[0]) + " + (2y - " + fmt(l[1]) + ")^2/" +
                       fmt(l[1] * l[1]) + " - 1 = 0";
            default:
                return "4x^2/" + fmt(l[1] * l[1]) + " + y^2/" + fmt(l[1] * l[1]) + " - 1 = 0";
            }
        };
        return e;
    };
    return make_compound({ellipse_factor(1), ellipse_factor(2), ellipse_factor(3)},
                         "triple_ellipse");
}

CurveFamily make_family(const std::string& name, const std::map<std::string, int>& fixed) {
    auto get = [&](const char* key, int fallback) {
        auto it = fixed.find(key);
        return it == fixed.end() ? fallback : it->second;
    };
    if (name == "line") return make_line();
    if (name == "circle") return make_circle();
    if (name == "ellipse") return make_ellipse();
    if (name == "lamet") return make_lamet(get("m", 4));
    if (name == "citrus") return make_citrus(get("stretched", 0) != 0);
    if (name == "citrus_stretched") return make_citrus(true);
    if (name == "spiral") return make_spiral(get("generalized", 0) != 0);
    if (name == "spiral_generalized") return make_spiral(true);
    if (name == "convexities") return make_m_convexities(get("m", 5));
    if (name == "petal") return make_petal(get("n", 1), get("stretched", 0) != 0);
    if (name == "petal_stretched") return make_petal(get("n", 1), true);
    if (name == "citrus_circle") return make_citrus_circle();
    if (name == "citrus_line") return make_citrus_line();
    if (name == "convexities_circle") return make_convexities_circle(get("m", 5));
    if (name == "triple_ellipse") return make_triple_ellipse();
    raise(Errc::unsupported_family, "unknown curve family '" + name + "'");
}

std::vector<FamilyInfo> catalogue_info() {
    auto info = [](const CurveFamily& f, std::vector<std::string> fixed_names,
                   std::string tmpl) {
        FamilyInfo i;
        i.name = f.name;
        i.num_params = f.num_params;
        i.form = f.form;
        i.param_names = f.param_names;
        i.fixed_names = std::move(fixed_names);
        i.equation_template = std::move(tmpl);
        return i;
    };
    std::vector<FamilyInfo> out;
    out.push_back(info(make_line(), {}, "y - a*x - b = 0"));
    out.push_back(info(make_circle(), {}, "(x-A)^2 + (y-B)^2 - R^2 = 0"));
    out.push_back(info(make_ellipse(), {}, "x^2/a^2 + y^2/b^2 - 1 = 0"));
    out.push_back(info(make_lamet(4), {"m"}, "b*x^m + a^m*y^m - a^m*b = 0"));
    out.push_back(info(make_citrus(false), {"stretched"},
                       "a^4*y^2 + (x-a/2)^3*(x+a/2)^3 = 0"));
    out.push_back(info(make_citrus(true), {}, "a^4*c^2*y^2 + (x-a/2)^3*(x+a/2)^3 = 0"));
    out.push_back(info(make_spiral(false), {"generalized"}, "rho - a - b*theta = 0"));
    out.push_back(info(make_spiral(true), {}, "rho - a - b*theta - c*theta^2 = 0"));
    out.push_back(info(make_m_convexities(5), {"m"}, "rho*(1 + b*cos(m*theta)) - a = 0"));
    out.push_back(info(make_petal(1, false), {"n", "stretched"},
                       "(x^2+y^2)^(2n+1) - a*((x^2+y^2)^n - x^(2n))^2 = 0"));
    out.push_back(info(make_petal(1, true), {"n"},
                       "(c*x^2+y^2)^(2n+1) - a*((c*x^2+y^2)^n - c^n*x^(2n))^2 = 0"));
    out.push_back(info(make_citrus_circle(), {}, "citrus(a) * (x^2 + y^2 - a^2/64) = 0"));
    out.push_back(info(make_citrus_line(), {}, "y * citrus(a) = 0"));
    out.push_back(info(make_convexities_circle(5), {"m"},
                       "(rho*(1 + b*cos(m*theta)) - a) * (rho - r) = 0"));
    out.push_back(info(make_triple_ellipse(), {}, "three coupled ellipses in (a, b)"));
    return out;
}

int estimate_petal_exponent(double yA, double yB, int n_max, bool* capped) {
    if (!(yA > 0.0) || !(yB > 0.0) || !(yB / yA > 0.0 && yB / yA < 1.0))
        raise(Errc::ratio_out_of_range, "petal extent ratio must be in (0,1)");
    const double ratio = yB / yA;
    auto lhs = [](int n) {
        double nn = static_cast<double>(n);
        return (2.0 * nn / (2.0 * nn + 1.0)) *
               std::sqrt(1.0 - std::pow(1.0 / (2.0 * nn + 1.0), 1.0 / nn));
    };
    int best = 1;
    double best_err = std::abs(lhs(1) - ratio);
    for (int n = 2; n <= n_max; ++n) {
        double err = std::abs(lhs(n) - ratio);
        if (err < best_err) {
            best = n;
            best_err = err;
        }
    }
    if (capped) *capped = best == n_max;
    return best;
}

BoundingShape bounding_box(const CurveFamily& family, std::span<const double> lambda) {
    check_params(family, lambda);
    BoundingShape box;
    const auto& l = lambda;
    if (family.name == "circle") {
        box.xmin = l[0] - l[2];
        box.xmax = l[0] + l[2];
        box.ymin = l[1] - l[2];
        box.ymax = l[1] + l[2];
        return box;
    }
    if (family.name == "ellipse") {
        box.xmin = -l[0];
        box.xmax = l[0];
        box.ymin = -l[1];
        box.ymax = l[1];
        return box;
    }
    if (family.name == "lamet") {
        int m = family.fixed.front().second;
        double yext = std::pow(l[1], 1.0 / m);
        box.xmin = -l[0];
        box.xmax = l[0];
        box.ymin = -yext;
        box.ymax = yext;
        return box;
    }
    if (family.name == "citrus" || family.name == "citrus_stretched") {
        double c = family.num_params == 2 ? l[1] : 1.0;
        box.xmin = -l[0] / 2.0;
        box.xmax = l[0] / 2.0;
        box.ymin = -l[0] / (8.0 * c);
        box.ymax = l[0] / (8.0 * c);
        return box;
    }
    if (family.name == "petal" || family.name == "petal_stretched") {
        int n = family.fixed.front().second;
        double c = family.num_params == 2 ? l[1] : 1.0;
        double nn = static_cast<double>(n);
        double xext = (2.0 * nn / (2.0 * nn + 1.0)) * std::sqrt(l[0] / c) *
                      std::pow(1.0 / (2.0 * nn + 1.0), 1.0 / (2.0 * nn));
        box.xmin = -xext;
        box.xmax = xext;
        box.ymin = -std::sqrt(l[0]);
        box.ymax = std::sqrt(l[0]);
        return box;
    }
    if (family.name == "spiral" || family.name == "spiral_generalized") {
        // first turning of the spiral
        box.kind = BoundingShape::Kind::Annulus;
        box.r_inner = l[0];
        box.r_outer = family.polar_rho(2.0 * pi, l);
        return box;
    }
    if (family.name == "convexities") {
        box.kind = BoundingShape::Kind::Annulus;
        box.r_inner = l[0] / (1.0 + l[1]);
        box.r_outer = l[0] / (1.0 - l[1]);
        return box;
    }
    if (family.name == "line")
        raise(Errc::unsupported_family, "a line has no finite bounding box");

    // fallback: dense samples of the locus
    if (!family.sample) raise(Errc::unsupported_family, family.name + " has no locus sampler");
    auto pts = family.sample(lambda, 4096);
    if (pts.empty()) raise(Errc::unsupported_family, family.name + " produced an empty locus");
    if (family.form == CurveForm::Polar) {
        box.kind = BoundingShape::Kind::Annulus;
        box.r_inner = std::numeric_limits<double>::infinity();
        for (const Vec2& p : pts) {
            box.r_inner = std::min(box.r_inner, p.norm());
            box.r_outer = std::max(box.r_outer, p.norm());
        }
    } else {
        box.xmin = box.ymin = std::numeric_limits<double>::infinity();
        box.xmax = box.ymax = -std::numeric_limits<double>::infinity();
        for (const Vec2& p : pts) {
            box.xmin = std::min(box.xmin, p.x());
            box.xmax = std::max(box.xmax, p.x());
            box.ymin = std::min(box.ymin, p.y());
            box.ymax = std::max(box.ymax, p.y());
        }
    }
    return box;
}

ParameterRegion suggest_region(const CurveFamily& family, const PlanarSet& z) {
    if (z.size() < static_cast<std::size_t>(family.num_params) + 1)
        raise(Errc::too_few_points, "region suggestion needs more points than parameters");
    PlanarStats s = planar_stats(z);
    const std::string& n = family.name;

    if (n == "line") {
        double sxx = 0, sxy = 0, sx = 0, sy = 0;
        for (const Vec2& p : z.points2d) {
            sx += p.x();
            sy += p.y();
            sxx += p.x() * p.x();
            sxy += p.x() * p.y();
        }
        double cnt = static_cast<double>(z.size());
        double denom = sxx - sx * sx / cnt;
        double slope = denom > 1e-12 ? (sxy - sx * sy / cnt) / denom : 0.0;
        double icept = sy / cnt - slope * sx / cnt;
        double sspan = 0.5 + 0.5 * std::abs(slope);
        double ispan = std::max(0.25 * s.half_diag, 1e-3);
        return with_default_steps({slope - sspan, icept - ispan}, {slope + sspan, icept + ispan});
    }
    if (n == "circle") {
        return with_default_steps({s.xmin, s.ymin, 0.05 * s.half_diag},
                                  {s.xmax, s.ymax, s.half_diag});
    }
    if (n == "ellipse")
        return with_default_steps({0.5 * s.x_half, 0.5 * s.y_half},
                                  {1.5 * s.x_half, 1.5 * s.y_half});
    if (n == "lamet") {
        int m = family.fixed.front().second;
        double b_est = std::pow(s.y_half, m);
        return with_default_steps({0.7 * s.x_half, 0.5 * b_est}, {1.4 * s.x_half, 2.0 * b_est});
    }
    if (n == "citrus" || n == "citrus_stretched" || n == "citrus_circle" || n == "citrus_line") {
        double a_est = 2.0 * s.x_half;
        if (family.num_params == 1)
            return with_default_steps({0.7 * a_est}, {1.3 * a_est});
        double c_est = a_est / (8.0 * std::max(s.y_half, 1e-12));
        return with_default_steps({0.7 * a_est, 0.6 * c_est}, {1.3 * a_est, 1.5 * c_est});
    }
    if (n == "spiral" || n == "spiral_generalized") {
        double rho0 = s.rho_min > 1e-9 ? s.rho_min : 0.05 * s.rho_max;
        double b_est = std::max((s.rho_max - rho0) / (2.0 * pi), 1e-9);
        std::vector<double> lo{0.85 * rho0, 0.7 * b_est};
        std::vector<double> hi{1.2 * rho0, 1.3 * b_est};
        if (family.num_params == 3) {
            lo.push_back(0.05 * b_est * b_est);
            hi.push_back(0.4 * b_est * b_est);
        }
        return with_default_steps(std::move(lo), std::move(hi));
    }
    if (n == "convexities" || n == "convexities_circle") {
        double b_est = std::clamp((s.rho_max - s.rho_min) / (s.rho_max + s.rho_min), 0.02, 0.9);
        double a_est = s.rho_min * (1.0 + b_est);
        std::vector<double> lo{0.8 * a_est, std::max(0.5 * b_est, 0.01)};
        std::vector<double> hi{1.25 * a_est, std::min(1.6 * b_est, 0.95)};
        if (family.num_params == 3) {
            lo.push_back(0.4 * s.rho_min);
            hi.push_back(1.05 * s.rho_min);
        }
        return with_default_steps(std::move(lo), std::move(hi));
    }
    if (n == "petal" || n == "petal_stretched") {
        int pn = family.fixed.front().second;
        double a_est = s.y_half * s.y_half;
        if (family.num_params == 1)
            return with_default_steps({0.5 * a_est}, {1.5 * a_est});
        double nn = static_cast<double>(pn);
        double shape = (2.0 * nn / (2.0 * nn + 1.0)) *
                       std::pow(1.0 / (2.0 * nn + 1.0), 1.0 / (2.0 * nn));
        double root_c = shape * s.y_half / std::max(s.x_half, 1e-12);
        double c_est = root_c * root_c;
        return with_default_steps({0.5 * a_est, 0.6 * c_est}, {1.5 * a_est, 1.5 * c_est});
    }
    if (n == "triple_ellipse")
        return with_default_steps({0.6 * s.x_half, 0.6 * s.y_half},
                                  {1.4 * s.x_half, 1.4 * s.y_half});

    raise(Errc::unsupported_family, "no region heuristic for '" + n + "'");
}

} // namespace curverec
