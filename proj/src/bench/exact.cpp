#include "vmsns/bench/exact.hpp"
#include "vmsns/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace vmsns::bench {

namespace {

constexpr double pi = 3.14159265358979323846;

// omega x w = omega (-w_y, w_x)
Eigen::Vector2d cross(double w, const Eigen::Vector2d& v) { return {-w * v.y(), w * v.x()}; }

struct Poly {
    double f, d1, d2, d3;
};

Poly cav_f(double x)
{
    return {x * x * x * x - 2 * x * x * x + x * x, 4 * x * x * x - 6 * x * x + 2 * x, 12 * x * x - 12 * x + 2,
            24 * x - 12};
}

Poly cav_g(double y) { return {y * y * y * y - y * y, 4 * y * y * y - 2 * y, 12 * y * y - 2, 24 * y}; }

// g = x^3 (1-x)^3
Poly bump(double x)
{
    const double x2 = x * x;
    const double x3 = x2 * x;
    return {x3 - 3 * x3 * x + 3 * x3 * x2 - x3 * x3, 3 * x2 - 12 * x3 + 15 * x3 * x - 6 * x3 * x2,
            6 * x - 36 * x2 + 60 * x3 - 30 * x3 * x, 6 - 72 * x + 180 * x2 - 120 * x3};
}

}   // namespace

ExactSolution exact_cavity_manufactured(double re_inv)
{
    ExactSolution s;
    s.name = "cavity-manufactured-steady";
    s.u = [](double x, double y, double) {
        const Poly F = cav_f(x);
        const Poly G = cav_g(y);
        return Eigen::Vector2d(F.f * G.d1, -F.d1 * G.f);
    };
    s.w = [](double x, double y, double) {
        const Poly F = cav_f(x);
        const Poly G = cav_g(y);
        return -F.d2 * G.f - F.f * G.d2;
    };
    s.p = [](double x, double y, double) { return std::sin(x) * std::sin(y); };
    s.rot_w = [](double x, double y, double) {
        const Poly F = cav_f(x);
        const Poly G = cav_g(y);
        return Eigen::Vector2d(-F.d2 * G.d1 - F.f * G.d3, F.d3 * G.f + F.d1 * G.d2);
    };
    s.forcing = [u = s.u, w = s.w, rw = s.rot_w, re_inv](double x, double y, double t) {
        const Eigen::Vector2d gp(std::cos(x) * std::sin(y), std::sin(x) * std::cos(y));
        return Eigen::Vector2d(cross(w(x, y, t), u(x, y, t)) + re_inv * rw(x, y, t) + gp);
    };
    return s;
}

double cavity_pressure_mean()
{
    const double a = 1.0 - std::cos(1.0);
    return a * a;
}

ExactSolution exact_taylor_green(double re_inv)
{
    ExactSolution s;
    s.name = "taylor-green";
    s.u = [re_inv](double x, double y, double t) {
        const double d = std::exp(-2.0 * t * re_inv);
        return Eigen::Vector2d(std::sin(x) * std::cos(y) * d, -std::cos(x) * std::sin(y) * d);
    };
    s.w = [re_inv](double x, double y, double t) { return 2.0 * std::sin(x) * std::sin(y) * std::exp(-2.0 * t * re_inv); };
    s.p = [u = s.u, re_inv](double x, double y, double t) {
        const Eigen::Vector2d v = u(x, y, t);
        return 0.25 * (std::cos(2 * x) + std::cos(2 * y)) * std::exp(-4.0 * t * re_inv) + 0.5 * v.squaredNorm();
    };
    s.rot_w = [re_inv](double x, double y, double t) {
        const double d = 2.0 * std::exp(-2.0 * t * re_inv);
        return Eigen::Vector2d(std::sin(x) * std::cos(y) * d, -std::cos(x) * std::sin(y) * d);
    };
    s.forcing = [](double, double, double) { return Eigen::Vector2d(0.0, 0.0); };
    return s;
}

VectorField initial_shear_layer(double delta, double eps)
{
    return [delta, eps](double x, double y, double) {
        const double ux = y <= pi ? std::tanh((y - pi / 2) / delta) : std::tanh((3 * pi / 2 - y) / delta);
        return Eigen::Vector2d(ux, eps * std::sin(x));
    };
}

double shear_layer_energy(double delta, double eps)
{
    // the x-velocity depends on y only and the y-velocity on x only
    const QuadratureRule r = gauss_legendre(20);
    const int panels = 64;
    const double hp = 2 * pi / panels;
    const VectorField u = initial_shear_layer(delta, eps);
    double ux2 = 0.0;
    for (int e = 0; e < panels; ++e) {
        for (int q = 0; q < r.size(); ++q) {
            const double y = (e + r.points[q]) * hp;
            ux2 += r.weights[q] * hp * std::pow(u(0.0, y, 0.0).x(), 2);
        }
    }
    return 0.5 * 2 * pi * (ux2 + eps * eps * pi);
}

VectorField lid_velocity()
{
    return [](double, double y, double) { return Eigen::Vector2d(y >= 1.0 - 1e-12 ? 1.0 : 0.0, 0.0); };
}

VectorField oseen_beta(double s)
{
    return [s](double x, double y, double) {
        const double qx = x * (1 - x);
        const double qy = y * (1 - y);
        return Eigen::Vector2d(s * qx * (1 - 2 * y), -s * (1 - 2 * x) * qy);
    };
}

double oseen_beta_unit_sup()
{
    const VectorField b = oseen_beta(1.0);
    double m = 0.0;
    const int n = 400;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            m = std::max(m, b(double(i) / n, double(j) / n, 0.0).norm());
        }
    }
    return m;
}

ExactSolution exact_oseen(double nu, double sigma, const VectorField& beta)
{
    const double sn = std::sqrt(nu);
    ExactSolution s;
    s.name = "oseen";
    s.u = [](double x, double y, double) {
        const Poly gx = bump(x);
        const Poly gy = bump(y);
        return Eigen::Vector2d(gx.f * gy.d1, -gx.d1 * gy.f);
    };
    s.w = [sn](double x, double y, double) {
        const Poly gx = bump(x);
        const Poly gy = bump(y);
        return sn * (-gx.d2 * gy.f - gx.f * gy.d2);
    };
    s.p = [](double x, double y, double) { return std::cos(pi * x) * std::cos(pi * y); };
    s.rot_w = [sn](double x, double y, double) {
        const Poly gx = bump(x);
        const Poly gy = bump(y);
        return Eigen::Vector2d(sn * (-gx.d2 * gy.d1 - gx.f * gy.d3), sn * (gx.d3 * gy.f + gx.d1 * gy.d2));
    };
    s.forcing = [u = s.u, w = s.w, rw = s.rot_w, beta, sn, sigma](double x, double y, double t) {
        const Eigen::Vector2d gp(-pi * std::sin(pi * x) * std::cos(pi * y), -pi * std::cos(pi * x) * std::sin(pi * y));
        const Eigen::Vector2d b = beta ? beta(x, y, t) : Eigen::Vector2d::Zero();
        return Eigen::Vector2d(sigma * u(x, y, t) + cross(w(x, y, t), b) / sn + sn * rw(x, y, t) + gp);
    };
    return s;
}

}   // namespace vmsns::bench
