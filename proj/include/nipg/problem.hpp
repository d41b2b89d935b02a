#pragma once

// Coefficient data of -ε Δu + b·∇u + c u = f on the unit square with u = 0 on Γ.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "mesh.hpp"

namespace nipg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<Vec2(double, double)>;

struct ExactSolution {
    ScalarField u;
    VectorField grad;
    ScalarField laplacian;
};

struct ProblemData {
    std::string name;
    double eps = 1e-4;
    VectorField b;
    ScalarField div_b;
    ScalarField c;
    ScalarField f;
    std::optional<ExactSolution> exact;

    /// c0^2 = c - div(b)/2
    double c0_squared(double x, double y) const { return c(x, y) - 0.5 * div_b(x, y); }
};

/// Raised when b or c - div(b)/2 violate the positivity conditions at a sample point.
class CoefficientConditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds the load f = -ε Δu + b·∇u + c u from an analytic exact solution.
inline ProblemData make_manufactured(std::string name, double eps, VectorField b, ScalarField div_b,
                                     ScalarField c, ExactSolution exact) {
    ProblemData p;
    p.name = std::move(name);
    p.eps = eps;
    p.b = std::move(b);
    p.div_b = std::move(div_b);
    p.c = std::move(c);
    p.exact = std::move(exact);
    p.f = [eps, bf = p.b, cf = p.c, ex = *p.exact](double x, double y) {
        return -eps * ex.laplacian(x, y) + dot(bf(x, y), ex.grad(x, y)) + cf(x, y) * ex.u(x, y);
    };
    return p;
}

namespace detail {

// Factor g(t) = s(t) (1 - exp(-a (1 - t) / eps)) with derivatives; the exponential
// is only ever evaluated with a nonpositive argument.
struct LayerFactor {
    double value, d1, d2;
};

inline LayerFactor layer_factor(double s, double ds, double dds, double a, double eps, double t) {
    const double E = std::exp(-a * (1.0 - t) / eps);
    const double r = a / eps;
    return {s * (1.0 - E), ds * (1.0 - E) - r * s * E, dds * (1.0 - E) - 2.0 * r * ds * E - r * r * s * E};
}

}  // namespace detail

/**
 * Test problem with exponential layers at x = 1 and y = 1:
 *   u = sin(x)(1 - e^{-2(1-x)/ε}) sin(2y)(1 - e^{-3(1-y)/ε}),
 *   b = (3 - x, 4 - y), c = 1, so c0^2 = 2.
 */
inline ProblemData layer_problem(double eps) {
    auto fx = [eps](double x) {
        return detail::layer_factor(std::sin(x), std::cos(x), -std::sin(x), 2.0, eps, x);
    };
    auto fy = [eps](double y) {
        return detail::layer_factor(std::sin(2.0 * y), 2.0 * std::cos(2.0 * y), -4.0 * std::sin(2.0 * y), 3.0,
                                    eps, y);
    };
    ExactSolution ex;
    ex.u = [fx, fy](double x, double y) { return fx(x).value * fy(y).value; };
    ex.grad = [fx, fy](double x, double y) {
        const auto X = fx(x);
        const auto Y = fy(y);
        return Vec2{X.d1 * Y.value, X.value * Y.d1};
    };
    ex.laplacian = [fx, fy](double x, double y) {
        const auto X = fx(x);
        const auto Y = fy(y);
        return X.d2 * Y.value + X.value * Y.d2;
    };
    return make_manufactured(
        "layer", eps, [](double x, double y) { return Vec2{3.0 - x, 4.0 - y}; },
        [](double, double) { return -2.0; }, [](double, double) { return 1.0; }, std::move(ex));
}

/// Smooth problem without layers, u = sin(πx) sin(πy), constant b = (1, 1), c = 1.
inline ProblemData smooth_problem(double eps) {
    constexpr double pi = 3.14159265358979323846;
    ExactSolution ex;
    ex.u = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    ex.grad = [](double x, double y) {
        return Vec2{pi * std::cos(pi * x) * std::sin(pi * y), pi * std::sin(pi * x) * std::cos(pi * y)};
    };
    ex.laplacian = [](double x, double y) { return -2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y); };
    return make_manufactured(
        "smooth", eps, [](double, double) { return Vec2{1.0, 1.0}; }, [](double, double) { return 0.0; },
        [](double, double) { return 1.0; }, std::move(ex));
}

}  // namespace nipg
