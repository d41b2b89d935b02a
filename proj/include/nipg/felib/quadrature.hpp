#pragma once

// Gauss-Legendre and Gauss-Lobatto rules on [-1, 1] plus the Legendre recurrence.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nipg {

struct QuadratureRule {
    int n = 0;
    std::vector<double> nodes;    // ascending
    std::vector<double> weights;

    int size() const { return n; }
};

/// Legendre polynomial P_n(x) and its derivative, by the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    // derivative from P_n and P_{n-1}; valid away from x = ±1
    if (std::abs(1.0 - x * x) < 1e-300) {
        const double s = (x > 0.0 || n % 2 == 1) ? 1.0 : -1.0;
        dp = s * 0.5 * n * (n + 1.0);
    } else {
        dp = n * (p0 - x * p1) / (1.0 - x * x);
    }
}

inline double legendre(int n, double x) {
    double p, dp;
    legendre(n, x, p, dp);
    return p;
}

inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    QuadratureRule rule;
    rule.n = n;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre(n, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre(n, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// n >= 2 Gauss-Lobatto points: ±1 and the roots of P'_{n-1}.
inline std::vector<double> gauss_lobatto_nodes(int n) {
    if (n < 2) throw std::invalid_argument("gauss_lobatto_nodes: need at least two points");
    const int deg = n - 1;
    std::vector<double> x(n);
    x.front() = -1.0;
    x.back() = 1.0;
    for (int i = 1; i < deg; ++i) {
        double t = -std::cos(std::numbers::pi * i / deg);
        for (int it = 0; it < 100; ++it) {
            // q = (1 - t^2) P'_deg ;  q' = -deg(deg+1) P_deg
            double p, dp;
            legendre(deg, t, p, dp);
            const double q = (1.0 - t * t) * dp;
            const double dq = -deg * (deg + 1.0) * p;
            const double dt = q / dq;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        x[i] = t;
    }
    return x;
}

}  // namespace nipg
