#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "nipg/felib/basis.hpp"
#include "nipg/felib/local_operators.hpp"
#include "nipg/felib/quadrature.hpp"

using namespace nipg;

namespace {

// Random element of Q_k as a monomial table c[i][j] ξ^i η^j.
struct QkPoly {
    int k;
    std::vector<double> c;
    double operator()(double x, double y) const {
        double s = 0.0;
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= k; ++j) s += c[i * (k + 1) + j] * std::pow(x, i) * std::pow(y, j);
        return s;
    }
};

QkPoly random_qk(int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    QkPoly p{k, std::vector<double>((k + 1) * (k + 1))};
    for (auto& v : p.c) v = U(rng);
    return p;
}

double eval_coeffs(int k, const Eigen::VectorXd& c, double xi, double eta) {
    const auto phi = eval_basis(k, xi, eta);
    double s = 0.0;
    for (std::size_t a = 0; a < phi.size(); ++a) s += c(a) * phi[a];
    return s;
}

}  // namespace

TEST(Quadrature, SmallRules) {
    const auto r1 = gauss_legendre(1);
    ASSERT_EQ(r1.n, 1);
    EXPECT_NEAR(r1.nodes[0], 0.0, 1e-16);
    EXPECT_NEAR(r1.weights[0], 2.0, 1e-15);
    const auto r2 = gauss_legendre(2);
    EXPECT_NEAR(r2.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r2.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r2.weights[0], 1.0, 1e-15);
    EXPECT_NEAR(r2.weights[1], 1.0, 1e-15);
    const auto r3 = gauss_legendre(3);
    double s = 0.0;
    for (int q = 0; q < 3; ++q) s += r3.weights[q] * std::pow(r3.nodes[q], 4);
    EXPECT_NEAR(s, 0.4, 1e-14);
    EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(Quadrature, ExactnessUpToDegree2nMinus1) {
    for (int n = 1; n <= 12; ++n) {
        const auto r = gauss_legendre(n);
        double wsum = 0.0;
        for (int q = 0; q < n; ++q) {
            EXPECT_GT(r.weights[q], 0.0);
            EXPECT_GT(r.nodes[q], -1.0);
            EXPECT_LT(r.nodes[q], 1.0);
            if (q > 0) EXPECT_LT(r.nodes[q - 1], r.nodes[q]);
            wsum += r.weights[q];
        }
        EXPECT_NEAR(wsum, 2.0, 1e-14);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (int q = 0; q < n; ++q) s += r.weights[q] * std::pow(r.nodes[q], d);
            const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
            EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " d=" << d;
        }
    }
}

TEST(Basis, PartitionOfUnityAndNodality) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 1; k <= 4; ++k) {
        const ReferenceBasis B(k);
        for (int t = 0; t < 20; ++t) {
            const auto phi = B.eval(U(rng), U(rng));
            double s = 0.0;
            for (double v : phi) s += v;
            EXPECT_NEAR(s, 1.0, 1e-13);
        }
        for (int a = 0; a < B.size(); ++a) {
            const auto node = B.node(a);
            const auto phi = B.eval(node[0], node[1]);
            for (int b = 0; b < B.size(); ++b) EXPECT_NEAR(phi[b], a == b ? 1.0 : 0.0, 1e-13);
        }
    }
}

TEST(Basis, GradientOfXiEta) {
    // ξη in the nodal basis: coefficient of node a is ξ_a η_a
    for (int k = 1; k <= 3; ++k) {
        const ReferenceBasis B(k);
        Eigen::VectorXd c(B.size());
        for (int a = 0; a < B.size(); ++a) c(a) = B.node(a)[0] * B.node(a)[1];
        const auto g = eval_basis_grad(k, 0.3, -0.2);
        double gx = 0.0, gy = 0.0;
        for (int a = 0; a < B.size(); ++a) {
            gx += c(a) * g.dxi[a];
            gy += c(a) * g.deta[a];
        }
        EXPECT_NEAR(gx, -0.2, 1e-14);
        EXPECT_NEAR(gy, 0.3, 1e-14);
    }
}

TEST(Basis, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    const double h = 1e-6;
    for (int k = 1; k <= 4; ++k)
        for (int t = 0; t < 10; ++t) {
            const double x = U(rng), y = U(rng);
            const auto g = eval_basis_grad(k, x, y);
            const auto px = eval_basis(k, x + h, y), mx = eval_basis(k, x - h, y);
            const auto py = eval_basis(k, x, y + h), my = eval_basis(k, x, y - h);
            for (std::size_t a = 0; a < g.dxi.size(); ++a) {
                EXPECT_NEAR(g.dxi[a], (px[a] - mx[a]) / (2 * h), 1e-6);
                EXPECT_NEAR(g.deta[a], (py[a] - my[a]) / (2 * h), 1e-6);
            }
        }
}

TEST(Basis, RepresentsRandomCubicExactly) {
    std::mt19937_64 rng(3);
    const auto p = random_qk(3, rng);
    const ReferenceBasis B(3);
    // fit: interpolation system at the nodes
    Eigen::MatrixXd V(B.size(), B.size());
    Eigen::VectorXd rhs(B.size());
    for (int r = 0; r < B.size(); ++r) {
        const auto node = B.node(r);
        const auto phi = B.eval(node[0], node[1]);
        for (int a = 0; a < B.size(); ++a) V(r, a) = phi[a];
        rhs(r) = p(node[0], node[1]);
    }
    const Eigen::VectorXd c = V.fullPivLu().solve(rhs);
    double err = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double x = -1.0 + 0.5 * i, y = -1.0 + 0.5 * j;
            err = std::max(err, std::abs(eval_coeffs(3, c, x, y) - p(x, y)));
        }
    EXPECT_LE(err, 1e-12);
}

TEST(Basis, RejectsUnsupportedDegree) {
    EXPECT_THROW(ReferenceBasis(0), std::invalid_argument);
    EXPECT_THROW(ReferenceBasis(16), std::invalid_argument);
}

TEST(MassMatrix, BilinearKnownValues) {
    const auto M = local_mass_matrix(1, gauss_legendre(3));
    // 1D mass on [-1,1] for linear nodal: [[2/3,1/3],[1/3,2/3]]; tensor product
    const double m1[2][2] = {{2.0 / 3, 1.0 / 3}, {1.0 / 3, 2.0 / 3}};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) EXPECT_NEAR(M(a, b), m1[a % 2][b % 2] * m1[a / 2][b / 2], 1e-15);
    EXPECT_NEAR(M.sum(), 4.0, 1e-14);
}

TEST(MassMatrix, SymmetricPositiveDefinite) {
    for (int k = 1; k <= 3; ++k) {
        const auto M = local_mass_matrix(k, gauss_legendre(k + 2));
        EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
        EXPECT_NEAR(M.sum(), 4.0, 1e-13);
    }
}

TEST(VeeInterpolation, ReproducesQk) {
    std::mt19937_64 rng(4);
    for (int k = 1; k <= 3; ++k) {
        const VeeInterpolator I(k);
        for (int t = 0; t < 5; ++t) {
            const auto p = random_qk(k, rng);
            const auto c = I.coefficients(p);
            for (int i = 0; i <= 6; ++i)
                for (int j = 0; j <= 6; ++j) {
                    const double x = -1.0 + i / 3.0, y = -1.0 + j / 3.0;
                    EXPECT_NEAR(eval_coeffs(k, c, x, y), p(x, y), 1e-12);
                }
        }
    }
}

TEST(VeeInterpolation, BilinearIsVertexInterpolation) {
    auto w = [](double x, double y) { return 1.0 + 2.0 * x - 0.5 * y + 0.25 * x * y; };
    const auto c = vee_interpolation_local(1, w, gauss_legendre(3));
    const ReferenceBasis B(1);
    for (int a = 0; a < 4; ++a) EXPECT_NEAR(c(a), w(B.node(a)[0], B.node(a)[1]), 1e-15);
}

// k=2, w = ξ³: the defining conditions, checked with an independent 2(k+2)-point rule.
TEST(VeeInterpolation, CubicConditionFamiliesK2) {
    const int k = 2;
    auto w = [](double x, double) { return x * x * x; };
    const auto c = vee_interpolation_local(k, w, gauss_legendre(k + 2));
    auto p = [&](double x, double y) { return eval_coeffs(k, c, x, y); };
    for (double vx : {-1.0, 1.0})
        for (double vy : {-1.0, 1.0}) EXPECT_NEAR(p(vx, vy), w(vx, vy), 1e-13);
    const auto r = gauss_legendre(2 * (k + 2));
    // edges: moments against P_0 (constants) in the parallel variable
    auto edge_moment = [&](auto f, int side) {
        double s = 0.0;
        for (int q = 0; q < r.n; ++q) {
            const double t = r.nodes[q];
            switch (side) {
            case 0: s += r.weights[q] * f(t, -1.0); break;
            case 1: s += r.weights[q] * f(1.0, t); break;
            case 2: s += r.weights[q] * f(t, 1.0); break;
            default: s += r.weights[q] * f(-1.0, t); break;
            }
        }
        return s;
    };
    for (int side = 0; side < 4; ++side) EXPECT_NEAR(edge_moment(p, side), edge_moment(w, side), 1e-13);
    double ip = 0.0, iw = 0.0;
    for (int a = 0; a < r.n; ++a)
        for (int b = 0; b < r.n; ++b) {
            ip += r.weights[a] * r.weights[b] * p(r.nodes[a], r.nodes[b]);
            iw += r.weights[a] * r.weights[b] * w(r.nodes[a], r.nodes[b]);
        }
    EXPECT_NEAR(ip, iw, 1e-13);
}

TEST(VeeInterpolation, ConditionFamiliesK3) {
    const int k = 3;
    auto w = [](double x, double y) { return std::exp(x) * std::sin(1.0 + y); };
    const auto rule = gauss_legendre(k + 2);
    const VeeInterpolator I(k, rule);
    const auto c = I.coefficients(w);
    auto p = [&](double x, double y) { return eval_coeffs(k, c, x, y); };
    // same quadrature realizes the functionals, so the functional vectors must agree
    const Eigen::VectorXd fp = I.apply_functionals(p), fw = I.apply_functionals(w);
    EXPECT_LE((fp - fw).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ(fp.size(), 4 + 4 * (k - 1) + (k - 1) * (k - 1));
}

TEST(VeeInterpolation, LinearAndStable) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int k = 1; k <= 3; ++k) {
        const VeeInterpolator I(k);
        for (int t = 0; t < 10; ++t) {
            const double a1 = U(rng), a2 = U(rng), a3 = U(rng), f1 = U(rng), f2 = U(rng);
            auto w1 = [&](double x, double y) { return std::sin(a1 * x + a2 * y) + a3; };
            auto w2 = [&](double x, double y) { return std::exp(f1 * x) * std::cos(f2 * y); };
            const double al = U(rng), be = U(rng);
            auto comb = [&](double x, double y) { return al * w1(x, y) + be * w2(x, y); };
            const Eigen::VectorXd lhs = I.coefficients(comb);
            const Eigen::VectorXd rhs = al * I.coefficients(w1) + be * I.coefficients(w2);
            EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);

            // L∞ stability on a sample grid
            double wmax = 0.0, pmax = 0.0;
            const Eigen::VectorXd c = I.coefficients(w2);
            for (int i = 0; i <= 20; ++i)
                for (int j = 0; j <= 20; ++j) {
                    const double x = -1.0 + i / 10.0, y = -1.0 + j / 10.0;
                    wmax = std::max(wmax, std::abs(w2(x, y)));
                    pmax = std::max(pmax, std::abs(eval_coeffs(k, c, x, y)));
                }
            EXPECT_LE(pmax, 10.0 * wmax);
        }
    }
}

TEST(L2Projection, XiSquaredOnBilinear) {
    auto w = [](double x, double) { return x * x; };
    const CellGeometry ref{-1.0, 1.0, -1.0, 1.0};
    const auto c = l2_projection_local(1, w, ref, gauss_legendre(3));
    // expected projection: the constant 1/3
    for (int a = 0; a < 4; ++a) EXPECT_NEAR(c(a), 1.0 / 3.0, 1e-15);
    // orthogonality against {1, ξ, η, ξη} with an independent rule
    const auto r = gauss_legendre(6);
    auto test_fn = [](int m, double x, double y) {
        switch (m) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return y;
        default: return x * y;
        }
    };
    for (int m = 0; m < 4; ++m) {
        double s = 0.0;
        for (int a = 0; a < r.n; ++a)
            for (int b = 0; b < r.n; ++b) {
                const double x = r.nodes[a], y = r.nodes[b];
                s += r.weights[a] * r.weights[b] * (w(x, y) - eval_coeffs(1, c, x, y)) * test_fn(m, x, y);
            }
        EXPECT_NEAR(s, 0.0, 1e-14);
    }
}

TEST(L2Projection, ReproducesQkAndConstants) {
    std::mt19937_64 rng(6);
    const CellGeometry cell{0.2, 0.45, 0.7, 0.71};
    for (int k = 1; k <= 3; ++k) {
        const L2Projector P(k);
        const auto one = P.coefficients([](double, double) { return 1.0; }, cell);
        for (int a = 0; a < one.size(); ++a) EXPECT_NEAR(one(a), 1.0, 1e-13);
        const auto p = random_qk(k, rng);
        // p is given in reference coordinates of `cell`; express in physical ones
        auto phys = [&](double x, double y) {
            return p((2 * x - cell.x0 - cell.x1) / cell.hx(), (2 * y - cell.y0 - cell.y1) / cell.hy());
        };
        const auto c = P.coefficients(phys, cell);
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; j <= 4; ++j) {
                const double x = -1.0 + 0.5 * i, y = -1.0 + 0.5 * j;
                EXPECT_NEAR(eval_coeffs(k, c, x, y), p(x, y), 1e-12);
            }
    }
}

TEST(L2Projection, Linear) {
    const L2Projector P(2);
    auto w1 = [](double x, double y) { return std::sin(3 * x) * y; };
    auto w2 = [](double x, double y) { return std::exp(x - y); };
    const Eigen::VectorXd lhs = P.coefficients([&](double x, double y) { return 2.0 * w1(x, y) - 0.5 * w2(x, y); });
    const Eigen::VectorXd rhs = 2.0 * P.coefficients(w1) - 0.5 * P.coefficients(w2);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}
