#pragma once

/**
 * @file local_operators.hpp
 * @brief Local mass matrix and the two element-local interpolation operators:
 *        the vertices-edges-element interpolant and the local L2 projection.
 *
 * Both operators work on the reference square; physical cells are reached
 * through the affine map of CellGeometry.
 */

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "quadrature.hpp"

namespace nipg {

/// Axis-aligned rectangle (x0, x1) × (y0, y1).
struct CellGeometry {
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;

    double hx() const { return x1 - x0; }
    double hy() const { return y1 - y0; }
    // exact at the cell corners, so neighbouring cells sample identical points
    double x(double xi) const { return 0.5 * (x0 * (1.0 - xi) + x1 * (1.0 + xi)); }
    double y(double eta) const { return 0.5 * (y0 * (1.0 - eta) + y1 * (1.0 + eta)); }
    double jacobian() const { return 0.25 * hx() * hy(); }
};

inline Eigen::MatrixXd local_mass_matrix(const ReferenceBasis& basis, const QuadratureRule& rule) {
    const int n = basis.size();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> phi(n);
    for (int qy = 0; qy < rule.n; ++qy)
        for (int qx = 0; qx < rule.n; ++qx) {
            basis.eval(rule.nodes[qx], rule.nodes[qy], phi);
            const double w = rule.weights[qx] * rule.weights[qy];
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) M(a, b) += w * phi[a] * phi[b];
        }
    return M;
}

inline Eigen::MatrixXd local_mass_matrix(int k, const QuadratureRule& rule) {
    return local_mass_matrix(ReferenceBasis(k), rule);
}

/**
 * Vertices-edges-element interpolation Î onto Q_k(K̂).
 *
 * Degrees of freedom, in row order of the functional matrix:
 *   4 vertex values, (k-1) Legendre moments on each of the 4 edges,
 *   (k-1)^2 tensor-Legendre interior moments.
 * The functional matrix is factorized once per degree.
 */
class VeeInterpolator {
public:
    VeeInterpolator(int k, QuadratureRule rule) : basis_(k), rule_(std::move(rule)) {
        const int n = basis_.size();
        if (4 + 4 * (k - 1) + (k - 1) * (k - 1) != n)
            throw std::logic_error("vee interpolation: functional count mismatch");
        Eigen::MatrixXd F(n, n);
        for (int b = 0; b < n; ++b) {
            auto column = apply_functionals([&](double xi, double eta) {
                std::vector<double> phi(n);
                basis_.eval(xi, eta, phi);
                return phi[b];
            });
            F.col(b) = column;
        }
        lu_ = F.fullPivLu();
        if (!lu_.isInvertible())
            throw std::runtime_error("vee interpolation: singular functional matrix");
    }

    explicit VeeInterpolator(int k) : VeeInterpolator(k, gauss_legendre(k + 2)) {}

    int degree() const { return basis_.degree(); }
    const ReferenceBasis& basis() const { return basis_; }
    const QuadratureRule& rule() const { return rule_; }

    /// Coefficients of Î w for w given on reference coordinates.
    template <class F>
    Eigen::VectorXd coefficients(F&& w) const {
        return lu_.solve(apply_functionals(w));
    }

    /// Coefficients of I_K w for w given in physical coordinates on `cell`.
    template <class F>
    Eigen::VectorXd coefficients(F&& w, const CellGeometry& cell) const {
        return coefficients([&](double xi, double eta) { return w(cell.x(xi), cell.y(eta)); });
    }

    /// The defining functionals evaluated on w (vertex values, edge and interior moments).
    template <class F>
    Eigen::VectorXd apply_functionals(F&& w) const {
        const int k = basis_.degree();
        const int n = basis_.size();
        Eigen::VectorXd out(n);
        int row = 0;
        static constexpr std::array<std::array<double, 2>, 4> vertices{
            {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};
        for (const auto& v : vertices) out(row++) = w(v[0], v[1]);
        const int nq = rule_.n;
        // edges: bottom (η=-1), right (ξ=1), top (η=1), left (ξ=-1); moment in the parallel variable
        if (k >= 2) {
            std::vector<double> trace(nq);
            for (int side = 0; side < 4; ++side) {
                for (int q = 0; q < nq; ++q) {
                    const double t = rule_.nodes[q];
                    switch (side) {
                    case 0: trace[q] = w(t, -1.0); break;
                    case 1: trace[q] = w(1.0, t); break;
                    case 2: trace[q] = w(t, 1.0); break;
                    default: trace[q] = w(-1.0, t); break;
                    }
                }
                for (int m = 0; m <= k - 2; ++m) {
                    double s = 0.0;
                    for (int q = 0; q < nq; ++q) s += rule_.weights[q] * trace[q] * legendre(m, rule_.nodes[q]);
                    out(row++) = s;
                }
            }
            std::vector<double> inner(static_cast<std::size_t>(nq * nq));
            for (int qy = 0; qy < nq; ++qy)
                for (int qx = 0; qx < nq; ++qx) inner[qx + nq * qy] = w(rule_.nodes[qx], rule_.nodes[qy]);
            for (int my = 0; my <= k - 2; ++my)
                for (int mx = 0; mx <= k - 2; ++mx) {
                    double s = 0.0;
                    for (int qy = 0; qy < nq; ++qy)
                        for (int qx = 0; qx < nq; ++qx)
                            s += rule_.weights[qx] * rule_.weights[qy] * inner[qx + nq * qy] *
                                 legendre(mx, rule_.nodes[qx]) * legendre(my, rule_.nodes[qy]);
                    out(row++) = s;
                }
        }
        return out;
    }

private:
    ReferenceBasis basis_;
    QuadratureRule rule_;
    Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

/// Local L2 projection onto Q_k of one cell. The affine Jacobian cancels, so the
/// projection is computed on the reference square.
class L2Projector {
public:
    L2Projector(int k, QuadratureRule rule) : basis_(k), rule_(std::move(rule)) {
        const int n = basis_.size();
        mass_ = local_mass_matrix(basis_, rule_);
        llt_ = mass_.llt();
        if (llt_.info() != Eigen::Success)
            throw std::runtime_error("l2 projection: mass matrix not positive definite");
        phi_.resize(static_cast<std::size_t>(rule_.n * rule_.n), std::vector<double>(n));
        for (int qy = 0; qy < rule_.n; ++qy)
            for (int qx = 0; qx < rule_.n; ++qx)
                basis_.eval(rule_.nodes[qx], rule_.nodes[qy], phi_[qx + rule_.n * qy]);
    }

    explicit L2Projector(int k) : L2Projector(k, gauss_legendre(k + 2)) {}

    const ReferenceBasis& basis() const { return basis_; }
    const Eigen::MatrixXd& mass() const { return mass_; }

    template <class F>
    Eigen::VectorXd coefficients(F&& w) const {
        const int n = basis_.size();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        for (int qy = 0; qy < rule_.n; ++qy)
            for (int qx = 0; qx < rule_.n; ++qx) {
                const double wq = rule_.weights[qx] * rule_.weights[qy] *
                                  w(rule_.nodes[qx], rule_.nodes[qy]);
                const auto& phi = phi_[qx + rule_.n * qy];
                for (int a = 0; a < n; ++a) rhs(a) += wq * phi[a];
            }
        return llt_.solve(rhs);
    }

    template <class F>
    Eigen::VectorXd coefficients(F&& w, const CellGeometry& cell) const {
        return coefficients([&](double xi, double eta) { return w(cell.x(xi), cell.y(eta)); });
    }

private:
    ReferenceBasis basis_;
    QuadratureRule rule_;
    Eigen::MatrixXd mass_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    std::vector<std::vector<double>> phi_;
};

template <class F>
Eigen::VectorXd vee_interpolation_local(int k, F&& w, const QuadratureRule& rule) {
    return VeeInterpolator(k, rule).coefficients(std::forward<F>(w));
}

template <class F>
Eigen::VectorXd l2_projection_local(int k, F&& w, const CellGeometry& cell, const QuadratureRule& rule) {
    return L2Projector(k, rule).coefficients(std::forward<F>(w), cell);
}

}  // namespace nipg
