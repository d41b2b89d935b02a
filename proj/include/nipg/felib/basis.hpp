#pragma once

// Tensor-product Lagrange basis of Q_k on the reference square (-1,1)^2,
// nodal at the (k+1) Gauss-Lobatto points per direction.

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "quadrature.hpp"

namespace nipg {

class LagrangeBasis1D {
public:
    explicit LagrangeBasis1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {}

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }

    double value(int a, double x) const {
        double v = 1.0;
        for (int m = 0; m < size(); ++m)
            if (m != a) v *= (x - nodes_[m]) / (nodes_[a] - nodes_[m]);
        return v;
    }

    double derivative(int a, double x) const {
        double sum = 0.0;
        for (int l = 0; l < size(); ++l) {
            if (l == a) continue;
            double term = 1.0 / (nodes_[a] - nodes_[l]);
            for (int m = 0; m < size(); ++m)
                if (m != a && m != l) term *= (x - nodes_[m]) / (nodes_[a] - nodes_[m]);
            sum += term;
        }
        return sum;
    }

private:
    std::vector<double> nodes_;
};

/// Local dof a = ix + (k+1)*iy, with ix, iy indexing Lobatto nodes in ξ and η.
class ReferenceBasis {
public:
    explicit ReferenceBasis(int k) : k_(checked(k)), line_(gauss_lobatto_nodes(k + 1)) {}

    int degree() const { return k_; }
    int size() const { return (k_ + 1) * (k_ + 1); }
    int per_dir() const { return k_ + 1; }
    const LagrangeBasis1D& line() const { return line_; }
    int index(int ix, int iy) const { return ix + (k_ + 1) * iy; }

    void eval(double xi, double eta, std::span<double> out) const {
        const int n = per_dir();
        std::array<double, 16> vx{}, vy{};
        for (int a = 0; a < n; ++a) {
            vx[a] = line_.value(a, xi);
            vy[a] = line_.value(a, eta);
        }
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) out[index(ix, iy)] = vx[ix] * vy[iy];
    }

    /// Gradients with respect to (ξ, η).
    void eval_grad(double xi, double eta, std::span<double> dxi, std::span<double> deta) const {
        const int n = per_dir();
        std::array<double, 16> vx{}, vy{}, dx{}, dy{};
        for (int a = 0; a < n; ++a) {
            vx[a] = line_.value(a, xi);
            vy[a] = line_.value(a, eta);
            dx[a] = line_.derivative(a, xi);
            dy[a] = line_.derivative(a, eta);
        }
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                dxi[index(ix, iy)] = dx[ix] * vy[iy];
                deta[index(ix, iy)] = vx[ix] * dy[iy];
            }
    }

    std::vector<double> eval(double xi, double eta) const {
        std::vector<double> v(size());
        eval(xi, eta, v);
        return v;
    }

    /// Reference coordinates of the node of local dof a.
    std::array<double, 2> node(int a) const {
        return {line_.nodes()[a % per_dir()], line_.nodes()[a / per_dir()]};
    }

private:
    static int checked(int k) {
        if (k < 1 || k > 15) throw std::invalid_argument("ReferenceBasis: degree must be in [1, 15]");
        return k;
    }

    int k_;
    LagrangeBasis1D line_;
};

inline std::vector<double> eval_basis(int k, double xi, double eta) {
    return ReferenceBasis(k).eval(xi, eta);
}

struct BasisGradients {
    std::vector<double> dxi, deta;
};

inline BasisGradients eval_basis_grad(int k, double xi, double eta) {
    ReferenceBasis basis(k);
    BasisGradients g{std::vector<double>(basis.size()), std::vector<double>(basis.size())};
    basis.eval_grad(xi, eta, g.dxi, g.deta);
    return g;
}

}  // namespace nipg
