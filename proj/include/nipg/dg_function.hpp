#pragma once

/**
 * @file dg_function.hpp
 * @brief Element-local dof map of the broken space, discrete functions on it,
 *        precomputed reference tables, and two-sided edge traces.
 */

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

#include "felib/basis.hpp"
#include "felib/local_operators.hpp"
#include "felib/quadrature.hpp"
#include "mesh.hpp"
#include "problem.hpp"

namespace nipg {

class DofMap {
public:
    DofMap() = default;
    DofMap(int k, int N) : k_(k), N_(N) {
        if (k < 1) throw std::invalid_argument("DofMap: degree must be >= 1");
        if (N < 1) throw std::invalid_argument("DofMap: N must be positive");
    }

    int degree() const { return k_; }
    int N() const { return N_; }
    int dofs_per_cell() const { return (k_ + 1) * (k_ + 1); }
    int num_cells() const { return N_ * N_; }
    int total_dofs() const { return num_cells() * dofs_per_cell(); }
    int offset(int cell) const { return cell * dofs_per_cell(); }

    friend bool operator==(const DofMap&, const DofMap&) = default;

private:
    int k_ = 1;
    int N_ = 1;
};

class DGFunction {
public:
    DGFunction() = default;
    explicit DGFunction(DofMap map) : map_(map), coeffs_(Eigen::VectorXd::Zero(map.total_dofs())) {}
    DGFunction(DofMap map, Eigen::VectorXd coeffs) : map_(map), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != map_.total_dofs())
            throw std::invalid_argument("DGFunction: coefficient length does not match dof map");
    }

    const DofMap& dofmap() const { return map_; }
    const Eigen::VectorXd& coefficients() const { return coeffs_; }
    Eigen::VectorXd& coefficients() { return coeffs_; }

    auto cell_coefficients(int cell) const { return coeffs_.segment(map_.offset(cell), map_.dofs_per_cell()); }
    auto cell_coefficients(int cell) { return coeffs_.segment(map_.offset(cell), map_.dofs_per_cell()); }

    DGFunction& operator+=(const DGFunction& o) {
        coeffs_ += o.coeffs_;
        return *this;
    }
    friend DGFunction operator-(const DGFunction& a, const DGFunction& b) {
        return DGFunction(a.map_, a.coeffs_ - b.coeffs_);
    }
    friend DGFunction operator+(const DGFunction& a, const DGFunction& b) {
        return DGFunction(a.map_, a.coeffs_ + b.coeffs_);
    }
    friend DGFunction operator*(double s, const DGFunction& a) { return DGFunction(a.map_, s * a.coeffs_); }

private:
    DofMap map_;
    Eigen::VectorXd coeffs_;
};

inline CellGeometry cell_geometry(const ShishkinMesh& mesh, int cell) {
    const int i = mesh.cell_col(cell), j = mesh.cell_row(cell);
    return {mesh.x_pts()[i], mesh.x_pts()[i + 1], mesh.y_pts()[j], mesh.y_pts()[j + 1]};
}

/// Sides of the reference square with their outward normals.
enum class Side { left = 0, right = 1, bottom = 2, top = 3 };

inline constexpr std::array<Side, 4> kSides{Side::left, Side::right, Side::bottom, Side::top};

inline Vec2 outward_normal(Side s) {
    switch (s) {
    case Side::left: return {-1.0, 0.0};
    case Side::right: return {1.0, 0.0};
    case Side::bottom: return {0.0, -1.0};
    case Side::top: return {0.0, 1.0};
    }
    return {};
}

/// Reference coordinates of edge parameter t ∈ [-1, 1] on a side (t runs along the side).
inline std::array<double, 2> side_point(Side s, double t) {
    switch (s) {
    case Side::left: return {-1.0, t};
    case Side::right: return {1.0, t};
    case Side::bottom: return {t, -1.0};
    case Side::top: return {t, 1.0};
    }
    return {};
}

/**
 * Basis values and reference gradients at tensor Gauss points of the cell and
 * at 1D Gauss points on each of the four sides.
 */
struct ReferenceTables {
    int k = 1;
    int nloc = 4;
    QuadratureRule rule;
    // volume: index q = qx + n*qy
    std::vector<std::vector<double>> phi, dxi, deta;
    // sides: [side][q][a]
    std::array<std::vector<std::vector<double>>, 4> side_phi, side_dxi, side_deta;

    ReferenceTables(int degree, int points) : k(degree), rule(gauss_legendre(points)) {
        ReferenceBasis basis(degree);
        nloc = basis.size();
        const int n = rule.n;
        phi.assign(n * n, std::vector<double>(nloc));
        dxi = deta = phi;
        for (int qy = 0; qy < n; ++qy)
            for (int qx = 0; qx < n; ++qx) {
                const int q = qx + n * qy;
                basis.eval(rule.nodes[qx], rule.nodes[qy], phi[q]);
                basis.eval_grad(rule.nodes[qx], rule.nodes[qy], dxi[q], deta[q]);
            }
        for (Side s : kSides) {
            auto& sp = side_phi[static_cast<int>(s)];
            auto& sx = side_dxi[static_cast<int>(s)];
            auto& sy = side_deta[static_cast<int>(s)];
            sp.assign(n, std::vector<double>(nloc));
            sx = sy = sp;
            for (int q = 0; q < n; ++q) {
                const auto p = side_point(s, rule.nodes[q]);
                basis.eval(p[0], p[1], sp[q]);
                basis.eval_grad(p[0], p[1], sx[q], sy[q]);
            }
        }
    }

    int points() const { return rule.n; }
    double volume_weight(int q) const { return rule.weights[q % rule.n] * rule.weights[q / rule.n]; }
    std::array<double, 2> volume_point(int q) const { return {rule.nodes[q % rule.n], rule.nodes[q / rule.n]}; }
};

/// Which side of cell `cell` an edge is.
inline Side side_of(const ShishkinMesh& mesh, const Edge& e, int cell) {
    const int i = mesh.cell_col(cell), j = mesh.cell_row(cell);
    if (e.orientation == Orientation::vertical) {
        if (e.line == i) return Side::left;
        if (e.line == i + 1) return Side::right;
    } else {
        if (e.line == j) return Side::bottom;
        if (e.line == j + 1) return Side::top;
    }
    throw std::logic_error("side_of: edge is not a side of the cell");
}

/// Value of v inside `cell` at reference coordinates (xi, eta).
inline double cell_value(const ReferenceBasis& basis, const DGFunction& v, int cell, double xi, double eta) {
    std::array<double, 256> phi{};
    const int n = basis.size();
    basis.eval(xi, eta, std::span<double>(phi.data(), n));
    const auto c = v.cell_coefficients(cell);
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += c(a) * phi[a];
    return s;
}

/// Point evaluation; points on interior edges take the value of the lower-index cell.
inline double evaluate(const ShishkinMesh& mesh, const DGFunction& v, Point p) {
    const auto [i, j] = mesh.locate(p);
    const int cell = mesh.cell_id(i, j);
    const auto g = cell_geometry(mesh, cell);
    const double xi = (2.0 * p.x - g.x0 - g.x1) / g.hx();
    const double eta = (2.0 * p.y - g.y0 - g.y1) / g.hy();
    return cell_value(ReferenceBasis(v.dofmap().degree()), v, cell, xi, eta);
}

struct TracePair {
    std::vector<double> plus;
    std::vector<double> minus;  // empty on Γ
    bool boundary = false;

    /// [v] = v⁺ - v⁻ (v on Γ).
    std::vector<double> jump() const {
        std::vector<double> j(plus);
        if (!boundary)
            for (std::size_t q = 0; q < j.size(); ++q) j[q] -= minus[q];
        return j;
    }
    /// ⟨v⟩ = (v⁺ + v⁻)/2 (v on Γ).
    std::vector<double> mean() const {
        std::vector<double> m(plus);
        if (!boundary)
            for (std::size_t q = 0; q < m.size(); ++q) m[q] = 0.5 * (plus[q] + minus[q]);
        return m;
    }
};

/// Traces of v on edge e at edge parameters s ∈ [-1, 1] (from e.a to e.b).
inline TracePair trace_pair(const ShishkinMesh& mesh, const DGFunction& v, const Edge& e,
                            const std::vector<double>& s) {
    const ReferenceBasis basis(v.dofmap().degree());
    auto side_values = [&](int cell) {
        const Side sd = side_of(mesh, e, cell);
        std::vector<double> out(s.size());
        for (std::size_t q = 0; q < s.size(); ++q) {
            const auto p = side_point(sd, s[q]);
            out[q] = cell_value(basis, v, cell, p[0], p[1]);
        }
        return out;
    };
    TracePair t;
    t.plus = side_values(e.plus_elem);
    t.boundary = e.on_boundary();
    if (!t.boundary) t.minus = side_values(e.minus_elem);
    return t;
}

}  // namespace nipg
