#pragma once

/**
 * @file assembly.hpp
 * @brief Assembly of the NIPG system B(u, v) = L(v) on a Shishkin mesh.
 *
 * Row index = test function, column index = trial function. Contributions:
 *  - cells: ε ∇u·∇v + (b·∇u) v + c u v, and the load f v;
 *  - every edge: -ε⟨∇u·ν⟩[v] + ε[u]⟨∇v·ν⟩ + ρ_e [u][v];
 *  - every inflow side of a cell: -(b·n) u⁺ v⁺ on Γ, -(b·n)(u⁺ - u⁻) v⁺ inside.
 * Homogeneous Dirichlet data is imposed weakly by default; the boundary edges
 * then carry the single-trace forms of the edge terms.
 */

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dg_function.hpp"
#include "mesh.hpp"
#include "problem.hpp"

namespace nipg {

enum class BoundaryImposition { weak, strong };

struct AssemblyOptions {
    int quad_points = 0;  // per direction; 0 selects k + 2
    BoundaryImposition boundary = BoundaryImposition::weak;
};

struct SystemMetadata {
    int N = 0;
    int k = 0;
    double eps = 0.0;
    double sigma = 0.0;
    int quad_points = 0;
    BoundaryImposition boundary = BoundaryImposition::weak;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

struct SparseSystem {
    SparseMatrix A;
    Eigen::VectorXd rhs;
    SystemMetadata meta;
};

/// Classification of the four sides of a cell into inflow (b·n < 0) and outflow.
struct InflowSplit {
    std::array<bool, 4> inflow{};  // indexed by Side
    std::array<bool, 4> on_boundary{};

    bool is_inflow(Side s) const { return inflow[static_cast<int>(s)]; }
    bool is_boundary(Side s) const { return on_boundary[static_cast<int>(s)]; }
};

/// Neighbour cell across side s, or kBoundary.
inline int neighbor(const ShishkinMesh& mesh, int cell, Side s) {
    const int i = mesh.cell_col(cell), j = mesh.cell_row(cell), N = mesh.N();
    switch (s) {
    case Side::left: return i > 0 ? mesh.cell_id(i - 1, j) : kBoundary;
    case Side::right: return i + 1 < N ? mesh.cell_id(i + 1, j) : kBoundary;
    case Side::bottom: return j > 0 ? mesh.cell_id(i, j - 1) : kBoundary;
    case Side::top: return j + 1 < N ? mesh.cell_id(i, j + 1) : kBoundary;
    }
    return kBoundary;
}

inline Side opposite(Side s) {
    switch (s) {
    case Side::left: return Side::right;
    case Side::right: return Side::left;
    case Side::bottom: return Side::top;
    case Side::top: return Side::bottom;
    }
    return s;
}

/// Physical point of side parameter t on `cell`.
inline Point side_physical_point(const CellGeometry& g, Side s, double t) {
    const auto p = side_point(s, t);
    return {g.x(p[0]), g.y(p[1])};
}

inline double side_length(const CellGeometry& g, Side s) {
    return (s == Side::left || s == Side::right) ? g.hy() : g.hx();
}

/**
 * Sign of b·n on each side, sampled at the given points per side. A side on
 * which b·n changes sign is rejected.
 */
inline InflowSplit inflow_outflow_split(const ShishkinMesh& mesh, int cell, const ProblemData& problem,
                                        const QuadratureRule& rule) {
    const auto g = cell_geometry(mesh, cell);
    InflowSplit split;
    for (Side s : kSides) {
        const Vec2 n = outward_normal(s);
        int negative = 0;
        for (int q = 0; q < rule.n; ++q) {
            const Point p = side_physical_point(g, s, rule.nodes[q]);
            if (dot(problem.b(p.x, p.y), n) < 0.0) ++negative;
        }
        if (negative != 0 && negative != rule.n)
            throw CoefficientConditionError("inflow_outflow_split: b·n changes sign along a cell side");
        split.inflow[static_cast<int>(s)] = negative == rule.n;
        split.on_boundary[static_cast<int>(s)] = neighbor(mesh, cell, s) == kBoundary;
    }
    return split;
}

inline InflowSplit inflow_outflow_split(const ShishkinMesh& mesh, int cell, const ProblemData& problem) {
    return inflow_outflow_split(mesh, cell, problem, gauss_legendre(3));
}

namespace detail {

class TripletBuffer {
public:
    TripletBuffer(const DofMap& map, std::size_t reserve) : map_(map) { triplets_.reserve(reserve); }

    void add_block(int row_cell, int col_cell, const Eigen::MatrixXd& block) {
        const int r0 = map_.offset(row_cell), c0 = map_.offset(col_cell);
        for (int a = 0; a < block.rows(); ++a)
            for (int b = 0; b < block.cols(); ++b) triplets_.emplace_back(r0 + a, c0 + b, block(a, b));
    }

    SparseMatrix build() const {
        SparseMatrix A(map_.total_dofs(), map_.total_dofs());
        A.setFromTriplets(triplets_.begin(), triplets_.end());
        A.makeCompressed();
        return A;
    }

private:
    DofMap map_;
    std::vector<Eigen::Triplet<double, int>> triplets_;
};

inline void check_coefficients(const ProblemData& problem, const MeshConfig& cfg, double x, double y) {
    const Vec2 b = problem.b(x, y);
    if (!(b.x >= cfg.beta1 && b.y >= cfg.beta2))
        throw CoefficientConditionError("assemble: b below (beta1, beta2) at a quadrature point");
    // c0^2 = 0 is admitted so that pure convection (c = div b = 0) can be assembled
    if (!(problem.c0_squared(x, y) >= 0.0))
        throw CoefficientConditionError("assemble: c - div(b)/2 negative at a quadrature point");
}

inline void impose_strong_zero(SparseSystem& sys, const ShishkinMesh& mesh, const DofMap& map) {
    const ReferenceBasis basis(map.degree());
    const int N = mesh.N();
    std::vector<char> fixed(static_cast<std::size_t>(map.total_dofs()), 0);
    for (int cell = 0; cell < map.num_cells(); ++cell) {
        const int i = mesh.cell_col(cell), j = mesh.cell_row(cell);
        for (int a = 0; a < map.dofs_per_cell(); ++a) {
            const auto node = basis.node(a);
            const bool on_gamma = (i == 0 && node[0] == -1.0) || (i == N - 1 && node[0] == 1.0) ||
                                  (j == 0 && node[1] == -1.0) || (j == N - 1 && node[1] == 1.0);
            if (on_gamma) fixed[map.offset(cell) + a] = 1;
        }
    }
    for (int r = 0; r < sys.A.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(sys.A, r); it; ++it) {
            if (fixed[r]) it.valueRef() = (it.col() == r) ? 1.0 : 0.0;
            else if (fixed[it.col()]) it.valueRef() = 0.0;
        }
    for (int r = 0; r < map.total_dofs(); ++r)
        if (fixed[r]) sys.rhs(r) = 0.0;
    sys.A.prune(0.0);
}

}  // namespace detail

inline SparseSystem assemble(const ShishkinMesh& mesh, const std::vector<Edge>& edges, const DofMap& map,
                             const ProblemData& problem, const AssemblyOptions& options = {}) {
    const int N = mesh.N();
    const int k = map.degree();
    if (map.N() != N) throw std::invalid_argument("assemble: dof map and mesh sizes differ");
    if (static_cast<int>(edges.size()) != 2 * N * (N + 1))
        throw std::invalid_argument("assemble: edge list does not match the mesh");
    const int nq = options.quad_points == 0 ? k + 2 : options.quad_points;
    if (nq < k + 1) throw std::invalid_argument("assemble: quadrature order below k + 1");
    if (problem.eps != mesh.config().eps)
        throw std::invalid_argument("assemble: problem and mesh use different eps");

    const double eps = problem.eps;
    const ReferenceTables T(k, nq);
    const int nloc = T.nloc;
    const int nvol = nq * nq;

    SparseSystem sys;
    sys.rhs = Eigen::VectorXd::Zero(map.total_dofs());
    sys.meta = {N, k, eps, mesh.config().sigma, nq, options.boundary};
    detail::TripletBuffer buffer(map, static_cast<std::size_t>(nloc) * nloc * (5 * N * N + 8 * N * (N + 1)));

    Eigen::MatrixXd K(nloc, nloc);
    std::vector<double> gx(nloc), gy(nloc);

    for (int cell = 0; cell < map.num_cells(); ++cell) {
        const auto g = cell_geometry(mesh, cell);
        const double J = g.jacobian(), sx = 2.0 / g.hx(), sy = 2.0 / g.hy();
        K.setZero();
        auto F = sys.rhs.segment(map.offset(cell), nloc);
        for (int q = 0; q < nvol; ++q) {
            const auto ref = T.volume_point(q);
            const double x = g.x(ref[0]), y = g.y(ref[1]);
            detail::check_coefficients(problem, mesh.config(), x, y);
            const Vec2 b = problem.b(x, y);
            const double c = problem.c(x, y);
            const double w = T.volume_weight(q) * J;
            const double fw = problem.f(x, y) * w;
            const auto& phi = T.phi[q];
            for (int a = 0; a < nloc; ++a) {
                gx[a] = sx * T.dxi[q][a];
                gy[a] = sy * T.deta[q][a];
            }
            for (int a = 0; a < nloc; ++a) {
                F(a) += fw * phi[a];
                for (int bb = 0; bb < nloc; ++bb)
                    K(a, bb) += w * (eps * (gx[a] * gx[bb] + gy[a] * gy[bb]) + (b.x * gx[bb] + b.y * gy[bb]) * phi[a] +
                                     c * phi[a] * phi[bb]);
            }
        }

        // upwind terms on inflow sides
        const auto split = inflow_outflow_split(mesh, cell, problem, T.rule);
        for (Side s : kSides) {
            if (!split.is_inflow(s)) continue;
            const int sidx = static_cast<int>(s);
            const Vec2 n = outward_normal(s);
            const double half_len = 0.5 * side_length(g, s);
            const int nb = neighbor(mesh, cell, s);
            Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nloc, nloc);
            for (int q = 0; q < nq; ++q) {
                const Point p = side_physical_point(g, s, T.rule.nodes[q]);
                const double bn = dot(problem.b(p.x, p.y), n) * T.rule.weights[q] * half_len;
                const auto& phi = T.side_phi[sidx][q];
                for (int a = 0; a < nloc; ++a)
                    for (int bb = 0; bb < nloc; ++bb) K(a, bb) -= bn * phi[bb] * phi[a];
                if (nb != kBoundary) {
                    const auto& phin = T.side_phi[static_cast<int>(opposite(s))][q];
                    for (int a = 0; a < nloc; ++a)
                        for (int bb = 0; bb < nloc; ++bb) C(a, bb) += bn * phin[bb] * phi[a];
                }
            }
            if (nb != kBoundary) buffer.add_block(cell, nb, C);
        }
        buffer.add_block(cell, cell, K);
    }

    // edge terms of B1
    struct SideData {
        int cell;
        int side;
        double jump;  // coefficient of this trace in [·]
        double mean;  // coefficient of this trace in ⟨·⟩
        double sx, sy;
    };
    for (const auto& e : edges) {
        std::array<SideData, 2> sides{};
        int nsides = 0;
        auto make = [&](int cell, double jump, double mean) {
            const auto g = cell_geometry(mesh, cell);
            return SideData{cell, static_cast<int>(side_of(mesh, e, cell)), jump, mean, 2.0 / g.hx(), 2.0 / g.hy()};
        };
        if (e.on_boundary()) {
            sides[nsides++] = make(e.plus_elem, 1.0, 1.0);
        } else {
            sides[nsides++] = make(e.plus_elem, 1.0, 0.5);
            sides[nsides++] = make(e.minus_elem, -1.0, 0.5);
        }
        const double half_len = 0.5 * e.length;
        for (int t = 0; t < nsides; ++t)
            for (int s = 0; s < nsides; ++s) {
                const auto& St = sides[t];
                const auto& Ss = sides[s];
                Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(nloc, nloc);
                for (int q = 0; q < nq; ++q) {
                    const double w = T.rule.weights[q] * half_len;
                    const auto& pt = T.side_phi[St.side][q];
                    const auto& ps = T.side_phi[Ss.side][q];
                    for (int a = 0; a < nloc; ++a) {
                        const double dn_t = e.normal.x * St.sx * T.side_dxi[St.side][q][a] +
                                            e.normal.y * St.sy * T.side_deta[St.side][q][a];
                        for (int bb = 0; bb < nloc; ++bb) {
                            const double dn_s = e.normal.x * Ss.sx * T.side_dxi[Ss.side][q][bb] +
                                                e.normal.y * Ss.sy * T.side_deta[Ss.side][q][bb];
                            blk(a, bb) += w * (-eps * Ss.mean * dn_s * St.jump * pt[a] +
                                               eps * Ss.jump * ps[bb] * St.mean * dn_t +
                                               e.rho * Ss.jump * ps[bb] * St.jump * pt[a]);
                        }
                    }
                }
                buffer.add_block(St.cell, Ss.cell, blk);
            }
    }

    sys.A = buffer.build();
    if (options.boundary == BoundaryImposition::strong) detail::impose_strong_zero(sys, mesh, map);
    return sys;
}

/// Coordinate text export: a header line, then "row col value" (0-based) per stored entry.
inline void write_coordinate(const SparseSystem& sys, std::ostream& os) {
    os << "# rows " << sys.A.rows() << " cols " << sys.A.cols() << " nnz " << sys.A.nonZeros() << '\n';
    char buf[64];
    for (int r = 0; r < sys.A.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(sys.A, r); it; ++it) {
            std::snprintf(buf, sizeof buf, "%.17g", it.value());
            os << r << ' ' << it.col() << ' ' << buf << '\n';
        }
}

}  // namespace nipg
