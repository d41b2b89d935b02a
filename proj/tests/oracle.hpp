#pragma once

// Brute-force reference evaluations used by the tests and the acceptance
// binary. Everything here is written from the weak form directly: edges are
// enumerated from the grid lines (not from classify_edges), penalties are typed
// from the geometry, and every term is integrated by point evaluation of the
// two discrete functions.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "nipg/nipg.hpp"

namespace oracle {

using nipg::DGFunction;
using nipg::ProblemData;
using nipg::ShishkinMesh;

struct ValueGrad {
    double v = 0.0, dx = 0.0, dy = 0.0;
};

/// v and ∇v of the polynomial on cell (i, j) at reference coordinates (xi, eta). Points are
/// passed in reference form because recovering them from physical coordinates cancels badly
/// on cells of width ~ε.
inline ValueGrad eval_on_cell(const ShishkinMesh& mesh, const DGFunction& v, int i, int j, double xi, double eta) {
    const int k = v.dofmap().degree();
    const double x0 = mesh.x_pts()[i], x1 = mesh.x_pts()[i + 1];
    const double y0 = mesh.y_pts()[j], y1 = mesh.y_pts()[j + 1];
    const auto phi = nipg::eval_basis(k, xi, eta);
    const auto g = nipg::eval_basis_grad(k, xi, eta);
    const auto c = v.cell_coefficients(mesh.cell_id(i, j));
    ValueGrad out;
    for (std::size_t a = 0; a < phi.size(); ++a) {
        out.v += c(a) * phi[a];
        out.dx += c(a) * g.dxi[a] * 2.0 / (x1 - x0);
        out.dy += c(a) * g.deta[a] * 2.0 / (y1 - y0);
    }
    return out;
}

/// Value on cell (i, j) at the point of its side `side` (-1 or +1 in the direction normal to
/// the side) with tangential reference coordinate t.
inline ValueGrad eval_on_side(const ShishkinMesh& mesh, const DGFunction& v, int i, int j, bool vertical,
                              double side, double t) {
    return vertical ? eval_on_cell(mesh, v, i, j, side, t) : eval_on_cell(mesh, v, i, j, t, side);
}

/// Penalty of a grid segment, typed from its position relative to the transition lines.
inline double penalty(const ShishkinMesh& mesh, bool vertical, int line, int cell) {
    const int N = mesh.N();
    const double Nd = N;
    const bool long_edge = cell < N / 2;  // lies in the coarse part of the other direction
    if (!long_edge) return Nd;            // M3
    const auto& pts = vertical ? mesh.x_pts() : mesh.y_pts();
    const double lambda = vertical ? mesh.lambda_x() : mesh.lambda_y();
    const double pos = pts[line], transition = 1.0 - lambda;
    if (pos < transition) return 1.0;  // M1
    if (pos == transition) return Nd;  // M4
    return Nd * Nd;                    // M2
}

/// One grid segment with its two adjacent cells (or one on Γ) and a unit normal.
struct Segment {
    bool vertical;
    int line, cell;
    int pi, pj;          // "first" cell
    int mi = -1, mj = -1;  // second cell, -1 on Γ
    double nx, ny;       // from first to second (outward on Γ)
    double a0, a1;       // parameter range along the segment
    double fixed;        // the constant coordinate
};

inline std::vector<Segment> segments(const ShishkinMesh& mesh) {
    const int N = mesh.N();
    std::vector<Segment> out;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j < N; ++j) {
            Segment s{true, i, j, 0, 0, -1, -1, 1.0, 0.0, mesh.y_pts()[j], mesh.y_pts()[j + 1], mesh.x_pts()[i]};
            if (i == 0) {
                s.pi = 0, s.pj = j, s.nx = -1.0;
            } else {
                s.pi = i - 1, s.pj = j;
                if (i < N) s.mi = i, s.mj = j;
            }
            out.push_back(s);
        }
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i < N; ++i) {
            Segment s{false, j, i, 0, 0, -1, -1, 0.0, 1.0, mesh.x_pts()[i], mesh.x_pts()[i + 1], mesh.y_pts()[j]};
            if (j == 0) {
                s.pi = i, s.pj = 0, s.ny = -1.0;
            } else {
                s.pi = i, s.pj = j - 1;
                if (j < N) s.mi = i, s.mj = j;
            }
            out.push_back(s);
        }
    return out;
}

struct Parts {
    double grad = 0, reaction = 0, penalty = 0, inflow_boundary = 0, inflow_jump = 0, outflow_boundary = 0;
};

/// B(u, v) directly from the weak form, with `nq` Gauss points per direction.
inline double bilinear(const ShishkinMesh& mesh, const ProblemData& pb, const DGFunction& u, const DGFunction& v,
                       int nq) {
    const auto rule = nipg::gauss_legendre(nq);
    const int N = mesh.N();
    const double eps = pb.eps;
    double total = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double x0 = mesh.x_pts()[i], x1 = mesh.x_pts()[i + 1];
            const double y0 = mesh.y_pts()[j], y1 = mesh.y_pts()[j + 1];
            for (int qx = 0; qx < nq; ++qx)
                for (int qy = 0; qy < nq; ++qy) {
                    const double x = x0 + 0.5 * (1 + rule.nodes[qx]) * (x1 - x0);
                    const double y = y0 + 0.5 * (1 + rule.nodes[qy]) * (y1 - y0);
                    const double w = rule.weights[qx] * rule.weights[qy] * 0.25 * (x1 - x0) * (y1 - y0);
                    const auto U = eval_on_cell(mesh, u, i, j, rule.nodes[qx], rule.nodes[qy]);
                    const auto V = eval_on_cell(mesh, v, i, j, rule.nodes[qx], rule.nodes[qy]);
                    const auto b = pb.b(x, y);
                    total += w * (eps * (U.dx * V.dx + U.dy * V.dy) + (b.x * U.dx + b.y * U.dy) * V.v +
                                  pb.c(x, y) * U.v * V.v);
                }
            // upwind terms, side by side: left, right, bottom, top
            struct SideDef {
                double nx, ny;
                int ni, nj;
                bool vertical;
                double fixed, a0, a1;
            };
            const SideDef sides[4] = {{-1, 0, i - 1, j, true, x0, y0, y1},
                                      {1, 0, i + 1, j, true, x1, y0, y1},
                                      {0, -1, i, j - 1, false, y0, x0, x1},
                                      {0, 1, i, j + 1, false, y1, x0, x1}};
            for (const auto& s : sides) {
                const bool inside = s.ni >= 0 && s.ni < N && s.nj >= 0 && s.nj < N;
                for (int q = 0; q < nq; ++q) {
                    const double t = s.a0 + 0.5 * (1 + rule.nodes[q]) * (s.a1 - s.a0);
                    const double x = s.vertical ? s.fixed : t, y = s.vertical ? t : s.fixed;
                    const auto b = pb.b(x, y);
                    const double bn = b.x * s.nx + b.y * s.ny;
                    if (!(bn < 0.0)) continue;
                    const double w = rule.weights[q] * 0.5 * (s.a1 - s.a0);
                    const double own = s.nx + s.ny, tq = rule.nodes[q];
                    const double uin = eval_on_side(mesh, u, i, j, s.vertical, own, tq).v;
                    const double uout = inside ? eval_on_side(mesh, u, s.ni, s.nj, s.vertical, -own, tq).v : 0.0;
                    total -= w * bn * (uin - uout) * eval_on_side(mesh, v, i, j, s.vertical, own, tq).v;
                }
            }
        }
    for (const auto& s : segments(mesh)) {
        const double rho = penalty(mesh, s.vertical, s.line, s.cell);
        const bool boundary = s.mi < 0;
        for (int q = 0; q < nq; ++q) {
            const double w = rule.weights[q] * 0.5 * (s.a1 - s.a0);
            const double first = s.line == 0 ? -1.0 : 1.0, tq = rule.nodes[q];
            const auto Up = eval_on_side(mesh, u, s.pi, s.pj, s.vertical, first, tq);
            const auto Vp = eval_on_side(mesh, v, s.pi, s.pj, s.vertical, first, tq);
            double ju = Up.v, jv = Vp.v;
            double mu = Up.dx * s.nx + Up.dy * s.ny, mv = Vp.dx * s.nx + Vp.dy * s.ny;
            if (!boundary) {
                const auto Um = eval_on_side(mesh, u, s.mi, s.mj, s.vertical, -1.0, tq);
                const auto Vm = eval_on_side(mesh, v, s.mi, s.mj, s.vertical, -1.0, tq);
                ju -= Um.v;
                jv -= Vm.v;
                mu = 0.5 * (mu + Um.dx * s.nx + Um.dy * s.ny);
                mv = 0.5 * (mv + Vm.dx * s.nx + Vm.dy * s.ny);
            }
            total += w * (-eps * mu * jv + eps * ju * mv + rho * ju * jv);
        }
    }
    return total;
}

/// Dense matrix A(i, j) = B(φ_j, φ_i) (row = test function).
inline Eigen::MatrixXd dense_matrix(const ShishkinMesh& mesh, const ProblemData& pb, int k, int nq) {
    const nipg::DofMap map(k, mesh.N());
    const int n = map.total_dofs();
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
        DGFunction phi_i(map);
        phi_i.coefficients()(i) = 1.0;
        for (int j = 0; j < n; ++j) {
            DGFunction phi_j(map);
            phi_j.coefficients()(j) = 1.0;
            A(i, j) = bilinear(mesh, pb, phi_j, phi_i, nq);
        }
    }
    return A;
}

/// Energy-norm components by point evaluation.
inline Parts energy_parts(const ShishkinMesh& mesh, const ProblemData& pb, const DGFunction& v, int nq) {
    const auto rule = nipg::gauss_legendre(nq);
    const int N = mesh.N();
    Parts p;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double x0 = mesh.x_pts()[i], x1 = mesh.x_pts()[i + 1];
            const double y0 = mesh.y_pts()[j], y1 = mesh.y_pts()[j + 1];
            for (int qx = 0; qx < nq; ++qx)
                for (int qy = 0; qy < nq; ++qy) {
                    const double x = x0 + 0.5 * (1 + rule.nodes[qx]) * (x1 - x0);
                    const double y = y0 + 0.5 * (1 + rule.nodes[qy]) * (y1 - y0);
                    const double w = rule.weights[qx] * rule.weights[qy] * 0.25 * (x1 - x0) * (y1 - y0);
                    const auto V = eval_on_cell(mesh, v, i, j, rule.nodes[qx], rule.nodes[qy]);
                    p.grad += w * pb.eps * (V.dx * V.dx + V.dy * V.dy);
                    p.reaction += w * (pb.c(x, y) - 0.5 * pb.div_b(x, y)) * V.v * V.v;
                }
            const double sides[4][7] = {{-1, 0, double(i - 1), double(j), 1, x0, y0},
                                        {1, 0, double(i + 1), double(j), 1, x1, y0},
                                        {0, -1, double(i), double(j - 1), 0, y0, x0},
                                        {0, 1, double(i), double(j + 1), 0, y1, x0}};
            for (const auto& s : sides) {
                const int ni = static_cast<int>(s[2]), nj = static_cast<int>(s[3]);
                const bool vertical = s[4] != 0.0;
                const bool inside = ni >= 0 && ni < N && nj >= 0 && nj < N;
                const double a0 = s[6], a1 = vertical ? y1 : x1;
                for (int q = 0; q < nq; ++q) {
                    const double t = a0 + 0.5 * (1 + rule.nodes[q]) * (a1 - a0);
                    const double x = vertical ? s[5] : t, y = vertical ? t : s[5];
                    const auto b = pb.b(x, y);
                    const double bn = b.x * s[0] + b.y * s[1];
                    const double w = rule.weights[q] * 0.5 * (a1 - a0);
                    const double own = s[0] + s[1], tq = rule.nodes[q];
                    const double vin = eval_on_side(mesh, v, i, j, vertical, own, tq).v;
                    if (bn < 0.0) {
                        const double d = vin - (inside ? eval_on_side(mesh, v, ni, nj, vertical, -own, tq).v : 0.0);
                        (inside ? p.inflow_jump : p.inflow_boundary) += 0.5 * w * std::abs(bn) * d * d;
                    } else if (!inside) {
                        p.outflow_boundary += 0.5 * w * std::abs(bn) * vin * vin;
                    }
                }
            }
        }
    for (const auto& s : segments(mesh)) {
        const double rho = penalty(mesh, s.vertical, s.line, s.cell);
        for (int q = 0; q < nq; ++q) {
            const double w = rule.weights[q] * 0.5 * (s.a1 - s.a0);
            const double tq = rule.nodes[q];
            double jv = eval_on_side(mesh, v, s.pi, s.pj, s.vertical, s.line == 0 ? -1.0 : 1.0, tq).v;
            if (s.mi >= 0) jv -= eval_on_side(mesh, v, s.mi, s.mj, s.vertical, -1.0, tq).v;
            p.penalty += w * rho * jv * jv;
        }
    }
    return p;
}

inline DGFunction random_function(const nipg::DofMap& map, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    DGFunction v(map);
    for (Eigen::Index i = 0; i < v.coefficients().size(); ++i) v.coefficients()(i) = U(rng);
    return v;
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps components that vanish analytically (e.g. the
/// gradient part of a piecewise constant) from being compared at roundoff scale.
inline double relative_difference(double a, double b, double floor = 0.0) {
    const double s = std::max({std::abs(a), std::abs(b), floor});
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace oracle
