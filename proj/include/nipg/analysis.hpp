#pragma once

/**
 * @file analysis.hpp
 * @brief Global interpolants, the NIPG energy norm, error records and
 *        observed convergence rates.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "assembly.hpp"
#include "dg_function.hpp"
#include "felib/local_operators.hpp"
#include "mesh.hpp"
#include "problem.hpp"

namespace nipg {

/// I_N u: the vertices-edges-element interpolant applied cell by cell.
template <class F>
DGFunction interpolate_vee_global(F&& u, const ShishkinMesh& mesh, const DofMap& map, int quad_points = 0) {
    const int k = map.degree();
    const VeeInterpolator I(k, gauss_legendre(quad_points == 0 ? k + 2 : quad_points));
    DGFunction out(map);
    for (int cell = 0; cell < map.num_cells(); ++cell)
        out.cell_coefficients(cell) = I.coefficients(u, cell_geometry(mesh, cell));
    return out;
}

/// P_h u: local L2 projection on every cell.
template <class F>
DGFunction project_l2_global(F&& u, const ShishkinMesh& mesh, const DofMap& map, int quad_points = 0) {
    const int k = map.degree();
    const L2Projector P(k, gauss_legendre(quad_points == 0 ? k + 2 : quad_points));
    DGFunction out(map);
    for (int cell = 0; cell < map.num_cells(); ++cell)
        out.cell_coefficients(cell) = P.coefficients(u, cell_geometry(mesh, cell));
    return out;
}

/// Π u: L2 projection on cells of Ω11, vertices-edges-element interpolant elsewhere.
template <class F>
DGFunction interpolate_composite(F&& u, const ShishkinMesh& mesh, const DofMap& map, int quad_points = 0) {
    const int k = map.degree();
    const auto rule = gauss_legendre(quad_points == 0 ? k + 2 : quad_points);
    const VeeInterpolator I(k, rule);
    const L2Projector P(k, rule);
    DGFunction out(map);
    for (int cell = 0; cell < map.num_cells(); ++cell) {
        const auto g = cell_geometry(mesh, cell);
        const bool coarse = region_of(mesh, mesh.cell_col(cell), mesh.cell_row(cell)) == Region::Omega11;
        out.cell_coefficients(cell) = coarse ? P.coefficients(u, g) : I.coefficients(u, g);
    }
    return out;
}

/// Squared contributions to ||v||_NIPG^2.
struct EnergyNormParts {
    double grad = 0.0;              // ε Σ ||∇v||^2
    double reaction = 0.0;          // Σ ||c0 v||^2
    double penalty = 0.0;           // Σ_e ρ_e ∫ [v]^2
    double inflow_boundary = 0.0;   // ½ Σ ||v⁺||^2 on ∂₋κ ∩ Γ
    double inflow_jump = 0.0;       // ½ Σ ||v⁺ - v⁻||^2 on ∂₋κ \ Γ
    double outflow_boundary = 0.0;  // ½ Σ ||v⁺||^2 on ∂₊κ ∩ Γ

    double squared() const {
        return grad + reaction + penalty + inflow_boundary + inflow_jump + outflow_boundary;
    }
    double value() const { return std::sqrt(squared()); }
};

/// Energy norm with its breakdown; integrals use `quad_points` Gauss points per direction (0: k + 3).
inline EnergyNormParts energy_norm(const DGFunction& v, const ShishkinMesh& mesh, const std::vector<Edge>& edges,
                                   const ProblemData& problem, int quad_points = 0) {
    const auto& map = v.dofmap();
    const int k = map.degree();
    const int nq = quad_points == 0 ? k + 3 : quad_points;
    const ReferenceTables T(k, nq);
    const int nloc = T.nloc;
    EnergyNormParts parts;

    auto side_trace = [&](int cell, Side s, int q) {
        const auto c = v.cell_coefficients(cell);
        const auto& phi = T.side_phi[static_cast<int>(s)][q];
        double val = 0.0;
        for (int a = 0; a < nloc; ++a) val += c(a) * phi[a];
        return val;
    };

    for (int cell = 0; cell < map.num_cells(); ++cell) {
        const auto g = cell_geometry(mesh, cell);
        const double J = g.jacobian(), sx = 2.0 / g.hx(), sy = 2.0 / g.hy();
        const auto c = v.cell_coefficients(cell);
        for (int q = 0; q < nq * nq; ++q) {
            const auto ref = T.volume_point(q);
            const double x = g.x(ref[0]), y = g.y(ref[1]);
            const double c0sq = problem.c0_squared(x, y);
            if (c0sq < 0.0) throw CoefficientConditionError("energy_norm: c - div(b)/2 is negative");
            double val = 0.0, dx = 0.0, dy = 0.0;
            for (int a = 0; a < nloc; ++a) {
                val += c(a) * T.phi[q][a];
                dx += c(a) * T.dxi[q][a];
                dy += c(a) * T.deta[q][a];
            }
            dx *= sx;
            dy *= sy;
            const double w = T.volume_weight(q) * J;
            parts.grad += w * problem.eps * (dx * dx + dy * dy);
            parts.reaction += w * c0sq * val * val;
        }

        const auto split = inflow_outflow_split(mesh, cell, problem, T.rule);
        for (Side s : kSides) {
            const bool inflow = split.is_inflow(s), boundary = split.is_boundary(s);
            if (!inflow && !boundary) continue;  // interior outflow sides are covered by the neighbour's inflow
            const Vec2 n = outward_normal(s);
            const double half_len = 0.5 * side_length(g, s);
            const int nb = neighbor(mesh, cell, s);
            double acc = 0.0;
            for (int q = 0; q < nq; ++q) {
                const Point p = side_physical_point(g, s, T.rule.nodes[q]);
                const double bn = std::abs(dot(problem.b(p.x, p.y), n));
                double tr = side_trace(cell, s, q);
                if (!boundary) tr -= side_trace(nb, opposite(s), q);
                acc += T.rule.weights[q] * half_len * bn * tr * tr;
            }
            acc *= 0.5;
            if (inflow && boundary) parts.inflow_boundary += acc;
            else if (inflow) parts.inflow_jump += acc;
            else parts.outflow_boundary += acc;
        }
    }

    for (const auto& e : edges) {
        const Side sp = side_of(mesh, e, e.plus_elem);
        const Side sm = e.on_boundary() ? sp : side_of(mesh, e, e.minus_elem);
        double acc = 0.0;
        for (int q = 0; q < nq; ++q) {
            double jump = side_trace(e.plus_elem, sp, q);
            if (!e.on_boundary()) jump -= side_trace(e.minus_elem, sm, q);
            acc += T.rule.weights[q] * 0.5 * e.length * jump * jump;
        }
        parts.penalty += e.rho * acc;
    }
    return parts;
}

/// ||u - v||_{L2} with u analytic, by (quad_points)^2 Gauss points per cell.
template <class F>
double l2_error(F&& u, const DGFunction& v, const ShishkinMesh& mesh, int quad_points = 0) {
    const auto& map = v.dofmap();
    const int k = map.degree();
    const ReferenceTables T(k, quad_points == 0 ? k + 3 : quad_points);
    const int nq = T.points();
    double acc = 0.0;
    for (int cell = 0; cell < map.num_cells(); ++cell) {
        const auto g = cell_geometry(mesh, cell);
        const auto c = v.cell_coefficients(cell);
        for (int q = 0; q < nq * nq; ++q) {
            const auto ref = T.volume_point(q);
            double val = 0.0;
            for (int a = 0; a < T.nloc; ++a) val += c(a) * T.phi[q][a];
            const double d = u(g.x(ref[0]), g.y(ref[1])) - val;
            acc += T.volume_weight(q) * g.jacobian() * d * d;
        }
    }
    return std::sqrt(acc);
}

struct ErrorRecord {
    int N = 0;
    double eps = 0.0;
    int k = 0;
    double e_IN = 0.0;  // ||I_N u - u_h||_NIPG
    double e_Pi = 0.0;  // ||Π u - u_h||_NIPG
    double e_L2 = 0.0;  // ||u - u_h||_{L2}
    EnergyNormParts components;  // of I_N u - u_h
};

struct ErrorOptions {
    int interpolation_points = 0;  // 0: k + 2
    int norm_points = 0;           // 0: k + 3
};

inline ErrorRecord supercloseness_error(const ProblemData& problem, const DGFunction& uh, const ShishkinMesh& mesh,
                                        const std::vector<Edge>& edges, const ErrorOptions& opts = {}) {
    if (!problem.exact) throw std::invalid_argument("supercloseness_error: problem has no exact solution");
    const auto& u = problem.exact->u;
    const auto& map = uh.dofmap();
    const DGFunction IN = interpolate_vee_global(u, mesh, map, opts.interpolation_points);
    const DGFunction Pi = interpolate_composite(u, mesh, map, opts.interpolation_points);
    ErrorRecord rec;
    rec.N = mesh.N();
    rec.eps = problem.eps;
    rec.k = map.degree();
    rec.components = energy_norm(IN - uh, mesh, edges, problem, opts.norm_points);
    rec.e_IN = rec.components.value();
    rec.e_Pi = energy_norm(Pi - uh, mesh, edges, problem, opts.norm_points).value();
    rec.e_L2 = l2_error(u, uh, mesh, opts.norm_points);
    return rec;
}

struct RateEntry {
    int N = 0;
    double error = 0.0;
    std::optional<double> rate;  // empty when 2N is absent
};

/// Observed order p^N = (ln e^N - ln e^{2N}) / ln 2 for each N whose double is present.
inline std::vector<RateEntry> convergence_rates(const std::vector<std::pair<int, double>>& errors) {
    std::map<int, double> byN;
    for (const auto& [N, e] : errors) {
        if (!(e > 0.0)) throw std::invalid_argument("convergence_rates: errors must be positive");
        byN[N] = e;
    }
    std::vector<RateEntry> out;
    for (const auto& [N, e] : byN) {
        RateEntry r{N, e, std::nullopt};
        if (auto it = byN.find(2 * N); it != byN.end()) r.rate = (std::log(e) - std::log(it->second)) / std::log(2.0);
        out.push_back(r);
    }
    return out;
}

}  // namespace nipg
