#pragma once

/**
 * @file mesh.hpp
 * @brief Piecewise-uniform layer-adapted (Shishkin) tensor mesh on the unit square,
 *        region tagging and edge classification with penalty weights.
 *
 * Cells are addressed by (i, j): i is the column (x direction), j the row (y direction).
 * The geometric cell id is i*N + j, which is also the default element numbering
 * (bottom-to-top within a column, columns left-to-right).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nipg {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct MeshConfig {
    int N = 8;
    double eps = 1e-4;
    double sigma = 2.5;
    double beta1 = 2.0;
    double beta2 = 3.0;
};

enum class Region { Omega11, Omega12, Omega21, Omega22 };

enum class Orientation { vertical, horizontal };

enum class EdgeType { M1, M2, M3, M4 };

/// Element numbering used to orient jumps and normals on interior edges.
enum class Numbering { natural, reversed };

/// Mesh-size checks applied by build_mesh. `relaxed` exists only so that tiny
/// meshes (N = 2) can be used by brute-force verification oracles.
enum class SizeCheck { strict, relaxed };

inline constexpr int kBoundary = -1;

inline const char* to_string(Region r) {
    switch (r) {
    case Region::Omega11: return "Omega11";
    case Region::Omega12: return "Omega12";
    case Region::Omega21: return "Omega21";
    case Region::Omega22: return "Omega22";
    }
    return "?";
}

inline const char* to_string(EdgeType t) {
    switch (t) {
    case EdgeType::M1: return "M1";
    case EdgeType::M2: return "M2";
    case EdgeType::M3: return "M3";
    case EdgeType::M4: return "M4";
    }
    return "?";
}

/// Penalty weight of an edge type for a mesh with N intervals per direction.
inline double penalty_for(EdgeType t, int N) {
    const double n = static_cast<double>(N);
    switch (t) {
    case EdgeType::M1: return 1.0;
    case EdgeType::M2: return n * n;
    case EdgeType::M3:
    case EdgeType::M4: return n;
    }
    return 0.0;
}

struct Edge {
    Orientation orientation = Orientation::vertical;
    Point a;  // start (lower / left end)
    Point b;  // end
    double length = 0.0;
    // Geometric cell ids. On interior edges plus_elem is the higher-numbered
    // element; on Γ the single adjacent cell is plus_elem and minus_elem is kBoundary.
    int plus_elem = kBoundary;
    int minus_elem = kBoundary;
    Point normal;  // from plus to minus on interior edges; outward on Γ
    EdgeType type = EdgeType::M1;
    double rho = 0.0;
    // Grid location: vertical edges lie on x = x_pts[line], y in [y_pts[cell], y_pts[cell+1]];
    // horizontal edges lie on y = y_pts[line], x in [x_pts[cell], x_pts[cell+1]].
    int line = 0;
    int cell = 0;
    bool long_edge = false;

    bool on_boundary() const { return minus_elem == kBoundary; }
};

class ShishkinMesh {
public:
    ShishkinMesh() = default;

    const MeshConfig& config() const { return config_; }
    int N() const { return config_.N; }
    double lambda_x() const { return lambda_x_; }
    double lambda_y() const { return lambda_y_; }
    const std::vector<double>& x_pts() const { return x_pts_; }
    const std::vector<double>& y_pts() const { return y_pts_; }
    const std::vector<double>& h_x() const { return h_x_; }
    const std::vector<double>& h_y() const { return h_y_; }
    Numbering numbering() const { return numbering_; }

    int num_cells() const { return config_.N * config_.N; }
    int cell_id(int i, int j) const { return i * config_.N + j; }
    int cell_col(int id) const { return id / config_.N; }
    int cell_row(int id) const { return id % config_.N; }

    /// Element number of cell (i, j) under the active numbering.
    int element_number(int i, int j) const {
        const int natural = cell_id(i, j);
        return numbering_ == Numbering::natural ? natural : num_cells() - 1 - natural;
    }

    /// Assumption ε ≤ 1/N of the convergence theory.
    bool satisfies_eps_assumption() const {
        return config_.eps <= 1.0 / static_cast<double>(config_.N);
    }

    /// Locate the cell containing p (closed cells; ties go to the lower index).
    std::pair<int, int> locate(Point p) const {
        auto find = [](const std::vector<double>& pts, double v) {
            auto it = std::upper_bound(pts.begin(), pts.end(), v);
            int idx = static_cast<int>(it - pts.begin()) - 1;
            return std::clamp(idx, 0, static_cast<int>(pts.size()) - 2);
        };
        return {find(x_pts_, p.x), find(y_pts_, p.y)};
    }

private:
    friend ShishkinMesh build_mesh(const MeshConfig&, SizeCheck, Numbering);

    MeshConfig config_;
    double lambda_x_ = 0.5;
    double lambda_y_ = 0.5;
    std::vector<double> x_pts_, y_pts_, h_x_, h_y_;
    Numbering numbering_ = Numbering::natural;
};

namespace detail {

inline std::vector<double> shishkin_points(int N, double lambda) {
    std::vector<double> pts(static_cast<std::size_t>(N) + 1);
    const int half = N / 2;
    const double coarse = 2.0 * (1.0 - lambda) / N;
    const double fine = 2.0 * lambda / N;
    for (int i = 0; i <= half; ++i) pts[i] = coarse * i;
    for (int i = half + 1; i <= N; ++i) pts[i] = 1.0 - lambda + fine * (i - half);
    pts[half] = 1.0 - lambda;
    pts[N] = 1.0;
    return pts;
}

inline std::vector<double> spacings(const std::vector<double>& pts) {
    std::vector<double> h(pts.size() - 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) h[i] = pts[i + 1] - pts[i];
    return h;
}

}  // namespace detail

/// Transition parameter min(1/2, σ ε ln N / β).
inline double transition_parameter(double sigma, double eps, double beta, int N) {
    return std::min(0.5, sigma * eps / beta * std::log(static_cast<double>(N)));
}

inline ShishkinMesh build_mesh(const MeshConfig& config, SizeCheck check = SizeCheck::strict,
                               Numbering numbering = Numbering::natural) {
    if (config.N % 2 != 0) throw std::invalid_argument("mesh: N must be even");
    if (check == SizeCheck::strict && config.N < 8)
        throw std::invalid_argument("mesh: N must be at least 8");
    if (config.N < 2) throw std::invalid_argument("mesh: N must be at least 2");
    if (!(config.eps > 0.0)) throw std::invalid_argument("mesh: eps must be positive");
    if (!(config.sigma > 0.0)) throw std::invalid_argument("mesh: sigma must be positive");
    if (!(config.beta1 > 0.0) || !(config.beta2 > 0.0))
        throw std::invalid_argument("mesh: beta1 and beta2 must be positive");

    ShishkinMesh m;
    m.config_ = config;
    m.numbering_ = numbering;
    m.lambda_x_ = transition_parameter(config.sigma, config.eps, config.beta1, config.N);
    m.lambda_y_ = transition_parameter(config.sigma, config.eps, config.beta2, config.N);
    m.x_pts_ = detail::shishkin_points(config.N, m.lambda_x_);
    m.y_pts_ = detail::shishkin_points(config.N, m.lambda_y_);
    m.h_x_ = detail::spacings(m.x_pts_);
    m.h_y_ = detail::spacings(m.y_pts_);
    return m;
}

inline Region region_of(const ShishkinMesh& mesh, int i, int j) {
    const int N = mesh.N();
    if (i < 0 || j < 0 || i >= N || j >= N)
        throw std::out_of_range("region_of: cell index out of range");
    const int half = N / 2;
    const bool right = i >= half;
    const bool top = j >= half;
    if (!right && !top) return Region::Omega11;
    if (right && !top) return Region::Omega12;
    if (!right && top) return Region::Omega21;
    return Region::Omega22;
}

namespace detail {

// Type of a long edge from the index of the line it lies on (perpendicular index)
// relative to the transition line N/2.
inline EdgeType long_edge_type(int line, int half) {
    if (line < half) return EdgeType::M1;
    if (line == half) return EdgeType::M4;
    return EdgeType::M2;
}

}  // namespace detail

/**
 * Enumerate every edge of the mesh with its neighbours, orientation and penalty.
 *
 * Ordering: all vertical edges first, then horizontal ones; within an orientation
 * by (line, cell). Long edges are those whose length is a coarse spacing, i.e. the
 * edge spans a cell index < N/2 along its own direction. Long edges are M1 below
 * the transition line, M4 on it and M2 beyond it; every short edge is M3.
 */
inline std::vector<Edge> classify_edges(const ShishkinMesh& mesh) {
    const int N = mesh.N();
    const int half = N / 2;
    const auto& xs = mesh.x_pts();
    const auto& ys = mesh.y_pts();
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(2 * N * (N + 1)));

    auto orient = [&](Edge& e, int cell_low, int cell_high, Point normal_from_low) {
        // cell_low is left/below the edge; cell_high right/above.
        if (cell_low == kBoundary || cell_high == kBoundary) {
            const bool low_missing = cell_low == kBoundary;
            e.plus_elem = low_missing ? cell_high : cell_low;
            e.minus_elem = kBoundary;
            e.normal = low_missing ? Point{-normal_from_low.x, -normal_from_low.y} : normal_from_low;
            return;
        }
        const int nl = mesh.element_number(mesh.cell_col(cell_low), mesh.cell_row(cell_low));
        const int nh = mesh.element_number(mesh.cell_col(cell_high), mesh.cell_row(cell_high));
        if (nh > nl) {
            e.plus_elem = cell_high;
            e.minus_elem = cell_low;
            e.normal = {-normal_from_low.x, -normal_from_low.y};
        } else {
            e.plus_elem = cell_low;
            e.minus_elem = cell_high;
            e.normal = normal_from_low;
        }
    };

    auto finish = [&](Edge& e, int along_index) {
        e.long_edge = along_index < half;
        e.type = e.long_edge ? detail::long_edge_type(e.line, half) : EdgeType::M3;
        e.rho = penalty_for(e.type, N);
    };

    for (int i = 0; i <= N; ++i) {
        for (int j = 0; j < N; ++j) {
            Edge e;
            e.orientation = Orientation::vertical;
            e.line = i;
            e.cell = j;
            e.a = {xs[i], ys[j]};
            e.b = {xs[i], ys[j + 1]};
            e.length = ys[j + 1] - ys[j];
            const int left = i > 0 ? mesh.cell_id(i - 1, j) : kBoundary;
            const int right = i < N ? mesh.cell_id(i, j) : kBoundary;
            orient(e, left, right, {1.0, 0.0});
            finish(e, j);
            edges.push_back(e);
        }
    }
    for (int j = 0; j <= N; ++j) {
        for (int i = 0; i < N; ++i) {
            Edge e;
            e.orientation = Orientation::horizontal;
            e.line = j;
            e.cell = i;
            e.a = {xs[i], ys[j]};
            e.b = {xs[i + 1], ys[j]};
            e.length = xs[i + 1] - xs[i];
            const int below = j > 0 ? mesh.cell_id(i, j - 1) : kBoundary;
            const int above = j < N ? mesh.cell_id(i, j) : kBoundary;
            orient(e, below, above, {0.0, 1.0});
            finish(e, i);
            edges.push_back(e);
        }
    }
    return edges;
}

struct EdgeCensus {
    int m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    int interior_vertical = 0, interior_horizontal = 0, boundary = 0;
    int total() const { return m1 + m2 + m3 + m4; }
    friend bool operator==(const EdgeCensus&, const EdgeCensus&) = default;
};

inline EdgeCensus census(const std::vector<Edge>& edges) {
    EdgeCensus c;
    for (const auto& e : edges) {
        switch (e.type) {
        case EdgeType::M1: ++c.m1; break;
        case EdgeType::M2: ++c.m2; break;
        case EdgeType::M3: ++c.m3; break;
        case EdgeType::M4: ++c.m4; break;
        }
        if (e.on_boundary()) ++c.boundary;
        else if (e.orientation == Orientation::vertical) ++c.interior_vertical;
        else ++c.interior_horizontal;
    }
    return c;
}

}  // namespace nipg
