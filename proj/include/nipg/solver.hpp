#pragma once

/**
 * @file solver.hpp
 * @brief Sparse solves of the assembled NIPG system.
 *
 * Rows are equilibrated (scaled by the reciprocal of their largest entry) before
 * factorization: penalty rows scale like N^2 while diffusion rows scale like ε.
 */

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "assembly.hpp"

namespace nipg {

enum class SolverMethod { direct, iterative };

inline const char* to_string(SolverMethod m) { return m == SolverMethod::direct ? "direct" : "iterative"; }

inline SolverMethod parse_solver_method(const std::string& s) {
    if (s == "direct") return SolverMethod::direct;
    if (s == "iterative") return SolverMethod::iterative;
    throw std::invalid_argument("unknown solver method '" + s + "'");
}

struct SolverConfig {
    SolverMethod method = SolverMethod::direct;
    double rel_tol = 1e-10;
    int max_iters = 2000;
    int restart = 50;
    // incomplete LU (threshold) preconditioner for the Krylov path
    double ilu_drop_tol = 1e-4;
    int ilu_fill = 20;
    bool estimate_condition = false;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("solver: rel_tol must lie in (0, 1)");
        if (max_iters < 1) throw std::invalid_argument("solver: max_iters must be >= 1");
        if (restart < 1) throw std::invalid_argument("solver: restart must be >= 1");
    }
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;  // ||A x - b||_2 / ||b||_2 (absolute when b = 0)
    double wall_ms = 0.0;
    std::optional<double> condition_estimate;  // 1-norm estimate
    bool converged = true;
    std::string message;
};

struct SolveResult {
    Eigen::VectorXd x;
    SolveReport report;
};

inline double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
    const double nb = b.norm();
    const double nr = (A * x - b).norm();
    return nb > 0.0 ? nr / nb : nr;
}

namespace detail {

inline Eigen::VectorXd row_scaling(const SparseMatrix& A) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(A.rows());
    for (int r = 0; r < A.outerSize(); ++r) {
        double m = 0.0;
        for (SparseMatrix::InnerIterator it(A, r); it; ++it) m = std::max(m, std::abs(it.value()));
        if (m > 0.0) d(r) = 1.0 / m;
    }
    return d;
}

inline double one_norm(const SparseMatrix& A) {
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(A.cols());
    for (int r = 0; r < A.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(A, r); it; ++it) colsum(it.col()) += std::abs(it.value());
    return colsum.size() ? colsum.maxCoeff() : 0.0;
}

// Hager's estimate of ||A^{-1}||_1 given solvers for A and A^T.
template <class Solve, class SolveT>
double inverse_one_norm_estimate(Eigen::Index n, Solve&& solve, SolveT&& solve_t) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double est = 0.0;
    for (int iter = 0; iter < 5; ++iter) {
        const Eigen::VectorXd y = solve(x);
        est = y.lpNorm<1>();
        Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        const Eigen::VectorXd z = solve_t(xi);
        Eigen::Index j = 0;
        const double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= z.dot(x)) break;
        x.setZero();
        x(j) = 1.0;
    }
    return est;
}

}  // namespace detail

inline SolveResult solve(const SparseSystem& system, const SolverConfig& cfg = {}) {
    cfg.validate();
    const auto& A = system.A;
    if (A.rows() != A.cols()) throw std::invalid_argument("solve: matrix is not square");
    if (system.rhs.size() != A.rows()) throw std::invalid_argument("solve: rhs length mismatch");

    const auto t0 = std::chrono::steady_clock::now();
    SolveResult out;
    const Eigen::VectorXd d = detail::row_scaling(A);
    SparseMatrix DA = d.asDiagonal() * A;
    DA.makeCompressed();
    const Eigen::VectorXd Db = d.cwiseProduct(system.rhs);

    if (cfg.method == SolverMethod::direct) {
        Eigen::SparseMatrix<double, Eigen::ColMajor> Ac = DA;
        Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(Ac);
        if (lu.info() != Eigen::Success) {
            out.x = Eigen::VectorXd::Zero(A.rows());
            out.report.converged = false;
            out.report.message = "sparse LU factorization failed: " + lu.lastErrorMessage();
        } else {
            out.x = lu.solve(Db);
            // one step of iterative refinement when the residual is above target
            out.report.residual = relative_residual(A, out.x, system.rhs);
            if (out.report.residual > cfg.rel_tol) {
                out.x += lu.solve(Db - DA * out.x);
                out.report.residual = relative_residual(A, out.x, system.rhs);
            }
            if (cfg.estimate_condition && A.rows() > 0) {
                const double inv = detail::inverse_one_norm_estimate(
                    A.rows(), [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(lu.solve(d.cwiseProduct(v))); },
                    [&](const Eigen::VectorXd& v) {
                        return Eigen::VectorXd(d.cwiseProduct(Eigen::VectorXd(lu.transpose().solve(v))));
                    });
                out.report.condition_estimate = detail::one_norm(A) * inv;
            }
        }
    } else {
        Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<double>> gmres;
        gmres.preconditioner().setDroptol(cfg.ilu_drop_tol);
        gmres.preconditioner().setFillfactor(cfg.ilu_fill);
        gmres.set_restart(cfg.restart);
        gmres.setTolerance(cfg.rel_tol);
        gmres.setMaxIterations(cfg.max_iters);
        gmres.compute(DA);
        if (gmres.info() != Eigen::Success) {
            out.x = Eigen::VectorXd::Zero(A.rows());
            out.report.converged = false;
            out.report.message = "incomplete LU preconditioner setup failed";
        } else {
            out.x = gmres.solve(Db);
            out.report.iterations = static_cast<int>(gmres.iterations());
        }
    }

    if (out.report.message.empty()) out.report.residual = relative_residual(A, out.x, system.rhs);
    if (out.report.message.empty() && !(out.report.residual <= cfg.rel_tol)) {
        out.report.converged = false;
        out.report.message = "residual above tolerance";
    }
    out.report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace nipg
