#pragma once

/**
 * @file study.hpp
 * @brief Convergence studies over (k, ε, N): configuration, the sweep, and
 *        CSV / markdown tables that carry their own resolved configuration.
 */

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "analysis.hpp"
#include "assembly.hpp"
#include "expression.hpp"
#include "mesh.hpp"
#include "problem.hpp"
#include "solver.hpp"

namespace nipg {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// number formatting

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw ConfigError(what + ": not a number: '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s, const std::string& what) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(what + ": not an integer: '" + s + "'");
    return v;
}

/// Table notation 0.xxxE-d (three significant digits, mantissa in [0.1, 1)).
inline std::string format_table_sci(double v) {
    if (!std::isfinite(v)) return format_double(v);
    if (v == 0.0) return "0.000E0";
    const bool neg = v < 0.0;
    const double a = std::abs(v);
    int e = static_cast<int>(std::floor(std::log10(a))) + 1;
    long m = std::lround(a / std::pow(10.0, e) * 1000.0);
    if (m >= 1000) {
        m = 100;
        ++e;
    } else if (m < 100) {  // log10 landed just below a power of ten
        --e;
        m = std::lround(a / std::pow(10.0, e) * 1000.0);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s0.%03ldE%d", neg ? "-" : "", m, e);
    return buf;
}

/// Compact ε label: 1e-05 -> 1e-5.
inline std::string format_eps(double eps) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, eps, std::chars_format::scientific);
    std::string s(buf, res.ptr);
    const auto epos = s.find('e');
    if (epos == std::string::npos) return s;
    std::string mant = s.substr(0, epos), ex = s.substr(epos + 1);
    std::string sign;
    if (!ex.empty() && (ex[0] == '-' || ex[0] == '+')) {
        if (ex[0] == '-') sign = "-";
        ex.erase(0, 1);
    }
    ex.erase(0, std::min(ex.find_first_not_of('0'), ex.size() - 1));
    return mant + "e" + sign + ex;
}

inline std::string format_rate(const std::optional<double>& p) {
    if (!p) return "--";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *p);
    return buf;
}

// ---------------------------------------------------------------------------
// configuration

struct StudyConfig {
    std::vector<int> k_list{1};
    std::vector<double> eps_list{1e-5};
    std::optional<std::vector<int>> n_list;  // empty: default chain per k
    std::optional<double> sigma;             // empty: σ = k + 3/2
    double beta1 = 2.0;
    double beta2 = 3.0;
    std::string problem = "layer";  // layer | smooth | expression
    std::map<std::string, std::string> expressions;  // u, u_x, u_y, lap_u, b1, b2, div_b, c
    SolverConfig solver;
    int quad_order = 0;  // 0: k + 2
    BoundaryImposition boundary = BoundaryImposition::weak;
    bool timing = true;
    std::string out_csv;
    std::string out_md;
};

inline constexpr const char* kExpressionKeys[] = {"u", "u_x", "u_y", "lap_u", "b1", "b2", "div_b", "c"};

/// Default doubling chain: 8 .. 256 / 128 / 64 for k = 1 / 2 / 3+.
inline std::vector<int> default_n_chain(int k) {
    const int top = k == 1 ? 256 : (k == 2 ? 128 : 64);
    std::vector<int> out;
    for (int n = 8; n <= top; n *= 2) out.push_back(n);
    return out;
}

inline std::vector<int> n_chain_for(const StudyConfig& cfg, int k) {
    return cfg.n_list ? *cfg.n_list : default_n_chain(k);
}

inline double sigma_for(const StudyConfig& cfg, int k) { return cfg.sigma ? *cfg.sigma : k + 1.5; }

inline int quad_points_for(const StudyConfig& cfg, int k) { return cfg.quad_order == 0 ? k + 2 : cfg.quad_order; }

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(key + ": expected on/off, got '" + v + "'");
}

template <class T, class Fmt>
std::string join(const std::vector<T>& v, Fmt&& fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt(v[i]);
    }
    return s;
}

}  // namespace detail

/// Apply one `key = value` setting (config files and command-line flags share this).
inline void set_config_value(StudyConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string v = detail::trim(raw);
    if (key == "k") {
        cfg.k_list.clear();
        for (const auto& s : detail::split_list(v)) cfg.k_list.push_back(parse_int(s, key));
    } else if (key == "eps") {
        cfg.eps_list.clear();
        for (const auto& s : detail::split_list(v)) cfg.eps_list.push_back(parse_double(s, key));
    } else if (key == "n") {
        if (v == "auto") {
            cfg.n_list.reset();
            return;
        }
        std::vector<int> ns;
        if (const auto dots = v.find(".."); dots != std::string::npos) {
            const int lo = parse_int(detail::trim(v.substr(0, dots)), key);
            const int hi = parse_int(detail::trim(v.substr(dots + 2)), key);
            if (lo < 1 || hi < lo) throw ConfigError("n: bad range '" + v + "'");
            for (int n = lo; n <= hi; n *= 2) ns.push_back(n);
        } else {
            for (const auto& s : detail::split_list(v)) ns.push_back(parse_int(s, key));
        }
        cfg.n_list = ns;
    } else if (key == "sigma") {
        if (v == "auto" || v == "k_plus_3_half") cfg.sigma.reset();
        else cfg.sigma = parse_double(v, key);
    } else if (key == "beta1") {
        cfg.beta1 = parse_double(v, key);
    } else if (key == "beta2") {
        cfg.beta2 = parse_double(v, key);
    } else if (key == "problem") {
        if (v != "layer" && v != "smooth" && v != "expression")
            throw ConfigError("problem: expected layer, smooth or expression, got '" + v + "'");
        cfg.problem = v;
    } else if (std::find(std::begin(kExpressionKeys), std::end(kExpressionKeys), key) != std::end(kExpressionKeys)) {
        cfg.expressions[key] = v;
    } else if (key == "solver") {
        try {
            cfg.solver.method = parse_solver_method(v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "rel_tol") {
        cfg.solver.rel_tol = parse_double(v, key);
    } else if (key == "max_iters") {
        cfg.solver.max_iters = parse_int(v, key);
    } else if (key == "restart") {
        cfg.solver.restart = parse_int(v, key);
    } else if (key == "ilu_drop_tol") {
        cfg.solver.ilu_drop_tol = parse_double(v, key);
    } else if (key == "ilu_fill") {
        cfg.solver.ilu_fill = parse_int(v, key);
    } else if (key == "condition_estimate") {
        cfg.solver.estimate_condition = detail::parse_bool(v, key);
    } else if (key == "quad_order") {
        cfg.quad_order = v == "auto" ? 0 : parse_int(v, key);
    } else if (key == "boundary") {
        if (v == "weak") cfg.boundary = BoundaryImposition::weak;
        else if (v == "strong") cfg.boundary = BoundaryImposition::strong;
        else throw ConfigError("boundary: expected weak or strong, got '" + v + "'");
    } else if (key == "timing") {
        cfg.timing = detail::parse_bool(v, key);
    } else if (key == "out_csv") {
        cfg.out_csv = v;
    } else if (key == "out_md") {
        cfg.out_md = v;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

/// Flat `key = value` text; '#' starts a comment.
inline StudyConfig parse_config(std::istream& in, StudyConfig cfg = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            set_config_value(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

inline StudyConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline void validate(const StudyConfig& cfg) {
    if (cfg.k_list.empty()) throw ConfigError("k: list is empty");
    if (cfg.eps_list.empty()) throw ConfigError("eps: list is empty");
    for (int k : cfg.k_list)
        if (k < 1 || k > 15) throw ConfigError("k: degree must lie in [1, 15]");
    for (double e : cfg.eps_list)
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eps: values must lie in (0, 1]");
    if (cfg.n_list) {
        const auto& ns = *cfg.n_list;
        if (ns.empty()) throw ConfigError("n: list is empty");
        for (std::size_t i = 0; i < ns.size(); ++i) {
            if (ns[i] < 8 || ns[i] % 2 != 0) throw ConfigError("n: values must be even and at least 8");
            if (i > 0 && ns[i] != 2 * ns[i - 1]) throw ConfigError("n: list must be a strictly doubling chain");
        }
    }
    if (cfg.sigma && !(*cfg.sigma > 0.0)) throw ConfigError("sigma: must be positive");
    if (!(cfg.beta1 > 0.0 && cfg.beta2 > 0.0)) throw ConfigError("beta1, beta2: must be positive");
    if (cfg.quad_order != 0)
        for (int k : cfg.k_list)
            if (cfg.quad_order < k + 1)
                throw ConfigError("quad_order: " + std::to_string(cfg.quad_order) + " is below k + 1 for k = " +
                                  std::to_string(k));
    if (cfg.problem == "expression")
        for (const char* key : kExpressionKeys)
            if (!cfg.expressions.count(key))
                throw ConfigError(std::string("problem = expression requires key '") + key + "'");
    try {
        cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

/// The fully resolved configuration as ordered key/value pairs (re-parseable).
inline std::vector<std::pair<std::string, std::string>> config_entries(const StudyConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("k", detail::join(cfg.k_list, [](int k) { return std::to_string(k); }));
    out.emplace_back("eps", detail::join(cfg.eps_list, format_double));
    out.emplace_back("n", cfg.n_list ? detail::join(*cfg.n_list, [](int n) { return std::to_string(n); }) : "auto");
    out.emplace_back("sigma", cfg.sigma ? format_double(*cfg.sigma) : "k_plus_3_half");
    out.emplace_back("beta1", format_double(cfg.beta1));
    out.emplace_back("beta2", format_double(cfg.beta2));
    out.emplace_back("problem", cfg.problem);
    if (cfg.problem == "expression")
        for (const char* key : kExpressionKeys) out.emplace_back(key, cfg.expressions.at(key));
    out.emplace_back("solver", to_string(cfg.solver.method));
    out.emplace_back("rel_tol", format_double(cfg.solver.rel_tol));
    out.emplace_back("max_iters", std::to_string(cfg.solver.max_iters));
    out.emplace_back("restart", std::to_string(cfg.solver.restart));
    out.emplace_back("ilu_drop_tol", format_double(cfg.solver.ilu_drop_tol));
    out.emplace_back("ilu_fill", std::to_string(cfg.solver.ilu_fill));
    out.emplace_back("condition_estimate", cfg.solver.estimate_condition ? "on" : "off");
    out.emplace_back("quad_order", cfg.quad_order == 0 ? "auto" : std::to_string(cfg.quad_order));
    out.emplace_back("boundary", cfg.boundary == BoundaryImposition::weak ? "weak" : "strong");
    out.emplace_back("timing", cfg.timing ? "on" : "off");
    out.emplace_back("out_csv", cfg.out_csv);
    out.emplace_back("out_md", cfg.out_md);
    return out;
}

/// Derived settings that are not config keys but are needed to reproduce a table.
inline std::vector<std::string> resolved_notes(const StudyConfig& cfg) {
    std::vector<std::string> out;
    for (int k : cfg.k_list) {
        out.push_back("k = " + std::to_string(k) + ": sigma = " + format_double(sigma_for(cfg, k)) +
                      ", N = " + detail::join(n_chain_for(cfg, k), [](int n) { return std::to_string(n); }) +
                      ", quadrature = " + std::to_string(quad_points_for(cfg, k)) +
                      " Gauss points per direction, interpolant moments = " + std::to_string(k + 2) +
                      " Gauss points, norm quadrature = " + std::to_string(k + 3) + " Gauss points");
    }
    out.push_back("penalty rho_e: M1 = 1, M2 = N^2, M3 = N, M4 = N");
    out.push_back("edge types: long edges with both ends at or below the transition line x = 1 - lambda_x "
                  "(y = 1 - lambda_y) -> M1, on it -> M4, beyond it -> M2; short edges -> M3; boundary edges "
                  "follow the same rule");
    out.push_back("transition: lambda = min(1/2, sigma eps ln N / beta), beta = beta1 in x, beta2 in y");
    out.push_back(std::string("dirichlet data: ") +
                  (cfg.boundary == BoundaryImposition::weak ? "weak (boundary edges carry penalty and consistency terms)"
                                                            : "strong (boundary nodes eliminated)"));
    out.push_back(std::string("linear solver: ") +
                  (cfg.solver.method == SolverMethod::direct
                       ? "sparse LU, COLAMD ordering, row equilibration"
                       : "restarted GMRES, threshold incomplete LU preconditioner, row equilibration"));
    return out;
}

// ---------------------------------------------------------------------------
// problems

inline ProblemData expression_problem(const StudyConfig& cfg, double eps) {
    const std::map<std::string, double> constants{{"eps", eps}};
    auto ex = [&](const char* key) { return Expression::parse(cfg.expressions.at(key), constants); };
    const Expression u = ex("u"), ux = ex("u_x"), uy = ex("u_y"), lap = ex("lap_u");
    const Expression b1 = ex("b1"), b2 = ex("b2"), divb = ex("div_b"), c = ex("c");
    ExactSolution sol;
    sol.u = u;
    sol.grad = [ux, uy](double x, double y) { return Vec2{ux(x, y), uy(x, y)}; };
    sol.laplacian = lap;
    return make_manufactured(
        "expression", eps, [b1, b2](double x, double y) { return Vec2{b1(x, y), b2(x, y)}; }, divb, c,
        std::move(sol));
}

inline ProblemData make_problem(const StudyConfig& cfg, double eps) {
    if (cfg.problem == "layer") return layer_problem(eps);
    if (cfg.problem == "smooth") return smooth_problem(eps);
    return expression_problem(cfg, eps);
}

// ---------------------------------------------------------------------------
// the sweep

struct StudyRow {
    int k = 0;
    double eps = 0.0;
    int N = 0;
    long dofs = 0;
    double e_IN = 0.0;
    std::optional<double> p_IN;
    double e_Pi = 0.0;
    double e_L2 = 0.0;
    int solver_iters = 0;
    double residual = 0.0;
    double wall_ms = 0.0;
    bool degraded = false;
    std::string message;
    std::optional<double> condition;

    friend bool operator==(const StudyRow&, const StudyRow&) = default;
};

struct StudyReport {
    StudyConfig config;
    std::vector<StudyRow> rows;
    std::vector<std::string> warnings;

    bool any_degraded() const {
        return std::any_of(rows.begin(), rows.end(), [](const StudyRow& r) { return r.degraded; });
    }
};

/// Fill p_IN from the 2N partner in the same (k, ε) chain; degraded or zero errors give no rate.
inline void compute_rates(std::vector<StudyRow>& rows) {
    for (auto& r : rows) {
        r.p_IN.reset();
        if (r.degraded || !(r.e_IN > 0.0)) continue;
        for (const auto& s : rows)
            if (s.k == r.k && s.eps == r.eps && s.N == 2 * r.N && !s.degraded && s.e_IN > 0.0) {
                r.p_IN = convergence_rates({{r.N, r.e_IN}, {s.N, s.e_IN}}).front().rate;
                break;
            }
    }
}

/// One (k, ε, N) cell of the sweep. Failures are recorded on the row, never thrown.
inline StudyRow run_cell(const StudyConfig& cfg, int k, double eps, int N) {
    const auto t0 = std::chrono::steady_clock::now();
    StudyRow row;
    row.k = k;
    row.eps = eps;
    row.N = N;
    const DofMap map(k, N);
    row.dofs = map.total_dofs();
    try {
        const ProblemData problem = make_problem(cfg, eps);
        const auto mesh = build_mesh({N, eps, sigma_for(cfg, k), cfg.beta1, cfg.beta2});
        const auto edges = classify_edges(mesh);
        const auto sys = assemble(mesh, edges, map, problem, {quad_points_for(cfg, k), cfg.boundary});
        const auto sol = solve(sys, cfg.solver);
        row.solver_iters = sol.report.iterations;
        row.residual = sol.report.residual;
        row.condition = sol.report.condition_estimate;
        if (!sol.report.converged) {
            row.degraded = true;
            row.message = sol.report.message;
        }
        const auto rec = supercloseness_error(problem, DGFunction(map, sol.x), mesh, edges);
        row.e_IN = rec.e_IN;
        row.e_Pi = rec.e_Pi;
        row.e_L2 = rec.e_L2;
        if (!std::isfinite(row.e_IN)) {
            row.degraded = true;
            if (row.message.empty()) row.message = "non-finite error";
        }
    } catch (const std::exception& e) {
        row.degraded = true;
        row.message = e.what();
    }
    if (cfg.timing)
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

/// Sweep k, then ε, then N. `progress` (optional) sees each row as it completes.
inline StudyReport run_study(const StudyConfig& cfg, const std::function<void(const StudyRow&)>& progress = {}) {
    validate(cfg);
    StudyReport report;
    report.config = cfg;
    for (int k : cfg.k_list) {
        if (sigma_for(cfg, k) < k + 1.5)
            report.warnings.push_back("sigma = " + format_double(sigma_for(cfg, k)) + " is below k + 3/2 for k = " +
                                      std::to_string(k) + "; the convergence theory does not cover this mesh");
        for (double eps : cfg.eps_list)
            for (int N : n_chain_for(cfg, k)) {
                if (eps > 1.0 / N)
                    report.warnings.push_back("eps = " + format_double(eps) + " > 1/N for N = " + std::to_string(N) +
                                              "; outside the assumption eps <= 1/N");
                report.rows.push_back(run_cell(cfg, k, eps, N));
                if (progress) progress(report.rows.back());
            }
    }
    compute_rates(report.rows);
    return report;
}

// ---------------------------------------------------------------------------
// output

inline constexpr const char* kCsvHeader = "k,eps,N,dofs,e_IN,p_IN,e_Pi,e_L2,solver_iters,residual,wall_ms";

/**
 * CSV with a comment preamble: `# config key = value` (the resolved config),
 * `# note ...`, `# warning ...`, `# degraded,k,eps,N,message` and
 * `# condition,k,eps,N,value`. Doubles are written in shortest round-trip form.
 */
inline void write_csv(const StudyReport& report, std::ostream& os) {
    for (const auto& [key, value] : config_entries(report.config)) os << "# config " << key << " = " << value << '\n';
    for (const auto& note : resolved_notes(report.config)) os << "# note " << note << '\n';
    for (const auto& w : report.warnings) os << "# warning " << w << '\n';
    for (const auto& r : report.rows) {
        if (r.degraded)
            os << "# degraded," << r.k << ',' << format_double(r.eps) << ',' << r.N << ',' << r.message << '\n';
        if (r.condition)
            os << "# condition," << r.k << ',' << format_double(r.eps) << ',' << r.N << ','
               << format_double(*r.condition) << '\n';
    }
    os << kCsvHeader << '\n';
    for (const auto& r : report.rows) {
        os << r.k << ',' << format_double(r.eps) << ',' << r.N << ',' << r.dofs << ',' << format_double(r.e_IN) << ','
           << (r.p_IN ? format_double(*r.p_IN) : "--") << ',' << format_double(r.e_Pi) << ','
           << format_double(r.e_L2) << ',' << r.solver_iters << ',' << format_double(r.residual) << ','
           << format_double(r.wall_ms) << '\n';
    }
}

inline StudyReport read_csv(std::istream& in) {
    StudyReport report;
    std::string line;
    bool header_seen = false;
    struct Extra {
        std::string message;
        std::optional<double> condition;
        bool degraded = false;
    };
    std::map<std::tuple<int, double, int>, Extra> extras;
    auto key_of = [](const std::vector<std::string>& f) {
        return std::make_tuple(parse_int(f[1], "k"), parse_double(f[2], "eps"), parse_int(f[3], "N"));
    };
    auto split_n = [](const std::string& s, std::size_t max_fields) {
        std::vector<std::string> out;
        std::size_t pos = 0;
        while (out.size() + 1 < max_fields) {
            const auto c = s.find(',', pos);
            if (c == std::string::npos) break;
            out.push_back(s.substr(pos, c - pos));
            pos = c + 1;
        }
        out.push_back(s.substr(pos));
        return out;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# config ", 0) == 0) {
            const std::string body = line.substr(9);
            const auto eq = body.find(" = ");
            if (eq == std::string::npos) throw ConfigError("csv: malformed config line");
            set_config_value(report.config, body.substr(0, eq), body.substr(eq + 3));
        } else if (line.rfind("# warning ", 0) == 0) {
            report.warnings.push_back(line.substr(10));
        } else if (line.rfind("# degraded,", 0) == 0) {
            const auto f = split_n(line.substr(2), 5);
            if (f.size() != 5) throw ConfigError("csv: malformed degraded line");
            auto& x = extras[key_of(f)];
            x.degraded = true;
            x.message = f[4];
        } else if (line.rfind("# condition,", 0) == 0) {
            const auto f = split_n(line.substr(2), 5);
            if (f.size() != 5) throw ConfigError("csv: malformed condition line");
            extras[key_of(f)].condition = parse_double(f[4], "condition");
        } else if (line[0] == '#') {
            continue;
        } else if (!header_seen) {
            if (line != kCsvHeader) throw ConfigError("csv: unexpected header '" + line + "'");
            header_seen = true;
        } else {
            const auto f = split_n(line, 64);
            if (f.size() != 11) throw ConfigError("csv: expected 11 fields in '" + line + "'");
            StudyRow r;
            r.k = parse_int(f[0], "k");
            r.eps = parse_double(f[1], "eps");
            r.N = parse_int(f[2], "N");
            r.dofs = parse_int(f[3], "dofs");
            r.e_IN = parse_double(f[4], "e_IN");
            if (f[5] != "--") r.p_IN = parse_double(f[5], "p_IN");
            r.e_Pi = parse_double(f[6], "e_Pi");
            r.e_L2 = parse_double(f[7], "e_L2");
            r.solver_iters = parse_int(f[8], "solver_iters");
            r.residual = parse_double(f[9], "residual");
            r.wall_ms = parse_double(f[10], "wall_ms");
            if (auto it = extras.find({r.k, r.eps, r.N}); it != extras.end()) {
                r.degraded = it->second.degraded;
                r.message = it->second.message;
                r.condition = it->second.condition;
            }
            report.rows.push_back(r);
        }
    }
    if (!header_seen) throw ConfigError("csv: header line missing");
    return report;
}

/// Per-k tables: rows N, one (e_IN, p) column pair per ε, then a per-cell detail table.
inline void write_markdown(const StudyReport& report, std::ostream& os) {
    const auto& cfg = report.config;
    os << "# Convergence study\n\n## Configuration\n\n```\n";
    for (const auto& [key, value] : config_entries(cfg)) os << key << " = " << value << '\n';
    os << "```\n\n";
    for (const auto& note : resolved_notes(cfg)) os << "- " << note << '\n';
    if (!report.warnings.empty()) {
        os << "\n## Warnings\n\n";
        for (const auto& w : report.warnings) os << "- " << w << '\n';
    }
    auto find = [&](int k, double eps, int N) -> const StudyRow* {
        for (const auto& r : report.rows)
            if (r.k == k && r.eps == eps && r.N == N) return &r;
        return nullptr;
    };
    for (int k : cfg.k_list) {
        os << "\n## k = " << k << "\n\n||I_N u - u_h||_NIPG and rate p\n\n| N |";
        for (double eps : cfg.eps_list) os << " eps = " << format_eps(eps) << " | p |";
        os << "\n|---:|";
        for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) os << "---:|---:|";
        os << '\n';
        for (int N : n_chain_for(cfg, k)) {
            os << "| " << N << " |";
            for (double eps : cfg.eps_list) {
                const StudyRow* r = find(k, eps, N);
                if (!r) {
                    os << " -- | -- |";
                    continue;
                }
                os << ' ' << format_table_sci(r->e_IN) << (r->degraded ? "*" : "") << " | " << format_rate(r->p_IN)
                   << " |";
            }
            os << '\n';
        }
        os << "\n| eps | N | dofs | e_Pi | e_L2 | iters | residual | cond_1 | wall_ms |\n"
              "|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
        for (double eps : cfg.eps_list)
            for (int N : n_chain_for(cfg, k)) {
                const StudyRow* r = find(k, eps, N);
                if (!r) continue;
                char res[32];
                std::snprintf(res, sizeof res, "%.2e", r->residual);
                std::string cond = "--";
                if (r->condition) {
                    char b[32];
                    std::snprintf(b, sizeof b, "%.2e", *r->condition);
                    cond = b;
                }
                char ms[32];
                std::snprintf(ms, sizeof ms, "%.1f", r->wall_ms);
                os << "| " << format_eps(eps) << " | " << N << " | " << r->dofs << " | " << format_table_sci(r->e_Pi)
                   << " | " << format_table_sci(r->e_L2) << " | " << r->solver_iters << " | " << res << " | " << cond
                   << " | " << ms << " |\n";
            }
        bool any = false;
        for (const auto& r : report.rows)
            if (r.k == k && r.degraded) {
                if (!any) os << "\nDegraded cells (marked *):\n\n";
                any = true;
                os << "- eps = " << format_eps(r.eps) << ", N = " << r.N << ": " << r.message << '\n';
            }
    }
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace nipg
