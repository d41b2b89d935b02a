// Command-line driver: convergence studies and matrix export.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "nipg/nipg.hpp"

namespace {

struct StudyArgs {
    std::string config;
    std::optional<std::string> k, eps, n, solver, quad_order, out_csv, out_md, sigma;
    bool no_timing = false;
    bool condition = false;
};

int run_study_command(const StudyArgs& args) {
    nipg::StudyConfig cfg = nipg::load_config(args.config);
    auto override = [&](const char* key, const std::optional<std::string>& v) {
        if (v) nipg::set_config_value(cfg, key, *v);
    };
    override("k", args.k);
    override("eps", args.eps);
    override("n", args.n);
    override("solver", args.solver);
    override("quad_order", args.quad_order);
    override("sigma", args.sigma);
    override("out_csv", args.out_csv);
    override("out_md", args.out_md);
    if (args.no_timing) cfg.timing = false;
    if (args.condition) cfg.solver.estimate_condition = true;
    nipg::validate(cfg);

    const auto report = nipg::run_study(cfg, [](const nipg::StudyRow& r) {
        std::cerr << "k=" << r.k << " eps=" << nipg::format_eps(r.eps) << " N=" << r.N
                  << " e_IN=" << nipg::format_table_sci(r.e_IN) << (r.degraded ? " DEGRADED: " + r.message : "")
                  << '\n';
    });
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

    if (cfg.out_csv.empty()) nipg::write_csv(report, std::cout);
    else nipg::write_file(cfg.out_csv, [&](std::ostream& os) { nipg::write_csv(report, os); });
    if (!cfg.out_md.empty()) nipg::write_file(cfg.out_md, [&](std::ostream& os) { nipg::write_markdown(report, os); });
    return report.any_degraded() ? 2 : 0;
}

struct ExportArgs {
    int k = 1;
    double eps = 1e-5;
    int n = 8;
    std::optional<double> sigma;
    int quad_order = 0;
    std::string boundary = "weak";
    std::string out;
    std::string rhs_out;
};

int run_export_command(const ExportArgs& args) {
    const double sigma = args.sigma ? *args.sigma : args.k + 1.5;
    const auto mesh = nipg::build_mesh({args.n, args.eps, sigma, 2.0, 3.0});
    const auto edges = nipg::classify_edges(mesh);
    const nipg::DofMap map(args.k, args.n);
    nipg::AssemblyOptions opts;
    opts.quad_points = args.quad_order;
    if (args.boundary == "strong") opts.boundary = nipg::BoundaryImposition::strong;
    else if (args.boundary != "weak") throw nipg::ConfigError("boundary: expected weak or strong");
    const auto sys = nipg::assemble(mesh, edges, map, nipg::layer_problem(args.eps), opts);
    nipg::write_file(args.out, [&](std::ostream& os) { nipg::write_coordinate(sys, os); });
    if (!args.rhs_out.empty())
        nipg::write_file(args.rhs_out, [&](std::ostream& os) {
            for (Eigen::Index i = 0; i < sys.rhs.size(); ++i) os << nipg::format_double(sys.rhs(i)) << '\n';
        });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NIPG convergence studies on Shishkin meshes"};
    app.require_subcommand(1);

    StudyArgs sa;
    auto* study = app.add_subcommand("study", "run a (k, eps, N) sweep and write CSV / markdown tables");
    study->add_option("--config", sa.config, "flat key = value config file")->required()->check(CLI::ExistingFile);
    study->add_option("--k", sa.k, "degrees, comma separated");
    study->add_option("--eps", sa.eps, "perturbation parameters, comma separated");
    study->add_option("--n", sa.n, "doubling chain, e.g. 8,16,32 or 8..128, or auto");
    study->add_option("--solver", sa.solver, "direct or iterative");
    study->add_option("--quad-order", sa.quad_order, "Gauss points per direction, or auto (k + 2)");
    study->add_option("--sigma", sa.sigma, "mesh parameter sigma, or k_plus_3_half");
    study->add_option("--out-csv", sa.out_csv, "CSV path (stdout when unset)");
    study->add_option("--out-md", sa.out_md, "markdown path");
    study->add_flag("--no-timing", sa.no_timing, "write wall_ms = 0 for byte-reproducible output");
    study->add_flag("--condition-estimate", sa.condition, "report 1-norm condition estimates");

    ExportArgs ea;
    auto* exp = app.add_subcommand("export", "assemble the layer problem and write the matrix in coordinate text form");
    exp->add_option("--k", ea.k)->check(CLI::Range(1, 15));
    exp->add_option("--eps", ea.eps);
    exp->add_option("--n", ea.n);
    exp->add_option("--sigma", ea.sigma);
    exp->add_option("--quad-order", ea.quad_order);
    exp->add_option("--boundary", ea.boundary)->check(CLI::IsMember({"weak", "strong"}));
    exp->add_option("--out", ea.out, "matrix output path")->required();
    exp->add_option("--rhs-out", ea.rhs_out, "right-hand side output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*study) return run_study_command(sa);
        return run_export_command(ea);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
