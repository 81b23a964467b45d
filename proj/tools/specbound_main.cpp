// specbound command line: scan orchestration, canned example runs, single
// eigensolves, transport oracle comparisons and the Riccati-type inequality
// laboratory. Report files are deterministic; timing goes to stdout only.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "specbound/scan.hpp"

namespace sb = specbound;

namespace {

void apply_overrides(sb::ScanConfig& cfg, const std::string& out_dir,
                     const std::vector<std::string>& only) {
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!only.empty()) cfg.criteria = only;
}

int run_and_write(const sb::ScanConfig& cfg) {
    const auto bad = sb::validate(cfg);
    if (!bad.empty()) {
        std::cerr << "invalid configuration:\n";
        for (const auto& b : bad) std::cerr << "  " << b << "\n";
        return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = sb::run_scan(cfg);
    sb::write_report(rep, cfg.out_dir);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    std::cout << rep.text;
    std::cout << "wrote " << cfg.out_dir << "/report.txt and "
              << rep.csv_files.size() << " series files in " << secs << " s\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"specbound: spectral semi-boundedness and discreteness "
                 "criteria for Schrodinger operators -Delta + V"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> only;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("-c,--config", config_path, "JSON config file");
        if (need_config) opt->required();
        sub->add_option("-o,--out", out_dir, "output directory override");
        sub->add_option("--only", only, "restrict to these criteria");
    };

    auto* scan = app.add_subcommand("scan", "run the full configured scan");
    add_common(scan, true);

    auto* crit = app.add_subcommand("criteria", "run a criteria subset");
    add_common(crit, true);

    auto* ex = app.add_subcommand("example", "run a canned example config (1, 2 or 3)");
    int which = 3;
    ex->add_option("which", which, "example number")->required();
    add_common(ex, false);

    auto* val = app.add_subcommand("validate", "validate a config");
    val->add_option("-c,--config", config_path, "JSON config file")->required();

    auto* eig = app.add_subcommand("eigen", "single Dirichlet eigensolve on a ball");
    std::string pot = "zero";
    double cx = 0.0, cy = 0.0, cz = 0.0, radius = 1.0, h = 1.0 / 16.0, cval = 0.0;
    eig->add_option("--potential", pot, "zero|const|harmonic|sqrtabs|example1|example3");
    eig->add_option("--const-value", cval, "value for --potential const");
    eig->add_option("--cx", cx);
    eig->add_option("--cy", cy);
    eig->add_option("--cz", cz);
    eig->add_option("-r,--radius", radius);
    eig->add_option("--grid-h", h, "grid spacing");

    auto* tr = app.add_subcommand("transport",
                                  "radial oracle vs grid minimizer for a mean-zero "
                                  "radial profile");
    std::string profile = "pwc";
    double tr_r0 = 1.0;
    int tr_cells = 24;
    int tr_ell = 2;
    tr->add_option("--profile", profile, "pwc|ex3|bump");
    tr->add_option("--r0", tr_r0, "ball radius");
    tr->add_option("--cells", tr_cells, "cells across the radius (h = r0/cells)");
    tr->add_option("--ell", tr_ell, "|l| for profile ex3");

    auto* lab = app.add_subcommand("riccati-lab",
                                   "triangle inequality-set measures over a lambda sweep");
    double lab_r = 1.0;
    int lab_m = 200;
    lab->add_option("--r", lab_r);
    lab->add_option("--m", lab_m, "triangle grid resolution");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed() || crit->parsed()) {
            auto cfg = sb::load_config(config_path);
            apply_overrides(cfg, out_dir, only);
            return run_and_write(cfg);
        }
        if (ex->parsed()) {
            auto cfg = config_path.empty() ? sb::example_config(which)
                                           : sb::load_config(config_path);
            apply_overrides(cfg, out_dir, only);
            return run_and_write(cfg);
        }
        if (val->parsed()) {
            const auto cfg = sb::load_config(config_path);
            const auto bad = sb::validate(cfg);
            if (bad.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& b : bad) std::cout << b << "\n";
            return 2;
        }
        if (eig->parsed()) {
            sb::ScanConfig pc;
            pc.potential = pot;
            pc.const_value = cval;
            const auto art = sb::build_artifacts(pc);
            const sb::Ball ball({cx, cy, cz}, radius);
            const auto res = sb::dirichlet_lambda0(art.V, ball, h);
            std::cout << "lambda0 " << sb::fmt_g(res.lambda0) << "\n"
                      << "residual " << sb::fmt_g(res.residual) << "\n"
                      << "h " << sb::fmt_g(res.h) << "\n"
                      << "nodes " << res.ground_state.size() << "\n";
            return 0;
        }
        if (tr->parsed()) {
            sb::Handle1D W;
            std::vector<double> breaks;
            if (profile == "pwc") {
                const double rho1 = 0.5 * tr_r0;
                const double c1 = 1.0;
                const double c2 = -c1 * std::pow(rho1, 3) /
                                  (std::pow(tr_r0, 3) - std::pow(rho1, 3));
                W = [=](double rho) { return rho <= rho1 ? c1 : c2; };
                breaks = {rho1};
            } else if (profile == "ex3") {
                sb::Example3Params p;
                p.rho0 = tr_r0; // profile scaled to fill the test ball
                p.r0 = tr_r0 / 0.1 * 0.9;
                const auto bump =
                    sb::example3_bump(p, {double(tr_ell), 0.0, 0.0});
                W = [bump](double rho) { return bump.value(rho); };
                breaks = bump.breakpoints();
            } else if (profile == "bump") {
                const double s1 = 0.18 * tr_r0, s2 = 0.45 * tr_r0;
                auto g1 = [=](double rho) { return std::exp(-rho * rho / (2 * s1 * s1)); };
                auto g2 = [=](double rho) { return std::exp(-rho * rho / (2 * s2 * s2)); };
                double m1 = sb::integrate([&](double r) { return g1(r) * r * r; }, 0,
                                          tr_r0, 1e-12);
                double m2 = sb::integrate([&](double r) { return g2(r) * r * r; }, 0,
                                          tr_r0, 1e-12);
                const double beta = m1 / m2;
                W = [=](double rho) { return g1(rho) - beta * g2(rho); };
            } else {
                std::cerr << "unknown profile " << profile << "\n";
                return 2;
            }
            const auto rad = sb::radial_neumann_solve(W, tr_r0, 3, breaks);
            const auto grid =
                sb::make_grid(sb::Ball({0, 0, 0}, tr_r0), tr_r0 / tr_cells);
            std::vector<double> wv(grid.nodes.size());
            for (std::size_t i = 0; i < grid.nodes.size(); ++i)
                wv[i] = W(sb::norm3(grid.nodes[i]));
            const auto ms = sb::moments(wv, grid.weights);
            for (auto& v : wv) v -= ms.expectation;
            const double grid_bound = sb::d_bound(wv, grid, 3);
            std::cout << "radial ||F||_d " << sb::fmt_g(rad.f_norm) << "\n"
                      << "radial corollary bound " << sb::fmt_g(rad.bound) << "\n"
                      << "grid ||F||_d " << sb::fmt_g(grid_bound) << "\n"
                      << "relative gap "
                      << sb::fmt_g(std::abs(grid_bound - rad.f_norm) /
                                   std::max(rad.f_norm, 1e-300))
                      << "\n";
            return 0;
        }
        if (lab->parsed()) {
            const std::vector<double> lambdas{1.0, 10.0, 100.0, 1000.0, 10000.0};
            auto u = [](double t) { return std::sin(10.0 * t); };
            std::cout << "lambda,mes2E\n";
            for (double l : lambdas) {
                const auto e = sb::en_measure(u, l, lab_r, lab_m);
                std::cout << sb::fmt_short(l) << "," << sb::fmt_g(e.measure) << "\n";
            }
            const auto cmp = sb::blowup_comparator(100.0);
            std::cout << "blowup z* at lambda=100: " << sb::fmt_g(cmp.z_blowup) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
