#pragma once

// Scan orchestration: configuration, canned example setups, deterministic
// report emission. Reports are structured text plus one flat CSV per series;
// identical configs and seeds produce byte-identical files. Timing is never
// written into report files (stdout only), precisely so reruns compare equal.

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include <json.hpp>

#include "specbound/criteria.hpp"
#include "specbound/riccati_lab.hpp"

namespace specbound {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
inline std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

struct ScanConfig {
    int dimension = 3;

    std::string potential = "example3"; // example1|example2|example3|remark|
                                        // zero|const|harmonic|sqrtabs|table
    double const_value = 0.0;
    std::string table_path;

    // example parameters
    double ex1_r0 = 0.45;
    double ex2_a = 1.0;
    double ex2_alpha_power = 2.0;
    int ex2_count = 10;
    int ex2_window_lo = 3;
    int ex2_window_hi = 8;
    double ex3_r0 = 0.9;
    double ex3_rho0 = 0.1;

    // centers
    double spacing = 1.0;
    double cov_r0 = 0.9;
    int index_bound = 12;
    std::string centers_mode = "axis"; // axis | lattice

    std::vector<double> r_list{0.9};
    std::vector<double> A_list{1.0, 10.0, 100.0};
    std::vector<double> N_list{1.0, 10.0, 100.0};
    double gamma_override = -1.0; // negative: use the default gamma(r)
    int measure_m = 64;

    double h_quadrature = 0.0375;
    double h_eigen = 0.075;
    double h_transport = 0.0375;

    std::vector<std::string> criteria{"transport", "negative_part", "molchanov",
                                      "necessary_measures", "localization"};
    std::uint64_t seed = 1234;
    std::string out_dir = "out";
};

inline const std::vector<std::string>& known_criteria() {
    static const std::vector<std::string> k{
        "negative_part",   "uniform_tail",       "rearrangement",
        "expectation_deviation", "trimmed_integral", "transport",
        "molchanov",       "necessary_measures", "localization"};
    return k;
}

inline nlohmann::json to_json(const ScanConfig& c) {
    nlohmann::json j;
    j["schema"] = "specbound-config-v1";
    j["dimension"] = c.dimension;
    j["potential"] = c.potential;
    j["const_value"] = c.const_value;
    j["table_path"] = c.table_path;
    j["ex1_r0"] = c.ex1_r0;
    j["ex2_a"] = c.ex2_a;
    j["ex2_alpha_power"] = c.ex2_alpha_power;
    j["ex2_count"] = c.ex2_count;
    j["ex2_window_lo"] = c.ex2_window_lo;
    j["ex2_window_hi"] = c.ex2_window_hi;
    j["ex3_r0"] = c.ex3_r0;
    j["ex3_rho0"] = c.ex3_rho0;
    j["spacing"] = c.spacing;
    j["cov_r0"] = c.cov_r0;
    j["index_bound"] = c.index_bound;
    j["centers_mode"] = c.centers_mode;
    j["r_list"] = c.r_list;
    j["A_list"] = c.A_list;
    j["N_list"] = c.N_list;
    j["gamma_override"] = c.gamma_override;
    j["measure_m"] = c.measure_m;
    j["h_quadrature"] = c.h_quadrature;
    j["h_eigen"] = c.h_eigen;
    j["h_transport"] = c.h_transport;
    j["criteria"] = c.criteria;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    return j;
}

inline ScanConfig config_from_json(const nlohmann::json& j) {
    ScanConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("dimension", c.dimension);
    get("potential", c.potential);
    get("const_value", c.const_value);
    get("table_path", c.table_path);
    get("ex1_r0", c.ex1_r0);
    get("ex2_a", c.ex2_a);
    get("ex2_alpha_power", c.ex2_alpha_power);
    get("ex2_count", c.ex2_count);
    get("ex2_window_lo", c.ex2_window_lo);
    get("ex2_window_hi", c.ex2_window_hi);
    get("ex3_r0", c.ex3_r0);
    get("ex3_rho0", c.ex3_rho0);
    get("spacing", c.spacing);
    get("cov_r0", c.cov_r0);
    get("index_bound", c.index_bound);
    get("centers_mode", c.centers_mode);
    get("r_list", c.r_list);
    get("A_list", c.A_list);
    get("N_list", c.N_list);
    get("gamma_override", c.gamma_override);
    get("measure_m", c.measure_m);
    get("h_quadrature", c.h_quadrature);
    get("h_eigen", c.h_eigen);
    get("h_transport", c.h_transport);
    get("criteria", c.criteria);
    get("seed", c.seed);
    get("out_dir", c.out_dir);
    return c;
}

inline ScanConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

// ---------------------------------------------------------------------------

/// Canned configurations reproducing the three example constructions at desk
/// scale.
inline ScanConfig example_config(int which) {
    ScanConfig c;
    switch (which) {
        case 1:
            c.potential = "example1";
            c.ex1_r0 = 0.45;
            c.index_bound = 20;
            c.centers_mode = "axis";
            c.cov_r0 = 0.45;
            c.r_list = {0.45};
            c.A_list = {0.0, 1.0};
            c.measure_m = 96;
            c.h_quadrature = 0.45 / 64.0;
            c.criteria = {"necessary_measures", "molchanov"};
            c.out_dir = "out_example1";
            break;
        case 2:
            c.potential = "example2";
            c.ex2_a = 1.0;
            c.ex2_alpha_power = 2.0;
            c.ex2_count = 10;
            c.ex2_window_lo = 3;
            c.ex2_window_hi = 8;
            c.r_list = {0.9};
            c.h_quadrature = 0.9 / 12.0;
            c.criteria = {"trimmed_integral", "localization"};
            c.out_dir = "out_example2";
            break;
        case 3:
            c.potential = "example3";
            c.ex3_r0 = 0.9;
            c.ex3_rho0 = 0.1;
            c.index_bound = 12;
            c.centers_mode = "axis";
            c.cov_r0 = 0.9;
            c.r_list = {0.9};
            c.A_list = {1.0, 10.0};
            c.measure_m = 64;
            c.h_quadrature = 0.9 / 24.0;
            c.h_transport = 0.9 / 24.0;
            c.h_eigen = 0.9 / 12.0;
            c.criteria = {"transport", "negative_part", "molchanov",
                          "necessary_measures", "localization"};
            c.out_dir = "out_example3";
            break;
        default:
            throw std::invalid_argument("example_config: which must be 1, 2 or 3");
    }
    return c;
}

// ---------------------------------------------------------------------------

/// Empty list iff run_scan would accept the configuration.
inline std::vector<std::string> validate(const ScanConfig& c) {
    std::vector<std::string> bad;
    if (c.dimension != 3) bad.push_back("dimension: scans require d = 3");
    static const std::set<std::string> pots{"example1", "example2", "example3",
                                            "remark", "zero", "const", "harmonic",
                                            "sqrtabs", "table"};
    if (!pots.count(c.potential)) bad.push_back("potential: unknown name " + c.potential);
    if (c.potential == "example1" || c.potential == "remark")
        if (!(c.ex1_r0 > 0.0 && c.ex1_r0 < 0.5))
            bad.push_back("ex1_r0: need 0 < r0 < 1/2");
    if (c.potential == "example3") {
        const double lim = 1.0 - std::sqrt(3.0) / 2.0;
        if (!(c.ex3_rho0 > 0.0 && c.ex3_rho0 < lim))
            bad.push_back("ex3_rho0: need 0 < rho0 < 1 - sqrt(3)/2");
        if (!(c.ex3_r0 > std::sqrt(3.0) / 2.0))
            bad.push_back("ex3_r0: need r0 > sqrt(3)/2");
        if (!(c.ex3_rho0 < c.ex3_r0)) bad.push_back("ex3_rho0: need rho0 < r0");
    }
    if (c.potential == "example2") {
        if (c.ex2_count < 4) bad.push_back("ex2_count: need at least 4 plateaus");
        if (!(c.ex2_a > 0.0)) bad.push_back("ex2_a: need a > 0");
        if (c.ex2_window_lo < 1 || c.ex2_window_hi + 2 > c.ex2_count ||
            c.ex2_window_lo > c.ex2_window_hi)
            bad.push_back("ex2 windows: need 1 <= lo <= hi <= count - 2");
    }
    if (c.potential == "table" && c.table_path.empty())
        bad.push_back("table_path: required for potential=table");
    if (c.potential == "table" && !c.table_path.empty() &&
        !std::filesystem::exists(c.table_path))
        bad.push_back("table_path: file does not exist: " + c.table_path);
    if (c.spacing <= 0.0) bad.push_back("spacing: must be positive");
    if (c.index_bound < 0) bad.push_back("index_bound: must be >= 0");
    if (c.centers_mode != "axis" && c.centers_mode != "lattice")
        bad.push_back("centers_mode: must be axis or lattice");
    if (c.r_list.empty()) bad.push_back("r_list: must not be empty");
    for (double r : c.r_list)
        if (r <= 0.0) bad.push_back("r_list: entries must be positive");
    if (c.h_quadrature <= 0.0) bad.push_back("h_quadrature: must be positive");
    if (c.h_eigen <= 0.0) bad.push_back("h_eigen: must be positive");
    if (c.h_transport <= 0.0) bad.push_back("h_transport: must be positive");
    if (c.measure_m < 2) bad.push_back("measure_m: must be >= 2");
    for (std::size_t i = 1; i < c.N_list.size(); ++i)
        if (c.N_list[i] <= c.N_list[i - 1])
            bad.push_back("N_list: must increase strictly");
    for (const auto& name : c.criteria)
        if (std::find(known_criteria().begin(), known_criteria().end(), name) ==
            known_criteria().end())
            bad.push_back("criteria: unknown name " + name);
    const bool needs_covering =
        std::find(c.criteria.begin(), c.criteria.end(), "transport") != c.criteria.end();
    if (needs_covering && c.potential != "example2") {
        const LatticeCovering cov(3, c.spacing, c.cov_r0, std::max(c.index_bound, 0));
        if (!is_rho_covering(cov).first)
            bad.push_back("covering: r0 <= spacing*sqrt(3)/2, balls do not form a "
                          "rho-covering (transport criterion requires one)");
    }
    if (!(c.gamma_override < 0.0) &&
        !(c.gamma_override > 0.0 && c.gamma_override < 1.0))
        bad.push_back("gamma_override: must lie in (0,1) when set");
    if (c.out_dir.empty()) bad.push_back("out_dir: must not be empty");
    return bad;
}

// ---------------------------------------------------------------------------

struct ScanArtifacts {
    PotentialField V;
    std::vector<Vec3> centers;
    // example 2 extras
    bool is_example2 = false;
    Example2 ex2;
    std::vector<int> window_ks;
};

inline ScanArtifacts build_artifacts(const ScanConfig& c) {
    ScanArtifacts art;
    if (c.potential == "example1") {
        art.V = example1_potential(c.ex1_r0);
    } else if (c.potential == "example2") {
        std::vector<double> alphas(c.ex2_count);
        for (int k = 1; k <= c.ex2_count; ++k)
            alphas[k - 1] = std::pow(double(k), c.ex2_alpha_power);
        art.ex2 = example2_potential(c.ex2_a, alphas);
        art.V = art.ex2.vdd;
        art.is_example2 = true;
        for (int k = c.ex2_window_lo; k <= c.ex2_window_hi; ++k)
            art.window_ks.push_back(k);
    } else if (c.potential == "example3") {
        Example3Params p;
        p.r0 = c.ex3_r0;
        p.rho0 = c.ex3_rho0;
        art.V = example3_potential(p);
    } else if (c.potential == "remark") {
        art.V = remark_candidate_potential(c.ex1_r0,
                                           [](int n) { return double(n); });
    } else if (c.potential == "zero") {
        art.V = PotentialField{3, true, "zero potential",
                               [](const Vec3&) { return 0.0; }};
    } else if (c.potential == "const") {
        const double v = c.const_value;
        art.V = PotentialField{3, true, "constant potential",
                               [v](const Vec3&) { return v; }};
    } else if (c.potential == "harmonic") {
        art.V = PotentialField{3, true, "harmonic |x|^2",
                               [](const Vec3& x) { return dot3(x, x); }};
    } else if (c.potential == "sqrtabs") {
        art.V = PotentialField{3, true, "sqrt(|x|)",
                               [](const Vec3& x) { return std::sqrt(norm3(x)); }};
    } else if (c.potential == "table") {
        art.V = load_table_potential(c.table_path, c.dimension);
    } else {
        throw std::invalid_argument("build_artifacts: unknown potential " + c.potential);
    }

    if (art.is_example2) {
        for (int k : art.window_ks) {
            const double mid = 0.5 * (art.ex2.layout.window_lo(k) +
                                      art.ex2.layout.window_hi(k));
            art.centers.push_back(Vec3{mid, 0.0, 0.0});
        }
    } else if (c.centers_mode == "axis") {
        for (int j = 0; j <= c.index_bound; ++j)
            art.centers.push_back(Vec3{j * c.spacing, 0.0, 0.0});
    } else {
        const LatticeCovering cov(3, c.spacing, c.cov_r0, c.index_bound);
        art.centers = covering_centers(cov);
    }
    return art;
}

// ---------------------------------------------------------------------------

struct Report {
    std::string config_echo; // canonical JSON
    std::vector<CriterionVerdict> verdicts;
    std::optional<TransportReport> transport;
    std::optional<NecessaryMeasures> measures;
    std::optional<ScanSeries> localization;
    // example 2: 1D minimal eigenvalues over the construction windows
    std::vector<int> window_ks;
    std::vector<double> window_lambda0;
    Trend window_trend = Trend::inconclusive;

    std::string text;                            // deterministic report body
    std::map<std::string, std::string> csv_files; // name -> contents
};

namespace detail {

inline std::string series_csv(const std::vector<Vec3>& centers,
                              const std::vector<RSeries>& series, const char* label) {
    std::ostringstream os;
    os << "abs_y,y1,y2,y3";
    for (const auto& s : series) os << ",value_" << label << fmt_short(s.r);
    os << "\n";
    for (std::size_t i = 0; i < centers.size(); ++i) {
        os << fmt_g(norm3(centers[i])) << "," << fmt_g(centers[i][0]) << ","
           << fmt_g(centers[i][1]) << "," << fmt_g(centers[i][2]);
        for (const auto& s : series) {
            os << ",";
            if (!s.center_errors.empty() && !s.center_errors[i].empty())
                os << "error";
            else
                os << fmt_g(s.values[i]);
        }
        os << "\n";
    }
    return os.str();
}

inline void describe_verdict(std::ostringstream& os, const CriterionVerdict& v) {
    os << "criterion " << v.name << ":\n";
    os << "  trend: " << trend_name(v.trend) << "\n";
    if (v.threshold) os << "  threshold: " << fmt_g(*v.threshold) << "\n";
    for (const auto& s : v.series) {
        const auto vals = finite_values(s);
        os << "  series r=" << fmt_short(s.r) << ": trend=" << trend_name(s.trend);
        if (!vals.empty()) {
            os << " head=" << fmt_g(vals.front()) << " tail=" << fmt_g(vals.back());
        }
        os << "\n";
    }
    for (const auto& cv : v.caveats) os << "  caveat: " << cv << "\n";
    os << "  series_file: " << v.name << ".csv\n";
}

} // namespace detail

/// Execute the configured scan. Per-criterion failures are isolated; the
/// report notes partial results. Files are not written here; see
/// write_report.
inline Report run_scan(const ScanConfig& cfg) {
    {
        const auto bad = validate(cfg);
        if (!bad.empty()) {
            std::string msg = "run_scan: invalid config:";
            for (const auto& b : bad) msg += "\n  " + b;
            throw std::invalid_argument(msg);
        }
    }
    auto art = build_artifacts(cfg);
    Report rep;
    rep.config_echo = to_json(cfg).dump();

    GammaFn gamma;
    if (cfg.gamma_override > 0.0) {
        const double g = cfg.gamma_override;
        gamma = [g](double) { return g; };
    }

    std::ostringstream notes;
    auto run_guarded = [&](const std::string& name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            notes << "  " << name << " failed: " << e.what() << "\n";
        }
    };

    for (const auto& name : cfg.criteria) {
        if (name == "negative_part")
            run_guarded(name, [&] {
                rep.verdicts.push_back(check_negative_part(
                    art.V, art.centers, cfg.r_list.front(), cfg.h_quadrature));
            });
        else if (name == "uniform_tail")
            run_guarded(name, [&] {
                rep.verdicts.push_back(check_uniform_tail(art.V, art.centers,
                                                          cfg.r_list.front(),
                                                          cfg.N_list, cfg.h_quadrature));
            });
        else if (name == "rearrangement")
            run_guarded(name, [&] {
                auto [vp, vn] = positive_negative_parts(art.V);
                rep.verdicts.push_back(check_rearrangement(vp, art.centers, cfg.r_list,
                                                           cfg.h_quadrature, gamma));
            });
        else if (name == "expectation_deviation")
            run_guarded(name, [&] {
                auto [vp, vn] = positive_negative_parts(art.V);
                rep.verdicts.push_back(check_expectation_deviation(
                    vp, art.centers, cfg.r_list, cfg.h_quadrature, gamma));
            });
        else if (name == "trimmed_integral")
            run_guarded(name, [&] {
                auto [vp, vn] = positive_negative_parts(art.V);
                rep.verdicts.push_back(check_trimmed_integral(
                    vp, art.centers, cfg.r_list, cfg.h_quadrature, gamma));
            });
        else if (name == "transport")
            run_guarded(name, [&] {
                rep.transport = check_transport(art.V, art.centers, cfg.r_list.front(),
                                                cfg.h_transport);
            });
        else if (name == "molchanov")
            run_guarded(name, [&] {
                rep.verdicts.push_back(necessary_molchanov(art.V, art.centers,
                                                           cfg.r_list,
                                                           cfg.h_quadrature));
            });
        else if (name == "necessary_measures")
            run_guarded(name, [&] {
                rep.measures = necessary_measure_conditions(
                    art.V, art.centers, cfg.r_list.front(), cfg.A_list, cfg.measure_m,
                    cfg.h_quadrature);
            });
        else if (name == "localization") {
            if (art.is_example2)
                run_guarded(name, [&] {
                    rep.window_ks = art.window_ks;
                    for (int k : art.window_ks)
                        rep.window_lambda0.push_back(interval_lambda0_1d(
                            art.ex2.v1d, art.ex2.layout.window_lo(k),
                            art.ex2.layout.window_hi(k), 20000));
                    rep.window_trend = classify_trend(rep.window_lambda0);
                });
            else
                run_guarded(name, [&] {
                    rep.localization = localization_scan(
                        art.V, art.centers, cfg.r_list.front(), cfg.h_eigen);
                });
        }
    }

    // ---- render ----
    std::ostringstream os;
    os << "specbound report schema 1\n";
    os << "config: " << rep.config_echo << "\n";
    os << "caveats:\n";
    os << "  - every verdict is trend evidence at the scanned range, not a proof\n";
    os << "  - all quantities are dimensionless reals\n";
    os << "resolution:\n";
    os << "  h_quadrature: " << fmt_g(cfg.h_quadrature) << "\n";
    os << "  h_eigen: " << fmt_g(cfg.h_eigen) << "\n";
    os << "  h_transport: " << fmt_g(cfg.h_transport) << "\n";
    os << "  measure_m: " << cfg.measure_m << "\n";
    os << "  rearrangement_bisection_rel_tol: 1e-06\n";
    os << "  seed: " << cfg.seed << "\n";
    const std::string failure_notes = notes.str();
    if (!failure_notes.empty()) os << "partial results, failed sections:\n"
                                   << failure_notes;

    for (const auto& v : rep.verdicts) {
        detail::describe_verdict(os, v);
        rep.csv_files[v.name + ".csv"] =
            detail::series_csv(v.centers, v.series, "r");
    }
    if (rep.transport) {
        detail::describe_verdict(os, rep.transport->bound);
        detail::describe_verdict(os, rep.transport->expectation);
        os << "transport combined: " << rep.transport->combined << "\n";
        rep.csv_files["transport_bound.csv"] =
            detail::series_csv(rep.transport->bound.centers,
                               rep.transport->bound.series, "r");
        rep.csv_files["transport_expectation.csv"] =
            detail::series_csv(rep.transport->expectation.centers,
                               rep.transport->expectation.series, "r");
    }
    if (rep.measures) {
        const auto& M = *rep.measures;
        os << "necessary_measures (r=" << fmt_short(M.r) << ", m=" << M.m << "):\n";
        for (std::size_t a = 0; a < M.A_list.size(); ++a) {
            os << "  A=" << fmt_short(M.A_list[a])
               << " mes1 trend=" << trend_name(M.trend1[a])
               << " mes2 trend=" << trend_name(M.trend2[a]) << "\n";
        }
        os << "  note: claims (i) and (ii) are reported independently; neither "
              "is inferred from the other\n";
        os << "  series_file: necessary_mes1.csv necessary_mes2.csv\n";
        for (int which = 0; which < 2; ++which) {
            std::ostringstream cs;
            cs << "abs_y,y1,y2,y3";
            for (double A : M.A_list) cs << ",mes_A" << fmt_short(A);
            cs << "\n";
            for (std::size_t i = 0; i < M.centers.size(); ++i) {
                cs << fmt_g(norm3(M.centers[i])) << "," << fmt_g(M.centers[i][0])
                   << "," << fmt_g(M.centers[i][1]) << "," << fmt_g(M.centers[i][2]);
                for (std::size_t a = 0; a < M.A_list.size(); ++a)
                    cs << "," << fmt_g(which == 0 ? M.mes1[a][i] : M.mes2[a][i]);
                cs << "\n";
            }
            rep.csv_files[which == 0 ? "necessary_mes1.csv" : "necessary_mes2.csv"] =
                cs.str();
        }
    }
    if (rep.localization) {
        const auto& L = *rep.localization;
        os << "localization scan (3D, r=" << fmt_short(cfg.r_list.front())
           << "): trend=" << trend_name(L.trend) << "\n";
        os << "  series_file: localization.csv\n";
        std::ostringstream cs;
        cs << "abs_y,y1,y2,y3,lambda0\n";
        for (std::size_t i = 0; i < L.centers.size(); ++i) {
            cs << fmt_g(norm3(L.centers[i])) << "," << fmt_g(L.centers[i][0]) << ","
               << fmt_g(L.centers[i][1]) << "," << fmt_g(L.centers[i][2]) << ",";
            if (!L.center_errors[i].empty()) cs << "error";
            else cs << fmt_g(L.values[i]);
            cs << "\n";
        }
        rep.csv_files["localization.csv"] = cs.str();
    }
    if (!rep.window_ks.empty()) {
        os << "localization windows (1D intervals): trend="
           << trend_name(rep.window_trend) << "\n";
        os << "  series_file: window_lambda0.csv\n";
        std::ostringstream cs;
        cs << "k,lambda0\n";
        for (std::size_t i = 0; i < rep.window_ks.size(); ++i)
            cs << rep.window_ks[i] << "," << fmt_g(rep.window_lambda0[i]) << "\n";
        rep.csv_files["window_lambda0.csv"] = cs.str();
    }
    os << "end\n";
    rep.text = os.str();
    return rep;
}

/// Write report.txt and the flat series files into out_dir.
inline void write_report(const Report& rep, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream f(out_dir + "/report.txt", std::ios::binary);
        f << rep.text;
    }
    for (const auto& [name, content] : rep.csv_files) {
        std::ofstream f(out_dir + "/" + name, std::ios::binary);
        f << content;
    }
}

} // namespace specbound
