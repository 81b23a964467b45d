#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "specbound/scan.hpp"

using namespace specbound;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}
} // namespace

TEST_CASE("config json round trip") {
    ScanConfig c = example_config(3);
    c.seed = 99;
    c.criteria = {"molchanov"};
    const auto j = to_json(c);
    const auto back = config_from_json(j);
    CHECK(back.potential == c.potential);
    CHECK(back.seed == c.seed);
    CHECK(back.criteria == c.criteria);
    CHECK(back.ex3_rho0 == c.ex3_rho0);
    CHECK(to_json(back).dump() == j.dump());
}

TEST_CASE("validate flags the documented violations") {
    ScanConfig c = example_config(3);
    CHECK(validate(c).empty());

    ScanConfig bad_rho = c;
    bad_rho.ex3_rho0 = 0.2; // above 1 - sqrt(3)/2
    auto v1 = validate(bad_rho);
    REQUIRE_FALSE(v1.empty());
    CHECK(v1.front().find("rho0") != std::string::npos);

    ScanConfig bad_cov = c;
    bad_cov.cov_r0 = 0.8; // below sqrt(3)/2: not a rho-covering
    auto v2 = validate(bad_cov);
    bool found = false;
    for (const auto& m : v2)
        if (m.find("covering") != std::string::npos) found = true;
    CHECK(found);

    ScanConfig bad_r = c;
    bad_r.r_list.clear();
    auto v3 = validate(bad_r);
    found = false;
    for (const auto& m : v3)
        if (m.find("r_list") != std::string::npos) found = true;
    CHECK(found);

    ScanConfig bad_crit = c;
    bad_crit.criteria = {"nonsense"};
    CHECK_FALSE(validate(bad_crit).empty());
}

TEST_CASE("run_scan rejects invalid configs") {
    ScanConfig c = example_config(3);
    c.r_list.clear();
    CHECK_THROWS_AS(run_scan(c), std::invalid_argument);
}

TEST_CASE("small scan produces a report with the expected sections") {
    ScanConfig c;
    c.potential = "harmonic";
    c.centers_mode = "axis";
    c.index_bound = 5;
    c.cov_r0 = 0.9;
    c.r_list = {0.8};
    c.h_quadrature = 0.1;
    c.h_eigen = 0.1;
    c.measure_m = 24;
    c.A_list = {1.0};
    c.criteria = {"molchanov", "rearrangement", "necessary_measures", "localization"};
    c.out_dir = "test_scan_out";
    const auto rep = run_scan(c);
    CHECK(rep.text.find("specbound report schema 1") == 0);
    CHECK(rep.text.find("criterion molchanov") != std::string::npos);
    CHECK(rep.text.find("criterion rearrangement") != std::string::npos);
    CHECK(rep.text.find("necessary_measures") != std::string::npos);
    CHECK(rep.text.find("localization scan") != std::string::npos);
    CHECK(rep.csv_files.count("molchanov.csv") == 1);
    CHECK(rep.csv_files.count("localization.csv") == 1);
    CHECK(rep.csv_files.count("necessary_mes1.csv") == 1);
    // |x|^2 scans diverge
    CHECK(rep.text.find("criterion molchanov:\n  trend: diverging") != std::string::npos);
    // no timing anywhere in the deterministic payloads
    CHECK(rep.text.find("wall") == std::string::npos);

    // CSV shape: header + one row per center
    const auto& csv = rep.csv_files.at("molchanov.csv");
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 1 + 6);
}

TEST_CASE("write_report emits byte-stable files") {
    ScanConfig c;
    c.potential = "sqrtabs";
    c.centers_mode = "axis";
    c.index_bound = 4;
    c.r_list = {0.7};
    c.h_quadrature = 0.1;
    c.criteria = {"expectation_deviation"};
    c.out_dir = "test_scan_out_a";
    const auto rep1 = run_scan(c);
    write_report(rep1, "test_scan_out_a");
    c.out_dir = "test_scan_out_b";
    const auto rep2 = run_scan(c);
    write_report(rep2, "test_scan_out_b");
    CHECK(slurp("test_scan_out_a/report.txt") == slurp("test_scan_out_b/report.txt"));
    CHECK(slurp("test_scan_out_a/expectation_deviation.csv") ==
          slurp("test_scan_out_b/expectation_deviation.csv"));
    fs::remove_all("test_scan_out_a");
    fs::remove_all("test_scan_out_b");
    fs::remove_all("test_scan_out");
}

TEST_CASE("example2 canned scan: windows flat, trimmed integral diverges") {
    ScanConfig c = example_config(2);
    // trim the run for the unit suite: windows 3..6
    c.ex2_window_hi = 6;
    const auto rep = run_scan(c);
    REQUIRE_FALSE(rep.window_lambda0.empty());
    for (double l0 : rep.window_lambda0) CHECK(std::abs(l0) < 0.5);
    CHECK(rep.window_trend != Trend::diverging);
    REQUIRE(rep.verdicts.size() == 1);
    CHECK(rep.verdicts[0].name == "trimmed_integral");
    const auto& tv = rep.verdicts[0].series[0].values;
    CHECK(tv.back() > 5.0 * std::max(tv.front(), 1e-12));
}

TEST_CASE("per-criterion failures are isolated") {
    ScanConfig c;
    c.potential = "table";
    c.table_path = "test_scan_table.txt";
    {
        std::ofstream f(c.table_path);
        f << "0 0 0 1.0\n1 0 0 2.0\n";
    }
    c.centers_mode = "axis";
    c.index_bound = 2;
    c.r_list = {0.5};
    c.h_quadrature = 0.1;
    c.h_eigen = 0.2; // violates h <= radius/8: localization fails per-center
    c.criteria = {"molchanov", "localization"};
    c.out_dir = "test_scan_out_c";
    const auto rep = run_scan(c);
    CHECK(rep.verdicts.size() == 1); // molchanov still produced
    std::filesystem::remove(c.table_path);
}
