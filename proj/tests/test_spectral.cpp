#include <catch2/catch_amalgamated.hpp>

#include "specbound/potential.hpp"
#include "specbound/spectral.hpp"

using namespace specbound;

namespace {
const PotentialField kZero{3, true, "zero", [](const Vec3&) { return 0.0; }};
const PotentialField kHarmonic{3, true, "|x|^2",
                               [](const Vec3& x) { return dot3(x, x); }};
}

TEST_CASE("trend classification rule") {
    std::vector<double> up{1, 1.1, 0.9, 1, 2, 3, 8, 9, 10, 11};
    CHECK(classify_trend(up) == Trend::diverging);
    std::vector<double> flat{5, 5.2, 4.9, 5.1, 5.0, 5.05, 5.1, 4.95};
    CHECK(classify_trend(flat) == Trend::bounded);
    std::vector<double> down{10, 9, 11, 8, 4, 2, 1, 0.5};
    CHECK(classify_trend(down) == Trend::dropping);
    std::vector<double> konst(8, 3.0);
    CHECK(classify_trend(konst) == Trend::bounded);
    CHECK(classify_trend(std::vector<double>{1.0}) == Trend::inconclusive);
}

TEST_CASE("dirichlet lambda0 on the unit ball: pi^2 ground truth") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto res = dirichlet_lambda0(kZero, ball, 1.0 / 16.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK_THAT(res.lambda0, Catch::Matchers::WithinRel(pi2, 0.02));
    CHECK(res.residual <= 1e-5 * std::max(1.0, std::abs(res.lambda0)));
    // ground state positive (no sign change on interior nodes)
    double mn = 1e300, mx = -1e300;
    for (double v : res.ground_state) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    CHECK(mn > -1e-8 * mx);
    CHECK_THROWS_AS(dirichlet_lambda0(kZero, ball, 0.2), std::invalid_argument);
}

TEST_CASE("constant shift identity is exact in the discrete model") {
    const Ball ball({0.5, -0.25, 0}, 0.8);
    PotentialField c7{3, true, "const 7", [](const Vec3&) { return 7.0; }};
    const auto a = dirichlet_lambda0(kZero, ball, 0.1);
    const auto b = dirichlet_lambda0(c7, ball, 0.1);
    CHECK_THAT(b.lambda0 - a.lambda0, Catch::Matchers::WithinAbs(7.0, 1e-6));
}

TEST_CASE("potential monotonicity and domain monotonicity") {
    const Ball ball({0, 0, 0}, 0.8);
    const auto small = dirichlet_lambda0(kZero, Ball({0, 0, 0}, 0.6), 0.06);
    const auto large = dirichlet_lambda0(kZero, ball, 0.06);
    CHECK(small.lambda0 >= large.lambda0); // B in B' => lambda0(B) >= lambda0(B')

    const auto lo = dirichlet_lambda0(kZero, ball, 0.08);
    const auto hi = dirichlet_lambda0(kHarmonic, ball, 0.08);
    CHECK(hi.lambda0 >= lo.lambda0); // V <= V' => lambda0 <= lambda0'
}

TEST_CASE("Richardson order at least 1.8 for the smooth case") {
    const Ball ball({0, 0, 0}, 1.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double e1 =
        std::abs(dirichlet_lambda0(kZero, ball, 1.0 / 8.0).lambda0 - pi2);
    const double e2 =
        std::abs(dirichlet_lambda0(kZero, ball, 1.0 / 16.0).lambda0 - pi2);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.8);
}

TEST_CASE("localization scan: diverging for |x|^2, flat for zero") {
    std::vector<Vec3> centers;
    for (int j = 0; j <= 7; ++j) centers.push_back({double(j), 0.0, 0.0});
    const auto harm = localization_scan(kHarmonic, centers, 1.0, 1.0 / 8.0);
    CHECK(harm.trend == Trend::diverging);
    // lambda0(y,1) - |y|^2 stays bounded: V >= (|y|-1)^2 on B_1(y)
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double L = norm3(centers[i]);
        CHECK(harm.values[i] >= (L - 1.0) * (L - 1.0));
        CHECK(harm.values[i] <= (L + 1.0) * (L + 1.0) + 12.0);
    }
    const auto flat = localization_scan(kZero, centers, 1.0, 1.0 / 8.0);
    CHECK(flat.trend == Trend::bounded);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (double v : flat.values) CHECK_THAT(v, Catch::Matchers::WithinRel(pi2, 0.05));
}

TEST_CASE("localization scan via covering overload and error isolation") {
    LatticeCovering cov(3, 2.0, 1.0, 1);
    // a potential that blows up at one center makes that eigensolve fail
    PotentialField weird{3, false, "inf at (2,0,0)", [](const Vec3& x) {
                             Vec3 rel{x[0] - 2.0, x[1], x[2]};
                             if (norm3(rel) < 0.3)
                                 return std::numeric_limits<double>::infinity();
                             return 0.0;
                         }};
    const auto scan = localization_scan(weird, cov, 0.9, 0.1);
    int failures = 0;
    for (const auto& e : scan.center_errors)
        if (!e.empty()) ++failures;
    CHECK(failures > 0);
    CHECK(failures < int(scan.centers.size()));
}

TEST_CASE("split operator scan bounds lambda0 from below") {
    std::vector<Vec3> centers{{0, 0, 0}, {1.5, 0, 0}, {3, 0, 0}};
    const double r = 1.0, h = 1.0 / 8.0;
    PotentialField v1{3, true, "|x|^2 /2", [](const Vec3& x) { return 0.5 * dot3(x, x); }};
    const auto split = split_operator_scan(v1, v1, 0.5, 0.5, centers, r, h, &kHarmonic);
    const auto direct = localization_scan(kHarmonic, centers, r, h);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        CHECK(split.combined_lower_bound[i] <= direct.values[i] + 1e-6);
        // theta1 = theta2 = 1/2 with V1 = V2 = V/2: both series equal lambda0(V)
        CHECK_THAT(split.first.values[i], Catch::Matchers::WithinRel(direct.values[i], 1e-6));
    }
    // V2 = 0: lambda0^(2) equals the Laplacian ground value
    PotentialField half{3, true, "|x|^2 * 0.5", [](const Vec3& x) { return 0.5 * dot3(x, x); }};
    const auto split2 = split_operator_scan(half, kZero, 0.5, 0.5, centers, r, h);
    const auto lap = localization_scan(kZero, centers, r, h);
    for (std::size_t i = 0; i < centers.size(); ++i)
        CHECK_THAT(split2.second.values[i], Catch::Matchers::WithinRel(lap.values[i], 1e-6));
    CHECK_THROWS(split_operator_scan(v1, v1, 0.7, 0.5, centers, r, h));
}

TEST_CASE("riccati threshold: V = 0 gives pi^2 and the shift identity") {
    auto zero1d = [](double) { return 0.0; };
    const auto th = riccati_threshold(zero1d, 1.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK_THAT(th.lambda_hat, Catch::Matchers::WithinRel(pi2, 1e-4));
    CHECK(th.bracket <= 1e-6 * std::max(1.0, std::abs(th.lambda_hat)) + 1e-12);

    auto c5 = [](double) { return 5.0; };
    const auto th5 = riccati_threshold(c5, 1.0);
    CHECK_THAT(th5.lambda_hat - th.lambda_hat, Catch::Matchers::WithinAbs(5.0, 1e-3));
}

TEST_CASE("riccati threshold agrees with the eigensolver on radial potentials") {
    const Ball ball({0, 0, 0}, 1.0);
    struct Case {
        Handle1D rad;
        PotentialField field;
    };
    std::vector<Case> cases;
    cases.push_back({[](double) { return 0.0; }, kZero});
    cases.push_back({[](double r) { return r * r; }, kHarmonic});
    cases.push_back({[](double r) { return std::sqrt(r); },
                     {3, true, "sqrt|x|", [](const Vec3& x) { return std::sqrt(norm3(x)); }}});
    for (const auto& c : cases) {
        const auto fd = dirichlet_lambda0(c.field, ball, 1.0 / 16.0);
        const auto sh = riccati_threshold(c.rad, 1.0);
        CHECK_THAT(sh.lambda_hat, Catch::Matchers::WithinRel(fd.lambda0, 0.02));
    }
}

TEST_CASE("riccati solution: closed forms and the threshold error") {
    auto zero1d = [](double) { return 0.0; };
    // lambda = 0: u = 1, v = 0
    const auto flat = riccati_solution(zero1d, 1.0, 0.0);
    for (double v : flat.v) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-10));
    // lambda = pi^2/4: u = sin(pi rho/2)/(pi rho/2)
    const double lam = std::pow(std::numbers::pi / 2.0, 2);
    const auto sol = riccati_solution(zero1d, 1.0, lam);
    for (std::size_t i = 0; i < sol.rho.size(); i += 500) {
        const double rho = sol.rho[i];
        const double u = std::sin(std::sqrt(lam) * rho) / (std::sqrt(lam) * rho);
        CHECK_THAT(sol.v[i], Catch::Matchers::WithinAbs(-std::log(u), 1e-6));
    }
    // above the threshold: error
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK_THROWS(riccati_solution(zero1d, 1.0, pi2 + 1.0));
}

TEST_CASE("riccati solution satisfies the radial Riccati equation discretely") {
    auto vrad = [](double r) { return r * r; };
    const auto th = riccati_threshold(vrad, 1.0);
    const double lam = th.lambda_hat - 2.0;
    const auto sol = riccati_solution(vrad, 1.0, lam, 3, 1e-4);
    // -(v'' + (d-1)/rho v') + (v')^2 + lambda = V
    double worst = 0.0;
    for (std::size_t i = 200; i + 200 < sol.rho.size(); i += 37) {
        const double h = sol.rho[i + 1] - sol.rho[i];
        const double vp = (sol.v[i + 1] - sol.v[i - 1]) / (2.0 * h);
        const double vpp = (sol.v[i + 1] - 2.0 * sol.v[i] + sol.v[i - 1]) / (h * h);
        const double lhs = -(vpp + 2.0 / sol.rho[i] * vp) + vp * vp + lam;
        worst = std::max(worst, std::abs(lhs - vrad(sol.rho[i])));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("interval lambda0: analytic and example2 windows") {
    auto zero1d = [](double) { return 0.0; };
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK_THAT(interval_lambda0_1d(zero1d, 0.0, 1.0),
               Catch::Matchers::WithinRel(pi2, 1e-4));
    CHECK_THAT(interval_lambda0_1d(zero1d, 1.0, 3.0),
               Catch::Matchers::WithinRel(pi2 / 4.0, 1e-4));

    std::vector<double> alphas;
    for (int k = 1; k <= 10; ++k) alphas.push_back(double(k) * k);
    const auto ex = example2_potential(1.0, alphas);
    for (int k : {3, 6, 8}) {
        const double l0 = interval_lambda0_1d(ex.v1d, ex.layout.window_lo(k),
                                              ex.layout.window_hi(k), 20000);
        CHECK_THAT(l0, Catch::Matchers::WithinAbs(0.0, 5e-2));
    }
    // any subinterval of length < a inside a plateau: lambda0 >= alpha_k
    const double lo = ex.layout.m[4] + 0.1, hi = ex.layout.l_odd[4] - 0.1;
    CHECK(interval_lambda0_1d(ex.v1d, lo, hi) >= ex.layout.alpha[4]);
}

TEST_CASE("example2 d-dim potential: window localization stays bounded") {
    std::vector<double> alphas;
    for (int k = 1; k <= 10; ++k) alphas.push_back(double(k) * k);
    const auto ex = example2_potential(1.0, alphas);
    std::vector<Vec3> centers;
    std::vector<int> ks{3, 4, 5, 6};
    for (int k : ks)
        centers.push_back(
            {0.5 * (ex.layout.window_lo(k) + ex.layout.window_hi(k)), 0.0, 0.0});
    const auto scan = localization_scan(ex.vdd, centers, 1.2, 0.15);
    CHECK(scan.trend != Trend::diverging);
    for (double v : scan.values) {
        CHECK(std::isfinite(v));
        CHECK(std::abs(v) < 60.0);
    }
}
