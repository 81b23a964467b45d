#include <catch2/catch_amalgamated.hpp>

#include "specbound/statistics.hpp"
#include "support/oracles.hpp"

using namespace specbound;

namespace {

// random piecewise-constant field over the unit ball: value per octant shell
PotentialField random_piecewise(std::uint64_t seed, double lo = 0.0, double hi = 5.0) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    auto vals = std::make_shared<std::vector<double>>();
    for (int i = 0; i < 32; ++i) vals->push_back(u(rng));
    return {3, false, "random piecewise",
            [vals](const Vec3& x) {
                const int oct = (x[0] > 0) * 4 + (x[1] > 0) * 2 + (x[2] > 0);
                const int shell = std::min(3, int(norm3(x) * 4.0));
                return (*vals)[oct * 4 + shell];
            }};
}

} // namespace

TEST_CASE("level_measure basics") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 24.0);
    PotentialField c{3, true, "const 2", [](const Vec3&) { return 2.0; }};
    CHECK(level_measure(c, grid, 1.5) == grid.total_weight());
    CHECK(level_measure(c, grid, 2.5) == 0.0);

    PotentialField r{3, true, "|x|", [](const Vec3& x) { return norm3(x); }};
    const double shell = level_measure(r, grid, 0.5);
    const double exact = 4.0 * std::numbers::pi / 3.0 * (1.0 - 0.125);
    CHECK_THAT(shell, Catch::Matchers::WithinRel(exact, 0.02));
}

TEST_CASE("rearrangement of constants and indicators") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 20.0);
    const double mes = grid.total_weight();

    PotentialField c{3, true, "const 3", [](const Vec3&) { return 3.0; }};
    for (double t : {0.1 * mes, 0.5 * mes, mes})
        CHECK_THAT(rearrangement(c, grid, t), Catch::Matchers::WithinAbs(3.0, 1e-5));

    // two-level function: c on the half-ball x0 > 0
    PotentialField ind{3, false, "indicator",
                       [](const Vec3& x) { return x[0] > 0.0 ? 2.0 : 0.0; }};
    const double a = level_measure(ind, grid, 1.0); // measure of the level set
    CHECK_THAT(rearrangement(ind, grid, 0.5 * a), Catch::Matchers::WithinAbs(2.0, 1e-5));
    CHECK_THAT(rearrangement(ind, grid, 1.5 * a), Catch::Matchers::WithinAbs(0.0, 1e-5));

    CHECK_THROWS(rearrangement(c, grid, 2.0 * mes));
    CHECK_THROWS(rearrangement(c, grid, 0.0));
}

TEST_CASE("rearrangement agrees with the sort-based oracle") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 16.0);
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        const auto V = random_piecewise(seed);
        const auto vals = sample(V, grid);
        const double mes = grid.total_weight();
        for (double frac : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            const double t = frac * mes;
            const double got = rearrangement(vals, grid.weights, t, mes);
            const double want = oracles::sorted_rearrangement(vals, grid.weights, t);
            CHECK_THAT(got, Catch::Matchers::WithinAbs(want, 1e-5 * std::max(1.0, want)));
        }
    }
}

TEST_CASE("rearrangement is nonincreasing in t") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 16.0);
    const auto V = random_piecewise(5);
    const auto vals = sample(V, grid);
    const double mes = grid.total_weight();
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 40; ++i) {
        const double cur = rearrangement(vals, grid.weights, mes * i / 40.0, mes);
        CHECK(cur <= prev + 1e-9);
        prev = cur;
    }
}

TEST_CASE("equimeasurability on a random piecewise-constant field") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 16.0);
    const auto V = random_piecewise(77, 0.5, 4.0);
    const auto vals = sample(V, grid);
    const double mes = grid.total_weight();
    // mes_1{t : W*(t) >= s} should reproduce lambda*(s)
    const int m = 400;
    std::vector<double> Wstar(m);
    for (int i = 0; i < m; ++i)
        Wstar[i] = rearrangement(vals, grid.weights, mes * (i + 0.5) / m, mes);
    for (double s : {0.7, 1.3, 2.1, 3.2}) {
        int cnt = 0;
        for (double w : Wstar)
            if (w >= s) ++cnt;
        const double lhs = cnt * mes / m;
        const double rhs = level_measure(vals, grid.weights, s);
        CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 2.5 * mes / m + 1e-12));
    }
}

TEST_CASE("layer cake within 2 percent") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 16.0);
    for (std::uint64_t seed : {3u, 8u}) {
        const auto V = random_piecewise(seed, 0.0, 3.0);
        const auto vals = sample(V, grid);
        const double mes = grid.total_weight();
        const double direct = integral(vals, grid.weights);
        const int m = 600;
        double layer = 0.0;
        for (int i = 0; i < m; ++i)
            layer += rearrangement(vals, grid.weights, mes * (i + 0.5) / m, mes) *
                     (mes / m);
        CHECK_THAT(layer, Catch::Matchers::WithinRel(direct, 0.02));
    }
}

TEST_CASE("scaling identities") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 14.0);
    const auto V = random_piecewise(13, 0.2, 4.0);
    auto vals = sample(V, grid);
    const double mes = grid.total_weight();

    // power-of-two scaling commutes exactly with the bisection
    for (double alpha : {2.0, 0.5, 4.0}) {
        std::vector<double> scaled(vals);
        for (auto& v : scaled) v *= alpha;
        for (double frac : {0.2, 0.6, 0.9}) {
            const double a = rearrangement(scaled, grid.weights, frac * mes, mes);
            const double b = alpha * rearrangement(vals, grid.weights, frac * mes, mes);
            CHECK_THAT(a, Catch::Matchers::WithinAbs(b, 1e-10 * std::max(1.0, b)));
        }
        const auto m1 = moments(scaled, grid.weights);
        const auto m0 = moments(vals, grid.weights);
        CHECK_THAT(m1.expectation, Catch::Matchers::WithinAbs(alpha * m0.expectation, 1e-10));
        CHECK_THAT(m1.deviation, Catch::Matchers::WithinAbs(alpha * m0.deviation, 1e-10));
    }
    // generic alpha within the bisection tolerance
    std::vector<double> s3(vals);
    for (auto& v : s3) v *= 3.0;
    const double a3 = rearrangement(s3, grid.weights, 0.4 * mes, mes);
    const double b3 = 3.0 * rearrangement(vals, grid.weights, 0.4 * mes, mes);
    CHECK_THAT(a3, Catch::Matchers::WithinRel(b3, 1e-5));
}

TEST_CASE("trimmed integral boundary cases and indicator") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 16.0);
    PotentialField ind{3, false, "indicator",
                       [](const Vec3& x) { return x[0] > 0.0 ? 1.5 : 0.0; }};
    const auto vals = sample(ind, grid);
    const double full = integral(vals, grid.weights);
    CHECK(trimmed_integral(vals, grid.weights, 0.0) == full);
    CHECK(trimmed_integral(vals, grid.weights, grid.total_weight()) == 0.0);
    const double a = level_measure(vals, grid.weights, 1.0);
    const double delta = 0.4 * a;
    CHECK_THAT(trimmed_integral(vals, grid.weights, delta),
               Catch::Matchers::WithinRel(1.5 * (a - delta), 1e-9));
    // nonincreasing in delta
    double prev = full;
    for (int i = 1; i <= 20; ++i) {
        const double cur =
            trimmed_integral(vals, grid.weights, grid.total_weight() * i / 20.0);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
    std::vector<double> bad{1.0, -0.5};
    std::vector<double> w{1.0, 1.0};
    CHECK_THROWS(trimmed_integral(bad, w, 0.1));
}

TEST_CASE("moments: constants and two-valued fields") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 16.0);
    PotentialField c{3, true, "const", [](const Vec3&) { return 4.2; }};
    const auto mc = moments(c, grid);
    CHECK_THAT(mc.expectation, Catch::Matchers::WithinAbs(4.2, 1e-12));
    CHECK_THAT(mc.deviation, Catch::Matchers::WithinAbs(0.0, 1e-9));

    PotentialField pm{3, false, "sign",
                      [](const Vec3& x) { return x[0] > 0.0 ? 1.0 : -1.0; }};
    const auto mp = moments(pm, grid);
    CHECK_THAT(mp.expectation, Catch::Matchers::WithinAbs(0.0, 0.01));
    CHECK_THAT(mp.deviation, Catch::Matchers::WithinAbs(1.0, 0.01));
}

TEST_CASE("expectation of sqrt(|x|) grows like sqrt(|y|)") {
    const double r0 = 0.9;
    PotentialField v0{3, true, "sqrt", [](const Vec3& x) { return std::sqrt(norm3(x)); }};
    double prev = 0.0;
    for (double L : {2.0, 5.0, 9.0}) {
        const auto grid = make_grid(Ball({L, 0, 0}, r0), r0 / 12.0);
        const auto ms = moments(v0, grid);
        CHECK(ms.expectation > std::sqrt(L - r0));
        CHECK(ms.expectation < std::sqrt(L + r0));
        CHECK(ms.expectation > prev);
        prev = ms.expectation;
    }
}

TEST_CASE("lp norms") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto grid = make_grid(ball, 1.0 / 24.0);
    PotentialField one{3, true, "one", [](const Vec3&) { return 1.0; }};
    const double mes = grid.total_weight();
    CHECK_THAT(lp_norm(one, grid, 1.5), Catch::Matchers::WithinRel(std::pow(mes, 2.0 / 3.0), 1e-9));
    // monotone under domain inclusion for fixed V >= 0
    PotentialField f{3, true, "f", [](const Vec3& x) { return 1.0 + norm3(x); }};
    const auto gsmall = make_grid(Ball({0, 0, 0}, 0.6), 1.0 / 24.0);
    CHECK(lp_norm(f, gsmall, 2.0) < lp_norm(f, grid, 2.0));
    CHECK_THROWS(lp_norm(one, grid, 0.5));
}

TEST_CASE("negative-part d/2 norm of example3 grows along the axis") {
    Example3Params p;
    const auto V = example3_potential(p);
    auto neg32 = [&](double L) {
        // V_- is supported in the bump ball; integrate there with a grid
        // fine enough to resolve the oscillation ~ rho0/L
        const double h = p.rho0 / (6.0 * L);
        const auto grid = make_grid(Ball({L, 0, 0}, p.rho0 * 1.05), h);
        double acc = 0.0;
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            const double v = V.eval(grid.nodes[i]);
            if (v < 0.0) acc += grid.weights[i] * std::pow(-v, 1.5);
        }
        return acc;
    };
    const double i3 = neg32(3.0);
    const double i8 = neg32(8.0);
    CHECK(i8 > 2.0 * i3);
}

TEST_CASE("monte carlo grid statistics agree with the lattice grid") {
    const Ball ball({0, 0, 0}, 1.0);
    PotentialField r{3, true, "|x|", [](const Vec3& x) { return norm3(x); }};
    const auto gl = make_grid(ball, 1.0 / 24.0);
    const auto gm = make_mc_grid(ball, 40000, 2024);
    CHECK_THAT(moments(r, gm).expectation,
               Catch::Matchers::WithinRel(moments(r, gl).expectation, 0.02));
    CHECK_THAT(level_measure(r, gm, 0.5),
               Catch::Matchers::WithinRel(level_measure(r, gl, 0.5), 0.05));
}
