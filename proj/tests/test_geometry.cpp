#include <catch2/catch_amalgamated.hpp>

#include "specbound/geometry.hpp"
#include "support/oracles.hpp"

using namespace specbound;

TEST_CASE("covering_centers enumerates the lattice box") {
    LatticeCovering c1(1, 1.0, 0.6, 1);
    const auto pts1 = covering_centers(c1);
    REQUIRE(pts1.size() == 3);
    CHECK(pts1[0][0] == 0.0);
    CHECK(std::abs(pts1[1][0]) == 1.0);
    CHECK(std::abs(pts1[2][0]) == 1.0);

    LatticeCovering c3(3, 1.0, 1.0, 2);
    CHECK(covering_centers(c3).size() == 125);
}

TEST_CASE("covering_centers order is deterministic and sorted by |center|") {
    LatticeCovering cov(3, 0.5, 1.0, 2);
    const auto a = covering_centers(cov);
    const auto b = covering_centers(cov);
    REQUIRE(a == b);
    for (std::size_t i = 1; i < a.size(); ++i)
        CHECK(norm3(a[i - 1]) <= norm3(a[i]) + 1e-15);
}

TEST_CASE("is_rho_covering matches the cube-corner worst case") {
    // d=3, spacing 1: threshold sqrt(3)/2 ~ 0.866
    auto [f1, r1] = is_rho_covering(LatticeCovering(3, 1.0, 0.8, 4));
    CHECK_FALSE(f1);
    auto [f2, r2] = is_rho_covering(LatticeCovering(3, 1.0, 1.0, 4));
    CHECK(f2);
    CHECK_THAT(r2, Catch::Matchers::WithinAbs(1.0 - std::sqrt(3.0) / 2.0, 1e-12));
    auto [f3, r3] = is_rho_covering(LatticeCovering(1, 1.0, 0.6, 4));
    CHECK(f3);
    CHECK_THAT(r3, Catch::Matchers::WithinAbs(0.1, 1e-12));

    // geometric check at r0 = 0.9: every sampled point y admits a lattice
    // point l with |y - l| + rho <= r0
    auto [f4, rho] = is_rho_covering(LatticeCovering(3, 1.0, 0.9, 4));
    CHECK(f4);
    auto rng = make_rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        Vec3 y{u(rng), u(rng), u(rng)};
        Vec3 l{std::round(y[0]), std::round(y[1]), std::round(y[2])};
        Vec3 rel{y[0] - l[0], y[1] - l[1], y[2] - l[2]};
        CHECK(norm3(rel) + rho <= 0.9 + 1e-12);
    }
}

TEST_CASE("is_rho_covering is monotone in r0") {
    bool prev = false;
    for (double r0 = 0.5; r0 <= 1.5; r0 += 0.05) {
        const bool now = is_rho_covering(LatticeCovering(3, 1.0, r0, 2)).first;
        if (prev) CHECK(now);
        prev = now;
    }
}

TEST_CASE("make_grid measures balls and layers within tolerance") {
    const Ball ball({0, 0, 0}, 1.0);
    const auto g = make_grid(ball, 1.0 / 32.0);
    const double exact = 4.0 * std::numbers::pi / 3.0;
    CHECK(std::abs(g.total_weight() - exact) <= 0.03 * exact);

    const SphericalLayer layer({0, 0, 0}, 0.5, 1.0);
    const auto gl = make_grid(layer, 1.0 / 32.0);
    const double exact_layer = exact * (1.0 - 0.125);
    CHECK(std::abs(gl.total_weight() - exact_layer) <= 0.03 * exact_layer);

    CHECK_THROWS(make_grid(Ball({0, 0, 0}, 0.25), 0.5)); // h >= 2 radius
}

TEST_CASE("grid measure error shrinks roughly linearly in h") {
    const Ball ball({0.2, -0.1, 0.05}, 1.0);
    const double exact = 4.0 * std::numbers::pi / 3.0;
    const double e1 = std::abs(make_grid(ball, 1.0 / 8.0).total_weight() - exact);
    const double e2 = std::abs(make_grid(ball, 1.0 / 16.0).total_weight() - exact);
    const double e4 = std::abs(make_grid(ball, 1.0 / 32.0).total_weight() - exact);
    CHECK(e4 <= e1);
    CHECK(e4 <= 0.01 * exact);
    CHECK(e2 <= 2.5 * e1); // monotone up to staircase oscillation
}

TEST_CASE("grid nodes lie inside the domain and lattice index is consistent") {
    const Ball ball({0.3, 0.0, -0.2}, 0.7);
    const auto g = make_grid(ball, 0.05);
    for (const auto& x : g.nodes) CHECK(ball.contains(x));
    std::size_t counted = 0;
    for (int i = 0; i < g.shape[0]; ++i)
        for (int j = 0; j < g.shape[1]; ++j)
            for (int k = 0; k < g.shape[2]; ++k)
                if (g.at(i, j, k) >= 0) ++counted;
    CHECK(counted == g.nodes.size());
}

TEST_CASE("mc grid reproduces the ball volume by construction") {
    const Ball ball({0, 0, 0}, 0.8);
    const auto g = make_mc_grid(ball, 5000, 777);
    CHECK_THAT(g.total_weight(), Catch::Matchers::WithinRel(ball.measure(), 1e-12));
    const auto g2 = make_mc_grid(ball, 5000, 777);
    REQUIRE(g.nodes.size() == g2.nodes.size());
    CHECK(g.nodes[1234] == g2.nodes[1234]); // seeded determinism
}

TEST_CASE("triangle_grid covers Delta_r with nodes strictly inside") {
    for (double r : {1.0, 2.0}) {
        const auto tri = triangle_grid(r, 128);
        double w = 0.0;
        for (const auto& n : tri) {
            CHECK(n.s < n.t);
            CHECK(n.s > 0.0);
            CHECK(n.t < r);
            w += n.weight;
        }
        CHECK_THAT(w, Catch::Matchers::WithinRel(r * r / 2.0, 0.01));
    }
}

TEST_CASE("cube domain grid") {
    const Cube cube({0, 0, 0}, 0.5);
    const auto g = make_grid(cube, 1.0 / 16.0);
    CHECK_THAT(g.total_weight(), Catch::Matchers::WithinRel(1.0, 1e-9));
}
