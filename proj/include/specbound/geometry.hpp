#pragma once

// Domains, lattice coverings and quadrature grids. Every integral and
// measure estimate in the toolkit runs over these grids.

#include <cstdint>
#include <optional>
#include <sstream>
#include <variant>

#include "specbound/numerics.hpp"

namespace specbound {

struct Ball {
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 1.0;
    int dim = 3;

    Ball() = default;
    Ball(Vec3 c, double r, int d = 3) : center(c), radius(r), dim(d) {
        if (r <= 0.0) throw std::invalid_argument("Ball: radius must be positive");
        if (d < 1 || d > 3) throw std::invalid_argument("Ball: dim must be 1..3");
    }

    bool contains(const Vec3& x) const {
        Vec3 rel{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
        return norm_dim(rel, dim) < radius;
    }
    double measure() const { return unit_ball_volume(dim) * std::pow(radius, dim); }
    double extent() const { return 2.0 * radius; }
};

/// Spherical layer L_{s,t}(y) = B_t(y) \ closure(B_s(y)).
struct SphericalLayer {
    Vec3 center{0.0, 0.0, 0.0};
    double inner = 0.5;
    double outer = 1.0;
    int dim = 3;

    SphericalLayer() = default;
    SphericalLayer(Vec3 c, double s, double t, int d = 3)
        : center(c), inner(s), outer(t), dim(d) {
        if (!(0.0 < s && s < t))
            throw std::invalid_argument("SphericalLayer: need 0 < inner < outer");
        if (d < 1 || d > 3) throw std::invalid_argument("SphericalLayer: dim must be 1..3");
    }

    bool contains(const Vec3& x) const {
        Vec3 rel{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
        const double r = norm_dim(rel, dim);
        return r > inner && r < outer;
    }
    double measure() const {
        return unit_ball_volume(dim) *
               (std::pow(outer, dim) - std::pow(inner, dim));
    }
    double extent() const { return outer - inner; }
};

/// Axis-aligned cube of side 2*half_width.
struct Cube {
    Vec3 center{0.0, 0.0, 0.0};
    double half_width = 0.5;
    int dim = 3;

    Cube() = default;
    Cube(Vec3 c, double hw, int d = 3) : center(c), half_width(hw), dim(d) {
        if (hw <= 0.0) throw std::invalid_argument("Cube: half_width must be positive");
        if (d < 1 || d > 3) throw std::invalid_argument("Cube: dim must be 1..3");
    }

    bool contains(const Vec3& x) const {
        for (int k = 0; k < dim; ++k)
            if (std::abs(x[k] - center[k]) >= half_width) return false;
        return true;
    }
    double measure() const { return std::pow(2.0 * half_width, dim); }
    double extent() const { return 2.0 * half_width; }
};

using Domain = std::variant<Ball, SphericalLayer, Cube>;

inline bool domain_contains(const Domain& dom, const Vec3& x) {
    return std::visit([&](const auto& d) { return d.contains(x); }, dom);
}
inline double domain_measure(const Domain& dom) {
    return std::visit([](const auto& d) { return d.measure(); }, dom);
}
inline double domain_extent(const Domain& dom) {
    return std::visit([](const auto& d) { return d.extent(); }, dom);
}
inline int domain_dim(const Domain& dom) {
    return std::visit([](const auto& d) { return d.dim; }, dom);
}
inline Vec3 domain_center(const Domain& dom) {
    return std::visit([](const auto& d) { return d.center; }, dom);
}
inline double domain_bounding_radius(const Domain& dom) {
    if (const auto* b = std::get_if<Ball>(&dom)) return b->radius;
    if (const auto* l = std::get_if<SphericalLayer>(&dom)) return l->outer;
    return std::get<Cube>(dom).half_width;
}

/// Cubic lattice {l*spacing : |l|_inf <= index_bound} with congruent balls of
/// radius r0 at the lattice points. Whether the balls actually cover R^d is a
/// property (is_rho_covering), not a construction invariant, so that
/// non-covering parameter sets remain representable.
struct LatticeCovering {
    int dim = 3;
    double spacing = 1.0;
    double r0 = 1.0;
    int index_bound = 1;

    LatticeCovering() = default;
    LatticeCovering(int d, double sp, double radius, int bound)
        : dim(d), spacing(sp), r0(radius), index_bound(bound) {
        if (d < 1 || d > 3) throw std::invalid_argument("LatticeCovering: dim must be 1..3");
        if (sp <= 0.0) throw std::invalid_argument("LatticeCovering: spacing must be positive");
        if (radius <= 0.0) throw std::invalid_argument("LatticeCovering: r0 must be positive");
        if (bound < 0) throw std::invalid_argument("LatticeCovering: index_bound must be >= 0");
    }
};

/// All lattice points with |l|_inf <= index_bound, sorted by |center|
/// ascending with lexicographic tie-break. The order is what makes scans
/// reproducible run to run.
inline std::vector<Vec3> covering_centers(const LatticeCovering& cov) {
    std::vector<Vec3> pts;
    const int b = cov.index_bound;
    const int lo1 = cov.dim >= 2 ? -b : 0, hi1 = cov.dim >= 2 ? b : 0;
    const int lo2 = cov.dim >= 3 ? -b : 0, hi2 = cov.dim >= 3 ? b : 0;
    for (int i = -b; i <= b; ++i)
        for (int j = lo1; j <= hi1; ++j)
            for (int k = lo2; k <= hi2; ++k)
                pts.push_back(Vec3{i * cov.spacing, j * cov.spacing, k * cov.spacing});
    std::sort(pts.begin(), pts.end(), [&](const Vec3& a, const Vec3& c) {
        const double na = norm_dim(a, cov.dim), nc = norm_dim(c, cov.dim);
        if (na != nc) return na < nc;
        return a < c;
    });
    return pts;
}

/// Covering check: every point of R^d lies within spacing*sqrt(d)/2 of a
/// lattice point (worst case is a cell corner), so B_rho(y) fits inside the
/// nearest ball iff rho = r0 - spacing*sqrt(d)/2 > 0. The finite index_bound
/// is ignored; the covering property is asymptotic.
inline std::pair<bool, double> is_rho_covering(const LatticeCovering& cov) {
    const double worst = cov.spacing * std::sqrt(double(cov.dim)) / 2.0;
    const double rho = cov.r0 - worst;
    return {rho > 0.0, rho};
}

/// Midpoint-rule quadrature grid: a regular cube lattice of cell centers
/// masked to the domain (a node belongs iff its cell center does). Uniform
/// weights h^d. Carries the lattice layout so PDE solvers can reuse it.
struct QuadratureGrid {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    double h = 0.0;
    int dim = 3;
    Domain domain;
    double declared_tol = 0.03;

    // lattice layout: node index at cell (i,j,k) or -1 outside the domain
    Vec3 origin{0.0, 0.0, 0.0};
    std::array<int, 3> shape{0, 0, 0};
    std::vector<std::int32_t> cell_index;

    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
    std::int32_t at(int i, int j, int k) const {
        return cell_index[(std::size_t(i) * shape[1] + j) * shape[2] + k];
    }
    std::size_t size() const { return nodes.size(); }
};

/// Build a midpoint grid over the domain. Throws on degenerate h (>= extent)
/// and when the declared measure tolerance is violated.
inline QuadratureGrid make_grid(const Domain& dom, double h, double measure_tol = 0.03) {
    if (h <= 0.0) throw std::invalid_argument("make_grid: h must be positive");
    if (h >= domain_extent(dom))
        throw std::invalid_argument("make_grid: h >= domain extent (degenerate)");

    QuadratureGrid g;
    g.h = h;
    g.dim = domain_dim(dom);
    g.domain = dom;
    g.declared_tol = measure_tol;

    const Vec3 c = domain_center(dom);
    const double R = domain_bounding_radius(dom);
    const int n = int(std::ceil(2.0 * R / h));
    for (int k = 0; k < 3; ++k) {
        g.shape[k] = k < g.dim ? n : 1;
        g.origin[k] = k < g.dim ? c[k] - 0.5 * n * h : c[k];
    }
    g.cell_index.assign(std::size_t(g.shape[0]) * g.shape[1] * g.shape[2], -1);

    const double w = std::pow(h, g.dim);
    std::size_t flat = 0;
    for (int i = 0; i < g.shape[0]; ++i)
        for (int j = 0; j < g.shape[1]; ++j)
            for (int k = 0; k < g.shape[2]; ++k, ++flat) {
                Vec3 x{g.origin[0] + (i + 0.5) * h,
                       g.dim >= 2 ? g.origin[1] + (j + 0.5) * h : c[1],
                       g.dim >= 3 ? g.origin[2] + (k + 0.5) * h : c[2]};
                if (!domain_contains(dom, x)) continue;
                g.cell_index[flat] = std::int32_t(g.nodes.size());
                g.nodes.push_back(x);
                g.weights.push_back(w);
            }

    const double exact = domain_measure(dom);
    const double got = g.total_weight();
    if (std::abs(got - exact) > measure_tol * exact) {
        std::ostringstream os;
        os << "make_grid: measure " << got << " deviates from exact " << exact
           << " beyond declared tolerance " << measure_tol;
        throw std::runtime_error(os.str());
    }
    return g;
}

/// Seeded Monte Carlo alternative for d=3 balls (uniform rejection sampling,
/// equal weights vol/n). Deterministic given the seed.
inline QuadratureGrid make_mc_grid(const Ball& ball, std::size_t n_samples,
                                   std::uint64_t seed) {
    if (ball.dim != 3) throw std::invalid_argument("make_mc_grid: d=3 only");
    QuadratureGrid g;
    g.h = ball.radius / std::cbrt(double(n_samples));
    g.dim = 3;
    g.domain = ball;
    g.declared_tol = 1.0; // MC weights are exact by construction
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-ball.radius, ball.radius);
    const double w = ball.measure() / double(n_samples);
    g.nodes.reserve(n_samples);
    while (g.nodes.size() < n_samples) {
        Vec3 x{u(rng), u(rng), u(rng)};
        if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] >= ball.radius * ball.radius)
            continue;
        for (int k = 0; k < 3; ++k) x[k] += ball.center[k];
        g.nodes.push_back(x);
        g.weights.push_back(w);
    }
    return g;
}

struct TriangleNode {
    double s, t, weight;
};

/// Uniform nodes strictly inside the triangle Delta_r = {0 < s < t < r}.
/// Midpoint cells below the diagonal; total weight -> r^2/2 as m grows.
inline std::vector<TriangleNode> triangle_grid(double r, int m) {
    if (r <= 0.0) throw std::invalid_argument("triangle_grid: r must be positive");
    if (m < 2) throw std::invalid_argument("triangle_grid: m must be >= 2");
    const double cell = r / m;
    std::vector<TriangleNode> nodes;
    nodes.reserve(std::size_t(m) * (m - 1) / 2);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            nodes.push_back({(i + 0.5) * cell, (j + 0.5) * cell, cell * cell});
    return nodes;
}

} // namespace specbound
