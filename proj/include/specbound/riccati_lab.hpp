#pragma once

// Numerical laboratory for the integral-inequality sets behind the necessary
// measure conditions: triangle sets E(lambda), one-variable sets X(lambda),
// and the tangent blow-up comparator that forces their measures down.

#include "specbound/geometry.hpp"

namespace specbound {

using Handle1D = std::function<double(double)>;

struct TriangleSublevel {
    double r = 0.0;
    int m = 0;
    std::vector<char> indicator; // one flag per triangle node
    double measure = 0.0;        // in [0, r^2/2]
};

namespace detail {

/// Cumulative table Q(t) = int_0^t u^2 on a uniform grid of resolution >= 4m,
/// trapezoid rule, linear interpolation between table points.
struct CumulativeSquare {
    double r = 0.0;
    std::vector<double> table;

    CumulativeSquare(const Handle1D& u, double r_, int m) : r(r_) {
        const int n = 4 * std::max(m, 2);
        table.resize(n + 1);
        table[0] = 0.0;
        double prev = 0.0, uprev = u(0.0);
        for (int i = 1; i <= n; ++i) {
            const double t = r * i / n;
            const double ut = u(t);
            prev += 0.5 * (r / n) * (uprev * uprev + ut * ut);
            table[i] = prev;
            uprev = ut;
        }
    }
    double operator()(double t) const {
        const int n = int(table.size()) - 1;
        const double x = std::clamp(t / r, 0.0, 1.0) * n;
        const int i = std::min(int(x), n - 1);
        const double f = x - i;
        return table[i] * (1.0 - f) + table[i + 1] * f;
    }
};

} // namespace detail

/// Grid estimate of mes_2 E = mes_2{(s,t) in Delta_r :
/// u(t) - u(s) > int_s^t u^2 + lambda (t - s)}. Strict ">" as in the set
/// definition; boundary nodes have measure zero.
inline TriangleSublevel en_measure(const Handle1D& u, double lambda, double r, int m) {
    const detail::CumulativeSquare Q(u, r, m);
    const auto tri = triangle_grid(r, m);
    TriangleSublevel out;
    out.r = r;
    out.m = m;
    out.indicator.resize(tri.size());
    // cache u at the m midpoint abscissae (s and t share them)
    std::vector<double> uval(m), qval(m);
    for (int i = 0; i < m; ++i) {
        const double x = (i + 0.5) * r / m;
        uval[i] = u(x);
        qval[i] = Q(x);
    }
    for (std::size_t k = 0; k < tri.size(); ++k) {
        const int i = int(tri[k].s / (r / m));
        const int j = int(tri[k].t / (r / m));
        const bool in_set =
            uval[j] - uval[i] > qval[j] - qval[i] + lambda * (tri[k].t - tri[k].s);
        out.indicator[k] = in_set;
        if (in_set) out.measure += tri[k].weight;
    }
    return out;
}

/// Grid estimate of mes_1 X = mes_1{t in [t0, r] :
/// u(t) >= int_{t0}^t u^2 + lambda (t - t0)}.
inline double xn_measure(const Handle1D& u, double lambda, double t0, double r, int m) {
    if (!(r > t0)) throw std::invalid_argument("xn_measure: need r > t0");
    auto shifted = [&](double z) { return u(t0 + z); };
    const detail::CumulativeSquare Q(shifted, r - t0, m);
    double measure = 0.0;
    const double cell = (r - t0) / m;
    for (int i = 0; i < m; ++i) {
        const double z = (i + 0.5) * cell;
        if (u(t0 + z) >= Q(z) + lambda * z) measure += cell;
    }
    return measure;
}

struct BlowupComparator {
    Handle1D w;       // w(z) = sqrt(lambda) tan(sqrt(lambda) z)
    double z_blowup;  // pi / (2 sqrt(lambda))
};

/// The solution of w = int_0^z w^2 + lambda z, finite up to z = pi/(2 sqrt(lambda)).
inline BlowupComparator blowup_comparator(double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("blowup_comparator: lambda > 0 required");
    const double s = std::sqrt(lambda);
    return {[s](double z) { return s * std::tan(s * z); },
            std::numbers::pi / (2.0 * s)};
}

/// Forward-integrated witness of the comparison step: solutions of
/// u' = u^2 + lambda + g with g >= 0 and u(0) >= 0 satisfy the integral
/// inequality u >= int u^2 + lambda z by construction and must majorize the
/// comparator until it blows up.
inline std::vector<std::pair<double, double>>
integral_inequality_witness(double lambda, const Handle1D& g, double u0, double z_max,
                            int steps) {
    std::vector<std::pair<double, double>> out;
    std::array<double, 1> y{u0};
    auto rhs = [&](double z, const std::array<double, 1>& s) {
        return std::array<double, 1>{s[0] * s[0] + lambda + g(z)};
    };
    const double h = z_max / steps;
    double z = 0.0;
    out.push_back({z, y[0]});
    for (int i = 0; i < steps; ++i) {
        y = rk4_step(rhs, z, y, h);
        z += h;
        if (!std::isfinite(y[0]) || y[0] > 1e12) break;
        out.push_back({z, y[0]});
    }
    return out;
}

} // namespace specbound
