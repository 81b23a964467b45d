#pragma once

// Level-set measures, non-increasing rearrangement, trimmed integrals and
// moments over domains. All estimates are grid-based (deterministic); the
// seeded Monte Carlo grids plug in through the same interface.

#include "specbound/potential.hpp"

namespace specbound {

/// lambda*(s) = mes{e in dom : V(e) >= s}, estimated as the weight of grid
/// nodes with V >= s.
inline double level_measure(const PotentialField& V, const QuadratureGrid& grid,
                            double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i)
        if (V.eval(grid.nodes[i]) >= s) acc += grid.weights[i];
    return acc;
}

inline double level_measure(std::span<const double> values,
                            std::span<const double> weights, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] >= s) acc += weights[i];
    return acc;
}

/// Non-increasing rearrangement W*(t) = sup{s > 0 : lambda*(s) >= t},
/// computed by bisection on s over [min V, max V] with relative tolerance
/// 1e-6. The sup over an empty set returns 0.
inline double rearrangement(std::span<const double> values,
                            std::span<const double> weights, double t,
                            double total_measure) {
    if (!(t > 0.0) || t > total_measure * (1.0 + 1e-12))
        throw std::invalid_argument("rearrangement: need 0 < t <= mes(dom)");
    double vmax = -std::numeric_limits<double>::infinity();
    for (double v : values) vmax = std::max(vmax, v);
    if (!(vmax > 0.0)) return 0.0; // no positive level has mass
    auto lam = [&](double s) { return level_measure(values, weights, s); };
    if (lam(vmax) >= t) return vmax;
    // smallest positive level: does any positive mass reach t at all?
    double lo = 0.0;
    if (lam(std::numeric_limits<double>::min()) < t) return 0.0;
    double hi = vmax;
    // invariant: lam(lo) >= t > lam(hi) with lo interpreted as 0+
    while (hi - lo > 1e-6 * std::max({std::abs(lo), std::abs(hi), 1e-300})) {
        const double mid = 0.5 * (lo + hi);
        if (lam(mid) >= t) lo = mid; else hi = mid;
    }
    return lo;
}

inline double rearrangement(const PotentialField& V, const QuadratureGrid& grid,
                            double t) {
    const auto values = sample(V, grid);
    return rearrangement(values, grid.weights, t, grid.total_weight());
}

/// Trimmed integral: int V minus the mass of V on its own highest-value set
/// of measure delta. V must be nonnegative on the grid (apply to V+).
inline double trimmed_integral(std::span<const double> values,
                               std::span<const double> weights, double delta) {
    if (delta < 0.0)
        throw std::invalid_argument("trimmed_integral: delta must be nonnegative");
    double total_w = 0.0, total_i = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < -1e-12)
            throw std::invalid_argument(
                "trimmed_integral: negative values (criterion applies to V+)");
        total_w += weights[i];
        total_i += weights[i] * values[i];
    }
    if (delta >= total_w) return 0.0;
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });
    double removed = 0.0, used = 0.0;
    for (std::size_t idx : order) {
        if (used >= delta) break;
        const double take = std::min(weights[idx], delta - used);
        removed += take * values[idx];
        used += take;
    }
    return total_i - removed;
}

inline double trimmed_integral(const PotentialField& V, const QuadratureGrid& grid,
                               double delta) {
    const auto values = sample(V, grid);
    return trimmed_integral(values, grid.weights, delta);
}

/// Expectation and standard deviation under the normalized measure
/// m_{d,r}(A) = mes(A)/mes(dom).
struct MomentSummary {
    double expectation = 0.0;
    double deviation = 0.0;
    double second_moment = 0.0;
};

inline MomentSummary moments(std::span<const double> values,
                             std::span<const double> weights) {
    long double w = 0.0L, s1 = 0.0L, s2 = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        w += weights[i];
        s1 += (long double)weights[i] * values[i];
        s2 += (long double)weights[i] * values[i] * values[i];
    }
    MomentSummary ms;
    ms.expectation = double(s1 / w);
    ms.second_moment = double(s2 / w);
    // centered second pass avoids the cancellation of E(V^2) - E(V)^2
    long double c2 = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const long double d = values[i] - ms.expectation;
        c2 += (long double)weights[i] * d * d;
    }
    ms.deviation = std::sqrt(std::max(0.0, double(c2 / w)));
    return ms;
}

inline MomentSummary moments(const PotentialField& V, const QuadratureGrid& grid) {
    const auto values = sample(V, grid);
    return moments(values, grid.weights);
}

/// L_p norm (sum w |V|^p)^{1/p}, p >= 1.
inline double lp_norm(std::span<const double> values,
                      std::span<const double> weights, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p >= 1 required");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        s += weights[i] * std::pow(std::abs(values[i]), p);
    return std::pow(s, 1.0 / p);
}

inline double lp_norm(const PotentialField& V, const QuadratureGrid& grid, double p) {
    const auto values = sample(V, grid);
    return lp_norm(values, grid.weights, p);
}

/// Plain integral sum w * V over the grid.
inline double integral(std::span<const double> values,
                       std::span<const double> weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
    return s;
}

inline double integral(const PotentialField& V, const QuadratureGrid& grid) {
    const auto values = sample(V, grid);
    return integral(values, grid.weights);
}

} // namespace specbound
