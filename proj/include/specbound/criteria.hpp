#pragma once

// One checker per criterion. Each produces a per-center value series over a
// covering with explicit trend semantics: verdicts are trend evidence at the
// scanned range, never proofs -- the underlying conditions are limits over
// |y| -> infinity, unreachable at desk scale.

#include "specbound/spectral.hpp"
#include "specbound/transport.hpp"

namespace specbound {

// ---------------------------------------------------------------------------

/// Constants of the Sobolev-type estimate: C(d) = sqrt(1/(pi d(d-2)))
/// (Gamma(d)/Gamma(d/2))^{1/d}, K(d) = 1/C(d)^2, and the isocapacity constant
/// c_d = (d(d-2) mes_d(B_1)^{2/d})^{-d/(d-2)}.
struct SobolevConstants {
    int d = 3;
    double C = 0.0;
    double K = 0.0;     // 1/C^2 by definition
    double c_iso = 0.0;
};

inline SobolevConstants sobolev_constants(int d) {
    if (d < 3) throw std::invalid_argument("sobolev_constants: d >= 3 required");
    SobolevConstants sc;
    sc.d = d;
    const double lg = (std::lgamma(double(d)) - std::lgamma(d / 2.0)) / d;
    sc.C = std::sqrt(1.0 / (std::numbers::pi * d * (d - 2.0))) * std::exp(lg);
    sc.K = 1.0 / (sc.C * sc.C);
    sc.c_iso = std::pow(d * (d - 2.0) * std::pow(unit_ball_volume(d), 2.0 / d),
                        -double(d) / (d - 2.0));
    return sc;
}

/// Default weight gamma(r) = r^{d/(d-2)} clipped to (0, 0.99]. It satisfies
/// gamma in (0,1) with limsup_{r->0} r^{-2d/(d-2)} gamma(r) = infinity.
inline double default_gamma(double r, int d) {
    const double g = std::pow(r, double(d) / (d - 2.0));
    return std::clamp(g, 1e-12, 0.99);
}

using GammaFn = std::function<double(double)>;

// ---------------------------------------------------------------------------

struct RSeries {
    double r = 0.0; // scan radius (or N for the uniform-tail matrix)
    std::vector<double> values;
    std::vector<std::string> center_errors; // non-empty where a center failed
    Trend trend = Trend::inconclusive;
};

struct CriterionVerdict {
    std::string name;
    std::vector<Vec3> centers;
    std::vector<RSeries> series; // one per scanned r (or N)
    std::optional<double> threshold;
    Trend trend = Trend::inconclusive; // combined over the series
    std::vector<std::string> caveats;
};

inline Trend combine_trends(const std::vector<RSeries>& series) {
    if (series.empty()) return Trend::inconclusive;
    Trend t = series.front().trend;
    for (const auto& s : series)
        if (s.trend != t) return Trend::inconclusive;
    return t;
}

inline const std::string kTrendCaveat =
    "trend evidence at scanned range; limits at |y|->infinity are not "
    "established by a finite scan";

namespace detail {

inline std::vector<double> finite_values(const RSeries& s) {
    std::vector<double> out;
    for (std::size_t i = 0; i < s.values.size(); ++i)
        if (s.center_errors.empty() || s.center_errors[i].empty())
            if (std::isfinite(s.values[i])) out.push_back(s.values[i]);
    return out;
}

inline double tail_max(std::span<const double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t q = std::max<std::size_t>(1, v.size() / 4);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = v.size() - q; i < v.size(); ++i) m = std::max(m, v[i]);
    return m;
}

} // namespace detail

// ---------------------------------------------------------------------------

/// Negative-part criterion: per-center (int_{B_r0(y)} V_-^{d/2})^{2/d},
/// compared against K(d). Tail values above K(d) violate the hypothesis.
inline CriterionVerdict check_negative_part(const PotentialField& V,
                                            std::span<const Vec3> centers, double r0,
                                            double h) {
    const auto sc = sobolev_constants(V.dim);
    CriterionVerdict out;
    out.name = "negative_part";
    out.centers.assign(centers.begin(), centers.end());
    out.threshold = sc.K;
    out.caveats = {kTrendCaveat};
    RSeries s;
    s.r = r0;
    s.values.assign(centers.size(), 0.0);
    parallel_for(centers.size(), [&](std::size_t i) {
        const auto grid = make_grid(Ball(centers[i], r0, V.dim), h);
        double acc = 0.0;
        for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
            const double v = V.eval(grid.nodes[k]);
            if (v < 0.0) acc += grid.weights[k] * std::pow(-v, V.dim / 2.0);
        }
        s.values[i] = std::pow(acc, 2.0 / V.dim);
    });
    s.trend = classify_trend(s.values);
    if (detail::tail_max(s.values) > sc.K) s.trend = Trend::violating;
    out.series.push_back(std::move(s));
    out.trend = out.series.front().trend;
    return out;
}

/// Uniform-tail criterion: I_y(N) = int (V + N)_-^{d/2}; passes when
/// sup_y I_y(N) falls below K(d)^{d/2} for some N in the list.
inline CriterionVerdict check_uniform_tail(const PotentialField& V,
                                           std::span<const Vec3> centers, double r0,
                                           std::span<const double> N_list, double h) {
    for (std::size_t i = 1; i < N_list.size(); ++i)
        if (N_list[i] <= N_list[i - 1])
            throw std::invalid_argument("check_uniform_tail: N_list must increase");
    const auto sc = sobolev_constants(V.dim);
    const double pass_level = std::pow(sc.K, V.dim / 2.0);
    CriterionVerdict out;
    out.name = "uniform_tail";
    out.centers.assign(centers.begin(), centers.end());
    out.threshold = pass_level;
    out.caveats = {kTrendCaveat};

    std::vector<std::vector<double>> I(N_list.size(),
                                       std::vector<double>(centers.size(), 0.0));
    parallel_for(centers.size(), [&](std::size_t i) {
        const auto grid = make_grid(Ball(centers[i], r0, V.dim), h);
        const auto vals = sample(V, grid);
        for (std::size_t nI = 0; nI < N_list.size(); ++nI) {
            double acc = 0.0;
            for (std::size_t k = 0; k < vals.size(); ++k) {
                const double v = vals[k] + N_list[nI];
                if (v < 0.0) acc += grid.weights[k] * std::pow(-v, V.dim / 2.0);
            }
            I[nI][i] = acc;
        }
    });
    bool passes = false;
    for (std::size_t nI = 0; nI < N_list.size(); ++nI) {
        RSeries s;
        s.r = N_list[nI];
        s.values = I[nI];
        const double sup = *std::max_element(s.values.begin(), s.values.end());
        s.trend = sup <= pass_level ? Trend::bounded : Trend::inconclusive;
        if (sup <= pass_level) passes = true;
        out.series.push_back(std::move(s));
    }
    out.trend = passes ? Trend::bounded : Trend::inconclusive;
    if (!passes)
        out.caveats.push_back("no N in the list brings sup_y I_y(N) below K^{d/2}");
    return out;
}

/// Rearrangement criterion: per-center V+*(delta(r), y, r) with
/// delta(r) = gamma(r) mes_d(B_r).
inline CriterionVerdict check_rearrangement(const PotentialField& Vplus,
                                            std::span<const Vec3> centers,
                                            std::span<const double> r_list, double h,
                                            const GammaFn& gamma = {}) {
    CriterionVerdict out;
    out.name = "rearrangement";
    out.centers.assign(centers.begin(), centers.end());
    out.caveats = {kTrendCaveat};
    for (double r : r_list) {
        const double g = gamma ? gamma(r) : default_gamma(r, Vplus.dim);
        RSeries s;
        s.r = r;
        s.values.assign(centers.size(), 0.0);
        parallel_for(centers.size(), [&](std::size_t i) {
            const auto grid = make_grid(Ball(centers[i], r, Vplus.dim), h);
            const auto vals = sample(Vplus, grid);
            const double delta = g * grid.total_weight();
            s.values[i] = rearrangement(vals, grid.weights, delta, grid.total_weight());
        });
        s.trend = classify_trend(s.values);
        out.series.push_back(std::move(s));
    }
    out.trend = combine_trends(out.series);
    return out;
}

/// Expectation/deviation criterion: per-center E(V) - sqrt(gamma(r)) Dev(V)
/// under the normalized measure on B_r(y).
inline CriterionVerdict check_expectation_deviation(const PotentialField& Vplus,
                                                    std::span<const Vec3> centers,
                                                    std::span<const double> r_list,
                                                    double h, const GammaFn& gamma = {}) {
    CriterionVerdict out;
    out.name = "expectation_deviation";
    out.centers.assign(centers.begin(), centers.end());
    out.caveats = {kTrendCaveat};
    for (double r : r_list) {
        const double g = gamma ? gamma(r) : default_gamma(r, Vplus.dim);
        RSeries s;
        s.r = r;
        s.values.assign(centers.size(), 0.0);
        parallel_for(centers.size(), [&](std::size_t i) {
            const auto grid = make_grid(Ball(centers[i], r, Vplus.dim), h);
            const auto ms = moments(Vplus, grid);
            s.values[i] = ms.expectation - std::sqrt(g) * ms.deviation;
        });
        s.trend = classify_trend(s.values);
        out.series.push_back(std::move(s));
    }
    out.trend = combine_trends(out.series);
    return out;
}

/// Trimmed-integral criterion: per-center trimmed integral with the top
/// gamma(r)-fraction of mass removed.
inline CriterionVerdict check_trimmed_integral(const PotentialField& Vplus,
                                               std::span<const Vec3> centers,
                                               std::span<const double> r_list, double h,
                                               const GammaFn& gamma = {}) {
    CriterionVerdict out;
    out.name = "trimmed_integral";
    out.centers.assign(centers.begin(), centers.end());
    out.caveats = {kTrendCaveat};
    for (double r : r_list) {
        const double g = gamma ? gamma(r) : default_gamma(r, Vplus.dim);
        RSeries s;
        s.r = r;
        s.values.assign(centers.size(), 0.0);
        parallel_for(centers.size(), [&](std::size_t i) {
            const auto grid = make_grid(Ball(centers[i], r, Vplus.dim), h);
            const auto vals = sample(Vplus, grid);
            s.values[i] = trimmed_integral(vals, grid.weights, g * grid.total_weight());
        });
        s.trend = classify_trend(s.values);
        out.series.push_back(std::move(s));
    }
    out.trend = combine_trends(out.series);
    return out;
}

// ---------------------------------------------------------------------------

struct TransportReport {
    CriterionVerdict bound;       // ||F||_d series vs 1/(2 C(d))
    CriterionVerdict expectation; // E_{y,r0}(V) series
    std::string combined;         // classification of the pair
};

/// Transport criterion: per-center upper estimate of D_d(W^(y), y, r0) for
/// W^(y) = V - E_{y,r0}(V), compared to 1/(2C(d)); plus the E series.
/// Combined verdict: discreteness evidence when the bound holds and E
/// diverges, semi-boundedness evidence when the bound holds and E stays
/// bounded below. The bound is an upper estimate of the infimum (no-flux
/// minimizer class), so a passing check is valid evidence while a failing
/// one is inconclusive.
inline TransportReport check_transport(const PotentialField& V,
                                       std::span<const Vec3> centers, double r0,
                                       double h) {
    const auto sc = sobolev_constants(V.dim);
    TransportReport rep;
    rep.bound.name = "transport_bound";
    rep.bound.centers.assign(centers.begin(), centers.end());
    rep.bound.threshold = 1.0 / (2.0 * sc.C);
    rep.bound.caveats = {
        kTrendCaveat,
        "||F||_d of the no-flux minimizer upper-bounds D_d; the infimum in "
        "D_d ranges over all divergence-compatible fields, so a failing "
        "bound is inconclusive"};
    rep.expectation.name = "transport_expectation";
    rep.expectation.centers.assign(centers.begin(), centers.end());
    rep.expectation.caveats = {kTrendCaveat};

    RSeries sb, se;
    sb.r = r0;
    se.r = r0;
    sb.values.assign(centers.size(), std::numeric_limits<double>::quiet_NaN());
    sb.center_errors.assign(centers.size(), "");
    se.values.assign(centers.size(), std::numeric_limits<double>::quiet_NaN());
    se.center_errors.assign(centers.size(), "");
    parallel_for(centers.size(), [&](std::size_t i) {
        try {
            const auto grid = make_grid(Ball(centers[i], r0, V.dim), h);
            auto vals = sample(V, grid);
            const auto ms = moments(vals, grid.weights);
            se.values[i] = ms.expectation;
            for (auto& v : vals) v -= ms.expectation;
            sb.values[i] = d_bound(vals, grid, V.dim);
        } catch (const std::exception& e) {
            sb.center_errors[i] = e.what();
            se.center_errors[i] = e.what();
        }
    });
    const auto bvals = detail::finite_values(sb);
    const auto evals = detail::finite_values(se);
    const double bmax = bvals.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : *std::max_element(bvals.begin(), bvals.end());
    const bool bound_ok = bmax < *rep.bound.threshold;
    sb.trend = bound_ok ? Trend::bounded : Trend::violating;
    se.trend = classify_trend(evals);
    rep.bound.series.push_back(sb);
    rep.bound.trend = sb.trend;
    rep.expectation.series.push_back(se);
    rep.expectation.trend = se.trend;

    if (!bound_ok)
        rep.combined = "inconclusive: transport bound exceeds 1/(2C(d))";
    else if (se.trend == Trend::diverging)
        rep.combined = "discreteness evidence: bound holds and E_{y,r0}(V) diverges";
    else if (se.trend == Trend::bounded)
        rep.combined = "semi-boundedness evidence: bound holds and E_{y,r0}(V) "
                       "stays bounded below";
    else
        rep.combined = "inconclusive: E_{y,r0}(V) trend is not classifiable";
    return rep;
}

// ---------------------------------------------------------------------------

/// Necessary measure-convergence conditions. For W_y(t) = int_{B_t(y)} V and
/// V_y(s,t) = W_y(t) - W_y(s):
///   claim (i):  mes_1{t in (0,r) : W_y(t) <= A}  -> 0,
///   claim (ii): mes_2{(s,t) in Delta_r : V_y(s,t) <= A} -> 0
/// are both necessary for a discrete, bounded-below spectrum. A declining
/// series is necessary evidence; a non-declining one certifies that the pair
/// (discrete, bounded below) fails. The two claims are reported independently
/// and never inferred from one another.
struct NecessaryMeasures {
    std::vector<Vec3> centers;
    std::vector<double> A_list;
    double r = 0.0;
    int m = 0;
    // mes1[a][center], mes2[a][center]
    std::vector<std::vector<double>> mes1;
    std::vector<std::vector<double>> mes2;
    std::vector<Trend> trend1;
    std::vector<Trend> trend2;
};

inline NecessaryMeasures necessary_measure_conditions(const PotentialField& V,
                                                      std::span<const Vec3> centers,
                                                      double r,
                                                      std::span<const double> A_list,
                                                      int m, double h) {
    if (m < 2) throw std::invalid_argument("necessary_measure_conditions: m >= 2");
    NecessaryMeasures out;
    out.centers.assign(centers.begin(), centers.end());
    out.A_list.assign(A_list.begin(), A_list.end());
    out.r = r;
    out.m = m;
    out.mes1.assign(A_list.size(), std::vector<double>(centers.size(), 0.0));
    out.mes2.assign(A_list.size(), std::vector<double>(centers.size(), 0.0));

    const auto tri = triangle_grid(r, m);
    parallel_for(centers.size(), [&](std::size_t ci) {
        const auto grid = make_grid(Ball(centers[ci], r, V.dim), h);
        // cumulative radial mass: W_y(t) = sum of w V over nodes within t
        std::vector<std::pair<double, double>> contrib(grid.nodes.size());
        for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
            Vec3 rel{grid.nodes[k][0] - centers[ci][0],
                     grid.nodes[k][1] - centers[ci][1],
                     grid.nodes[k][2] - centers[ci][2]};
            contrib[k] = {norm_dim(rel, V.dim),
                          grid.weights[k] * V.eval(grid.nodes[k])};
        }
        std::sort(contrib.begin(), contrib.end());
        std::vector<double> radii(contrib.size()), cum(contrib.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < contrib.size(); ++k) {
            radii[k] = contrib[k].first;
            acc += contrib[k].second;
            cum[k] = acc;
        }
        auto W_at = [&](double t) {
            const auto it = std::upper_bound(radii.begin(), radii.end(), t);
            if (it == radii.begin()) return 0.0;
            return cum[std::size_t(it - radii.begin()) - 1];
        };
        std::vector<double> Wg(m);
        for (int j = 0; j < m; ++j) Wg[j] = W_at((j + 0.5) * r / m);
        for (std::size_t ai = 0; ai < A_list.size(); ++ai) {
            const double A = A_list[ai];
            int cnt = 0;
            for (int j = 0; j < m; ++j)
                if (Wg[j] <= A) ++cnt;
            out.mes1[ai][ci] = cnt * r / m;
            double m2 = 0.0;
            for (const auto& node : tri) {
                const int i = int(node.s / (r / m));
                const int j = int(node.t / (r / m));
                if (Wg[j] - Wg[i] <= A) m2 += node.weight;
            }
            out.mes2[ai][ci] = m2;
        }
    });
    out.trend1.resize(A_list.size());
    out.trend2.resize(A_list.size());
    for (std::size_t ai = 0; ai < A_list.size(); ++ai) {
        out.trend1[ai] = classify_trend(out.mes1[ai]);
        out.trend2[ai] = classify_trend(out.mes2[ai]);
    }
    return out;
}

/// Molchanov-type necessary condition: per-center int_{B_r(y)} V, intended
/// for V >= 0 (a caveat is recorded when sampled values go negative).
inline CriterionVerdict necessary_molchanov(const PotentialField& V,
                                            std::span<const Vec3> centers,
                                            std::span<const double> r_list, double h) {
    CriterionVerdict out;
    out.name = "molchanov";
    out.centers.assign(centers.begin(), centers.end());
    out.caveats = {kTrendCaveat,
                   "necessary, not sufficient: divergence does not imply a "
                   "discrete spectrum"};
    std::atomic<bool> saw_negative{false};
    for (double r : r_list) {
        RSeries s;
        s.r = r;
        s.values.assign(centers.size(), 0.0);
        parallel_for(centers.size(), [&](std::size_t i) {
            const auto grid = make_grid(Ball(centers[i], r, V.dim), h);
            const auto vals = sample(V, grid);
            for (double v : vals)
                if (v < 0.0) saw_negative.store(true, std::memory_order_relaxed);
            s.values[i] = integral(vals, grid.weights);
        });
        s.trend = classify_trend(s.values);
        out.series.push_back(std::move(s));
    }
    out.trend = combine_trends(out.series);
    if (saw_negative.load())
        out.caveats.push_back(
            "potential takes negative values; the Molchanov condition is "
            "stated for V >= 0");
    return out;
}

} // namespace specbound
