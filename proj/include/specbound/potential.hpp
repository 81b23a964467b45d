#pragma once

// Potential fields and the generators for the worked example constructions:
// the tiled radial well train (example 1), the 1D piecewise-constant
// potential with separated variables (example 2), the sqrt-growth potential
// with oscillatory mean-zero bumps (example 3), and the tent-train candidate
// from the remark after example 1.

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "specbound/geometry.hpp"

namespace specbound {

using Handle1D = std::function<double(double)>;

/// Evaluation handle for V: R^d -> R with metadata. Handles are pure and
/// shareable; evaluation is reentrant.
struct PotentialField {
    int dim = 3;
    bool radial = false;
    std::string description;
    std::function<double(const Vec3&)> eval;

    double operator()(const Vec3& x) const { return eval(x); }
};

/// Evaluate V on every grid node.
inline std::vector<double> sample(const PotentialField& V, const QuadratureGrid& g) {
    std::vector<double> out(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) out[i] = V.eval(g.nodes[i]);
    return out;
}

/// V = V+ - V- with V+ = max(V,0), V- = max(-V,0).
inline std::pair<PotentialField, PotentialField>
positive_negative_parts(const PotentialField& V) {
    PotentialField pos = V, neg = V;
    auto base = V.eval;
    pos.description = V.description + " (positive part)";
    pos.eval = [base](const Vec3& x) { return std::max(base(x), 0.0); };
    neg.description = V.description + " (negative part)";
    neg.eval = [base](const Vec3& x) { return std::max(-base(x), 0.0); };
    return {pos, neg};
}

// ---------------------------------------------------------------------------
// Example 1: on each unit cube around a lattice point, a radial potential
// whose cumulative integral is the piecewise-linear S_n with S_n(r0) = 0.

/// Closed-form cumulative S_n(x) = omega_d int_0^x Vtilde_n rho^{d-1} drho:
/// piecewise linear, dropping to -n at the knee r0/n and returning to 0 at
/// r0 (so the ball integral of the potential vanishes). The rebound slope is
/// n^2/(r0 (n-1)), the unique constant joining S_n(r0/n) = -n to S_n(r0) = 0.
/// n = 1 has knee = r0: the drop fills the whole ball and there is no
/// rebound branch.
inline double example1_cumulative(int n, double r0, double x) {
    const double knee = r0 / n;
    if (n == 1 || x <= knee) return -(double(n) * n / r0) * std::min(x, r0);
    const double slope = double(n) * n / (r0 * (n - 1.0));
    return -double(n) + (x - knee) * slope;
}

/// Radial profile Vtilde_n(rho) = S_n'(rho) / (omega_d rho^{d-1}).
inline double example1_radial_value(int n, double r0, double rho, int dim = 3) {
    double sprime;
    if (rho < r0 / n)
        sprime = -(double(n) * n / r0);
    else
        sprime = n == 1 ? 0.0 : double(n) * n / (r0 * (n - 1.0));
    const double r = std::max(rho, 1e-300); // integrable singularity at 0
    return sprime / (unit_sphere_area(dim) * std::pow(r, dim - 1));
}

/// Tiled potential: V(x) = Vtilde_n(|x-l|) inside B_r0(l), Vtilde_n(r0)
/// outside, on each cube Q_{1/2}(l), with n = max(|l|_inf, 1). The paper's
/// n = |l|_inf degenerates at l = 0; the max leaves the asymptotics alone.
inline PotentialField example1_potential(double r0, int dim = 3) {
    if (!(r0 < 0.5) || r0 <= 0.0)
        throw std::invalid_argument("example1_potential: need 0 < r0 < 1/2");
    if (dim != 3)
        throw std::invalid_argument("example1_potential: toolkit grids support d=3");
    PotentialField V;
    V.dim = dim;
    V.radial = false;
    V.description = "example1 tiled radial wells";
    V.eval = [r0, dim](const Vec3& x) {
        Vec3 l{std::floor(x[0] + 0.5), std::floor(x[1] + 0.5), std::floor(x[2] + 0.5)};
        const int n = std::max(1, int(std::max({std::abs(l[0]), std::abs(l[1]),
                                                std::abs(l[2])}) + 0.5));
        Vec3 rel{x[0] - l[0], x[1] - l[1], x[2] - l[2]};
        const double u = norm3(rel);
        return example1_radial_value(n, r0, std::min(u, r0), dim);
    };
    return V;
}

// ---------------------------------------------------------------------------
// Example 2: interval construction on the line.

/// Gap length (1/sqrt(alpha)) [pi/2 - arctan(tanh(sqrt(alpha) a))].
inline double example2_gap(double alpha, double a) {
    const double s = std::sqrt(alpha);
    return (std::numbers::pi / 2.0 - std::atan(std::tanh(s * a))) / s;
}

/// Endpoint layout m_k, l_{2k-1}, l_{2k} for k = 1..K. Plateau length
/// l_{2k-1} - m_k = a; the two gaps after it have lengths gap(alpha_k) and
/// gap(alpha_{k+1}) respectively, which is the choice that makes the printed
/// eigenfunctions phi_k continuously differentiable and L phi_k = 0 exact.
struct Example2Layout {
    double a = 1.0;
    std::vector<double> alpha; // alpha[k] for k = 1..K (index 0 unused)
    std::vector<double> m;     // m[k],    k = 1..K
    std::vector<double> l_odd; // l_{2k-1}, k = 1..K-1
    std::vector<double> l_even;// l_{2k},   k = 1..K-1

    int max_k() const { return int(alpha.size()) - 1; }
    /// Window k is (c_k, c_{k+1}] = (m_k, m_{k+1} + a]; consecutive windows
    /// overlap by pairs. Defined for k = 1..max_k()-1.
    double window_lo(int k) const { return m.at(k); }
    double window_hi(int k) const { return m.at(k + 1) + a; }
};

struct Example2 {
    Handle1D v1d;
    PotentialField vdd;
    Example2Layout layout;
};

/// Build the 1D potential, its separated d-dimensional extension
/// W(x) = V(x_1) + sum_{j>=2} U(x_j), and the endpoint layout.
/// alphas[0] corresponds to k = 1. U defaults to x^2 + 1.
inline Example2 example2_potential(double a, std::vector<double> alphas,
                                   Handle1D U = {}, int dim = 3) {
    if (a <= 0.0) throw std::invalid_argument("example2_potential: a must be positive");
    if (alphas.size() < 2)
        throw std::invalid_argument("example2_potential: need at least two alphas");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i] <= 0.0)
            throw std::invalid_argument("example2_potential: alphas must be positive");
        if (i > 0 && alphas[i] <= alphas[i - 1])
            throw std::invalid_argument("example2_potential: alphas must increase strictly");
    }
    // divergence-rate condition alpha_k / (sqrt(alpha_k) + sqrt(alpha_{k+1}))
    // must grow over the sampled range
    for (std::size_t i = 0; i + 2 < alphas.size(); ++i) {
        auto rate = [&](std::size_t k) {
            return alphas[k] / (std::sqrt(alphas[k]) + std::sqrt(alphas[k + 1]));
        };
        if (rate(i + 1) <= rate(i))
            throw std::invalid_argument(
                "example2_potential: alpha_k/(sqrt(alpha_k)+sqrt(alpha_{k+1})) must increase");
    }
    if (!U) U = [](double x) { return x * x + 1.0; };

    Example2 ex;
    auto& lay = ex.layout;
    lay.a = a;
    const int K = int(alphas.size());
    lay.alpha.assign(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) lay.alpha[k] = alphas[k - 1];
    lay.m.assign(K + 1, 0.0);
    lay.l_odd.assign(K, 0.0);
    lay.l_even.assign(K, 0.0);
    lay.m[1] = 0.0;
    for (int k = 1; k < K; ++k) {
        lay.l_odd[k] = lay.m[k] + a;
        lay.l_even[k] = lay.l_odd[k] + example2_gap(lay.alpha[k], a);
        lay.m[k + 1] = lay.l_even[k] + example2_gap(lay.alpha[k + 1], a);
    }

    auto layout_copy = std::make_shared<Example2Layout>(lay);
    ex.v1d = [layout_copy](double x) {
        const auto& L = *layout_copy;
        const int K2 = L.max_k();
        if (x <= L.m[1]) return L.alpha[1];
        if (x > L.m[K2]) return L.alpha[K2];
        // locate the construction interval containing x
        int lo = 1, hi = K2;
        while (lo + 1 < hi) {
            const int mid = (lo + hi) / 2;
            if (x > L.m[mid]) lo = mid; else hi = mid;
        }
        const int k = lo; // x in (m_k, m_{k+1}]
        if (x <= L.l_odd[k]) return L.alpha[k];
        if (x <= L.l_even[k]) return -L.alpha[k];
        return -L.alpha[k + 1];
    };

    auto v1 = ex.v1d;
    ex.vdd.dim = dim;
    ex.vdd.radial = false;
    ex.vdd.description = "example2 separated-variables potential";
    ex.vdd.eval = [v1, U, dim](const Vec3& x) {
        double s = v1(x[0]);
        for (int j = 1; j < dim; ++j) s += U(x[j]);
        return s;
    };
    return ex;
}

/// The printed four-branch eigenfunction of L phi = 0 on the window
/// (c_k, c_{k+1}], vanishing at both ends and positive inside.
inline Handle1D example2_eigenfunction(const Example2Layout& lay, int k) {
    if (k < 1 || k + 1 > lay.max_k())
        throw std::out_of_range("example2_eigenfunction: k outside generated range");
    const double a = lay.a;
    const double ak = lay.alpha[k], ak1 = lay.alpha[k + 1];
    const double ck = lay.m[k], ck1 = lay.m[k + 1] + a;
    const double lo1 = lay.l_odd[k], le1 = lay.l_even[k], mk1 = lay.m[k + 1];
    const double sk = std::sqrt(ak), sk1 = std::sqrt(ak1);
    const double normk = std::sqrt(std::pow(std::sinh(sk * a), 2) +
                                   std::pow(std::cosh(sk * a), 2));
    const double normk1 = std::sqrt(std::pow(std::sinh(sk1 * a), 2) +
                                    std::pow(std::cosh(sk1 * a), 2));
    const double phik = std::atan(std::tanh(sk * a));
    const double phik1 = std::atan(std::tanh(sk1 * a));
    return [=](double x) -> double {
        if (x <= ck || x > ck1) return 0.0;
        if (x <= lo1) return std::sinh(sk * (x - ck)) / normk;
        if (x <= le1) return std::sin(sk * (x - ck - a) + phik);
        if (x <= mk1) return std::sin(sk1 * (ck1 - a - x) + phik1);
        return std::sinh(sk1 * (ck1 - x)) / normk1;
    };
}

// ---------------------------------------------------------------------------
// Example 3 (d = 3): V = sqrt(|x|) + W with W a train of radial mean-zero
// oscillatory bumps at the lattice points.

/// E_{y,r0}(sqrt(|x|)) over a ball B_r0(y) with |y| = L, via the exact
/// angular integral (1D quadrature in the radial variable).
inline double sqrt_potential_expectation(double L, double r0) {
    const double vol = unit_ball_volume(3) * r0 * r0 * r0;
    if (L <= 1e-14) {
        // centered ball: (4pi/vol) int_0^r0 rho^{5/2} drho
        return 4.0 * std::numbers::pi * std::pow(r0, 3.5) / (3.5 * vol);
    }
    auto integrand = [L](double rho) {
        const double hi = std::pow(L + rho, 2.5);
        const double lo = std::pow(std::abs(L - rho), 2.5);
        return rho * (hi - lo);
    };
    const double I = integrate(integrand, 0.0, r0, 1e-12);
    return 4.0 * std::numbers::pi * I / (5.0 * L * vol);
}

struct Example3Params {
    double r0 = 0.9;
    double rho0 = 0.1;
    int dim = 3;
    /// Amplitude rule A_l; empty means the default A_l = E_{l,r0}(V0) rho0^{d-1}.
    std::function<double(const Vec3&)> amplitude;

    void validate() const {
        if (dim != 3) throw std::invalid_argument("example3: d = 3 required");
        const double lim = 1.0 - std::sqrt(3.0) / 2.0;
        if (!(rho0 > 0.0 && rho0 < lim))
            throw std::invalid_argument("example3: need 0 < rho0 < 1 - sqrt(3)/2");
        if (!(r0 > std::sqrt(3.0) / 2.0))
            throw std::invalid_argument("example3: need r0 > sqrt(3)/2 (covering)");
        if (!(rho0 < r0)) throw std::invalid_argument("example3: need rho0 < r0");
    }
};

/// One radial bump W^(l): zero on [0, 2pi/psi), then A sign(sin(psi rho))/rho^{d-1}
/// over whole oscillation periods, zero beyond. Restricting to whole periods
/// makes int_0^{r0} W rho^{d-1} drho vanish exactly; for integer |l| (all
/// axis centers) this is the printed support [2pi/psi, rho0].
struct Example3Bump {
    double A = 0.0;
    double psi = 0.0;   // 2 pi |l| / rho0
    double lo = 0.0;    // support start 2 pi / psi
    double hi = 0.0;    // support end: largest whole period <= rho0
    int dim = 3;

    bool trivial() const { return A == 0.0 || hi <= lo; }

    double value(double rho) const {
        if (trivial() || rho < lo || rho > hi) return 0.0;
        const double s = std::sin(psi * rho);
        const double sg = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
        return A * sg / std::pow(rho, dim - 1);
    }

    /// Exact cumulative int_0^r W(rho) rho^{d-1} drho (piecewise linear).
    double cumulative(double r) const {
        if (trivial()) return 0.0;
        const double x = std::clamp(r, lo, hi) * psi; // phase
        const double phase = std::fmod(x, 2.0 * std::numbers::pi);
        const double tri = phase <= std::numbers::pi ? phase
                                                     : 2.0 * std::numbers::pi - phase;
        return A * tri / psi;
    }

    /// Sign-flip radii, for quadrature splitting.
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        if (trivial()) return b;
        const double half = std::numbers::pi / psi;
        for (double x = lo; x <= hi + 1e-15; x += half) b.push_back(x);
        return b;
    }
};

inline Example3Bump example3_bump(const Example3Params& p, const Vec3& ell) {
    p.validate();
    Example3Bump b;
    b.dim = p.dim;
    const double L = norm3(ell);
    if (L < 2.0) return b; // fewer than one whole period fits: trivial bump
    b.psi = 2.0 * std::numbers::pi * L / p.rho0;
    b.lo = p.rho0 / L;
    b.hi = b.lo * std::floor(L);
    b.A = p.amplitude ? p.amplitude(ell)
                      : sqrt_potential_expectation(L, p.r0) *
                            std::pow(p.rho0, p.dim - 1);
    return b;
}

/// V = sqrt(|x|) + W, W supported in the union of B_rho0(l) over lattice
/// points l. Bump amplitudes are cached per center.
inline PotentialField example3_potential(const Example3Params& p) {
    p.validate();
    struct Cache {
        std::mutex mu;
        std::map<std::array<int, 3>, Example3Bump> bumps;
    };
    auto cache = std::make_shared<Cache>();
    PotentialField V;
    V.dim = p.dim;
    V.radial = false;
    V.description = "example3 sqrt growth with mean-zero oscillatory bumps";
    V.eval = [p, cache](const Vec3& x) {
        double v = std::sqrt(norm3(x));
        const std::array<int, 3> li{int(std::floor(x[0] + 0.5)),
                                    int(std::floor(x[1] + 0.5)),
                                    int(std::floor(x[2] + 0.5))};
        Vec3 rel{x[0] - li[0], x[1] - li[1], x[2] - li[2]};
        const double u = norm3(rel);
        if (u <= p.rho0) {
            Example3Bump bump;
            {
                std::lock_guard<std::mutex> lock(cache->mu);
                auto it = cache->bumps.find(li);
                if (it == cache->bumps.end()) {
                    Vec3 ell{double(li[0]), double(li[1]), double(li[2])};
                    it = cache->bumps.emplace(li, example3_bump(p, ell)).first;
                }
                bump = it->second;
            }
            v += bump.value(u);
        }
        return v;
    };
    return V;
}

// ---------------------------------------------------------------------------
// Remark candidate: tent-train construction. Provided as a generator; its
// spectral classification on arbitrary ball sequences is left open.

/// The printed tent: 3x on [0,1/3), 1 on [1/3,2/3), 3(1-x) on [2/3,1], else 0.
inline double tent_function(double x) {
    if (x < 0.0 || x >= 1.0) return 0.0;
    if (x < 1.0 / 3.0) return 3.0 * x;
    if (x < 2.0 / 3.0) return 1.0;
    return 3.0 * (1.0 - x);
}

inline double tent_derivative(double x) {
    if (x < 0.0 || x >= 1.0) return 0.0;
    if (x < 1.0 / 3.0) return 3.0;
    if (x < 2.0 / 3.0) return 0.0;
    return -3.0;
}

/// Tent train U(x) = sum_{k>=1} T(x - k + 1/3): consecutive supports
/// [k-1/3, k+2/3] tile the half line, so U is 1-periodic from x = 2/3 on.
inline double tent_train(double x) {
    const int kc = int(std::floor(x + 1.0 / 3.0));
    double s = 0.0;
    for (int k = std::max(1, kc - 1); k <= kc + 1; ++k)
        s += tent_function(x - k + 1.0 / 3.0);
    return s;
}

inline double tent_train_derivative(double x) {
    const int kc = int(std::floor(x + 1.0 / 3.0));
    double s = 0.0;
    for (int k = std::max(1, kc - 1); k <= kc + 1; ++k)
        s += tent_derivative(x - k + 1.0 / 3.0);
    return s;
}

/// Candidate potential with S_n(x) = A_n U(n x / r0), radialized and tiled
/// exactly as example 1.
inline PotentialField remark_candidate_potential(double r0,
                                                 std::function<double(int)> A,
                                                 int dim = 3) {
    if (!(r0 > 0.0 && r0 < 0.5))
        throw std::invalid_argument("remark_candidate_potential: need 0 < r0 < 1/2");
    if (dim != 3)
        throw std::invalid_argument("remark_candidate_potential: toolkit grids support d=3");
    if (!A) throw std::invalid_argument("remark_candidate_potential: amplitude rule required");
    PotentialField V;
    V.dim = dim;
    V.radial = false;
    V.description = "remark candidate tent-train potential";
    V.eval = [r0, A, dim](const Vec3& x) {
        Vec3 l{std::floor(x[0] + 0.5), std::floor(x[1] + 0.5), std::floor(x[2] + 0.5)};
        const int n = std::max(1, int(std::max({std::abs(l[0]), std::abs(l[1]),
                                                std::abs(l[2])}) + 0.5));
        Vec3 rel{x[0] - l[0], x[1] - l[1], x[2] - l[2]};
        const double u = std::min(norm3(rel), r0);
        const double sprime = A(n) * tent_train_derivative(n * u / r0) * n / r0;
        const double rho = std::max(u, 1e-300);
        return sprime / (unit_sphere_area(dim) * std::pow(rho, dim - 1));
    };
    return V;
}

// ---------------------------------------------------------------------------

/// Load a gridded potential from a plain-text table (one node per line:
/// d coordinates then the value). Evaluation is nearest-node.
inline PotentialField load_table_potential(const std::string& path, int dim) {
    if (dim < 1 || dim > 3)
        throw std::invalid_argument("load_table_potential: dim must be 1..3");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_table_potential: cannot open " + path);
    auto nodes = std::make_shared<std::vector<Vec3>>();
    auto values = std::make_shared<std::vector<double>>();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Vec3 x{0.0, 0.0, 0.0};
        double v = 0.0;
        bool any = false;
        int k = 0;
        for (; k < dim; ++k)
            if (ls >> x[k]) any = true; else break;
        if (!any) continue; // blank / comment line
        if (k < dim || !(ls >> v)) {
            std::ostringstream os;
            os << "load_table_potential: malformed line " << lineno << " in " << path;
            throw std::runtime_error(os.str());
        }
        nodes->push_back(x);
        values->push_back(v);
    }
    if (nodes->empty())
        throw std::runtime_error("load_table_potential: no rows in " + path);
    PotentialField V;
    V.dim = dim;
    V.radial = false;
    V.description = "table potential (" + path + ")";
    V.eval = [nodes, values, dim](const Vec3& x) {
        std::size_t best = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes->size(); ++i) {
            double d2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double dk = (*nodes)[i][k] - x[k];
                d2 += dk * dk;
            }
            if (d2 < bestd) { bestd = d2; best = i; }
        }
        return (*values)[best];
    };
    return V;
}

} // namespace specbound
