#pragma once

// Small numerical utilities shared across the toolkit: quadrature, ODE
// stepping, linear solvers (matrix-free), and deterministic helpers.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace specbound {

using Vec3 = std::array<double, 3>;

inline double dot3(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

inline double max_norm3(const Vec3& a, int dim) {
    double m = 0.0;
    for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(a[k]));
    return m;
}

inline double norm_dim(const Vec3& a, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += a[k] * a[k];
    return std::sqrt(s);
}

/// Signed power a^<alpha> = sign(a) |a|^alpha.
inline double signed_pow(double a, double alpha) {
    if (a == 0.0) return 0.0;
    return a > 0.0 ? std::pow(a, alpha) : -std::pow(-a, alpha);
}

/// Hypersurface area of the unit sphere S^{d-1} in R^d.
inline double unit_sphere_area(int d) {
    return d * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature on [a,b] with absolute tolerance.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integrate over [a,b] split at the given interior breakpoints (for
/// integrands with known discontinuities).
inline double integrate_piecewise(const std::function<double(double)>& f, double a,
                                  double b, std::span<const double> breaks,
                                  double tol = 1e-10) {
    std::vector<double> pts = {a};
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        s += integrate(f, pts[i], pts[i + 1], tol / double(pts.size()));
    return s;
}

/// One classical RK4 step for y' = f(t, y) on a vector state.
template <class State, class Rhs>
State rk4_step(const Rhs& f, double t, const State& y, double h) {
    State k1 = f(t, y);
    State y2{}, y3{}, y4{};
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + 0.5 * h * k1[i];
    State k2 = f(t + 0.5 * h, y2);
    for (std::size_t i = 0; i < y.size(); ++i) y3[i] = y[i] + 0.5 * h * k2[i];
    State k3 = f(t + 0.5 * h, y3);
    for (std::size_t i = 0; i < y.size(); ++i) y4[i] = y[i] + h * k3[i];
    State k4 = f(t + h, y4);
    State out{};
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Matrix-free Krylov solvers. Operators are callbacks y = A x.

using LinOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;

inline double vdot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double vnorm(const std::vector<double>& a) { return std::sqrt(vdot(a, a)); }

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradient for SPD operators. `precond` applies an
/// approximate inverse (identity if empty).
inline SolveStats conjugate_gradient(const LinOp& A, const std::vector<double>& b,
                                     std::vector<double>& x, double rel_tol,
                                     int max_iter, const LinOp& precond = {}) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), Ap(n);
    A(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    const double bnorm = std::max(vnorm(b), 1e-300);
    if (precond) precond(r, z); else z = r;
    p = z;
    double rz = vdot(r, z);
    SolveStats st;
    for (st.iterations = 0; st.iterations < max_iter; ++st.iterations) {
        st.residual = vnorm(r) / bnorm;
        if (st.residual <= rel_tol) { st.converged = true; return st; }
        A(p, Ap);
        const double alpha = rz / vdot(p, Ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        if (precond) precond(r, z); else z = r;
        const double rz_new = vdot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    st.residual = vnorm(r) / bnorm;
    st.converged = st.residual <= rel_tol;
    return st;
}

/// BiCGStab for mildly nonsymmetric operators (Shortley-Weller rows).
inline SolveStats bicgstab(const LinOp& A, const std::vector<double>& b,
                           std::vector<double>& x, double rel_tol, int max_iter,
                           const LinOp& precond = {}) {
    const std::size_t n = b.size();
    std::vector<double> r(n), r0(n), p(n), v(n), s(n), t(n), y(n), z(n);
    A(x, v);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - v[i];
    r0 = r;
    const double bnorm = std::max(vnorm(b), 1e-300);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    SolveStats st;
    for (st.iterations = 0; st.iterations < max_iter; ++st.iterations) {
        st.residual = vnorm(r) / bnorm;
        if (st.residual <= rel_tol) { st.converged = true; return st; }
        const double rho_new = vdot(r0, r);
        if (rho_new == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        if (precond) precond(p, y); else y = p;
        A(y, v);
        alpha = rho / vdot(r0, v);
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (precond) precond(s, z); else z = s;
        A(z, t);
        const double tt = vdot(t, t);
        omega = tt > 0.0 ? vdot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        if (omega == 0.0) break;
    }
    st.residual = vnorm(r) / bnorm;
    st.converged = st.residual <= rel_tol;
    return st;
}

/// Solve a tridiagonal system in place (Thomas algorithm).
inline void solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                              std::vector<double> upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

// ---------------------------------------------------------------------------

/// Worker count for per-center parallel dispatch. Controlled by the
/// SPECBOUND_WORKERS environment variable only; defaults to 1 (sequential),
/// which keeps runs trivially reproducible.
inline int worker_count() {
    if (const char* env = std::getenv("SPECBOUND_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

/// Index-parallel loop with deterministic result placement. The body must
/// write only to its own index slot.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const int use = std::min<int>(workers, int(n));
    pool.reserve(use);
    for (int w = 0; w < use; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    for (auto& t : pool) t.join();
}

/// Deterministic 64-bit RNG for the seeded Monte Carlo paths and test fields.
inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

} // namespace specbound
