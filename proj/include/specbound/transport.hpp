#pragma once

// Divergence-constrained transport bound D_d(W, Omega): a closed-form radial
// d'-Laplace Neumann solver and a grid energy-minimization solver for the
// general problem. The grid route returns a feasible flux, so its norm is an
// UPPER estimate of the infimum D_d; consumers must treat it as such.

#include "specbound/statistics.hpp"

namespace specbound {

struct CompatibilityError : std::runtime_error {
    double defect = 0.0;
    CompatibilityError(const std::string& msg, double d)
        : std::runtime_error(msg), defect(d) {}
};

// ---------------------------------------------------------------------------
// Radial route. With v(r) = |u'|^{d'-2} u' the d'-Laplace Neumann problem on
// a ball reduces to the linear ODE v' + (d-1)/r v = -d^{1/(d-1)} W(r) with
// v(r0) = 0 and regularity at 0. Variation of constants gives
//   v(r) = -d^{1/(d-1)} r^{1-d} int_0^r W rho^{d-1} drho,
// which makes the associated flux |F| = |v|/d^{1/(d-1)} coincide with the
// direct radial divergence solution F(r) = r^{1-d} int_0^r W rho^{d-1} drho.
// Solvability needs the zero-mean compatibility int_0^{r0} W rho^{d-1} = 0.

struct RadialSolution {
    std::vector<double> rho;
    std::vector<double> v;
    std::vector<double> uprime; // signed power of v with exponent 1/(d'-1) = d-1
    double energy = 0.0;        // int_ball |grad u|^{d'}
    double bound = 0.0;         // ((1/d^{1/(d-1)}) energy)^{1/d}
    double f_norm = 0.0;        // ||F||_d of the associated flux = energy^{1/d}/d^{1/(d-1)}
};

inline RadialSolution radial_neumann_solve(const Handle1D& Wtilde, double r0, int d,
                                           std::span<const double> breakpoints = {},
                                           int n_cells = 8192) {
    if (r0 <= 0.0) throw std::invalid_argument("radial_neumann_solve: r0 > 0 required");
    if (d < 3) throw std::invalid_argument("radial_neumann_solve: d >= 3 required");
    auto f = [&](double rho) { return Wtilde(rho) * std::pow(rho, d - 1); };
    auto af = [&](double rho) { return std::abs(Wtilde(rho)) * std::pow(rho, d - 1); };
    const double mass = integrate_piecewise(af, 0.0, r0, breakpoints, 1e-12);
    const double defect = integrate_piecewise(f, 0.0, r0, breakpoints, 1e-12);
    if (std::abs(defect) > 1e-8 * std::max(1.0, mass))
        throw CompatibilityError("radial_neumann_solve: int W rho^{d-1} != 0", defect);

    RadialSolution out;
    const double scale = std::pow(double(d), 1.0 / (d - 1.0));
    std::vector<double> knots;
    knots.reserve(n_cells + breakpoints.size() + 1);
    for (int i = 0; i <= n_cells; ++i) knots.push_back(r0 * i / n_cells);
    for (double b : breakpoints)
        if (b > 0.0 && b < r0) knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    out.rho = knots;
    out.v.resize(knots.size());
    out.uprime.resize(knots.size());
    double cum = 0.0;
    out.v[0] = 0.0; // v ~ -scale W(0) r / d near the origin
    out.uprime[0] = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        cum += integrate(f, knots[i - 1], knots[i], 1e-13 * std::max(1.0, mass));
        out.v[i] = -scale * cum / std::pow(knots[i], d - 1);
        out.uprime[i] = signed_pow(out.v[i], double(d - 1));
    }
    // energy = omega_d int |u'|^{d'} rho^{d-1} = omega_d int |v|^d rho^{d-1}
    double e = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        auto g = [&](double rr, double vv) {
            return std::pow(std::abs(vv), double(d)) * std::pow(rr, d - 1);
        };
        e += 0.5 * (knots[i] - knots[i - 1]) *
             (g(knots[i - 1], out.v[i - 1]) + g(knots[i], out.v[i]));
    }
    out.energy = unit_sphere_area(d) * e;
    out.bound = std::pow(out.energy / scale, 1.0 / d);
    out.f_norm = std::pow(out.energy, 1.0 / d) / scale;
    return out;
}

// ---------------------------------------------------------------------------
// Grid route: minimize the dual functional J(u) = int H*_eps(grad u) + int W u
// over grid functions, Q1 gradients with one-point quadrature per cell.
// Stationarity is the discrete q-Laplace Neumann problem
// div(|grad u|^{q-2} grad u) = p^{1/(p-1)} W with no-flux boundary, and the
// minimizing flux is F = grad H*(grad u) (the Legendre-transform formula).

struct VectorFieldGrid {
    std::vector<Vec3> centers;                    // cell centers
    std::vector<Vec3> values;                     // flux per cell
    std::vector<std::array<std::int32_t, 8>> cells; // corner node ids per cell
    double h = 0.0;
    double cell_volume = 0.0;

    double norm(double s) const {
        double acc = 0.0;
        for (const auto& F : values) acc += cell_volume * std::pow(norm3(F), s);
        return std::pow(acc, 1.0 / s);
    }
};

struct PLaplaceResult {
    std::vector<double> u;      // node values, zero mean over participating nodes
    std::vector<double> source; // the discrete source actually solved for:
                                // recentered on participating nodes, 0 elsewhere
    VectorFieldGrid F;
    double dual_energy = 0.0;     // final J(u)
    double eps_used = 0.0;
    double eps_sensitivity = 0.0; // relative J change when eps is doubled
    int iterations = 0;
    bool converged = false;
};

namespace detail {

/// Cell/corner structure over the masked lattice: cells whose 8 corners are
/// all inside. Nodes touching no complete cell are excluded (staircase
/// slivers carry no gradient energy, and a source there would be unbalanced).
struct CellMesh {
    std::vector<std::array<std::int32_t, 8>> cells;
    std::vector<Vec3> centers;
    std::vector<std::int32_t> active; // grid node id -> compact id or -1
    std::vector<std::int32_t> nodes;  // compact id -> grid node id
    double h = 0.0;

    std::size_t n_active() const { return nodes.size(); }
};

inline CellMesh build_cell_mesh(const QuadratureGrid& g) {
    if (g.dim != 3)
        throw std::invalid_argument("grid_plaplace_minimize: d = 3 grids only");
    CellMesh mesh;
    mesh.h = g.h;
    std::vector<char> touched(g.nodes.size(), 0);
    for (int i = 0; i + 1 < g.shape[0]; ++i)
        for (int j = 0; j + 1 < g.shape[1]; ++j)
            for (int k = 0; k + 1 < g.shape[2]; ++k) {
                std::array<std::int32_t, 8> corner{};
                bool ok = true;
                for (int b = 0; b < 8 && ok; ++b) {
                    const int di = (b >> 2) & 1, dj = (b >> 1) & 1, dk = b & 1;
                    const auto id = g.at(i + di, j + dj, k + dk);
                    if (id < 0) ok = false; else corner[b] = id;
                }
                if (!ok) continue;
                mesh.cells.push_back(corner);
                const Vec3& base = g.nodes[corner[0]];
                mesh.centers.push_back(
                    Vec3{base[0] + 0.5 * g.h, base[1] + 0.5 * g.h, base[2] + 0.5 * g.h});
                for (int b = 0; b < 8; ++b) touched[corner[b]] = 1;
            }
    mesh.active.assign(g.nodes.size(), -1);
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (touched[i]) {
            mesh.active[i] = std::int32_t(mesh.nodes.size());
            mesh.nodes.push_back(std::int32_t(i));
        }
    return mesh;
}

/// Q1 one-point gradient of nodal u at a cell center.
inline Vec3 cell_gradient(const std::array<std::int32_t, 8>& c,
                          const std::vector<double>& u,
                          const std::vector<std::int32_t>& active, double h) {
    double gx = 0.0, gy = 0.0, gz = 0.0;
    for (int b = 0; b < 8; ++b) {
        const double ub = u[active[c[b]]];
        gx += ((b >> 2) & 1 ? ub : -ub);
        gy += ((b >> 1) & 1 ? ub : -ub);
        gz += (b & 1 ? ub : -ub);
    }
    const double s = 1.0 / (4.0 * h);
    return {gx * s, gy * s, gz * s};
}

} // namespace detail

/// Minimize the dual functional by preconditioned (Sobolev-gradient) descent
/// with Armijo step halving: the descent direction is the Neumann-Laplacian
/// preimage of the gradient, the step accepted by backtracking on the true
/// energy. First-order descent only; the q < 2 degeneracy is handled by the
/// (|g|^2 + eps^2)^{q/2} regularization.
inline PLaplaceResult grid_plaplace_minimize(std::span<const double> W, double p,
                                             const QuadratureGrid& grid,
                                             int max_iter = 3000,
                                             double energy_rel_tol = 1e-10) {
    if (!(p > 1.0)) throw std::invalid_argument("grid_plaplace_minimize: p > 1 required");
    if (W.size() != grid.nodes.size())
        throw std::invalid_argument("grid_plaplace_minimize: W size mismatch");
    const double q = p / (p - 1.0);
    const double h = grid.h;
    const double vol = h * h * h;
    const auto mesh = detail::build_cell_mesh(grid);
    const std::size_t n = mesh.n_active();
    const std::size_t nc = mesh.cells.size();
    if (n == 0 || nc == 0)
        throw std::invalid_argument("grid_plaplace_minimize: no complete cells at this h");

    // restrict + verify zero mean of the source
    std::vector<double> w(n);
    double wsum = 0.0, wabs = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        w[a] = W[mesh.nodes[a]];
        wsum += w[a];
        wabs += std::abs(w[a]);
    }
    if (std::abs(wsum) > 1e-8 * std::max(1.0, wabs))
        throw CompatibilityError("grid_plaplace_minimize: W has nonzero mean",
                                 wsum * vol);
    const double wshift = wsum / double(n); // remove roundoff-level drift
    for (auto& x : w) x -= wshift;

    const double kp = std::pow(p, -1.0 / (p - 1.0)); // grad H*(s) = kp |s|^{q-2} s

    // state vectors are compact (one entry per active node)
    auto cell_grad = [&](const std::array<std::int32_t, 8>& c,
                         const std::vector<double>& uc) {
        double gx = 0.0, gy = 0.0, gz = 0.0;
        for (int b = 0; b < 8; ++b) {
            const double ub = uc[mesh.active[c[b]]];
            gx += ((b >> 2) & 1 ? ub : -ub);
            gy += ((b >> 1) & 1 ? ub : -ub);
            gz += (b & 1 ? ub : -ub);
        }
        const double s = 1.0 / (4.0 * h);
        return Vec3{gx * s, gy * s, gz * s};
    };

    auto energy = [&](const std::vector<double>& uc, double eps) {
        double e = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const Vec3 g = cell_grad(mesh.cells[c], uc);
            e += vol * std::pow(dot3(g, g) + eps * eps, 0.5 * q) * kp / q;
        }
        for (std::size_t a = 0; a < n; ++a) e += vol * w[a] * uc[a];
        return e;
    };

    // gradient of J; also emits the per-cell flux for the current iterate
    std::vector<Vec3> flux(nc);
    auto gradient = [&](const std::vector<double>& uc, double eps,
                        std::vector<double>& gout) {
        gout.assign(n, 0.0);
        const double s = vol / (4.0 * h);
        for (std::size_t c = 0; c < nc; ++c) {
            const Vec3 g = cell_grad(mesh.cells[c], uc);
            const double g2 = dot3(g, g) + eps * eps;
            // |F| = kp |g|^{q-1} -> 0 with g for q > 1: guard the 0^negative
            const double m = g2 > 0.0 ? kp * std::pow(g2, 0.5 * q - 1.0) : 0.0;
            const Vec3 F{m * g[0], m * g[1], m * g[2]};
            flux[c] = F;
            const auto& corners = mesh.cells[c];
            for (int b = 0; b < 8; ++b) {
                const double sx = (b >> 2) & 1 ? 1.0 : -1.0;
                const double sy = (b >> 1) & 1 ? 1.0 : -1.0;
                const double sz = b & 1 ? 1.0 : -1.0;
                gout[mesh.active[corners[b]]] += s * (sx * F[0] + sy * F[1] + sz * F[2]);
            }
        }
        for (std::size_t a = 0; a < n; ++a) gout[a] += vol * w[a];
    };

    // Neumann-Laplacian preconditioner (same cell structure, quadratic energy)
    std::vector<int> cells_per_node(n, 0);
    for (const auto& c : mesh.cells)
        for (int b = 0; b < 8; ++b) ++cells_per_node[mesh.active[c[b]]];
    std::vector<double> lap_diag(n);
    for (std::size_t a = 0; a < n; ++a)
        lap_diag[a] = std::max(cells_per_node[a] * 3.0 * h / 16.0, 1e-300);

    auto project_mean = [&](std::vector<double>& x) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= double(x.size());
        for (double& v : x) v -= mean;
    };

    LinOp lap = [&](const std::vector<double>& x, std::vector<double>& y) {
        y.assign(n, 0.0);
        const double s = vol / (4.0 * h);
        for (std::size_t c = 0; c < nc; ++c) {
            const Vec3 g = cell_grad(mesh.cells[c], x);
            const auto& corners = mesh.cells[c];
            for (int b = 0; b < 8; ++b) {
                const double sx = (b >> 2) & 1 ? 1.0 : -1.0;
                const double sy = (b >> 1) & 1 ? 1.0 : -1.0;
                const double sz = b & 1 ? 1.0 : -1.0;
                y[mesh.active[corners[b]]] += s * (sx * g[0] + sy * g[1] + sz * g[2]);
            }
        }
        project_mean(y);
    };
    LinOp lap_precond = [&](const std::vector<double>& r, std::vector<double>& z) {
        z.resize(n);
        for (std::size_t a = 0; a < n; ++a) z[a] = r[a] / lap_diag[a];
    };

    std::vector<double> uc(n, 0.0);
    std::vector<double> grad(n), dir(n), rhs(n), utrial(n);

    // the Laplacian preimage only steers the descent, so a loose inner
    // tolerance is enough; the previous direction warm-starts the solve
    auto descend_direction = [&](const std::vector<double>& g) {
        rhs = g;
        for (auto& v : rhs) v = -v;
        project_mean(rhs);
        conjugate_gradient(lap, rhs, dir, 1e-4, 400, lap_precond);
        project_mean(dir);
    };

    // epsilon from the Poisson flux scale of the data (first descent direction)
    gradient(uc, 0.0, grad);
    descend_direction(grad);
    double gmax = 0.0;
    for (std::size_t c = 0; c < nc; ++c)
        gmax = std::max(gmax, norm3(cell_grad(mesh.cells[c], dir)));
    const double flux_scale = 0.5 * gmax; // p = 2 flux of the same data
    const double grad_scale =
        std::pow(std::max(std::pow(p, 1.0 / (p - 1.0)) * flux_scale, 1e-300),
                 1.0 / (q - 1.0));
    const double eps = 1e-8 * std::max(grad_scale, 1e-20);

    PLaplaceResult out;
    out.eps_used = eps;

    double J = energy(uc, eps);
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
        gradient(uc, eps, grad);
        descend_direction(grad);
        double gd = 0.0;
        for (std::size_t a = 0; a < n; ++a) gd += grad[a] * dir[a];
        if (gd >= 0.0) { converged = true; break; }
        double t = 1.0;
        double Jbest = J;
        double tbest = 0.0;
        for (int halve = 0; halve < 60; ++halve) {
            utrial = uc;
            for (std::size_t a = 0; a < n; ++a) utrial[a] += t * dir[a];
            const double Jt = energy(utrial, eps);
            if (Jt <= J + 1e-4 * t * gd) {
                Jbest = Jt;
                tbest = t;
                // greedy expansion while the energy keeps dropping
                for (double te = 2.0 * t; te <= 8.0 * t; te *= 2.0) {
                    utrial = uc;
                    for (std::size_t a = 0; a < n; ++a) utrial[a] += te * dir[a];
                    const double Je = energy(utrial, eps);
                    if (Je < Jbest) { Jbest = Je; tbest = te; } else break;
                }
                break;
            }
            t *= 0.5;
        }
        if (tbest == 0.0) {
            if (it == 0)
                throw std::runtime_error(
                    "grid_plaplace_minimize: descent stalled (step-halving exhausted)");
            converged = true;
            break;
        }
        for (std::size_t a = 0; a < n; ++a) uc[a] += tbest * dir[a];
        project_mean(uc);
        const double Jnew = energy(uc, eps);
        if (std::abs(J - Jnew) <= energy_rel_tol * (std::abs(J) + 1e-30)) {
            J = Jnew;
            converged = true;
            ++it;
            break;
        }
        J = Jnew;
    }

    gradient(uc, eps, grad); // refresh flux at the final iterate
    out.u.assign(grid.nodes.size(), 0.0);
    for (std::size_t a = 0; a < n; ++a) out.u[mesh.nodes[a]] = uc[a];
    out.source.assign(grid.nodes.size(), 0.0);
    for (std::size_t a = 0; a < n; ++a) out.source[mesh.nodes[a]] = w[a];
    out.F.h = h;
    out.F.cell_volume = vol;
    out.F.centers = mesh.centers;
    out.F.cells = mesh.cells;
    out.F.values = flux;
    out.dual_energy = J;
    out.iterations = it;
    out.converged = converged;
    const double J2 = energy(uc, 2.0 * eps);
    out.eps_sensitivity = std::abs(J2 - J) / (std::abs(J) + 1e-300);
    if (!converged)
        throw std::runtime_error("grid_plaplace_minimize: iteration cap reached");
    return out;
}

/// Discrete divergence adjoint to the cell-gradient operator (per node).
inline std::vector<double> discrete_divergence(const VectorFieldGrid& F,
                                               std::size_t n_grid_nodes) {
    std::vector<double> div(n_grid_nodes, 0.0);
    const double s = 1.0 / (4.0 * F.h);
    for (std::size_t c = 0; c < F.cells.size(); ++c) {
        const auto& corners = F.cells[c];
        const Vec3& f = F.values[c];
        for (int b = 0; b < 8; ++b) {
            const double sx = (b >> 2) & 1 ? 1.0 : -1.0;
            const double sy = (b >> 1) & 1 ? 1.0 : -1.0;
            const double sz = b & 1 ? 1.0 : -1.0;
            div[corners[b]] -= s * (sx * f[0] + sy * f[1] + sz * f[2]);
        }
    }
    return div;
}

/// Weak divergence residual: max over smooth compactly supported test bumps
/// of |int F . grad phi + int W phi| / ||phi||_2, with the same discrete
/// pairing the minimizer is stationary for.
inline double divergence_residual(const VectorFieldGrid& F, std::span<const double> W,
                                  const QuadratureGrid& grid, int n_bumps = 6) {
    const double h = F.h;
    const double vol = F.cell_volume;
    const Vec3 c0 = domain_center(grid.domain);
    const double R = domain_bounding_radius(grid.domain);
    auto rng = make_rng(97531);
    std::uniform_real_distribution<double> uc(-0.4, 0.4), uw(0.25, 0.6);
    double worst = 0.0;
    for (int b = 0; b < n_bumps; ++b) {
        Vec3 ctr{c0[0] + uc(rng) * R, c0[1] + uc(rng) * R, c0[2] + uc(rng) * R};
        const double wdt = uw(rng) * R;
        auto phi = [&](const Vec3& x) {
            double val = 1.0;
            for (int k = 0; k < 3; ++k) {
                const double t = (x[k] - ctr[k]) / wdt;
                if (std::abs(t) >= 1.0) return 0.0;
                const double cterm = std::cos(0.5 * std::numbers::pi * t);
                val *= cterm * cterm;
            }
            return val;
        };
        std::vector<double> phin(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) phin[i] = phi(grid.nodes[i]);
        // int F . grad phi over cells, same Q1 pairing as the solver
        double i1 = 0.0;
        std::vector<std::int32_t> ident(grid.nodes.size());
        for (std::size_t i = 0; i < ident.size(); ++i) ident[i] = std::int32_t(i);
        for (std::size_t c = 0; c < F.cells.size(); ++c) {
            const Vec3 g = detail::cell_gradient(F.cells[c], phin, ident, h);
            i1 += vol * dot3(F.values[c], g);
        }
        double i2 = 0.0, pn = 0.0;
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            i2 += vol * W[i] * phin[i];
            pn += vol * phin[i] * phin[i];
        }
        if (pn <= 0.0) continue;
        worst = std::max(worst, std::abs(i1 + i2) / std::sqrt(pn));
    }
    return worst;
}

/// Upper estimate of D_d(W, dom): ||F||_d of the computed q-Laplace Neumann
/// minimizer with p = d. Any feasible F upper-bounds the infimum; a passing
/// transport criterion is evidence, a failing one inconclusive.
inline double d_bound(std::span<const double> W, const QuadratureGrid& grid,
                      int d = 3) {
    auto res = grid_plaplace_minimize(W, double(d), grid);
    return res.F.norm(double(d));
}

} // namespace specbound
