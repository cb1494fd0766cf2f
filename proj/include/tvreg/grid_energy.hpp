#pragma once
/*
 * Discrete energies on a uniform grid.
 *
 * Slopes live on edges, s_e = (u_{e+1} - u_e) / h. The fidelity integral uses
 * trapezoid weights w_i, so
 *
 *   J_delta[u] = sum_e h F_delta(s_e) + lambda/2 sum_i h w_i (u_i - f_i)^2,
 *   F_delta(p) = F(p) + delta/2 p^2.
 *
 * The Euler equation of J_delta is then exactly a tridiagonal system, and the
 * free (Neumann) boundary condition appears through the one-sided end terms.
 *
 * The dual variable lives on the staggered grid 0, t_{1/2}, ..., t_{n-3/2}, 1:
 * entry 0 and entry n are sigma(0) and sigma(1), entry e+1 is the value on
 * edge e. Its derivative at node i is taken over the dual cell of width
 * h w_i, which makes R below the exact Fenchel dual of the discrete J.
 */

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tvreg/density.hpp"
#include "tvreg/errors.hpp"
#include "tvreg/signal.hpp"
#include "tvreg/tridiag.hpp"

namespace tvreg {

struct EnergyBreakdown {
    double smoothing = 0.0;
    double fidelity = 0.0;
    double tikhonov = 0.0;
    double total = 0.0;
};

/// Slope past which the relaxed energy continues affinely: F'(p*) = (1 - 1e-6) lambda_inf.
inline constexpr double k_relaxation_cap = 1e-6;

namespace detail {

inline void check_grid(std::span<const double> u, const Signal& f) {
    if (u.size() != f.size()) throw GridMismatch("node values and signal live on different grids");
}

inline void check_params(double lambda, double delta) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
    if (!(delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
}

} // namespace detail

inline std::vector<double> slopes(std::span<const double> u, const Grid& g) {
    std::vector<double> s(u.size() - 1);
    for (std::size_t e = 0; e < s.size(); ++e) s[e] = (u[e + 1] - u[e]) / g.h();
    return s;
}

inline EnergyBreakdown energy(std::span<const double> u, const Signal& f, const Density& d,
                              double lambda, double delta) {
    detail::check_grid(u, f);
    detail::check_params(lambda, delta);
    const Grid& g = f.grid();
    const double h = g.h();
    EnergyBreakdown e;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) {
        const double s = (u[k + 1] - u[k]) / h;
        e.smoothing += h * d(s);
        e.tikhonov += 0.5 * delta * h * s * s;
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u[i] - f[i];
        e.fidelity += 0.5 * lambda * h * g.weight(i) * r * r;
    }
    e.total = e.smoothing + e.fidelity + e.tikhonov;
    return e;
}

inline std::vector<double> gradient(std::span<const double> u, const Signal& f, const Density& d,
                                    double lambda, double delta) {
    detail::check_grid(u, f);
    detail::check_params(lambda, delta);
    const Grid& g = f.grid();
    const double h = g.h();
    const std::size_t n = u.size();
    std::vector<double> grad(n);
    for (std::size_t i = 0; i < n; ++i) grad[i] = lambda * h * g.weight(i) * (u[i] - f[i]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double s = (u[k + 1] - u[k]) / h;
        const double flux = d.deriv(s) + delta * s;
        grad[k] -= flux;
        grad[k + 1] += flux;
    }
    return grad;
}

inline SymTridiag hessian(std::span<const double> u, const Signal& f, const Density& d,
                          double lambda, double delta) {
    detail::check_grid(u, f);
    detail::check_params(lambda, delta);
    const Grid& g = f.grid();
    const double h = g.h();
    const std::size_t n = u.size();
    SymTridiag H{std::vector<double>(n), std::vector<double>(n - 1)};
    for (std::size_t i = 0; i < n; ++i) H.diag[i] = lambda * h * g.weight(i);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double s = (u[k + 1] - u[k]) / h;
        const double c = (d.second(s) + delta) / h;
        H.diag[k] += c;
        H.diag[k + 1] += c;
        H.off[k] = -c;
    }
    return H;
}

/// Per-edge relaxed smoothing term: min over splits du = a + s of
/// h F(a/h) + lambda_inf |s|. With the slope cap p* this is h F(du/h) for
/// |du|/h <= p* and the affine continuation with slope lambda_inf beyond.
inline double relaxed_edge(double du, double h, const Density& d, double cap, double lam_inf) {
    const double a = std::abs(du);
    if (a <= h * cap) return h * d(a / h);
    return h * d(cap) + lam_inf * (a - h * cap);
}

/// Discrete relaxed energy K (jump parts charged at rate lambda_inf).
inline double relaxed_energy_K(std::span<const double> u, const Signal& f, const Density& d, double lambda) {
    detail::check_grid(u, f);
    detail::check_params(lambda, 0.0);
    const Grid& g = f.grid();
    const double h = g.h();
    const double lam = lambda_inf(d);
    const double cap = slope_cap(d, k_relaxation_cap);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) total += relaxed_edge(u[k + 1] - u[k], h, d, cap, lam);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u[i] - f[i];
        total += 0.5 * lambda * h * g.weight(i) * r * r;
    }
    return total;
}

/// Dual functional R[sigma] = -sum_i h w_i (sigma_dot_i^2 / (2 lambda) + sigma_dot_i f_i)
///                            - sum_e h F*(sigma_e)
/// for a staggered sigma (n + 1 entries, see the header comment).
inline double dual_functional_R(std::span<const double> sigma, const Signal& f, const Density& d,
                                double lambda, double boundary_tol = 1e-6) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    if (sigma.size() != n + 1) throw GridMismatch("staggered sigma needs n + 1 entries");
    detail::check_params(lambda, 0.0);
    if (std::abs(sigma[0]) > boundary_tol || std::abs(sigma[n]) > boundary_tol)
        throw BoundaryConditionError("dual functional: sigma(0) and sigma(1) must vanish");
    const double lam = lambda_inf(d);
    const double h = g.h();
    double total = 0.0;
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double s = sigma[e + 1];
        if (!(std::abs(s) < lam)) throw DomainError("dual functional: |sigma| must stay below lambda_inf");
        total -= h * conjugate(d, s);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double cell = h * g.weight(i);
        const double rate = (sigma[i + 1] - sigma[i]) / cell;
        total -= cell * (rate * rate / (2.0 * lambda) + rate * f[i]);
    }
    return total;
}

} // namespace tvreg
