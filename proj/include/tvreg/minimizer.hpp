#pragma once
// Damped Newton for the discrete J_delta and the continuation delta -> 0.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "tvreg/density.hpp"
#include "tvreg/errors.hpp"
#include "tvreg/grid_energy.hpp"
#include "tvreg/signal.hpp"

namespace tvreg {

struct SolverConfig {
    std::vector<double> delta_schedule{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    double newton_tol = 1e-10;        // sup-norm of the gradient
    int max_newton_iters = 100;
    double line_search_beta = 0.5;
    double armijo = 1e-4;
    double gap_rel_tol = 1e-6;        // gap_tol = gap_rel_tol * (1 + |J|)

    void validate() const {
        if (delta_schedule.empty()) throw InvalidArgument("solver: empty delta schedule");
        for (std::size_t k = 0; k < delta_schedule.size(); ++k) {
            if (!(delta_schedule[k] > 0.0)) throw InvalidArgument("solver: delta values must be positive");
            if (k > 0 && !(delta_schedule[k] < delta_schedule[k - 1]))
                throw InvalidArgument("solver: delta schedule must be strictly decreasing");
        }
        if (!(newton_tol > 0.0) || !(gap_rel_tol > 0.0)) throw InvalidArgument("solver: tolerances must be positive");
        if (max_newton_iters < 1) throw InvalidArgument("solver: max_newton_iters must be >= 1");
        if (!(line_search_beta > 0.0 && line_search_beta < 1.0))
            throw InvalidArgument("solver: line_search_beta must lie in (0,1)");
    }
};

/// sigma from sigma' = lambda (u - f), sigma(0) = 0, in two layouts.
struct DualCertificate {
    std::vector<double> nodes;      // trapezoid integral at the nodes
    std::vector<double> staggered;  // sigma(0), edge midpoints, sigma(1); n + 1 entries
    double defect = 0.0;            // |sigma(1)|, zero at an exact minimizer
};

struct SolveResult {
    std::vector<double> u;
    std::vector<double> sigma;            // node values
    std::vector<double> sigma_staggered;  // see DualCertificate
    EnergyBreakdown energy;               // J at delta = 0
    double relaxed_energy = 0.0;          // K
    double dual_value = 0.0;              // R[sigma] (clamped)
    double duality_gap = 0.0;             // K - R
    double sigma_defect = 0.0;
    double delta = 0.0;                   // last regularization level
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Integrates lambda (u - f) from t = 0. The node values are the trapezoid
/// rule; the staggered values carry the per-cell increments lambda h w_i (u_i - f_i),
/// which is exactly the discrete Euler equation's flux balance.
inline DualCertificate dual_certificate(std::span<const double> u, const Signal& f, double lambda) {
    detail::check_grid(u, f);
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const double h = g.h();
    DualCertificate c;
    c.nodes.assign(n, 0.0);
    c.staggered.assign(n + 1, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        c.nodes[i] = c.nodes[i - 1] + 0.5 * lambda * h * ((u[i - 1] - f[i - 1]) + (u[i] - f[i]));
    for (std::size_t i = 0; i < n; ++i)
        c.staggered[i + 1] = c.staggered[i] + lambda * h * g.weight(i) * (u[i] - f[i]);
    c.defect = std::abs(c.staggered[n]);
    return c;
}

/// max_e |sigma_e - F'_delta(s_e)| over edges with |F'(s_e)| <= (1 - regular_margin) lambda_inf.
inline double certificate_mismatch(std::span<const double> u, const DualCertificate& c, const Grid& g,
                                   const Density& d, double delta, double regular_margin = 1e-3) {
    const double lam = lambda_inf(d);
    double worst = 0.0;
    for (std::size_t e = 0; e + 1 < u.size(); ++e) {
        const double s = (u[e + 1] - u[e]) / g.h();
        const double flux = d.deriv(s);
        if (std::abs(flux) > (1.0 - regular_margin) * lam) continue;
        worst = std::max(worst, std::abs(c.staggered[e + 1] - (flux + delta * s)));
    }
    return worst;
}

namespace detail {

inline double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Duality bookkeeping shared by solve_delta and solve.
inline void finish_result(SolveResult& r, const Signal& f, const Density& d, double lambda) {
    r.energy = energy(r.u, f, d, lambda, 0.0);
    r.relaxed_energy = relaxed_energy_K(r.u, f, d, lambda);
    auto cert = dual_certificate(r.u, f, lambda);
    r.sigma = cert.nodes;
    r.sigma_defect = cert.defect;
    const double lam = lambda_inf(d);
    const double clamp = (1.0 - 1e-9) * lam;
    std::vector<double> s = cert.staggered;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) s[k] = std::clamp(s[k], -clamp, clamp);
    r.sigma_staggered = std::move(cert.staggered);
    r.dual_value = dual_functional_R(s, f, d, lambda, std::max(1e-6, 2.0 * r.sigma_defect));
    r.duality_gap = r.relaxed_energy - r.dual_value;
}

} // namespace detail

/// Unique minimizer of the discrete J_delta, delta > 0.
inline SolveResult solve_delta(const Signal& f, const Density& d, double lambda, double delta,
                               std::optional<std::span<const double>> warm_start = std::nullopt,
                               const SolverConfig& cfg = {}) {
    cfg.validate();
    if (!(delta > 0.0)) throw InvalidArgument("solve_delta: delta must be > 0");
    detail::check_params(lambda, delta);
    std::vector<double> u(f.values().begin(), f.values().end());
    if (warm_start) {
        if (warm_start->size() != f.size()) throw GridMismatch("solve_delta: warm start has the wrong size");
        u.assign(warm_start->begin(), warm_start->end());
    }

    SolveResult r;
    r.delta = delta;
    auto grad = gradient(u, f, d, lambda, delta);
    double gnorm = detail::sup_norm(grad);
    double E = energy(u, f, d, lambda, delta).total;
    int it = 0;
    for (; it < cfg.max_newton_iters && gnorm > cfg.newton_tol; ++it) {
        const auto H = hessian(u, f, d, lambda, delta);
        auto dir = H.solve(grad);
        double slope = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            dir[i] = -dir[i];
            slope += grad[i] * dir[i];
        }
        std::vector<double> trial(u.size());
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, t *= cfg.line_search_beta) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * dir[i];
            const double Et = energy(trial, f, d, lambda, delta).total;
            if (Et <= E + cfg.armijo * t * slope) {
                accepted = true;
                E = Et;
                break;
            }
            // Near the optimum the decrease drops below rounding of E; fall
            // back to the gradient norm as merit.
            if (std::abs(Et - E) <= 1e-13 * (1.0 + std::abs(E))) {
                const auto gt = gradient(trial, f, d, lambda, delta);
                if (detail::sup_norm(gt) < gnorm) {
                    accepted = true;
                    E = Et;
                    break;
                }
            }
        }
        if (!accepted) break;
        u.swap(trial);
        grad = gradient(u, f, d, lambda, delta);
        gnorm = detail::sup_norm(grad);
    }
    r.u = std::move(u);
    r.iterations = it;
    r.gradient_norm = gnorm;
    r.converged = gnorm <= cfg.newton_tol;
    detail::finish_result(r, f, d, lambda);
    return r;
}

/// Continuation along cfg.delta_schedule with warm starts; approximates the
/// minimizer of the relaxed functional K.
inline SolveResult solve(const Signal& f, const Density& d, double lambda, const SolverConfig& cfg = {}) {
    cfg.validate();
    std::vector<double> u(f.values().begin(), f.values().end());
    SolveResult r;
    int total_iters = 0;
    bool all_converged = true;
    for (double delta : cfg.delta_schedule) {
        r = solve_delta(f, d, lambda, delta, std::span<const double>(u), cfg);
        total_iters += r.iterations;
        all_converged = all_converged && r.converged;
        u = r.u;
    }
    r.iterations = total_iters;
    r.converged = all_converged;
    return r;
}

/// gap_tol for a result.
inline double gap_tolerance(const SolveResult& r, const SolverConfig& cfg = {}) {
    return cfg.gap_rel_tol * (1.0 + std::abs(r.energy.total));
}

} // namespace tvreg
