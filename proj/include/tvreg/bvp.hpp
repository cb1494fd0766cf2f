#pragma once
/*
 * Shooting solver for the Neumann problem
 *
 *     u'' = lambda (u - f) / F''(u'),   u'(0) = u'(1) = 0,
 *
 * used as an oracle independent of the energy minimizer. The integrator is
 * classical RK4 on a fixed base step aligned with the data's breakpoints.
 * Inside a base step the step is halved while the step-doubling error
 * estimate exceeds the local tolerance, which is what lets the integration
 * follow u' into the blow-up regime near a forming jump.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "tvreg/density.hpp"
#include "tvreg/errors.hpp"
#include "tvreg/signal.hpp"

namespace tvreg {

struct TrajectoryPoint {
    double t;
    double u;
    double du;
    double work;  // lambda * int_0^t f u' ds
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    bool blew_up = false;    // |u'| passed the slope cap
    bool underflow = false;  // step halving hit min_step before the cap was reached
    bool stopped = false;    // the caller's stop predicate fired

    const TrajectoryPoint& back() const { return points.back(); }

    /// Linear interpolation of u at time t (clamped to the sampled range).
    double u_at(double t) const {
        if (t <= points.front().t) return points.front().u;
        if (t >= points.back().t) return points.back().u;
        auto it = std::lower_bound(points.begin(), points.end(), t,
                                   [](const TrajectoryPoint& p, double x) { return p.t < x; });
        const auto& b = *it;
        const auto& a = *(it - 1);
        if (b.t == a.t) return b.u;
        return a.u + (b.u - a.u) * (t - a.t) / (b.t - a.t);
    }
};

struct IntegratorConfig {
    int steps_per_unit = 20000;  // base step 1/steps_per_unit before breakpoint alignment
    double local_tol = 1e-11;
    double min_step = 1e-15;
    double cap_rel = 1e-8;  // blow-up once F'(u') is within cap_rel of lambda_inf
};

enum class ShootStatus { continuous, no_bracket };

struct ShootResult {
    double u0 = 0.0;
    Trajectory trajectory;
    double residual = 0.0;
    bool blew_up = false;
    ShootStatus status = ShootStatus::continuous;
    int iterations = 0;

    bool continuous() const { return status == ShootStatus::continuous; }
};

struct ShootConfig {
    IntegratorConfig integrator{};
    double width_tol = 0.0;  // 0: bisect down to floating-point resolution
    int max_iters = 100;
    double residual_tol = 1e-6;  // accepted miss for a continuous solution
};

namespace detail {

struct OdeState {
    double u, v, w;
};

template <class Rhs>
OdeState rk4_step(const Rhs& rhs, double t, const OdeState& y, double dt) {
    const auto k1 = rhs(t, y);
    const auto k2 = rhs(t + 0.5 * dt, {y.u + 0.5 * dt * k1.u, y.v + 0.5 * dt * k1.v, y.w + 0.5 * dt * k1.w});
    const auto k3 = rhs(t + 0.5 * dt, {y.u + 0.5 * dt * k2.u, y.v + 0.5 * dt * k2.v, y.w + 0.5 * dt * k2.w});
    const auto k4 = rhs(t + dt, {y.u + dt * k3.u, y.v + dt * k3.v, y.w + dt * k3.w});
    return {y.u + dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            y.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            y.w + dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

} // namespace detail

using StopPredicate = std::function<bool(const TrajectoryPoint&)>;

/// Integrates from (0, u0, u'(0) = 0) to t_end. Stops early on blow-up or
/// when `stop` returns true for a sampled point.
inline Trajectory integrate(const Datum& f, const Density& d, double lambda, double u0, double t_end,
                            const IntegratorConfig& cfg = {}, const StopPredicate& stop = {}) {
    if (!(lambda > 0.0)) throw InvalidArgument("integrate: lambda must be > 0");
    if (!(t_end > 0.0 && t_end <= 1.0)) throw InvalidArgument("integrate: t_end must lie in (0,1]");
    if (!std::isfinite(u0)) throw InvalidArgument("integrate: u0 must be finite");
    const double cap = slope_cap(d, cfg.cap_rel);
    const double base = 1.0 / cfg.steps_per_unit;

    Trajectory traj;
    traj.points.push_back({0.0, u0, 0.0, 0.0});
    detail::OdeState y{u0, 0.0, 0.0};

    for (const auto& piece : f.pieces()) {
        if (piece.a >= t_end) break;
        const double a = piece.a;
        const double b = std::min(piece.b, t_end);
        const auto& fn = piece.fn;
        auto rhs = [&](double t, const detail::OdeState& s) -> detail::OdeState {
            const double ft = fn(std::clamp(t, a, b));
            return {s.v, lambda * (s.u - ft) / d.second(s.v), lambda * ft * s.v};
        };
        const auto steps = std::max<long>(1, static_cast<long>(std::ceil((b - a) / base - 1e-9)));
        const double H = (b - a) / static_cast<double>(steps);
        for (long k = 0; k < steps; ++k) {
            const double t0 = a + static_cast<double>(k) * H;
            const double t1 = (k + 1 == steps) ? b : a + static_cast<double>(k + 1) * H;
            double t = t0;
            double dt = t1 - t0;
            while (t < t1) {
                dt = std::min(dt, t1 - t);
                const auto full = detail::rk4_step(rhs, t, y, dt);
                const auto half = detail::rk4_step(rhs, t, y, 0.5 * dt);
                const auto two = detail::rk4_step(rhs, t + 0.5 * dt, half, 0.5 * dt);
                const double err = std::max(std::abs(full.u - two.u) / (1.0 + std::abs(two.u)),
                                            std::abs(full.v - two.v) / (1.0 + std::abs(two.v)));
                const bool finite = std::isfinite(err) && std::isfinite(two.v);
                if (!finite || err > cfg.local_tol) {
                    if (0.5 * dt < cfg.min_step) {
                        // Refinement exhausted: either the slope is running off
                        // to infinity (blow-up) or the step really underflowed.
                        if (std::abs(y.v) > std::sqrt(cap) || !finite) traj.blew_up = true;
                        else traj.underflow = true;
                        traj.points.push_back({t, y.u, y.v, y.w});
                        return traj;
                    }
                    dt *= 0.5;
                    continue;
                }
                y = two;
                t += dt;
                if (std::abs(y.v) > cap) {
                    traj.blew_up = true;
                    traj.points.push_back({t, y.u, y.v, y.w});
                    return traj;
                }
                dt *= 2.0;
            }
            traj.points.push_back({t1, y.u, y.v, y.w});
            if (stop && stop(traj.points.back())) {
                traj.stopped = true;
                return traj;
            }
        }
    }
    return traj;
}

/// Conservation law residual max |G(u') - lambda/2 (u^2 - u0^2) + work| with
/// G(p) = p F'(p) - F(p), over samples with t < t_max.
inline double conservation_residual(const Trajectory& traj, const Density& d, double lambda,
                                    double t_max = 1.0) {
    const double u0 = traj.points.front().u;
    double worst = 0.0;
    for (const auto& p : traj.points) {
        if (p.t >= t_max) break;
        const double G = p.du * d.deriv(p.du) - d(p.du);
        worst = std::max(worst, std::abs(G - 0.5 * lambda * (p.u * p.u - u0 * u0) + p.work));
    }
    return worst;
}

namespace detail {

/// Bisection on u0 over [lo, hi] where miss(lo) < 0 < miss(hi). `miss`
/// returns +-inf for trajectories that blew up.
template <class Miss>
ShootResult bisect_u0(double lo, double hi, const Miss& miss, const ShootConfig& cfg) {
    auto [m_lo, t_lo] = miss(lo);
    auto [m_hi, t_hi] = miss(hi);
    ShootResult r;
    if (m_lo == 0.0 || m_hi == 0.0) {
        const bool at_lo = m_lo == 0.0;
        r.u0 = at_lo ? lo : hi;
        r.trajectory = at_lo ? std::move(t_lo) : std::move(t_hi);
        r.residual = 0.0;
        return r;
    }
    if ((m_lo < 0.0) == (m_hi < 0.0)) {
        r.status = ShootStatus::no_bracket;
        const bool use_lo = std::abs(m_lo) <= std::abs(m_hi);
        r.u0 = use_lo ? lo : hi;
        r.trajectory = use_lo ? std::move(t_lo) : std::move(t_hi);
        r.residual = std::abs(use_lo ? m_lo : m_hi);
        r.blew_up = r.trajectory.blew_up;
        return r;
    }
    const bool lo_negative = m_lo < 0.0;
    int it = 0;
    for (; it < cfg.max_iters && hi - lo > cfg.width_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        auto [m, t] = miss(mid);
        if (m == 0.0) {
            lo = hi = mid;
            m_lo = m_hi = 0.0;
            t_lo = t;
            t_hi = std::move(t);
            break;
        }
        if ((m < 0.0) == lo_negative) {
            lo = mid;
            m_lo = m;
            t_lo = std::move(t);
        } else {
            hi = mid;
            m_hi = m;
            t_hi = std::move(t);
        }
    }
    const bool use_lo = std::abs(m_lo) <= std::abs(m_hi);
    r.u0 = use_lo ? lo : hi;
    r.trajectory = use_lo ? std::move(t_lo) : std::move(t_hi);
    r.residual = std::abs(use_lo ? m_lo : m_hi);
    r.blew_up = r.trajectory.blew_up;
    r.iterations = it;
    // The sign change sits on a blow-up discontinuity, not on a root.
    if (!(r.residual <= cfg.residual_tol)) r.status = ShootStatus::no_bracket;
    return r;
}

} // namespace detail

/// Shooting on u0 in [0,1] for u'(1) = 0 over the whole interval.
inline ShootResult shoot(const Datum& f, const Density& d, double lambda, const ShootConfig& cfg = {}) {
    auto stop = [](const TrajectoryPoint& p) { return p.u < -0.5 || p.u > 1.5; };
    auto miss = [&](double u0) {
        auto traj = integrate(f, d, lambda, u0, 1.0, cfg.integrator, stop);
        const auto& end = traj.back();
        double m;
        if (traj.blew_up || traj.underflow) m = end.du > 0.0 ? infinity : -infinity;
        else if (traj.stopped) m = end.u > 0.5 ? infinity : -infinity;
        else m = end.du;
        return std::pair{m, std::move(traj)};
    };
    return detail::bisect_u0(0.0, 1.0, miss, cfg);
}

/// Shooting on grid data, interpolated piecewise linearly between the nodes.
inline ShootResult shoot(const Signal& f, const Density& d, double lambda, const ShootConfig& cfg = {}) {
    return shoot(sampled_datum(f), d, lambda, cfg);
}

/// Shooting for the step datum using its point symmetry about (1/2, 1/2):
/// integrate u'' = lambda u / F''(u') on [0, 1/2] and hit u(1/2) = 1/2.
inline ShootResult shoot_symmetric_step(const Density& d, double lambda, const ShootConfig& cfg = {}) {
    static const Datum zero = constant_datum(0.0);
    auto stop = [](const TrajectoryPoint& p) { return p.u > 0.5 && p.t < 0.5; };
    auto miss = [&](double u0) {
        auto traj = integrate(zero, d, lambda, u0, 0.5, cfg.integrator, stop);
        double m;
        if (traj.blew_up || traj.underflow || traj.stopped) m = infinity;
        else m = traj.back().u - 0.5;
        return std::pair{m, std::move(traj)};
    };
    return detail::bisect_u0(0.0, 0.5, miss, cfg);
}

/// Samples the point-symmetric extension u(t) = 1 - u(1 - t) of a half
/// trajectory on [0, 1/2] at the nodes of `grid`.
inline std::vector<double> symmetric_profile(const Trajectory& half, const Grid& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        out[i] = t <= 0.5 ? half.u_at(t) : 1.0 - half.u_at(1.0 - t);
    }
    return out;
}

/// Samples a full trajectory at the nodes of `grid`.
inline std::vector<double> profile(const Trajectory& traj, const Grid& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = traj.u_at(grid.node(i));
    return out;
}

} // namespace tvreg
