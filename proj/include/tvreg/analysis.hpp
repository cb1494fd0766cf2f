#pragma once
// Regularity classification, analytic bounds, and the lambda_crit search.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvreg/bvp.hpp"
#include "tvreg/density.hpp"
#include "tvreg/errors.hpp"
#include "tvreg/grid_energy.hpp"
#include "tvreg/minimizer.hpp"
#include "tvreg/signal.hpp"

namespace tvreg {

struct JumpOptions {
    double tol_sing = 1e-3;             // relative distance of |sigma| to lambda_inf
    double height_floor_factor = 5.0;   // jump_height_floor = factor * h
    double slope_blowup_factor = 10.0;  // multiple of the median slope
};

enum class Classification { smooth, near_singular, jump };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::smooth: return "smooth";
        case Classification::near_singular: return "near-singular";
        case Classification::jump: return "jump";
    }
    return "?";
}

struct Jump {
    double location;  // height-weighted midpoint of the merged edges
    double height;    // signed u increase across the merged edges
    std::size_t first_edge;
    std::size_t last_edge;
};

struct RegularityReport {
    std::vector<Jump> jumps;
    double max_slope = 0.0;
    double max_sigma_ratio = 0.0;  // max over edges |F'(s_e)| / lambda_inf
    std::vector<bool> singular_mask;
    Classification classification = Classification::smooth;
};

/// Flags edge e as (part of) a jump when |du| > height floor, |s_e| exceeds
/// slope_blowup_factor times the median slope, and sigma_e = F'(s_e) is within
/// tol_sing of +-lambda_inf. Adjacent flagged edges of one sign merge.
inline RegularityReport detect_jumps(std::span<const double> u, std::span<const double> sigma_nodes,
                                     const Density& d, const JumpOptions& opt = {}) {
    if (u.size() != sigma_nodes.size()) throw GridMismatch("detect_jumps: u and sigma sizes differ");
    const Grid g(u.size());
    const double lam = lambda_inf(d);
    const double sing_level = (1.0 - opt.tol_sing) * lam;
    const auto s = slopes(u, g);

    std::vector<double> abs_s(s.size());
    std::transform(s.begin(), s.end(), abs_s.begin(), [](double x) { return std::abs(x); });
    auto sorted = abs_s;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double typical = sorted[sorted.size() / 2];

    RegularityReport rep;
    rep.singular_mask.assign(u.size(), false);
    std::vector<bool> flagged(s.size(), false);
    for (std::size_t e = 0; e < s.size(); ++e) {
        const double sig = std::abs(d.deriv(s[e]));
        rep.max_slope = std::max(rep.max_slope, abs_s[e]);
        rep.max_sigma_ratio = std::max(rep.max_sigma_ratio, sig / lam);
        const bool singular = sig >= sing_level;
        if (singular) rep.singular_mask[e] = rep.singular_mask[e + 1] = true;
        flagged[e] = singular && std::abs(u[e + 1] - u[e]) > opt.height_floor_factor * g.h() &&
                     abs_s[e] > opt.slope_blowup_factor * typical;
    }
    for (std::size_t i = 0; i < u.size(); ++i)
        if (std::abs(sigma_nodes[i]) >= sing_level) rep.singular_mask[i] = true;

    for (std::size_t e = 0; e < s.size();) {
        if (!flagged[e]) {
            ++e;
            continue;
        }
        std::size_t last = e;
        while (last + 1 < s.size() && flagged[last + 1] && (s[last + 1] > 0) == (s[e] > 0)) ++last;
        double weight = 0.0;
        double where = 0.0;
        for (std::size_t k = e; k <= last; ++k) {
            const double du = std::abs(u[k + 1] - u[k]);
            weight += du;
            where += du * g.midpoint(k);
        }
        rep.jumps.push_back({where / weight, u[last + 1] - u[e], e, last});
        e = last + 1;
    }

    if (!rep.jumps.empty()) rep.classification = Classification::jump;
    else if (std::find(rep.singular_mask.begin(), rep.singular_mask.end(), true) != rep.singular_mask.end())
        rep.classification = Classification::near_singular;
    else rep.classification = Classification::smooth;
    return rep;
}

inline RegularityReport detect_jumps(const SolveResult& r, const Density& d, const JumpOptions& opt = {}) {
    return detect_jumps(r.u, r.sigma, d, opt);
}

/// Analytic bracket for lambda_crit; throws NoJumpRegime when omega_inf = inf
/// (every minimizer is then C^{1,1}, whatever lambda).
inline CritBracket crit_bracket(const Density& d) {
    auto b = crit_bracket_of(lambda_inf(d), omega_inf(d));
    if (!b) throw NoJumpRegime("crit_bracket: omega_inf is infinite, no jump regime exists");
    return *b;
}

/// lambda (1/2 + ||f'||_1) < omega_inf, with ||f'||_1 = sum |df|.
inline bool c11_criterion(const Signal& f, const Density& d, double lambda) {
    return lambda * (0.5 + f.total_variation()) < omega_inf(d);
}

// ---------------------------------------------------------------------------
// lambda_crit

struct CritTrial {
    double lambda;
    bool shoot_continuous;
    std::optional<Classification> minimizer;
    bool consistent = true;
};

struct CritSearchOptions {
    double tol = 0.02;
    bool cross_check = true;
    std::size_t n = 1001;
    double lambda_max = 100.0;
    ShootConfig shoot{};
    SolverConfig solver{};
    JumpOptions jumps{};
};

struct CritSearchResult {
    std::optional<double> lambda_crit_est;  // empty: continuous for every lambda tried
    std::optional<CritBracket> bracket_analytic;
    double lower = 0.0;  // largest lambda classified continuous
    double upper = 0.0;  // smallest lambda classified discontinuous
    std::vector<CritTrial> history;
    int inconsistencies = 0;
};

namespace detail {

inline ShootResult classify_by_shooting(const Datum& f, const Density& d, double lambda, const ShootConfig& cfg) {
    if (f.kind() == Datum::Kind::step) return shoot_symmetric_step(d, lambda, cfg);
    return shoot(f, d, lambda, cfg);
}

} // namespace detail

/// Bisection on lambda using the shooting classifier (continuous iff a
/// bracketed root exists), optionally cross-checked by the minimizer.
inline CritSearchResult find_lambda_crit(const Density& d, const Datum& f, const CritSearchOptions& opt = {}) {
    if (!(opt.tol > 0.0)) throw InvalidArgument("find_lambda_crit: tol must be > 0");
    CritSearchResult res;
    const double lam_inf = lambda_inf(d);
    res.bracket_analytic = crit_bracket_of(lam_inf, omega_inf(d));
    const Grid grid(opt.n);
    const Signal sampled = f.sample(grid);

    auto trial = [&](double lambda) {
        CritTrial t{lambda, detail::classify_by_shooting(f, d, lambda, opt.shoot).continuous(), std::nullopt};
        if (opt.cross_check) {
            const auto sol = solve(sampled, d, lambda, opt.solver);
            t.minimizer = detect_jumps(sol, d, opt.jumps).classification;
            t.consistent = t.shoot_continuous == (*t.minimizer != Classification::jump);
            if (!t.consistent) ++res.inconsistencies;
        }
        res.history.push_back(t);
        return t.shoot_continuous;
    };

    double lo = 0.0;
    double hi = 0.0;
    if (res.bracket_analytic) {
        lo = res.bracket_analytic->lower;
        hi = res.bracket_analytic->upper;
        while (!trial(lo)) {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-3 * lam_inf) throw ConvergenceError("find_lambda_crit: no continuous regime found");
        }
        while (trial(hi)) {
            lo = hi;
            hi *= 2.0;
            if (hi > opt.lambda_max) {
                res.lower = lo;
                return res;
            }
        }
    } else {
        // omega_inf = inf: scan for a discontinuity up to lambda_max.
        bool found = false;
        for (double base = 1.0; !found && lo < opt.lambda_max; base *= 10.0) {
            for (double m : {1.0, 2.0, 5.0}) {
                const double lambda = std::min(base * m, opt.lambda_max);
                if (lambda <= lo) continue;
                if (!trial(lambda)) {
                    hi = lambda;
                    found = true;
                    break;
                }
                lo = lambda;
                if (lambda >= opt.lambda_max) break;
            }
        }
        if (!found) {
            res.lower = lo;
            return res;
        }
    }
    while (hi - lo > opt.tol) {
        const double mid = 0.5 * (lo + hi);
        if (trial(mid)) lo = mid;
        else hi = mid;
    }
    res.lower = lo;
    res.upper = hi;
    res.lambda_crit_est = 0.5 * (lo + hi);
    return res;
}

// ---------------------------------------------------------------------------
// Bounds for the step datum

struct BoundCheck {
    std::string name;
    double value;
    double bound;
    bool passed;
};

struct BoundsReport {
    double u0 = 0.0;
    double u0_bound = 0.0;                  // sqrt(2 lambda_inf / lambda)
    double sup_left = 0.0;                  // sup of u on [0, 1/2)
    std::optional<double> sup_bound;        // sqrt(2 (lambda_inf + omega_inf) / lambda)
    std::optional<double> envelope_bound;   // sqrt(u0^2 + 2 omega_inf / lambda)
    bool jump_certified = false;            // sup_bound < 1/2
    std::vector<BoundCheck> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; });
    }
};

namespace detail {

inline BoundsReport step_bounds(double u0, double sup_left, const Density& d, double lambda, double tol) {
    if (!(lambda > 0.0)) throw InvalidArgument("check_bounds: lambda must be > 0");
    const double lam = lambda_inf(d);
    const double om = omega_inf(d);
    BoundsReport b;
    b.u0 = u0;
    b.sup_left = sup_left;
    b.u0_bound = std::sqrt(2.0 * lam / lambda);
    b.checks.push_back({"u0_bound", u0, b.u0_bound, u0 <= b.u0_bound + tol});
    if (std::isfinite(om)) {
        b.sup_bound = std::sqrt(2.0 * (lam + om) / lambda);
        b.envelope_bound = std::sqrt(u0 * u0 + 2.0 * om / lambda);
        b.jump_certified = *b.sup_bound < 0.5;
        b.checks.push_back({"sup_bound", sup_left, *b.sup_bound, sup_left <= *b.sup_bound + tol});
        b.checks.push_back({"envelope_bound", sup_left, *b.envelope_bound, sup_left <= *b.envelope_bound + tol});
    }
    return b;
}

} // namespace detail

inline BoundsReport check_bounds(const SolveResult& r, const Density& d, double lambda, double tol = 1e-6) {
    const Grid g(r.u.size());
    double sup_left = r.u.front();
    for (std::size_t i = 0; i < r.u.size() && g.node(i) < 0.5; ++i) sup_left = std::max(sup_left, r.u[i]);
    return detail::step_bounds(r.u.front(), sup_left, d, lambda, tol);
}

/// Shooting variant: adds the pointwise envelope identity
/// u(s) = sqrt(u0^2 + (2/lambda)(u' F'(u') - F(u'))) on [0, 1/2).
inline BoundsReport check_bounds(const ShootResult& r, const Density& d, double lambda, double tol = 1e-6) {
    double sup_left = r.u0;
    double env = 0.0;
    for (const auto& p : r.trajectory.points) {
        if (p.t >= 0.5) break;
        sup_left = std::max(sup_left, p.u);
        const double G = p.du * d.deriv(p.du) - d(p.du);
        env = std::max(env, std::abs(p.u - std::sqrt(r.u0 * r.u0 + 2.0 / lambda * G)));
    }
    auto b = detail::step_bounds(r.u0, sup_left, d, lambda, tol);
    b.checks.push_back({"envelope_identity", env, tol, env <= tol});
    return b;
}

// ---------------------------------------------------------------------------
// Symmetry about (1/2, 1/2)

/// max_i |u_i + u_{n-1-i} - 1|.
inline double check_symmetry(std::span<const double> u) {
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(u[i] + u[u.size() - 1 - i] - 1.0));
    return worst;
}

/// Same measure, with nodes paired by the reflection under which the sampled
/// data itself is point-symmetric (i <-> n-1-i+k, k in {-1, 0, 1}). Nodes next
/// to the given jumps, and their partners, are skipped.
inline double check_symmetry(std::span<const double> u, const Signal& f, std::span<const Jump> skip = {}) {
    if (u.size() != f.size()) throw GridMismatch("check_symmetry: u and f sizes differ");
    const long n = static_cast<long>(u.size());
    auto partner = [n](long i, long k) { return n - 1 - i + k; };
    long best_k = 0;
    long best_bad = n + 1;
    for (long k : {0L, 1L, -1L}) {
        long bad = 0;
        for (long i = 0; i < n; ++i) {
            const long j = partner(i, k);
            if (j >= 0 && j < n && std::abs(f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(j)] - 1.0) > 1e-12) ++bad;
        }
        if (bad < best_bad) {
            best_bad = bad;
            best_k = k;
        }
    }
    std::vector<bool> skipped(u.size(), false);
    for (const auto& jmp : skip)
        for (std::size_t i = jmp.first_edge; i <= jmp.last_edge + 1 && i < u.size(); ++i) {
            skipped[i] = true;
            const long j = partner(static_cast<long>(i), best_k);
            if (j >= 0 && j < n) skipped[static_cast<std::size_t>(j)] = true;
        }
    double worst = 0.0;
    for (long i = 0; i < n; ++i) {
        const long j = partner(i, best_k);
        if (j < 0 || j >= n || skipped[static_cast<std::size_t>(i)]) continue;
        worst = std::max(worst, std::abs(u[static_cast<std::size_t>(i)] + u[static_cast<std::size_t>(j)] - 1.0));
    }
    return worst;
}

} // namespace tvreg
