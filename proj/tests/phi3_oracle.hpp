#pragma once
// Closed-form solution of the step problem for Phi_3, used as an oracle.
//
// On [0, 1/2) the first integral G(u') = lambda/2 (u^2 - u0^2) holds with
// G(p) = p F'(p) - F(p) = (p / (1 + p))^2 / 2. Writing w = p / (1 + p) =
// sqrt(lambda (u^2 - u0^2)) and integrating dt = (1/w - 1) du gives
//   t(u) = acosh(u / u0) / sqrt(lambda) - (u - u0).
// Continuous solution: t(1/2) = 1/2 with w < 1 on the way.
// Jump solution: the slope becomes infinite (w = 1) exactly at t = 1/2,
// i.e. at u_e = sqrt(u0^2 + 1/lambda).

#include <cmath>
#include <functional>

namespace phi3_oracle {

inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
    double glo = g(lo);
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double gm = g(mid);
        if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// u0 of the continuous solution (NaN if none exists).
inline double continuous_u0(double lambda) {
    const double s = std::sqrt(lambda);
    auto g = [s](double u0) { return std::acosh(0.5 / u0) - s * (1.0 - u0); };
    const double u0 = bisect(g, 1e-12, 0.5 - 1e-15);
    if (!(lambda * (0.25 - u0 * u0) < 1.0)) return std::nan("");
    return u0;
}

/// u0 of the jump solution (blow-up reached at t = 1/2).
inline double jump_u0(double lambda) {
    const double s = std::sqrt(lambda);
    auto g = [lambda, s](double u0) {
        const double ue = std::sqrt(u0 * u0 + 1.0 / lambda);
        return std::acosh(ue / u0) / s - (ue - u0) - 0.5;
    };
    return bisect(g, 1e-12, 0.5);
}

/// Jump height 1 - 2 u_e of the jump solution.
inline double jump_height(double lambda) {
    const double u0 = jump_u0(lambda);
    return 1.0 - 2.0 * std::sqrt(u0 * u0 + 1.0 / lambda);
}

/// Critical lambda: the continuous branch reaches infinite slope at t = 1/2.
inline double lambda_crit() {
    // On the boundary both conditions hold: lambda (1/4 - u0^2) = 1 and t(1/2) = 1/2.
    auto g = [](double lambda) {
        const double u0 = std::sqrt(0.25 - 1.0 / lambda);
        return std::acosh(0.5 / u0) - std::sqrt(lambda) * (1.0 - u0);
    };
    return bisect(g, 4.0 + 1e-9, 8.0);
}

} // namespace phi3_oracle
