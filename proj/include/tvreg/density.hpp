#pragma once
/*
 * Linear-growth densities F: R -> [0, inf) with F even, F(0) = F'(0) = 0,
 * F' bounded and F'' > 0, together with the thresholds derived from them:
 *
 *   lambda_inf = lim_{p->inf} F'(p)            (saturation of the dual variable)
 *   omega_inf  = lim_{p->inf} p F'(p) - F(p)   (boundary value of F*)
 *   lambda_mu  = (1/c1) int_1^inf s (1+s)^-mu ds   for mu-elliptic F
 *
 * Two families have closed forms for everything: the mu-elliptic density
 * Phi_mu(|p|) and the regularized TV density F_eps(p) = sqrt(eps^2+p^2) - eps.
 * User densities go through the numerical limit and root-finding paths.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tvreg/errors.hpp"

namespace tvreg {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// F''(p) >= c1 (1+|p|)^-mu and F''(p) <= c2 (1+|p|)^-1.
struct Ellipticity {
    double mu;
    double c1;
    double c2;
};

/// Model interface behind Density. Families override the optional closed
/// forms; returning std::nullopt selects the generic numerical path.
class DensityModel {
public:
    virtual ~DensityModel() = default;

    virtual double value(double p) const = 0;
    virtual double deriv(double p) const = 0;
    virtual double second(double p) const = 0;

    virtual std::optional<double> closed_lambda_inf() const { return std::nullopt; }
    virtual std::optional<double> closed_omega_inf() const { return std::nullopt; }
    /// Only called with 0 <= q < lambda_inf.
    virtual std::optional<double> closed_inv_deriv(double) const { return std::nullopt; }
    /// Only called with 0 <= q < lambda_inf.
    virtual std::optional<double> closed_conjugate(double) const { return std::nullopt; }

    virtual std::optional<Ellipticity> ellipticity() const { return std::nullopt; }
    virtual std::string name() const = 0;
};

/// Immutable, cheaply copyable handle to a density model.
class Density {
public:
    explicit Density(std::shared_ptr<const DensityModel> model) : model_(std::move(model)) {
        if (!model_) throw InvalidArgument("Density: null model");
    }

    double operator()(double p) const { return model_->value(p); }
    double deriv(double p) const { return model_->deriv(p); }
    double second(double p) const { return model_->second(p); }

    std::optional<Ellipticity> ellipticity() const { return model_->ellipticity(); }
    std::string name() const { return model_->name(); }
    const DensityModel& model() const { return *model_; }

private:
    std::shared_ptr<const DensityModel> model_;
};

namespace detail {

inline double sign_of(double p) { return p < 0.0 ? -1.0 : 1.0; }

class PhiMu final : public DensityModel {
public:
    explicit PhiMu(double mu) : mu_(mu) {}

    double value(double p) const override {
        const double r = std::abs(p);
        if ((mu_ + 1.0) * r < 0.05) {
            // sum_j binom(-mu, j) r^(j+2) / ((j+1)(j+2)); the closed form cancels here
            double coef = 1.0;  // binom(-mu, j) r^j
            double sum = 0.0;
            for (int j = 0; j < 60; ++j) {
                const double term = coef / ((j + 1.0) * (j + 2.0));
                sum += term;
                if (std::abs(term) < 1e-17 * std::abs(sum)) break;
                coef *= -(mu_ + j) / (j + 1.0) * r;
            }
            return r * r * sum;
        }
        if (mu_ == 2.0) return r - std::log1p(r);
        const double a = mu_ - 1.0;
        const double b = mu_ - 2.0;
        return r / a + std::expm1(-b * std::log1p(r)) / (a * b);
    }

    double deriv(double p) const override {
        const double a = mu_ - 1.0;
        return sign_of(p) * (-std::expm1(-a * std::log1p(std::abs(p)))) / a;
    }

    double second(double p) const override { return std::exp(-mu_ * std::log1p(std::abs(p))); }

    std::optional<double> closed_lambda_inf() const override { return 1.0 / (mu_ - 1.0); }

    std::optional<double> closed_omega_inf() const override {
        if (mu_ <= 2.0) return infinity;
        return 1.0 / ((mu_ - 1.0) * (mu_ - 2.0));
    }

    std::optional<double> closed_inv_deriv(double q) const override {
        const double a = mu_ - 1.0;
        return std::expm1(-std::log1p(-a * q) / a);
    }

    // F*(q) = int_0^q (F')^-1(t) dt.
    std::optional<double> closed_conjugate(double q) const override {
        const double a = mu_ - 1.0;
        if (mu_ == 2.0) return -std::log1p(-q) - q;
        const double b = mu_ - 2.0;
        return -std::expm1((b / a) * std::log1p(-a * q)) / b - q;
    }

    std::optional<Ellipticity> ellipticity() const override { return Ellipticity{mu_, 1.0, 1.0}; }

    std::string name() const override {
        std::ostringstream os;
        os << "phi-mu(mu=" << mu_ << ")";
        return os.str();
    }

private:
    double mu_;
};

class FEps final : public DensityModel {
public:
    explicit FEps(double eps) : eps_(eps) {}

    double value(double p) const override { return p * p / (std::hypot(eps_, p) + eps_); }
    double deriv(double p) const override { return p / std::hypot(eps_, p); }
    double second(double p) const override {
        const double r = std::hypot(eps_, p);
        return eps_ * eps_ / (r * r * r);
    }

    std::optional<double> closed_lambda_inf() const override { return 1.0; }
    std::optional<double> closed_omega_inf() const override { return eps_; }

    std::optional<double> closed_inv_deriv(double q) const override {
        return eps_ * q / std::sqrt((1.0 - q) * (1.0 + q));
    }

    std::optional<double> closed_conjugate(double q) const override {
        return eps_ * q * q / (1.0 + std::sqrt((1.0 - q) * (1.0 + q)));
    }

    std::string name() const override {
        std::ostringstream os;
        os << "f-eps(eps=" << eps_ << ")";
        return os.str();
    }

private:
    double eps_;
};

class CustomDensity final : public DensityModel {
public:
    using Fn = std::function<double(double)>;

    CustomDensity(std::string name, Fn f, Fn df, Fn d2f, std::optional<Ellipticity> ell)
        : name_(std::move(name)), f_(std::move(f)), df_(std::move(df)), d2f_(std::move(d2f)),
          ell_(ell) {}

    double value(double p) const override { return f_(p); }
    double deriv(double p) const override { return df_(p); }
    double second(double p) const override { return d2f_(p); }
    std::optional<Ellipticity> ellipticity() const override { return ell_; }
    std::string name() const override { return name_; }

private:
    std::string name_;
    Fn f_, df_, d2f_;
    std::optional<Ellipticity> ell_;
};

/// Outcome of a numerical limit along p = 2^k.
struct LimitEstimate {
    double value;
    int samples;
};

/// Limit of g(p) as p -> inf along p = 2^k, k = 0..60.
///
/// Converged when three successive values agree within 1e-9; divergent when a
/// value exceeds 1e12 or the increments stop decaying (logarithmic growth).
/// `scale(p)` bounds the magnitude of the terms that cancel inside g, so that
/// sampling stops once rounding would exceed the tolerance; the tail is then
/// extrapolated with Aitken's delta-squared when it is geometric.
inline LimitEstimate numeric_limit(const std::function<double(double)>& g,
                                   const std::function<double(double)>& scale,
                                   const char* what) {
    constexpr double agree_tol = 1e-9;
    constexpr double diverge_cap = 1e12;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::vector<double> v;
    for (int k = 0; k <= 60; ++k) {
        const double p = std::ldexp(1.0, k);
        const double roundoff = 8.0 * eps * scale(p);
        if (roundoff > 1e-2 * agree_tol && v.size() >= 4) break;
        const double x = g(p);
        if (!std::isfinite(x)) break;
        if (std::abs(x) > diverge_cap) return {infinity, k + 1};
        v.push_back(x);
        const std::size_t m = v.size();
        if (m >= 3) {
            const double tol = agree_tol * (1.0 + std::abs(x));
            if (std::abs(v[m - 1] - v[m - 2]) < tol && std::abs(v[m - 2] - v[m - 3]) < tol)
                return {x, static_cast<int>(m)};
        }
    }
    const std::size_t m = v.size();
    if (m < 4) throw ConvergenceError(std::string(what) + ": too few samples for a limit");
    const double d1 = v[m - 1] - v[m - 2];
    const double d2 = v[m - 2] - v[m - 3];
    const double d3 = v[m - 3] - v[m - 4];
    if (d1 > 0.0 && d2 > 0.0 && d3 > 0.0 && d1 / d2 > 0.9 && d2 / d3 > 0.9)
        return {infinity, static_cast<int>(m)};
    if (d2 != 0.0 && d3 != 0.0) {
        const double r1 = d1 / d2;
        const double r2 = d2 / d3;
        if (std::abs(r1) < 0.9 && std::abs(r1 - r2) < 0.05)
            return {v[m - 1] + d1 * r1 / (1.0 - r1), static_cast<int>(m)};
    }
    throw ConvergenceError(std::string(what) + ": sequence did not stabilize by p = 2^60");
}

} // namespace detail

/// The mu-elliptic density Phi_mu(|p|), mu > 1.
inline Density make_phi_mu(double mu) {
    if (!(mu > 1.0) || !std::isfinite(mu))
        throw InvalidArgument("phi-mu: mu must be a finite number > 1");
    return Density(std::make_shared<detail::PhiMu>(mu));
}

/// The regularized TV density sqrt(eps^2 + p^2) - eps, eps > 0.
inline Density make_f_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw InvalidArgument("f-eps: eps must be a finite number > 0");
    return Density(std::make_shared<detail::FEps>(eps));
}

/// A density from user-supplied F, F', F''. The caller is responsible for
/// evenness and strict convexity; thresholds are computed numerically.
inline Density make_custom_density(std::string name, detail::CustomDensity::Fn f,
                                   detail::CustomDensity::Fn df, detail::CustomDensity::Fn d2f,
                                   std::optional<Ellipticity> ell = std::nullopt) {
    if (!f || !df || !d2f) throw InvalidArgument("custom density: F, F', F'' must all be set");
    if (ell && (!(ell->mu > 1.0) || !(ell->c1 > 0.0) || !(ell->c2 > 0.0)))
        throw InvalidArgument("custom density: ellipticity needs mu > 1, c1 > 0, c2 > 0");
    return Density(std::make_shared<detail::CustomDensity>(std::move(name), std::move(f),
                                                           std::move(df), std::move(d2f), ell));
}

inline double lambda_inf(const Density& d) {
    if (auto v = d.model().closed_lambda_inf()) return *v;
    const auto est = detail::numeric_limit([&](double p) { return d.deriv(p); },
                                           [&](double p) { return std::abs(d.deriv(p)); },
                                           "lambda_inf");
    if (!std::isfinite(est.value)) throw ConvergenceError("lambda_inf: F' is unbounded");
    return est.value;
}

inline double omega_inf(const Density& d) {
    if (auto v = d.model().closed_omega_inf()) return *v;
    return detail::numeric_limit(
               [&](double p) { return p * d.deriv(p) - d(p); },
               [&](double p) { return std::abs(p * d.deriv(p)) + std::abs(d(p)); }, "omega_inf")
        .value;
}

/// Nagumo-type bound (1/c1) int_1^inf s (1+s)^-mu ds; +inf for mu <= 2.
inline double lambda_mu(const Density& d) {
    const auto ell = d.ellipticity();
    if (!ell) throw InvalidArgument("lambda_mu: density has no mu-ellipticity descriptor");
    const double mu = ell->mu;
    if (mu <= 2.0) return infinity;
    // substitute x = 1 + s: int_2^inf (x - 1) x^-mu dx
    return (std::pow(2.0, 2.0 - mu) / (mu - 2.0) - std::pow(2.0, 1.0 - mu) / (mu - 1.0)) / ell->c1;
}

/// Unique p with F'(p) = q, for |q| < lambda_inf. Odd in q.
inline double inv_deriv(const Density& d, double q) {
    const double lam = lambda_inf(d);
    if (!(std::abs(q) < lam)) throw DomainError("inv_deriv: |q| must be below lambda_inf");
    if (q == 0.0) return 0.0;
    const double s = detail::sign_of(q);
    const double aq = std::abs(q);
    if (auto v = d.model().closed_inv_deriv(aq)) return s * *v;

    // Bracket, then bisection with Newton steps accepted when they stay inside.
    double lo = 0.0;
    double hi = 1.0;
    for (int k = 0; d.deriv(hi) < aq; ++k) {
        if (k > 1000) throw ConvergenceError("inv_deriv: could not bracket the root");
        lo = hi;
        hi *= 2.0;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double r = d.deriv(x) - aq;
        if (std::abs(r) <= 1e-14) return s * x;
        if (r > 0.0) hi = x;
        else lo = x;
        const double fpp = d.second(x);
        double next = fpp > 0.0 ? x - r / fpp : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return s * next;
        x = next;
    }
    throw ConvergenceError("inv_deriv: no convergence in 200 iterations");
}

/// Convex conjugate F*(q) = sup_p (q p - F(p)), for |q| < lambda_inf. Even in q.
inline double conjugate(const Density& d, double q) {
    const double lam = lambda_inf(d);
    const double aq = std::abs(q);
    if (!(aq < lam)) throw DomainError("conjugate: |q| must be below lambda_inf");
    if (aq == 0.0) return 0.0;
    if (auto v = d.model().closed_conjugate(aq)) return *v;
    // F* is increasing on [0, lambda_inf); close to the edge report the limit.
    if (aq > (1.0 - 1e-12) * lam) return omega_inf(d);
    const double p = inv_deriv(d, aq);
    return aq * p - d(p);
}

/// Slope p* with F'(p*) = (1 - rel) lambda_inf.
inline double slope_cap(const Density& d, double rel) {
    return inv_deriv(d, (1.0 - rel) * lambda_inf(d));
}

struct CritBracket {
    double lower;
    double upper;
};

/// Analytic thresholds of a density.
struct ThresholdReport {
    double lambda_inf;
    double omega_inf;
    std::optional<double> lambda_mu;      // only for mu-elliptic densities
    std::optional<CritBracket> crit_bracket;  // only when omega_inf < inf
};

/// max{lambda_inf, 8 omega_inf} <= lambda_crit <= 8 (lambda_inf + omega_inf).
inline std::optional<CritBracket> crit_bracket_of(double lam_inf, double om_inf) {
    if (!std::isfinite(om_inf)) return std::nullopt;
    return CritBracket{std::max(lam_inf, 8.0 * om_inf), 8.0 * (lam_inf + om_inf)};
}

inline ThresholdReport thresholds(const Density& d) {
    ThresholdReport r{};
    r.lambda_inf = lambda_inf(d);
    r.omega_inf = omega_inf(d);
    if (d.ellipticity()) r.lambda_mu = lambda_mu(d);
    r.crit_bracket = crit_bracket_of(r.lambda_inf, r.omega_inf);
    return r;
}

} // namespace tvreg
