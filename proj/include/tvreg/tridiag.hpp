#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tvreg/errors.hpp"

namespace tvreg {

/// Symmetric tridiagonal matrix: diag has n entries, off has n - 1.
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(std::span<const double> x) const {
        const std::size_t n = diag.size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += off[i - 1] * x[i - 1];
            if (i + 1 < n) s += off[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }

    /// Solves A x = b by LDL^T elimination; throws if a pivot is not positive.
    std::vector<double> solve(std::span<const double> b) const {
        const std::size_t n = diag.size();
        std::vector<double> d(n), l(n > 0 ? n - 1 : 0), x(b.begin(), b.end());
        d[0] = diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            if (!(d[i - 1] > 0.0)) throw ConvergenceError("tridiagonal solve: matrix is not positive definite");
            l[i - 1] = off[i - 1] / d[i - 1];
            d[i] = diag[i] - l[i - 1] * off[i - 1];
        }
        if (!(d[n - 1] > 0.0)) throw ConvergenceError("tridiagonal solve: matrix is not positive definite");
        for (std::size_t i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
        for (std::size_t i = 0; i < n; ++i) x[i] /= d[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= l[i] * x[i + 1];
        return x;
    }

    /// Smallest eigenvalue by inverse iteration (matrix must be SPD).
    double smallest_eigenvalue(int iterations = 200) const {
        const std::size_t n = diag.size();
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
        double rayleigh = 0.0;
        for (int it = 0; it < iterations; ++it) {
            double norm = 0.0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
            auto w = solve(v);
            double vw = 0.0;
            for (std::size_t i = 0; i < n; ++i) vw += v[i] * w[i];
            const double next = 1.0 / vw;
            v = std::move(w);
            if (it > 0 && std::abs(next - rayleigh) <= 1e-13 * std::abs(next)) return next;
            rayleigh = next;
        }
        return rayleigh;
    }
};

} // namespace tvreg
