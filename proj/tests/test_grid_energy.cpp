#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tvreg/grid_energy.hpp"

using namespace tvreg;

namespace {

Signal signal_of(std::vector<double> v) {
    const Grid g(v.size());
    return Signal(g, std::move(v));
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = U(rng);
    return v;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Number of negative eigenvalues of a symmetric tridiagonal matrix (Sturm count of LDL^T pivots).
int negative_eigenvalues(const SymTridiag& H) {
    int count = 0;
    double d = H.diag[0];
    if (d < 0) ++count;
    for (std::size_t i = 1; i < H.size(); ++i) {
        d = H.diag[i] - H.off[i - 1] * H.off[i - 1] / d;
        if (d < 0) ++count;
    }
    return count;
}

} // namespace

TEST(Energy, ConstantPairIsZero) {
    const auto d = make_phi_mu(3.0);
    const auto f = signal_of(std::vector<double>(9, 0.3));
    for (double lambda : {0.1, 5.0})
        for (double delta : {0.0, 0.5}) {
            const auto e = energy(f.values(), f, d, lambda, delta);
            EXPECT_EQ(e.total, 0.0);
        }
}

TEST(Energy, FidelityVanishesWhenUEqualsF) {
    const auto d = make_phi_mu(2.0);
    const auto f = signal_of({0.0, 0.2, 0.9, 0.4, 1.0});
    const auto e = energy(f.values(), f, d, 3.0, 0.0);
    EXPECT_EQ(e.fidelity, 0.0);
    const double h = 0.25;
    double ref = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) ref += h * d((f[i + 1] - f[i]) / h);
    EXPECT_NEAR(e.total, ref, 1e-15);
    EXPECT_EQ(e.total, e.smoothing + e.fidelity + e.tikhonov);
}

TEST(Energy, TwoNodeHandValues) {
    // Phi_3(1) = 1/4; fidelity = (1/2) * h * (w0 * 0 + w1 * 1) = 1/4 with h = 1, w = 1/2
    const auto d = make_phi_mu(3.0);
    const auto f = signal_of({0.0, 0.0});
    const std::vector<double> u{0.0, 1.0};
    const auto e = energy(u, f, d, 1.0, 0.0);
    EXPECT_NEAR(e.smoothing, 0.25, 1e-15);
    EXPECT_NEAR(e.fidelity, 0.25, 1e-15);
    EXPECT_EQ(e.tikhonov, 0.0);
    const auto t = energy(u, f, d, 1.0, 0.2);
    EXPECT_NEAR(t.tikhonov, 0.1, 1e-15);
    EXPECT_NEAR(t.total, 0.6, 1e-15);
}

TEST(Gradient, TwoNodeSmallLambda) {
    const auto d = make_phi_mu(3.0);
    const auto f = signal_of({0.0, 0.0});
    const std::vector<double> u{0.0, 1.0};
    const auto g = gradient(u, f, d, 1e-12, 0.0);
    EXPECT_NEAR(g[0], -0.375, 1e-12);
    EXPECT_NEAR(g[1], 0.375, 1e-12);
}

TEST(Gradient, StationaryAtConstant) {
    const auto f = signal_of(std::vector<double>(7, 0.6));
    for (double x : gradient(f.values(), f, make_f_eps(1.0), 2.0, 0.1)) EXPECT_EQ(x, 0.0);
}

TEST(Gradient, MatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    const std::vector<Density> ds{make_phi_mu(3.0), make_phi_mu(2.0), make_f_eps(0.5)};
    for (std::size_t n : {9u, 33u, 129u}) {
        for (int trial = 0; trial < 6; ++trial) {
            const auto& d = ds[static_cast<std::size_t>(trial) % ds.size()];
            const auto f = signal_of(random_vector(rng, n));
            auto u = random_vector(rng, n);
            const double lambda = 0.5 + 5.0 * std::uniform_real_distribution<double>()(rng);
            const double delta = trial % 2 ? 0.0 : 1e-3;
            const auto g = gradient(u, f, d, lambda, delta);
            std::vector<double> fd(n);
            const double step = 1e-5;
            for (std::size_t i = 0; i < n; ++i) {
                auto up = u, um = u;
                up[i] += step;
                um[i] -= step;
                fd[i] = (energy(up, f, d, lambda, delta).total - energy(um, f, d, lambda, delta).total) / (2 * step);
            }
            std::vector<double> diff(n);
            for (std::size_t i = 0; i < n; ++i) diff[i] = g[i] - fd[i];
            EXPECT_LE(inf_norm(diff), 1e-5 * inf_norm(g)) << "n=" << n << " " << d.name();
        }
    }
}

TEST(Hessian, DirectionalFiniteDifferences) {
    std::mt19937_64 rng(12);
    for (std::size_t n : {9u, 33u, 129u}) {
        for (int trial = 0; trial < 4; ++trial) {
            const auto d = trial % 2 ? make_phi_mu(3.0) : make_f_eps(2.0);
            const auto f = signal_of(random_vector(rng, n));
            const auto u = random_vector(rng, n);
            const auto v = random_vector(rng, n, -1.0, 1.0);
            const double lambda = 2.0, delta = 1e-2;
            const auto Hv = hessian(u, f, d, lambda, delta).apply(v);
            const double eps = 1e-6;
            auto up = u, um = u;
            for (std::size_t i = 0; i < n; ++i) {
                up[i] += eps * v[i];
                um[i] -= eps * v[i];
            }
            const auto gp = gradient(up, f, d, lambda, delta);
            const auto gm = gradient(um, f, d, lambda, delta);
            std::vector<double> diff(n);
            for (std::size_t i = 0; i < n; ++i) diff[i] = Hv[i] - (gp[i] - gm[i]) / (2 * eps);
            EXPECT_LE(inf_norm(diff), 1e-5 * inf_norm(Hv)) << "n=" << n;
        }
    }
}

TEST(Hessian, StructureAtConstant) {
    const std::size_t n = 11;
    const auto f = signal_of(std::vector<double>(n, 0.5));
    const auto H = hessian(f.values(), f, make_phi_mu(4.0), 1.5, 0.0);
    const double h = 0.1;
    for (double o : H.off) EXPECT_NEAR(o, -1.0 / h, 1e-12);
    for (std::size_t i = 0; i < n; ++i) EXPECT_GE(H.diag[i], 1.5 * h * f.grid().weight(i));
}

TEST(Hessian, PositiveDefiniteForPositiveDelta) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 65;
        const auto f = signal_of(random_vector(rng, n));
        auto u = random_vector(rng, n);
        for (std::size_t i = 0; i < n; i += 8) u[i] = (i % 16) ? 0.0 : 1.0;  // some very steep edges
        const auto H = hessian(u, f, make_phi_mu(3.0), 0.7, 1e-6);
        EXPECT_EQ(negative_eigenvalues(H), 0);
        EXPECT_GT(H.smallest_eigenvalue(), 0.0);
    }
}

TEST(Tridiag, SolveAgainstApply) {
    std::mt19937_64 rng(14);
    const std::size_t n = 40;
    const auto f = signal_of(random_vector(rng, n));
    const auto H = hessian(random_vector(rng, n), f, make_phi_mu(3.0), 1.0, 0.1);
    const auto b = random_vector(rng, n, -1.0, 1.0);
    const auto x = H.solve(b);
    const auto r = H.apply(x);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r[i], b[i], 1e-10);
}

TEST(Energy, ConvexAlongSegments) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 33;
        const auto f = signal_of(random_vector(rng, n));
        const auto u = random_vector(rng, n), v = random_vector(rng, n);
        const auto d = trial % 2 ? make_phi_mu(3.0) : make_phi_mu(1.5);
        std::vector<double> e;
        for (int k = 0; k <= 10; ++k) {
            const double t = k / 10.0;
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = u[i] + t * (v[i] - u[i]);
            e.push_back(energy(w, f, d, 2.0, 0.0).total);
        }
        for (int k = 1; k < 10; ++k) EXPECT_GE(e[k - 1] - 2 * e[k] + e[k + 1], -1e-10);
    }
}

TEST(RelaxedEnergy, EqualsJForModerateSlopes) {
    const std::size_t n = 101;
    const Grid g(n);
    std::vector<double> u(n), fv(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = 0.5 + 0.4 * std::sin(3.0 * g.node(i));
        fv[i] = g.node(i);
    }
    const Signal f(g, fv);
    for (const auto& d : {make_phi_mu(3.0), make_f_eps(1.0)})
        EXPECT_NEAR(relaxed_energy_K(u, f, d, 2.5), energy(u, f, d, 2.5, 0.0).total, 1e-14);
}

TEST(RelaxedEnergy, UnitJumpCostsLambdaInf) {
    for (const auto& d : {make_phi_mu(3.0), make_phi_mu(4.0), make_f_eps(1.0)}) {
        const double lam = lambda_inf(d);
        const double cap = slope_cap(d, k_relaxation_cap);
        double prev = 1.0;
        for (double h : {1e-3, 1e-5, 1e-7}) {
            const double err = std::abs(relaxed_edge(1.0, h, d, cap, lam) - lam);
            EXPECT_LT(err, prev);
            prev = err;
        }
        EXPECT_LT(prev, 1e-6);
    }
}

TEST(RelaxedEnergy, StepDatumEqualsLambdaInf) {
    // For u = f = step the only cost is the jump: K -> lambda_inf, deficit about h omega_inf.
    for (double mu : {3.0, 4.0}) {
        const auto d = make_phi_mu(mu);
        for (std::size_t n : {1001u, 100001u}) {
            const Grid g(n);
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = g.node(i) <= 0.5 ? 0.0 : 1.0;
            const Signal f(g, v);
            const double K = relaxed_energy_K(v, f, d, 7.0);
            EXPECT_NEAR(K, 1.0 / (mu - 1.0), 2.0 * g.h() * omega_inf(d) + 1e-9) << "mu=" << mu << " n=" << n;
        }
    }
}

TEST(DualFunctional, ZeroSigma) {
    const auto f = signal_of({0.0, 0.3, 1.0, 0.2});
    const std::vector<double> sigma(5, 0.0);
    EXPECT_EQ(dual_functional_R(sigma, f, make_phi_mu(3.0), 2.0), 0.0);
}

TEST(DualFunctional, WeakDualityOnRandomPairs) {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial % 40);
        const auto d = trial % 3 == 0 ? make_f_eps(1.0) : make_phi_mu(trial % 3 == 1 ? 3.0 : 2.0);
        const double lam = lambda_inf(d);
        const auto f = signal_of(random_vector(rng, n));
        const auto u = random_vector(rng, n);
        auto sigma = random_vector(rng, n + 1, -0.999 * lam, 0.999 * lam);
        sigma.front() = sigma.back() = 0.0;
        const double lambda = 0.1 + 10.0 * std::uniform_real_distribution<double>()(rng);
        const double R = dual_functional_R(sigma, f, d, lambda);
        EXPECT_LE(R, relaxed_energy_K(u, f, d, lambda) + 1e-12);
        EXPECT_LE(R, energy(u, f, d, lambda, 0.0).total + 1e-12);
    }
}

TEST(DualFunctional, Errors) {
    const auto f = signal_of({0.0, 0.5, 1.0});
    const auto d = make_phi_mu(3.0);
    EXPECT_THROW(dual_functional_R(std::vector<double>{0.1, 0.0, 0.0, 0.0}, f, d, 1.0), BoundaryConditionError);
    EXPECT_THROW(dual_functional_R(std::vector<double>{0.0, 0.5, 0.0, 0.0}, f, d, 1.0), DomainError);
    EXPECT_THROW(dual_functional_R(std::vector<double>{0.0, 0.0, 0.0}, f, d, 1.0), GridMismatch);
}

TEST(Energy, ArgumentChecks) {
    const auto f = signal_of({0.0, 0.5, 1.0});
    const auto d = make_phi_mu(3.0);
    const std::vector<double> bad{0.0, 1.0};
    const std::vector<double> ok{0.0, 0.5, 1.0};
    EXPECT_THROW(energy(bad, f, d, 1.0, 0.0), GridMismatch);
    EXPECT_THROW(gradient(bad, f, d, 1.0, 0.0), GridMismatch);
    EXPECT_THROW(hessian(bad, f, d, 1.0, 0.0), GridMismatch);
    EXPECT_THROW(energy(ok, f, d, 0.0, 0.0), InvalidArgument);
    EXPECT_THROW(energy(ok, f, d, 1.0, -1.0), InvalidArgument);
    EXPECT_THROW(Grid(1), InvalidArgument);
    EXPECT_THROW(signal_of({0.0, 1.5}), InvalidArgument);
}

TEST(Energy, MeshRefinementSecondOrder) {
    const auto d = make_phi_mu(3.0);
    auto eval = [&](std::size_t n) {
        const Grid g(n);
        std::vector<double> u(n), fv(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = g.node(i);
            u[i] = 0.5 + 0.3 * std::sin(2.0 * std::numbers::pi * t);
            fv[i] = 0.5 + 0.2 * std::cos(3.0 * t);
        }
        return energy(u, Signal(g, fv), d, 3.0, 0.0).total;
    };
    std::size_t n = 33;
    std::vector<double> e;
    for (int k = 0; k < 5; ++k, n = 2 * n - 1) e.push_back(eval(n));
    for (int k = 0; k + 2 < 5; ++k) {
        const double ratio = (e[k] - e[k + 1]) / (e[k + 1] - e[k + 2]);
        EXPECT_NEAR(ratio, 4.0, 0.2) << "level " << k;
    }
}
