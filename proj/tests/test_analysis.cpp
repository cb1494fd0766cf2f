#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "phi3_oracle.hpp"
#include "tvreg/analysis.hpp"

using namespace tvreg;

namespace {

Signal step_signal(std::size_t n = 1001) { return step_datum().sample(Grid(n)); }

void expect_report_invariants(const RegularityReport& rep, const SolveResult& r, const Density& d,
                              const JumpOptions& opt = {}) {
    const Grid g(r.u.size());
    const double lam = lambda_inf(d);
    for (const auto& j : rep.jumps) {
        EXPECT_GT(std::abs(j.height), opt.height_floor_factor * g.h());
        bool masked = false;
        for (std::size_t e = j.first_edge; e <= j.last_edge; ++e) {
            masked = masked || rep.singular_mask[e] || rep.singular_mask[e + 1];
            const double s = (r.u[e + 1] - r.u[e]) / g.h();
            EXPECT_GE(std::abs(d.deriv(s)), (1.0 - opt.tol_sing) * lam);
        }
        EXPECT_TRUE(masked);
    }
    if (rep.classification == Classification::smooth) {
        EXPECT_LT(rep.max_sigma_ratio, 1.0);
    }
}

} // namespace

TEST(DetectJumps, ConstantSolutionIsSmooth) {
    const Grid g(101);
    const Signal f(g, std::vector<double>(101, 0.4));
    const auto d = make_phi_mu(3.0);
    const auto r = solve(f, d, 3.0);
    const auto rep = detect_jumps(r, d);
    EXPECT_TRUE(rep.jumps.empty());
    EXPECT_EQ(rep.classification, Classification::smooth);
    EXPECT_EQ(rep.max_slope, 0.0);
}

TEST(DetectJumps, StepLambda5HasSingleCentralJump) {
    const auto f = step_signal();
    const auto d = make_phi_mu(3.0);
    const auto r = solve(f, d, 5.0);
    const auto rep = detect_jumps(r, d);
    ASSERT_EQ(rep.jumps.size(), 1u);
    EXPECT_EQ(rep.classification, Classification::jump);
    EXPECT_NEAR(rep.jumps[0].location, 0.5, f.grid().h());
    // the grid jump contains the true jump (closed form) plus the steep flanks
    EXPECT_GT(rep.jumps[0].height, phi3_oracle::jump_height(5.0));
    EXPECT_LT(rep.jumps[0].height, 0.2);
    // no singular nodes away from the centre
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f.grid().node(i) - 0.5) > 2 * f.grid().h()) {
            EXPECT_FALSE(rep.singular_mask[i]) << i;
        }
    expect_report_invariants(rep, r, d);
}

TEST(DetectJumps, StepLambda4IsSmooth) {
    const auto d = make_phi_mu(3.0);
    const auto r = solve(step_signal(), d, 4.0);
    const auto rep = detect_jumps(r, d);
    EXPECT_EQ(rep.classification, Classification::smooth);
    expect_report_invariants(rep, r, d);
}

TEST(DetectJumps, MuTwoIsRegularForLargeLambda) {
    const auto d = make_phi_mu(2.0);
    for (double lambda : {10.0, 50.0, 100.0}) {
        const auto r = solve(step_signal(), d, lambda);
        const auto rep = detect_jumps(r, d);
        EXPECT_EQ(rep.classification, Classification::smooth) << lambda;
        expect_report_invariants(rep, r, d);
    }
}

TEST(DetectJumps, JumpsOnlyAtDataJumps) {
    const auto d = make_phi_mu(3.0);
    const auto f = rectangle_datum(0.25, 0.75).sample(Grid(1001));
    const auto r = solve(f, d, 40.0);
    const auto rep = detect_jumps(r, d);
    ASSERT_EQ(rep.jumps.size(), 2u);
    EXPECT_NEAR(rep.jumps[0].location, 0.25, 2 * f.grid().h());
    EXPECT_NEAR(rep.jumps[1].location, 0.75, 2 * f.grid().h());
    EXPECT_GT(rep.jumps[0].height, 0.0);
    EXPECT_LT(rep.jumps[1].height, 0.0);
    expect_report_invariants(rep, r, d);
}

TEST(DetectJumps, LipschitzDataNeverJump) {
    const auto d = make_phi_mu(3.0);
    const auto f = triangle_datum().sample(Grid(1001));
    for (double lambda : {1.0, 5.0, 20.0}) {
        const auto r = solve(f, d, lambda);
        const auto rep = detect_jumps(r, d);
        EXPECT_TRUE(rep.jumps.empty()) << lambda;
        expect_report_invariants(rep, r, d);
    }
}

TEST(DetectJumps, SmallLambdaRegularityUniformInN) {
    const auto d = make_phi_mu(3.0);
    const double lambda = 0.95 * lambda_inf(d);
    const std::vector<Datum> data{step_datum(), triangle_datum(), noisy_datum(step_datum(), 0.1, 7)};
    for (const auto& datum : data) {
        const auto a = solve(datum.sample(Grid(501)), d, lambda);
        const auto b = solve(datum.sample(Grid(1001)), d, lambda);
        const auto ra = detect_jumps(a, d), rb = detect_jumps(b, d);
        EXPECT_EQ(ra.classification, Classification::smooth);
        EXPECT_EQ(rb.classification, Classification::smooth);
        EXPECT_NEAR(rb.max_slope / ra.max_slope, 1.0, 0.1);
    }
}

TEST(DetectJumps, C11CriterionImpliesSmooth) {
    const auto d = make_phi_mu(3.0);
    const auto f = triangle_datum(0.5, 0.3, 0.8).sample(Grid(801));
    const double lambda = 0.9 * omega_inf(d) / (0.5 + f.total_variation());
    ASSERT_TRUE(c11_criterion(f, d, lambda));
    EXPECT_FALSE(c11_criterion(f, d, 10.0));
    const auto rep = detect_jumps(solve(f, d, lambda), d);
    EXPECT_EQ(rep.classification, Classification::smooth);
}

TEST(CritBracket, AnalyticValues) {
    const auto b3 = crit_bracket(make_phi_mu(3.0));
    EXPECT_DOUBLE_EQ(b3.lower, 4.0);
    EXPECT_DOUBLE_EQ(b3.upper, 8.0);
    const auto be = crit_bracket(make_f_eps(1.0));
    EXPECT_DOUBLE_EQ(be.lower, 8.0);
    EXPECT_DOUBLE_EQ(be.upper, 16.0);
    EXPECT_THROW(crit_bracket(make_phi_mu(2.0)), NoJumpRegime);
    EXPECT_THROW(crit_bracket(make_phi_mu(1.5)), NoJumpRegime);
}

TEST(FindLambdaCrit, Phi3StepMatchesClosedForm) {
    const auto d = make_phi_mu(3.0);
    CritSearchOptions opt;
    opt.tol = 0.01;
    const auto res = find_lambda_crit(d, step_datum(), opt);
    ASSERT_TRUE(res.lambda_crit_est.has_value());
    const double oracle = phi3_oracle::lambda_crit();
    EXPECT_NEAR(oracle, 4.494, 1e-3);
    EXPECT_NEAR(*res.lambda_crit_est, oracle, 0.01);
    EXPECT_LE(res.upper - res.lower, opt.tol);
    ASSERT_TRUE(res.bracket_analytic.has_value());
    EXPECT_GT(*res.lambda_crit_est, res.bracket_analytic->lower);
    EXPECT_LT(*res.lambda_crit_est, res.bracket_analytic->upper);
    // every trial carries the minimizer's verdict; disagreements are counted, not hidden
    int disagreements = 0;
    for (const auto& t : res.history) {
        ASSERT_TRUE(t.minimizer.has_value());
        disagreements += t.consistent ? 0 : 1;
        EXPECT_EQ(t.shoot_continuous, t.lambda <= oracle) << t.lambda;
    }
    EXPECT_EQ(disagreements, res.inconsistencies);
}

TEST(FindLambdaCrit, FEpsInsideBracket) {
    CritSearchOptions opt;
    opt.cross_check = false;
    opt.tol = 0.05;
    const auto res = find_lambda_crit(make_f_eps(1.0), step_datum(), opt);
    ASSERT_TRUE(res.lambda_crit_est.has_value());
    EXPECT_GE(*res.lambda_crit_est, 8.0);
    EXPECT_LE(*res.lambda_crit_est, 16.0);
}

TEST(FindLambdaCrit, MuTwoHasNoCriticalLambda) {
    CritSearchOptions opt;
    opt.cross_check = false;
    const auto res = find_lambda_crit(make_phi_mu(2.0), step_datum(), opt);
    EXPECT_FALSE(res.lambda_crit_est.has_value());
    EXPECT_FALSE(res.bracket_analytic.has_value());
    EXPECT_DOUBLE_EQ(res.lower, 100.0);
    for (const auto& t : res.history) EXPECT_TRUE(t.shoot_continuous);
}

TEST(CheckBounds, ShootingAtPaperLambda) {
    const auto d = make_phi_mu(3.0);
    const auto r = shoot_symmetric_step(d, 4.16);
    const auto b = check_bounds(r, d, 4.16);
    EXPECT_TRUE(b.all_passed());
    ASSERT_TRUE(b.envelope_bound.has_value());
    EXPECT_NEAR(*b.envelope_bound, 0.523, 0.01);
    EXPECT_NEAR(*b.envelope_bound, std::sqrt(r.u0 * r.u0 + 2.0 * 0.5 / 4.16), 1e-14);
    EXPECT_FALSE(b.jump_certified);
}

TEST(CheckBounds, JumpCertifiedAboveEight) {
    const auto d = make_phi_mu(3.0);
    const auto r = solve(step_signal(), d, 9.0);
    const auto b = check_bounds(r, d, 9.0);
    ASSERT_TRUE(b.sup_bound.has_value());
    EXPECT_NEAR(*b.sup_bound, std::sqrt(2.0 / 9.0), 1e-14);
    EXPECT_TRUE(b.jump_certified);
    EXPECT_TRUE(b.all_passed());
    EXPECT_EQ(detect_jumps(r, d).classification, Classification::jump);
}

TEST(CheckBounds, HoldForMinimizerAcrossLambda) {
    const auto d = make_phi_mu(3.0);
    double prev_bound = 1e9;
    for (double lambda : {0.4, 2.0, 4.0, 5.0, 9.0, 50.0, 1000.0}) {
        const auto b = check_bounds(solve(step_signal(), d, lambda), d, lambda);
        EXPECT_TRUE(b.all_passed()) << lambda;
        EXPECT_LT(b.u0_bound, prev_bound);
        prev_bound = b.u0_bound;
    }
    EXPECT_LT(prev_bound, 0.05);
    // no sup or envelope bound when omega_inf is infinite
    const auto b2 = check_bounds(solve(step_signal(), make_phi_mu(2.0), 10.0), make_phi_mu(2.0), 10.0);
    EXPECT_FALSE(b2.sup_bound.has_value());
    EXPECT_TRUE(b2.all_passed());
}

TEST(CheckSymmetry, AntisymmetricProfileIsExact) {
    std::vector<double> u{0.0, 0.125, 0.5, 0.875, 1.0};
    EXPECT_EQ(check_symmetry(u), 0.0);
    u[1] = 0.2;
    EXPECT_NEAR(check_symmetry(u), 0.075, 1e-15);
}

TEST(CheckSymmetry, MinimizerSolutions) {
    const auto d = make_phi_mu(3.0);
    const auto f = step_signal();
    const auto smooth = solve(f, d, 4.0);
    EXPECT_LE(check_symmetry(smooth.u, f), 1e-3);
    const auto jump = solve(f, d, 5.0);
    const auto rep = detect_jumps(jump, d);
    EXPECT_LE(check_symmetry(jump.u, f, rep.jumps), 1e-3);
    EXPECT_THROW(check_symmetry(smooth.u, step_signal(11)), GridMismatch);
}
