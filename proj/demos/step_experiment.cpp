// Denoises the unit step with Phi_3 for a few fidelity weights, compares the
// minimizer with the shooting solution and prints the critical lambda.
//
//   ./step_experiment [n]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "tvreg/analysis.hpp"
#include "tvreg/bvp.hpp"
#include "tvreg/density.hpp"
#include "tvreg/minimizer.hpp"
#include "tvreg/signal.hpp"

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1001;
    const auto d = tvreg::make_phi_mu(3.0);
    const auto datum = tvreg::step_datum();
    const auto f = datum.sample(tvreg::Grid(n));

    const auto th = tvreg::thresholds(d);
    std::printf("%s: lambda_inf=%.6g omega_inf=%.6g bracket=(%.6g, %.6g)\n\n", d.name().c_str(), th.lambda_inf,
                th.omega_inf, th.crit_bracket->lower, th.crit_bracket->upper);

    std::printf("%8s %14s %10s %10s %10s %12s %12s\n", "lambda", "class", "u(0)", "shoot u0", "max slope",
                "jump", "gap");
    for (double lambda : {0.4, 2.0, 4.0, 4.16, 5.0, 9.0}) {
        const auto sol = tvreg::solve(f, d, lambda);
        const auto rep = tvreg::detect_jumps(sol, d);
        const auto sh = tvreg::shoot_symmetric_step(d, lambda);
        double jump = 0.0;
        for (const auto& j : rep.jumps) jump += j.height;
        const std::string shoot_u0 = sh.continuous() ? std::to_string(sh.u0).substr(0, 8) : "none";
        std::printf("%8.3g %14s %10.6f %10s %10.4g %10.4g %12.3g\n", lambda, tvreg::to_string(rep.classification),
                    sol.u.front(), shoot_u0.c_str(), rep.max_slope, jump, sol.duality_gap);
    }

    tvreg::CritSearchOptions opt;
    opt.cross_check = false;
    const auto crit = tvreg::find_lambda_crit(d, datum, opt);
    std::printf("\ncritical lambda (shooting bisection): %.4f, continuous up to %.4f\n", *crit.lambda_crit_est,
                crit.lower);
    return 0;
}
