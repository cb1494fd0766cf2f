// tvreg: command-line front end.
//
//   tvreg thresholds --density phi-mu --mu 3
//   tvreg gen --kind step --n 1001 --out f.csv
//   tvreg denoise --input f.csv --density phi-mu --mu 3 --lambda 5 --out u.csv --sigma sigma.csv
//   tvreg shoot --density phi-mu --mu 3 --lambda 4.16 --step-data --out traj.csv
//   tvreg analyze --solution u.csv --sigma sigma.csv --density phi-mu --mu 3 --lambda 5
//   tvreg critlambda --density phi-mu --mu 3 --tol 0.02
//   tvreg sweep --density phi-mu --mu 3 --kind step --lambdas 4,4.16,5 --out-dir out
//
// Every subcommand accepts --config FILE with key=value lines (key = long
// option name); explicit flags override the file.
// Exit status: 0 success, 1 solver failure, 2 input error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tvreg/analysis.hpp"
#include "tvreg/bvp.hpp"
#include "tvreg/density.hpp"
#include "tvreg/experiment.hpp"
#include "tvreg/io.hpp"
#include "tvreg/minimizer.hpp"

namespace {

using tvreg::io::format_double;

constexpr int exit_solver = 1;
constexpr int exit_input = 2;

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string kv(const std::string& key, double v) { return key + "=" + format_double(v); }

void add_density_options(CLI::App* cmd, tvreg::DensitySpec& spec) {
    cmd->add_option("--density", spec.family, "density family: phi-mu | f-eps")->capture_default_str();
    cmd->add_option("--mu", spec.mu, "ellipticity exponent for phi-mu (> 1)")->capture_default_str();
    cmd->add_option("--eps", spec.eps, "regularization for f-eps (> 0)")->capture_default_str();
}

void add_datum_options(CLI::App* cmd, tvreg::DatumSpec& spec) {
    cmd->add_option("--kind", spec.kind, "step | triangle | rectangle | constant | csv")->capture_default_str();
    cmd->add_option("--center", spec.center, "triangle centre");
    cmd->add_option("--half-width", spec.half_width, "triangle half width");
    cmd->add_option("--height", spec.height, "triangle/rectangle height");
    cmd->add_option("--a", spec.a, "rectangle left end");
    cmd->add_option("--b", spec.b, "rectangle right end");
    cmd->add_option("--value", spec.value, "constant value");
    cmd->add_option("--data", spec.path, "data CSV for kind=csv");
    cmd->add_option("--noise", spec.noise, "uniform noise amplitude (0 = none)");
    cmd->add_option("--seed", spec.seed, "noise seed");
    cmd->add_option("--noise-cells", spec.noise_cells, "number of piecewise-constant noise cells");
}

std::vector<double> parse_lambdas(const std::string& list, const std::string& range) {
    std::vector<double> out;
    if (!list.empty()) {
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(tvreg::io::parse_double(item));
    }
    if (!range.empty()) {
        // start:stop:step
        std::stringstream ss(range);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
            throw tvreg::InputError("--lambda-range expects start:stop:step");
        const double start = tvreg::io::parse_double(a);
        const double stop = tvreg::io::parse_double(b);
        const double step = tvreg::io::parse_double(c);
        if (!(step > 0.0) || stop < start) throw tvreg::InputError("--lambda-range: need step > 0 and stop >= start");
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
    }
    return out;
}

/// Expands `--config FILE` into `--key value` pairs placed right after the
/// subcommand name, so flags given later on the command line take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        std::size_t consumed = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            consumed = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            consumed = 1;
        } else {
            continue;
        }
        args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i + consumed));
        std::vector<std::string> injected;
        for (const auto& [key, value] : tvreg::io::read_key_values(path)) {
            if (value == "true") injected.push_back("--" + key);
            else if (value == "false") continue;
            else {
                injected.push_back("--" + key);
                injected.push_back(value);
            }
        }
        const std::size_t at = args.empty() ? 0 : 1;  // after the subcommand
        args.insert(args.begin() + static_cast<long>(at), injected.begin(), injected.end());
        break;
    }
    return args;
}

tvreg::Signal load_signal(const std::string& input, const tvreg::DatumSpec& datum, std::size_t n) {
    if (!input.empty()) {
        auto f = tvreg::io::read_signal(input);
        if (n == 0 || n == f.size()) return f;
        return tvreg::sampled_datum(f).sample(tvreg::Grid(n));
    }
    return datum.make().sample(tvreg::Grid(n == 0 ? 1001 : n));
}

int cmd_thresholds(const tvreg::DensitySpec& ds) {
    const auto d = ds.make();
    const auto r = tvreg::thresholds(d);
    std::cout << "density=" << d.name() << '\n'
              << kv("lambda_inf", r.lambda_inf) << '\n'
              << kv("omega_inf", r.omega_inf) << '\n';
    std::cout << "lambda_mu=" << (r.lambda_mu ? format_double(*r.lambda_mu) : std::string("not_applicable")) << '\n';
    if (r.crit_bracket)
        std::cout << kv("crit_bracket.lower", r.crit_bracket->lower) << '\n'
                  << kv("crit_bracket.upper", r.crit_bracket->upper) << '\n';
    else
        std::cout << "crit_bracket=not_applicable\n";
    return 0;
}

int cmd_gen(const tvreg::DatumSpec& ds, std::size_t n, const std::string& out) {
    const auto f = ds.make().sample(tvreg::Grid(n));
    if (out.empty() || out == "-") tvreg::io::write_nodes(std::cout, f.grid(), f.values());
    else tvreg::io::write_nodes(out, f.grid(), f.values());
    return 0;
}

int cmd_denoise(const tvreg::DensitySpec& ds, const tvreg::DatumSpec& datum, const std::string& input, double lambda,
                std::size_t n, const std::string& out, const std::string& sigma_out) {
    const auto d = ds.make();
    const auto f = load_signal(input, datum, n);
    const auto sol = tvreg::solve(f, d, lambda);
    if (!out.empty()) tvreg::io::write_nodes(out, f.grid(), sol.u);
    if (!sigma_out.empty()) tvreg::io::write_nodes(sigma_out, f.grid(), sol.sigma);
    const auto rep = tvreg::detect_jumps(sol, d);
    std::cout << "converged=" << (sol.converged ? 1 : 0) << '\n'
              << "newton_iterations=" << sol.iterations << '\n'
              << kv("energy_J", sol.energy.total) << '\n'
              << kv("energy_K", sol.relaxed_energy) << '\n'
              << kv("dual_R", sol.dual_value) << '\n'
              << kv("duality_gap", sol.duality_gap) << '\n'
              << kv("u0", sol.u.front()) << '\n';
    tvreg::write_regularity(std::cout, rep);
    if (!sol.converged) throw SolverFailure("Newton iteration did not converge");
    return 0;
}

int cmd_shoot(const tvreg::DensitySpec& ds, const tvreg::DatumSpec& datum, const std::string& input, double lambda,
              bool step_data, const std::string& out) {
    const auto d = ds.make();
    tvreg::ShootResult r;
    tvreg::Trajectory full;
    if (step_data) {
        r = tvreg::shoot_symmetric_step(d, lambda);
        // mirror the half trajectory: u(t) = 1 - u(1 - t), u'(t) = u'(1 - t)
        full = r.trajectory;
        const auto& half = r.trajectory.points;
        for (auto it = half.rbegin(); it != half.rend(); ++it)
            if (it->t < 0.5) full.points.push_back({1.0 - it->t, 1.0 - it->u, it->du, 0.0});
    } else {
        const auto f = input.empty() ? datum.make() : tvreg::sampled_datum(tvreg::io::read_signal(input));
        r = tvreg::shoot(f, d, lambda);
        full = r.trajectory;
    }
    if (!out.empty()) tvreg::io::write_trajectory(out, full);
    std::cout << "status=" << (r.continuous() ? "continuous" : "no_bracket") << '\n'
              << kv("u0", r.u0) << '\n'
              << kv("residual", r.residual) << '\n'
              << "blew_up=" << (r.blew_up ? 1 : 0) << '\n'
              << "bisection_iterations=" << r.iterations << '\n';
    if (step_data) {
        const auto b = tvreg::check_bounds(r, d, lambda);
        std::cout << kv("u0_bound", b.u0_bound) << '\n';
        if (b.envelope_bound) std::cout << kv("envelope_bound", *b.envelope_bound) << '\n';
        if (b.sup_bound) std::cout << kv("sup_bound", *b.sup_bound) << '\n';
        std::cout << "jump_certified=" << (b.jump_certified ? 1 : 0) << '\n'
                  << kv("conservation_residual", tvreg::conservation_residual(r.trajectory, d, lambda, 0.5)) << '\n';
    }
    return 0;
}

int cmd_analyze(const tvreg::DensitySpec& ds, const std::string& u_path, const std::string& sigma_path, double lambda,
                const std::string& input) {
    const auto d = ds.make();
    const auto u = tvreg::io::read_nodes(u_path);
    const auto sigma = tvreg::io::read_nodes(sigma_path);
    if (u.size() != sigma.size()) throw tvreg::GridMismatch("solution and sigma files have different lengths");
    const auto rep = tvreg::detect_jumps(u, sigma, d);
    std::cout << kv("lambda", lambda) << '\n';
    tvreg::write_regularity(std::cout, rep);
    if (input.empty()) {
        std::cout << kv("symmetry_defect", tvreg::check_symmetry(u)) << '\n';
    } else {
        const auto f = tvreg::io::read_signal(input);
        std::cout << kv("symmetry_defect", tvreg::check_symmetry(u, f, rep.jumps)) << '\n';
    }
    return 0;
}

int cmd_critlambda(const tvreg::DensitySpec& ds, const tvreg::DatumSpec& datum, tvreg::CritSearchOptions opt) {
    const auto d = ds.make();
    const auto res = tvreg::find_lambda_crit(d, datum.make(), opt);
    if (res.lambda_crit_est) std::cout << kv("lambda_crit", *res.lambda_crit_est) << '\n';
    else std::cout << "lambda_crit=none\n";
    std::cout << kv("continuous_up_to", res.lower) << '\n';
    if (res.lambda_crit_est) std::cout << kv("discontinuous_from", res.upper) << '\n';
    if (res.bracket_analytic)
        std::cout << kv("bracket.lower", res.bracket_analytic->lower) << '\n'
                  << kv("bracket.upper", res.bracket_analytic->upper) << '\n';
    else
        std::cout << "bracket=not_applicable\n";
    std::cout << "inconsistencies=" << res.inconsistencies << '\n' << "trials=" << res.history.size() << '\n';
    for (std::size_t k = 0; k < res.history.size(); ++k) {
        const auto& t = res.history[k];
        std::cout << "trial" << k << "=" << format_double(t.lambda) << ',' << (t.shoot_continuous ? "continuous" : "jump");
        if (t.minimizer) std::cout << ',' << tvreg::to_string(*t.minimizer) << ',' << (t.consistent ? "consistent" : "inconsistent");
        std::cout << '\n';
    }
    return 0;
}

int cmd_sweep(tvreg::ExperimentSpec spec) {
    const auto rows = tvreg::run_experiment(spec);
    tvreg::write_sweep(std::cout, rows);
    for (const auto& r : rows)
        if (r.classification == "error") throw SolverFailure("lambda=" + format_double(r.lambda) + ": " + r.error);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-dimensional denoising with linear-growth densities"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    tvreg::DensitySpec density;
    tvreg::DatumSpec datum;
    std::string input, out, sigma_out, solution_path, lambdas, lambda_range;
    double lambda = 1.0;
    double tol = 0.02;
    std::size_t n = 0;
    bool step_data = false;
    bool no_cross_check = false;
    double lambda_max = 100.0;
    unsigned workers = 0;
    bool no_shoot = false;

    auto* thr = app.add_subcommand("thresholds", "print lambda_inf, omega_inf, lambda_mu and the lambda_crit bracket");
    add_density_options(thr, density);

    auto* gen = app.add_subcommand("gen", "sample a datum on a uniform grid as t,value CSV");
    add_datum_options(gen, datum);
    gen->add_option("--n", n, "number of grid nodes")->required();
    gen->add_option("--out", out, "output CSV (default stdout)");

    auto* den = app.add_subcommand("denoise", "minimize the relaxed energy by Newton continuation");
    add_density_options(den, density);
    add_datum_options(den, datum);
    den->add_option("--input", input, "data CSV (t,value); overrides --kind");
    den->add_option("--lambda", lambda, "fidelity weight")->required();
    den->add_option("--n", n, "grid size (resamples --input when different)");
    den->add_option("--out", out, "solution CSV");
    den->add_option("--sigma", sigma_out, "dual certificate CSV");

    auto* sho = app.add_subcommand("shoot", "solve the Neumann problem by shooting");
    add_density_options(sho, density);
    add_datum_options(sho, datum);
    sho->add_option("--input", input, "data CSV (t,value)");
    sho->add_option("--lambda", lambda, "fidelity weight")->required();
    sho->add_flag("--step-data", step_data, "use the step datum and its point symmetry");
    sho->add_option("--out", out, "trajectory CSV (t,u,du)");

    auto* ana = app.add_subcommand("analyze", "classify a solution (smooth / near-singular / jump)");
    add_density_options(ana, density);
    ana->add_option("--solution", solution_path, "solution CSV")->required();
    ana->add_option("--sigma", sigma_out, "dual certificate CSV")->required();
    ana->add_option("--lambda", lambda, "fidelity weight")->required();
    ana->add_option("--input", input, "data CSV; pairs nodes by the data's own point symmetry");

    auto* crit = app.add_subcommand("critlambda", "search the critical lambda for a single-jump datum");
    add_density_options(crit, density);
    add_datum_options(crit, datum);
    crit->add_option("--tol", tol, "width of the final lambda interval")->capture_default_str();
    crit->add_option("--n", n, "grid size for the minimizer cross-check (default 1001)");
    crit->add_option("--lambda-max", lambda_max, "largest lambda tried")->capture_default_str();
    crit->add_flag("--no-cross-check", no_cross_check, "skip the minimizer cross-check");

    auto* swp = app.add_subcommand("sweep", "run a lambda sweep and write per-lambda files plus sweep.csv");
    add_density_options(swp, density);
    add_datum_options(swp, datum);
    swp->add_option("--lambdas", lambdas, "comma separated lambda values");
    swp->add_option("--lambda-range", lambda_range, "start:stop:step");
    swp->add_option("--n", n, "grid size (default 1001)");
    swp->add_option("--out-dir", out, "output directory")->required();
    swp->add_option("--workers", workers, "concurrent lambda solves (0 = hardware)");
    swp->add_flag("--no-shoot", no_shoot, "skip the shooting cross-check");

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    }

    try {
        if (*thr) return cmd_thresholds(density);
        if (*gen) return cmd_gen(datum, n, out);
        if (*den) return cmd_denoise(density, datum, input, lambda, n, out, sigma_out);
        if (*sho) return cmd_shoot(density, datum, input, lambda, step_data, out);
        if (*ana) return cmd_analyze(density, solution_path, sigma_out, lambda, input);
        if (*crit) {
            tvreg::CritSearchOptions opt;
            opt.tol = tol;
            opt.n = n == 0 ? 1001 : n;
            opt.lambda_max = lambda_max;
            opt.cross_check = !no_cross_check;
            return cmd_critlambda(density, datum, opt);
        }
        if (*swp) {
            tvreg::ExperimentSpec spec;
            spec.density = density;
            spec.datum = datum;
            spec.lambdas = parse_lambdas(lambdas, lambda_range);
            spec.n = n == 0 ? 1001 : n;
            spec.out_dir = out;
            spec.workers = workers;
            spec.shoot = !no_shoot;
            return cmd_sweep(spec);
        }
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const tvreg::ConvergenceError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return exit_input;
    }
    return exit_input;
}
