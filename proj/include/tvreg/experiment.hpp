#pragma once
// Experiment descriptions and the lambda sweep pipeline.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tvreg/analysis.hpp"
#include "tvreg/bvp.hpp"
#include "tvreg/density.hpp"
#include "tvreg/errors.hpp"
#include "tvreg/io.hpp"
#include "tvreg/minimizer.hpp"
#include "tvreg/signal.hpp"

namespace tvreg {

struct DensitySpec {
    std::string family = "phi-mu";  // phi-mu | f-eps
    double mu = 3.0;
    double eps = 1.0;

    Density make() const {
        if (family == "phi-mu") return make_phi_mu(mu);
        if (family == "f-eps") return make_f_eps(eps);
        throw InvalidArgument("unknown density family '" + family + "' (expected phi-mu or f-eps)");
    }
};

struct DatumSpec {
    std::string kind = "step";  // step | triangle | rectangle | constant | csv
    double center = 0.5;        // triangle
    double half_width = 0.5;    // triangle
    double height = 1.0;        // triangle, rectangle
    double a = 0.25;            // rectangle
    double b = 0.75;            // rectangle
    double value = 0.5;         // constant
    std::string path;           // csv
    double noise = 0.0;         // amplitude; 0 disables the noisy variant
    std::uint64_t seed = 1;
    std::size_t noise_cells = 32;

    Datum make() const {
        Datum base = [&] {
            if (kind == "step") return step_datum();
            if (kind == "triangle") return triangle_datum(center, half_width, height);
            if (kind == "rectangle") return rectangle_datum(a, b, height);
            if (kind == "constant") return constant_datum(value);
            if (kind == "csv") {
                if (!std::filesystem::exists(path)) throw InputError("datum file '" + path + "' does not exist");
                return sampled_datum(io::read_signal(path));
            }
            throw InvalidArgument("unknown datum kind '" + kind + "'");
        }();
        if (noise > 0.0) return noisy_datum(base, noise, seed, noise_cells);
        return base;
    }
};

struct ExperimentSpec {
    DensitySpec density;
    DatumSpec datum;
    std::vector<double> lambdas;
    std::size_t n = 1001;
    std::string out_dir = ".";
    bool shoot = true;
    unsigned workers = 0;  // 0: hardware concurrency
    SolverConfig solver{};
    JumpOptions jumps{};
    ShootConfig shooting{};

    void validate() const {
        for (double l : lambdas)
            if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("lambda values must be positive");
        if (n < 2) throw InvalidArgument("grid size n must be >= 2");
        solver.validate();
    }
};

struct SweepRow {
    double lambda = 0.0;
    std::string classification;  // smooth | near-singular | jump | error
    double u0 = std::numeric_limits<double>::quiet_NaN();
    double max_slope = std::numeric_limits<double>::quiet_NaN();
    double jump_height = std::numeric_limits<double>::quiet_NaN();
    double duality_gap = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

inline void write_regularity(std::ostream& os, const RegularityReport& rep) {
    std::size_t masked = 0;
    for (bool b : rep.singular_mask) masked += b ? 1 : 0;
    os << "classification=" << to_string(rep.classification) << '\n'
       << "max_slope=" << io::format_double(rep.max_slope) << '\n'
       << "max_sigma_ratio=" << io::format_double(rep.max_sigma_ratio) << '\n'
       << "singular_nodes=" << masked << '\n'
       << "jumps=" << rep.jumps.size() << '\n';
    for (std::size_t k = 0; k < rep.jumps.size(); ++k)
        os << "jump" << k << ".location=" << io::format_double(rep.jumps[k].location) << '\n'
           << "jump" << k << ".height=" << io::format_double(rep.jumps[k].height) << '\n';
}

inline double total_jump_height(const RegularityReport& rep) {
    double h = 0.0;
    for (const auto& j : rep.jumps) h += std::abs(j.height);
    return h;
}

inline void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "lambda,classification,u0,max_slope,jump_height,duality_gap\n";
    for (const auto& r : rows)
        os << io::format_double(r.lambda) << ',' << r.classification << ',' << io::format_double(r.u0) << ','
           << io::format_double(r.max_slope) << ',' << io::format_double(r.jump_height) << ','
           << io::format_double(r.duality_gap) << '\n';
}

namespace detail {

inline SweepRow run_one(const ExperimentSpec& spec, const Density& d, const Datum& datum, const Signal& f,
                        double lambda, const std::filesystem::path& dir) {
    SweepRow row;
    row.lambda = lambda;
    const std::string tag = io::format_double(lambda);
    try {
        const auto sol = solve(f, d, lambda, spec.solver);
        const auto rep = detect_jumps(sol, d, spec.jumps);
        row.classification = to_string(rep.classification);
        row.u0 = sol.u.front();
        row.max_slope = rep.max_slope;
        row.jump_height = total_jump_height(rep);
        row.duality_gap = sol.duality_gap;

        io::write_nodes((dir / ("u_" + tag + ".csv")).string(), f.grid(), sol.u);
        io::write_nodes((dir / ("sigma_" + tag + ".csv")).string(), f.grid(), sol.sigma);

        std::ofstream rep_os(dir / ("report_" + tag + ".txt"), std::ios::binary);
        rep_os << "lambda=" << tag << '\n'
               << "density=" << d.name() << '\n'
               << "n=" << f.size() << '\n'
               << "converged=" << (sol.converged ? 1 : 0) << '\n'
               << "newton_iterations=" << sol.iterations << '\n'
               << "energy_J=" << io::format_double(sol.energy.total) << '\n'
               << "energy_K=" << io::format_double(sol.relaxed_energy) << '\n'
               << "dual_R=" << io::format_double(sol.dual_value) << '\n'
               << "duality_gap=" << io::format_double(sol.duality_gap) << '\n'
               << "sigma_defect=" << io::format_double(sol.sigma_defect) << '\n'
               << "u0=" << io::format_double(sol.u.front()) << '\n';
        write_regularity(rep_os, rep);
        if (spec.shoot) {
            try {
                const auto sh = detail::classify_by_shooting(datum, d, lambda, spec.shooting);
                rep_os << "shoot.status=" << (sh.continuous() ? "continuous" : "no_bracket") << '\n'
                       << "shoot.u0=" << io::format_double(sh.u0) << '\n'
                       << "shoot.residual=" << io::format_double(sh.residual) << '\n';
            } catch (const std::exception& e) {
                rep_os << "shoot.status=error\nshoot.error=" << e.what() << '\n';
            }
        }
        if (!sol.converged) {
            row.classification = "error";
            row.error = "newton did not converge";
        }
    } catch (const std::exception& e) {
        row.classification = "error";
        row.error = e.what();
    }
    return row;
}

} // namespace detail

/// Solves, classifies and (optionally) shoots for every lambda; writes
/// u_<lambda>.csv, sigma_<lambda>.csv, report_<lambda>.txt and sweep.csv into
/// spec.out_dir. A failing lambda is recorded in its row and the sweep goes on.
inline std::vector<SweepRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const Density d = spec.density.make();
    const Datum datum = spec.datum.make();
    const Grid grid(spec.n);
    const Signal f = datum.sample(grid);
    const std::filesystem::path dir(spec.out_dir);
    std::filesystem::create_directories(dir);

    std::vector<SweepRow> rows(spec.lambdas.size());
    unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, rows.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < rows.size(); k = next++)
            rows[k] = detail::run_one(spec, d, datum, f, spec.lambdas[k], dir);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::ofstream os(dir / "sweep.csv", std::ios::binary);
    if (!os) throw InputError("cannot write sweep.csv in '" + spec.out_dir + "'");
    write_sweep(os, rows);
    return rows;
}

} // namespace tvreg
