// dispeq command-line front end: design, solve, verify, sweep, propagate.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dispeq/run.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw dispeq::ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// exit codes: 0 ok, 2 config error, 3 solver non-convergence, 4 physics validation
int run_guarded(const std::function<void()>& fn) {
    try {
        fn();
        return 0;
    } catch (const dispeq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dispeq::ConvergenceError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const dispeq::InfeasibleError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const dispeq::DegenerateSystemError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {  // Domain/Cutoff/NoRoot/Ordering/...
        std::cerr << "physics validation: " << e.what() << "\n";
        return 4;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dispersion-equalized mode-coupler placement toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", solution_path;
    int seed_count = 0, threads = 1;
    app.add_option("--config", config_path, "configuration file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed-count", seed_count, "override solver.seed_count");
    app.add_option("--threads", threads, "worker threads for sweeps");

    auto* c_design_wg = app.add_subcommand("design-waveguide", "zero-curvature operating point");
    auto* c_solve = app.add_subcommand("solve", "scatterer placement solve");
    auto* c_verify = app.add_subcommand("verify", "residual fit / order for a solution");
    c_verify->add_option("--solution", solution_path, "solution record from 'solve'")->required();
    auto* c_design_ux = app.add_subcommand("design-uniaxial", "uniaxial medium + stack design");
    auto* c_sweep = app.add_subcommand("sweep", "transmissivity sweep");
    auto* c_prop = app.add_subcommand("propagate", "pulse propagation metrics");

    // let "--config" and friends appear after the subcommand name
    for (auto* sc : {c_design_wg, c_solve, c_verify, c_design_ux, c_sweep, c_prop})
        sc->fallthrough();

    CLI11_PARSE(app, argc, argv);

    return run_guarded([&] {
        dispeq::RunConfig cfg = dispeq::parse_config(read_file(config_path));
        if (seed_count > 0) cfg.solver.seed_count = seed_count;

        if (c_design_wg->parsed()) {
            write_bundle(cmd_design_waveguide(cfg), out_dir, "design-waveguide");
        } else if (c_solve->parsed()) {
            write_bundle(cmd_solve(cfg), out_dir, "solution");
        } else if (c_verify->parsed()) {
            write_bundle(cmd_verify(cfg, read_file(solution_path)), out_dir, "verify");
        } else if (c_design_ux->parsed()) {
            write_bundle(cmd_design_uniaxial(cfg), out_dir, "design-uniaxial");
        } else if (c_sweep->parsed()) {
            write_bundle(cmd_sweep(cfg, threads), out_dir, "sweep");
        } else if (c_prop->parsed()) {
            write_bundle(cmd_propagate(cfg), out_dir, "propagate");
        }
    });
}
