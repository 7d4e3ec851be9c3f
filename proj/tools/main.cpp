// gjsim command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 configuration or input error,
// 3 solver or numerical failure.

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gjsim/error.hpp"

using namespace gjsim;
using namespace gjsim::cli;

namespace {

void add_common(CLI::App* app, CommonOptions& c) {
    app->add_option("--config", c.config_path, "INI configuration file");
    app->add_option("--out", c.out, "output directory (default $GJSIM_OUT_DIR, then .)");
    app->add_option("--t", c.temperature, "temperature (K)");
    app->add_option("--b", c.b_field, "mu0 H (T)");
    app->add_option("--axis", c.axis, "field axis x|y|z");
    app->add_option("--model", c.model, "reduced|micro");
    app->add_option("--gz", c.g_lande_z, "Er Lande factor along c (calibrated when absent)");
    app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

void add_sweep(CLI::App* app, SweepOptions& s) {
    app->add_option("--t-points", s.t_points);
    app->add_option("--h-points", s.h_points);
    app->add_option("--t-min", s.t_min);
    app->add_option("--t-max", s.t_max);
    app->add_option("--h-min", s.h_min);
    app->add_option("--h-max", s.h_max);
    app->add_option("--rule", s.rule, "dominance|threshold");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extended Dicke (g-J) model simulator"};
    app.require_subcommand(1);
    CommonOptions common;
    SweepOptions sweep;
    MceCommandOptions mce;
    EdOptions ed;
    ThzOptions thz;
    ThzSynthOptions synth;
    CalibrateOptions cal;

    auto* solve = app.add_subcommand("solve", "self-consistent state at one (T, B)");
    add_common(solve, common);

    auto* sw = app.add_subcommand("sweep", "phase map over a (T, B) grid");
    add_common(sw, common);
    add_sweep(sw, sweep);

    auto* bd = app.add_subcommand("boundaries", "phase boundaries, transition orders and the triple point");
    add_common(bd, common);
    add_sweep(bd, sweep);

    auto* mc = app.add_subcommand("mce", "adiabatic field sweeps T(B)");
    add_common(mc, common);
    add_sweep(mc, sweep);
    mc->add_option("--t0", mce.t0, "starting temperatures (K)")->delimiter(',');
    mc->add_option("--h-start", mce.h_start);
    mc->add_option("--h-end", mce.h_end);

    auto* sp = app.add_subcommand("spectrum", "linearized mode spectrum of the micro model");
    add_common(sp, common);

    auto* e = app.add_subcommand("ed", "exact diagonalization of the finite-N model");
    add_common(e, common);
    e->add_option("--n", ed.n_spins, "number of Er spins (even)");
    e->add_option("--nmax", ed.n_max, "boson cutoff");
    e->add_flag("--thermal", ed.thermal, "thermal averages at --t instead of the ground state");

    auto* tz = app.add_subcommand("thz", "optical constants from a reference/sample trace pair");
    add_common(tz, common);
    tz->add_option("--ref", thz.reference)->required();
    tz->add_option("--sam", thz.sample)->required();
    tz->add_option("--d", thz.thickness_mm, "thickness (mm)");
    tz->add_option("--snr-floor", thz.snr_floor);
    tz->add_option("--echo-refine", thz.echo_refine);

    auto* ts = app.add_subcommand("thz-synth", "synthetic reference/sample pair through a slab");
    add_common(ts, common);
    ts->add_option("--n", synth.n);
    ts->add_option("--n-slope", synth.n_slope, "dn/dnu (1/THz)");
    ts->add_option("--kappa", synth.kappa);
    ts->add_option("--d", synth.thickness_mm, "thickness (mm)");
    ts->add_option("--samples", synth.samples);
    ts->add_option("--dt", synth.dt, "ps");
    ts->add_option("--t0", synth.t0, "pulse centre (ps)");
    ts->add_option("--width", synth.width, "pulse width (ps)");
    ts->add_option("--noise", synth.noise, "rms noise per sample");
    ts->add_option("--seed", synth.seed);

    auto* cg = app.add_subcommand("calibrate-gz", "fit g_z to a target A->N critical field");
    add_common(cg, common);
    add_sweep(cg, sweep);
    cg->add_option("--target", cal.target_field, "T");
    cg->add_option("--temperature", cal.temperature, "K");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return cmd_solve(common);
        if (*sw) return cmd_sweep(common, sweep);
        if (*bd) return cmd_boundaries(common, sweep);
        if (*mc) return cmd_mce(common, sweep, mce);
        if (*sp) return cmd_spectrum(common);
        if (*e) return cmd_ed(common, ed);
        if (*tz) return cmd_thz(common, thz);
        if (*ts) return cmd_thz_synth(common, synth);
        if (*cg) return cmd_calibrate_gz(common, sweep, cal);
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.key() << ": " << err.what() << "\n";
        return 2;
    } catch (const SolverError& err) {
        std::cerr << "error: solver: " << err.what() << "\n";
        return 3;
    } catch (const NumericError& err) {
        std::cerr << "error: numeric: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
    return 1;
}
