#pragma once

// INI-style run configuration:
//
//   [reduced]     omega_pi | omega_pi_thz, omega_er | omega_er_thz, g, j,
//                 g_lande_z, z_er, n0
//   [micro]       j_fe, d_fe_y, a_x, a_z, a_xz, j_er, j_cross, d_x, d_y,
//                 g_fe_x/y/z, g_er_x/y/z (all required), s_fe, z_fe, z_er
//   [conditions]  temperature, b_field, field_axis
//   [solver]      tolerance, max_iterations, mixing, min_mixing, stall_window,
//                 newton_polish, newton_after, free_energy_prescription, threads
//   [sweep]       t_min, t_max, h_min, h_max, t_points, h_points, model, eps,
//                 delta_jump, classify_rule, refine_boundaries, refine_tolerance,
//                 mce_dh, calibrate_field, calibrate_temperature
//   [ed]          n_spins, n_max, max_dimension
//   [thz]         thickness_mm, snr_floor, window, taper, echo_refine,
//                 echo_margin, anchor_fraction
//
// Energies are meV unless the key ends in _thz, fields are tesla and
// temperatures kelvin. Unknown sections or keys are rejected.

#include <optional>
#include <string>
#include <string_view>

#include "gjsim/params.hpp"
#include "gjsim/phase_atlas.hpp"
#include "gjsim/solver.hpp"
#include "gjsim/thz_tds.hpp"

namespace gjsim {

struct EdSettings {
    int n_spins = 8;
    int n_max = 20;
    std::size_t max_dimension = 6000;
};

struct ThzSettings {
    std::optional<double> thickness_mm;
    thz::AnalysisOptions analysis;
};

struct Config {
    ReducedParams reduced;
    std::optional<MicroParams> micro;
    ExternalConditions conditions;
    SolverSettings solver;
    atlas::SweepSettings sweep;
    EdSettings ed;
    ThzSettings thz;

    void validate() const;
};

/// Parses and validates a configuration document. Throws ConfigError naming
/// the offending key.
Config load_config(std::string_view text);
Config load_config_file(const std::string& path);

/// Canonical text of a resolved configuration; numbers are printed in the
/// shortest form that parses back to the same double.
std::string to_ini(const Config& config);

}  // namespace gjsim
