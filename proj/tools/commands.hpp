#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gjsim/config.hpp"
#include "run_output.hpp"

namespace gjsim::cli {

/// Flags shared by every subcommand; set flags override the configuration file.
struct CommonOptions {
    std::string config_path;
    std::string out;
    std::optional<double> temperature;
    std::optional<double> b_field;
    std::optional<std::string> axis;
    std::optional<std::string> model;
    std::optional<double> g_lande_z;
    std::optional<int> threads;
};

struct SweepOptions {
    std::optional<int> t_points;
    std::optional<int> h_points;
    std::optional<double> t_min, t_max, h_min, h_max;
    std::optional<std::string> rule;
};

struct MceCommandOptions {
    std::vector<double> t0{1.8, 3.2};
    double h_start = 0.0;
    std::optional<double> h_end;
};

struct EdOptions {
    std::optional<int> n_spins;
    std::optional<int> n_max;
    bool thermal = false;
};

struct ThzOptions {
    std::string reference;
    std::string sample;
    std::optional<double> thickness_mm;
    std::optional<double> snr_floor;
    std::optional<bool> echo_refine;
};

struct ThzSynthOptions {
    double n = 2.0;
    double n_slope = 0.0;  ///< dn/dnu, 1/THz
    double kappa = 0.0;
    std::optional<double> thickness_mm;
    int samples = 2048;
    double dt = 0.02;
    double t0 = 3.0;
    double width = 0.15;
    double noise = 0.0;  ///< rms added to each sample of both traces
    unsigned seed = 1;
};

struct CalibrateOptions {
    std::optional<double> target_field;
    std::optional<double> temperature;
};

// Each returns the process exit code. Errors propagate as exceptions.
int cmd_solve(const CommonOptions& common);
int cmd_sweep(const CommonOptions& common, const SweepOptions& opt);
int cmd_boundaries(const CommonOptions& common, const SweepOptions& opt);
int cmd_mce(const CommonOptions& common, const SweepOptions& sweep, const MceCommandOptions& opt);
int cmd_spectrum(const CommonOptions& common);
int cmd_ed(const CommonOptions& common, const EdOptions& opt);
int cmd_thz(const CommonOptions& common, const ThzOptions& opt);
int cmd_thz_synth(const CommonOptions& common, const ThzSynthOptions& opt);
int cmd_calibrate_gz(const CommonOptions& common, const SweepOptions& sweep, const CalibrateOptions& opt);

}  // namespace gjsim::cli
