#include "gjsim/solver.hpp"

#include <cmath>

#include "gjsim/error.hpp"

namespace gjsim {

std::string to_string(FreeEnergyPrescription p) {
    return p == FreeEnergyPrescription::single_site ? "single_site" : "variational";
}

FreeEnergyPrescription parse_prescription(const std::string& name) {
    if (name == "variational") return FreeEnergyPrescription::variational;
    if (name == "single_site") return FreeEnergyPrescription::single_site;
    throw ConfigError("free_energy_prescription", "free_energy_prescription must be 'single_site' or 'variational'");
}

void SolverSettings::validate() const {
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ConfigError("tolerance", "tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations", "max_iterations must be at least 1");
    if (!(mixing > 0.0 && mixing <= 1.0)) throw ConfigError("mixing", "mixing must lie in (0, 1]");
    if (!(min_mixing > 0.0 && min_mixing <= mixing)) throw ConfigError("min_mixing", "min_mixing must lie in (0, mixing]");
    if (stall_window < 1) throw ConfigError("stall_window", "stall_window must be at least 1");
    if (newton_after < 1) throw ConfigError("newton_after", "newton_after must be at least 1");
    if (threads < 0) throw ConfigError("threads", "threads must be non-negative");
}

}  // namespace gjsim
