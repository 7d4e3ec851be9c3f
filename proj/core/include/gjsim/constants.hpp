#pragma once

#include <numbers>

namespace gjsim {

/// Physical constants in the units used throughout the library
/// (energies in meV, frequencies in THz, temperatures in K, fields in T).
struct PhysConstants {
    double h = 4.135667696;    ///< meV / THz
    double k_b = 0.08617333;   ///< meV / K
    double mu_b = 0.05788382;  ///< meV / T
    double c = 2.99792458e8;   ///< m / s
};

inline constexpr PhysConstants kPhys{};

/// Free-electron g-factor; prefactor of the spin equations of motion.
inline constexpr double kFreeElectronG = 2.0023;

inline constexpr double kPi = std::numbers::pi;

}  // namespace gjsim
