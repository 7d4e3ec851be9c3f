#pragma once

#include <array>
#include <optional>
#include <string>

#include "gjsim/constants.hpp"

namespace gjsim {

/// Er-magnon couplings that the reduced model drops. Kept for the record only (meV).
struct DroppedCouplings {
    double g_x = 0.051 * kPhys.h;
    double g_y = 0.041 * kPhys.h;
    double g_y_prime = 3.1e-5 * kPhys.h;
    double g_z_prime = -0.040 * kPhys.h;
};

/// Parameters of the reduced g-J Hamiltonian. All energies in meV.
struct ReducedParams {
    double omega_pi = 0.896 * kPhys.h;  ///< qAFM magnon energy
    double omega_er = 0.023 * kPhys.h;  ///< Er two-level splitting at zero field
    double g = 0.48;                    ///< Er-magnon coupling
    double j = 0.037;                   ///< Er-Er exchange
    /// Er Landé factor along c. Unset until supplied or calibrated.
    std::optional<double> g_lande_z;
    double z_er = 6.0;  ///< Er coordination count
    double n0 = 8.0;    ///< number of unit cells; used only by exact diagonalization
    DroppedCouplings dropped;

    /// Landé factor, throwing if it was never set.
    double lande_z() const;
    /// Zeeman energy |g_z mu_B B| for a field in tesla.
    double zeeman(double b_field) const;
    void validate() const;
};

/// Parameters of the two-sublattice Fe/Er spin Hamiltonian. All energies in meV.
/// No defaults for couplings: they must come from a configuration file.
struct MicroParams {
    double j_fe = 0.0;
    double d_fe_y = 0.0;
    double a_x = 0.0;
    double a_z = 0.0;
    double a_xz = 0.0;
    double j_er = 0.0;
    double j_cross = 0.0;  ///< Fe-Er isotropic exchange
    double d_x = 0.0;      ///< Fe-Er DM, x component
    double d_y = 0.0;      ///< Fe-Er DM, y component
    std::array<double, 3> g_fe{0.0, 0.0, 0.0};
    std::array<double, 3> g_er{0.0, 0.0, 0.0};
    double s_fe = 2.5;
    int z_fe = 6;
    int z_er = 6;

    void validate() const;
};

enum class FieldAxis { x, y, z };

struct ExternalConditions {
    double temperature = 1.0;  ///< K
    double b_field = 0.0;      ///< mu0*H in tesla
    FieldAxis axis = FieldAxis::z;

    void validate() const;
    /// Applied field as a Cartesian vector (T).
    std::array<double, 3> field_vector() const;
};

std::string to_string(FieldAxis axis);
FieldAxis parse_field_axis(const std::string& name);

}  // namespace gjsim
