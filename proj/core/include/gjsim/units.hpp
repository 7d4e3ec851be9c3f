#pragma once

#include <optional>
#include <string_view>

namespace gjsim {

/// Energy-equivalent units. THz means h*nu, K means k_B*T and
/// Tesla means g*mu_B*B for a caller-supplied g-factor.
enum class EnergyUnit { meV, THz, K, Tesla };

EnergyUnit parse_energy_unit(std::string_view name);
std::string_view to_string(EnergyUnit unit);

/// Linear conversion between energy-equivalent units. `g_factor` is required
/// whenever either side is Tesla; throws std::invalid_argument otherwise.
double convert_energy(double value, EnergyUnit from, EnergyUnit to,
                      std::optional<double> g_factor = std::nullopt);

inline double thz_to_mev(double nu) { return convert_energy(nu, EnergyUnit::THz, EnergyUnit::meV); }
inline double mev_to_thz(double e) { return convert_energy(e, EnergyUnit::meV, EnergyUnit::THz); }

}  // namespace gjsim
