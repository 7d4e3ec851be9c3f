#include "gjsim/units.hpp"

#include <stdexcept>
#include <string>

#include "gjsim/constants.hpp"

namespace gjsim {

EnergyUnit parse_energy_unit(std::string_view name) {
    if (name == "meV") return EnergyUnit::meV;
    if (name == "THz") return EnergyUnit::THz;
    if (name == "K") return EnergyUnit::K;
    if (name == "T") return EnergyUnit::Tesla;
    throw std::invalid_argument("unknown energy unit '" + std::string(name) + "'");
}

std::string_view to_string(EnergyUnit unit) {
    switch (unit) {
        case EnergyUnit::meV: return "meV";
        case EnergyUnit::THz: return "THz";
        case EnergyUnit::K: return "K";
        case EnergyUnit::Tesla: return "T";
    }
    return "?";
}

namespace {

// meV per unit of `unit`.
double scale(EnergyUnit unit, std::optional<double> g_factor) {
    switch (unit) {
        case EnergyUnit::meV: return 1.0;
        case EnergyUnit::THz: return kPhys.h;
        case EnergyUnit::K: return kPhys.k_b;
        case EnergyUnit::Tesla:
            if (!g_factor || !(*g_factor > 0.0))
                throw std::invalid_argument("conversion to/from T needs a positive g-factor");
            return *g_factor * kPhys.mu_b;
    }
    throw std::invalid_argument("unknown energy unit");
}

}  // namespace

double convert_energy(double value, EnergyUnit from, EnergyUnit to, std::optional<double> g_factor) {
    if (from == to) return value;
    return value * scale(from, g_factor) / scale(to, g_factor);
}

}  // namespace gjsim
