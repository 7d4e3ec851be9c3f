#include "gjsim/params.hpp"

#include <cmath>

#include "gjsim/error.hpp"

namespace gjsim {

namespace {

void require(bool ok, const char* key, const std::string& message) {
    if (!ok) throw ConfigError(key, message);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

double ReducedParams::lande_z() const {
    if (!g_lande_z) throw ConfigError("g_lande_z", "g_lande_z is not set; supply it or run calibrate-gz");
    return *g_lande_z;
}

double ReducedParams::zeeman(double b_field) const { return std::abs(lande_z() * kPhys.mu_b * b_field); }

void ReducedParams::validate() const {
    require(finite(omega_pi) && omega_pi > 0.0, "omega_pi", "omega_pi must be positive");
    require(finite(omega_er) && omega_er >= 0.0, "omega_er", "omega_er must be non-negative");
    require(finite(g), "g", "g must be finite");
    require(finite(j) && j >= 0.0, "j", "j must be non-negative");
    require(finite(z_er) && z_er > 0.0, "z_er", "z_er must be positive");
    require(finite(n0) && n0 > 0.0, "n0", "n0 must be positive");
    if (g_lande_z) require(finite(*g_lande_z) && *g_lande_z > 0.0, "g_lande_z", "g_lande_z must be positive");
}

void MicroParams::validate() const {
    for (double v : {j_fe, d_fe_y, a_x, a_z, a_xz, j_er, j_cross, d_x, d_y})
        require(finite(v), "micro", "micro couplings must be finite");
    const double twice = 2.0 * s_fe;
    require(s_fe > 0.0 && std::abs(twice - std::round(twice)) < 1e-12, "s_fe",
            "s_fe must be a positive half-integer");
    require(z_fe > 0, "z_fe", "z_fe must be a positive integer");
    require(z_er > 0, "z_er", "z_er must be a positive integer");
    for (double v : g_fe) require(finite(v) && v >= 0.0, "g_fe", "g_fe entries must be non-negative");
    for (double v : g_er) require(finite(v) && v >= 0.0, "g_er", "g_er entries must be non-negative");
}

void ExternalConditions::validate() const {
    require(finite(temperature) && temperature > 0.0, "temperature", "temperature must be positive");
    require(finite(b_field), "b_field", "b_field must be finite");
}

std::array<double, 3> ExternalConditions::field_vector() const {
    std::array<double, 3> b{0.0, 0.0, 0.0};
    b[static_cast<int>(axis)] = b_field;
    return b;
}

std::string to_string(FieldAxis axis) {
    switch (axis) {
        case FieldAxis::x: return "x";
        case FieldAxis::y: return "y";
        case FieldAxis::z: return "z";
    }
    return "?";
}

FieldAxis parse_field_axis(const std::string& name) {
    if (name == "x") return FieldAxis::x;
    if (name == "y") return FieldAxis::y;
    if (name == "z") return FieldAxis::z;
    throw ConfigError("field_axis", "field_axis must be one of x, y, z");
}

}  // namespace gjsim
