#pragma once

#include <string>

namespace gjsim {

/// How the thermodynamic free energy of a mean-field state is assembled.
///  - variational: sum of single-site free energies plus the interaction
///    double-counting correction, so F = U - T*S at self-consistency.
///  - single_site: sum of single-site free energies only (boson energy added for
///    the reduced model), no correction.
enum class FreeEnergyPrescription { variational, single_site };

std::string to_string(FreeEnergyPrescription p);
FreeEnergyPrescription parse_prescription(const std::string& name);

/// Settings shared by the self-consistent solvers.
struct SolverSettings {
    double tolerance = 1e-10;  ///< max-norm of the fixed-point residual
    int max_iterations = 10000;
    double mixing = 0.5;           ///< under-relaxation factor
    double min_mixing = 1.0 / 64;  ///< lower bound after automatic halving
    int stall_window = 50;         ///< iterations without improvement before halving
    /// Newton steps on the fixed-point residual once plain iteration has run
    /// for `newton_after` iterations; removes critical slowing down.
    bool newton_polish = true;
    int newton_after = 100;
    FreeEnergyPrescription prescription = FreeEnergyPrescription::variational;
    int threads = 0;  ///< 0 = hardware concurrency

    void validate() const;
};

}  // namespace gjsim
