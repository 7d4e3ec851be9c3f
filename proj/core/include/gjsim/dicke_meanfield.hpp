#pragma once

// Thermal mean-field theory of the reduced g-J Hamiltonian
//
//   H = w_pi a^+a + w_Er Sx+ + w_z Sz+ + g sqrt(2/N0) i(a^+ - a) Sz-
//       + J (z/N0) [(Sx+)^2 + (Sz+)^2 - (Sx-)^2 - (Sz-)^2]
//
// with S^A = (N0/2) m_a, S^B = (N0/2) m_b and a = sqrt(N0) alpha. Energies are
// per unit cell (two Er spins), free energies are per spin.

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "gjsim/params.hpp"
#include "gjsim/solver.hpp"

namespace gjsim::dicke {

using Vec3 = Eigen::Vector3d;

/// Per-spin Pauli expectations <sigma> on the two Er sublattices.
struct ErSublatticeState {
    Vec3 m_a = Vec3::Zero();
    Vec3 m_b = Vec3::Zero();
};

/// Coherent displacement of the qAFM mode, normalized per sqrt(N0).
struct BosonAmplitude {
    std::complex<double> alpha{0.0, 0.0};
};

struct ReducedState {
    ErSublatticeState spins;
    BosonAmplitude boson;
    double free_energy = 0.0;  ///< meV per spin
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string seed_id;
};

/// Fields h^s = 2 dE/dm^s in meV; a spin in field h has levels +-|h|/2.
struct EffectiveFields {
    Vec3 a = Vec3::Zero();
    Vec3 b = Vec3::Zero();
};

/// Staggered z polarization <Sz-> per unit cell, i.e. (m_a,z - m_b,z)/2.
double staggered_z(const ErSublatticeState& spins);

/// Boson amplitude minimizing the coherent-state energy at fixed spins.
BosonAmplitude boson_displacement(const ErSublatticeState& spins, const ReducedParams& params);

/// Coherent-state energy per unit cell for an arbitrary boson amplitude.
double coherent_energy(const ErSublatticeState& spins, const BosonAmplitude& boson, const ReducedParams& params,
                       const ExternalConditions& cond);

/// Coherent-state energy per unit cell with the boson at its optimum.
double mean_field_energy(const ErSublatticeState& spins, const ReducedParams& params, const ExternalConditions& cond);

EffectiveFields effective_fields(const ErSublatticeState& spins, const BosonAmplitude& boson,
                                 const ReducedParams& params, const ExternalConditions& cond);

/// One tanh self-consistency step: m^s <- (1-mixing) m^s - mixing tanh(|h^s|/2kT) h^s/|h^s|,
/// boson re-minimized afterwards. `residual` of the result is measured on the input state.
ReducedState sc_update(const ReducedState& state, const ReducedParams& params, const ExternalConditions& cond,
                       double mixing = 1.0);

/// Free energy per spin. Throws ConfigError when T <= 0.
double free_energy(const ReducedState& state, const ReducedParams& params, const ExternalConditions& cond,
                   FreeEnergyPrescription prescription = FreeEnergyPrescription::variational);

/// Variational functional (E(m) - T S(m)) / 2 per spin, defined for any |m| <= 1.
/// Stationary exactly at the tanh fixed points; equals free_energy there.
double variational_functional(const ErSublatticeState& spins, const ReducedParams& params,
                              const ExternalConditions& cond);

/// Mean-field internal energy per spin (E/2).
double internal_energy(const ReducedState& state, const ReducedParams& params, const ExternalConditions& cond);

struct Seed {
    std::string id;
    ErSublatticeState spins;
};

/// Normal, S+, S-, A+, A- in that priority order.
std::vector<Seed> default_seeds();

struct PointSolution {
    ReducedState best;
    std::vector<ReducedState> candidates;  ///< one per seed, in seed order
    std::vector<std::vector<double>> histories;
};

/// Converges every seed and returns the lowest free-energy converged state.
/// Ties within 1e-12 relative go to the earlier seed. Throws SolverError when
/// no seed converges.
PointSolution solve_point(const ReducedParams& params, const ExternalConditions& cond, const std::vector<Seed>& seeds,
                          const SolverSettings& settings = {});

}  // namespace gjsim::dicke
