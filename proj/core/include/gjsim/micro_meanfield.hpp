#pragma once

// Two-sublattice mean-field theory of the Fe/Er spin Hamiltonian.
//
// Er spins are spin-1/2 and enter through Pauli expectations sigma (|sigma| <= 1);
// Fe spins are spin-S vectors (|S| <= S). Energies are per unit cell, i.e. one
// Er and one Fe spin on each of the sublattices A and B.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "gjsim/params.hpp"
#include "gjsim/solver.hpp"

namespace gjsim::micro {

using Vec3 = Eigen::Vector3d;

struct MicroState {
    Vec3 sigma_a = Vec3::Zero();
    Vec3 sigma_b = Vec3::Zero();
    Vec3 s_a = Vec3::Zero();
    Vec3 s_b = Vec3::Zero();
    double free_energy = 0.0;  ///< meV per unit cell
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string seed_id;
};

/// Mean fields in tesla, defined with the free-electron g-factor:
/// g mu_B b_er = 2 dE/dsigma, g mu_B b_fe = dE/dS.
struct MeanFields {
    Vec3 b_er_a = Vec3::Zero();
    Vec3 b_er_b = Vec3::Zero();
    Vec3 b_fe_a = Vec3::Zero();
    Vec3 b_fe_b = Vec3::Zero();
};

/// Classical energy per unit cell (meV).
double micro_energy(const MicroState& state, const MicroParams& params, const ExternalConditions& cond);

/// dE/dx for the packed coordinates (sigma_a, sigma_b, s_a, s_b), in meV.
Eigen::Matrix<double, 12, 1> micro_gradient(const MicroState& state, const MicroParams& params,
                                            const ExternalConditions& cond);

MeanFields micro_mean_fields(const MicroState& state, const MicroParams& params, const ExternalConditions& cond);

/// Brillouin function B_J(z).
double brillouin(double j, double z);

/// Free energy per unit cell; the single_site prescription is sum_s (F_Er^s + F_Fe^s) / 2.
double micro_free_energy(const MicroState& state, const MicroParams& params, const ExternalConditions& cond,
                         FreeEnergyPrescription prescription = FreeEnergyPrescription::variational);

/// Spin magnetization along z per unit cell, in units of mu_B.
double magnetization_z(const MicroState& state, const MicroParams& params);

struct MicroSeed {
    std::string id;
    MicroState state;
};

/// Gamma2 Fe order (Neel vector along z) combined with the Er N, S+-, A+- patterns,
/// followed by Gamma4 and Gamma12 Fe seeds.
std::vector<MicroSeed> default_micro_seeds(const MicroParams& params);

struct MicroSolution {
    MicroState best;
    std::vector<MicroState> candidates;
    std::vector<std::vector<double>> histories;
};

MicroSolution micro_solve_point(const MicroParams& params, const ExternalConditions& cond,
                                const std::vector<MicroSeed>& seeds, const SolverSettings& settings = {});

enum class ModeLabel { qAFM, qFM, er_like, mixed };
std::string to_string(ModeLabel label);

/// Participation of a mode in the Er coordinates and in the two Fe combinations.
/// The Fe combinations are the even (qAFM) and odd (qFM) projections under the
/// two-sublattice symmetry: sublattice swap composed with the pi rotation that
/// maps the equilibrium direction of S_B onto that of S_A.
struct Participation {
    double er = 0.0;
    double fe_qafm = 0.0;
    double fe_qfm = 0.0;
    std::array<double, 12> coordinates{};  ///< normalized weight per spin coordinate
};

struct ModeSpectrum {
    std::vector<double> frequencies;  ///< THz, ascending
    std::vector<ModeLabel> labels;
    std::vector<Participation> participation;
    double max_growth_rate = 0.0;  ///< largest |Re lambda| in meV; nonzero marks a saddle
    bool defective = false;        ///< eigenvector matrix nearly singular
};

/// 12x12 linearization of hbar dx/dt = -x cross (dE/dx) around an equilibrium.
Eigen::Matrix<double, 12, 12> dynamical_matrix(const MicroState& equilibrium, const MicroParams& params,
                                                const ExternalConditions& cond);

/// Torque -x cross (c dE/dx) for the packed coordinates (meV); zero at equilibrium.
Eigen::Matrix<double, 12, 1> torque(const MicroState& state, const MicroParams& params,
                                    const ExternalConditions& cond);

/// Throws NumericError if the equilibrium is not converged.
ModeSpectrum linearized_spectrum(const MicroState& equilibrium, const MicroParams& params,
                                 const ExternalConditions& cond, double label_threshold = 0.6);

}  // namespace gjsim::micro
