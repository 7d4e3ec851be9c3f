#pragma once

// Exact diagonalization of the reduced g-J Hamiltonian on the permutation
// symmetric sector: one truncated boson mode times two collective spins
// j = N/4 (one per Er sublattice), with N0 = N/2 unit cells.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>

#include "gjsim/params.hpp"

namespace gjsim::ed {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;
using SparseR = Eigen::SparseMatrix<double>;

struct EdProblem {
    int n_spins = 8;  ///< total Er count N (even)
    int n_max = 20;   ///< boson cutoff
    ReducedParams params;
    ExternalConditions cond;
    std::size_t max_dimension = 6000;

    int n0() const { return n_spins / 2; }
    double j() const { return n_spins / 4.0; }
    std::size_t dimension() const;
    void validate() const;
};

/// Operators in the number basis |n> x |j, M_A> x |j, M_B>, index
/// (n * d + a) * d + b with d = 2j + 1 and M = j - a.
struct OperatorSet {
    SparseC a, a_dag;
    SparseC sx_a, sy_a, sz_a;
    SparseC sx_b, sy_b, sz_b;
    SparseR parity;  ///< sublattice swap times (-1)^n

    SparseC plus(char axis) const;   ///< Sigma_p^+ = Sigma_p^A + Sigma_p^B
    SparseC minus(char axis) const;  ///< Sigma_p^- = Sigma_p^A - Sigma_p^B
};

OperatorSet build_operators(const EdProblem& problem);

/// Hamiltonian after the gauge a -> i a, which turns i(a^+ - a) into a + a^+
/// and makes every matrix element real (meV).
Eigen::MatrixXd build_hamiltonian(const EdProblem& problem);

/// The same Hamiltonian in the original gauge, as a complex sparse matrix.
SparseC build_hamiltonian_complex(const EdProblem& problem);

struct EdResult {
    double ground_energy = 0.0;     ///< meV
    double gap = 0.0;               ///< meV
    double photon_number = 0.0;     ///< <a^+ a>
    double staggered_sq = 0.0;      ///< <(Sigma_z^-)^2> / (N/2)^2
    double x_staggered_sq = 0.0;    ///< <(Sigma_x^-)^2> / (N/2)^2
    double correlator = 0.0;        ///< <i(a^+ - a) Sigma_z^->
    double parity_expectation = 0.0;
    double sy_plus = 0.0;           ///< <Sigma_y^+>, zero by reality of H
    double sy_minus = 0.0;          ///< <Sigma_y^->
    double partition_function = 1.0;  ///< sum_k exp(-(E_k - E0)/kT); 1 for ground_state
    double temperature = 0.0;       ///< 0 for ground_state
    int dimension = 0;
    int n_max = 0;
    double truncation_shift = 0.0;  ///< |E0(n_max + 5) - E0(n_max)|
};

/// Lowest eigenpair, computed separately in the two parity sectors. Throws
/// NumericError when raising the cutoff by 5 moves E0 by more than 1e-8 meV.
EdResult ground_state(const EdProblem& problem, double truncation_tolerance = 1e-8);

/// Gibbs-state expectations from the full spectrum. Throws NumericError when
/// the dimension exceeds `dense_budget`.
EdResult thermal_observables(const EdProblem& problem, double temperature, std::size_t dense_budget = 4000);

/// Spectrum of the Hamiltonian (ascending), from both parity sectors.
Eigen::VectorXd spectrum(const EdProblem& problem);

/// Frobenius norm, an upper bound on the operator 2-norm.
double norm_bound(const SparseC& m);
double norm_bound(const Eigen::MatrixXd& m);

}  // namespace gjsim::ed
