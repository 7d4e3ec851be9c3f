#pragma once

// Phase diagrams in the (T, B) plane: sweeps, N/S/A classification, boundary
// extraction, g_z calibration, entropy and adiabatic (magnetocaloric) traces.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gjsim/dicke_meanfield.hpp"
#include "gjsim/micro_meanfield.hpp"
#include "gjsim/params.hpp"
#include "gjsim/solver.hpp"

namespace gjsim::atlas {

enum class Phase { N, S, A };
std::string to_string(Phase phase);

struct OrderParameters {
    double ez = 0.0;          ///< |m_a,z - m_b,z| / 2
    double ex = 0.0;          ///< |m_a,x - m_b,x| / 2
    double condensate = 0.0;  ///< |Im alpha| (reduced) or |S_a,y - S_b,y| / 2S (microscopic)
    double mz_total = 0.0;    ///< |m_a,z + m_b,z| / 2
};

OrderParameters order_parameters(const dicke::ReducedState& state);
OrderParameters order_parameters(const micro::MicroState& state, const MicroParams& params);

/// threshold: S if condensate or ez reaches eps, else A if ex does, else N.
/// dominance: N if every order parameter is below eps; otherwise S when the
/// condensate reaches eps and max(ez, condensate) >= ex, else A.
enum class ClassifyRule { dominance, threshold };
std::string to_string(ClassifyRule rule);
ClassifyRule parse_classify_rule(const std::string& name);

Phase classify(const OrderParameters& op, double eps = 1e-3, ClassifyRule rule = ClassifyRule::dominance);

enum class Model { reduced, micro };
std::string to_string(Model model);
Model parse_model(const std::string& name);

struct SweepSettings {
    double t_min = 0.5;
    double t_max = 6.0;
    double h_min = 0.0;
    double h_max = 1.5;
    int t_points = 60;
    int h_points = 60;
    Model model = Model::reduced;
    double eps = 1e-3;
    double delta_jump = 0.1;
    ClassifyRule rule = ClassifyRule::dominance;
    bool refine_boundaries = true;
    double refine_tolerance = 1e-6;  ///< bracket width for boundary bisection (K or T)
    double mce_dh = 5e-3;            ///< T
    double calibrate_field = 1.0;    ///< target A->N field for calibrate_gz (T)
    double calibrate_temperature = 0.5;

    void validate() const;
    std::vector<double> t_grid() const;
    std::vector<double> h_grid() const;
};

struct Cell {
    double t = 0.0;
    double h = 0.0;
    Phase phase = Phase::N;
    OrderParameters op;
    double free_energy = 0.0;
    double residual = 0.0;
    bool converged = false;
    std::string seed_id;
    Eigen::VectorXd state;  ///< packed spin coordinates, used for warm starts
};

/// Solves one (T, B) point; `warm` is an optional extra seed.
using PointSolver = std::function<Cell(double t, double h, const Cell* warm)>;

PointSolver reduced_point_solver(const ReducedParams& params, const SolverSettings& settings, double eps,
                                 ClassifyRule rule);
PointSolver micro_point_solver(const MicroParams& params, const SolverSettings& settings, double eps,
                               ClassifyRule rule);

struct PhaseMap {
    std::vector<double> t_grid;
    std::vector<double> h_grid;
    std::vector<Cell> cells;  ///< cell (i, j) at i * h_grid.size() + j
    int failed = 0;
    Model model = Model::reduced;
    std::optional<double> g_lande_z;

    const Cell& at(std::size_t it, std::size_t ih) const { return cells[it * h_grid.size() + ih]; }
    Cell& at(std::size_t it, std::size_t ih) { return cells[it * h_grid.size() + ih]; }
};

/// Evaluates every cell. Columns of constant T run in parallel; within a
/// column cells are solved in increasing B with the previous cell as warm
/// start. Throws SolverError when more than 10% of the cells fail.
PhaseMap sweep(const PointSolver& solver, const SweepSettings& settings, int threads = 0);
PhaseMap sweep(const ReducedParams& params, const SweepSettings& settings, const SolverSettings& solver = {});
PhaseMap sweep(const MicroParams& params, const SweepSettings& settings, const SolverSettings& solver = {});

/// The same map with T and B exchanged.
PhaseMap transpose(const PhaseMap& map);

enum class TransitionOrder { first, second };
std::string to_string(TransitionOrder order);

struct BoundaryPoint {
    double t = 0.0;
    double h = 0.0;
    double jump = 0.0;  ///< largest order-parameter change across the crossing
    bool operator==(const BoundaryPoint&) const = default;
};

struct Boundary {
    Phase low = Phase::N;  ///< the two phases, ordered N < S < A
    Phase high = Phase::N;
    TransitionOrder order = TransitionOrder::second;
    double jump = 0.0;  ///< max jump along the boundary
    std::vector<BoundaryPoint> points;  ///< sorted by (t, h)
};

struct BoundarySet {
    std::vector<Boundary> boundaries;
    std::optional<BoundaryPoint> triple_point;

    const Boundary* find(Phase a, Phase b) const;
};

struct BoundaryOptions {
    double delta_jump = 0.1;
    double refine_tolerance = 1e-6;
    int threads = 0;
};

/// Boundary crossings between neighboring cells with different labels. With a
/// `refine` solver each crossing is bisected along its grid edge and the jump
/// is measured across the final bracket; without one it is the difference of
/// the two cells. The triple point is the centroid of all 2x2 blocks holding
/// three labels, then re-estimated on a 4x finer grid around it when `refine`
/// is available.
BoundarySet extract_boundaries(const PhaseMap& map, const BoundaryOptions& options = {},
                               const PointSolver* refine = nullptr);

/// Lowest field above which the state at temperature t is normal, found by
/// doubling from `h_start` and bisecting to `tolerance`.
double upper_critical_field(const ReducedParams& params, double t, const SolverSettings& settings, double eps,
                            double tolerance = 1e-5, double h_start = 0.05, double h_limit = 200.0);

struct CalibrationStep {
    double g_lande_z = 0.0;
    double critical_field = 0.0;
};

struct Calibration {
    double g_lande_z = 0.0;
    double critical_field = 0.0;
    std::vector<CalibrationStep> history;
};

/// Bisection on g_z in [g_lo, g_hi] so the A->N critical field at `temperature`
/// matches `target_field` within `field_tolerance`.
Calibration calibrate_gz(const ReducedParams& params, double target_field, double temperature,
                         const SolverSettings& settings = {}, double eps = 1e-3, double field_tolerance = 1e-3,
                         double g_lo = 0.5, double g_hi = 20.0);

/// Entropy per spin (meV/K) as -dF/dT by central differences; both endpoints
/// are seeded with the equilibrium state at T. The step defaults to 1e-3 T;
/// a fixed step loses accuracy at low T where S is exponentially small.
double entropy(const ReducedParams& params, const ExternalConditions& cond, const SolverSettings& settings = {},
               std::optional<double> dt = std::nullopt);

/// Entropy per spin from the identity (U - F) / T of the equilibrium state.
double entropy_identity(const ReducedParams& params, const ExternalConditions& cond,
                        const SolverSettings& settings = {});

struct MceStep {
    double h = 0.0;
    double t = 0.0;
    double dt_dh = 0.0;  ///< K/T
    Phase phase = Phase::N;
};

struct MceOptions {
    double dh = 5e-3;
    double t_tolerance = 1e-7;
    double derivative_dt = 1e-3;
    double derivative_dh = 1e-3;
    double eps = 1e-3;
    ClassifyRule rule = ClassifyRule::dominance;
};

/// Ideal adiabat through (t0, h_start): T(B) keeps the entropy fixed.
std::vector<MceStep> mce_trace(const ReducedParams& params, double t0, double h_start, double h_end,
                               const SolverSettings& settings = {}, const MceOptions& options = {});

/// Indices of local maxima of dT/dB that rise above their neighbors by more
/// than `floor` within `window` steps.
std::vector<std::size_t> mce_maxima(const std::vector<MceStep>& trace, double floor = 1e-4, int window = 3);

/// Fields at which the phase label changes along the trace (midpoints).
std::vector<double> mce_crossings(const std::vector<MceStep>& trace);

}  // namespace gjsim::atlas
