#include "gjsim/dicke_ed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gjsim/constants.hpp"
#include "gjsim/error.hpp"

namespace gjsim::ed {

namespace {

using Cplx = std::complex<double>;
using Triplets = std::vector<Eigen::Triplet<Cplx>>;

struct Layout {
    int nb;  // boson levels
    int d;   // 2j + 1
    int index(int n, int a, int b) const { return (n * d + a) * d + b; }
    int size() const { return nb * d * d; }
};

Layout layout(const EdProblem& p) { return {p.n_max + 1, p.n_spins / 2 + 1}; }

// Single-spin matrices on the 2j+1 states M = j - k.
struct SpinMatrices {
    Eigen::MatrixXcd x, y, z;
};

SpinMatrices spin_matrices(int d) {
    const double j = 0.5 * (d - 1);
    Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd jz = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double m = j - k;
        jz(k, k) = m;
        if (k > 0) jp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    SpinMatrices s;
    s.x = (0.5 * (jp + jp.transpose())).cast<Cplx>();
    s.y = (jp - jp.transpose()).cast<Cplx>() / Cplx(0.0, 2.0);
    s.z = jz.cast<Cplx>();
    return s;
}

enum class Slot { boson, a, b };

// Embeds a single-factor operator into the full tensor product space.
SparseC embed(const Layout& l, const Eigen::MatrixXcd& op, Slot slot) {
    Triplets t;
    for (int n = 0; n < l.nb; ++n)
        for (int a = 0; a < l.d; ++a)
            for (int b = 0; b < l.d; ++b) {
                const int col = l.index(n, a, b);
                const int local = slot == Slot::boson ? n : slot == Slot::a ? a : b;
                for (int r = 0; r < op.rows(); ++r) {
                    const Cplx v = op(r, local);
                    if (v == Cplx(0.0, 0.0)) continue;
                    const int row = slot == Slot::boson ? l.index(r, a, b)
                                    : slot == Slot::a   ? l.index(n, r, b)
                                                        : l.index(n, a, r);
                    t.emplace_back(row, col, v);
                }
            }
    SparseC m(l.size(), l.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

double zeeman_energy(const EdProblem& p) {
    if (p.cond.b_field == 0.0) return 0.0;
    if (p.cond.axis != FieldAxis::z) throw ConfigError("field_axis", "the reduced model only supports a field along z");
    return p.params.zeeman(p.cond.b_field);
}

SparseC hamiltonian(const EdProblem& p, const OperatorSet& ops, bool real_gauge) {
    const double n0 = p.n0();
    const ReducedParams& q = p.params;
    const SparseC sxp = ops.plus('x'), szp = ops.plus('z');
    const SparseC sxm = ops.minus('x'), szm = ops.minus('z');
    const SparseC quadrature = real_gauge ? SparseC(ops.a + ops.a_dag) : SparseC(Cplx(0.0, 1.0) * (ops.a_dag - ops.a));
    SparseC h = q.omega_pi * (ops.a_dag * ops.a);
    h += q.omega_er * sxp;
    h += zeeman_energy(p) * szp;
    h += q.g * std::sqrt(2.0 / n0) * (quadrature * szm);
    h += q.j * (q.z_er / n0) * (SparseC(sxp * sxp) + SparseC(szp * szp) - SparseC(sxm * sxm) - SparseC(szm * szm));
    h.prune(Cplx(0.0, 0.0));
    return h;
}

// Orthonormal bases of the parity-even and parity-odd sectors.
struct Sectors {
    SparseR even, odd;
};

Sectors parity_sectors(const Layout& l) {
    std::vector<Eigen::Triplet<double>> te, to;
    int ce = 0, co = 0;
    const double r = 1.0 / std::sqrt(2.0);
    for (int n = 0; n < l.nb; ++n) {
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        for (int a = 0; a < l.d; ++a)
            for (int b = a; b < l.d; ++b) {
                if (a == b) {
                    (sign > 0 ? te : to).emplace_back(l.index(n, a, a), sign > 0 ? ce++ : co++, 1.0);
                    continue;
                }
                te.emplace_back(l.index(n, a, b), ce, r);
                te.emplace_back(l.index(n, b, a), ce++, sign * r);
                to.emplace_back(l.index(n, a, b), co, r);
                to.emplace_back(l.index(n, b, a), co++, -sign * r);
            }
    }
    Sectors s{SparseR(l.size(), ce), SparseR(l.size(), co)};
    s.even.setFromTriplets(te.begin(), te.end());
    s.odd.setFromTriplets(to.begin(), to.end());
    return s;
}

SparseR real_part(const SparseC& m) {
    SparseR r = m.real();
    r.prune(0.0);
    return r;
}

struct SectorSpectrum {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;  // full-space vectors, one per column
};

SectorSpectrum diagonalize(const SparseR& h, const SparseR& basis, bool vectors) {
    const Eigen::MatrixXd block = Eigen::MatrixXd(basis.transpose() * (h * basis));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, vectors ? Eigen::ComputeEigenvectors
                                                                     : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    SectorSpectrum out;
    out.energies = es.eigenvalues();
    if (vectors) out.vectors = basis * es.eigenvectors();
    return out;
}

double lowest_energy(const EdProblem& p) {
    const OperatorSet ops = build_operators(p);
    const SparseR h = real_part(hamiltonian(p, ops, true));
    const Sectors sec = parity_sectors(layout(p));
    const double e = diagonalize(h, sec.even, false).energies.minCoeff();
    const double o = diagonalize(h, sec.odd, false).energies.minCoeff();
    return std::min(e, o);
}

double expect(const Eigen::VectorXd& psi, const SparseC& op) { return (psi.cast<Cplx>().dot(op * psi.cast<Cplx>())).real(); }

double expect_imag_safe(const Eigen::VectorXd& psi, const SparseC& op) {
    const Cplx v = psi.cast<Cplx>().dot(op * psi.cast<Cplx>());
    return std::abs(v.imag()) > std::abs(v.real()) ? v.imag() : v.real();
}

}  // namespace

std::size_t EdProblem::dimension() const {
    const std::size_t d = static_cast<std::size_t>(n_spins / 2 + 1);
    return static_cast<std::size_t>(n_max + 1) * d * d;
}

void EdProblem::validate() const {
    if (n_spins < 2 || n_spins % 2 != 0) throw ConfigError("n_spins", "n_spins must be a positive even number");
    if (n_max < 1) throw ConfigError("n_max", "n_max must be at least 1");
    params.validate();
    cond.validate();
    if (dimension() > max_dimension)
        throw NumericError("Hilbert dimension " + std::to_string(dimension()) + " exceeds the budget of " +
                           std::to_string(max_dimension));
}

SparseC OperatorSet::plus(char axis) const {
    switch (axis) {
        case 'x': return sx_a + sx_b;
        case 'y': return sy_a + sy_b;
        default: return sz_a + sz_b;
    }
}

SparseC OperatorSet::minus(char axis) const {
    switch (axis) {
        case 'x': return sx_a - sx_b;
        case 'y': return sy_a - sy_b;
        default: return sz_a - sz_b;
    }
}

OperatorSet build_operators(const EdProblem& problem) {
    problem.validate();
    const Layout l = layout(problem);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(l.nb, l.nb);
    for (int n = 1; n < l.nb; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const SpinMatrices s = spin_matrices(l.d);

    OperatorSet ops;
    ops.a = embed(l, a, Slot::boson);
    ops.a_dag = SparseC(ops.a.adjoint());
    ops.sx_a = embed(l, s.x, Slot::a);
    ops.sy_a = embed(l, s.y, Slot::a);
    ops.sz_a = embed(l, s.z, Slot::a);
    ops.sx_b = embed(l, s.x, Slot::b);
    ops.sy_b = embed(l, s.y, Slot::b);
    ops.sz_b = embed(l, s.z, Slot::b);

    std::vector<Eigen::Triplet<double>> t;
    for (int n = 0; n < l.nb; ++n)
        for (int i = 0; i < l.d; ++i)
            for (int k = 0; k < l.d; ++k) t.emplace_back(l.index(n, k, i), l.index(n, i, k), n % 2 == 0 ? 1.0 : -1.0);
    ops.parity.resize(l.size(), l.size());
    ops.parity.setFromTriplets(t.begin(), t.end());
    return ops;
}

Eigen::MatrixXd build_hamiltonian(const EdProblem& problem) {
    const OperatorSet ops = build_operators(problem);
    const SparseC h = hamiltonian(problem, ops, true);
    return Eigen::MatrixXd(h.real());
}

SparseC build_hamiltonian_complex(const EdProblem& problem) {
    return hamiltonian(problem, build_operators(problem), false);
}

EdResult ground_state(const EdProblem& problem, double truncation_tolerance) {
    const OperatorSet ops = build_operators(problem);
    const SparseR h = real_part(hamiltonian(problem, ops, true));
    const Sectors sec = parity_sectors(layout(problem));
    const SectorSpectrum even = diagonalize(h, sec.even, true);
    const SectorSpectrum odd = diagonalize(h, sec.odd, true);

    const bool even_lowest = even.energies[0] <= odd.energies[0];
    const SectorSpectrum& g = even_lowest ? even : odd;
    const SectorSpectrum& other = even_lowest ? odd : even;
    EdResult r;
    r.ground_energy = g.energies[0];
    double next = other.energies[0];
    if (g.energies.size() > 1) next = std::min(next, g.energies[1]);
    r.gap = next - r.ground_energy;

    const Eigen::VectorXd psi = g.vectors.col(0);
    const double half = problem.n_spins / 2.0;
    const SparseC szm = ops.minus('z'), sxm = ops.minus('x');
    r.photon_number = expect(psi, ops.a_dag * ops.a);
    r.staggered_sq = expect(psi, szm * szm) / (half * half);
    r.x_staggered_sq = expect(psi, sxm * sxm) / (half * half);
    r.correlator = expect(psi, SparseC(ops.a + ops.a_dag) * szm);  // i(a^+ - a) in the rotated gauge
    r.parity_expectation = psi.dot(ops.parity * psi);
    r.sy_plus = expect_imag_safe(psi, ops.plus('y'));
    r.sy_minus = expect_imag_safe(psi, ops.minus('y'));
    r.dimension = static_cast<int>(problem.dimension());
    r.n_max = problem.n_max;

    EdProblem bigger = problem;
    bigger.n_max += 5;
    bigger.max_dimension = std::max(problem.max_dimension, bigger.dimension());
    r.truncation_shift = std::abs(lowest_energy(bigger) - r.ground_energy);
    if (r.truncation_shift > truncation_tolerance)
        throw NumericError("boson truncation not converged (|dE0| = " + std::to_string(r.truncation_shift) +
                           " meV); increase n_max");
    return r;
}

EdResult thermal_observables(const EdProblem& problem, double temperature, std::size_t dense_budget) {
    if (!(temperature > 0.0)) throw ConfigError("temperature", "temperature must be positive");
    if (problem.dimension() > dense_budget)
        throw NumericError("dimension " + std::to_string(problem.dimension()) + " exceeds the dense budget of " +
                           std::to_string(dense_budget));
    const OperatorSet ops = build_operators(problem);
    const SparseR h = real_part(hamiltonian(problem, ops, true));
    const Sectors sec = parity_sectors(layout(problem));
    const SectorSpectrum sectors[2] = {diagonalize(h, sec.even, true), diagonalize(h, sec.odd, true)};

    const double e0 = std::min(sectors[0].energies[0], sectors[1].energies[0]);
    double e1 = std::numeric_limits<double>::infinity();
    for (const auto& s : sectors)
        for (Eigen::Index k = 0; k < s.energies.size(); ++k)
            if (s.energies[k] > e0) e1 = std::min(e1, s.energies[k]);
    if (sectors[0].energies.size() > 1 && sectors[0].energies[0] == e0) e1 = std::min(e1, sectors[0].energies[1]);
    if (sectors[1].energies.size() > 1 && sectors[1].energies[0] == e0) e1 = std::min(e1, sectors[1].energies[1]);

    const double kt = kPhys.k_b * temperature;
    const double half = problem.n_spins / 2.0;
    const SparseC szm = ops.minus('z'), sxm = ops.minus('x');
    const SparseC num = ops.a_dag * ops.a;
    const SparseC szm2 = szm * szm, sxm2 = sxm * sxm;
    const SparseC corr = SparseC(ops.a + ops.a_dag) * szm;
    const SparseC syp = ops.plus('y'), sym = ops.minus('y');

    EdResult r;
    double z = 0.0;
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (int s = 0; s < 2; ++s) {
        const SectorSpectrum& sp = sectors[s];
        const double parity = s == 0 ? 1.0 : -1.0;
        for (Eigen::Index k = 0; k < sp.energies.size(); ++k) {
            const double w = std::exp(-(sp.energies[k] - e0) / kt);
            if (w == 0.0) continue;
            const Eigen::VectorXd psi = sp.vectors.col(k);
            z += w;
            acc[0] += w * expect(psi, num);
            acc[1] += w * expect(psi, szm2);
            acc[2] += w * expect(psi, sxm2);
            acc[3] += w * expect(psi, corr);
            acc[4] += w * parity;
            acc[5] += w * expect_imag_safe(psi, syp);
            acc[6] += w * expect_imag_safe(psi, sym);
            acc[7] += w * sp.energies[k];
        }
    }
    r.ground_energy = e0;
    r.gap = e1 - e0;
    r.photon_number = acc[0] / z;
    r.staggered_sq = acc[1] / z / (half * half);
    r.x_staggered_sq = acc[2] / z / (half * half);
    r.correlator = acc[3] / z;
    r.parity_expectation = acc[4] / z;
    r.sy_plus = acc[5] / z;
    r.sy_minus = acc[6] / z;
    r.partition_function = z;
    r.temperature = temperature;
    r.dimension = static_cast<int>(problem.dimension());
    r.n_max = problem.n_max;
    return r;
}

Eigen::VectorXd spectrum(const EdProblem& problem) {
    const OperatorSet ops = build_operators(problem);
    const SparseR h = real_part(hamiltonian(problem, ops, true));
    const Sectors sec = parity_sectors(layout(problem));
    const Eigen::VectorXd e = diagonalize(h, sec.even, false).energies;
    const Eigen::VectorXd o = diagonalize(h, sec.odd, false).energies;
    Eigen::VectorXd all(e.size() + o.size());
    all << e, o;
    std::sort(all.data(), all.data() + all.size());
    return all;
}

double norm_bound(const SparseC& m) { return m.norm(); }
double norm_bound(const Eigen::MatrixXd& m) { return m.norm(); }

}  // namespace gjsim::ed
