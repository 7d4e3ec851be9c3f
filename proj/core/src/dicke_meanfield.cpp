#include "gjsim/dicke_meanfield.hpp"

#include <cmath>
#include <limits>

#include "fixed_point.hpp"
#include "gjsim/constants.hpp"
#include "gjsim/error.hpp"

namespace gjsim::dicke {

namespace {

constexpr double kDegenerateField = 1e-14;  // meV
const double kSqrt2 = std::sqrt(2.0);

double zeeman_energy(const ReducedParams& params, const ExternalConditions& cond) {
    if (cond.b_field == 0.0) return 0.0;
    if (cond.axis != FieldAxis::z) throw ConfigError("field_axis", "the reduced model only supports a field along z");
    return params.zeeman(cond.b_field);
}

double log_2cosh(double y) {
    const double a = std::abs(y);
    return a + std::log1p(std::exp(-2.0 * a));
}

// Entropy (units of k_B) of a spin-1/2 with polarization p in [0, 1].
double spin_half_entropy(double p) {
    p = std::min(std::abs(p), 1.0);
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    return std::log(2.0) - 0.5 * (xlogx(1.0 + p) + xlogx(1.0 - p));
}

Vec3 thermal_polarization(const Vec3& h, double kt) {
    const double norm = h.norm();
    if (!std::isfinite(norm)) throw NumericError("non-finite effective field in sc_update");
    if (norm < kDegenerateField) return Vec3::Zero();
    return -std::tanh(norm / (2.0 * kt)) * (h / norm);
}

Eigen::VectorXd pack(const ErSublatticeState& s) {
    Eigen::VectorXd x(6);
    x << s.m_a, s.m_b;
    return x;
}

ErSublatticeState unpack(const Eigen::VectorXd& x) {
    return {x.segment<3>(0), x.segment<3>(3)};
}

}  // namespace

double staggered_z(const ErSublatticeState& spins) { return 0.5 * (spins.m_a.z() - spins.m_b.z()); }

BosonAmplitude boson_displacement(const ErSublatticeState& spins, const ReducedParams& params) {
    // minimize w_pi |alpha|^2 + sqrt(2) g Im(alpha) (m_a,z - m_b,z)
    const double d = spins.m_a.z() - spins.m_b.z();
    const double im = -params.g * d / (kSqrt2 * params.omega_pi);
    return {std::complex<double>(0.0, im == 0.0 ? 0.0 : im)};
}

double coherent_energy(const ErSublatticeState& spins, const BosonAmplitude& boson, const ReducedParams& params,
                       const ExternalConditions& cond) {
    const Vec3& a = spins.m_a;
    const Vec3& b = spins.m_b;
    const double wz = zeeman_energy(params, cond);
    return params.omega_pi * std::norm(boson.alpha) + 0.5 * params.omega_er * (a.x() + b.x()) +
           0.5 * wz * (a.z() + b.z()) + kSqrt2 * params.g * boson.alpha.imag() * (a.z() - b.z()) +
           params.z_er * params.j * (a.x() * b.x() + a.z() * b.z());
}

double mean_field_energy(const ErSublatticeState& spins, const ReducedParams& params,
                         const ExternalConditions& cond) {
    return coherent_energy(spins, boson_displacement(spins, params), params, cond);
}

EffectiveFields effective_fields(const ErSublatticeState& spins, const BosonAmplitude& boson,
                                 const ReducedParams& params, const ExternalConditions& cond) {
    const double wz = zeeman_energy(params, cond);
    const double zj2 = 2.0 * params.z_er * params.j;
    const double boson_term = 2.0 * kSqrt2 * params.g * boson.alpha.imag();
    EffectiveFields h;
    h.a = Vec3(params.omega_er + zj2 * spins.m_b.x(), 0.0, wz + boson_term + zj2 * spins.m_b.z());
    h.b = Vec3(params.omega_er + zj2 * spins.m_a.x(), 0.0, wz - boson_term + zj2 * spins.m_a.z());
    return h;
}

ReducedState sc_update(const ReducedState& state, const ReducedParams& params, const ExternalConditions& cond,
                       double mixing) {
    cond.validate();
    const double kt = kPhys.k_b * cond.temperature;
    const EffectiveFields h = effective_fields(state.spins, state.boson, params, cond);
    const Vec3 ua = thermal_polarization(h.a, kt);
    const Vec3 ub = thermal_polarization(h.b, kt);

    ReducedState next = state;
    next.residual = std::max((ua - state.spins.m_a).cwiseAbs().maxCoeff(),
                             (ub - state.spins.m_b).cwiseAbs().maxCoeff());
    next.spins.m_a = (1.0 - mixing) * state.spins.m_a + mixing * ua;
    next.spins.m_b = (1.0 - mixing) * state.spins.m_b + mixing * ub;
    next.boson = boson_displacement(next.spins, params);
    next.converged = false;
    return next;
}

double free_energy(const ReducedState& state, const ReducedParams& params, const ExternalConditions& cond,
                   FreeEnergyPrescription prescription) {
    if (!(cond.temperature > 0.0)) throw ConfigError("temperature", "temperature must be positive");
    const double kt = kPhys.k_b * cond.temperature;
    const EffectiveFields h = effective_fields(state.spins, state.boson, params, cond);
    const double single_site = -kt * (log_2cosh(h.a.norm() / (2.0 * kt)) + log_2cosh(h.b.norm() / (2.0 * kt)));
    if (prescription == FreeEnergyPrescription::single_site)
        return params.omega_pi * std::norm(state.boson.alpha) + 0.5 * single_site;

    const double energy = coherent_energy(state.spins, state.boson, params, cond);
    const double decoupled = 0.5 * (h.a.dot(state.spins.m_a) + h.b.dot(state.spins.m_b));
    return 0.5 * (single_site + energy - decoupled);
}

double variational_functional(const ErSublatticeState& spins, const ReducedParams& params,
                              const ExternalConditions& cond) {
    const double kt = kPhys.k_b * cond.temperature;
    const double entropy = spin_half_entropy(spins.m_a.norm()) + spin_half_entropy(spins.m_b.norm());
    return 0.5 * (mean_field_energy(spins, params, cond) - kt * entropy);
}

double internal_energy(const ReducedState& state, const ReducedParams& params, const ExternalConditions& cond) {
    return 0.5 * coherent_energy(state.spins, state.boson, params, cond);
}

std::vector<Seed> default_seeds() {
    auto make = [](std::string id, Vec3 a, Vec3 b) { return Seed{std::move(id), {a, b}}; };
    return {
        make("N", Vec3::Zero(), Vec3::Zero()),
        make("S+", Vec3(0.0, 0.0, 0.9), Vec3(0.0, 0.0, -0.9)),
        make("S-", Vec3(0.0, 0.0, -0.9), Vec3(0.0, 0.0, 0.9)),
        make("A+", Vec3(0.9, 0.0, 0.1), Vec3(-0.9, 0.0, 0.1)),
        make("A-", Vec3(-0.9, 0.0, 0.1), Vec3(0.9, 0.0, 0.1)),
    };
}

PointSolution solve_point(const ReducedParams& params, const ExternalConditions& cond, const std::vector<Seed>& seeds,
                          const SolverSettings& settings) {
    if (seeds.empty()) throw std::invalid_argument("solve_point needs at least one seed");
    settings.validate();
    cond.validate();
    const double kt = kPhys.k_b * cond.temperature;

    const detail::UpdateMap update = [&](const Eigen::VectorXd& x) {
        const ErSublatticeState s = unpack(x);
        const EffectiveFields h = effective_fields(s, boson_displacement(s, params), params, cond);
        Eigen::VectorXd g(6);
        g << thermal_polarization(h.a, kt), thermal_polarization(h.b, kt);
        return g;
    };
    const detail::BlockBounds bounds{1.0, 1.0};

    PointSolution out;
    int best = -1;
    for (const Seed& seed : seeds) {
        detail::FixedPointResult fp = detail::iterate_fixed_point(pack(seed.spins), update, bounds, settings);
        ReducedState st;
        st.spins = unpack(fp.x);
        st.boson = boson_displacement(st.spins, params);
        st.residual = fp.residual;
        st.converged = fp.converged;
        st.iterations = fp.iterations;
        st.seed_id = seed.id;
        st.free_energy = free_energy(st, params, cond, settings.prescription);
        out.histories.push_back(std::move(fp.history));
        out.candidates.push_back(st);
        if (!st.converged) continue;
        const int idx = static_cast<int>(out.candidates.size()) - 1;
        if (best < 0) {
            best = idx;
            continue;
        }
        const double fb = out.candidates[best].free_energy;
        const double tie = 1e-12 * std::max(1.0, std::abs(fb));
        if (st.free_energy < fb - tie) best = idx;
    }
    if (best < 0) throw SolverError("no seed converged", out.histories);
    out.best = out.candidates[best];
    return out;
}

}  // namespace gjsim::dicke
