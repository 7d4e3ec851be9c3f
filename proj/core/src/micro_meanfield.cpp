#include "gjsim/micro_meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fixed_point.hpp"
#include "gjsim/constants.hpp"
#include "gjsim/error.hpp"

namespace gjsim::micro {

namespace {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

constexpr double kDegenerateField = 1e-14;  // meV

Vec3 field_vector(const ExternalConditions& cond) {
    const auto b = cond.field_vector();
    return Vec3(b[0], b[1], b[2]);
}

Vec3 diag(const std::array<double, 3>& g) { return Vec3(g[0], g[1], g[2]); }

Vec12 pack(const MicroState& s) {
    Vec12 x;
    x << s.sigma_a, s.sigma_b, s.s_a, s.s_b;
    return x;
}

void unpack(const Eigen::Ref<const Eigen::VectorXd>& x, MicroState& s) {
    s.sigma_a = x.segment<3>(0);
    s.sigma_b = x.segment<3>(3);
    s.s_a = x.segment<3>(6);
    s.s_b = x.segment<3>(9);
}

// DM vectors D^{s,s'} for (Er sublattice s, Fe sublattice s').
Vec3 dm_vector(const MicroParams& p, int s, int sp) {
    static constexpr double sx[2][2] = {{1.0, -1.0}, {-1.0, 1.0}};
    static constexpr double sy[2][2] = {{1.0, -1.0}, {1.0, -1.0}};
    return Vec3(sx[s][sp] * p.d_x, sy[s][sp] * p.d_y, 0.0);
}

double log_2cosh(double y) {
    const double a = std::abs(y);
    return a + std::log1p(std::exp(-2.0 * a));
}

double log_sinh(double u) { return u + std::log1p(-std::exp(-2.0 * u)) - std::log(2.0); }

// ln Z of a spin S in a field with x = |b| / kT.
double log_z_spin(double s, double x) {
    x = std::abs(x);
    if (x < 1e-4) return std::log(2.0 * s + 1.0) + s * (s + 1.0) * x * x / 6.0;
    return log_sinh((s + 0.5) * x) - log_sinh(0.5 * x);
}

Eigen::Matrix3d cross_matrix(const Vec3& v) {
    Eigen::Matrix3d m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
}

}  // namespace

Vec12 micro_gradient(const MicroState& st, const MicroParams& p, const ExternalConditions& cond) {
    const Vec3 b = field_vector(cond);
    const Vec3 zeeman_er = 0.5 * kPhys.mu_b * diag(p.g_er).cwiseProduct(b);
    const Vec3 zeeman_fe = kPhys.mu_b * diag(p.g_fe).cwiseProduct(b);
    const Vec3* sigma[2] = {&st.sigma_a, &st.sigma_b};
    const Vec3* spin[2] = {&st.s_a, &st.s_b};

    Vec3 g_sigma[2];
    Vec3 g_spin[2];
    for (int s = 0; s < 2; ++s) {
        g_sigma[s] = zeeman_er + p.z_er * p.j_er * *sigma[1 - s];
        g_spin[s] = zeeman_fe + p.z_fe * p.j_fe * *spin[1 - s];
    }
    for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
            const Vec3 d = dm_vector(p, s, sp);
            g_sigma[s] += p.j_cross * *spin[sp] + spin[sp]->cross(d);
            g_spin[sp] += p.j_cross * *sigma[s] + d.cross(*sigma[s]);
        }
    }
    const double dz = p.d_fe_y * p.z_fe;
    g_spin[0] += dz * Vec3(st.s_b.z(), 0.0, -st.s_b.x());
    g_spin[1] += dz * Vec3(-st.s_a.z(), 0.0, st.s_a.x());
    g_spin[0] -= Vec3(2.0 * p.a_x * st.s_a.x() + p.a_xz * st.s_a.z(), 0.0,
                      2.0 * p.a_z * st.s_a.z() + p.a_xz * st.s_a.x());
    g_spin[1] -= Vec3(2.0 * p.a_x * st.s_b.x() - p.a_xz * st.s_b.z(), 0.0,
                      2.0 * p.a_z * st.s_b.z() - p.a_xz * st.s_b.x());

    Vec12 g;
    g << g_sigma[0], g_sigma[1], g_spin[0], g_spin[1];
    return g;
}

double micro_energy(const MicroState& st, const MicroParams& p, const ExternalConditions& cond) {
    const Vec3 b = field_vector(cond);
    const Vec3& a = st.s_a;
    const Vec3& bb = st.s_b;

    double e = kPhys.mu_b * (a + bb).dot(diag(p.g_fe).cwiseProduct(b));
    e += p.z_fe * p.j_fe * a.dot(bb);
    e -= p.d_fe_y * p.z_fe * (a.z() * bb.x() - bb.z() * a.x());
    e -= p.a_x * a.x() * a.x() + p.a_z * a.z() * a.z() + p.a_xz * a.x() * a.z();
    e -= p.a_x * bb.x() * bb.x() + p.a_z * bb.z() * bb.z() - p.a_xz * bb.x() * bb.z();

    e += 0.5 * kPhys.mu_b * (st.sigma_a + st.sigma_b).dot(diag(p.g_er).cwiseProduct(b));
    e += p.z_er * p.j_er * st.sigma_a.dot(st.sigma_b);

    const Vec3* sigma[2] = {&st.sigma_a, &st.sigma_b};
    const Vec3* spin[2] = {&st.s_a, &st.s_b};
    for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp)
            e += p.j_cross * sigma[s]->dot(*spin[sp]) + dm_vector(p, s, sp).dot(sigma[s]->cross(*spin[sp]));
    return e;
}

MeanFields micro_mean_fields(const MicroState& st, const MicroParams& p, const ExternalConditions& cond) {
    const Vec12 g = micro_gradient(st, p, cond);
    const double gmu = kFreeElectronG * kPhys.mu_b;
    MeanFields f;
    f.b_er_a = 2.0 * g.segment<3>(0) / gmu;
    f.b_er_b = 2.0 * g.segment<3>(3) / gmu;
    f.b_fe_a = g.segment<3>(6) / gmu;
    f.b_fe_b = g.segment<3>(9) / gmu;
    return f;
}

double brillouin(double j, double z) {
    const double a = (2.0 * j + 1.0) / (2.0 * j);
    const double b = 1.0 / (2.0 * j);
    if (std::abs(z) < 1e-2) {
        const double a2 = a * a, b2 = b * b;
        const double z2 = z * z;
        return z * ((a2 - b2) / 3.0 - (a2 * a2 - b2 * b2) * z2 / 45.0 +
                    2.0 * (a2 * a2 * a2 - b2 * b2 * b2) * z2 * z2 / 945.0);
    }
    return a / std::tanh(a * z) - b / std::tanh(b * z);
}

double micro_free_energy(const MicroState& st, const MicroParams& p, const ExternalConditions& cond,
                         FreeEnergyPrescription prescription) {
    if (!(cond.temperature > 0.0)) throw ConfigError("temperature", "temperature must be positive");
    const double kt = kPhys.k_b * cond.temperature;
    const Vec12 g = micro_gradient(st, p, cond);
    double single_site = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double y = g.segment<3>(3 * s).norm() / kt;  // 2|dE/dsigma| / 2kT
        const double x = g.segment<3>(6 + 3 * s).norm() / kt;
        single_site += -kt * (log_2cosh(y) + log_z_spin(p.s_fe, x));
    }
    if (prescription == FreeEnergyPrescription::single_site) return 0.5 * single_site;
    const double decoupled = g.dot(pack(st));
    return 0.5 * (single_site + micro_energy(st, p, cond) - decoupled);
}

double magnetization_z(const MicroState& st, const MicroParams& p) {
    // -dF/dB_z with F normalized as the free energy above
    return -0.5 * kPhys.mu_b *
           (p.g_fe[2] * (st.s_a.z() + st.s_b.z()) + 0.5 * p.g_er[2] * (st.sigma_a.z() + st.sigma_b.z()));
}

std::vector<MicroSeed> default_micro_seeds(const MicroParams& p) {
    const double s = p.s_fe;
    auto seed = [](std::string id, Vec3 sa, Vec3 sb, Vec3 fa, Vec3 fb) {
        MicroSeed out;
        out.id = std::move(id);
        out.state.sigma_a = sa;
        out.state.sigma_b = sb;
        out.state.s_a = fa;
        out.state.s_b = fb;
        return out;
    };
    const Vec3 g2a(0.05 * s, 0.0, 0.95 * s), g2b(0.05 * s, 0.0, -0.95 * s);
    const Vec3 zero = Vec3::Zero();
    return {
        seed("G2/N", zero, zero, g2a, g2b),
        seed("G2/S+", Vec3(0, 0, 0.9), Vec3(0, 0, -0.9), g2a, g2b),
        seed("G2/S-", Vec3(0, 0, -0.9), Vec3(0, 0, 0.9), g2a, g2b),
        seed("G2/A+", Vec3(0.9, 0, 0.1), Vec3(-0.9, 0, 0.1), g2a, g2b),
        seed("G2/A-", Vec3(-0.9, 0, 0.1), Vec3(0.9, 0, 0.1), g2a, g2b),
        seed("G4/N", zero, zero, Vec3(0.95 * s, 0, 0.05 * s), Vec3(-0.95 * s, 0, 0.05 * s)),
        seed("G12+", Vec3(0, 0, 0.9), Vec3(0, 0, -0.9), Vec3(0, 0.3 * s, 0.9 * s), Vec3(0, -0.3 * s, -0.9 * s)),
        seed("G12-", Vec3(0, 0, -0.9), Vec3(0, 0, 0.9), Vec3(0, -0.3 * s, 0.9 * s), Vec3(0, 0.3 * s, -0.9 * s)),
    };
}

MicroSolution micro_solve_point(const MicroParams& params, const ExternalConditions& cond,
                                const std::vector<MicroSeed>& seeds, const SolverSettings& settings) {
    if (seeds.empty()) throw std::invalid_argument("micro_solve_point needs at least one seed");
    params.validate();
    settings.validate();
    cond.validate();
    const double kt = kPhys.k_b * cond.temperature;
    const double s_fe = params.s_fe;

    const detail::UpdateMap update = [&](const Eigen::VectorXd& x) {
        MicroState st;
        unpack(x, st);
        const Vec12 g = micro_gradient(st, params, cond);
        if (!g.allFinite()) throw NumericError("non-finite mean field in micro_solve_point");
        Eigen::VectorXd out(12);
        for (int s = 0; s < 2; ++s) {
            const Vec3 ber = 2.0 * g.segment<3>(3 * s);
            const double ner = ber.norm();
            out.segment<3>(3 * s) =
                ner < kDegenerateField ? Vec3::Zero() : Vec3(-std::tanh(ner / (2.0 * kt)) * ber / ner);
            const Vec3 bfe = g.segment<3>(6 + 3 * s);
            const double nfe = bfe.norm();
            out.segment<3>(6 + 3 * s) =
                nfe < kDegenerateField ? Vec3::Zero() : Vec3(-s_fe * brillouin(s_fe, s_fe * nfe / kt) * bfe / nfe);
        }
        return out;
    };
    const detail::BlockBounds bounds{1.0, 1.0, s_fe, s_fe};

    MicroSolution out;
    int best = -1;
    for (const MicroSeed& seed : seeds) {
        detail::FixedPointResult fp =
            detail::iterate_fixed_point(pack(seed.state), update, bounds, settings);
        MicroState st;
        unpack(fp.x, st);
        st.residual = fp.residual;
        st.converged = fp.converged;
        st.iterations = fp.iterations;
        st.seed_id = seed.id;
        st.free_energy = micro_free_energy(st, params, cond, settings.prescription);
        out.histories.push_back(std::move(fp.history));
        out.candidates.push_back(st);
        if (!st.converged) continue;
        const int idx = static_cast<int>(out.candidates.size()) - 1;
        if (best < 0) {
            best = idx;
            continue;
        }
        const double fb = out.candidates[best].free_energy;
        if (st.free_energy < fb - 1e-12 * std::max(1.0, std::abs(fb))) best = idx;
    }
    if (best < 0) throw SolverError("no seed converged", out.histories);
    out.best = out.candidates[best];
    return out;
}

std::string to_string(ModeLabel label) {
    switch (label) {
        case ModeLabel::qAFM: return "qAFM";
        case ModeLabel::qFM: return "qFM";
        case ModeLabel::er_like: return "Er-like";
        case ModeLabel::mixed: return "mixed";
    }
    return "?";
}

Vec12 torque(const MicroState& st, const MicroParams& p, const ExternalConditions& cond) {
    const Vec12 g = micro_gradient(st, p, cond);
    const Vec12 x = pack(st);
    Vec12 f;
    for (int k = 0; k < 4; ++k) {
        const double c = k < 2 ? 2.0 : 1.0;
        f.segment<3>(3 * k) = -c * x.segment<3>(3 * k).cross(g.segment<3>(3 * k));
    }
    return f;
}

Mat12 dynamical_matrix(const MicroState& st, const MicroParams& p, const ExternalConditions& cond) {
    // The energy is at most quadratic, so the gradient is affine and its
    // Hessian follows exactly from unit-vector differences.
    MicroState zero;
    const Vec12 g0 = micro_gradient(zero, p, cond);
    Mat12 hess;
    for (int k = 0; k < 12; ++k) {
        Vec12 e = Vec12::Zero();
        e[k] = 1.0;
        MicroState probe;
        unpack(e, probe);
        hess.col(k) = micro_gradient(probe, p, cond) - g0;
    }
    const Vec12 g = micro_gradient(st, p, cond);
    const Vec12 x = pack(st);
    Mat12 d = Mat12::Zero();
    for (int k = 0; k < 4; ++k) {
        const double c = k < 2 ? 2.0 : 1.0;
        d.block<3, 12>(3 * k, 0) = -c * cross_matrix(x.segment<3>(3 * k)) * hess.block<3, 12>(3 * k, 0);
        d.block<3, 3>(3 * k, 3 * k) += c * cross_matrix(g.segment<3>(3 * k));
    }
    return d;
}

ModeSpectrum linearized_spectrum(const MicroState& eq, const MicroParams& p, const ExternalConditions& cond,
                                 double label_threshold) {
    if (!eq.converged) throw NumericError("linearized_spectrum needs a converged equilibrium");
    const Mat12 d = dynamical_matrix(eq, p, cond);
    Eigen::EigenSolver<Mat12> solver(d);
    if (solver.info() != Eigen::Success) throw NumericError("eigen-decomposition of the dynamical matrix failed");
    const auto& lambda = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();

    ModeSpectrum out;
    const double scale = std::max(1.0, d.norm());
    for (int k = 0; k < 12; ++k) out.max_growth_rate = std::max(out.max_growth_rate, std::abs(lambda[k].real()));
    if (out.max_growth_rate < 1e-9 * scale) out.max_growth_rate = 0.0;
    Eigen::JacobiSVD<Eigen::Matrix<std::complex<double>, 12, 12>> svd(vecs);
    const auto sv = svd.singularValues();
    out.defective = sv[11] < 1e-10 * sv[0];

    // pi rotation mapping the equilibrium direction of S_B onto that of S_A
    const Vec3 ua = eq.s_a.normalized();
    const Vec3 ub = eq.s_b.normalized();
    Vec3 axis = ua + ub;
    if (axis.norm() < 1e-8) {
        axis = Vec3::UnitY().cross(ua);
        if (axis.norm() < 1e-8) axis = Vec3::UnitX().cross(ua);
    }
    axis.normalize();
    const Eigen::Matrix3d rot = 2.0 * axis * axis.transpose() - Eigen::Matrix3d::Identity();
    const double fe_scale = 1.0 / (2.0 * p.s_fe);

    struct Mode {
        double nu;
        Participation part;
    };
    std::vector<Mode> modes;
    for (int k = 0; k < 12; ++k) {
        if (lambda[k].imag() <= 1e-9 * scale) continue;
        const auto v = vecs.col(k);
        Participation part;
        double total = 0.0;
        for (int i = 0; i < 12; ++i) {
            const double w = std::norm(v[i]) * (i < 6 ? 0.25 : fe_scale);
            part.coordinates[i] = w;
            total += w;
        }
        const Eigen::Vector3cd da = v.segment<3>(6);
        const Eigen::Vector3cd db = v.segment<3>(9);
        const Eigen::Vector3cd rb = rot.cast<std::complex<double>>() * db;
        part.er = (v.segment<3>(0).squaredNorm() + v.segment<3>(3).squaredNorm()) * 0.25 / total;
        part.fe_qafm = 0.5 * (da + rb).squaredNorm() * fe_scale / total;
        part.fe_qfm = 0.5 * (da - rb).squaredNorm() * fe_scale / total;
        for (double& w : part.coordinates) w /= total;
        modes.push_back({lambda[k].imag() / kPhys.h, part});
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.nu < b.nu; });
    for (const Mode& m : modes) {
        out.frequencies.push_back(m.nu);
        out.participation.push_back(m.part);
        ModeLabel label = ModeLabel::mixed;
        if (m.part.fe_qafm >= label_threshold) label = ModeLabel::qAFM;
        else if (m.part.fe_qfm >= label_threshold) label = ModeLabel::qFM;
        else if (m.part.er >= label_threshold) label = ModeLabel::er_like;
        out.labels.push_back(label);
    }
    return out;
}

}  // namespace gjsim::micro
