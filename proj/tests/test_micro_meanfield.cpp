#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gjsim/config.hpp"
#include "gjsim/constants.hpp"
#include "gjsim/dicke_meanfield.hpp"
#include "gjsim/error.hpp"
#include "gjsim/micro_meanfield.hpp"

using namespace gjsim;
using namespace gjsim::micro;

namespace {

MicroParams reference() {
    static const MicroParams p = *load_config_file(std::string(GJSIM_DATA_DIR) + "/micro_reference.ini").micro;
    return p;
}

MicroParams without_er_fe(MicroParams p) {
    p.j_cross = 0.0;
    p.d_x = 0.0;
    p.d_y = 0.0;
    return p;
}

MicroParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MicroParams p;
    p.j_fe = 2.0 + u(rng);
    p.d_fe_y = 0.1 * u(rng);
    p.a_x = 0.02 * u(rng);
    p.a_z = 0.02 * u(rng);
    p.a_xz = 0.01 * u(rng);
    p.j_er = 0.05 * u(rng);
    p.j_cross = 0.02 * u(rng);
    p.d_x = 0.01 * u(rng);
    p.d_y = 0.01 * u(rng);
    for (int k = 0; k < 3; ++k) {
        p.g_fe[k] = 2.0 + 0.1 * u(rng);
        p.g_er[k] = 5.0 + 3.0 * u(rng);
    }
    return p;
}

Vec3 random_vec(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec3 v;
    do v = Vec3(u(rng), u(rng), u(rng));
    while (v.norm() > 1.0);
    return radius * v;
}

MicroState random_state(std::mt19937_64& rng, double s) {
    MicroState st;
    st.sigma_a = random_vec(rng, 1.0);
    st.sigma_b = random_vec(rng, 1.0);
    st.s_a = random_vec(rng, s);
    st.s_b = random_vec(rng, s);
    return st;
}

ExternalConditions at(double t, double b = 0.0, FieldAxis axis = FieldAxis::z) {
    ExternalConditions c;
    c.temperature = t;
    c.b_field = b;
    c.axis = axis;
    return c;
}

Vec3& coord(MicroState& s, int block) {
    switch (block) {
        case 0: return s.sigma_a;
        case 1: return s.sigma_b;
        case 2: return s.s_a;
        default: return s.s_b;
    }
}

Eigen::Matrix<double, 12, 1> fd_gradient(const MicroState& st, const MicroParams& p, const ExternalConditions& c) {
    Eigen::Matrix<double, 12, 1> g;
    const double step = 1e-5;
    for (int i = 0; i < 12; ++i) {
        MicroState up = st, dn = st;
        coord(up, i / 3)[i % 3] += step;
        coord(dn, i / 3)[i % 3] -= step;
        g[i] = (micro_energy(up, p, c) - micro_energy(dn, p, c)) / (2.0 * step);
    }
    return g;
}

// Sublattice swap composed with the pi rotation about x.
MicroState swap_rotate(const MicroState& s) {
    const Eigen::Vector3d r(1.0, -1.0, -1.0);
    MicroState t;
    t.sigma_a = r.cwiseProduct(s.sigma_b);
    t.sigma_b = r.cwiseProduct(s.sigma_a);
    t.s_a = r.cwiseProduct(s.s_b);
    t.s_b = r.cwiseProduct(s.s_a);
    return t;
}

MicroState solve(const MicroParams& p, const ExternalConditions& c) {
    return micro_solve_point(p, c, default_micro_seeds(p)).best;
}

}  // namespace

TEST_CASE("micro_energy examples") {
    MicroParams zero;
    std::mt19937_64 rng(5);
    const MicroState st = random_state(rng, 2.5);
    CHECK(micro_energy(st, zero, at(1.0)) == 0.0);

    MicroParams j_only;
    j_only.j_fe = 4.96;
    MicroState neel;
    neel.s_a = Vec3(0, 0, 2.5);
    neel.s_b = Vec3(0, 0, -2.5);
    CHECK(micro_energy(neel, j_only, at(1.0)) == doctest::Approx(-4.96 * 6 * 6.25).epsilon(1e-15));

    MicroParams dm_only;
    dm_only.d_fe_y = 0.3;
    MicroState canted;
    canted.s_a = Vec3(0.1, 0, 2.0);
    canted.s_b = Vec3(0.4, 0, -1.0);
    // -D z (S^A_z S^B_x - S^B_z S^A_x) by hand
    CHECK(micro_energy(canted, dm_only, at(1.0)) ==
          doctest::Approx(-0.3 * 6 * (2.0 * 0.4 - (-1.0) * 0.1)).epsilon(1e-15));

    MicroParams aniso;
    aniso.a_x = 0.01;
    aniso.a_z = 0.02;
    aniso.a_xz = 0.005;
    CHECK(micro_energy(canted, aniso, at(1.0)) ==
          doctest::Approx(-(0.01 * 0.01 + 0.02 * 4.0 + 0.005 * 0.2) - (0.01 * 0.16 + 0.02 * 1.0 - 0.005 * 0.4 * -1.0))
              .epsilon(1e-14));
}

TEST_CASE("sublattice exchange with pi rotation about x is a symmetry") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 50; ++k) {
        const MicroParams p = random_params(rng);
        const MicroState st = random_state(rng, p.s_fe);
        const double e0 = micro_energy(st, p, at(1.0));
        CHECK(micro_energy(swap_rotate(st), p, at(1.0)) == doctest::Approx(e0).epsilon(1e-12));
        CHECK(micro_energy(swap_rotate(st), p, at(1.0, 0.7, FieldAxis::x)) ==
              doctest::Approx(micro_energy(st, p, at(1.0, 0.7, FieldAxis::x))).epsilon(1e-12));
    }
}

TEST_CASE("mean fields") {
    MicroParams zero;
    zero.g_fe = {2.0, 2.1, 1.9};
    zero.g_er = {6.0, 4.0, 9.0};
    std::mt19937_64 rng(1);
    const MicroState st = random_state(rng, 2.5);
    for (FieldAxis axis : {FieldAxis::x, FieldAxis::y, FieldAxis::z}) {
        const ExternalConditions c = at(1.0, 0.8, axis);
        const MeanFields f = micro_mean_fields(st, zero, c);
        const int k = static_cast<int>(axis);
        Vec3 er = Vec3::Zero(), fe = Vec3::Zero();
        er[k] = zero.g_er[k] * 0.8 / kFreeElectronG;
        fe[k] = zero.g_fe[k] * 0.8 / kFreeElectronG;
        CHECK((f.b_er_a - er).norm() < 1e-14);
        CHECK((f.b_er_b - er).norm() < 1e-14);
        CHECK((f.b_fe_a - fe).norm() < 1e-14);
        CHECK((f.b_fe_b - fe).norm() < 1e-14);
    }

    MicroParams j_only;
    j_only.j_er = 0.04;
    MicroState a = st, b = st;
    b.sigma_a = Vec3(0.9, -0.1, 0.2);
    CHECK((micro_mean_fields(a, j_only, at(1.0)).b_er_a - micro_mean_fields(b, j_only, at(1.0)).b_er_a).norm() ==
          0.0);
    b = st;
    b.sigma_b = Vec3(0.9, -0.1, 0.2);
    CHECK((micro_mean_fields(a, j_only, at(1.0)).b_er_a - micro_mean_fields(b, j_only, at(1.0)).b_er_a).norm() >
          1e-3);
}

TEST_CASE("mean fields match the energy gradient") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> field(-1.5, 1.5);
    for (int k = 0; k < 100; ++k) {
        const MicroParams p = random_params(rng);
        const MicroState st = random_state(rng, p.s_fe);
        const ExternalConditions c = at(1.0, field(rng), static_cast<FieldAxis>(k % 3));
        const MeanFields f = micro_mean_fields(st, p, c);
        const Eigen::Matrix<double, 12, 1> g = fd_gradient(st, p, c);
        const double gmu = kFreeElectronG * kPhys.mu_b;
        const Vec3 expect[4] = {2.0 * g.segment<3>(0) / gmu, 2.0 * g.segment<3>(3) / gmu, g.segment<3>(6) / gmu,
                                g.segment<3>(9) / gmu};
        const Vec3 got[4] = {f.b_er_a, f.b_er_b, f.b_fe_a, f.b_fe_b};
        for (int b = 0; b < 4; ++b)
            for (int i = 0; i < 3; ++i)
                CHECK(std::abs(got[b][i] - expect[b][i]) <= 1e-6 * std::max(1.0, std::abs(expect[b][i])));
    }
}

TEST_CASE("brillouin") {
    for (double x : {0.1, 1.0, 3.0}) CHECK(std::abs(brillouin(0.5, x) - std::tanh(x)) < 1e-12);
    CHECK(brillouin(2.5, 0.0) == 0.0);
    // saturation: B_J(z) = 1 - exp(-z / J) / J + ... for large z
    CHECK(std::abs(brillouin(2.5, 100.0) - 1.0) < 1e-8);
    CHECK(brillouin(2.5, 10.0) == doctest::Approx(1.2 / std::tanh(12.0) - 0.2 / std::tanh(2.0)).epsilon(1e-14));

    for (double j : {0.5, 1.0, 1.5, 2.5, 3.5}) {
        double prev = -1.0;
        for (int k = -400; k <= 400; ++k) {
            const double z = 0.05 * k;
            const double b = brillouin(j, z);
            CHECK(b == doctest::Approx(-brillouin(j, -z)).epsilon(1e-15));
            CHECK(std::abs(b) <= 1.0);
            CHECK(b >= prev);
            if (std::abs(z) < 5.0) {
                CHECK(std::abs(b) < 1.0);
                CHECK(b > prev);
            }
            prev = b;
        }
        for (double z : {1e-3, 3e-4, 1e-5, -7e-4}) CHECK(std::abs(brillouin(j, z) - (j + 1.0) * z / (3.0 * j)) < 1e-8);
        // both branches agree where they meet
        const double lo = brillouin(j, 0.0099999), hi = brillouin(j, 0.0100001);
        CHECK(std::abs(hi - lo - (j + 1.0) / (3.0 * j) * 2e-7) < 1e-10);
    }
}

TEST_CASE("Gamma2 state at 10 K") {
    const MicroParams p = reference();
    const MicroState s = solve(p, at(10.0));
    CHECK(s.converged);
    CHECK(std::abs(s.s_a.y()) < 1e-8);
    CHECK(std::abs(s.s_b.y()) < 1e-8);
    CHECK(std::abs(s.s_a.z()) > 0.99 * p.s_fe);
    CHECK(s.s_a.z() * s.s_b.z() < 0.0);
    CHECK(s.sigma_a.norm() < 0.1);
    CHECK(s.sigma_b.norm() < 0.1);
}

TEST_CASE("Er and Fe blocks factorize without Er-Fe coupling") {
    MicroParams p = without_er_fe(reference());
    const double b = 0.3;
    for (double t : {0.7, 2.0, 6.0}) {
        const ExternalConditions c = at(t, b, FieldAxis::x);
        const MicroState s = solve(p, c);

        ReducedParams r;
        r.g = 0.0;
        r.j = p.j_er;
        r.z_er = p.z_er;
        r.omega_er = p.g_er[0] * kPhys.mu_b * b;
        const dicke::ReducedState e = dicke::solve_point(r, at(t), dicke::default_seeds()).best;
        CHECK((s.sigma_a - e.spins.m_a).norm() < 1e-8);
        CHECK((s.sigma_b - e.spins.m_b).norm() < 1e-8);

        MicroParams fe_only = p;
        fe_only.j_er = 0.0;
        fe_only.g_er = {0.0, 0.0, 0.0};
        const MicroState f = solve(fe_only, c);
        CHECK((s.s_a - f.s_a).norm() < 1e-8);
        CHECK((s.s_b - f.s_b).norm() < 1e-8);
        CHECK(f.sigma_a.norm() == 0.0);

        const double kt = kPhys.k_b * t;
        CHECK(s.free_energy == doctest::Approx(e.free_energy + f.free_energy + kt * std::log(2.0)).epsilon(1e-10));
    }
}

TEST_CASE("equilibrium moments are antiparallel to their mean fields") {
    const MicroParams p = reference();
    for (double t : {1.0, 3.0, 8.0}) {
        const MicroSolution sol = micro_solve_point(p, at(t, 0.4), default_micro_seeds(p));
        for (const MicroState& s : sol.candidates) {
            if (!s.converged) continue;
            const MeanFields f = micro_mean_fields(s, p, at(t, 0.4));
            const Vec3 m[4] = {s.sigma_a, s.sigma_b, s.s_a, s.s_b};
            const Vec3 b[4] = {f.b_er_a, f.b_er_b, f.b_fe_a, f.b_fe_b};
            for (int k = 0; k < 4; ++k) CHECK(m[k].dot(b[k]) / (m[k].norm() * b[k].norm()) < -1.0 + 1e-9);
            CHECK(s.sigma_a.norm() < 1.0);
            CHECK(s.s_a.norm() <= p.s_fe);
        }
    }
}

TEST_CASE("magnetization is -dF/dB") {
    const MicroParams p = reference();
    for (double t : {2.0, 5.0}) {
        for (double b : {0.2, 0.6}) {
            const MicroState s = solve(p, at(t, b));
            const double h = 1e-4;
            const MicroSeed seed{"eq", s};
            const MicroState up = micro_solve_point(p, at(t, b + h), {seed}).best;
            const MicroState dn = micro_solve_point(p, at(t, b - h), {seed}).best;
            const double derivative = -(up.free_energy - dn.free_energy) / (2.0 * h);
            CHECK(derivative == doctest::Approx(magnetization_z(s, p)).epsilon(1e-4));
        }
    }
}

TEST_CASE("torque vanishes at equilibrium") {
    const MicroParams p = reference();
    for (double t : {1.0, 4.0, 10.0}) {
        const MicroState s = solve(p, at(t, 0.5));
        CHECK(torque(s, p, at(t, 0.5)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("dynamical matrix matches the finite-difference torque Jacobian") {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 10; ++k) {
        const MicroParams p = random_params(rng);
        const MicroState st = random_state(rng, p.s_fe);
        const ExternalConditions c = at(1.0, 0.5, static_cast<FieldAxis>(k % 3));
        const auto d = dynamical_matrix(st, p, c);
        for (int i = 0; i < 12; ++i) {
            MicroState up = st, dn = st;
            coord(up, i / 3)[i % 3] += 1e-6;
            coord(dn, i / 3)[i % 3] -= 1e-6;
            const Eigen::Matrix<double, 12, 1> col = (torque(up, p, c) - torque(dn, p, c)) / 2e-6;
            CHECK((col - d.col(i)).norm() < 1e-7 * std::max(1.0, col.norm()));
        }
    }
}

TEST_CASE("spectrum anchors without Er-Fe coupling") {
    const MicroParams p = without_er_fe(reference());
    SUBCASE("qAFM at zero field") {
        const MicroState s = solve(p, at(10.0));
        const ModeSpectrum sp = linearized_spectrum(s, p, at(10.0));
        const auto it = std::find(sp.labels.begin(), sp.labels.end(), ModeLabel::qAFM);
        REQUIRE(it != sp.labels.end());
        CHECK(std::abs(sp.frequencies[it - sp.labels.begin()] - 0.896) < 1e-3);
        CHECK(std::count(sp.labels.begin(), sp.labels.end(), ModeLabel::qFM) == 1);
    }
    SUBCASE("Er mode in a b-axis field") {
        const double b = 0.023 * kPhys.h / (p.g_er[1] * kPhys.mu_b);
        const ExternalConditions c = at(10.0, b, FieldAxis::y);
        const MicroState s = solve(p, c);
        const ModeSpectrum sp = linearized_spectrum(s, p, c);
        double best = 1.0;
        for (std::size_t k = 0; k < sp.frequencies.size(); ++k)
            if (sp.labels[k] == ModeLabel::er_like) best = std::min(best, std::abs(sp.frequencies[k] - 0.023));
        CHECK(best < 1e-4);
    }
}

TEST_CASE("spectrum structure") {
    const MicroParams p = reference();
    for (double t : {1.0, 5.0}) {
        const ExternalConditions c = at(t, 0.3);
        const MicroState s = solve(p, c);
        const auto d = dynamical_matrix(s, p, c);
        Eigen::EigenSolver<Eigen::Matrix<double, 12, 12>> es(d);
        const Eigen::VectorXcd lambda = es.eigenvalues();
        const double scale = d.norm();
        int zeros = 0;
        for (int k = 0; k < 12; ++k) {
            if (std::abs(lambda[k]) < 1e-9 * scale) ++zeros;
            CHECK(std::abs(lambda[k].real()) < 1e-9 * scale);
            double partner = 1e300;
            for (int m = 0; m < 12; ++m) partner = std::min(partner, std::abs(lambda[m] + lambda[k]));
            CHECK(partner < 1e-9 * scale);
        }
        CHECK(zeros >= 4);

        const ModeSpectrum sp = linearized_spectrum(s, p, c);
        CHECK(sp.max_growth_rate == 0.0);
        CHECK(std::is_sorted(sp.frequencies.begin(), sp.frequencies.end()));
        for (double f : sp.frequencies) CHECK(f > 0.0);
        for (const Participation& w : sp.participation) {
            double sum = 0.0;
            for (double v : w.coordinates) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(w.er + w.fe_qafm + w.fe_qfm == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("unconverged equilibrium is rejected") {
    const MicroParams p = reference();
    MicroState s = solve(p, at(3.0));
    s.converged = false;
    CHECK_THROWS_AS(linearized_spectrum(s, p, at(3.0)), NumericError);
}

TEST_CASE("metastable Gamma4 branch is a saddle") {
    const MicroParams p = reference();
    const ExternalConditions c = at(5.0);
    const MicroSolution sol = micro_solve_point(p, c, default_micro_seeds(p));
    const MicroState* g4 = nullptr;
    for (const MicroState& s : sol.candidates)
        if (s.seed_id == "G4/N" && s.converged) g4 = &s;
    REQUIRE(g4 != nullptr);
    CHECK(g4->free_energy > sol.best.free_energy);
    CHECK(linearized_spectrum(*g4, p, c).max_growth_rate > 0.0);
}
