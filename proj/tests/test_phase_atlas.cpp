#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "gjsim/constants.hpp"
#include "gjsim/error.hpp"
#include "gjsim/phase_atlas.hpp"

using namespace gjsim;
using namespace gjsim::atlas;

namespace {

constexpr double kCalibratedGz = 15.3154296875;

ReducedParams calibrated() {
    ReducedParams p;
    p.g_lande_z = kCalibratedGz;
    return p;
}

SweepSettings grid(double t0, double t1, int nt, double h0, double h1, int nh) {
    SweepSettings s;
    s.t_min = t0;
    s.t_max = t1;
    s.t_points = nt;
    s.h_min = h0;
    s.h_max = h1;
    s.h_points = nh;
    return s;
}

int count(const PhaseMap& map, Phase phase) {
    int n = 0;
    for (const Cell& c : map.cells) n += c.phase == phase;
    return n;
}

ExternalConditions at(double t, double b = 0.0) {
    ExternalConditions c;
    c.temperature = t;
    c.b_field = b;
    return c;
}

bool near_boundary(const PhaseMap& m, std::size_t i, std::size_t j) {
    const Phase p = m.at(i, j).phase;
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
            const long a = static_cast<long>(i) + di, b = static_cast<long>(j) + dj;
            if (a < 0 || b < 0 || a >= static_cast<long>(m.t_grid.size()) || b >= static_cast<long>(m.h_grid.size()))
                continue;
            if (m.at(a, b).phase != p) return true;
        }
    return false;
}

}  // namespace

TEST_CASE("classify examples") {
    CHECK(classify({}) == Phase::N);
    CHECK(classify({0.8, 0.0, 0.3, 0.0}) == Phase::S);
    CHECK(classify({1e-5, 0.9, 1e-5, 0.0}) == Phase::A);
    for (ClassifyRule rule : {ClassifyRule::dominance, ClassifyRule::threshold}) {
        CHECK(classify({}, 1e-3, rule) == Phase::N);
        CHECK(classify({0.8, 0.0, 0.3, 0.0}, 1e-3, rule) == Phase::S);
        CHECK(classify({1e-5, 0.9, 1e-5, 0.0}, 1e-3, rule) == Phase::A);
        CHECK(classify({0.0, 0.0, 0.0, 0.9}, 1e-3, rule) == Phase::N);
    }
}

TEST_CASE("threshold rule is literal") {
    CHECK(classify({0.1, 0.6, 0.0, 0.0}, 1e-3, ClassifyRule::threshold) == Phase::S);
    CHECK(classify({0.1, 0.6, 0.0, 0.0}, 1e-3, ClassifyRule::dominance) == Phase::A);
    CHECK(classify({0.0, 0.6, 2e-3, 0.0}, 1e-3, ClassifyRule::threshold) == Phase::S);
    CHECK(classify({9e-4, 0.0, 9e-4, 0.0}, 1e-3, ClassifyRule::threshold) == Phase::N);
    // staggered z order without a condensate is plain antiferromagnetism
    CHECK(classify({0.7, 0.0, 0.0, 0.0}, 1e-3, ClassifyRule::threshold) == Phase::S);
    CHECK(classify({0.7, 0.0, 0.0, 0.0}, 1e-3, ClassifyRule::dominance) == Phase::A);
    CHECK(parse_classify_rule(to_string(ClassifyRule::threshold)) == ClassifyRule::threshold);
    CHECK_THROWS(parse_classify_rule("majority"));
}

TEST_CASE("classify is scale consistent") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 0.01);
    std::uniform_real_distribution<double> f(1.0, 100.0);
    for (int k = 0; k < 2000; ++k) {
        const OrderParameters op{u(rng), u(rng), u(rng), u(rng)};
        const double s = f(rng);
        const OrderParameters big{s * op.ez, s * op.ex, s * op.condensate, s * op.mz_total};
        for (ClassifyRule rule : {ClassifyRule::dominance, ClassifyRule::threshold}) {
            if (classify(op, 1e-3, rule) != Phase::N) CHECK(classify(big, 1e-3, rule) != Phase::N);
            CHECK(classify(op, 1e-3, rule) == classify(op, 1e-3, rule));
        }
    }
}

TEST_CASE("sweep grid and settings") {
    SweepSettings s = grid(1.0, 2.0, 3, 0.0, 1.0, 5);
    CHECK(s.t_grid() == std::vector<double>{1.0, 1.5, 2.0});
    CHECK(s.h_grid().size() == 5);
    CHECK(s.h_grid().back() == 1.0);
    s.t_points = 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = grid(2.0, 1.0, 3, 0.0, 1.0, 3);
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("reduced sweep is deterministic and converged") {
    const SweepSettings s = grid(0.5, 6.0, 8, 0.0, 1.5, 8);
    const PhaseMap a = sweep(calibrated(), s);
    const PhaseMap b = sweep(calibrated(), s, [] {
        SolverSettings st;
        st.threads = 1;
        return st;
    }());
    CHECK(a.failed == 0);
    REQUIRE(a.cells.size() == 64);
    CHECK(a.g_lande_z == kCalibratedGz);
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        CHECK(a.cells[k].converged);
        CHECK(a.cells[k].phase == b.cells[k].phase);
        CHECK(a.cells[k].free_energy == b.cells[k].free_energy);
        const OrderParameters& op = a.cells[k].op;
        for (double v : {op.ez, op.ex, op.condensate, op.mz_total}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(count(a, Phase::S) > 0);
    CHECK(count(a, Phase::N) > 0);
    CHECK(a.at(0, 0).phase == Phase::S);
    CHECK(a.at(7, 7).phase == Phase::N);
}

TEST_CASE("no superradiant phase without light-matter coupling") {
    ReducedParams p = calibrated();
    p.g = 0.0;
    const PhaseMap m = sweep(p, grid(0.5, 6.0, 6, 0.0, 1.5, 6));
    CHECK(count(m, Phase::S) == 0);
    for (const Cell& c : m.cells) CHECK(c.op.condensate == 0.0);
}

TEST_CASE("no antiferromagnetic phase without exchange") {
    ReducedParams p = calibrated();
    p.j = 0.0;
    const PhaseMap m = sweep(p, grid(0.5, 6.0, 6, 0.0, 1.5, 6));
    CHECK(count(m, Phase::A) == 0);
}

TEST_CASE("single-phase map has no boundaries") {
    const PhaseMap m = sweep(calibrated(), grid(10.0, 20.0, 5, 0.0, 1.5, 5));
    CHECK(count(m, Phase::N) == 25);
    const BoundarySet b = extract_boundaries(m);
    CHECK(b.boundaries.empty());
    CHECK_FALSE(b.triple_point.has_value());
}

TEST_CASE("boundaries are transpose invariant") {
    const PhaseMap m = sweep(calibrated(), grid(0.5, 6.0, 12, 0.0, 1.5, 12));
    const BoundarySet a = extract_boundaries(m);
    const BoundarySet b = extract_boundaries(transpose(m));
    REQUIRE_FALSE(a.boundaries.empty());
    std::set<std::pair<double, double>> pa, pb;
    for (const Boundary& x : a.boundaries)
        for (const BoundaryPoint& q : x.points) pa.insert({q.t, q.h});
    for (const Boundary& x : b.boundaries)
        for (const BoundaryPoint& q : x.points) pb.insert({q.h, q.t});
    CHECK(pa == pb);
    for (const Boundary& x : a.boundaries) {
        CHECK(x.low < x.high);
        CHECK(std::is_sorted(x.points.begin(), x.points.end(), [](const BoundaryPoint& l, const BoundaryPoint& r) {
            return std::pair(l.t, l.h) < std::pair(r.t, r.h);
        }));
        CHECK((x.order == TransitionOrder::first) == (x.jump > 0.1));
    }
    if (a.triple_point) {
        CHECK(a.triple_point->t >= 0.5);
        CHECK(a.triple_point->t <= 6.0);
        CHECK(a.triple_point->h >= 0.0);
        CHECK(a.triple_point->h <= 1.5);
    }
}

TEST_CASE("labels are stable under grid refinement away from boundaries") {
    const PhaseMap coarse = sweep(calibrated(), grid(0.5, 6.0, 8, 0.0, 1.5, 8));
    const PhaseMap fine = sweep(calibrated(), grid(0.5, 6.0, 15, 0.0, 1.5, 15));
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            REQUIRE(fine.t_grid[2 * i] == doctest::Approx(coarse.t_grid[i]).epsilon(1e-14));
            if (near_boundary(coarse, i, j)) continue;
            CHECK(fine.at(2 * i, 2 * j).phase == coarse.at(i, j).phase);
        }
}

TEST_CASE("calibrate_gz") {
    SolverSettings st;
    const Calibration cal = calibrate_gz(ReducedParams{}, 1.0, 0.5, st);
    CHECK(cal.g_lande_z == doctest::Approx(kCalibratedGz).epsilon(1e-3));
    REQUIRE(cal.history.size() >= 2);
    for (std::size_t a = 0; a < cal.history.size(); ++a)
        for (std::size_t b = 0; b < cal.history.size(); ++b)
            if (cal.history[a].g_lande_z < cal.history[b].g_lande_z)
                CHECK(cal.history[a].critical_field >= cal.history[b].critical_field);

    ReducedParams p;
    p.g_lande_z = cal.g_lande_z;
    CHECK(std::abs(upper_critical_field(p, 0.5, st, 1e-3) - 1.0) < 0.01);
    CHECK_THROWS_AS(calibrate_gz(ReducedParams{}, 1e3, 0.5, st), NumericError);
}

TEST_CASE("entropy") {
    const ReducedParams p = calibrated();
    const double ln2 = std::log(2.0);
    CHECK(entropy(p, at(1e5)) == doctest::Approx(kPhys.k_b * ln2).epsilon(1e-4));
    CHECK(entropy(p, at(0.05)) < 0.01 * kPhys.k_b * ln2);
    CHECK(entropy(p, at(0.05)) >= -1e-12);
    const double s = entropy(p, at(2.0));
    CHECK(s == doctest::Approx(entropy_identity(p, at(2.0))).epsilon(1e-3));
    for (double b : {0.3, 0.8}) CHECK(entropy(p, at(3.0, b)) == doctest::Approx(entropy_identity(p, at(3.0, b))).epsilon(1e-3));
    CHECK(entropy(p, at(1.0)) < entropy(p, at(3.0)));
    CHECK_THROWS(entropy(p, at(0.005), {}, 0.01));
    CHECK_THROWS(entropy(p, at(1.0), {}, -1e-3));
}

TEST_CASE("adiabat in the normal region") {
    const ReducedParams p = calibrated();
    MceOptions o;
    o.dh = 0.05;
    const std::vector<MceStep> trace = mce_trace(p, 10.0, 0.0, 1.5, {}, o);
    REQUIRE(trace.size() == 31);
    CHECK(std::abs(trace.front().t - 10.0) < 1e-6);
    for (const MceStep& s : trace) CHECK(s.phase == Phase::N);
    CHECK(mce_crossings(trace).empty());
    CHECK(mce_maxima(trace).empty());
    // paramagnet: T rises with field along the adiabat
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k].t >= trace[k - 1].t);
    const double s0 = entropy(p, at(10.0, 0.0));
    CHECK(entropy(p, at(trace.back().t, 1.5)) == doctest::Approx(s0).epsilon(1e-5));
}

TEST_CASE("mce_maxima and crossings on synthetic traces") {
    std::vector<MceStep> trace;
    for (int k = 0; k <= 100; ++k) {
        const double h = 0.01 * k;
        const double d = std::exp(-std::pow((h - 0.3) / 0.03, 2)) + 0.5 * std::exp(-std::pow((h - 0.7) / 0.03, 2));
        trace.push_back({h, 1.0, d, h < 0.3 ? Phase::S : (h < 0.7 ? Phase::A : Phase::N)});
    }
    const std::vector<std::size_t> m = mce_maxima(trace);
    REQUIRE(m.size() == 2);
    CHECK(m[0] == 30);
    CHECK(m[1] == 70);
    const std::vector<double> c = mce_crossings(trace);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == doctest::Approx(0.295));
    CHECK(c[1] == doctest::Approx(0.695));
}
