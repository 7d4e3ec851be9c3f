#include "gjsim/phase_atlas.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "gjsim/constants.hpp"
#include "gjsim/error.hpp"
#include "parallel.hpp"

namespace gjsim::atlas {

namespace {

double max_op(const OrderParameters& op) { return std::max({op.ez, op.ex, op.condensate}); }

double op_jump(const OrderParameters& a, const OrderParameters& b) {
    return std::max({std::abs(a.ez - b.ez), std::abs(a.ex - b.ex), std::abs(a.condensate - b.condensate)});
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

dicke::ErSublatticeState unpack_reduced(const Eigen::VectorXd& x) { return {x.segment<3>(0), x.segment<3>(3)}; }

Eigen::VectorXd pack_reduced(const dicke::ErSublatticeState& s) {
    Eigen::VectorXd x(6);
    x << s.m_a, s.m_b;
    return x;
}

ExternalConditions conditions(double t, double h) {
    ExternalConditions c;
    c.temperature = t;
    c.b_field = h;
    return c;
}

std::pair<Phase, Phase> ordered_pair(Phase a, Phase b) {
    return static_cast<int>(a) <= static_cast<int>(b) ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::N: return "N";
        case Phase::S: return "S";
        case Phase::A: return "A";
    }
    return "?";
}

std::string to_string(ClassifyRule rule) { return rule == ClassifyRule::threshold ? "threshold" : "dominance"; }

ClassifyRule parse_classify_rule(const std::string& name) {
    if (name == "dominance") return ClassifyRule::dominance;
    if (name == "threshold") return ClassifyRule::threshold;
    throw ConfigError("classify_rule", "classify_rule must be 'dominance' or 'threshold'");
}

std::string to_string(Model model) { return model == Model::micro ? "micro" : "reduced"; }

Model parse_model(const std::string& name) {
    if (name == "reduced") return Model::reduced;
    if (name == "micro") return Model::micro;
    throw ConfigError("model", "model must be 'reduced' or 'micro'");
}

std::string to_string(TransitionOrder order) { return order == TransitionOrder::first ? "first" : "second"; }

OrderParameters order_parameters(const dicke::ReducedState& state) {
    const auto& s = state.spins;
    OrderParameters op;
    op.ez = 0.5 * std::abs(s.m_a.z() - s.m_b.z());
    op.ex = 0.5 * std::abs(s.m_a.x() - s.m_b.x());
    op.condensate = std::abs(state.boson.alpha.imag());
    op.mz_total = 0.5 * std::abs(s.m_a.z() + s.m_b.z());
    return op;
}

OrderParameters order_parameters(const micro::MicroState& state, const MicroParams& params) {
    OrderParameters op;
    op.ez = 0.5 * std::abs(state.sigma_a.z() - state.sigma_b.z());
    op.ex = 0.5 * std::abs(state.sigma_a.x() - state.sigma_b.x());
    op.condensate = std::abs(state.s_a.y() - state.s_b.y()) / (2.0 * params.s_fe);
    op.mz_total = 0.5 * std::abs(state.sigma_a.z() + state.sigma_b.z());
    return op;
}

Phase classify(const OrderParameters& op, double eps, ClassifyRule rule) {
    if (rule == ClassifyRule::threshold) {
        if (op.condensate >= eps || op.ez >= eps) return Phase::S;
        if (op.ex >= eps) return Phase::A;
        return Phase::N;
    }
    if (max_op(op) < eps) return Phase::N;
    if (op.condensate >= eps && std::max(op.ez, op.condensate) >= op.ex) return Phase::S;
    return Phase::A;
}

void SweepSettings::validate() const {
    if (!(t_min > 0.0 && t_max > t_min)) throw ConfigError("t_max", "temperature range must satisfy 0 < t_min < t_max");
    if (!(h_min >= 0.0 && h_max > h_min)) throw ConfigError("h_max", "field range must satisfy 0 <= h_min < h_max");
    if (t_points < 2) throw ConfigError("t_points", "t_points must be at least 2");
    if (h_points < 2) throw ConfigError("h_points", "h_points must be at least 2");
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("eps", "eps must lie in (0, 0.5)");
    if (!(delta_jump > 0.0)) throw ConfigError("delta_jump", "delta_jump must be positive");
    if (!(refine_tolerance > 0.0)) throw ConfigError("refine_tolerance", "refine_tolerance must be positive");
    if (!(mce_dh > 0.0)) throw ConfigError("mce_dh", "mce_dh must be positive");
    if (!(calibrate_field > 0.0)) throw ConfigError("calibrate_field", "calibrate_field must be positive");
    if (!(calibrate_temperature > 0.0))
        throw ConfigError("calibrate_temperature", "calibrate_temperature must be positive");
}

std::vector<double> SweepSettings::t_grid() const { return linspace(t_min, t_max, t_points); }
std::vector<double> SweepSettings::h_grid() const { return linspace(h_min, h_max, h_points); }

PointSolver reduced_point_solver(const ReducedParams& params, const SolverSettings& settings, double eps,
                                 ClassifyRule rule) {
    return [params, settings, eps, rule](double t, double h, const Cell* warm) {
        std::vector<dicke::Seed> seeds = dicke::default_seeds();
        if (warm && warm->converged && warm->state.size() == 6) seeds.push_back({"warm", unpack_reduced(warm->state)});
        Cell cell;
        cell.t = t;
        cell.h = h;
        try {
            const dicke::PointSolution sol = dicke::solve_point(params, conditions(t, h), seeds, settings);
            cell.op = order_parameters(sol.best);
            cell.phase = classify(cell.op, eps, rule);
            cell.free_energy = sol.best.free_energy;
            cell.residual = sol.best.residual;
            cell.converged = true;
            cell.seed_id = sol.best.seed_id;
            cell.state = pack_reduced(sol.best.spins);
        } catch (const SolverError&) {
            cell.converged = false;
        }
        return cell;
    };
}

PointSolver micro_point_solver(const MicroParams& params, const SolverSettings& settings, double eps,
                               ClassifyRule rule) {
    return [params, settings, eps, rule](double t, double h, const Cell* warm) {
        std::vector<micro::MicroSeed> seeds = micro::default_micro_seeds(params);
        if (warm && warm->converged && warm->state.size() == 12) {
            micro::MicroSeed w;
            w.id = "warm";
            w.state.sigma_a = warm->state.segment<3>(0);
            w.state.sigma_b = warm->state.segment<3>(3);
            w.state.s_a = warm->state.segment<3>(6);
            w.state.s_b = warm->state.segment<3>(9);
            seeds.push_back(w);
        }
        Cell cell;
        cell.t = t;
        cell.h = h;
        try {
            const micro::MicroSolution sol = micro::micro_solve_point(params, conditions(t, h), seeds, settings);
            const micro::MicroState& b = sol.best;
            cell.op = order_parameters(b, params);
            cell.phase = classify(cell.op, eps, rule);
            cell.free_energy = b.free_energy;
            cell.residual = b.residual;
            cell.converged = true;
            cell.seed_id = b.seed_id;
            cell.state.resize(12);
            cell.state << b.sigma_a, b.sigma_b, b.s_a, b.s_b;
        } catch (const SolverError&) {
            cell.converged = false;
        }
        return cell;
    };
}

PhaseMap sweep(const PointSolver& solver, const SweepSettings& settings, int threads) {
    settings.validate();
    PhaseMap map;
    map.model = settings.model;
    map.t_grid = settings.t_grid();
    map.h_grid = settings.h_grid();
    const std::size_t nt = map.t_grid.size();
    const std::size_t nh = map.h_grid.size();
    map.cells.resize(nt * nh);
    detail::parallel_for(nt, threads, [&](std::size_t it) {
        const Cell* warm = nullptr;
        for (std::size_t ih = 0; ih < nh; ++ih) {
            Cell& cell = map.at(it, ih);
            cell = solver(map.t_grid[it], map.h_grid[ih], warm);
            if (cell.converged) warm = &cell;
        }
    });
    for (const Cell& c : map.cells) map.failed += c.converged ? 0 : 1;
    if (10 * static_cast<std::size_t>(map.failed) > map.cells.size())
        throw SolverError(std::to_string(map.failed) + " of " + std::to_string(map.cells.size()) +
                          " sweep cells failed to converge");
    return map;
}

PhaseMap sweep(const ReducedParams& params, const SweepSettings& settings, const SolverSettings& solver) {
    params.validate();
    PhaseMap map = sweep(reduced_point_solver(params, solver, settings.eps, settings.rule), settings, solver.threads);
    map.model = Model::reduced;
    map.g_lande_z = params.g_lande_z;
    return map;
}

PhaseMap sweep(const MicroParams& params, const SweepSettings& settings, const SolverSettings& solver) {
    params.validate();
    PhaseMap map = sweep(micro_point_solver(params, solver, settings.eps, settings.rule), settings, solver.threads);
    map.model = Model::micro;
    return map;
}

PhaseMap transpose(const PhaseMap& map) {
    PhaseMap out = map;
    out.t_grid = map.h_grid;
    out.h_grid = map.t_grid;
    for (std::size_t i = 0; i < map.t_grid.size(); ++i)
        for (std::size_t j = 0; j < map.h_grid.size(); ++j) {
            Cell c = map.at(i, j);
            std::swap(c.t, c.h);
            out.at(j, i) = std::move(c);
        }
    return out;
}

const Boundary* BoundarySet::find(Phase a, Phase b) const {
    const auto key = ordered_pair(a, b);
    for (const Boundary& bd : boundaries)
        if (bd.low == key.first && bd.high == key.second) return &bd;
    return nullptr;
}

namespace {

struct Edge {
    std::size_t i0, j0, i1, j1;
};

// Bisects the segment between two cells with different labels.
BoundaryPoint refine_edge(const Cell& lo_cell, const Cell& hi_cell, const PointSolver& solver, double tolerance) {
    Cell lo = lo_cell;
    Cell hi = hi_cell;
    const bool along_t = lo.t != hi.t;
    for (int it = 0; it < 200; ++it) {
        const double width = along_t ? std::abs(hi.t - lo.t) : std::abs(hi.h - lo.h);
        if (width < tolerance) break;
        const double t = along_t ? 0.5 * (lo.t + hi.t) : lo.t;
        const double h = along_t ? lo.h : 0.5 * (lo.h + hi.h);
        Cell mid = solver(t, h, &lo);
        if (!mid.converged) break;
        if (mid.phase == lo.phase) lo = std::move(mid);
        else hi = std::move(mid);
    }
    return {0.5 * (lo.t + hi.t), 0.5 * (lo.h + hi.h), op_jump(lo.op, hi.op)};
}

// Centroid of all 2x2 blocks that carry all three labels.
std::optional<BoundaryPoint> triple_centroid(const std::vector<double>& tg, const std::vector<double>& hg,
                                             const std::function<Phase(std::size_t, std::size_t)>& label,
                                             const std::function<bool(std::size_t, std::size_t)>& ok) {
    double st = 0.0, sh = 0.0;
    int count = 0;
    for (std::size_t i = 0; i + 1 < tg.size(); ++i)
        for (std::size_t j = 0; j + 1 < hg.size(); ++j) {
            if (!ok(i, j) || !ok(i + 1, j) || !ok(i, j + 1) || !ok(i + 1, j + 1)) continue;
            std::set<Phase> seen{label(i, j), label(i + 1, j), label(i, j + 1), label(i + 1, j + 1)};
            if (seen.size() < 3) continue;
            st += 0.5 * (tg[i] + tg[i + 1]);
            sh += 0.5 * (hg[j] + hg[j + 1]);
            ++count;
        }
    if (count == 0) return std::nullopt;
    return BoundaryPoint{st / count, sh / count, 0.0};
}

}  // namespace

BoundarySet extract_boundaries(const PhaseMap& map, const BoundaryOptions& options, const PointSolver* refine) {
    const std::size_t nt = map.t_grid.size();
    const std::size_t nh = map.h_grid.size();
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nh; ++j) {
            const Cell& c = map.at(i, j);
            if (!c.converged) continue;
            if (i + 1 < nt && map.at(i + 1, j).converged && map.at(i + 1, j).phase != c.phase)
                edges.push_back({i, j, i + 1, j});
            if (j + 1 < nh && map.at(i, j + 1).converged && map.at(i, j + 1).phase != c.phase)
                edges.push_back({i, j, i, j + 1});
        }

    std::vector<BoundaryPoint> points(edges.size());
    detail::parallel_for(edges.size(), refine ? options.threads : 1, [&](std::size_t k) {
        const Cell& a = map.at(edges[k].i0, edges[k].j0);
        const Cell& b = map.at(edges[k].i1, edges[k].j1);
        points[k] = refine ? refine_edge(a, b, *refine, options.refine_tolerance)
                           : BoundaryPoint{0.5 * (a.t + b.t), 0.5 * (a.h + b.h), op_jump(a.op, b.op)};
    });

    std::map<std::pair<Phase, Phase>, Boundary> grouped;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto key = ordered_pair(map.at(edges[k].i0, edges[k].j0).phase, map.at(edges[k].i1, edges[k].j1).phase);
        Boundary& bd = grouped[key];
        bd.low = key.first;
        bd.high = key.second;
        bd.points.push_back(points[k]);
    }

    BoundarySet out;
    for (auto& [key, bd] : grouped) {
        std::sort(bd.points.begin(), bd.points.end(), [](const BoundaryPoint& x, const BoundaryPoint& y) {
            return std::tie(x.t, x.h) < std::tie(y.t, y.h);
        });
        std::vector<double> jumps;
        for (const BoundaryPoint& p : bd.points) {
            jumps.push_back(p.jump);
            bd.jump = std::max(bd.jump, p.jump);
        }
        std::nth_element(jumps.begin(), jumps.begin() + static_cast<long>(jumps.size() / 2), jumps.end());
        bd.order = jumps[jumps.size() / 2] > options.delta_jump ? TransitionOrder::first : TransitionOrder::second;
        out.boundaries.push_back(std::move(bd));
    }

    out.triple_point = triple_centroid(
        map.t_grid, map.h_grid, [&](std::size_t i, std::size_t j) { return map.at(i, j).phase; },
        [&](std::size_t i, std::size_t j) { return map.at(i, j).converged; });
    if (!out.triple_point || !refine) return out;

    // 4x refinement over the 3x3-cell window around the coarse estimate
    const auto nearest = [](const std::vector<double>& g, double v) {
        std::size_t k = 0;
        while (k + 1 < g.size() && g[k + 1] <= v) ++k;
        return k;
    };
    const std::size_t ci = nearest(map.t_grid, out.triple_point->t);
    const std::size_t cj = nearest(map.h_grid, out.triple_point->h);
    const std::size_t i0 = ci > 0 ? ci - 1 : 0, i1 = std::min(nt - 1, ci + 2);
    const std::size_t j0 = cj > 0 ? cj - 1 : 0, j1 = std::min(nh - 1, cj + 2);
    const int ft = static_cast<int>(4 * (i1 - i0)) + 1;
    const int fh = static_cast<int>(4 * (j1 - j0)) + 1;
    const std::vector<double> tg = linspace(map.t_grid[i0], map.t_grid[i1], ft);
    const std::vector<double> hg = linspace(map.h_grid[j0], map.h_grid[j1], fh);
    std::vector<Cell> fine(tg.size() * hg.size());
    detail::parallel_for(tg.size(), options.threads, [&](std::size_t i) {
        const Cell* warm = nullptr;
        for (std::size_t j = 0; j < hg.size(); ++j) {
            Cell& c = fine[i * hg.size() + j];
            c = (*refine)(tg[i], hg[j], warm);
            if (c.converged) warm = &c;
        }
    });
    const auto refined = triple_centroid(
        tg, hg, [&](std::size_t i, std::size_t j) { return fine[i * hg.size() + j].phase; },
        [&](std::size_t i, std::size_t j) { return fine[i * hg.size() + j].converged; });
    if (refined) out.triple_point = refined;
    return out;
}

double upper_critical_field(const ReducedParams& params, double t, const SolverSettings& settings, double eps,
                            double tolerance, double h_start, double h_limit) {
    const auto seeds = dicke::default_seeds();
    auto ordered = [&](double h) {
        const auto sol = dicke::solve_point(params, conditions(t, h), seeds, settings);
        return max_op(order_parameters(sol.best)) >= eps;
    };
    double lo = 0.0;
    double hi = h_start;
    if (!ordered(lo)) throw NumericError("no ordered state at zero field; no upper critical field");
    while (ordered(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > h_limit) throw NumericError("state remains ordered up to the field limit");
    }
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (ordered(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Calibration calibrate_gz(const ReducedParams& params, double target_field, double temperature,
                         const SolverSettings& settings, double eps, double field_tolerance, double g_lo,
                         double g_hi) {
    Calibration out;
    auto critical = [&](double g) {
        ReducedParams p = params;
        p.g_lande_z = g;
        const double hc = upper_critical_field(p, temperature, settings, eps, 0.1 * field_tolerance);
        out.history.push_back({g, hc});
        return hc;
    };
    double h_lo = critical(g_lo);
    double h_hi = critical(g_hi);
    if (!(h_lo >= target_field && target_field >= h_hi))
        throw NumericError("no g_lande_z bracket: critical field does not cross the target in [" +
                           std::to_string(g_lo) + ", " + std::to_string(g_hi) + "]");
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (g_lo + g_hi);
        const double hc = critical(mid);
        if (hc > h_lo || hc < h_hi) throw NumericError("critical field is not monotone in g_lande_z");
        if (std::abs(hc - target_field) < field_tolerance) {
            out.g_lande_z = mid;
            out.critical_field = hc;
            return out;
        }
        if (hc > target_field) {
            g_lo = mid;
            h_lo = hc;
        } else {
            g_hi = mid;
            h_hi = hc;
        }
    }
    throw NumericError("g_lande_z bisection did not converge");
}

namespace {

struct Equilibrium {
    dicke::ReducedState state;
    double entropy = 0.0;  // per spin, meV/K
};

Equilibrium equilibrium(const ReducedParams& params, double t, double h, const SolverSettings& settings,
                        const dicke::ReducedState* warm) {
    std::vector<dicke::Seed> seeds = dicke::default_seeds();
    if (warm) seeds.push_back({"warm", warm->spins});
    const ExternalConditions c = conditions(t, h);
    Equilibrium out;
    out.state = dicke::solve_point(params, c, seeds, settings).best;
    out.entropy = (dicke::internal_energy(out.state, params, c) - out.state.free_energy) / t;
    return out;
}

}  // namespace

double entropy(const ReducedParams& params, const ExternalConditions& cond, const SolverSettings& settings,
               std::optional<double> step) {
    cond.validate();
    const double dt = step.value_or(1e-3 * cond.temperature);
    if (!(dt > 0.0) || cond.temperature - dt <= 0.0) throw ConfigError("dt", "dt must satisfy 0 < dt < T");
    const auto center = dicke::solve_point(params, cond, dicke::default_seeds(), settings).best;
    const std::vector<dicke::Seed> family{{center.seed_id, center.spins}};
    ExternalConditions up = cond, down = cond;
    up.temperature += dt;
    down.temperature -= dt;
    const double f_up = dicke::solve_point(params, up, family, settings).best.free_energy;
    const double f_down = dicke::solve_point(params, down, family, settings).best.free_energy;
    return -(f_up - f_down) / (2.0 * dt);
}

double entropy_identity(const ReducedParams& params, const ExternalConditions& cond, const SolverSettings& settings) {
    cond.validate();
    return equilibrium(params, cond.temperature, cond.b_field, settings, nullptr).entropy;
}

std::vector<MceStep> mce_trace(const ReducedParams& params, double t0, double h_start, double h_end,
                               const SolverSettings& settings, const MceOptions& options) {
    if (!(t0 > 0.0)) throw ConfigError("t0", "t0 must be positive");
    if (!(options.dh > 0.0)) throw ConfigError("mce_dh", "mce_dh must be positive");
    const Equilibrium start = equilibrium(params, t0, h_start, settings, nullptr);
    const double s0 = start.entropy;
    const int steps = static_cast<int>(std::llround(std::abs(h_end - h_start) / options.dh));
    const double dir = h_end >= h_start ? 1.0 : -1.0;

    std::vector<MceStep> trace;
    dicke::ReducedState warm = start.state;
    double t = t0;
    for (int k = 0; k <= steps; ++k) {
        const double h = h_start + dir * k * options.dh;
        auto s_at = [&](double tt) { return equilibrium(params, tt, h, settings, &warm).entropy; };

        double lo = std::max(0.5 * t, t - 0.05), hi = t + 0.05;
        double s_lo = s_at(lo), s_hi = s_at(hi);
        for (int grow = 0; s_lo > s0 && grow < 60; ++grow) {
            hi = lo;
            s_hi = s_lo;
            lo *= 0.7;
            s_lo = s_at(lo);
        }
        for (int grow = 0; s_hi < s0 && grow < 60; ++grow) {
            lo = hi;
            s_lo = s_hi;
            hi *= 1.4;
            s_hi = s_at(hi);
        }
        if (!(s_lo <= s0 && s0 <= s_hi) || !(s_lo < s_hi))
            throw NumericError("entropy is not monotone in T near B = " + std::to_string(h));
        while (hi - lo > options.t_tolerance) {
            const double mid = 0.5 * (lo + hi);
            const double sm = s_at(mid);
            if (sm < s_lo || sm > s_hi) throw NumericError("entropy is not monotone in T near B = " + std::to_string(h));
            if (sm < s0) {
                lo = mid;
                s_lo = sm;
            } else {
                hi = mid;
                s_hi = sm;
            }
        }
        t = 0.5 * (lo + hi);
        const Equilibrium here = equilibrium(params, t, h, settings, &warm);
        warm = here.state;

        auto s_th = [&](double tt, double hh) { return equilibrium(params, tt, std::abs(hh), settings, &warm).entropy; };
        const double ddh = options.derivative_dh, ddt = options.derivative_dt;
        const double ds_dh = (s_th(t, h + ddh) - s_th(t, h - ddh)) / (2.0 * ddh);
        const double ds_dt = (s_th(t + ddt, h) - s_th(t - ddt, h)) / (2.0 * ddt);
        MceStep step;
        step.h = h;
        step.t = t;
        step.dt_dh = -ds_dh / ds_dt;
        step.phase = classify(order_parameters(here.state), options.eps, options.rule);
        trace.push_back(step);
    }
    return trace;
}

std::vector<std::size_t> mce_maxima(const std::vector<MceStep>& trace, double floor, int window) {
    std::vector<std::size_t> out;
    const long n = static_cast<long>(trace.size());
    for (long i = 0; i < n; ++i) {
        const double v = trace[static_cast<std::size_t>(i)].dt_dh;
        double left_min = v, right_min = v;
        bool is_max = true;
        for (long k = 1; k <= window; ++k) {
            if (i - k >= 0) {
                const double w = trace[static_cast<std::size_t>(i - k)].dt_dh;
                if (w > v) is_max = false;
                left_min = std::min(left_min, w);
            }
            if (i + k < n) {
                const double w = trace[static_cast<std::size_t>(i + k)].dt_dh;
                if (w >= v) is_max = false;
                right_min = std::min(right_min, w);
            }
        }
        if (!is_max || i - window < 0 || i + window >= n) continue;
        if (v - std::min(left_min, right_min) > floor) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

std::vector<double> mce_crossings(const std::vector<MceStep>& trace) {
    std::vector<double> out;
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i].phase != trace[i - 1].phase) out.push_back(0.5 * (trace[i].h + trace[i - 1].h));
    return out;
}

}  // namespace gjsim::atlas
