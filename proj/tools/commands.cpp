#include "commands.hpp"

#include <chrono>
#include <iostream>
#include <random>
#include <sstream>

#include "gjsim/dicke_ed.hpp"
#include "gjsim/dicke_meanfield.hpp"
#include "gjsim/error.hpp"
#include "gjsim/format.hpp"
#include "gjsim/micro_meanfield.hpp"
#include "gjsim/phase_atlas.hpp"
#include "gjsim/thz_tds.hpp"

namespace gjsim::cli {
namespace {

using Clock = std::chrono::steady_clock;

struct Run {
    RunOutput out;
    Config config;
    Json extra = Json::object();
    Clock::time_point start = Clock::now();

    int finish(int code = 0) {
        out.finish(config, extra, std::chrono::duration<double>(Clock::now() - start).count());
        return code;
    }
};

Run begin(const CommonOptions& c, const std::string& command) {
    Run run{RunOutput(resolve_out_dir(c.out), command), Config{}};
    if (!c.config_path.empty()) {
        const std::string text = run.out.add_input(c.config_path);
        try {
            run.config = load_config(text);
        } catch (const ConfigError& e) {
            throw ConfigError(e.key(), c.config_path + ": " + e.what());
        }
    }
    Config& cfg = run.config;
    if (c.temperature) cfg.conditions.temperature = *c.temperature;
    if (c.b_field) cfg.conditions.b_field = *c.b_field;
    if (c.axis) cfg.conditions.axis = parse_field_axis(*c.axis);
    if (c.model) cfg.sweep.model = atlas::parse_model(*c.model);
    if (c.g_lande_z) cfg.reduced.g_lande_z = *c.g_lande_z;
    if (c.threads) cfg.solver.threads = *c.threads;
    cfg.validate();
    return run;
}

void apply(Config& cfg, const SweepOptions& s) {
    auto& w = cfg.sweep;
    if (s.t_points) w.t_points = *s.t_points;
    if (s.h_points) w.h_points = *s.h_points;
    if (s.t_min) w.t_min = *s.t_min;
    if (s.t_max) w.t_max = *s.t_max;
    if (s.h_min) w.h_min = *s.h_min;
    if (s.h_max) w.h_max = *s.h_max;
    if (s.rule) w.rule = atlas::parse_classify_rule(*s.rule);
    cfg.validate();
}

const MicroParams& require_micro(const Config& cfg) {
    if (!cfg.micro) throw ConfigError("micro", "the micro model needs a [micro] section in the configuration");
    return *cfg.micro;
}

// Field-dependent reduced runs need g_z; calibrate it when not supplied.
void ensure_gz(Run& run) {
    auto& r = run.config.reduced;
    if (r.g_lande_z) {
        run.extra["g_lande_z_source"] = "configured";
        return;
    }
    const auto& s = run.config.sweep;
    const auto cal = atlas::calibrate_gz(r, s.calibrate_field, s.calibrate_temperature, run.config.solver, s.eps);
    r.g_lande_z = cal.g_lande_z;
    run.extra["g_lande_z_source"] = "calibrated";
    std::cerr << "calibrated g_lande_z = " << fmt17(cal.g_lande_z) << "\n";
}

Json vec(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json op_json(const atlas::OrderParameters& op) {
    return {{"ez", op.ez}, {"ex", op.ex}, {"condensate", op.condensate}, {"mz_total", op.mz_total}};
}

Json conditions_json(const ExternalConditions& c) {
    return {{"temperature_K", c.temperature}, {"b_field_T", c.b_field}, {"axis", to_string(c.axis)}};
}

Json micro_state_json(const micro::MicroState& s) {
    return {{"sigma_a", vec(s.sigma_a)}, {"sigma_b", vec(s.sigma_b)}, {"s_a", vec(s.s_a)},  {"s_b", vec(s.s_b)},
            {"free_energy_meV", s.free_energy}, {"residual", s.residual}, {"converged", s.converged},
            {"iterations", s.iterations},       {"seed", s.seed_id}};
}

atlas::PhaseMap run_sweep(Run& run) {
    const Config& c = run.config;
    if (c.sweep.model == atlas::Model::micro) return atlas::sweep(require_micro(c), c.sweep, c.solver);
    ensure_gz(run);
    return atlas::sweep(run.config.reduced, c.sweep, c.solver);
}

Json sweep_summary(const atlas::PhaseMap& map, const Config& c) {
    int counts[3] = {0, 0, 0};
    for (const auto& cell : map.cells) ++counts[static_cast<int>(cell.phase)];
    Json j;
    j["model"] = atlas::to_string(map.model);
    j["classify_rule"] = atlas::to_string(c.sweep.rule);
    j["t_points"] = map.t_grid.size();
    j["h_points"] = map.h_grid.size();
    j["rows"] = map.cells.size();
    j["failed"] = map.failed;
    j["phase_counts"] = {{"N", counts[0]}, {"S", counts[1]}, {"A", counts[2]}};
    if (map.g_lande_z) j["g_lande_z"] = *map.g_lande_z;
    return j;
}

}  // namespace

int cmd_solve(const CommonOptions& common) {
    Run run = begin(common, "solve");
    const Config& c = run.config;
    const auto& s = c.sweep;
    Json report;
    report["model"] = atlas::to_string(s.model);
    report["conditions"] = conditions_json(c.conditions);
    bool converged = false;
    if (s.model == atlas::Model::micro) {
        const MicroParams& mp = require_micro(c);
        const auto sol = micro::micro_solve_point(mp, c.conditions, micro::default_micro_seeds(mp), c.solver);
        const auto op = atlas::order_parameters(sol.best, mp);
        report["phase"] = atlas::to_string(atlas::classify(op, s.eps, s.rule));
        report["order_parameters"] = op_json(op);
        report["state"] = micro_state_json(sol.best);
        converged = sol.best.converged;
    } else {
        if (c.conditions.b_field != 0.0) ensure_gz(run);
        const auto sol = dicke::solve_point(run.config.reduced, c.conditions, dicke::default_seeds(), c.solver);
        const auto& b = sol.best;
        const auto op = atlas::order_parameters(b);
        report["phase"] = atlas::to_string(atlas::classify(op, s.eps, s.rule));
        report["order_parameters"] = op_json(op);
        report["state"] = {{"m_a", vec(b.spins.m_a)},
                           {"m_b", vec(b.spins.m_b)},
                           {"alpha", Json::array({b.boson.alpha.real(), b.boson.alpha.imag()})},
                           {"free_energy_meV", b.free_energy},
                           {"residual", b.residual},
                           {"converged", b.converged},
                           {"iterations", b.iterations},
                           {"seed", b.seed_id}};
        converged = b.converged;
    }
    run.out.write_json("solve.json", report);
    std::cout << report.dump(2) << "\n";
    return run.finish(converged ? 0 : 3);
}

int cmd_sweep(const CommonOptions& common, const SweepOptions& opt) {
    Run run = begin(common, "sweep");
    apply(run.config, opt);
    const atlas::PhaseMap map = run_sweep(run);
    std::string csv = run.out.csv_preamble();
    csv += "t_K,b_T,phase,ez,ex,condensate,mz_total,free_energy_meV,residual,converged,seed\n";
    for (const auto& cell : map.cells) {
        csv += fmt17(cell.t) + ',' + fmt17(cell.h) + ',' + atlas::to_string(cell.phase) + ',' + fmt17(cell.op.ez) +
               ',' + fmt17(cell.op.ex) + ',' + fmt17(cell.op.condensate) + ',' + fmt17(cell.op.mz_total) + ',' +
               fmt17(cell.free_energy) + ',' + fmt17(cell.residual) + ',' + (cell.converged ? "1" : "0") + ',' +
               cell.seed_id + '\n';
    }
    run.out.write("sweep.csv", csv);
    const Json summary = sweep_summary(map, run.config);
    run.out.write_json("sweep_summary.json", summary);
    std::cout << summary.dump(2) << "\n";
    return run.finish(map.failed == 0 ? 0 : 3);
}

int cmd_boundaries(const CommonOptions& common, const SweepOptions& opt) {
    Run run = begin(common, "boundaries");
    apply(run.config, opt);
    const atlas::PhaseMap map = run_sweep(run);
    const Config& c = run.config;
    std::optional<atlas::PointSolver> refine;
    if (c.sweep.refine_boundaries)
        refine = c.sweep.model == atlas::Model::micro
                     ? atlas::micro_point_solver(require_micro(c), c.solver, c.sweep.eps, c.sweep.rule)
                     : atlas::reduced_point_solver(c.reduced, c.solver, c.sweep.eps, c.sweep.rule);
    atlas::BoundaryOptions bo;
    bo.delta_jump = c.sweep.delta_jump;
    bo.refine_tolerance = c.sweep.refine_tolerance;
    bo.threads = c.solver.threads;
    const atlas::BoundarySet set = atlas::extract_boundaries(map, bo, refine ? &*refine : nullptr);

    std::string csv = run.out.csv_preamble() + "low,high,order,t_K,b_T,jump\n";
    Json list = Json::array();
    for (const auto& b : set.boundaries) {
        const std::string head = atlas::to_string(b.low) + ',' + atlas::to_string(b.high) + ',' +
                                 atlas::to_string(b.order) + ',';
        for (const auto& p : b.points) csv += head + fmt17(p.t) + ',' + fmt17(p.h) + ',' + fmt17(p.jump) + '\n';
        list.push_back({{"low", atlas::to_string(b.low)},
                        {"high", atlas::to_string(b.high)},
                        {"order", atlas::to_string(b.order)},
                        {"jump", b.jump},
                        {"points", b.points.size()}});
    }
    run.out.write("boundaries.csv", csv);
    Json doc;
    doc["sweep"] = sweep_summary(map, c);
    doc["refined"] = refine.has_value();
    doc["boundaries"] = list;
    if (set.triple_point) doc["triple_point"] = {{"t_K", set.triple_point->t}, {"b_T", set.triple_point->h}};
    else doc["triple_point"] = nullptr;
    run.out.write_json("boundaries.json", doc);
    std::cout << doc.dump(2) << "\n";
    return run.finish(map.failed == 0 ? 0 : 3);
}

int cmd_mce(const CommonOptions& common, const SweepOptions& sweep, const MceCommandOptions& opt) {
    Run run = begin(common, "mce");
    apply(run.config, sweep);
    const Config& c = run.config;
    if (c.sweep.model != atlas::Model::reduced) throw ConfigError("model", "mce supports the reduced model only");
    if (opt.t0.empty()) throw ConfigError("t0", "at least one starting temperature is required");
    ensure_gz(run);
    atlas::MceOptions mo;
    mo.dh = c.sweep.mce_dh;
    mo.eps = c.sweep.eps;
    mo.rule = c.sweep.rule;
    const double h_end = opt.h_end.value_or(c.sweep.h_max);
    run.extra["mce"] = {{"t0_K", opt.t0}, {"h_start_T", opt.h_start}, {"h_end_T", h_end}};

    Json traces = Json::array();
    for (double t0 : opt.t0) {
        const auto trace = atlas::mce_trace(run.config.reduced, t0, opt.h_start, h_end, c.solver, mo);
        const std::string name = "mce_t" + fmt17(t0) + ".csv";
        std::string csv = run.out.csv_preamble() + "b_T,t_K,dT_dB_K_per_T,phase\n";
        for (const auto& s : trace)
            csv += fmt17(s.h) + ',' + fmt17(s.t) + ',' + fmt17(s.dt_dh) + ',' + atlas::to_string(s.phase) + '\n';
        run.out.write(name, csv);
        Json maxima = Json::array();
        for (std::size_t k : atlas::mce_maxima(trace)) maxima.push_back(trace[k].h);
        traces.push_back({{"t0_K", t0}, {"file", name}, {"maxima_T", maxima}, {"crossings_T", atlas::mce_crossings(trace)}});
    }
    Json doc;
    doc["dh_T"] = mo.dh;
    doc["traces"] = traces;
    run.out.write_json("mce.json", doc);
    std::cout << doc.dump(2) << "\n";
    return run.finish();
}

int cmd_spectrum(const CommonOptions& common) {
    Run run = begin(common, "spectrum");
    const Config& c = run.config;
    const MicroParams& mp = require_micro(c);
    const auto state = micro::micro_solve_point(mp, c.conditions, micro::default_micro_seeds(mp), c.solver).best;
    const auto sp = micro::linearized_spectrum(state, mp, c.conditions);
    std::string csv = run.out.csv_preamble() + "frequency_THz,label,er,fe_qafm,fe_qfm\n";
    for (std::size_t k = 0; k < sp.frequencies.size(); ++k) {
        const auto& p = sp.participation[k];
        csv += fmt17(sp.frequencies[k]) + ',' + micro::to_string(sp.labels[k]) + ',' + fmt17(p.er) + ',' +
               fmt17(p.fe_qafm) + ',' + fmt17(p.fe_qfm) + '\n';
    }
    run.out.write("spectrum.csv", csv);
    Json doc;
    doc["conditions"] = conditions_json(c.conditions);
    doc["state"] = micro_state_json(state);
    doc["max_growth_rate_meV"] = sp.max_growth_rate;
    doc["defective"] = sp.defective;
    run.out.write_json("spectrum.json", doc);
    if (sp.max_growth_rate > 1e-8) std::cerr << "warning: equilibrium is not a minimum (growing modes)\n";
    std::cout << doc.dump(2) << "\n";
    return run.finish();
}

int cmd_ed(const CommonOptions& common, const EdOptions& opt) {
    Run run = begin(common, "ed");
    Config& c = run.config;
    if (opt.n_spins) c.ed.n_spins = *opt.n_spins;
    if (opt.n_max) c.ed.n_max = *opt.n_max;
    c.validate();
    if (c.conditions.b_field != 0.0) ensure_gz(run);
    ed::EdProblem p;
    p.n_spins = c.ed.n_spins;
    p.n_max = c.ed.n_max;
    p.params = c.reduced;
    p.cond = c.conditions;
    p.max_dimension = c.ed.max_dimension;
    const ed::EdResult r = opt.thermal ? ed::thermal_observables(p, c.conditions.temperature) : ed::ground_state(p);
    Json doc;
    doc["n_spins"] = p.n_spins;
    doc["n_max"] = r.n_max;
    doc["dimension"] = r.dimension;
    doc["temperature_K"] = r.temperature;
    doc["b_field_T"] = c.conditions.b_field;
    doc["ground_energy_meV"] = r.ground_energy;
    doc["gap_meV"] = r.gap;
    doc["photon_number"] = r.photon_number;
    doc["staggered_sq"] = r.staggered_sq;
    doc["x_staggered_sq"] = r.x_staggered_sq;
    doc["correlator"] = r.correlator;
    doc["parity_expectation"] = r.parity_expectation;
    doc["sy_plus"] = r.sy_plus;
    doc["sy_minus"] = r.sy_minus;
    doc["partition_function"] = r.partition_function;
    doc["truncation_shift_meV"] = r.truncation_shift;
    run.out.write_json("ed.json", doc);
    std::cout << doc.dump(2) << "\n";
    return run.finish();
}

int cmd_thz(const CommonOptions& common, const ThzOptions& opt) {
    Run run = begin(common, "thz");
    ThzSettings& ts = run.config.thz;
    if (opt.thickness_mm) ts.thickness_mm = *opt.thickness_mm;
    if (opt.snr_floor) ts.analysis.snr_floor = *opt.snr_floor;
    if (opt.echo_refine) ts.analysis.echo_refine = *opt.echo_refine;
    run.config.validate();
    const auto d = ts.thickness_mm;
    if (!d) throw ConfigError("thickness_mm", "sample thickness is required (--d or [thz] thickness_mm)");
    if (!(*d > 0.0)) throw ConfigError("thickness_mm", "sample thickness must be positive");
    const thz::AnalysisOptions& ao = ts.analysis;

    auto load = [&](const std::string& path, thz::TraceLabel label) {
        std::istringstream in(run.out.add_input(path));
        try {
            return thz::read_trace(in, label, path);
        } catch (const NumericError& e) {
            throw ConfigError(path, e.what());
        }
    };
    const auto ref = load(opt.reference, thz::TraceLabel::reference);
    const auto sam = load(opt.sample, thz::TraceLabel::sample);
    const thz::Analysis a = thz::analyze(ref, sam, *d, ao);

    std::ostringstream table;
    thz::write_constants(table, a.constants);
    run.out.write("optical_constants.csv", run.out.csv_preamble() + table.str());
    std::size_t valid = 0;
    for (bool v : a.constants.valid) valid += v;
    Json doc;
    doc["thickness_mm"] = *d;
    doc["bins"] = a.constants.freq.size();
    doc["valid_bins"] = valid;
    doc["first_pass_index"] = a.first_pass_index;
    doc["window_end_ps"] = a.window_end ? Json(*a.window_end) : Json(nullptr);
    run.out.write_json("thz.json", doc);
    std::cout << doc.dump(2) << "\n";
    return run.finish(valid > 0 ? 0 : 3);
}

int cmd_thz_synth(const CommonOptions& common, const ThzSynthOptions& opt) {
    Run run = begin(common, "thz-synth");
    const auto d = opt.thickness_mm ? opt.thickness_mm : run.config.thz.thickness_mm;
    if (!d || !(*d > 0.0)) throw ConfigError("thickness_mm", "a positive sample thickness is required (--d)");
    if (opt.samples < 8) throw ConfigError("samples", "at least 8 samples are required");
    if (!(opt.dt > 0.0)) throw ConfigError("dt", "dt must be positive");
    if (!(opt.noise >= 0.0)) throw ConfigError("noise", "noise must be non-negative");
    thz::FieldTrace ref = thz::model_pulse(opt.samples, opt.dt, opt.t0, opt.width);
    const double n0 = opt.n, n1 = opt.n_slope, k0 = opt.kappa;
    thz::FieldTrace sam = thz::synthesize_sample_trace(
        ref, [=](double nu) { return n0 + n1 * nu; }, [=](double) { return k0; }, *d);
    if (opt.noise > 0.0) {
        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> noise(0.0, opt.noise);
        for (double& v : ref.e) v += noise(rng);
        for (double& v : sam.e) v += noise(rng);
    }
    for (const auto& [name, tr] : {std::pair{"reference.csv", &ref}, std::pair{"sample.csv", &sam}}) {
        std::ostringstream o;
        thz::write_trace(o, *tr);
        run.out.write(name, run.out.csv_preamble() + o.str());
    }
    run.extra["synthesis"] = {{"n", n0},        {"n_slope_per_THz", n1}, {"kappa", k0},      {"thickness_mm", *d},
                              {"samples", opt.samples}, {"dt_ps", opt.dt},  {"t0_ps", opt.t0}, {"width_ps", opt.width},
                              {"noise", opt.noise},     {"seed", opt.seed}};
    return run.finish();
}

int cmd_calibrate_gz(const CommonOptions& common, const SweepOptions& sweep, const CalibrateOptions& opt) {
    Run run = begin(common, "calibrate-gz");
    apply(run.config, sweep);
    const Config& c = run.config;
    if (opt.target_field) run.config.sweep.calibrate_field = *opt.target_field;
    if (opt.temperature) run.config.sweep.calibrate_temperature = *opt.temperature;
    run.config.validate();
    const double target = c.sweep.calibrate_field;
    const double t = c.sweep.calibrate_temperature;
    const auto cal = atlas::calibrate_gz(c.reduced, target, t, c.solver, c.sweep.eps);
    Json history = Json::array();
    for (const auto& s : cal.history) history.push_back({{"g_lande_z", s.g_lande_z}, {"critical_field_T", s.critical_field}});
    Json doc;
    doc["target_field_T"] = target;
    doc["temperature_K"] = t;
    doc["g_lande_z"] = cal.g_lande_z;
    doc["critical_field_T"] = cal.critical_field;
    doc["history"] = history;
    run.out.write_json("calibrate_gz.json", doc);
    std::cout << doc.dump(2) << "\n";
    return run.finish();
}

}  // namespace gjsim::cli
