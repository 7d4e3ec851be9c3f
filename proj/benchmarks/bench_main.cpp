#include <benchmark/benchmark.h>

#include <string>

#include "gjsim/config.hpp"
#include "gjsim/dicke_ed.hpp"
#include "gjsim/dicke_meanfield.hpp"
#include "gjsim/micro_meanfield.hpp"
#include "gjsim/phase_atlas.hpp"
#include "gjsim/thz_tds.hpp"

using namespace gjsim;

namespace {

constexpr double kGz = 15.3154296875;

ReducedParams calibrated() {
    ReducedParams p;
    p.g_lande_z = kGz;
    return p;
}

ExternalConditions at(double t, double b) {
    ExternalConditions c;
    c.temperature = t;
    c.b_field = b;
    return c;
}

MicroParams micro_reference() {
    return *load_config_file(std::string(GJSIM_DATA_DIR) + "/micro_reference.ini").micro;
}

void BM_ReducedSolvePoint(benchmark::State& state) {
    const auto p = calibrated();
    const auto seeds = dicke::default_seeds();
    for (auto _ : state) benchmark::DoNotOptimize(dicke::solve_point(p, at(1.5, 0.4), seeds));
}
BENCHMARK(BM_ReducedSolvePoint);

void BM_ReducedSweep(benchmark::State& state) {
    const auto p = calibrated();
    atlas::SweepSettings s;
    s.t_points = s.h_points = static_cast<int>(state.range(0));
    SolverSettings solver;
    solver.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(atlas::sweep(p, s, solver));
    state.SetItemsProcessed(state.iterations() * s.t_points * s.h_points);
}
BENCHMARK(BM_ReducedSweep)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_BoundaryExtraction(benchmark::State& state) {
    const auto p = calibrated();
    atlas::SweepSettings s;
    const auto map = atlas::sweep(p, s);
    const auto refine = atlas::reduced_point_solver(p, {}, s.eps, s.rule);
    for (auto _ : state) benchmark::DoNotOptimize(atlas::extract_boundaries(map, {}, &refine));
}
BENCHMARK(BM_BoundaryExtraction)->Unit(benchmark::kMillisecond);

void BM_MicroSolvePoint(benchmark::State& state) {
    const auto p = micro_reference();
    const auto seeds = micro::default_micro_seeds(p);
    for (auto _ : state) benchmark::DoNotOptimize(micro::micro_solve_point(p, at(10.0, 0.0), seeds));
}
BENCHMARK(BM_MicroSolvePoint)->Unit(benchmark::kMillisecond);

void BM_LinearizedSpectrum(benchmark::State& state) {
    const auto p = micro_reference();
    const auto c = at(10.0, 0.0);
    const auto eq = micro::micro_solve_point(p, c, micro::default_micro_seeds(p)).best;
    for (auto _ : state) benchmark::DoNotOptimize(micro::linearized_spectrum(eq, p, c));
}
BENCHMARK(BM_LinearizedSpectrum);

void BM_EdGroundState(benchmark::State& state) {
    ed::EdProblem prob;
    prob.n_spins = static_cast<int>(state.range(0));
    prob.n_max = 20;
    prob.max_dimension = 20000;
    for (auto _ : state) benchmark::DoNotOptimize(ed::ground_state(prob));
}
BENCHMARK(BM_EdGroundState)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ThzAnalyze(benchmark::State& state) {
    const auto ref = thz::model_pulse(static_cast<std::size_t>(state.range(0)), 0.02, 3.0, 0.15);
    const auto sam = thz::synthesize_sample_trace(
        ref, [](double nu) { return 2.0 + 0.1 * nu; }, [](double) { return 0.02; }, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(thz::analyze(ref, sam, 1.0));
}
BENCHMARK(BM_ThzAnalyze)->Arg(2048)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
