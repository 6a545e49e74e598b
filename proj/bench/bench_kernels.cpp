#include <benchmark/benchmark.h>

#include <bouss/flow_map.hpp>
#include <bouss/hoelder.hpp>
#include <bouss/shapes.hpp>
#include <bouss/transport.hpp>

#include <memory>

using namespace bouss;

namespace {

Exec mode(const benchmark::State& s) { return s.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

struct Setup {
    StripGeometry geo = build_strip_geometry({});
    Grid2D outer = make_outer_grid(geo, 64);
    std::shared_ptr<const ReturnPotential> rp = std::make_shared<ReturnPotential>(solve_return_potential(geo, outer));
    TimeProfile gamma = TimeProfile::gamma(0.2, 1.0);
    TimeGrid tg{0.0, 1.0, 32};
};

const Setup& setup() {
    static const Setup s;
    return s;
}

void BM_HolderSeminorm(benchmark::State& state) {
    const Grid2D g(0.0, 0.0, 1.0 / 64, 96, 64);
    const ScalarField f = make_scalar({"bump", 1.0, {0.75, 0.5}, 0.4}, g);
    HolderOptions opt;
    opt.exec = mode(state);
    for (auto _ : state) benchmark::DoNotOptimize(pair_seminorm(f, 0.5, opt));
}
BENCHMARK(BM_HolderSeminorm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AdvectBatch(benchmark::State& state) {
    const Setup& s = setup();
    FlowMap fm(s.outer, s.geo.omega3, s.tg);
    fm.with_return_field(s.rp, s.gamma, 16.0);
    const auto pts = closure_nodes(s.outer, s.geo.omega2, 2);
    for (auto _ : state) benchmark::DoNotOptimize(fm.advect_batch(pts, 0.5, 0.0, mode(state)));
}
BENCHMARK(BM_AdvectBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Transport(benchmark::State& state) {
    const Setup& s = setup();
    FlowMap fm(s.outer, s.geo.omega3, s.tg);
    fm.with_return_field(s.rp, s.gamma, 16.0);
    const Characteristics ch(fm, 0, s.tg.n_steps / 2, Exec::Parallel);
    TransportProblem p;
    p.chars = &ch;
    p.initial = make_scalar({"bump", 1.0, {1.0, 0.5}, 0.3}, s.outer);
    p.k0 = 0;
    p.k1 = s.tg.n_steps / 2;
    for (auto _ : state) benchmark::DoNotOptimize(solve_transport(p, mode(state)));
}
BENCHMARK(BM_Transport)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
