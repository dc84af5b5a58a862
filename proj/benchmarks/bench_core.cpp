#include <benchmark/benchmark.h>

#include <cmath>

#include "cartan/fixtures.hpp"
#include "cartan/flows.hpp"
#include "cartan/parse.hpp"

using namespace cartan;

namespace {

void BM_fixture(benchmark::State& state, const char* name) {
  for (auto _ : state) benchmark::DoNotOptimize(run_fixture(name).pass());
}
BENCHMARK_CAPTURE(BM_fixture, example1, "example1")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_fixture, example2, "example2")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_fixture, example3, "example3")->Unit(benchmark::kMillisecond);

void BM_eta_expansion(benchmark::State& state) {
  const auto spec = fixture_problem("example3");
  for (auto _ : state) benchmark::DoNotOptimize(build(spec).eta.terms().size());
}
BENCHMARK(BM_eta_expansion)->Unit(benchmark::kMillisecond);

void BM_annihilator(benchmark::State& state) {
  const auto spec = fixture_problem("example1");
  const auto p = build(spec);
  const Box box = spec.effective_box();
  for (auto _ : state) benchmark::DoNotOptimize(annihilator(p.eta, box).rank());
}
BENCHMARK(BM_annihilator)->Unit(benchmark::kMillisecond);

void BM_rk4_rotation(benchmark::State& state) {
  const ChartPtr c = make_chart({"x", "y"});
  const VecField rot(c, {parse_expr("-y"), parse_expr("x")});
  FlowOptions o;
  o.step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flow_endpoint(rot, {1.0, 0.0}, 1.0, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_rk4_rotation)->Arg(1000)->Arg(10000);

void BM_sweep(benchmark::State& state) {
  const auto spec = parse_problem(R"({"chart": {"base": ["x1", "x2"], "fiber_z": ["z1", "z2", "z3"]},
    "factors": [[{"coeff": "1", "index": ["z1"]}, {"coeff": "1/2", "index": ["x1"]}, {"coeff": "-1/4", "index": ["x2"]}],
                [{"coeff": "1", "index": ["z2"]}, {"coeff": "1", "index": ["x1"]}, {"coeff": "3/4", "index": ["x2"]}],
                [{"coeff": "1", "index": ["z3"]}, {"coeff": "-1/2", "index": ["x1"]}, {"coeff": "3/10", "index": ["x2"]}]]})");
  const auto p = build(spec);
  const auto d = annihilator(p.eta, p.box);
  const SectionMap seed(p.bundle, {{"z1", parse_expr("-x1/2 + x2/4")},
                                   {"z2", parse_expr("-x1 - 3*x2/4")},
                                   {"z3", parse_expr("x1/2 - 3*x2/10")}});
  const int n = static_cast<int>(state.range(0));
  GridSpec g;
  g.lo = {-1.0, -1.0};
  g.hi = {1.0, 1.0};
  g.counts = {n, n};
  g.anchor = {0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(sweep_section(p, d, seed, g).max_residual);
}
BENCHMARK(BM_sweep)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
