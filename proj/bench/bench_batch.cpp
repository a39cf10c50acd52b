#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "lightpos/io.hpp"
#include "lightpos/sim.hpp"

using namespace lightpos;

namespace {

const ScenarioFile& fixture(const std::string& name) {
  static std::vector<std::pair<std::string, ScenarioFile>> cache;
  for (const auto& [n, f] : cache) {
    if (n == name) return f;
  }
  cache.emplace_back(name, load_scenario(std::string(LIGHTPOS_FIXTURE_DIR) + "/" + name));
  return cache.back().second;
}

Scenario noisy_office() {
  auto scn = fixture("office.json").scenario;
  scn.noise.rss_epsilon = 0.1;
  scn.noise.heading_epsilon = 0.1;
  return scn;
}

template <bool Parallel>
void BM_RunStatic(benchmark::State& state) {
  const auto scn = noisy_office();
  std::vector<Vec3> points;
  for (int r = 0; r < 20; ++r) points.insert(points.end(), scn.points.begin(), scn.points.end());
  for (auto _ : state) {
    auto run = Parallel ? run_static(scn, points, {}) : run_static_serial(scn, points, {});
    benchmark::DoNotOptimize(run.stats.mean);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(points.size()));
}

template <bool Parallel>
void BM_RunStaticEndToEnd(benchmark::State& state) {
  const auto scn = fixture("three_lamps.json").scenario;
  const Pipeline pipe{PipelineKind::multi, 9};
  for (auto _ : state) {
    auto run = Parallel ? run_static(scn, scn.points, pipe, MeasureMode::end_to_end)
                        : run_static_serial(scn, scn.points, pipe, MeasureMode::end_to_end);
    benchmark::DoNotOptimize(run.stats.mean);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(scn.points.size()));
}

template <bool Parallel>
void BM_Sweep(benchmark::State& state) {
  const auto scn = fixture("office.json").scenario;
  const std::vector<double> eps{0.0, 0.1, 0.2};
  const std::vector<double> heading{0.0, 0.17};
  for (auto _ : state) {
    auto table = Parallel ? sensitivity_sweep(scn, scn.points, eps, heading, 20)
                          : sensitivity_sweep_serial(scn, scn.points, eps, heading, 20);
    benchmark::DoNotOptimize(table.cells.data());
  }
}

template <bool Parallel>
void BM_Greedy(benchmark::State& state) {
  const auto& file = fixture("four_room.json");
  const auto plan = floorplan_of(file.scenario);
  const auto candidates =
      candidate_grid(plan, file.coverage.candidate_spacing, file.coverage.candidate_height);
  for (auto _ : state) {
    auto res = Parallel ? greedy_min_lamps(plan, candidates, CoverageMethod::trilateration,
                                           file.coverage.cell_size, file.coverage.criteria)
                        : greedy_min_lamps_serial(plan, candidates, CoverageMethod::trilateration,
                                                  file.coverage.cell_size, file.coverage.criteria);
    benchmark::DoNotOptimize(res.count);
  }
}

}  // namespace

BENCHMARK(BM_RunStatic<false>)->Name("run_static/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunStatic<true>)->Name("run_static/openmp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RunStaticEndToEnd<false>)->Name("run_static_end_to_end/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunStaticEndToEnd<true>)
    ->Name("run_static_end_to_end/openmp")
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_Sweep<false>)->Name("sensitivity_sweep/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep<true>)->Name("sensitivity_sweep/openmp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Greedy<false>)->Name("greedy_min_lamps/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Greedy<true>)->Name("greedy_min_lamps/openmp")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
