#include "kernels.hpp"

namespace lightpos {

StaticRun run_static(const Scenario& scn, std::span<const Vec3> points, const Pipeline& pipeline,
                     MeasureMode mode) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  std::vector<Fix> fixes(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    fixes[idx] = locate(scn, detail::pose_at(scn, points[idx]), pipeline, mode,
                        detail::point_seed(scn.noise.seed, idx));
  }
  return detail::assemble_static(std::move(fixes));
}

std::vector<TrackFix> run_trajectory(const Scenario& scn, const TrajectorySpec& traj,
                                     const Pipeline& pipeline, MeasureMode mode) {
  const auto samples = detail::sample_path(traj);
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  std::vector<TrackFix> out(samples.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx].time = samples[idx].first;
    out[idx].fix = locate(scn, detail::pose_at(scn, samples[idx].second), pipeline, mode,
                          detail::point_seed(scn.noise.seed, idx));
  }
  return out;
}

SensitivityTable sensitivity_sweep(const Scenario& scn, std::span<const Vec3> points,
                                   std::span<const double> epsilons,
                                   std::span<const double> heading_epsilons, int trials,
                                   const Pipeline& pipeline, MeasureMode mode) {
  std::vector<Scenario> cells;
  for (double e : epsilons) {
    for (double h : heading_epsilons) cells.push_back(detail::sweep_scenario(scn, e, h));
  }
  const auto jobs = detail::sweep_jobs(cells.size(), points.size(), trials);
  std::vector<Fix> fixes(jobs.size());
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& job = jobs[static_cast<std::size_t>(i)];
    fixes[static_cast<std::size_t>(i)] =
        locate(cells[job.cell], detail::pose_at(scn, points[job.point]), pipeline, mode,
               detail::sweep_seed(scn.noise.seed, job.point, job.trial, trials));
  }
  return detail::assemble_sweep(epsilons, heading_epsilons, jobs, fixes);
}

GreedyPlacement greedy_min_lamps(const Floorplan& plan, std::span<const Vec3> candidates,
                                 CoverageMethod method, double cell_size,
                                 const CoverageCriteria& criteria) {
  std::vector<LampModel> lamps;
  auto model = detail::greedy_model(plan, candidates, cell_size, criteria, lamps);
  const auto ncell = static_cast<std::ptrdiff_t>(model.cells.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t c = 0; c < ncell; ++c) {
    detail::fill_usable(plan, lamps, model, static_cast<std::size_t>(c),
                        static_cast<std::size_t>(c) + 1);
  }

  std::vector<std::uint8_t> selected(lamps.size(), 0);
  std::vector<std::uint8_t> covered(model.cells.size(), 0);
  std::vector<std::size_t> order;
  std::vector<detail::CandidateScore> scores(lamps.size());
  const auto ncand = static_cast<std::ptrdiff_t>(lamps.size());
  while (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < ncand; ++k) {
      scores[static_cast<std::size_t>(k)] =
          detail::score_candidate(model, static_cast<std::size_t>(k), method, selected, covered);
    }
    const long pick = detail::pick_candidate(scores, selected);
    if (pick < 0) break;
    const auto chosen = static_cast<std::size_t>(pick);
    selected[chosen] = 1;
    order.push_back(chosen);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t c = 0; c < ncell; ++c) {
      const auto idx = static_cast<std::size_t>(c);
      if (!covered[idx] && model.sees(idx, chosen)) {
        covered[idx] = detail::cell_covered(model, idx, method, selected) ? 1 : 0;
      }
    }
  }
  return detail::greedy_result(model, order, covered);
}

}  // namespace lightpos
