#include "kernels.hpp"

namespace lightpos {

StaticRun run_static_serial(const Scenario& scn, std::span<const Vec3> points,
                            const Pipeline& pipeline, MeasureMode mode) {
  std::vector<Fix> fixes;
  fixes.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    fixes.push_back(locate(scn, detail::pose_at(scn, points[i]), pipeline, mode,
                           detail::point_seed(scn.noise.seed, i)));
  }
  return detail::assemble_static(std::move(fixes));
}

std::vector<TrackFix> run_trajectory_serial(const Scenario& scn, const TrajectorySpec& traj,
                                            const Pipeline& pipeline, MeasureMode mode) {
  const auto samples = detail::sample_path(traj);
  std::vector<TrackFix> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.push_back({samples[i].first,
                   locate(scn, detail::pose_at(scn, samples[i].second), pipeline, mode,
                          detail::point_seed(scn.noise.seed, i))});
  }
  return out;
}

SensitivityTable sensitivity_sweep_serial(const Scenario& scn, std::span<const Vec3> points,
                                          std::span<const double> epsilons,
                                          std::span<const double> heading_epsilons, int trials,
                                          const Pipeline& pipeline, MeasureMode mode) {
  std::vector<Scenario> cells;
  for (double e : epsilons) {
    for (double h : heading_epsilons) cells.push_back(detail::sweep_scenario(scn, e, h));
  }
  const auto jobs = detail::sweep_jobs(cells.size(), points.size(), trials);
  std::vector<Fix> fixes;
  fixes.reserve(jobs.size());
  for (const auto& job : jobs) {
    fixes.push_back(locate(cells[job.cell], detail::pose_at(scn, points[job.point]), pipeline,
                           mode, detail::sweep_seed(scn.noise.seed, job.point, job.trial, trials)));
  }
  return detail::assemble_sweep(epsilons, heading_epsilons, jobs, fixes);
}

GreedyPlacement greedy_min_lamps_serial(const Floorplan& plan, std::span<const Vec3> candidates,
                                        CoverageMethod method, double cell_size,
                                        const CoverageCriteria& criteria) {
  std::vector<LampModel> lamps;
  auto model = detail::greedy_model(plan, candidates, cell_size, criteria, lamps);
  detail::fill_usable(plan, lamps, model, 0, model.cells.size());

  std::vector<std::uint8_t> selected(lamps.size(), 0);
  std::vector<std::uint8_t> covered(model.cells.size(), 0);
  std::vector<std::size_t> order;
  while (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    std::vector<detail::CandidateScore> scores;
    for (std::size_t k = 0; k < lamps.size(); ++k) {
      scores.push_back(detail::score_candidate(model, k, method, selected, covered));
    }
    const long pick = detail::pick_candidate(scores, selected);
    if (pick < 0) break;
    selected[static_cast<std::size_t>(pick)] = 1;
    order.push_back(static_cast<std::size_t>(pick));
    for (std::size_t c = 0; c < model.cells.size(); ++c) {
      if (!covered[c]) covered[c] = detail::cell_covered(model, c, method, selected) ? 1 : 0;
    }
  }
  return detail::greedy_result(model, order, covered);
}

}  // namespace lightpos
