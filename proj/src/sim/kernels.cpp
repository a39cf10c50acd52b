#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lightpos/errors.hpp"

namespace lightpos::detail {

std::vector<std::pair<double, Vec3>> sample_path(const TrajectorySpec& traj) {
  if (traj.waypoints.empty()) throw InputError("trajectory: no waypoints");
  if (!(traj.dt > 0.0)) throw InputError("trajectory.dt: must be positive");
  std::vector<std::pair<double, Vec3>> out;
  if (traj.waypoints.size() == 1) {
    const auto n = static_cast<std::size_t>(std::floor(traj.dwell / traj.dt + 1e-9));
    for (std::size_t i = 0; i < n; ++i) {
      out.emplace_back(static_cast<double>(i) * traj.dt, traj.waypoints[0]);
    }
    return out;
  }
  if (!(traj.speed > 0.0)) throw InputError("trajectory.speed: must be positive");
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < traj.waypoints.size(); ++i) {
    // Waypoints without z ride at the receiver height, so they have no vertical span.
    const Vec3 step = (traj.waypoints[i] - traj.waypoints[i - 1]).unaryExpr(
        [](double v) { return std::isnan(v) ? 0.0 : v; });
    cumulative.push_back(cumulative.back() + step.norm());
  }
  const double total_time = cumulative.back() / traj.speed;
  const auto n = static_cast<std::size_t>(std::floor(total_time / traj.dt + 1e-9)) + 1;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * traj.dt;
    const double s = std::min(t * traj.speed, cumulative.back());
    while (seg + 2 < cumulative.size() && s > cumulative[seg + 1]) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double u = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
    out.emplace_back(t, traj.waypoints[seg] + u * (traj.waypoints[seg + 1] - traj.waypoints[seg]));
  }
  return out;
}

std::vector<SweepJob> sweep_jobs(std::size_t cells, std::size_t points, int trials) {
  std::vector<SweepJob> jobs;
  jobs.reserve(cells * points * static_cast<std::size_t>(std::max(trials, 0)));
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t p = 0; p < points; ++p) {
      for (int t = 0; t < trials; ++t) jobs.push_back({c, p, t});
    }
  }
  return jobs;
}

Scenario sweep_scenario(const Scenario& scn, double epsilon, double heading_epsilon) {
  Scenario out = scn;
  out.noise.rss_epsilon = epsilon;
  out.noise.heading_epsilon = heading_epsilon;
  return out;
}

std::uint64_t sweep_seed(std::uint64_t seed, std::size_t point, int trial, int trials) {
  return point_seed(seed, point * static_cast<std::uint64_t>(trials) +
                              static_cast<std::uint64_t>(trial));
}

SensitivityTable assemble_sweep(std::span<const double> epsilons,
                                std::span<const double> heading_epsilons,
                                const std::vector<SweepJob>& jobs, const std::vector<Fix>& fixes) {
  SensitivityTable table;
  const std::size_t nh = heading_epsilons.size();
  const std::size_t ncell = epsilons.size() * nh;
  std::vector<std::vector<double>> errors(ncell);
  std::vector<std::size_t> failures(ncell, 0);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (fixes[j].outcome == FixOutcome::ok) {
      errors[jobs[j].cell].push_back(fixes[j].error);
    } else {
      ++failures[jobs[j].cell];
    }
  }
  for (std::size_t c = 0; c < ncell; ++c) {
    SensitivityCell cell;
    cell.rss_epsilon = epsilons[c / nh];
    cell.heading_epsilon = heading_epsilons[c % nh];
    cell.stats = compute_stats(errors[c]);
    cell.failures = failures[c];
    table.cells.push_back(cell);
  }
  std::vector<std::size_t> order(epsilons.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return epsilons[a] < epsilons[b]; });
  for (std::size_t h = 0; h < nh; ++h) {
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (table.cells[order[i] * nh + h].stats.mean < table.cells[order[i - 1] * nh + h].stats.mean) {
        table.mean_nondecreasing_in_epsilon = false;
      }
    }
  }
  return table;
}

StaticRun assemble_static(std::vector<Fix> fixes) {
  StaticRun run;
  std::vector<double> errors;
  for (const auto& f : fixes) {
    if (f.outcome == FixOutcome::ok) {
      errors.push_back(f.error);
    } else {
      ++run.failures;
    }
  }
  run.stats = compute_stats(errors);
  run.fixes = std::move(fixes);
  return run;
}

bool CoverageModel::valid_triple(std::size_t a, std::size_t b, std::size_t c) const {
  const std::size_t n = lamps.size();
  if (!separated[a * n + b] || !separated[a * n + c] || !separated[b * n + c]) return false;
  const Eigen::Vector2d ab = lamps[b].head<2>() - lamps[a].head<2>();
  const Eigen::Vector2d ac = lamps[c].head<2>() - lamps[a].head<2>();
  const double area = 0.5 * std::abs(ab.x() * ac.y() - ab.y() * ac.x());
  return area >= criteria.min_triangle_area;
}

bool lamp_usable(const Floorplan& plan, const Vec3& cell, const LampModel& lamp) {
  if (!(lamp.position.z() > cell.z())) return false;
  if (!((cell - lamp.position).dot(lamp.central_ray) > 0.0)) return false;
  return line_of_sight(cell, lamp.position, plan.obstacles);
}

void fill_usable(const Floorplan& plan, const std::vector<LampModel>& lamps, CoverageModel& model,
                 std::size_t begin, std::size_t end) {
  const std::size_t n = lamps.size();
  for (std::size_t c = begin; c < end; ++c) {
    for (std::size_t l = 0; l < n; ++l) {
      model.usable[c * n + l] = lamp_usable(plan, model.cells[c], lamps[l]) ? 1 : 0;
    }
  }
}

void fill_separation(CoverageModel& model) {
  const std::size_t n = model.lamps.size();
  model.separated.assign(n * n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      model.separated[a * n + b] =
          (model.lamps[a] - model.lamps[b]).norm() >= model.criteria.min_separation ? 1 : 0;
    }
  }
}

LampModel downward_lamp(const Vec3& position) {
  LampModel lamp;
  lamp.position = position;
  lamp.central_ray = -Vec3::UnitZ();
  return lamp;
}

namespace {

std::vector<std::size_t> selected_at(const CoverageModel& model, std::size_t cell,
                                     const std::vector<std::uint8_t>& selected) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < model.lamps.size(); ++l) {
    if (selected[l] && model.sees(cell, l)) out.push_back(l);
  }
  return out;
}

}  // namespace

bool cell_covered(const CoverageModel& model, std::size_t cell, CoverageMethod method,
                  const std::vector<std::uint8_t>& selected) {
  const auto seen = selected_at(model, cell, selected);
  if (method == CoverageMethod::mflp) return !seen.empty();
  for (std::size_t i = 0; i < seen.size(); ++i) {
    for (std::size_t j = i + 1; j < seen.size(); ++j) {
      for (std::size_t k = j + 1; k < seen.size(); ++k) {
        if (model.valid_triple(seen[i], seen[j], seen[k])) return true;
      }
    }
  }
  return false;
}

CandidateScore score_candidate(const CoverageModel& model, std::size_t candidate,
                               CoverageMethod method, const std::vector<std::uint8_t>& selected,
                               const std::vector<std::uint8_t>& covered) {
  CandidateScore score;
  if (selected[candidate]) return score;
  const std::size_t n = model.lamps.size();
  for (std::size_t c = 0; c < model.cells.size(); ++c) {
    if (covered[c] || !model.sees(c, candidate)) continue;
    if (method == CoverageMethod::mflp) {
      ++score.gain;
      continue;
    }
    const auto seen = selected_at(model, c, selected);
    bool compatible = true;
    for (std::size_t l : seen) compatible = compatible && model.separated[candidate * n + l];
    bool completes = false;
    for (std::size_t i = 0; i < seen.size() && !completes; ++i) {
      for (std::size_t j = i + 1; j < seen.size() && !completes; ++j) {
        completes = model.valid_triple(seen[i], seen[j], candidate);
      }
    }
    if (completes) {
      ++score.gain;
    } else if (compatible) {
      ++score.progress;
    }
  }
  return score;
}

CoverageModel greedy_model(const Floorplan& plan, std::span<const Vec3> candidates,
                           double cell_size, const CoverageCriteria& criteria,
                           std::vector<LampModel>& lamps) {
  if (candidates.empty()) throw InputError("candidate grid is empty");
  CoverageModel model;
  model.criteria = criteria;
  model.cells = coverage_cells(plan, cell_size);
  lamps.clear();
  for (const auto& p : candidates) {
    lamps.push_back(downward_lamp(p));
    model.lamps.push_back(p);
  }
  model.usable.assign(model.cells.size() * lamps.size(), 0);
  fill_separation(model);
  return model;
}

GreedyPlacement greedy_result(const CoverageModel& model, const std::vector<std::size_t>& order,
                              const std::vector<std::uint8_t>& covered) {
  GreedyPlacement out;
  out.count = order.size();
  for (std::size_t i : order) out.placement.push_back(model.lamps[i]);
  out.uncovered_cells = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 0));
  out.full_coverage = out.uncovered_cells == 0;
  return out;
}

long pick_candidate(const std::vector<CandidateScore>& scores,
                    const std::vector<std::uint8_t>& selected) {
  long best = -1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (selected[i]) continue;
    const auto& s = scores[i];
    if (s.gain == 0 && s.progress == 0) continue;
    if (best < 0) {
      best = static_cast<long>(i);
      continue;
    }
    const auto& b = scores[static_cast<std::size_t>(best)];
    if (s.gain > b.gain || (s.gain == b.gain && s.progress > b.progress)) {
      best = static_cast<long>(i);
    }
  }
  return best;
}

}  // namespace lightpos::detail
