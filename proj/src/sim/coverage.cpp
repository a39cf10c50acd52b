#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "lightpos/errors.hpp"

namespace lightpos {

const char* to_string(CoverageMethod method) {
  return method == CoverageMethod::mflp ? "mflp" : "trilateration";
}

namespace {

std::size_t steps(double extent, double cell) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(extent / cell - 1e-9)));
}

bool inside_obstacle(const Floorplan& plan, const Vec3& p) {
  return std::any_of(plan.obstacles.begin(), plan.obstacles.end(),
                     [&](const Aabb& box) { return box.contains(p); });
}

}  // namespace

std::vector<Vec3> coverage_cells(const Floorplan& plan, double cell_size) {
  if (!(cell_size > 0.0)) throw InputError("cell size must be positive");
  const Vec3 extent = plan.bounds.max - plan.bounds.min;
  const std::size_t nx = steps(extent.x(), cell_size);
  const std::size_t ny = steps(extent.y(), cell_size);
  const double dx = extent.x() / static_cast<double>(nx);
  const double dy = extent.y() / static_cast<double>(ny);
  std::vector<Vec3> cells;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const Vec3 c(plan.bounds.min.x() + (static_cast<double>(i) + 0.5) * dx,
                   plan.bounds.min.y() + (static_cast<double>(j) + 0.5) * dy,
                   plan.receiver_height);
      if (!inside_obstacle(plan, c)) cells.push_back(c);
    }
  }
  return cells;
}

std::vector<Vec3> candidate_grid(const Floorplan& plan, double spacing, double height) {
  if (!(spacing > 0.0)) throw InputError("candidate spacing must be positive");
  std::vector<Vec3> out;
  const auto nx = static_cast<std::size_t>(
      std::floor((plan.bounds.max.x() - plan.bounds.min.x()) / spacing + 1e-9));
  const auto ny = static_cast<std::size_t>(
      std::floor((plan.bounds.max.y() - plan.bounds.min.y()) / spacing + 1e-9));
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      const Vec3 p(plan.bounds.min.x() + static_cast<double>(i) * spacing,
                   plan.bounds.min.y() + static_cast<double>(j) * spacing, height);
      if (!inside_obstacle(plan, p)) out.push_back(p);
    }
  }
  return out;
}

CoverageReport coverage_analysis(const Floorplan& plan, std::span<const LampModel> lamps,
                                 CoverageMethod method, double cell_size,
                                 const CoverageCriteria& criteria) {
  detail::CoverageModel model;
  model.criteria = criteria;
  model.cells = coverage_cells(plan, cell_size);
  const std::vector<LampModel> lamp_list(lamps.begin(), lamps.end());
  for (const auto& l : lamp_list) model.lamps.push_back(l.position);
  model.usable.assign(model.cells.size() * lamp_list.size(), 0);
  detail::fill_usable(plan, lamp_list, model, 0, model.cells.size());
  detail::fill_separation(model);

  CoverageReport report;
  report.method = method;
  report.cell_count = model.cells.size();
  report.lamp_count = lamp_list.size();
  const std::vector<std::uint8_t> all(lamp_list.size(), 1);
  std::size_t covered = 0;
  for (std::size_t c = 0; c < model.cells.size(); ++c) {
    if (detail::cell_covered(model, c, method, all)) {
      ++covered;
    } else {
      report.uncovered.push_back(model.cells[c]);
    }
  }
  report.covered_fraction =
      model.cells.empty() ? 1.0
                          : static_cast<double>(covered) / static_cast<double>(model.cells.size());
  return report;
}

}  // namespace lightpos
