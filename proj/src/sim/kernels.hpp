#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lightpos/rng.hpp"
#include "lightpos/sim.hpp"

namespace lightpos::detail {

inline std::uint64_t point_seed(std::uint64_t seed, std::uint64_t index) {
  return Rng::mix(seed ^ index);
}

inline Pose pose_at(const Scenario& scn, const Vec3& point) {
  Pose pose;
  pose.position = point;
  if (std::isnan(point.z())) pose.position.z() = scn.receiver.base_height;
  pose.attitude = scn.receiver.attitude;
  return pose;
}

/// (time, position) samples every dt along the polyline.
std::vector<std::pair<double, Vec3>> sample_path(const TrajectorySpec& traj);

struct SweepJob {
  std::size_t cell = 0;
  std::size_t point = 0;
  int trial = 0;
};

std::vector<SweepJob> sweep_jobs(std::size_t cells, std::size_t points, int trials);

Scenario sweep_scenario(const Scenario& scn, double epsilon, double heading_epsilon);

std::uint64_t sweep_seed(std::uint64_t seed, std::size_t point, int trial, int trials);

SensitivityTable assemble_sweep(std::span<const double> epsilons,
                                std::span<const double> heading_epsilons,
                                const std::vector<SweepJob>& jobs, const std::vector<Fix>& fixes);

StaticRun assemble_static(std::vector<Fix> fixes);

/// Cell x lamp usability and lamp-pair geometry for coverage predicates.
struct CoverageModel {
  std::vector<Vec3> cells;
  std::vector<Vec3> lamps;
  std::vector<std::uint8_t> usable;    // cells.size() x lamps.size(), row-major by cell
  std::vector<std::uint8_t> separated; // lamps x lamps
  CoverageCriteria criteria;

  bool sees(std::size_t cell, std::size_t lamp) const {
    return usable[cell * lamps.size() + lamp] != 0;
  }
  bool valid_triple(std::size_t a, std::size_t b, std::size_t c) const;
};

bool lamp_usable(const Floorplan& plan, const Vec3& cell, const LampModel& lamp);

/// Rows for cells [begin, end) of the usability matrix.
void fill_usable(const Floorplan& plan, const std::vector<LampModel>& lamps, CoverageModel& model,
                 std::size_t begin, std::size_t end);

void fill_separation(CoverageModel& model);

LampModel downward_lamp(const Vec3& position);

/// Whether `cell` is covered using only lamps flagged in `selected`.
bool cell_covered(const CoverageModel& model, std::size_t cell, CoverageMethod method,
                  const std::vector<std::uint8_t>& selected);

struct CandidateScore {
  std::size_t gain = 0;      // newly covered cells
  std::size_t progress = 0;  // uncovered cells it brings closer to coverage
};

CandidateScore score_candidate(const CoverageModel& model, std::size_t candidate,
                               CoverageMethod method, const std::vector<std::uint8_t>& selected,
                               const std::vector<std::uint8_t>& covered);

/// Cells, candidate lamps and separation; the usability matrix is allocated
/// but left for the caller to fill.
CoverageModel greedy_model(const Floorplan& plan, std::span<const Vec3> candidates,
                           double cell_size, const CoverageCriteria& criteria,
                           std::vector<LampModel>& lamps);

GreedyPlacement greedy_result(const CoverageModel& model, const std::vector<std::size_t>& order,
                              const std::vector<std::uint8_t>& covered);

/// Index of the best score, first in candidate order on ties; -1 if nothing improves.
long pick_candidate(const std::vector<CandidateScore>& scores,
                    const std::vector<std::uint8_t>& selected);

}  // namespace lightpos::detail
