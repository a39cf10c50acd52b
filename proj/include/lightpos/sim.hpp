#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lightpos/geom.hpp"
#include "lightpos/rss.hpp"
#include "lightpos/signal.hpp"
#include "lightpos/solve.hpp"

namespace lightpos {

/// Fundamental amplitude of a 0/peak, 50% duty on/off-keyed square wave.
inline constexpr double kOokFundamental = 2.0 * std::numbers::inv_pi;

struct NoiseSpec {
  double rss_epsilon = 0.0;      // multiplicative (1 +/- eps), random sign, in [0, 0.2]
  double heading_epsilon = 0.0;  // radians, additive, uniform in [-eps_h, eps_h]
  double accel_sd = 0.0;         // g, per axis
  double trace_noise_sd = 0.0;   // sensor units, per sample (end-to-end mode)
  std::uint64_t seed = 1;
};

struct ReceiverSpec {
  Polyhedron body = half_dodecahedron(0.02);
  double base_height = 0.0;  // default z of the polyhedron center
  Attitude attitude;         // true attitude
};

struct SignalSpec {
  double rate_hz = kDefaultSampleRateHz;
  double window_s = kDefaultWindowSeconds;
  double ambient = 0.0;  // dc background, sensor units
};

inline constexpr double kDefaultSaturation = 1000.0;

struct TrajectorySpec {
  std::vector<Vec3> waypoints;
  double speed = 0.5;  // m/s
  double dt = 0.3;     // s between fixes
  double dwell = 0.0;  // s, duration when there is a single waypoint
};

struct Scenario {
  Aabb bounds;
  std::vector<Aabb> obstacles;
  std::vector<LampModel> lamps;
  ReceiverSpec receiver;
  NoiseSpec noise;
  double saturation = kDefaultSaturation;
  SignalSpec signal;
  std::vector<Vec3> points;
  std::optional<TrajectorySpec> trajectory;
};

/// Throws InputError on violated scenario invariants (lamps outside bounds,
/// duplicate or unresolvable flash frequencies, noise out of range).
void validate(const Scenario& scn);

struct Pose {
  Vec3 position = Vec3::Zero();
  Attitude attitude;
};

enum class MeasureMode { fast, end_to_end };

struct Measurement {
  int lamp_id = 0;
  int face_id = 0;
  double s = 0.0;        // extracted amplitude including noise
  double model_s = 0.0;  // noise-free fundamental amplitude
  bool saturated = false;
  Reading reading;       // plane and offset from the measured attitude
};

struct MeasurementSet {
  Attitude measured_attitude;
  std::vector<Measurement> entries;  // lamp-major, face-minor
};

/// Forward simulation of every (lamp, face) amplitude at a pose.
/// Deterministic in `seed`. Throws InputError when the pose is out of bounds.
MeasurementSet measure(const Scenario& scn, const Pose& pose, MeasureMode mode,
                       std::uint64_t seed);

/// Lamp models as seen by the solver: k scaled by the OOK fundamental factor.
std::vector<LampModel> solver_lamps(const Scenario& scn);

/// Positive, unsaturated entries grouped per lamp.
std::vector<LampSighting> sightings(const MeasurementSet& ms);

enum class PipelineKind { mflp, trilateration, multi };

struct Pipeline {
  PipelineKind kind = PipelineKind::mflp;
  int m = 3;  // readings for the multi pipeline
};

enum class FixOutcome { ok, no_coverage, degenerate, no_converge };

const char* to_string(FixOutcome outcome);

struct Fix {
  Vec3 truth = Vec3::Zero();
  Vec3 estimate = Vec3::Zero();
  double error = 0.0;
  FixOutcome outcome = FixOutcome::no_coverage;
};

/// One measure -> select -> solve -> map-frame pass at a pose.
Fix locate(const Scenario& scn, const Pose& pose, const Pipeline& pipeline, MeasureMode mode,
           std::uint64_t seed);

struct ErrorStats {
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double stdev = 0.0;  // sample standard deviation
};

ErrorStats compute_stats(std::span<const double> errors);

struct StaticRun {
  std::vector<Fix> fixes;
  ErrorStats stats;         // over fixes with outcome ok
  std::size_t failures = 0; // fixes with any other outcome
};

/// Per point i the noise stream is seeded with scn.noise.seed ^ i, so results
/// do not depend on thread count. Points are receiver centers; a point with
/// NaN z takes the receiver base height.
StaticRun run_static(const Scenario& scn, std::span<const Vec3> points, const Pipeline& pipeline,
                     MeasureMode mode = MeasureMode::fast);
/// Single-threaded reference for run_static.
StaticRun run_static_serial(const Scenario& scn, std::span<const Vec3> points,
                            const Pipeline& pipeline, MeasureMode mode = MeasureMode::fast);

struct TrackFix {
  double time = 0.0;
  Fix fix;
};

/// Samples the piecewise-linear path every dt seconds at constant speed and
/// runs the static pipeline at each pose.
std::vector<TrackFix> run_trajectory(const Scenario& scn, const TrajectorySpec& traj,
                                     const Pipeline& pipeline,
                                     MeasureMode mode = MeasureMode::fast);
std::vector<TrackFix> run_trajectory_serial(const Scenario& scn, const TrajectorySpec& traj,
                                            const Pipeline& pipeline,
                                            MeasureMode mode = MeasureMode::fast);

/// Horizontal distance from a point to the waypoint polyline.
double lateral_deviation(std::span<const Vec3> waypoints, const Vec3& p);

/// Mean distance of fixes from their centroid. Throws InputError for < 2 fixes.
double oscillation_distance(std::span<const Vec3> fixes);

struct SensitivityCell {
  double rss_epsilon = 0.0;
  double heading_epsilon = 0.0;
  ErrorStats stats;
  std::size_t failures = 0;
};

struct SensitivityTable {
  std::vector<SensitivityCell> cells;  // epsilon-major, heading-minor
  bool mean_nondecreasing_in_epsilon = true;
};

/// Full factorial sweep. Trial t at point i uses the same noise stream in every
/// cell (common random numbers), so cells differ only in perturbation size.
SensitivityTable sensitivity_sweep(const Scenario& scn, std::span<const Vec3> points,
                                   std::span<const double> epsilons,
                                   std::span<const double> heading_epsilons, int trials,
                                   const Pipeline& pipeline = {},
                                   MeasureMode mode = MeasureMode::fast);
SensitivityTable sensitivity_sweep_serial(const Scenario& scn, std::span<const Vec3> points,
                                          std::span<const double> epsilons,
                                          std::span<const double> heading_epsilons, int trials,
                                          const Pipeline& pipeline = {},
                                          MeasureMode mode = MeasureMode::fast);

// ---- deployment coverage ---------------------------------------------------

enum class CoverageMethod { mflp, trilateration };

const char* to_string(CoverageMethod method);

struct Floorplan {
  Aabb bounds;
  std::vector<Aabb> obstacles;
  double receiver_height = 0.0;
};

struct CoverageCriteria {
  double min_separation = 1.0;      // m, between any two lamps of a triple
  double min_triangle_area = 0.5;   // m^2, horizontal projection
};

inline constexpr double kDefaultCellSize = 0.3;

struct CoverageReport {
  CoverageMethod method = CoverageMethod::mflp;
  double covered_fraction = 0.0;
  std::size_t cell_count = 0;
  std::vector<Vec3> uncovered;  // cell centers
  std::size_t lamp_count = 0;
};

/// Cell centers at receiver height on a grid over the bounds, skipping cells
/// inside obstacles.
std::vector<Vec3> coverage_cells(const Floorplan& plan, double cell_size);

/// MFLP needs one lamp in line of sight and inside its emission half-space;
/// trilateration needs three such lamps that are pairwise separated and span
/// a large enough triangle.
CoverageReport coverage_analysis(const Floorplan& plan, std::span<const LampModel> lamps,
                                 CoverageMethod method, double cell_size = kDefaultCellSize,
                                 const CoverageCriteria& criteria = {});

struct GreedyPlacement {
  std::size_t count = 0;
  std::vector<Vec3> placement;
  bool full_coverage = false;
  std::size_t uncovered_cells = 0;  // shortfall when coverage is unattainable
};

/// Greedy max-coverage selection of downward lamps from `candidates` until
/// every cell is covered or no candidate improves coverage. Ties are broken by
/// candidate order. For trilateration, candidates that complete no new cell
/// are ranked by how many cells they bring closer to three usable lamps.
GreedyPlacement greedy_min_lamps(const Floorplan& plan, std::span<const Vec3> candidates,
                                 CoverageMethod method, double cell_size = kDefaultCellSize,
                                 const CoverageCriteria& criteria = {});
GreedyPlacement greedy_min_lamps_serial(const Floorplan& plan, std::span<const Vec3> candidates,
                                        CoverageMethod method,
                                        double cell_size = kDefaultCellSize,
                                        const CoverageCriteria& criteria = {});

/// Candidate lamp positions on a regular grid at `height`, skipping obstacles.
std::vector<Vec3> candidate_grid(const Floorplan& plan, double spacing, double height);

}  // namespace lightpos
