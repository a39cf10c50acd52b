#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lightpos/geom.hpp"
#include "lightpos/rss.hpp"

namespace lightpos {

/// One extracted amplitude with its sensing plane in the lamp's solve frame.
///
/// Normals are oriented toward the lamp (n . X > 0 at the solution). `offset`
/// is the face center relative to the receiver reference point, also in the
/// solve frame; the closed form treats every face as passing through the
/// origin and ignores it.
struct Reading {
  PlaneCoeffs plane;
  double s = 0.0;
  int lamp_id = 0;
  int face_id = 0;
  Vec3 offset = Vec3::Zero();
};

enum class SolveStatus { unique, degenerate, no_converge };

const char* to_string(SolveStatus status);

struct SolveResult {
  Vec3 point = Vec3::Zero();
  double residual_rms = 0.0;
  SolveStatus status = SolveStatus::no_converge;
  int iterations = 0;
};

struct LampSighting {
  int lamp_id = 0;
  std::vector<Reading> readings;  // sorted by s, descending
};

struct SolverOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double initial_damping = 1e-3;
  double independence_tol = kIndependenceTolerance;
};

/// Readings under this fraction of a lamp's strongest reading are dropped.
inline constexpr double kRssFloorFraction = 0.01;

/// Model amplitude of a reading for a lamp at `x_solve` relative to the
/// receiver reference point (solve frame). Negative when the lamp lies behind
/// the oriented sensing plane.
double model_rss(const Reading& reading, const Vec3& x_solve, double k,
                 const EmissionProfile& profile);

/// Exact three-face solution. Dividing the model equations pairwise gives two
/// homogeneous linear equations whose common null direction fixes X up to
/// scale; the emission angle is then known and the range follows in closed
/// form. Returns status degenerate for linearly dependent planes and throws
/// NumericalError when the direction violates the z > 0 / facing-lamp domain.
SolveResult mflp_closed_form(const Reading& r1, const Reading& r2, const Reading& r3,
                             double k, const EmissionProfile& profile,
                             double independence_tol = kIndependenceTolerance);

/// Least-squares position of the lamp relative to the receiver (solve frame)
/// from >= 3 single-lamp readings, minimizing sum(((s_model - s) / s)^2) over
/// (x, y, log z). Seeded by the closed form on the strongest independent
/// triple unless `init` is given.
SolveResult mflp_least_squares(std::span<const Reading> readings, double k,
                               const EmissionProfile& profile,
                               std::optional<Vec3> init = std::nullopt,
                               const SolverOptions& options = {});

/// m = 3: the top three readings of the lamp with the greatest mean over its
/// top three. m > 3: the m strongest readings overall, at most three per lamp.
/// Applies the kRssFloorFraction inclusion floor first. Throws InputError when
/// no lamp keeps three readings.
std::vector<Reading> select_readings(std::span<const LampSighting> sightings, int m);

/// Joint least squares over the receiver's map-frame position. `lamps` is
/// indexed by Reading::lamp_id. With a single lamp this is exactly
/// mflp_least_squares followed by to_world_position.
SolveResult solve_multi(std::span<const Reading> readings, std::span<const LampModel> lamps,
                        const SolverOptions& options = {});

/// Receiver position in the map frame: lamp.position - B * x_solve, with B
/// the lamp's solve-frame basis.
Vec3 to_world_position(const LampModel& lamp, const Vec3& x_solve);

/// Single horizontal face seeing >= 3 downward lamps sharing k and profile.
/// `s[i]` is the reading for `lamp_positions[i]`. If `z_receiver` is given
/// only (x, y) are estimated. Collinear lamps give status degenerate.
SolveResult trilaterate(std::span<const Vec3> lamp_positions, double k,
                        const EmissionProfile& profile, std::span<const double> s,
                        std::optional<double> z_receiver = std::nullopt,
                        const SolverOptions& options = {});

}  // namespace lightpos
