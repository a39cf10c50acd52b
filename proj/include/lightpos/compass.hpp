#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lightpos/geom.hpp"

namespace lightpos {

/// Accelerometer reading in g, body frame (forward/right/down).
struct AccelSample {
  double ax = 0.0;
  double ay = 0.0;
  double az = 1.0;
};

/// Reading of one sensor on the circular magnetometer ring.
///
/// (mx, my) are in the sensor's own horizontal frame; sensor i is mounted
/// rotated by i * 60 degrees, so a body-frame vector at angle b reads at
/// angle b + i * 60 degrees. mz is the body-down component, only used for
/// tilt compensation.
struct MagSample {
  double mx = 0.0;
  double my = 0.0;
  double mz = 0.0;
  int sensor = 0;
};

inline constexpr int kMagSensorCount = 6;
inline constexpr double kSensorSpacing = 2.0 * std::numbers::pi / kMagSensorCount;

/// Ellipse with center (cx, cy), semi-axes p >= q > 0, major axis at angle tilt.
///
/// As a forward distortion it maps the unit reference circle through
/// v -> center + R(tilt) diag(p, q) R(-tilt) v (hard iron plus symmetric soft
/// iron).
struct EllipseParams {
  double cx = 0.0;
  double cy = 0.0;
  double p = 1.0;
  double q = 1.0;
  double tilt = 0.0;
};

struct EllipseFit {
  EllipseParams ellipse;
  double rms_orthogonal_residual = 0.0;
};

/// Gravity direction in the body frame for an attitude (1 g, level -> (0,0,1)).
AccelSample gravity_image(const Attitude& att);

/// pitch = asin(-ax/|a|), roll = atan2(ay, az). Throws InputError when
/// |a| is outside [0.8, 1.2] g (receiver not static).
std::pair<double, double> pitch_roll_from_accel(const AccelSample& a);

/// Direct least-squares ellipse fit (ellipse-specific constraint
/// 4AC - B^2 = 1, numerically stable partitioned form) on >= 6 points.
/// Throws NumericalError on rank deficiency or when no ellipse solution exists.
EllipseFit fit_ellipse(std::span<const Eigen::Vector2d> points);

/// Euclidean distance from a point to the ellipse curve.
double ellipse_distance(const EllipseParams& e, const Eigen::Vector2d& point);

/// Maps a distorted reading back to the reference circle.
Eigen::Vector2d undistort(const EllipseParams& fit, const Eigen::Vector2d& raw);

/// Multiplies each sample by its sensor's gain (individual calibration).
std::vector<MagSample> apply_sensor_gains(std::span<const MagSample> raw,
                                          const std::array<double, kMagSensorCount>& gains);

/// Heading in [0, 2pi): undistorts every sample, removes its sensor's mounting
/// angle, tilt-compensates with pitch/roll and averages on the unit circle.
double calibrate_heading(std::span<const MagSample> raw, const EllipseParams& fit,
                         double pitch = 0.0, double roll = 0.0);

/// Six ring readings of a level receiver at `true_heading`, pushed through the
/// distortion map plus per-axis Gaussian noise. Deterministic per seed.
std::vector<MagSample> synth_distorted_samples(double true_heading,
                                               const EllipseParams& distortion,
                                               double noise_sd, std::uint64_t seed);

}  // namespace lightpos
