#pragma once

#include <span>
#include <vector>

#include "lightpos/geom.hpp"

namespace lightpos {

/// Lamp emission profile f(omega), omega in radians from the central ray.
///
/// Construction checks on a 1024-point grid over [0, pi/2] that the profile
/// is positive at 0, non-negative, and strictly decreasing.
class EmissionProfile {
 public:
  enum class Kind { cosine_power, polynomial };

  static EmissionProfile cosine_power(double gamma);
  /// Coefficients c0..cn of c0 + c1*w + ... + cn*w^n.
  static EmissionProfile polynomial(std::vector<double> coefficients);

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double operator()(double omega) const;
  double derivative(double omega) const;

 private:
  EmissionProfile() = default;
  void validate() const;

  Kind kind_ = Kind::cosine_power;
  double gamma_ = 1.0;
  std::vector<double> coeffs_;
};

struct LampModel {
  Vec3 position = Vec3::Zero();
  Vec3 central_ray = -Vec3::UnitZ();
  double k = 1.0;
  EmissionProfile profile = EmissionProfile::cosine_power(1.0);
  double flash_hz = 65.0;
};

/// Plane form of the RSS model: k / d^3 * |n . (X_lamp - X_face)| * f(omega).
///
/// Invariant under negating the normal. Returns 0 at or behind the lamp's
/// pi/2 cone. Throws InputError for coincident positions.
double eval_rss(const LampModel& lamp, const Vec3& face_center,
                const Vec3& face_normal);

/// One-sided face response: as eval_rss, but 0 when the light reaches the
/// back of the face (n . (X_lamp - X_face) <= 0).
double eval_face_rss(const LampModel& lamp, const Vec3& face_center,
                     const Vec3& face_normal);

struct RssSample {
  Vec3 face_center = Vec3::Zero();
  Vec3 face_normal = Vec3::UnitZ();
  double s = 0.0;
};

struct LampPose {
  Vec3 position = Vec3::Zero();
  Vec3 central_ray = -Vec3::UnitZ();
};

struct LampFit {
  double k = 0.0;
  EmissionProfile profile = EmissionProfile::cosine_power(1.0);
  double rms_log_residual = 0.0;
};

/// Fits k and the profile parameters to samples of a lamp with known pose by
/// least squares on log s. For the polynomial kind c0 is fixed to 1 (k
/// absorbs it) and `degree` coefficients c1..cn are estimated; the
/// cosine-power kind estimates gamma and ignores `degree`.
LampFit fit_lamp_model(std::span<const RssSample> samples, const LampPose& pose,
                       EmissionProfile::Kind kind, int degree = 1);

}  // namespace lightpos
