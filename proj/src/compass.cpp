#include "lightpos/compass.hpp"

#include <algorithm>
#include <cmath>

#include "lightpos/errors.hpp"
#include "lightpos/rng.hpp"

namespace lightpos {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix2d rot2(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

double wrap_two_pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

// Root of (r0 z0 / (s + r0))^2 + (z1 / (s + 1))^2 - 1 by bisection.
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

// Distance from (y0, y1) >= 0 to the axis-aligned ellipse with e0 >= e1 > 0.
double distance_first_quadrant(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = ellipse_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (sbar + r0);
      const double x1 = y1 / (sbar + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(1.0 - xde0 * xde0);
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

}  // namespace

AccelSample gravity_image(const Attitude& att) {
  const Vec3 g = attitude_to_rotation(att).transpose() * Vec3::UnitZ();
  return {g.x(), g.y(), g.z()};
}

std::pair<double, double> pitch_roll_from_accel(const AccelSample& a) {
  const double norm = std::sqrt(a.ax * a.ax + a.ay * a.ay + a.az * a.az);
  if (!(norm >= 0.8 && norm <= 1.2)) {
    throw InputError("accelerometer magnitude " + std::to_string(norm) +
                     " g outside the static gate [0.8, 1.2]");
  }
  const double pitch = std::asin(std::clamp(-a.ax / norm, -1.0, 1.0));
  const double roll = std::atan2(a.ay, a.az);
  return {pitch, roll};
}

EllipseFit fit_ellipse(std::span<const Eigen::Vector2d> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 6) throw InputError("ellipse fit needs at least six points");

  // Condition the problem: zero mean, unit RMS radius.
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& p : points) scale += (p - mean).squaredNorm();
  scale = std::sqrt(scale / static_cast<double>(n));
  if (!(scale > 0.0)) throw NumericalError("ellipse fit: coincident points");

  Eigen::MatrixXd quad(n, 3), lin(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d v = (points[i] - mean) / scale;
    quad.row(i) << v.x() * v.x(), v.x() * v.y(), v.y() * v.y();
    lin.row(i) << v.x(), v.y(), 1.0;
  }
  const Eigen::Matrix3d s1 = quad.transpose() * quad;
  const Eigen::Matrix3d s2 = quad.transpose() * lin;
  const Eigen::Matrix3d s3 = lin.transpose() * lin;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd3(s3);
  const Eigen::Vector3d sv = svd3.singularValues();
  if (!(sv[2] > 1e-10 * sv[0])) throw NumericalError("ellipse fit: rank-deficient (collinear) points");

  const Eigen::Matrix3d t = -s3.inverse() * s2.transpose();
  const Eigen::Matrix3d m = s1 + s2 * t;
  // Premultiply by the inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]].
  Eigen::Matrix3d mc;
  mc.row(0) = m.row(2) / 2.0;
  mc.row(1) = -m.row(1);
  mc.row(2) = m.row(0) / 2.0;

  Eigen::EigenSolver<Eigen::Matrix3d> es(mc);
  int chosen = -1;
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(es.eigenvalues()[i].imag()) > 1e-9 * (1.0 + std::abs(es.eigenvalues()[i].real()))) {
      continue;
    }
    const Eigen::Vector3d v = es.eigenvectors().col(i).real();
    const double cond = 4.0 * v[0] * v[2] - v[1] * v[1];
    if (cond > best) {
      best = cond;
      chosen = i;
    }
  }
  if (chosen < 0) throw NumericalError("ellipse fit: data admit only a non-elliptic conic");

  const Eigen::Vector3d a1 = es.eigenvectors().col(chosen).real();
  const Eigen::Vector3d a2 = t * a1;
  double ca = a1[0], cb = a1[1], cc = a1[2], cd = a2[0], ce = a2[1], cf = a2[2];

  Eigen::Matrix2d h;
  h << 2.0 * ca, cb, cb, 2.0 * cc;
  const Eigen::Vector2d center = h.fullPivLu().solve(Eigen::Vector2d(-cd, -ce));
  double f0 = cf + 0.5 * (cd * center.x() + ce * center.y());
  Eigen::Matrix2d q;
  q << ca, cb / 2.0, cb / 2.0, cc;
  if (f0 > 0.0) {
    q = -q;
    f0 = -f0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(q);
  const double l0 = qe.eigenvalues()[0];  // smallest -> major axis
  const double l1 = qe.eigenvalues()[1];
  if (!(l0 > 0.0) || !(f0 < 0.0)) throw NumericalError("ellipse fit: degenerate conic");

  EllipseFit out;
  auto& e = out.ellipse;
  e.p = std::sqrt(-f0 / l0) * scale;
  e.q = std::sqrt(-f0 / l1) * scale;
  const Eigen::Vector2d major = qe.eigenvectors().col(0);
  double tilt = std::atan2(major.y(), major.x());
  if (tilt <= -kPi / 2) tilt += kPi;
  if (tilt > kPi / 2) tilt -= kPi;
  e.tilt = (e.p - e.q) > 1e-12 * e.p ? tilt : 0.0;
  const Eigen::Vector2d c = mean + scale * center;
  e.cx = c.x();
  e.cy = c.y();

  double acc = 0.0;
  for (const auto& p : points) {
    const double dist = ellipse_distance(e, p);
    acc += dist * dist;
  }
  out.rms_orthogonal_residual = std::sqrt(acc / static_cast<double>(n));
  return out;
}

double ellipse_distance(const EllipseParams& e, const Eigen::Vector2d& point) {
  const Eigen::Vector2d local =
      rot2(-e.tilt) * (point - Eigen::Vector2d(e.cx, e.cy));
  const double y0 = std::abs(local.x());
  const double y1 = std::abs(local.y());
  if (e.p - e.q <= 1e-15 * e.p) return std::abs(std::hypot(y0, y1) - e.p);
  return distance_first_quadrant(e.p, e.q, y0, y1);
}

Eigen::Vector2d undistort(const EllipseParams& fit, const Eigen::Vector2d& raw) {
  const Eigen::Vector2d centered = raw - Eigen::Vector2d(fit.cx, fit.cy);
  Eigen::Vector2d v = rot2(-fit.tilt) * centered;
  v.x() /= fit.p;
  v.y() /= fit.q;
  return rot2(fit.tilt) * v;
}

std::vector<MagSample> apply_sensor_gains(std::span<const MagSample> raw,
                                          const std::array<double, kMagSensorCount>& gains) {
  std::vector<MagSample> out(raw.begin(), raw.end());
  for (auto& s : out) {
    if (s.sensor < 0 || s.sensor >= kMagSensorCount) throw InputError("sensor index out of range");
    const double g = gains[static_cast<std::size_t>(s.sensor)];
    s.mx *= g;
    s.my *= g;
    s.mz *= g;
  }
  return out;
}

double calibrate_heading(std::span<const MagSample> raw, const EllipseParams& fit,
                         double pitch, double roll) {
  if (raw.empty()) throw InputError("no magnetometer samples");
  if (!(fit.p > 0.0) || !(fit.q > 0.0)) throw InputError("invalid ellipse calibration");

  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& s : raw) {
    const Eigen::Vector2d corrected = undistort(fit, Eigen::Vector2d(s.mx, s.my));
    // Back into the body frame.
    const Eigen::Vector2d b = rot2(-kSensorSpacing * s.sensor) * corrected;
    const double bz = s.mz;
    const double xh = b.x() * std::cos(pitch) + b.y() * std::sin(roll) * std::sin(pitch) +
                      bz * std::cos(roll) * std::sin(pitch);
    const double yh = b.y() * std::cos(roll) - bz * std::sin(roll);
    const double mag = std::hypot(xh, yh);
    if (!(mag > 1e-9)) throw NumericalError("corrected horizontal field is nulled");
    sum += Eigen::Vector2d(xh, yh) / mag;
  }
  if (!(sum.norm() > 1e-9)) throw NumericalError("sensor headings cancel out");
  return wrap_two_pi(std::atan2(-sum.y(), sum.x()));
}

std::vector<MagSample> synth_distorted_samples(double true_heading,
                                               const EllipseParams& distortion,
                                               double noise_sd, std::uint64_t seed) {
  const Eigen::Matrix2d soft = rot2(distortion.tilt) *
                               Eigen::Vector2d(distortion.p, distortion.q).asDiagonal() *
                               rot2(-distortion.tilt);
  const Eigen::Vector2d hard(distortion.cx, distortion.cy);
  Rng rng(seed);
  std::vector<MagSample> out;
  out.reserve(kMagSensorCount);
  for (int i = 0; i < kMagSensorCount; ++i) {
    const double angle = -true_heading + kSensorSpacing * i;
    Eigen::Vector2d v = hard + soft * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    if (noise_sd > 0.0) {
      v.x() += rng.normal(0.0, noise_sd);
      v.y() += rng.normal(0.0, noise_sd);
    }
    out.push_back({v.x(), v.y(), 0.0, i});
  }
  return out;
}

}  // namespace lightpos
