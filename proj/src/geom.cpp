#include "lightpos/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lightpos/errors.hpp"

namespace lightpos {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_two_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod can return exactly 2pi after the correction for tiny negatives
  if (a >= kTwoPi) a = 0.0;
  return a;
}

}  // namespace

bool is_valid(const Attitude& att) {
  return std::isfinite(att.pitch) && std::isfinite(att.roll) &&
         std::isfinite(att.heading) && att.pitch >= -kPi / 2 &&
         att.pitch <= kPi / 2 && att.roll > -kPi && att.roll <= kPi &&
         att.heading >= 0.0 && att.heading < kTwoPi;
}

Attitude normalized(Attitude att) {
  att.pitch = std::clamp(att.pitch, -kPi / 2, kPi / 2);
  att.roll = wrap_two_pi(att.roll + kPi) - kPi;
  if (att.roll <= -kPi) att.roll = kPi;
  att.heading = wrap_two_pi(att.heading);
  return att;
}

Rotation3 attitude_to_rotation(const Attitude& att) {
  const Eigen::AngleAxisd yaw(att.heading, Vec3::UnitZ());
  const Eigen::AngleAxisd pitch(att.pitch, Vec3::UnitY());
  const Eigen::AngleAxisd roll(att.roll, Vec3::UnitX());
  return (yaw * pitch * roll).toRotationMatrix();
}

Attitude rotation_to_attitude(const Rotation3& r) {
  Attitude att;
  att.pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  att.roll = std::atan2(r(2, 1), r(2, 2));
  att.heading = wrap_two_pi(std::atan2(r(1, 0), r(0, 0)));
  return att;
}

const Rotation3& ned_flip() {
  static const Rotation3 flip = Vec3(1.0, -1.0, -1.0).asDiagonal();
  return flip;
}

Rotation3 mount_to_world(const Attitude& att) {
  return ned_flip() * attitude_to_rotation(att) * ned_flip();
}

PlaneCoeffs::PlaneCoeffs(const Vec3& normal) {
  const double n = normal.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InputError("plane normal must be a finite non-zero vector");
  }
  normal_ = normal / n;
}

bool Aabb::contains(const Vec3& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

double dodecahedron_inradius(double a) {
  return 0.5 * a * std::sqrt((25.0 + 11.0 * std::sqrt(5.0)) / 10.0);
}

Polyhedron half_dodecahedron(double edge_length) {
  if (!(edge_length > 0.0) || !std::isfinite(edge_length)) {
    throw InputError("edge length must be positive");
  }
  const double inradius = dodecahedron_inradius(edge_length);
  // Adjacent face normals differ by the supplement of the dihedral angle.
  const double polar = std::atan(2.0);

  Polyhedron poly;
  poly.edge_length = edge_length;
  poly.faces.reserve(6);
  poly.faces.push_back({Vec3::UnitZ(), inradius * Vec3::UnitZ()});
  for (int i = 0; i < 5; ++i) {
    const double az = i * 2.0 * kPi / 5.0;
    const Vec3 n(std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az),
                 std::cos(polar));
    poly.faces.push_back({n, inradius * n});
  }
  return poly;
}

std::vector<int> visible_faces(const Polyhedron& poly, const Vec3& dir) {
  if (!(dir.norm() > 0.0)) throw InputError("direction must be non-zero");
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(poly.faces.size()); ++i) {
    if (poly.faces[i].normal.dot(dir) > 0.0) out.push_back(i);
  }
  return out;
}

double tri_face_min_distance(double edge_length) {
  if (!(edge_length > 0.0)) throw InputError("edge length must be positive");
  const double s5 = std::sqrt(5.0);
  return (std::sqrt(1.0 + 0.4 * s5) + 0.5 * std::sqrt(2.5 + 1.1 * s5)) *
         edge_length;
}

bool linearly_independent(const PlaneCoeffs& p1, const PlaneCoeffs& p2,
                          const PlaneCoeffs& p3, double tol) {
  Eigen::Matrix3d m;
  m.row(0) = p1.normal();
  m.row(1) = p2.normal();
  m.row(2) = p3.normal();
  return std::abs(m.determinant()) > tol;
}

bool line_of_sight(const Vec3& p, const Vec3& q, std::span<const Aabb> obstacles) {
  const Vec3 d = q - p;
  for (const Aabb& box : obstacles) {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    bool miss = false;
    for (int axis = 0; axis < 3 && !miss; ++axis) {
      if (d[axis] == 0.0) {
        if (p[axis] < box.min[axis] || p[axis] > box.max[axis]) miss = true;
        continue;
      }
      double t0 = (box.min[axis] - p[axis]) / d[axis];
      double t1 = (box.max[axis] - p[axis]) / d[axis];
      if (t0 > t1) std::swap(t0, t1);
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
      if (t_enter > t_exit) miss = true;
    }
    if (miss) continue;
    // Overlap with the open parameter interval (0, 1).
    if (t_exit > 0.0 && t_enter < 1.0) return false;
  }
  return true;
}

Rotation3 solve_frame_basis(const Vec3& central_ray) {
  const double n = central_ray.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InputError("lamp central ray must be a finite non-zero vector");
  }
  const Vec3 z = -central_ray / n;
  Vec3 ref = Vec3::UnitX();
  if (std::abs(z.dot(ref)) > 0.9) ref = Vec3::UnitY();
  const Vec3 x = (ref - ref.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  Rotation3 basis;
  basis.col(0) = x;
  basis.col(1) = y;
  basis.col(2) = z;
  return basis;
}

PlaneCoeffs solve_frame_plane(const Vec3& face_normal_mount, const Attitude& att,
                              const Vec3& central_ray) {
  const Vec3 world = mount_to_world(att) * face_normal_mount;
  return PlaneCoeffs(solve_frame_basis(central_ray).transpose() * world);
}

}  // namespace lightpos
