#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lightpos {

using Vec3 = Eigen::Vector3d;
using Rotation3 = Eigen::Matrix3d;

/// Aircraft attitude angles in radians.
///
/// Body axes are forward/right/down and the reference frame is
/// north/east/down. Valid ranges: pitch in [-pi/2, pi/2], roll in (-pi, pi],
/// heading in [0, 2pi).
struct Attitude {
  double pitch = 0.0;
  double roll = 0.0;
  double heading = 0.0;
};

bool is_valid(const Attitude& att);

/// Wraps heading into [0, 2pi) and roll into (-pi, pi]; pitch is clamped.
Attitude normalized(Attitude att);

/// Body (forward/right/down) to NED rotation, composed heading, then pitch,
/// then roll (Z-Y-X intrinsic).
Rotation3 attitude_to_rotation(const Attitude& att);

/// Inverse of attitude_to_rotation away from gimbal lock.
Attitude rotation_to_attitude(const Rotation3& r);

/// The fixed flip diag(1, -1, -1) between NED and the z-up map frame
/// (north/west/up). The same flip relates the body frame to the z-up
/// receiver-mount frame (forward/left/up) in which polyhedron faces are given.
const Rotation3& ned_flip();

/// Receiver-mount (z-up) to map (z-up) rotation for an attitude.
Rotation3 mount_to_world(const Attitude& att);

/// Unit-normalized sensing-plane coefficients (A, B, C) of Ax + By + Cz = 0.
class PlaneCoeffs {
 public:
  PlaneCoeffs() = default;
  /// Normalizes; throws InputError on a zero or non-finite vector.
  explicit PlaneCoeffs(const Vec3& normal);
  PlaneCoeffs(double a, double b, double c) : PlaneCoeffs(Vec3(a, b, c)) {}

  const Vec3& normal() const { return normal_; }
  double a() const { return normal_.x(); }
  double b() const { return normal_.y(); }
  double c() const { return normal_.z(); }

 private:
  Vec3 normal_ = Vec3::UnitZ();
};

struct Face {
  Vec3 normal;    // outward, unit, receiver-mount frame
  Vec3 centroid;  // offset from the polyhedron center
};

struct Polyhedron {
  double edge_length = 0.0;
  std::vector<Face> faces;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const;
};

/// Inradius of a regular dodecahedron with edge length `a`.
double dodecahedron_inradius(double a);

/// Top face plus the upper ring of five faces of a regular dodecahedron
/// resting on a face. Face 0 is the top face.
Polyhedron half_dodecahedron(double edge_length);

/// Faces whose outward normal has a strictly positive dot product with `dir`.
std::vector<int> visible_faces(const Polyhedron& poly, const Vec3& dir);

/// Distance beyond which at least three faces of a regular dodecahedron see
/// any point, approximately 2.49 * edge_length.
double tri_face_min_distance(double edge_length);

inline constexpr double kIndependenceTolerance = 1e-6;

bool linearly_independent(const PlaneCoeffs& p1, const PlaneCoeffs& p2,
                          const PlaneCoeffs& p3,
                          double tol = kIndependenceTolerance);

/// True iff the open segment pq meets no obstacle (closed boxes).
bool line_of_sight(const Vec3& p, const Vec3& q, std::span<const Aabb> obstacles);

/// Columns are the lamp-aligned solve-frame axes expressed in the map frame.
/// The solve +z axis opposes the lamp's central ray; for a downward lamp the
/// basis is the identity.
Rotation3 solve_frame_basis(const Vec3& central_ray);

/// Expresses a receiver-mount face normal in the solve frame of a lamp.
PlaneCoeffs solve_frame_plane(const Vec3& face_normal_mount, const Attitude& att,
                              const Vec3& central_ray);

}  // namespace lightpos
