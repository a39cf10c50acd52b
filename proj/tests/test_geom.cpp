#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lightpos/errors.hpp"
#include "lightpos/geom.hpp"
#include "lightpos/rng.hpp"

using namespace lightpos;

namespace {

constexpr double kPi = std::numbers::pi;

Attitude random_attitude(Rng& rng, double pitch_margin = 0.01) {
  return {rng.uniform(-kPi / 2 + pitch_margin, kPi / 2 - pitch_margin), rng.uniform(-kPi, kPi),
          rng.uniform(0.0, 2 * kPi)};
}

Vec3 random_unit(Rng& rng) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  return v.normalized();
}

double angle_diff(double a, double b) {
  return std::abs(std::remainder(a - b, 2 * kPi));
}

}  // namespace

TEST_CASE("zero attitude is the identity rotation") {
  CHECK(attitude_to_rotation({}).isApprox(Rotation3::Identity(), 1e-15));
}

TEST_CASE("heading of a quarter turn points the nose east") {
  const Vec3 x = attitude_to_rotation({0, 0, kPi / 2}) * Vec3::UnitX();
  CHECK((x - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("pitch of a quarter turn points the nose straight up") {
  const Vec3 x = attitude_to_rotation({kPi / 2, 0, 0}) * Vec3::UnitX();
  CHECK((x - Vec3(0, 0, -1)).norm() < 1e-12);
}

TEST_CASE("rotation matches the composition of elementary axis rotations") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto att = random_attitude(rng);
    const double ch = std::cos(att.heading), sh = std::sin(att.heading);
    const double cp = std::cos(att.pitch), sp = std::sin(att.pitch);
    const double cr = std::cos(att.roll), sr = std::sin(att.roll);
    Rotation3 rz, ry, rx;
    rz << ch, -sh, 0, sh, ch, 0, 0, 0, 1;
    ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
    rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
    CHECK((attitude_to_rotation(att) - rz * ry * rx).norm() < 1e-12);
  }
}

TEST_CASE("rotations are orthonormal with unit determinant") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Rotation3 r = attitude_to_rotation(random_attitude(rng, 0.0));
    REQUIRE((r.transpose() * r - Rotation3::Identity()).norm() < 1e-9);
    REQUIRE(std::abs(r.determinant() - 1.0) < 1e-9);
  }
}

TEST_CASE("attitude roundtrips through the rotation matrix") {
  Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    const auto att = random_attitude(rng);
    const auto back = rotation_to_attitude(attitude_to_rotation(att));
    REQUIRE(std::abs(back.pitch - att.pitch) < 1e-9);
    REQUIRE(angle_diff(back.roll, att.roll) < 1e-9);
    REQUIRE(angle_diff(back.heading, att.heading) < 1e-9);
    REQUIRE(is_valid(back));
  }
}

TEST_CASE("normalized wraps angles into their ranges") {
  const auto att = normalized({0.1, 3 * kPi / 2, -kPi / 2});
  CHECK(is_valid(att));
  CHECK(att.roll == doctest::Approx(-kPi / 2));
  CHECK(att.heading == doctest::Approx(3 * kPi / 2));
  CHECK_FALSE(is_valid({0, 0, 2 * kPi}));
}

TEST_CASE("half dodecahedron geometry") {
  const auto poly = half_dodecahedron(1.0);
  REQUIRE(poly.faces.size() == 6);
  CHECK((poly.faces[0].normal - Vec3::UnitZ()).norm() < 1e-15);
  const double expected = std::atan(2.0);
  for (std::size_t i = 1; i < 6; ++i) {
    const double angle = std::acos(poly.faces[0].normal.dot(poly.faces[i].normal));
    CHECK(std::abs(angle - expected) < 1e-9);
    CHECK(std::abs(angle * 180 / kPi - 63.4349) < 1e-4);
  }
  for (std::size_t i = 1; i < 6; ++i) {
    const auto& a = poly.faces[i].normal;
    const auto& b = poly.faces[i % 5 + 1].normal;
    const double az = std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x());
    CHECK(angle_diff(az, 2 * kPi / 5) < 1e-12);
  }
  for (const auto& f : poly.faces) {
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.centroid.norm() - 1.113516) < 1e-5);
    CHECK((f.centroid - dodecahedron_inradius(1.0) * f.normal).norm() < 1e-12);
  }
}

TEST_CASE("half dodecahedron scales linearly with edge length") {
  const auto one = half_dodecahedron(1.0);
  const auto two = half_dodecahedron(2.0);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK((two.faces[i].centroid - 2.0 * one.faces[i].centroid).norm() < 1e-15);
  }
  CHECK_THROWS_AS(half_dodecahedron(0.0), InputError);
  CHECK_THROWS_AS(half_dodecahedron(-1.0), InputError);
}

TEST_CASE("visible faces") {
  const auto poly = half_dodecahedron(1.0);
  CHECK(visible_faces(poly, Vec3::UnitZ()).size() == 6);
  CHECK(visible_faces(poly, -Vec3::UnitZ()).empty());
  CHECK_THROWS_AS(visible_faces(poly, Vec3::Zero()), InputError);
}

TEST_CASE("every upward direction sees at least three faces") {
  const auto poly = half_dodecahedron(1.0);
  Rng rng(2024);
  int checked = 0;
  while (checked < 100000) {
    Vec3 d = random_unit(rng);
    if (d.z() <= 0.0) continue;
    ++checked;
    REQUIRE(visible_faces(poly, d).size() >= 3);
  }
}

TEST_CASE("tri-face distance") {
  CHECK(std::abs(tri_face_min_distance(1.0) - 2.49) < 0.005);
  CHECK(tri_face_min_distance(2.0) == 2.0 * tri_face_min_distance(1.0));
  CHECK(std::abs(tri_face_min_distance(0.05) - 0.1245) < 3e-4);
  CHECK_THROWS_AS(tri_face_min_distance(0.0), InputError);
}

TEST_CASE("plane coefficients are normalized") {
  const PlaneCoeffs p(3, 0, 4);
  CHECK(p.a() == doctest::Approx(0.6));
  CHECK(p.c() == doctest::Approx(0.8));
  CHECK_THROWS_AS(PlaneCoeffs(0, 0, 0), InputError);
}

TEST_CASE("linear independence") {
  const PlaneCoeffs x(1, 0, 0), y(0, 1, 0), z(0, 0, 1), xy(1, 2, 0);
  CHECK(linearly_independent(x, y, z));
  CHECK_FALSE(linearly_independent(x, y, xy));
  CHECK_FALSE(linearly_independent(x, x, z));
  CHECK_FALSE(linearly_independent(z, y, z));
}

TEST_CASE("linear independence ignores order and normal sign") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const PlaneCoeffs a(random_unit(rng)), b(random_unit(rng));
    // Near-dependent third plane half of the time.
    const Vec3 mix = rng.uniform() < 0.5 ? (a.normal() + b.normal() + 1e-7 * random_unit(rng))
                                         : random_unit(rng);
    const PlaneCoeffs c(mix);
    const PlaneCoeffs neg_a(-a.normal());
    const bool base = linearly_independent(a, b, c);
    CHECK(linearly_independent(b, c, a) == base);
    CHECK(linearly_independent(c, a, b) == base);
    CHECK(linearly_independent(b, a, c) == base);
    CHECK(linearly_independent(neg_a, b, c) == base);
  }
}

TEST_CASE("line of sight") {
  const std::vector<Aabb> none;
  CHECK(line_of_sight({0, 0, 1}, {10, 0, 1}, none));
  const std::vector<Aabb> box{{{4, -1, 0}, {6, 1, 3}}};
  CHECK_FALSE(line_of_sight({0, 0, 1}, {10, 0, 1}, box));
}

TEST_CASE("line of sight agrees with dense sampling of the segment") {
  const std::vector<Aabb> box{{{4, -1, 0}, {6, 1, 3}}};
  auto sampled = [&](const Vec3& p, const Vec3& q) {
    constexpr int n = 200000;
    for (int i = 1; i < n; ++i) {
      const Vec3 x = p + (q - p) * (static_cast<double>(i) / n);
      if (box[0].contains(x)) return false;
    }
    return true;
  };
  const Vec3 p(0, 0, 1);
  CHECK(line_of_sight(p, {10, 5, 1}, box) == sampled(p, {10, 5, 1}));

  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a(rng.uniform(-2, 12), rng.uniform(-4, 4), rng.uniform(-1, 4));
    const Vec3 b(rng.uniform(-2, 12), rng.uniform(-4, 4), rng.uniform(-1, 4));
    CHECK(line_of_sight(a, b, box) == sampled(a, b));
    CHECK(line_of_sight(a, b, box) == line_of_sight(b, a, box));
  }
}

TEST_CASE("zero-thickness walls block crossing segments but not endpoint contact") {
  const std::vector<Aabb> wall{{{8, 0, 0}, {8, 3.5, 3}}};
  CHECK_FALSE(line_of_sight({7, 1, 0}, {9, 1, 1}, wall));
  CHECK(line_of_sight({7.9, 0.1, 0}, {8, 4, 3}, wall));
}

TEST_CASE("solve frame planes") {
  const Vec3 down = -Vec3::UnitZ();
  const auto p = solve_frame_plane(Vec3::UnitZ(), {}, down);
  CHECK((p.normal() - Vec3::UnitZ()).norm() < 1e-15);

  // Forward at heading 90 degrees is east, which is -y in the north/west/up frame.
  const auto east = solve_frame_plane(Vec3::UnitX(), {0, 0, kPi / 2}, down);
  CHECK((east.normal() - Vec3(0, -1, 0)).norm() < 1e-12);

  const auto side = solve_frame_plane(Vec3::UnitZ(), {}, Vec3::UnitX());
  CHECK(std::abs(side.c()) < 1e-15);

  CHECK_THROWS_AS(solve_frame_plane(Vec3::UnitZ(), {}, Vec3::Zero()), InputError);
}

TEST_CASE("solve frame basis is a right-handed orthonormal frame") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 ray = random_unit(rng);
    const Rotation3 b = solve_frame_basis(ray);
    CHECK((b.transpose() * b - Rotation3::Identity()).norm() < 1e-12);
    CHECK(std::abs(b.determinant() - 1.0) < 1e-12);
    CHECK((b.col(2) + ray).norm() < 1e-12);
  }
  CHECK(solve_frame_basis(-Vec3::UnitZ()).isApprox(Rotation3::Identity(), 1e-15));
}
