#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "lightpos/errors.hpp"
#include "io/json_node.hpp"
#include "lightpos/io.hpp"

namespace lightpos {

using nlohmann::json;

using detail::Node;
using detail::parse_document;
using detail::parse_profile;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Aabb parse_box(const Node& n) {
  n.only_keys({"min", "max"});
  Aabb box{n.at("min").vec3(), n.at("max").vec3()};
  if (!(box.min.array() <= box.max.array()).all()) n.fail("min must not exceed max");
  return box;
}

LampModel parse_lamp(const Node& n) {
  n.only_keys({"position", "central_ray", "k", "profile", "flash_hz"});
  LampModel lamp;
  lamp.position = n.at("position").vec3();
  if (n.has("central_ray")) {
    const Vec3 ray = n.at("central_ray").vec3();
    if (!(ray.norm() > 0.0)) n.at("central_ray").fail("must be non-zero");
    lamp.central_ray = ray.normalized();
  }
  lamp.k = n.at("k").number();
  if (!(lamp.k > 0.0)) n.at("k").fail("must be positive");
  if (n.has("profile")) lamp.profile = parse_profile(n.at("profile"));
  lamp.flash_hz = n.at("flash_hz").number();
  return lamp;
}

Attitude parse_attitude_deg(const Node& n) {
  n.only_keys({"pitch", "roll", "heading"});
  Attitude att;
  att.pitch = n.number_or("pitch", 0.0) * kDeg;
  att.roll = n.number_or("roll", 0.0) * kDeg;
  att.heading = n.number_or("heading", 0.0) * kDeg;
  if (std::abs(att.pitch) > std::numbers::pi / 2) n.at("pitch").fail("must lie in [-90, 90]");
  return normalized(att);
}

ReceiverSpec parse_receiver(const Node& n) {
  n.only_keys({"edge_length", "base_height", "attitude"});
  ReceiverSpec r;
  if (n.has("edge_length")) {
    const double a = n.at("edge_length").number();
    if (!(a > 0.0)) n.at("edge_length").fail("must be positive");
    r.body = half_dodecahedron(a);
  }
  r.base_height = n.number_or("base_height", 0.0);
  if (n.has("attitude")) r.attitude = parse_attitude_deg(n.at("attitude"));
  return r;
}

NoiseSpec parse_noise(const Node& n) {
  n.only_keys({"rss_epsilon", "heading_epsilon", "accel_sd", "trace_noise_sd", "seed"});
  NoiseSpec s;
  s.rss_epsilon = n.number_or("rss_epsilon", 0.0);
  if (!(s.rss_epsilon >= 0.0 && s.rss_epsilon <= 0.2)) {
    n.at("rss_epsilon").fail("must lie in [0, 0.2]");
  }
  s.heading_epsilon = n.number_or("heading_epsilon", 0.0) * kDeg;
  if (s.heading_epsilon < 0.0) n.at("heading_epsilon").fail("must be non-negative");
  s.accel_sd = n.number_or("accel_sd", 0.0);
  if (s.accel_sd < 0.0) n.at("accel_sd").fail("must be non-negative");
  s.trace_noise_sd = n.number_or("trace_noise_sd", 0.0);
  if (s.trace_noise_sd < 0.0) n.at("trace_noise_sd").fail("must be non-negative");
  if (n.has("seed")) s.seed = n.at("seed").unsigned_integer();
  return s;
}

SignalSpec parse_signal(const Node& n) {
  n.only_keys({"rate_hz", "window_s", "ambient"});
  SignalSpec s;
  s.rate_hz = n.number_or("rate_hz", s.rate_hz);
  s.window_s = n.number_or("window_s", s.window_s);
  s.ambient = n.number_or("ambient", 0.0);
  if (!(s.rate_hz > 0.0)) n.at("rate_hz").fail("must be positive");
  if (!(s.window_s > 0.0)) n.at("window_s").fail("must be positive");
  if (s.ambient < 0.0) n.at("ambient").fail("must be non-negative");
  return s;
}

TrajectorySpec parse_trajectory(const Node& n) {
  n.only_keys({"waypoints", "speed", "dt", "dwell"});
  TrajectorySpec t;
  const auto w = n.at("waypoints");
  for (std::size_t i = 0; i < w.array_size(); ++i) t.waypoints.push_back(w.at(i).point());
  if (t.waypoints.empty()) w.fail("needs at least one waypoint");
  t.speed = n.number_or("speed", t.speed);
  t.dt = n.number_or("dt", t.dt);
  t.dwell = n.number_or("dwell", 0.0);
  if (!(t.speed > 0.0)) n.at("speed").fail("must be positive");
  if (!(t.dt > 0.0)) n.at("dt").fail("must be positive");
  if (t.dwell < 0.0) n.at("dwell").fail("must be non-negative");
  return t;
}

CoverageSettings parse_coverage(const Node& n) {
  n.only_keys({"cell_size", "candidate_spacing", "candidate_height", "min_separation",
               "min_triangle_area"});
  CoverageSettings c;
  c.cell_size = n.number_or("cell_size", c.cell_size);
  c.candidate_spacing = n.number_or("candidate_spacing", c.candidate_spacing);
  c.candidate_height = n.number_or("candidate_height", c.candidate_height);
  c.criteria.min_separation = n.number_or("min_separation", c.criteria.min_separation);
  c.criteria.min_triangle_area = n.number_or("min_triangle_area", c.criteria.min_triangle_area);
  if (!(c.cell_size > 0.0)) n.at("cell_size").fail("must be positive");
  if (!(c.candidate_spacing > 0.0)) n.at("candidate_spacing").fail("must be positive");
  return c;
}

void check_inside(const Aabb& bounds, const Vec3& p, const Node& n) {
  Vec3 q = p;
  if (std::isnan(q.z())) q.z() = bounds.min.z();
  if (!bounds.contains(q)) n.fail("lies outside bounds");
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  const json doc = parse_document(text);
  const Node root(doc, "");
  root.only_keys({"description", "bounds", "obstacles", "lamps", "receiver", "noise", "saturation",
                  "signal", "points", "trajectory", "coverage"});
  ScenarioFile out;
  auto& scn = out.scenario;
  scn.bounds = parse_box(root.at("bounds"));
  if (root.has("obstacles")) {
    const auto obs = root.at("obstacles");
    for (std::size_t i = 0; i < obs.array_size(); ++i) scn.obstacles.push_back(parse_box(obs.at(i)));
  }
  const auto lamps = root.at("lamps");
  for (std::size_t i = 0; i < lamps.array_size(); ++i) {
    scn.lamps.push_back(parse_lamp(lamps.at(i)));
    check_inside(scn.bounds, scn.lamps.back().position, lamps.at(i).at("position"));
  }
  if (root.has("receiver")) scn.receiver = parse_receiver(root.at("receiver"));
  if (root.has("noise")) scn.noise = parse_noise(root.at("noise"));
  if (root.has("saturation")) {
    scn.saturation = root.at("saturation").number();
    if (!(scn.saturation > 0.0)) root.at("saturation").fail("must be positive");
  }
  if (root.has("signal")) scn.signal = parse_signal(root.at("signal"));
  if (root.has("points") && root.has("trajectory")) {
    root.fail("points and trajectory are mutually exclusive");
  }
  if (root.has("points")) {
    const auto pts = root.at("points");
    for (std::size_t i = 0; i < pts.array_size(); ++i) {
      scn.points.push_back(pts.at(i).point());
      check_inside(scn.bounds, scn.points.back(), pts.at(i));
    }
  }
  if (root.has("trajectory")) {
    scn.trajectory = parse_trajectory(root.at("trajectory"));
    const auto w = root.at("trajectory").at("waypoints");
    for (std::size_t i = 0; i < scn.trajectory->waypoints.size(); ++i) {
      check_inside(scn.bounds, scn.trajectory->waypoints[i], w.at(i));
    }
  }
  if (root.has("coverage")) out.coverage = parse_coverage(root.at("coverage"));
  validate(scn);
  out.digest = sha256_hex(text);
  return out;
}

ScenarioFile load_scenario(const std::string& path) {
  const auto text = read_file(path);
  try {
    return parse_scenario(text);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Floorplan floorplan_of(const Scenario& scn) {
  return {scn.bounds, scn.obstacles, scn.receiver.base_height};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError(path + ": write failed");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace lightpos
