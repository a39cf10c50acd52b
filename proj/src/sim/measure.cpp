#include <algorithm>
#include <cmath>
#include <map>

#include "lightpos/compass.hpp"
#include "lightpos/errors.hpp"
#include "lightpos/rng.hpp"
#include "lightpos/sim.hpp"

namespace lightpos {

void validate(const Scenario& scn) {
  if (!(scn.bounds.min.array() <= scn.bounds.max.array()).all()) {
    throw InputError("bounds: min must not exceed max");
  }
  for (std::size_t i = 0; i < scn.obstacles.size(); ++i) {
    if (!(scn.obstacles[i].min.array() <= scn.obstacles[i].max.array()).all()) {
      throw InputError("obstacles[" + std::to_string(i) + "]: min must not exceed max");
    }
  }
  const double window_samples = std::floor(scn.signal.window_s * scn.signal.rate_hz + 1e-9);
  if (!(scn.signal.rate_hz > 0.0) || window_samples < 2.0) {
    throw InputError("signal: window must hold at least two samples");
  }
  const double resolution = scn.signal.rate_hz / window_samples;
  for (std::size_t i = 0; i < scn.lamps.size(); ++i) {
    const auto& lamp = scn.lamps[i];
    const std::string where = "lamps[" + std::to_string(i) + "]";
    if (!scn.bounds.contains(lamp.position)) throw InputError(where + ".position: outside bounds");
    if (!(lamp.k > 0.0)) throw InputError(where + ".k: must be positive");
    if (std::abs(lamp.central_ray.norm() - 1.0) > 1e-9) {
      throw InputError(where + ".central_ray: must be a unit vector");
    }
    if (!(lamp.flash_hz > 0.0) || !(lamp.flash_hz < scn.signal.rate_hz / 2.0)) {
      throw InputError(where + ".flash_hz: must lie in (0, rate/2)");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!(std::abs(lamp.flash_hz - scn.lamps[j].flash_hz) > resolution)) {
        throw InputError(where + ".flash_hz: not resolvable from lamps[" + std::to_string(j) +
                         "] at the configured window");
      }
    }
  }
  const auto& n = scn.noise;
  if (!(n.rss_epsilon >= 0.0 && n.rss_epsilon <= 0.2)) {
    throw InputError("noise.rss_epsilon: must lie in [0, 0.2]");
  }
  if (!(n.heading_epsilon >= 0.0) || !(n.accel_sd >= 0.0) || !(n.trace_noise_sd >= 0.0)) {
    throw InputError("noise: magnitudes must be non-negative");
  }
  if (!(scn.saturation > 0.0)) throw InputError("saturation: must be positive");
  if (scn.receiver.body.faces.empty()) throw InputError("receiver: no faces");
}

std::vector<LampModel> solver_lamps(const Scenario& scn) {
  auto lamps = scn.lamps;
  for (auto& l : lamps) l.k *= kOokFundamental;
  return lamps;
}

MeasurementSet measure(const Scenario& scn, const Pose& pose, MeasureMode mode,
                       std::uint64_t seed) {
  if (!scn.bounds.contains(pose.position)) throw InputError("pose lies outside the scenario bounds");
  Rng rng(seed);
  const auto& noise = scn.noise;

  MeasurementSet out;
  Attitude measured = pose.attitude;
  if (noise.accel_sd > 0.0) {
    auto g = gravity_image(pose.attitude);
    g.ax += rng.normal(0.0, noise.accel_sd);
    g.ay += rng.normal(0.0, noise.accel_sd);
    g.az += rng.normal(0.0, noise.accel_sd);
    try {
      std::tie(measured.pitch, measured.roll) = pitch_roll_from_accel(g);
    } catch (const InputError&) {
      // gate rejected the sample; keep the previous (true) tilt
    }
  }
  if (noise.heading_epsilon > 0.0) {
    measured.heading += rng.uniform(-noise.heading_epsilon, noise.heading_epsilon);
  }
  measured = normalized(measured);
  out.measured_attitude = measured;

  const auto& faces = scn.receiver.body.faces;
  const Rotation3 true_mount = mount_to_world(pose.attitude);
  const Rotation3 measured_mount = mount_to_world(measured);
  const std::size_t nl = scn.lamps.size();
  const std::size_t nf = faces.size();

  // Peak amplitude of each lamp at each face, before OOK modulation.
  std::vector<double> peak(nl * nf, 0.0);
  std::vector<double> incident(nf, scn.signal.ambient);
  for (std::size_t f = 0; f < nf; ++f) {
    const Vec3 center = pose.position + true_mount * faces[f].centroid;
    const Vec3 normal = true_mount * faces[f].normal;
    for (std::size_t l = 0; l < nl; ++l) {
      const auto& lamp = scn.lamps[l];
      if (!line_of_sight(center, lamp.position, scn.obstacles)) continue;
      const double s = eval_face_rss(lamp, center, normal);
      peak[l * nf + f] = s;
      incident[f] += s;
    }
  }

  // Extracted fundamental amplitudes.
  std::vector<double> amplitude(nl * nf, 0.0);
  if (mode == MeasureMode::fast) {
    for (std::size_t i = 0; i < amplitude.size(); ++i) amplitude[i] = kOokFundamental * peak[i];
  } else {
    std::vector<double> candidates;
    for (const auto& lamp : scn.lamps) candidates.push_back(lamp.flash_hz);
    for (std::size_t f = 0; f < nf; ++f) {
      std::vector<WaveComponent> comps;
      if (scn.signal.ambient > 0.0) comps.push_back({0.0, scn.signal.ambient, WaveShape::dc});
      for (std::size_t l = 0; l < nl; ++l) {
        if (peak[l * nf + f] > 0.0) {
          comps.push_back({scn.lamps[l].flash_hz, peak[l * nf + f], WaveShape::square_ook});
        }
      }
      const auto trace = synthesize_trace(comps, scn.signal.rate_hz, scn.signal.window_s,
                                          noise.trace_noise_sd,
                                          Rng::mix(seed ^ (0x5157ULL + f)));
      const auto peaks = identify_lamps(trace, candidates);
      for (std::size_t l = 0; l < nl; ++l) amplitude[l * nf + f] = peaks[l].amplitude;
    }
  }

  out.entries.reserve(nl * nf);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& lamp = scn.lamps[l];
    const Rotation3 basis_t = solve_frame_basis(lamp.central_ray).transpose();
    for (std::size_t f = 0; f < nf; ++f) {
      Measurement m;
      m.lamp_id = static_cast<int>(l);
      m.face_id = static_cast<int>(f);
      m.model_s = kOokFundamental * peak[l * nf + f];
      m.saturated = incident[f] > scn.saturation;
      double s = amplitude[l * nf + f];
      // Every entry draws its sign so the stream layout is pose-independent.
      const double sign = rng.sign();
      if (noise.rss_epsilon > 0.0) s *= 1.0 + sign * noise.rss_epsilon;
      m.s = s;
      m.reading.plane = PlaneCoeffs(basis_t * (measured_mount * faces[f].normal));
      m.reading.offset = basis_t * (measured_mount * faces[f].centroid);
      m.reading.s = s;
      m.reading.lamp_id = m.lamp_id;
      m.reading.face_id = m.face_id;
      out.entries.push_back(m);
    }
  }
  return out;
}

std::vector<LampSighting> sightings(const MeasurementSet& ms) {
  std::map<int, LampSighting> by_lamp;
  for (const auto& e : ms.entries) {
    if (e.saturated || !(e.s > 0.0)) continue;
    auto& s = by_lamp[e.lamp_id];
    s.lamp_id = e.lamp_id;
    s.readings.push_back(e.reading);
  }
  std::vector<LampSighting> out;
  for (auto& [id, s] : by_lamp) {
    std::stable_sort(s.readings.begin(), s.readings.end(),
                     [](const Reading& a, const Reading& b) { return a.s > b.s; });
    out.push_back(std::move(s));
  }
  return out;
}

const char* to_string(FixOutcome outcome) {
  switch (outcome) {
    case FixOutcome::ok:
      return "ok";
    case FixOutcome::no_coverage:
      return "no_coverage";
    case FixOutcome::degenerate:
      return "degenerate";
    case FixOutcome::no_converge:
      return "no_converge";
  }
  return "unknown";
}

namespace {

FixOutcome outcome_of(SolveStatus status) {
  switch (status) {
    case SolveStatus::unique:
      return FixOutcome::ok;
    case SolveStatus::degenerate:
      return FixOutcome::degenerate;
    case SolveStatus::no_converge:
      return FixOutcome::no_converge;
  }
  return FixOutcome::no_converge;
}

Fix locate_trilateration(const Scenario& scn, const MeasurementSet& ms,
                         const std::vector<LampModel>& lamps) {
  Fix fix;
  // Top-face readings, strongest lamps first.
  std::vector<std::pair<double, int>> top;
  for (const auto& e : ms.entries) {
    if (e.face_id == 0 && !e.saturated && e.s > 0.0) top.emplace_back(e.s, e.lamp_id);
  }
  std::stable_sort(top.begin(), top.end(), [](auto& a, auto& b) { return a.first > b.first; });
  if (top.size() < 3) {
    fix.outcome = FixOutcome::no_coverage;
    return fix;
  }
  top.resize(3);
  std::vector<Vec3> positions;
  std::vector<double> s;
  for (const auto& [amp, id] : top) {
    positions.push_back(lamps[static_cast<std::size_t>(id)].position);
    s.push_back(amp);
  }
  const auto& ref = lamps[static_cast<std::size_t>(top[0].second)];
  const Rotation3 mount = mount_to_world(ms.measured_attitude);
  const Vec3 face_offset = mount * scn.receiver.body.faces[0].centroid;
  // The receiver height is known; the sensor sits at the top-face centroid.
  const double z_face = scn.receiver.base_height + face_offset.z();
  const auto res = trilaterate(positions, ref.k, ref.profile, s, z_face);
  fix.outcome = outcome_of(res.status);
  if (fix.outcome == FixOutcome::ok) fix.estimate = res.point - face_offset;
  return fix;
}

}  // namespace

Fix locate(const Scenario& scn, const Pose& pose, const Pipeline& pipeline, MeasureMode mode,
           std::uint64_t seed) {
  const auto ms = measure(scn, pose, mode, seed);
  const auto lamps = solver_lamps(scn);
  Fix fix;
  try {
    if (pipeline.kind == PipelineKind::trilateration) {
      fix = locate_trilateration(scn, ms, lamps);
    } else {
      const auto seen = sightings(ms);
      const int m = pipeline.kind == PipelineKind::mflp ? 3 : pipeline.m;
      const auto readings = select_readings(seen, m);
      const auto res = solve_multi(readings, lamps);
      fix.outcome = outcome_of(res.status);
      fix.estimate = res.point;
    }
  } catch (const InputError&) {
    fix.outcome = FixOutcome::no_coverage;
  } catch (const NumericalError&) {
    fix.outcome = FixOutcome::degenerate;
  }
  fix.truth = pose.position;
  if (fix.outcome == FixOutcome::ok) {
    fix.error = (fix.estimate - fix.truth).norm();
  } else {
    fix.estimate = Vec3::Zero();
    fix.error = 0.0;
  }
  return fix;
}

}  // namespace lightpos
