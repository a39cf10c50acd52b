#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lightpos/compass.hpp"
#include "lightpos/geom.hpp"
#include "lightpos/io.hpp"
#include "lightpos/rng.hpp"
#include "lightpos/rss.hpp"
#include "lightpos/signal.hpp"
#include "lightpos/sim.hpp"
#include "lightpos/solve.hpp"

using namespace lightpos;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ScenarioFile fixture(const std::string& name) {
  return load_scenario(std::string(LIGHTPOS_FIXTURE_DIR) + "/" + name);
}

double angle_diff(double a, double b) {
  return std::abs(std::remainder(a - b, 2 * kPi));
}

Reading reading_at(const Vec3& normal, double s) {
  Reading r;
  r.plane = PlaneCoeffs(normal);
  r.s = s;
  return r;
}

Outcome worked_example() {
  Outcome o;
  LampModel lamp;
  lamp.position = {10, 10, 10};
  const Vec3 origin = Vec3::Zero();
  const std::vector<Vec3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const auto& n : axes) {
    o.require(std::abs(eval_rss(lamp, origin, n) * 900.0 - 1.0) < 1e-12, "1/900 reading");
  }
  const Vec3 n4 = Vec3(1, 2, 0).normalized();
  const double s4 = eval_rss(lamp, origin, n4);
  o.require(std::abs(s4 * 300.0 * std::sqrt(5.0) - 1.0) < 1e-12, "1/(300 sqrt 5) reading");

  const auto cosine = EmissionProfile::cosine_power(1.0);
  const auto unique = mflp_closed_form(reading_at(axes[0], 1.0 / 900), reading_at(axes[1], 1.0 / 900),
                                       reading_at(axes[2], 1.0 / 900), 1.0, cosine);
  o.require(unique.status == SolveStatus::unique &&
                (unique.point - Vec3(10, 10, 10)).norm() < 1e-9,
            "independent triple recovers (10,10,10)");
  const auto degen = mflp_closed_form(reading_at(axes[0], 1.0 / 900), reading_at(axes[1], 1.0 / 900),
                                      reading_at(n4, s4), 1.0, cosine);
  o.require(degen.status == SolveStatus::degenerate, "dependent triple is degenerate");

  // Points (t, t, z) with t z / (2 t^2 + z^2)^2 = 1/900 on the branch z > sqrt(2/3) t.
  int on_curve = 0;
  double worst = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double t = 6.0 + 4.0 * i / 11.0;
    const auto g = [t](double z) { return t * z / std::pow(2 * t * t + z * z, 2) - 1.0 / 900; };
    double lo = std::sqrt(2.0 / 3.0) * t, hi = 100.0;
    if (!(g(lo) > 0.0 && g(hi) < 0.0)) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > 0.0 ? lo : hi) = mid;
    }
    LampModel p;
    p.position = {t, t, 0.5 * (lo + hi)};
    const double r1 = std::abs(eval_rss(p, origin, axes[0]) * 900.0 - 1.0);
    const double r2 = std::abs(eval_rss(p, origin, axes[1]) * 900.0 - 1.0);
    const double r3 = std::abs(eval_rss(p, origin, n4) / s4 - 1.0);
    worst = std::max({worst, r1, r2, r3});
    ++on_curve;
  }
  o.require(on_curve >= 10, "ten curve points");
  o.require(worst < 1e-9, "curve points reproduce the readings");
  o.note(std::to_string(on_curve) + " curve points, max residual " + num(worst));
  return o;
}

Outcome closed_form_roundtrip() {
  Outcome o;
  Rng rng(2024);
  double worst_cf = 0.0, worst_ls = 0.0;
  int configs = 0;
  while (configs < 1000) {
    const Vec3 x(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0.5, 4));
    const auto profile = EmissionProfile::cosine_power(rng.uniform(0.5, 3.0));
    const double k = rng.uniform(10, 1000);
    std::vector<Reading> rs;
    while (rs.size() < 3) {
      const Vec3 n = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
      if (n.dot(x) <= 0.1 * x.norm()) continue;
      Reading r = reading_at(n, 1.0);
      r.s = model_rss(r, x, k, profile);
      rs.push_back(r);
    }
    if (!linearly_independent(rs[0].plane, rs[1].plane, rs[2].plane, 1e-3)) continue;
    ++configs;
    const auto cf = mflp_closed_form(rs[0], rs[1], rs[2], k, profile);
    if (cf.status != SolveStatus::unique) {
      worst_cf = 1.0;
      continue;
    }
    worst_cf = std::max(worst_cf, (cf.point - x).norm() / x.norm());
    Vec3 seed = x + 0.05 * x.norm() * Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    seed.z() = std::max(seed.z(), 0.1);
    const auto ls = mflp_least_squares(rs, k, profile, seed);
    worst_ls = std::max(worst_ls, (ls.point - cf.point).norm() / x.norm());
  }
  o.require(worst_cf < 1e-9, "closed form within 1e-9 relative");
  o.require(worst_ls < 1e-6, "least squares agrees within 1e-6");
  o.note("1000 configurations, closed form " + num(worst_cf) + ", least squares " + num(worst_ls));
  return o;
}

Outcome signal_extraction() {
  Outcome o;
  const double rate = 640.0, duration = 1.0;
  const auto amp = [&](double a, double dc, double interferer, double scale) {
    const std::vector<WaveComponent> comps{{65.0, scale * a, WaveShape::square_ook},
                                           {0.0, scale * dc, WaveShape::dc},
                                           {100.0, scale * interferer, WaveShape::sine}};
    return extract_amplitude(synthesize_trace(comps, rate, duration, 0.0, 1), 65.0);
  };
  const double a = 120.0;
  const double with_all = amp(a, 850, 300, 1.0);
  const double expected = 2.0 / kPi * a;
  const double rel = std::abs(with_all / expected - 1.0);
  o.require(rel < 0.02, "fundamental within 2%");
  const double no_dc = amp(a, 0, 300, 1.0);
  o.require(std::abs(with_all - no_dc) <= 1e-9 * expected, "dc rejection");
  const double lin_scale = std::abs(amp(a, 850, 300, 3.0) / (3.0 * with_all) - 1.0);
  const double lin_a = std::abs(amp(2 * a, 850, 0, 1.0) / (2.0 * amp(a, 850, 0, 1.0)) - 1.0);
  o.require(lin_scale < 1e-9 && lin_a < 1e-9, "linearity");
  o.note("relative error " + num(rel) + ", dc shift " + num(std::abs(with_all - no_dc)) +
         ", linearity " + num(std::max(lin_scale, lin_a)));
  return o;
}

Outcome tri_face_visibility() {
  Outcome o;
  const double d = tri_face_min_distance(1.0);
  o.require(d >= 2.485 && d <= 2.495, "tri-face distance in [2.485, 2.495]");
  const auto poly = half_dodecahedron(1.0);
  Rng rng(99);
  int checked = 0;
  std::size_t fewest = 6;
  while (checked < 100000) {
    const Vec3 v(rng.normal(), rng.normal(), rng.normal());
    if (v.z() <= 0.0) continue;
    ++checked;
    fewest = std::min(fewest, visible_faces(poly, v.normalized()).size());
  }
  o.require(fewest >= 3, "every direction sees three faces");
  o.note("distance " + num(d) + ", fewest visible faces " + std::to_string(fewest));
  return o;
}

Outcome sensitivity() {
  Outcome o;
  const auto scn = fixture("office.json").scenario;
  const std::vector<double> eps{0.0, 0.05, 0.1, 0.15, 0.2};
  const std::vector<double> heading{0.0, 10 * kDeg};
  const auto table = sensitivity_sweep(scn, scn.points, eps, heading, 500);
  const auto& zero = table.cells.front();
  const auto& worst = table.cells.back();
  o.require(zero.stats.mean < 1e-6, "noise-free mean below 1e-6 m");
  o.require(worst.stats.mean < 1.0, "mean below 1 m at eps 0.2, 10 deg");
  o.require(table.mean_nondecreasing_in_epsilon, "mean non-decreasing in eps");
  std::string means;
  for (std::size_t i = 1; i < table.cells.size(); i += 2) {
    means += (means.empty() ? "" : "/") + num(table.cells[i].stats.mean);
  }
  o.note("mean " + num(zero.stats.mean) + " at 0, " + num(worst.stats.mean) +
         " at (0.2, 10 deg), failures " + std::to_string(worst.failures) + ", means at 10 deg " +
         means);
  return o;
}

Outcome m_readings() {
  Outcome o;
  auto scn = fixture("three_lamps.json").scenario;
  const std::vector<double> eps{0.1};
  const std::vector<double> heading{scn.noise.heading_epsilon};
  const auto m3 = sensitivity_sweep(scn, scn.points, eps, heading, 500, {PipelineKind::multi, 3});
  const auto m9 = sensitivity_sweep(scn, scn.points, eps, heading, 500, {PipelineKind::multi, 9});
  const double a = m3.cells[0].stats.mean, b = m9.cells[0].stats.mean;
  o.require(b < a, "m = 9 mean strictly below m = 3");
  o.note("m=3 mean " + num(a) + ", m=9 mean " + num(b));
  return o;
}

std::vector<double> floor_readings(const std::vector<Vec3>& lamps, const Vec3& truth) {
  std::vector<double> s;
  for (const auto& p : lamps) {
    LampModel m;
    m.position = p;
    m.k = 900;
    s.push_back(eval_rss(m, truth, Vec3::UnitZ()));
  }
  return s;
}

Outcome trilateration() {
  Outcome o;
  const auto cosine = EmissionProfile::cosine_power(1.0);
  const std::vector<Vec3> lamps{{0, 0, 3}, {5, 0, 3}, {1, 4, 3}};
  const Vec3 truth(2.3, 1.7, 0.0);
  const auto s = floor_readings(lamps, truth);
  const auto res = trilaterate(lamps, 900, cosine, s, truth.z());
  o.require(res.status == SolveStatus::unique && (res.point - truth).norm() < 1e-6,
            "non-collinear triple recovers truth");

  Rng rng(77);
  double worst = 0.0;
  int random_configs = 0;
  while (random_configs < 200) {
    std::vector<Vec3> ls;
    for (int i = 0; i < 3; ++i) ls.emplace_back(rng.uniform(0, 8), rng.uniform(0, 8), 3.0);
    const double area = 0.5 * std::abs((ls[1] - ls[0]).cross(ls[2] - ls[0]).z());
    if (area < 2.0) continue;
    ++random_configs;
    const Vec3 t(rng.uniform(1, 7), rng.uniform(1, 7), rng.uniform(0, 1));
    const auto r = trilaterate(ls, 900, cosine, floor_readings(ls, t), t.z());
    worst = std::max(worst, r.status == SolveStatus::unique ? (r.point - t).norm() : 1.0);
  }
  o.require(worst < 1e-6, "random non-collinear configurations recover truth");

  const double side = 4.0;
  const std::vector<Vec3> tri{{0, 0, 3}, {side, 0, 3}, {side / 2, side * std::sqrt(3.0) / 2, 3}};
  const Vec3 centroid((tri[0] + tri[1] + tri[2]).x() / 3, (tri[0] + tri[1] + tri[2]).y() / 3, 0);
  const auto eq = trilaterate(tri, 900, cosine, floor_readings(tri, centroid));

  const std::vector<Vec3> line{{0, 0, 3}, {2, 0, 3}, {4, 0, 3}};
  const auto col = trilaterate(line, 900, cosine, s, 0.0);
  o.require(col.status == SolveStatus::degenerate, "collinear triple is degenerate");

  const auto free = trilaterate(lamps, 900, cosine, s);
  o.note("error " + num((res.point - truth).norm()) + ", 200 random " + num(worst) +
         ", free-height equilateral centroid error " + num((eq.point - centroid).norm()) +
         " at residual " + num(eq.residual_rms) + "; free height on the worked triple gives (" +
         num(free.point.x()) + ", " + num(free.point.y()) + ", " + num(free.point.z()) +
         ") with residual " + num(free.residual_rms));
  return o;
}

Outcome compass() {
  Outcome o;
  const EllipseParams distortion{0.4, -0.3, 1.3, 1.0, 20 * kDeg};
  const auto calibrate = [&](double noise, std::uint64_t seed) {
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 36; ++i) {
      for (const auto& s : synth_distorted_samples(2 * kPi * i / 36, distortion, noise,
                                                   Rng::mix(seed + static_cast<std::uint64_t>(i)))) {
        pts.emplace_back(s.mx, s.my);
      }
    }
    return fit_ellipse(pts).ellipse;
  };

  const auto clean = calibrate(0.0, 1);
  double worst = 0.0;
  for (int i = 0; i < 360; ++i) {
    const double h = 2 * kPi * (i + 0.5) / 360;
    worst = std::max(worst, angle_diff(calibrate_heading(synth_distorted_samples(h, distortion, 0.0, 1),
                                                         clean),
                                       h));
  }
  o.require(worst < 1e-6, "noise-free error below 1e-6 rad");

  Rng rng(8);
  std::vector<double> errors;
  for (int trial = 0; trial < 500; ++trial) {
    const auto fit = calibrate(0.01, 1000 + 100 * static_cast<std::uint64_t>(trial));
    const double h = rng.uniform(0, 2 * kPi);
    const auto q = synth_distorted_samples(h, distortion, 0.01, 5000 + trial);
    errors.push_back(angle_diff(calibrate_heading(q, fit), h));
  }
  std::nth_element(errors.begin(), errors.begin() + 250, errors.end());
  const double median = errors[250] / kDeg;
  o.require(median < 2.0, "median noisy error below 2 deg");
  o.note("noise-free " + num(worst) + " rad, noisy median " + num(median) + " deg");
  return o;
}

Outcome deployment_ratios() {
  Outcome o;
  for (const auto& [name, ratio] :
       {std::pair<const char*, double>{"two_room_gate.json", 5.0}, {"four_room.json", 9.0}}) {
    const auto file = fixture(name);
    const auto plan = floorplan_of(file.scenario);
    const auto candidates =
        candidate_grid(plan, file.coverage.candidate_spacing, file.coverage.candidate_height);
    const auto m = greedy_min_lamps(plan, candidates, CoverageMethod::mflp,
                                    file.coverage.cell_size, file.coverage.criteria);
    const auto t = greedy_min_lamps(plan, candidates, CoverageMethod::trilateration,
                                    file.coverage.cell_size, file.coverage.criteria);
    const bool ok = m.full_coverage && t.full_coverage && m.count > 0 &&
                    static_cast<double>(t.count) >= ratio * static_cast<double>(m.count);
    o.require(ok, std::string(name) + " ratio >= " + num(ratio));
    o.note(std::string(name) + " mflp " + std::to_string(m.count) + ", trilateration " +
           std::to_string(t.count));
  }
  return o;
}

struct Reports {
  std::string static_csv, stats, track_csv, sweep_csv;
};

Reports produce_reports() {
  Reports r;
  auto office = fixture("office.json");
  office.scenario.noise.rss_epsilon = 0.1;
  office.scenario.noise.heading_epsilon = 5 * kDeg;
  const auto run = run_static(office.scenario, office.scenario.points, {});
  r.static_csv = fixes_csv(run.fixes);
  ReportEnvelope env;
  env.scenario_digest = office.digest;
  env.seed = office.scenario.noise.seed;
  env.payload = "office.csv";
  r.stats = stats_sidecar(env, run.stats, run.failures);

  const auto corridor = fixture("corridor.json").scenario;
  r.track_csv = track_csv(run_trajectory(corridor, *corridor.trajectory, {}, MeasureMode::end_to_end));

  const auto three = fixture("three_lamps.json").scenario;
  const std::vector<double> eps{0.0, 0.1};
  const std::vector<double> heading{0.0, 5 * kDeg};
  r.sweep_csv = sensitivity_csv(
      sensitivity_sweep(three, three.points, eps, heading, 10, {PipelineKind::multi, 6}));
  return r;
}

Outcome determinism() {
  Outcome o;
  const auto a = produce_reports();
  const auto b = produce_reports();
  const std::string dir = LIGHTPOS_TEST_OUTPUT_DIR;
  write_file(dir + "/acceptance_a.csv", a.static_csv + a.track_csv + a.sweep_csv);
  write_file(dir + "/acceptance_b.csv", b.static_csv + b.track_csv + b.sweep_csv);
  o.require(a.static_csv == b.static_csv, "static fixes CSV");
  o.require(a.stats == b.stats, "stats sidecar");
  o.require(a.track_csv == b.track_csv, "trajectory CSV");
  o.require(a.sweep_csv == b.sweep_csv, "sensitivity CSV");
  o.require(read_file(dir + "/acceptance_a.csv") == read_file(dir + "/acceptance_b.csv"),
            "files on disk");
  o.note(std::to_string(a.static_csv.size() + a.track_csv.size() + a.sweep_csv.size()) +
         " bytes compared");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "worked example", 1.0, worked_example},
      {2, "closed-form roundtrip", 10.0, closed_form_roundtrip},
      {3, "signal extraction", 1.0, signal_extraction},
      {4, "tri-face visibility", 5.0, tri_face_visibility},
      {5, "sensitivity sweep", 120.0, sensitivity},
      {6, "m-reading generalization", 120.0, m_readings},
      {7, "trilateration", 1.0, trilateration},
      {8, "compass calibration", 30.0, compass},
      {9, "deployment-cost ratios", 60.0, deployment_ratios},
      {10, "determinism", 600.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.note("over the " + num(c.budget_s) + " s budget");
    }
    std::printf("criterion %2d %-26s %s (%.2f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
