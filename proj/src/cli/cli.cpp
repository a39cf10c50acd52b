#include "lightpos/cli.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "io/json_emit.hpp"
#include "io/json_node.hpp"
#include "lightpos/compass.hpp"
#include "lightpos/errors.hpp"
#include "lightpos/io.hpp"
#include "lightpos/signal.hpp"
#include "lightpos/sim.hpp"
#include "lightpos/solve.hpp"

namespace lightpos {

namespace {

using detail::json;
using detail::Node;

constexpr double kDeg = std::numbers::pi / 180.0;

struct CommonArgs {
  std::string input;
  std::string out;
};

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::string stats;
  std::optional<std::uint64_t> seed;
  std::string mode = "fast";
  std::string pipeline = "mflp";
  int m = 3;
  std::size_t max_failures = 0;
  bool timestamp = false;
};

struct CoverageArgs {
  std::string scenario;
  std::string out;
  std::string method = "both";
  bool greedy = false;
};

struct SensitivityArgs {
  std::string scenario;
  std::string out;
  std::vector<double> eps{0.0, 0.05, 0.1, 0.15, 0.2};
  std::vector<double> heading_eps_deg{0.0, 5.0, 10.0};
  int trials = 100;
  std::optional<std::uint64_t> seed;
  std::string mode = "fast";
  std::string pipeline = "mflp";
  int m = 3;
};

struct SignalArgs {
  double rate = kDefaultSampleRateHz;
  double duration = 1.0;
  std::vector<std::string> components;
  std::vector<double> candidates;
  double noise_sd = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

MeasureMode parse_mode(const std::string& s) {
  return s == "end_to_end" ? MeasureMode::end_to_end : MeasureMode::fast;
}

Pipeline parse_pipeline(const std::string& s, int m) {
  Pipeline p;
  if (s == "multi") p.kind = PipelineKind::multi;
  if (s == "trilateration") p.kind = PipelineKind::trilateration;
  p.m = m;
  return p;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json result_json(const SolveResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["residual_rms"] = r.residual_rms;
  if (r.status == SolveStatus::unique) j["point"] = vec_json(r.point);
  return j;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

std::string sidecar_path(const std::string& csv, const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  const auto dot = csv.rfind('.');
  const auto slash = csv.find_last_of('/');
  const std::string stem =
      (dot != std::string::npos && (slash == std::string::npos || dot > slash)) ? csv.substr(0, dot)
                                                                                 : csv;
  return stem + ".stats.json";
}

std::string file_name(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool counts_as_failure(FixOutcome o) {
  return o == FixOutcome::degenerate || o == FixOutcome::no_converge;
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  auto file = load_scenario(a.scenario);
  auto& scn = file.scenario;
  if (a.seed) scn.noise.seed = *a.seed;
  const auto pipeline = parse_pipeline(a.pipeline, a.m);
  const auto mode = parse_mode(a.mode);

  std::vector<double> errors;
  std::size_t failures = 0;
  std::size_t other = 0;
  std::string csv;
  if (scn.trajectory) {
    const auto track = run_trajectory(scn, *scn.trajectory, pipeline, mode);
    for (const auto& t : track) {
      if (t.fix.outcome == FixOutcome::ok) errors.push_back(t.fix.error);
      failures += counts_as_failure(t.fix.outcome) ? 1 : 0;
      other += t.fix.outcome == FixOutcome::no_coverage ? 1 : 0;
    }
    csv = track_csv(track);
  } else {
    const auto run = run_static(scn, scn.points, pipeline, mode);
    for (const auto& f : run.fixes) {
      if (f.outcome == FixOutcome::ok) errors.push_back(f.error);
      failures += counts_as_failure(f.outcome) ? 1 : 0;
      other += f.outcome == FixOutcome::no_coverage ? 1 : 0;
    }
    csv = fixes_csv(run.fixes);
  }
  const auto stats = compute_stats(errors);

  ReportEnvelope env;
  env.scenario_digest = file.digest;
  env.seed = scn.noise.seed;
  env.payload = file_name(a.out);
  if (a.timestamp) env.timestamp = utc_now();
  write_file(a.out, csv);
  write_file(sidecar_path(a.out, a.stats), stats_sidecar(env, stats, failures + other));

  out << "fixes=" << errors.size() + failures + other << " ok=" << errors.size()
      << " failures=" << failures << " no_coverage=" << other
      << " mean=" << format_number(stats.mean) << "\n";
  return failures > a.max_failures ? kExitSolverFailure : kExitOk;
}

std::vector<Reading> parse_readings(const Node& arr) {
  std::vector<Reading> readings;
  for (std::size_t i = 0; i < arr.array_size(); ++i) {
    const auto r = arr.at(i);
    r.only_keys({"plane", "s", "offset"});
    Reading rd;
    const Vec3 n = r.at("plane").vec3();
    if (!(n.norm() > 0.0)) r.at("plane").fail("must be non-zero");
    rd.plane = PlaneCoeffs(n);
    rd.s = r.at("s").number();
    if (!(rd.s > 0.0)) r.at("s").fail("must be positive");
    if (r.has("offset")) rd.offset = r.at("offset").vec3();
    rd.face_id = static_cast<int>(i);
    readings.push_back(rd);
  }
  return readings;
}

EmissionProfile profile_or_default(const Node& root) {
  return root.has("profile") ? detail::parse_profile(root.at("profile"))
                             : EmissionProfile::cosine_power(1.0);
}

int run_solve(const CommonArgs& a, std::ostream& out) {
  const auto text = read_file(a.input);
  const json doc = detail::parse_document(text);
  const Node root(doc, "");
  root.only_keys({"description", "k", "profile", "readings"});
  const double k = root.at("k").number();
  if (!(k > 0.0)) root.at("k").fail("must be positive");
  const auto profile = profile_or_default(root);
  const auto readings = parse_readings(root.at("readings"));
  if (readings.size() < 3) root.at("readings").fail("need at least three readings");

  json result;
  try {
    const SolveResult r =
        readings.size() == 3
            ? mflp_closed_form(readings[0], readings[1], readings[2], k, profile)
            : mflp_least_squares(readings, k, profile);
    result = result_json(r);
    result["method"] = readings.size() == 3 ? "closed_form" : "least_squares";
  } catch (const NumericalError& e) {
    result["status"] = "domain_error";
    result["message"] = e.what();
  }
  emit(a.out, detail::stable_dump(result), out);
  return result["status"] == "unique" ? kExitOk : kExitSolverFailure;
}

int run_trilaterate(const CommonArgs& a, std::ostream& out) {
  const auto text = read_file(a.input);
  const json doc = detail::parse_document(text);
  const Node root(doc, "");
  root.only_keys({"description", "k", "profile", "lamps", "s", "z"});
  const double k = root.at("k").number();
  if (!(k > 0.0)) root.at("k").fail("must be positive");
  const auto profile = profile_or_default(root);
  std::vector<Vec3> lamps;
  const auto ln = root.at("lamps");
  for (std::size_t i = 0; i < ln.array_size(); ++i) lamps.push_back(ln.at(i).vec3());
  std::vector<double> s;
  const auto sn = root.at("s");
  for (std::size_t i = 0; i < sn.array_size(); ++i) s.push_back(sn.at(i).number());
  if (s.size() != lamps.size()) root.at("s").fail("needs one reading per lamp");
  std::optional<double> z;
  if (root.has("z")) z = root.at("z").number();
  const auto r = trilaterate(lamps, k, profile, s, z);
  emit(a.out, detail::stable_dump(result_json(r)), out);
  return r.status == SolveStatus::unique ? kExitOk : kExitSolverFailure;
}

int run_calibrate(const CommonArgs& a, std::ostream& out) {
  const auto text = read_file(a.input);
  const json doc = detail::parse_document(text);
  const Node root(doc, "");
  root.only_keys({"description", "calibration", "samples", "pitch", "roll"});
  std::vector<Eigen::Vector2d> pts;
  const auto cal = root.at("calibration");
  for (std::size_t i = 0; i < cal.array_size(); ++i) {
    const auto p = cal.at(i);
    if (p.array_size() != 2) p.fail("expected [mx, my]");
    pts.emplace_back(p.at(std::size_t{0}).number(), p.at(std::size_t{1}).number());
  }
  std::vector<MagSample> samples;
  const auto sn = root.at("samples");
  for (std::size_t i = 0; i < sn.array_size(); ++i) {
    const auto s = sn.at(i);
    s.only_keys({"mx", "my", "mz", "sensor"});
    MagSample m;
    m.mx = s.at("mx").number();
    m.my = s.at("my").number();
    m.mz = s.number_or("mz", 0.0);
    const auto idx = s.at("sensor").unsigned_integer();
    if (idx >= static_cast<std::uint64_t>(kMagSensorCount)) s.at("sensor").fail("must be 0..5");
    m.sensor = static_cast<int>(idx);
    samples.push_back(m);
  }
  const double pitch = root.number_or("pitch", 0.0) * kDeg;
  const double roll = root.number_or("roll", 0.0) * kDeg;
  json result;
  try {
    const auto fit = fit_ellipse(pts);
    const double heading = calibrate_heading(samples, fit.ellipse, pitch, roll);
    result["ellipse"] = {{"cx", fit.ellipse.cx},
                         {"cy", fit.ellipse.cy},
                         {"p", fit.ellipse.p},
                         {"q", fit.ellipse.q},
                         {"tilt_deg", fit.ellipse.tilt / kDeg}};
    result["rms_orthogonal_residual"] = fit.rms_orthogonal_residual;
    result["heading_deg"] = heading / kDeg;
    result["status"] = "ok";
  } catch (const NumericalError& e) {
    result["status"] = "failed";
    result["message"] = e.what();
  }
  emit(a.out, detail::stable_dump(result), out);
  return result["status"] == "ok" ? kExitOk : kExitSolverFailure;
}

json coverage_json(const CoverageReport& r) {
  json j;
  j["method"] = to_string(r.method);
  j["covered_fraction"] = r.covered_fraction;
  j["cell_count"] = r.cell_count;
  j["lamp_count"] = r.lamp_count;
  j["uncovered_cells"] = r.uncovered.size();
  return j;
}

json greedy_json(CoverageMethod m, const GreedyPlacement& g) {
  json j;
  j["method"] = to_string(m);
  j["count"] = g.count;
  j["full_coverage"] = g.full_coverage;
  j["uncovered_cells"] = g.uncovered_cells;
  json placement = json::array();
  for (const auto& p : g.placement) placement.push_back(vec_json(p));
  j["placement"] = placement;
  return j;
}

int run_coverage(const CoverageArgs& a, std::ostream& out) {
  const auto file = load_scenario(a.scenario);
  const auto plan = floorplan_of(file.scenario);
  const auto& cs = file.coverage;
  std::vector<CoverageMethod> methods;
  if (a.method != "trilateration") methods.push_back(CoverageMethod::mflp);
  if (a.method != "mflp") methods.push_back(CoverageMethod::trilateration);

  json result;
  result["scenario_digest"] = file.digest;
  if (a.greedy) {
    const auto candidates = candidate_grid(plan, cs.candidate_spacing, cs.candidate_height);
    std::map<std::string, std::size_t> counts;
    for (auto m : methods) {
      const auto g = greedy_min_lamps(plan, candidates, m, cs.cell_size, cs.criteria);
      result[to_string(m)] = greedy_json(m, g);
      counts[to_string(m)] = g.count;
    }
    if (counts.size() == 2 && counts["mflp"] > 0) {
      result["ratio"] = static_cast<double>(counts["trilateration"]) /
                        static_cast<double>(counts["mflp"]);
    }
  } else {
    for (auto m : methods) {
      result[to_string(m)] =
          coverage_json(coverage_analysis(plan, file.scenario.lamps, m, cs.cell_size, cs.criteria));
    }
  }
  emit(a.out, detail::stable_dump(result), out);
  return kExitOk;
}

int run_sensitivity(const SensitivityArgs& a, std::ostream& out) {
  auto file = load_scenario(a.scenario);
  auto& scn = file.scenario;
  if (a.seed) scn.noise.seed = *a.seed;
  for (double e : a.eps) {
    if (!(e >= 0.0 && e <= 0.2)) throw InputError("--eps: values must lie in [0, 0.2]");
  }
  for (double h : a.heading_eps_deg) {
    if (!(h >= 0.0)) throw InputError("--heading-eps: values must be non-negative");
  }
  if (a.trials < 1) throw InputError("--trials: must be positive");
  if (scn.points.empty()) throw InputError(a.scenario + ": points: sensitivity needs points");
  std::vector<double> heading;
  for (double h : a.heading_eps_deg) heading.push_back(h * kDeg);
  const auto table = sensitivity_sweep(scn, scn.points, a.eps, heading, a.trials,
                                       parse_pipeline(a.pipeline, a.m), parse_mode(a.mode));
  emit(a.out, sensitivity_csv(table), out);
  return kExitOk;
}

std::vector<WaveComponent> parse_components(const std::vector<std::string>& specs) {
  std::vector<WaveComponent> comps;
  for (const auto& spec : specs) {
    std::stringstream ss(spec);
    std::string f, p, shape;
    if (!std::getline(ss, f, ':') || !std::getline(ss, p, ':')) {
      throw InputError("--component " + spec + ": expected freq:peak[:ook|sine|dc]");
    }
    std::getline(ss, shape, ':');
    WaveComponent c;
    try {
      c.freq_hz = std::stod(f);
      c.peak = std::stod(p);
    } catch (const std::exception&) {
      throw InputError("--component " + spec + ": not a number");
    }
    if (shape.empty()) shape = c.freq_hz == 0.0 ? "dc" : "ook";
    if (shape == "ook") {
      c.shape = WaveShape::square_ook;
    } else if (shape == "sine") {
      c.shape = WaveShape::sine;
    } else if (shape == "dc") {
      c.shape = WaveShape::dc;
    } else {
      throw InputError("--component " + spec + ": unknown shape " + shape);
    }
    comps.push_back(c);
  }
  return comps;
}

int run_signal(const SignalArgs& a, std::ostream& out) {
  const auto comps = parse_components(a.components);
  const auto trace = synthesize_trace(comps, a.rate, a.duration, a.noise_sd, a.seed);
  std::vector<double> candidates = a.candidates;
  if (candidates.empty()) {
    for (const auto& c : comps) {
      if (c.shape != WaveShape::dc) candidates.push_back(c.freq_hz);
    }
  }
  const auto peaks = identify_lamps(trace, candidates);
  json result;
  result["samples"] = trace.samples.size();
  json arr = json::array();
  for (const auto& p : peaks) {
    arr.push_back({{"freq_hz", p.freq_hz}, {"amplitude", p.amplitude}});
  }
  result["peaks"] = arr;
  emit(a.out, detail::stable_dump(result), out);
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Light-intensity indoor positioning simulator and solvers", "lightpos"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  const std::vector<std::string> modes{"fast", "end_to_end"};
  const std::vector<std::string> pipelines{"mflp", "multi", "trilateration"};

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario's points or trajectory");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  simulate->add_option("--out", sim.out, "CSV of fixes")->required();
  simulate->add_option("--stats", sim.stats, "Stats sidecar (default <out>.stats.json)");
  simulate->add_option("--seed", sim.seed, "Noise seed (overrides noise.seed)");
  simulate->add_option("--mode", sim.mode)->check(CLI::IsMember(modes));
  simulate->add_option("--pipeline", sim.pipeline)->check(CLI::IsMember(pipelines));
  simulate->add_option("--m", sim.m, "Readings for the multi pipeline")->check(CLI::Range(3, 64));
  simulate->add_option("--max-failures", sim.max_failures,
                       "Degenerate or unconverged fixes tolerated before exit 2");
  simulate->add_flag("--timestamp", sim.timestamp, "Record the UTC time in the sidecar");

  CommonArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Position from three or more single-lamp readings");
  solve->add_option("--input", solve_args.input, "Readings JSON")->required();
  solve->add_option("--out", solve_args.out, "Result JSON (default stdout)");

  CommonArgs tri_args;
  auto* tri = app.add_subcommand("trilaterate", "Position from one face and three lamps");
  tri->add_option("--input", tri_args.input, "Trilateration JSON")->required();
  tri->add_option("--out", tri_args.out, "Result JSON (default stdout)");

  CommonArgs cal_args;
  auto* cal = app.add_subcommand("calibrate", "Fit a magnetometer ellipse and report heading");
  cal->add_option("--input", cal_args.input, "Calibration JSON")->required();
  cal->add_option("--out", cal_args.out, "Result JSON (default stdout)");

  CoverageArgs cov;
  auto* coverage = app.add_subcommand("coverage", "Coverage of a lamp layout or greedy placement");
  coverage->add_option("--scenario", cov.scenario, "Scenario JSON")->required();
  coverage->add_option("--out", cov.out, "Result JSON (default stdout)");
  coverage->add_option("--method", cov.method)
      ->check(CLI::IsMember({"mflp", "trilateration", "both"}));
  coverage->add_flag("--greedy", cov.greedy, "Place lamps greedily from the candidate grid");

  SensitivityArgs sens;
  auto* sensitivity = app.add_subcommand("sensitivity", "Perturbation sweep over points");
  sensitivity->add_option("--scenario", sens.scenario, "Scenario JSON")->required();
  sensitivity->add_option("--out", sens.out, "Table CSV (default stdout)");
  sensitivity->add_option("--eps", sens.eps, "RSS perturbation levels")->delimiter(',');
  sensitivity->add_option("--heading-eps", sens.heading_eps_deg, "Heading perturbation, degrees")
      ->delimiter(',');
  sensitivity->add_option("--trials", sens.trials, "Trials per point and cell");
  sensitivity->add_option("--seed", sens.seed, "Noise seed (overrides noise.seed)");
  sensitivity->add_option("--mode", sens.mode)->check(CLI::IsMember(modes));
  sensitivity->add_option("--pipeline", sens.pipeline)->check(CLI::IsMember(pipelines));
  sensitivity->add_option("--m", sens.m)->check(CLI::Range(3, 64));

  SignalArgs sig;
  auto* signal = app.add_subcommand("signal", "Synthesize a trace and extract tone amplitudes");
  signal->add_option("--rate", sig.rate, "Sampling rate, Hz");
  signal->add_option("--duration", sig.duration, "Window, seconds");
  signal->add_option("--component", sig.components, "freq:peak[:ook|sine|dc]")->required();
  signal->add_option("--candidates", sig.candidates, "Frequencies to extract")->delimiter(',');
  signal->add_option("--noise-sd", sig.noise_sd);
  signal->add_option("--seed", sig.seed);
  signal->add_option("--out", sig.out, "Result JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*simulate) return run_simulate(sim, out);
    if (*solve) return run_solve(solve_args, out);
    if (*tri) return run_trilaterate(tri_args, out);
    if (*cal) return run_calibrate(cal_args, out);
    if (*coverage) return run_coverage(cov, out);
    if (*sensitivity) return run_sensitivity(sens, out);
    if (*signal) return run_signal(sig, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const NumericalError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return kExitInputError;
}

}  // namespace lightpos
