#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightpos/cli.hpp"
#include "lightpos/io.hpp"

using namespace lightpos;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "lightpos");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliRun r;
  r.code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fixture(const std::string& name) {
  return std::string(LIGHTPOS_FIXTURE_DIR) + "/" + name;
}

std::string output(const std::string& name) {
  return std::string(LIGHTPOS_TEST_OUTPUT_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("simulate writes the fixes and the stats sidecar") {
  const auto r = run({"simulate", "--scenario", fixture("empty_room.json"), "--out",
                      output("cli_fixes.csv"), "--seed", "7"});
  CHECK(r.code == kExitOk);
  const auto csv = read_file(output("cli_fixes.csv"));
  CHECK(csv.rfind("index,true_x", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
  const auto sidecar = nlohmann::json::parse(read_file(output("cli_fixes.stats.json")));
  CHECK(sidecar["envelope"]["seed"] == 7);
  CHECK(sidecar["envelope"]["scenario_digest"] ==
        sha256_hex(read_file(fixture("empty_room.json"))));
  CHECK(sidecar["stats"]["count"] == 50);
  CHECK_FALSE(sidecar["envelope"].contains("timestamp"));
}

TEST_CASE("simulate is byte-identical across runs") {
  std::vector<std::string> csv, sidecar;
  for (int i = 0; i < 2; ++i) {
    REQUIRE(run({"simulate", "--scenario", fixture("three_lamps.json"), "--out",
                 output("cli_repeat.csv"), "--pipeline", "multi", "--m", "6"})
                .code == kExitOk);
    csv.push_back(read_file(output("cli_repeat.csv")));
    sidecar.push_back(read_file(output("cli_repeat.stats.json")));
  }
  CHECK(csv[0] == csv[1]);
  CHECK(sidecar[0] == sidecar[1]);
}

TEST_CASE("simulate runs trajectories") {
  const auto r = run({"simulate", "--scenario", fixture("corridor.json"), "--out",
                      output("cli_track.csv")});
  CHECK(r.code == kExitOk);
  CHECK(read_file(output("cli_track.csv")).rfind("index,time,", 0) == 0);
}

TEST_CASE("missing lamps exits 1 with the field path") {
  const auto r = run({"simulate", "--scenario",
                      std::string(LIGHTPOS_TEST_DATA_DIR) + "/missing_lamps.json", "--out",
                      output("cli_never.csv")});
  CHECK(r.code == kExitInputError);
  CHECK(r.err.find("lamps") != std::string::npos);
}

TEST_CASE("malformed scenario exits 1 with a line diagnostic") {
  const auto r = run({"simulate", "--scenario",
                      std::string(LIGHTPOS_TEST_DATA_DIR) + "/malformed.json", "--out",
                      output("cli_never.csv")});
  CHECK(r.code == kExitInputError);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({"teleport"}).code == kExitInputError);
  CHECK(run({}).code == kExitInputError);
  CHECK(run({"simulate", "--scenario", fixture("empty_room.json")}).code == kExitInputError);
  CHECK(run({"simulate", "--scenario", fixture("empty_room.json"), "--out", output("x.csv"),
             "--mode", "slow"})
            .code == kExitInputError);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("version flag") {
  const auto r = run({"--version"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find(kToolVersion) != std::string::npos);
}

TEST_CASE("solve the independent triple") {
  const auto r = run({"solve", "--input", fixture("solve_independent.json")});
  CHECK(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["status"] == "unique");
  CHECK(doc["point"][0].get<double>() == doctest::Approx(10.0));
  CHECK(doc["point"][2].get<double>() == doctest::Approx(10.0));
}

TEST_CASE("solve the degenerate triple exits 2") {
  const auto r = run({"solve", "--input", fixture("solve_degenerate.json")});
  CHECK(r.code == kExitSolverFailure);
  CHECK(nlohmann::json::parse(r.out)["status"] == "degenerate");
}

TEST_CASE("trilaterate") {
  const auto ok = run({"trilaterate", "--input", fixture("trilaterate_triple.json")});
  CHECK(ok.code == kExitOk);
  const auto doc = nlohmann::json::parse(ok.out);
  CHECK(doc["point"][0].get<double>() == doctest::Approx(2.3));
  CHECK(doc["point"][1].get<double>() == doctest::Approx(1.7));
  const auto bad = run({"trilaterate", "--input", fixture("trilaterate_collinear.json")});
  CHECK(bad.code == kExitSolverFailure);
}

TEST_CASE("calibrate") {
  const auto r = run({"calibrate", "--input", fixture("calibrate.json")});
  CHECK(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["heading_deg"].get<double>() == doctest::Approx(45.0).epsilon(1e-6));
}

TEST_CASE("coverage with greedy placement") {
  const auto r = run({"coverage", "--scenario", fixture("two_room_gate.json"), "--greedy"});
  CHECK(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.contains("ratio"));
  CHECK(doc["ratio"].get<double>() >= 5.0);
}

TEST_CASE("sensitivity writes a table") {
  const auto r = run({"sensitivity", "--scenario", fixture("office.json"), "--eps", "0,0.1",
                      "--heading-eps", "0,5", "--trials", "2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.rfind("rss_epsilon,heading_epsilon_deg,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
}

TEST_CASE("signal extracts tones") {
  const auto r = run({"signal", "--component", "65:100:ook", "--component", "0:850:dc",
                      "--candidates", "65", "--duration", "1"});
  CHECK(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.dump().find("65") != std::string::npos);
  CHECK(run({"signal", "--component", "400:1:sine", "--candidates", "65"}).code ==
        kExitInputError);
}
