#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "io/json_emit.hpp"
#include "lightpos/io.hpp"

namespace lightpos {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace detail {

namespace {

void emit(const nlohmann::json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann's default object is an ordered std::map, so keys come out sorted.
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + nlohmann::json(it.key()).dump() + ": ";
        emit(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        emit(v[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_number(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string stable_dump(const nlohmann::json& value) {
  std::string out;
  emit(value, 0, out);
  out += "\n";
  return out;
}

}  // namespace detail

namespace {

void append_vec(std::string& row, const Vec3& v) {
  row += format_number(v.x()) + "," + format_number(v.y()) + "," + format_number(v.z());
}

void append_fix(std::string& row, const Fix& f) {
  append_vec(row, f.truth);
  row += ",";
  if (f.outcome == FixOutcome::ok) {
    append_vec(row, f.estimate);
    row += "," + format_number(f.error);
  } else {
    row += ",,,";
  }
  row += ",";
  row += to_string(f.outcome);
}

constexpr const char* kFixColumns = "true_x,true_y,true_z,est_x,est_y,est_z,error,outcome";

}  // namespace

std::string fixes_csv(std::span<const Fix> fixes) {
  std::string out = std::string("index,") + kFixColumns + "\n";
  for (std::size_t i = 0; i < fixes.size(); ++i) {
    std::string row = std::to_string(i) + ",";
    append_fix(row, fixes[i]);
    out += row + "\n";
  }
  return out;
}

std::string track_csv(std::span<const TrackFix> track) {
  std::string out = std::string("index,time,") + kFixColumns + "\n";
  for (std::size_t i = 0; i < track.size(); ++i) {
    std::string row = std::to_string(i) + "," + format_number(track[i].time) + ",";
    append_fix(row, track[i].fix);
    out += row + "\n";
  }
  return out;
}

std::string stats_csv(const ErrorStats& s) {
  return "median,mean,max,stdev,count\n" + format_number(s.median) + "," +
         format_number(s.mean) + "," + format_number(s.max) + "," + format_number(s.stdev) + "," +
         std::to_string(s.count) + "\n";
}

std::string sensitivity_csv(const SensitivityTable& table) {
  std::string out = "rss_epsilon,heading_epsilon_deg,median,mean,max,stdev,count,failures\n";
  for (const auto& c : table.cells) {
    out += format_number(c.rss_epsilon) + "," +
           format_number(c.heading_epsilon * 180.0 / std::numbers::pi) + "," +
           format_number(c.stats.median) + "," + format_number(c.stats.mean) + "," +
           format_number(c.stats.max) + "," + format_number(c.stats.stdev) + "," +
           std::to_string(c.stats.count) + "," + std::to_string(c.failures) + "\n";
  }
  return out;
}

std::string stats_sidecar(const ReportEnvelope& env, const ErrorStats& stats,
                          std::size_t failures) {
  nlohmann::json doc;
  nlohmann::json e;
  e["version"] = env.version;
  e["scenario_digest"] = env.scenario_digest;
  e["seed"] = env.seed;
  e["payload"] = env.payload;
  if (env.timestamp) e["timestamp"] = *env.timestamp;
  doc["envelope"] = e;
  doc["stats"] = {{"count", stats.count},
                  {"median", stats.median},
                  {"mean", stats.mean},
                  {"max", stats.max},
                  {"stdev", stats.stdev}};
  doc["failures"] = failures;
  return detail::stable_dump(doc);
}

}  // namespace lightpos
