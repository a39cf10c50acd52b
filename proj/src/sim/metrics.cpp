#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lightpos/errors.hpp"
#include "lightpos/sim.hpp"

namespace lightpos {

ErrorStats compute_stats(std::span<const double> errors) {
  ErrorStats st;
  st.count = errors.size();
  if (errors.empty()) return st;
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  st.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  st.max = sorted.back();
  // Summation in input order keeps results independent of how the caller sorted.
  double sum = 0.0;
  for (double e : errors) sum += e;
  st.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double e : errors) ss += (e - st.mean) * (e - st.mean);
    st.stdev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return st;
}

double lateral_deviation(std::span<const Vec3> waypoints, const Vec3& p) {
  if (waypoints.empty()) throw InputError("lateral deviation needs at least one waypoint");
  const Eigen::Vector2d q = p.head<2>();
  if (waypoints.size() == 1) return (q - waypoints[0].head<2>()).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Eigen::Vector2d a = waypoints[i].head<2>();
    const Eigen::Vector2d b = waypoints[i + 1].head<2>();
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (q - (a + t * ab)).norm());
  }
  return best;
}

double oscillation_distance(std::span<const Vec3> fixes) {
  if (fixes.size() < 2) throw InputError("oscillation distance needs at least two fixes");
  Vec3 centroid = Vec3::Zero();
  for (const auto& f : fixes) centroid += f;
  centroid /= static_cast<double>(fixes.size());
  double sum = 0.0;
  for (const auto& f : fixes) sum += (f - centroid).norm();
  return sum / static_cast<double>(fixes.size());
}

}  // namespace lightpos
