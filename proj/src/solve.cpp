#include "lightpos/solve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "detail/levenberg_marquardt.hpp"
#include "lightpos/errors.hpp"

namespace lightpos {

namespace {

struct ModelValue {
  double s = 0.0;
  Vec3 grad = Vec3::Zero();  // d s / d X
};

/// k (n . Y) f(omega) / |Y|^3 with Y = X - offset, cos(omega) = Y_z / |Y|.
/// Negative behind the oriented plane.
ModelValue model_with_gradient(const Vec3& normal, const Vec3& offset, const Vec3& x,
                               double k, const EmissionProfile& profile) {
  ModelValue out;
  const Vec3 y = x - offset;
  const double d = y.norm();
  if (!(d > 0.0) || !(y.z() > 0.0)) return out;
  const double a = normal.dot(y);
  const double c = std::min(y.z() / d, 1.0);
  const double omega = std::acos(c);
  const double f = profile(omega);
  const double d3 = d * d * d;

  // df/dcos(omega) = -f'(omega) / sin(omega); finite at omega = 0 for cosine powers.
  const double sin_omega = std::sqrt(std::max(0.0, 1.0 - c * c));
  double df_dcos = 0.0;
  if (profile.kind() == EmissionProfile::Kind::cosine_power) {
    df_dcos = profile.gamma() * std::pow(c, profile.gamma() - 1.0);
  } else {
    df_dcos = -profile.derivative(omega) / std::max(sin_omega, 1e-9);
  }
  const Vec3 dcos_dy = Vec3::UnitZ() / d - (y.z() / d3) * y;

  out.s = k * a * f / d3;
  out.grad = k * (f / d3 * normal + a / d3 * df_dcos * dcos_dy - 3.0 * a * f / (d3 * d * d) * y);
  return out;
}

std::vector<std::size_t> order_by_strength(std::span<const Reading> readings) {
  std::vector<std::size_t> idx(readings.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return readings[a].s > readings[b].s; });
  return idx;
}

std::optional<std::array<std::size_t, 3>> strongest_independent_triple(
    std::span<const Reading> readings, double tol) {
  const auto idx = order_by_strength(readings);
  const std::size_t n = idx.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t l = j + 1; l < n; ++l) {
        if (linearly_independent(readings[idx[i]].plane, readings[idx[j]].plane,
                                 readings[idx[l]].plane, tol)) {
          return std::array{idx[i], idx[j], idx[l]};
        }
      }
    }
  }
  return std::nullopt;
}

/// With the direction w fixed, s_i = (k f(omega) / d^2) (n_i . w); the range
/// follows from a least-squares fit of that proportionality.
double range_along(const Vec3& w, std::span<const Reading> readings, double k,
                   const EmissionProfile& profile) {
  const double f = profile(std::acos(std::clamp(w.z(), -1.0, 1.0)));
  double num = 0.0, den = 0.0;
  for (const auto& r : readings) {
    const double a = r.plane.normal().dot(w);
    num += r.s * a;
    den += a * a;
  }
  if (!(num > 0.0) || !(f > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(k * f * den / num);
}

double relative_rms(std::span<const Reading> readings, const Vec3& x, double k,
                    const EmissionProfile& profile) {
  double acc = 0.0;
  for (const auto& r : readings) {
    const double e = (model_rss(r, x, k, profile) - r.s) / r.s;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(readings.size()));
}

void require_positive(std::span<const Reading> readings) {
  for (const auto& r : readings) {
    if (!(r.s > 0.0) || !std::isfinite(r.s)) {
      throw InputError("readings must be positive and finite");
    }
  }
}

/// Direction from the linear relation n_i . X proportional to s_i, used when
/// the closed form is unavailable (noisy triple outside the domain).
Vec3 pseudo_inverse_seed(std::span<const Reading> readings, double k,
                         const EmissionProfile& profile) {
  Eigen::MatrixXd n(static_cast<Eigen::Index>(readings.size()), 3);
  Eigen::VectorXd s(n.rows());
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    n.row(i) = readings[i].plane.normal().transpose();
    s[i] = readings[i].s;
  }
  Vec3 w = n.colPivHouseholderQr().solve(s);
  if (!(w.norm() > 0.0)) w = Vec3::UnitZ();
  w.normalize();
  if (w.z() < 0.05) {
    w.z() = 0.05;
    w.normalize();
  }
  double d = range_along(w, readings, k, profile);
  if (!std::isfinite(d)) d = 1.0;
  return d * w;
}

detail::LmOptions lm_options(const SolverOptions& o) {
  detail::LmOptions lm;
  lm.max_iterations = o.max_iterations;
  lm.step_tolerance = o.step_tolerance;
  lm.initial_damping = o.initial_damping;
  return lm;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::unique:
      return "unique";
    case SolveStatus::degenerate:
      return "degenerate";
    case SolveStatus::no_converge:
      return "no_converge";
  }
  return "unknown";
}

double model_rss(const Reading& reading, const Vec3& x_solve, double k,
                 const EmissionProfile& profile) {
  return model_with_gradient(reading.plane.normal(), reading.offset, x_solve, k, profile).s;
}

SolveResult mflp_closed_form(const Reading& r1, const Reading& r2, const Reading& r3,
                             double k, const EmissionProfile& profile,
                             double independence_tol) {
  const std::array<Reading, 3> rs{r1, r2, r3};
  require_positive(rs);
  SolveResult out;
  if (!linearly_independent(r1.plane, r2.plane, r3.plane, independence_tol)) {
    out.status = SolveStatus::degenerate;
    return out;
  }

  // (n1/s1 - n2/s2) . X = 0 and (n1/s1 - n3/s3) . X = 0.
  const Vec3 q1 = r1.plane.normal() / r1.s;
  const Vec3 row_a = q1 - r2.plane.normal() / r2.s;
  const Vec3 row_b = q1 - r3.plane.normal() / r3.s;
  Vec3 w = row_a.cross(row_b);
  const double wn = w.norm();
  if (!(wn > 1e-300) || !std::isfinite(wn)) {
    out.status = SolveStatus::degenerate;
    return out;
  }
  w /= wn;
  if (w.z() < 0.0) w = -w;
  if (!(w.z() > 0.0)) throw NumericalError("closed form: solution has z <= 0");
  for (const auto& r : rs) {
    if (!(r.plane.normal().dot(w) > 0.0)) {
      throw NumericalError("closed form: a sensing plane faces away from the solution");
    }
  }
  const double d = range_along(w, rs, k, profile);
  if (!std::isfinite(d)) throw NumericalError("closed form: emission profile vanishes");

  out.point = d * w;
  out.status = SolveStatus::unique;
  out.residual_rms = relative_rms(rs, out.point, k, profile);
  return out;
}

SolveResult mflp_least_squares(std::span<const Reading> readings, double k,
                               const EmissionProfile& profile, std::optional<Vec3> init,
                               const SolverOptions& options) {
  if (readings.size() < 3) throw InputError("least squares needs at least three readings");
  require_positive(readings);

  SolveResult out;
  const auto triple = strongest_independent_triple(readings, options.independence_tol);
  if (!triple) {
    out.status = SolveStatus::degenerate;
    return out;
  }

  Vec3 seed;
  if (init) {
    seed = *init;
  } else {
    try {
      const auto cf = mflp_closed_form(readings[(*triple)[0]], readings[(*triple)[1]],
                                       readings[(*triple)[2]], k, profile,
                                       options.independence_tol);
      seed = cf.point;
    } catch (const NumericalError&) {
      seed = pseudo_inverse_seed(readings, k, profile);
    }
  }
  if (!(seed.z() > 0.0)) throw InputError("initial point must have z > 0");

  const auto m = static_cast<Eigen::Index>(readings.size());
  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double z = std::exp(p[2]);
    const Vec3 x(p[0], p[1], z);
    if (!x.allFinite()) return false;
    r.resize(m);
    jac.resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& rd = readings[i];
      const auto mv = model_with_gradient(rd.plane.normal(), rd.offset, x, k, profile);
      r[i] = (mv.s - rd.s) / rd.s;
      jac(i, 0) = mv.grad.x() / rd.s;
      jac(i, 1) = mv.grad.y() / rd.s;
      jac(i, 2) = mv.grad.z() * z / rd.s;
    }
    return true;
  };
  Eigen::VectorXd p0(3);
  p0 << seed.x(), seed.y(), std::log(seed.z());
  const auto res = detail::levenberg_marquardt(model, p0, lm_options(options));

  out.point = Vec3(res.params[0], res.params[1], std::exp(res.params[2]));
  out.residual_rms = std::sqrt(res.cost / static_cast<double>(m));
  out.iterations = res.iterations;
  out.status = res.converged ? SolveStatus::unique : SolveStatus::no_converge;
  return out;
}

std::vector<Reading> select_readings(std::span<const LampSighting> sightings, int m) {
  if (m < 3) throw InputError("at least three readings must be selected");

  struct Kept {
    std::vector<Reading> top;  // at most three, descending
    double mean = 0.0;
  };
  std::vector<Kept> kept;
  for (const auto& sighting : sightings) {
    std::vector<Reading> rs;
    for (const auto& r : sighting.readings) {
      if (r.s > 0.0 && std::isfinite(r.s)) rs.push_back(r);
    }
    std::stable_sort(rs.begin(), rs.end(),
                     [](const Reading& a, const Reading& b) { return a.s > b.s; });
    if (rs.empty()) continue;
    const double floor = kRssFloorFraction * rs.front().s;
    std::erase_if(rs, [&](const Reading& r) { return r.s < floor; });
    if (rs.size() > 3) rs.resize(3);
    Kept k;
    k.mean = std::accumulate(rs.begin(), rs.end(), 0.0,
                             [](double acc, const Reading& r) { return acc + r.s; }) /
             static_cast<double>(rs.size());
    k.top = std::move(rs);
    kept.push_back(std::move(k));
  }

  const bool any_triple =
      std::any_of(kept.begin(), kept.end(), [](const Kept& k) { return k.top.size() == 3; });
  if (!any_triple) throw InputError("no lamp has three readings above the RSS floor");

  if (m == 3) {
    const Kept* best = nullptr;
    for (const auto& k : kept) {
      if (k.top.size() == 3 && (!best || k.mean > best->mean)) best = &k;
    }
    return best->top;
  }

  std::vector<Reading> pool;
  for (const auto& k : kept) pool.insert(pool.end(), k.top.begin(), k.top.end());
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Reading& a, const Reading& b) { return a.s > b.s; });
  if (static_cast<int>(pool.size()) > m) pool.resize(static_cast<std::size_t>(m));
  return pool;
}

Vec3 to_world_position(const LampModel& lamp, const Vec3& x_solve) {
  return lamp.position - solve_frame_basis(lamp.central_ray) * x_solve;
}

SolveResult solve_multi(std::span<const Reading> readings, std::span<const LampModel> lamps,
                        const SolverOptions& options) {
  if (readings.size() < 3) throw InputError("joint solve needs at least three readings");
  require_positive(readings);

  std::map<int, std::vector<Reading>> by_lamp;
  for (const auto& r : readings) {
    if (r.lamp_id < 0 || r.lamp_id >= static_cast<int>(lamps.size())) {
      throw InputError("reading references unknown lamp " + std::to_string(r.lamp_id));
    }
    by_lamp[r.lamp_id].push_back(r);
  }

  if (by_lamp.size() == 1) {
    const auto& lamp = lamps[static_cast<std::size_t>(by_lamp.begin()->first)];
    auto res = mflp_least_squares(readings, lamp.k, lamp.profile, std::nullopt, options);
    if (res.status != SolveStatus::degenerate) res.point = to_world_position(lamp, res.point);
    return res;
  }

  // Seed from the lamp with the strongest usable triple.
  std::optional<Vec3> seed;
  double best_mean = -1.0;
  for (const auto& [id, rs] : by_lamp) {
    if (rs.size() < 3) continue;
    const auto& lamp = lamps[static_cast<std::size_t>(id)];
    auto sorted = rs;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Reading& a, const Reading& b) { return a.s > b.s; });
    const double mean = (sorted[0].s + sorted[1].s + sorted[2].s) / 3.0;
    if (mean <= best_mean) continue;
    const auto single = mflp_least_squares(rs, lamp.k, lamp.profile, std::nullopt, options);
    if (single.status == SolveStatus::degenerate) continue;
    seed = to_world_position(lamp, single.point);
    best_mean = mean;
  }
  SolveResult out;
  if (!seed) {
    out.status = SolveStatus::degenerate;
    return out;
  }

  std::vector<Rotation3> bases(lamps.size());
  for (std::size_t i = 0; i < lamps.size(); ++i) {
    bases[i] = solve_frame_basis(lamps[i].central_ray);
  }
  const auto m = static_cast<Eigen::Index>(readings.size());
  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const Vec3 pos(p[0], p[1], p[2]);
    if (!pos.allFinite()) return false;
    r.resize(m);
    jac.resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& rd = readings[i];
      const auto lamp_index = static_cast<std::size_t>(rd.lamp_id);
      const auto& lamp = lamps[lamp_index];
      const Vec3 x = bases[lamp_index].transpose() * (lamp.position - pos);
      const auto mv = model_with_gradient(rd.plane.normal(), rd.offset, x, lamp.k, lamp.profile);
      r[i] = (mv.s - rd.s) / rd.s;
      jac.row(i) = -(bases[lamp_index] * mv.grad).transpose() / rd.s;
    }
    return true;
  };
  Eigen::VectorXd p0 = *seed;
  const auto res = detail::levenberg_marquardt(model, p0, lm_options(options));
  out.point = res.params;
  out.residual_rms = std::sqrt(res.cost / static_cast<double>(m));
  out.iterations = res.iterations;
  out.status = res.converged ? SolveStatus::unique : SolveStatus::no_converge;
  return out;
}

namespace {

/// Range d at which a horizontal face at depth h below a downward lamp reads s.
double invert_range(double s, double h, double k, const EmissionProfile& profile) {
  auto reading = [&](double d) { return k * h * profile(std::acos(h / d)) / (d * d * d); };
  double lo = h, hi = h;
  if (s >= reading(lo)) return lo;
  do {
    hi *= 2.0;
  } while (reading(hi) > s && hi < 1e6 * h);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (reading(mid) > s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SolveResult trilaterate(std::span<const Vec3> lamp_positions, double k,
                        const EmissionProfile& profile, std::span<const double> s,
                        std::optional<double> z_receiver, const SolverOptions& options) {
  if (lamp_positions.size() != s.size()) {
    throw InputError("one reading per lamp is required");
  }
  std::vector<Vec3> lamps;
  std::vector<double> obs;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > 0.0 && std::isfinite(s[i])) {
      lamps.push_back(lamp_positions[i]);
      obs.push_back(s[i]);
    }
  }
  if (lamps.size() < 3) throw InputError("trilateration needs three positive readings");

  SolveResult out;
  double scale = 1.0;
  for (const auto& p : lamps) scale = std::max(scale, (p - lamps[0]).norm());
  double best_area = 0.0;
  for (std::size_t i = 0; i < lamps.size(); ++i) {
    for (std::size_t j = i + 1; j < lamps.size(); ++j) {
      for (std::size_t l = j + 1; l < lamps.size(); ++l) {
        best_area = std::max(best_area,
                             0.5 * (lamps[j] - lamps[i]).cross(lamps[l] - lamps[i]).norm());
      }
    }
  }
  if (best_area <= 1e-9 * scale * scale) {
    out.status = SolveStatus::degenerate;
    return out;
  }

  const auto n = static_cast<Eigen::Index>(lamps.size());
  const Vec3 up = Vec3::UnitZ();
  const double top = std::min_element(lamps.begin(), lamps.end(), [](const Vec3& a, const Vec3& b) {
                       return a.z() < b.z();
                     })->z();

  auto cost_at = [&](const Vec3& pos) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = model_with_gradient(up, Vec3::Zero(), lamps[i] - pos, k, profile).s;
      const double e = (m - obs[i]) / obs[i];
      acc += e * e;
    }
    return acc;
  };

  // Seed: at a trial height, invert each reading to a range, then difference
  // pairs of sphere equations to get a linear system in (x, y).
  auto planar_seed = [&](double z) {
    Eigen::VectorXd r2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = lamps[i].z() - z;
      const double d = invert_range(obs[i], h, k, profile);
      r2[i] = d * d - h * h;
    }
    Eigen::MatrixXd a(n - 1, 2);
    Eigen::VectorXd b(n - 1);
    for (Eigen::Index i = 1; i < n; ++i) {
      a(i - 1, 0) = 2.0 * (lamps[i].x() - lamps[0].x());
      a(i - 1, 1) = 2.0 * (lamps[i].y() - lamps[0].y());
      b[i - 1] = r2[0] - r2[i] + lamps[i].head<2>().squaredNorm() -
                 lamps[0].head<2>().squaredNorm();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::Vector2d xy;
    if (qr.rank() < 2) {
      xy.setZero();
      for (const auto& p : lamps) xy += p.head<2>();
      xy /= static_cast<double>(n);
    } else {
      xy = qr.solve(b);
    }
    return Vec3(xy.x(), xy.y(), z);
  };

  Vec3 seed;
  if (z_receiver) {
    if (!(*z_receiver < top)) throw InputError("receiver must lie below every lamp");
    seed = planar_seed(*z_receiver);
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 60; ++i) {
      const double depth = 0.1 * std::pow(1.1, i);
      const Vec3 cand = planar_seed(top - depth);
      const double c = cost_at(cand);
      if (c < best) {
        best = c;
        seed = cand;
      }
    }
  }

  const Eigen::Index dims = z_receiver ? 2 : 3;
  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const Vec3 pos(p[0], p[1], z_receiver ? *z_receiver : p[2]);
    if (!pos.allFinite()) return false;
    r.resize(n);
    jac.resize(n, dims);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto mv = model_with_gradient(up, Vec3::Zero(), lamps[i] - pos, k, profile);
      r[i] = (mv.s - obs[i]) / obs[i];
      for (Eigen::Index c = 0; c < dims; ++c) jac(i, c) = -mv.grad[c] / obs[i];
    }
    return true;
  };
  Eigen::VectorXd p0 = seed.head(dims);
  const auto res = detail::levenberg_marquardt(model, p0, lm_options(options));
  out.point = Vec3(res.params[0], res.params[1], z_receiver ? *z_receiver : res.params[2]);
  out.residual_rms = std::sqrt(res.cost / static_cast<double>(n));
  out.iterations = res.iterations;
  out.status = res.converged ? SolveStatus::unique : SolveStatus::no_converge;
  return out;
}

}  // namespace lightpos
