#include "lightpos/rss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "detail/levenberg_marquardt.hpp"
#include "lightpos/errors.hpp"

namespace lightpos {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr int kProfileGrid = 1024;

struct IncidenceGeometry {
  double d = 0.0;
  double projected = 0.0;  // n . (X_lamp - X_face), n normalized
  double omega = 0.0;
};

IncidenceGeometry incidence(const Vec3& lamp_pos, const Vec3& central_ray,
                            const Vec3& face_center, const Vec3& face_normal) {
  const Vec3 v = lamp_pos - face_center;
  IncidenceGeometry g;
  g.d = v.norm();
  if (!(g.d > 0.0)) throw InputError("face center coincides with the lamp");
  const double nn = face_normal.norm();
  if (!(nn > 0.0)) throw InputError("face normal must be non-zero");
  g.projected = face_normal.dot(v) / nn;
  const double cos_omega =
      std::clamp(-central_ray.dot(v) / (central_ray.norm() * g.d), -1.0, 1.0);
  g.omega = std::acos(cos_omega);
  return g;
}

}  // namespace

EmissionProfile EmissionProfile::cosine_power(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("cosine-power exponent must be positive");
  }
  EmissionProfile p;
  p.kind_ = Kind::cosine_power;
  p.gamma_ = gamma;
  p.validate();
  return p;
}

EmissionProfile EmissionProfile::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw InputError("polynomial profile needs coefficients");
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw InputError("polynomial coefficients must be finite");
  }
  EmissionProfile p;
  p.kind_ = Kind::polynomial;
  p.coeffs_ = std::move(coefficients);
  p.validate();
  return p;
}

double EmissionProfile::operator()(double omega) const {
  if (kind_ == Kind::cosine_power) {
    return std::pow(std::max(std::cos(omega), 0.0), gamma_);
  }
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * omega + *it;
  return acc;
}

double EmissionProfile::derivative(double omega) const {
  if (kind_ == Kind::cosine_power) {
    const double c = std::max(std::cos(omega), 0.0);
    if (c == 0.0) return 0.0;
    return -gamma_ * std::pow(c, gamma_ - 1.0) * std::sin(omega);
  }
  double acc = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * omega + i * coeffs_[i];
  return acc;
}

void EmissionProfile::validate() const {
  double prev = (*this)(0.0);
  if (!(prev > 0.0)) {
    throw InputError("emission profile must be positive at omega = 0");
  }
  for (int j = 1; j < kProfileGrid; ++j) {
    const double w = kHalfPi * j / (kProfileGrid - 1);
    const double f = (*this)(w);
    if (!(f < prev) || f < 0.0) {
      std::ostringstream msg;
      msg << "emission profile is not strictly decreasing and non-negative on "
             "[0, pi/2]: first violation at grid point "
          << j << " (omega = " << w << ", f = " << f << ")";
      throw InputError(msg.str());
    }
    prev = f;
  }
}

double eval_rss(const LampModel& lamp, const Vec3& face_center,
                const Vec3& face_normal) {
  const auto g = incidence(lamp.position, lamp.central_ray, face_center, face_normal);
  if (g.omega >= kHalfPi) return 0.0;
  return lamp.k / (g.d * g.d * g.d) * std::abs(g.projected) * lamp.profile(g.omega);
}

double eval_face_rss(const LampModel& lamp, const Vec3& face_center,
                     const Vec3& face_normal) {
  const auto g = incidence(lamp.position, lamp.central_ray, face_center, face_normal);
  if (g.omega >= kHalfPi || g.projected <= 0.0) return 0.0;
  return lamp.k / (g.d * g.d * g.d) * g.projected * lamp.profile(g.omega);
}

LampFit fit_lamp_model(std::span<const RssSample> samples, const LampPose& pose,
                       EmissionProfile::Kind kind, int degree) {
  const bool cosine = kind == EmissionProfile::Kind::cosine_power;
  if (!cosine && degree < 1) throw InputError("polynomial degree must be >= 1");
  const int unknowns = cosine ? 2 : degree + 1;
  if (static_cast<int>(samples.size()) < unknowns + 1) {
    throw InputError("insufficient samples: need at least " +
                     std::to_string(unknowns + 1) + ", got " +
                     std::to_string(samples.size()));
  }

  const auto m = static_cast<Eigen::Index>(samples.size());
  Eigen::VectorXd log_geom(m), omega(m), log_s(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& smp = samples[j];
    if (!(smp.s > 0.0)) throw InputError("sample amplitudes must be positive");
    const auto g = incidence(pose.position, pose.central_ray, smp.face_center,
                             smp.face_normal);
    if (g.omega >= kHalfPi || std::abs(g.projected) == 0.0) {
      throw InputError("sample lies outside the lamp's illuminated half-space");
    }
    log_geom[j] = std::log(std::abs(g.projected) / (g.d * g.d * g.d));
    omega[j] = g.omega;
    log_s[j] = std::log(smp.s);
  }

  LampFit fit;
  if (cosine) {
    Eigen::MatrixXd a(m, 2);
    a.col(0).setOnes();
    a.col(1) = omega.array().cos().log();
    const Eigen::VectorXd y = log_s - log_geom;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 2) {
      throw InputError("rank-deficient samples: need at least two distinct emission angles");
    }
    const Eigen::VectorXd beta = qr.solve(y);
    fit.k = std::exp(beta[0]);
    try {
      fit.profile = EmissionProfile::cosine_power(beta[1]);
    } catch (const InputError& e) {
      throw NumericalError(std::string("fitted profile is invalid: ") + e.what());
    }
    fit.rms_log_residual = std::sqrt((a * beta - y).squaredNorm() / m);
    return fit;
  }

  // Linear seed on s / geom = k + (k c1) w + ... + (k cn) w^n.
  Eigen::MatrixXd vander(m, unknowns);
  for (Eigen::Index j = 0; j < m; ++j) {
    double p = 1.0;
    for (int i = 0; i < unknowns; ++i, p *= omega[j]) vander(j, i) = p;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
  if (qr.rank() < unknowns) {
    throw InputError("rank-deficient samples: too few distinct emission angles for degree " +
                     std::to_string(degree));
  }
  const Eigen::VectorXd ratio = (log_s - log_geom).array().exp().matrix();
  const Eigen::VectorXd beta = qr.solve(ratio);
  if (!(beta[0] > 0.0)) throw NumericalError("polynomial seed has non-positive intercept");

  Eigen::VectorXd p0(unknowns);
  p0[0] = std::log(beta[0]);
  for (int i = 1; i < unknowns; ++i) p0[i] = beta[i] / beta[0];

  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    r.resize(m);
    jac.resize(m, unknowns);
    for (Eigen::Index j = 0; j < m; ++j) {
      double poly = 1.0, pw = 1.0;
      for (int i = 1; i < unknowns; ++i) {
        pw *= omega[j];
        poly += p[i] * pw;
      }
      if (!(poly > 0.0)) return false;
      r[j] = p[0] + log_geom[j] + std::log(poly) - log_s[j];
      jac(j, 0) = 1.0;
      pw = 1.0;
      for (int i = 1; i < unknowns; ++i) {
        pw *= omega[j];
        jac(j, i) = pw / poly;
      }
    }
    return true;
  };
  detail::LmOptions opt;
  opt.max_iterations = 200;
  opt.step_tolerance = 1e-13;
  const auto res = detail::levenberg_marquardt(model, p0, opt);
  if (!std::isfinite(res.cost)) throw NumericalError("polynomial fit left the model domain");

  std::vector<double> coeffs(unknowns);
  coeffs[0] = 1.0;
  for (int i = 1; i < unknowns; ++i) coeffs[i] = res.params[i];
  fit.k = std::exp(res.params[0]);
  try {
    fit.profile = EmissionProfile::polynomial(std::move(coeffs));
  } catch (const InputError& e) {
    throw NumericalError(std::string("fitted profile violates monotonicity: ") + e.what());
  }
  fit.rms_log_residual = std::sqrt(res.cost / m);
  return fit;
}

}  // namespace lightpos
