#include "lightpos/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lightpos/errors.hpp"
#include "lightpos/rng.hpp"

namespace lightpos {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double component_value(const WaveComponent& c, double t) {
  switch (c.shape) {
    case WaveShape::dc:
      return c.peak;
    case WaveShape::sine:
      return c.peak * std::sin(kTwoPi * c.freq_hz * t);
    case WaveShape::square_ook: {
      const double phase = c.freq_hz * t;
      return (phase - std::floor(phase)) < 0.5 ? c.peak : 0.0;
    }
  }
  return 0.0;
}

/// |sum_n (x[n] - mean) e^{-j w n}| over the first `count` samples.
double goertzel_magnitude(std::span<const double> x, std::size_t count, double freq_hz,
                          double rate_hz) {
  double mean = 0.0;
  for (std::size_t n = 0; n < count; ++n) mean += x[n];
  mean /= static_cast<double>(count);

  const double w = kTwoPi * freq_hz / rate_hz;
  const double coeff = 2.0 * std::cos(w);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    const double s0 = (x[n] - mean) + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  const double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
  return std::sqrt(std::max(power, 0.0));
}

}  // namespace

SampleTrace synthesize_trace(std::span<const WaveComponent> components, double rate_hz,
                             double duration_s, double gaussian_noise_sd,
                             std::uint64_t seed) {
  if (!(rate_hz > 0.0)) throw InputError("sample rate must be positive");
  if (!(duration_s > 0.0)) throw InputError("duration must be positive");
  if (gaussian_noise_sd < 0.0) throw InputError("noise sd must be non-negative");
  for (const auto& c : components) {
    if ((c.shape == WaveShape::dc) != (c.freq_hz == 0.0)) {
      throw InputError("only dc components may have zero frequency");
    }
    if (c.freq_hz < 0.0 || c.peak < 0.0) {
      throw InputError("component frequency and peak must be non-negative");
    }
    if (!(rate_hz > 2.0 * c.freq_hz)) {
      throw InputError("sample rate violates Nyquist for a " + std::to_string(c.freq_hz) +
                       " Hz component");
    }
  }
  const auto count = static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9));
  if (count < 2) throw InputError("trace must hold at least two samples");

  SampleTrace trace;
  trace.rate_hz = rate_hz;
  trace.samples.resize(count);
  Rng rng(seed);
  for (std::size_t n = 0; n < count; ++n) {
    const double t = static_cast<double>(n) / rate_hz;
    double v = 0.0;
    for (const auto& c : components) v += component_value(c, t);
    if (gaussian_noise_sd > 0.0) v += gaussian_noise_sd * rng.normal();
    trace.samples[n] = v;
  }
  return trace;
}

double extract_amplitude(const SampleTrace& trace, double freq_hz) {
  if (!(freq_hz > 0.0) || !(freq_hz < trace.rate_hz / 2.0)) {
    throw InputError("frequency must lie in (0, rate/2)");
  }
  const double n = static_cast<double>(trace.samples.size());
  const double periods = std::floor(n * freq_hz / trace.rate_hz + 1e-9);
  if (periods < 1.0) throw InputError("window is shorter than one period");
  const auto count = std::min(
      trace.samples.size(),
      static_cast<std::size_t>(std::llround(periods * trace.rate_hz / freq_hz)));
  return 2.0 * goertzel_magnitude(trace.samples, count, freq_hz, trace.rate_hz) /
         static_cast<double>(count);
}

std::vector<PeakReading> identify_lamps(const SampleTrace& trace,
                                        std::span<const double> candidates_hz) {
  const std::size_t n = trace.samples.size();
  const double resolution = trace.rate_hz / static_cast<double>(n);
  for (std::size_t i = 0; i < candidates_hz.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates_hz.size(); ++j) {
      if (!(std::abs(candidates_hz[i] - candidates_hz[j]) > resolution)) {
        throw InputError("candidate frequencies closer than the window resolution of " +
                         std::to_string(resolution) + " Hz");
      }
    }
  }

  std::vector<double> off_bins;
  for (std::size_t k = 1; 2 * k < n; ++k) {
    const double f = static_cast<double>(k) * resolution;
    const bool near_candidate = std::any_of(
        candidates_hz.begin(), candidates_hz.end(),
        [&](double c) { return std::abs(f - c) <= resolution; });
    if (near_candidate) continue;
    off_bins.push_back(2.0 * goertzel_magnitude(trace.samples, n, f, trace.rate_hz) /
                       static_cast<double>(n));
  }
  double floor = 0.0;
  if (!off_bins.empty()) {
    auto mid = off_bins.begin() + static_cast<std::ptrdiff_t>(off_bins.size() / 2);
    std::nth_element(off_bins.begin(), mid, off_bins.end());
    floor = kNoiseFloorFactor * *mid;
  }

  std::vector<PeakReading> out;
  out.reserve(candidates_hz.size());
  for (double f : candidates_hz) {
    double a = extract_amplitude(trace, f);
    if (a < floor) a = 0.0;
    out.push_back({f, a});
  }
  return out;
}

}  // namespace lightpos
