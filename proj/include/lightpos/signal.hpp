#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lightpos {

enum class WaveShape { square_ook, sine, dc };

struct WaveComponent {
  double freq_hz = 0.0;
  double peak = 0.0;
  WaveShape shape = WaveShape::dc;
};

struct SampleTrace {
  double rate_hz = 0.0;
  std::vector<double> samples;
};

struct PeakReading {
  double freq_hz = 0.0;
  double amplitude = 0.0;
};

/// Sensor sampling rate and window used by the receiver pipeline.
inline constexpr double kDefaultSampleRateHz = 640.0;
inline constexpr double kDefaultWindowSeconds = 0.3;
/// Readings under this multiple of the median off-candidate bin are zeroed.
inline constexpr double kNoiseFloorFactor = 3.0;

/// Samples sum_i component_i(n / rate) plus seeded Gaussian noise.
/// Throws InputError when rate_hz <= 2 * max component frequency.
SampleTrace synthesize_trace(std::span<const WaveComponent> components, double rate_hz,
                             double duration_s, double gaussian_noise_sd,
                             std::uint64_t seed);

/// Sinusoidal amplitude at freq_hz: 2|X|/N of a single-bin projection
/// (Goertzel) over the mean-removed window, trimmed to a whole number of
/// periods of freq_hz.
double extract_amplitude(const SampleTrace& trace, double freq_hz);

/// Extracts each candidate; readings under the noise floor report 0.
/// Throws InputError when two candidates are not separated by more than the
/// window's frequency resolution rate/N.
std::vector<PeakReading> identify_lamps(const SampleTrace& trace,
                                        std::span<const double> candidates_hz);

}  // namespace lightpos
