// Synthetic IR-UWB CIR generation from scripted scenes.
//
// Each CIR is the multipath impulse sum
//
//   s[k] = sum_j a_j * x(k - tau_j) * exp(-j 4 pi d_j / lambda) + leakage + w[k]
//
// where x is a unit-peak Gaussian pulse sampled at tap resolution, tau_j is the
// round-trip delay of reflector j expressed in taps relative to the leakage peak
// (which marks zero distance), and w is circular complex Gaussian noise.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "uasw/config.hpp"
#include "uasw/labels.hpp"

namespace uasw {

using Complex = std::complex<double>;

inline constexpr double kPulseSigmaTaps = 0.5;
inline constexpr double kPulseSupportTaps = 2.0;
/// Nominal carrier wavelength (8 GHz) driving the slow-time phase rotation.
inline constexpr double kCarrierWavelengthM = 0.0375;

/// Unit-peak Gaussian pulse, truncated at +/-2 taps.
inline double pulse_shape(double offset_taps) {
  if (std::abs(offset_taps) > kPulseSupportTaps) return 0.0;
  const double z = offset_taps / kPulseSigmaTaps;
  return std::exp(-0.5 * z * z);
}

/// Per-material modulation applied on top of a reflector's amplitude:
/// a * ratio * (1 + mod_depth * sin(2 pi mod_freq_hz t + mod_phase)).
struct EchoSignature {
  double amplitude_ratio = 1.0;
  double mod_depth = 0.0;
  double mod_freq_hz = 0.0;
  double mod_phase = 0.0;
};

struct Reflector {
  double range_m = 0.0;
  double amplitude = 0.0;
  /// Positive values move away from the radar.
  double radial_velocity_mps = 0.0;
  EchoSignature signature{};
};

struct Scene {
  std::vector<Reflector> reflectors;
  double noise_std = 0.0;
  int leakage_tap = 3;
  double leakage_amplitude = 1000.0;
  int rx_gain_index = 0;
};

struct CirFrame {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  int rx_gain_index = 0;
  std::vector<Complex> taps;

  friend bool operator==(const CirFrame&, const CirFrame&) = default;
};

/// Round-trip delay of a one-way distance, in taps.
inline double delay_taps(double distance_m, const RadarConfig& config) {
  return distance_m * 100.0 / config.tap_length_cm();
}

/// Range of a reflector after `elapsed_ms` of constant radial motion.
inline double range_at(const Reflector& r, double elapsed_ms) {
  return r.range_m + r.radial_velocity_mps * elapsed_ms / 1000.0;
}

inline void validate_scene(const Scene& scene, const RadarConfig& config,
                           double elapsed_ms = 0.0) {
  if (!(scene.noise_std >= 0)) throw InvalidArgument("scene: noise_std must be >= 0");
  if (scene.leakage_tap < 0 || scene.leakage_tap >= config.total_taps)
    throw InvalidArgument("scene: leakage_tap outside the tap window");
  const double max_range_m = config.total_taps * config.tap_length_cm() / 100.0;
  for (const auto& r : scene.reflectors) {
    if (!(r.amplitude >= 0)) throw InvalidArgument("scene: reflector amplitude must be >= 0");
    const double d = range_at(r, elapsed_ms);
    const double pos = scene.leakage_tap + delay_taps(d, config);
    if (!(d >= 0) || d > max_range_m || pos > config.total_taps - 1)
      throw InvalidArgument("scene: reflector at " + std::to_string(d) +
                            " m falls outside the tap window");
  }
}

namespace detail {

inline void accumulate_echoes(const Scene& scene, const RadarConfig& config,
                              double elapsed_ms, std::vector<Complex>& taps) {
  const double t_s = elapsed_ms / 1000.0;
  for (int k = 0; k < config.total_taps; ++k)
    taps[k] += scene.leakage_amplitude * pulse_shape(k - scene.leakage_tap);
  for (const auto& r : scene.reflectors) {
    if (r.amplitude == 0.0) continue;
    const double d = range_at(r, elapsed_ms);
    const double pos = scene.leakage_tap + delay_taps(d, config);
    const auto& sig = r.signature;
    const double amp =
        r.amplitude * sig.amplitude_ratio *
        (1.0 + sig.mod_depth * std::sin(2.0 * std::numbers::pi * sig.mod_freq_hz * t_s +
                                        sig.mod_phase));
    const Complex rot = std::polar(1.0, -4.0 * std::numbers::pi * d / kCarrierWavelengthM);
    const int lo = std::max(0, static_cast<int>(std::ceil(pos - kPulseSupportTaps)));
    const int hi =
        std::min(config.total_taps - 1, static_cast<int>(std::floor(pos + kPulseSupportTaps)));
    for (int k = lo; k <= hi; ++k) taps[k] += amp * pulse_shape(k - pos) * rot;
  }
}

}  // namespace detail

/// Noise-free CIR at `elapsed_ms` into the scene. Throws if the scene asks for noise.
inline std::vector<Complex> generate_taps(const Scene& scene, const RadarConfig& config,
                                          double elapsed_ms) {
  if (scene.noise_std != 0.0)
    throw InvalidArgument("generate_taps: noisy scene requires a generator");
  validate_scene(scene, config, elapsed_ms);
  std::vector<Complex> taps(config.total_taps);
  detail::accumulate_echoes(scene, config, elapsed_ms, taps);
  return taps;
}

/// One CIR with additive noise drawn from `rng`. Noise has E|w|^2 = noise_std^2.
inline std::vector<Complex> generate_taps(const Scene& scene, const RadarConfig& config,
                                          double elapsed_ms, std::mt19937_64& rng) {
  validate_scene(scene, config, elapsed_ms);
  std::vector<Complex> taps(config.total_taps);
  detail::accumulate_echoes(scene, config, elapsed_ms, taps);
  if (scene.noise_std > 0) {
    std::normal_distribution<double> noise(0.0, scene.noise_std / std::numbers::sqrt2);
    for (auto& tap : taps) {
      const double re = noise(rng);
      const double im = noise(rng);
      tap += Complex(re, im);
    }
  }
  return taps;
}

inline CirFrame generate_cir(const Scene& scene, const RadarConfig& config, double t_ms,
                             std::mt19937_64& rng, std::uint64_t seq = 0) {
  if (!(t_ms >= 0)) throw InvalidArgument("generate_cir: t_ms must be >= 0");
  return CirFrame{seq, static_cast<std::int64_t>(std::llround(t_ms)), scene.rx_gain_index,
                  generate_taps(scene, config, t_ms, rng)};
}

// ---------------------------------------------------------------------------
// Scene timelines

struct TimedScene {
  double start_ms = 0.0;
  Scene scene;
};

/// Piecewise-constant scene schedule. Reflector motion restarts at each
/// segment start.
struct Scenario {
  std::vector<TimedScene> segments;

  [[nodiscard]] const TimedScene& active_at(double t_ms) const {
    const TimedScene* current = &segments.front();
    for (const auto& seg : segments)
      if (seg.start_ms <= t_ms) current = &seg;
    return *current;
  }
};

inline void validate_scenario(const Scenario& scenario, const RadarConfig& config) {
  if (scenario.segments.empty()) throw InvalidArgument("scenario has no segments");
  for (std::size_t i = 0; i < scenario.segments.size(); ++i) {
    if (i > 0 && scenario.segments[i].start_ms < scenario.segments[i - 1].start_ms)
      throw InvalidArgument("scenario segments must be ordered by start time");
    validate_scene(scenario.segments[i].scene, config);
  }
}

/// Emits one CIR every RFRI for `duration_ms`. Deterministic in `seed`.
inline std::vector<CirFrame> simulate_session(const Scenario& scenario, const RadarConfig& config,
                                              double duration_ms, std::uint64_t seed) {
  config.validate();
  std::vector<CirFrame> frames;
  if (!(duration_ms > 0)) return frames;
  validate_scenario(scenario, config);
  std::mt19937_64 rng(seed);
  for (std::uint64_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * config.rfri_ms;
    if (t >= duration_ms - 1e-9) break;
    const auto& seg = scenario.active_at(t);
    frames.push_back(CirFrame{i, static_cast<std::int64_t>(std::llround(t)),
                              seg.scene.rx_gain_index,
                              generate_taps(seg.scene, config, t - seg.start_ms, rng)});
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Material models
//
// An obstacle is an extended target: a short run of scatterers spaced one tap
// apart whose relative strengths, echo level and slow-time micro-modulation
// differ per material. Modulation rates are fast enough to complete at least
// one cycle per CPI. Wet surfaces raise the whole echo by 1.5x; mobile
// obstacles close on the radar at their own radial velocity.

struct MaterialProfile {
  std::array<double, 4> depth_profile{};
  double amplitude_ratio = 1.0;
  double mod_depth = 0.0;
  double mod_freq_hz = 0.0;
};

inline constexpr double kWetAmplitudeScale = 1.5;
inline constexpr double kMobileSpeedMps = 1.5;

inline MaterialProfile material_profile(Material m) {
  switch (m) {
    case Material::glass:
      return {{1.0, 0.5, 0.8, 0.0}, 0.7, 0.0, 0.0};
    case Material::concrete:
      return {{1.0, 1.0, 1.0, 1.0}, 1.4, 0.0, 0.0};
    case Material::wood:
      return {{1.0, 0.7, 0.5, 0.35}, 1.0, 0.1, 12.0};
    case Material::human:
      return {{0.5, 1.0, 0.5, 0.0}, 0.8, 0.3, 6.25};
  }
  return {};
}

/// Scatterers of an obstacle whose front face sits at `front_range_m`.
inline std::vector<Reflector> obstacle_reflectors(const ObstacleLabel& label,
                                                  double front_range_m, double amplitude,
                                                  const RadarConfig& config = {},
                                                  double mod_phase = 0.0) {
  const auto profile = material_profile(label.material);
  const double spacing_m = config.tap_length_cm() / 100.0;
  const double wet = label.surface == Surface::wet ? kWetAmplitudeScale : 1.0;
  const double velocity = label.movement == Movement::mobile ? -kMobileSpeedMps : 0.0;
  std::vector<Reflector> out;
  for (std::size_t i = 0; i < profile.depth_profile.size(); ++i) {
    if (profile.depth_profile[i] == 0.0) continue;
    out.push_back(Reflector{
        front_range_m + static_cast<double>(i) * spacing_m,
        amplitude * profile.depth_profile[i] * wet, velocity,
        EchoSignature{profile.amplitude_ratio, profile.mod_depth, profile.mod_freq_hz,
                      mod_phase}});
  }
  return out;
}

}  // namespace uasw
