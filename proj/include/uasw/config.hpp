// Radar configuration, shared constants and the error hierarchy.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace uasw {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside the documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed text or binary input (logs, model files, scenarios, events).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Speed of light expressed in cm per ns (c = 3e8 m/s).
inline constexpr double kLightCmPerNs = 30.0;

/// Range bins B1..B15 handed to the detector and classifier.
inline constexpr int kRangeBins = 15;

/// Depth of the sliding frame buffer.
inline constexpr int kFramesPerBuffer = 4;

struct RadarConfig {
  double prf_hz = 200.0;
  double rfri_ms = 5.0;
  double ranging_interval_ms = 40.0;
  double tap_interval_ns = 1.0;
  double cpi_ms = 320.0;
  int n_cirs_in_cpi = 64;
  double frame_len_ms = 40.0;
  int total_taps = 56;
  int used_taps = kRangeBins;

  /// Slow-time hop between adjacent frames, in CIRs (8 with defaults).
  [[nodiscard]] int hop_cirs() const {
    return static_cast<int>(std::lround(frame_len_ms / rfri_ms));
  }

  /// CIRs needed before the first complete frame buffer (N + 3 * hop).
  [[nodiscard]] int buffer_rows() const {
    return n_cirs_in_cpi + (kFramesPerBuffer - 1) * hop_cirs();
  }

  /// One-way distance covered per tap, in cm.
  [[nodiscard]] double tap_length_cm() const {
    return tap_interval_ns * kLightCmPerNs / 2.0;
  }

  void validate() const {
    auto fail = [](const std::string& what) {
      throw InvalidArgument("radar config: " + what);
    };
    if (!(prf_hz > 0) || !(rfri_ms > 0) || !(tap_interval_ns > 0) ||
        !(cpi_ms > 0) || !(frame_len_ms > 0) || !(ranging_interval_ms > 0))
      fail("timing parameters must be positive");
    if (n_cirs_in_cpi < 2) fail("n_cirs_in_cpi must be at least 2");
    if (std::abs(n_cirs_in_cpi * rfri_ms - cpi_ms) > 1e-9)
      fail("n_cirs_in_cpi * rfri_ms must equal cpi_ms");
    const double hop = frame_len_ms / rfri_ms;
    if (std::abs(hop - std::round(hop)) > 1e-9 || hop < 1)
      fail("frame_len_ms must be a whole multiple of rfri_ms");
    if (hop_cirs() >= n_cirs_in_cpi) fail("frame hop must be shorter than the CPI");
    if (used_taps != kRangeBins) fail("used_taps must be 15");
    if (used_taps + 1 > total_taps) fail("used_taps must leave room for B0");
  }
};

}  // namespace uasw
