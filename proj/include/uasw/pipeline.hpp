// CIR preprocessing: range calibration, 3-D sliding windows over slow time,
// per-bin slow-time FFT, CPI-mean magnitude and inter-frame differences.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uasw/config.hpp"
#include "uasw/fft.hpp"
#include "uasw/radar_sim.hpp"

namespace uasw {

using BinArray = std::array<double, kRangeBins>;
using RangeRow = std::array<Complex, kRangeBins>;

// ---------------------------------------------------------------------------
// Tap geometry

struct TapDistance {
  double center_cm = 0.0;
  double half_width_cm = 0.0;
};

/// Distance of range bin `bin` (B0 = zero distance): bin * eta * c / 2.
inline TapDistance tap_distance(int bin, const RadarConfig& config = {}) {
  if (bin < 0 || bin > config.used_taps)
    throw InvalidArgument("tap_distance: bin " + std::to_string(bin) + " out of range");
  const double tap_cm = config.tap_length_cm();
  return {bin * tap_cm, tap_cm / 2.0};
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationResult {
  int b0_index = 0;
  /// Peak over median of the slow-time averaged tap magnitudes.
  double confidence = 0.0;

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

inline constexpr double kMinCalibrationConfidence = 3.0;

class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Thrown when no tap dominates; carries the rejected estimate.
class LowConfidenceCalibration : public CalibrationError {
 public:
  explicit LowConfidenceCalibration(CalibrationResult r)
      : CalibrationError("calibration confidence " + std::to_string(r.confidence) +
                         " below threshold"),
        result(r) {}
  CalibrationResult result;
};

/// Locates B0 as the tap with the largest slow-time averaged magnitude.
inline CalibrationResult calibrate(std::span<const CirFrame> frames, const RadarConfig& config = {},
                                   double min_confidence = kMinCalibrationConfidence) {
  if (static_cast<int>(frames.size()) < config.n_cirs_in_cpi)
    throw CalibrationError("calibration needs at least " +
                           std::to_string(config.n_cirs_in_cpi) + " CIRs, got " +
                           std::to_string(frames.size()));
  std::vector<double> avg(config.total_taps, 0.0);
  for (const auto& f : frames) {
    if (static_cast<int>(f.taps.size()) != config.total_taps)
      throw InvalidArgument("calibrate: frame has wrong tap count");
    for (int k = 0; k < config.total_taps; ++k) avg[k] += std::abs(f.taps[k]);
  }
  for (auto& v : avg) v /= static_cast<double>(frames.size());

  const auto peak_it = std::max_element(avg.begin(), avg.end());
  CalibrationResult result;
  result.b0_index = static_cast<int>(peak_it - avg.begin());
  const double peak = *peak_it;

  std::vector<double> sorted = avg;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  if (peak == 0.0) throw CalibrationError("calibration frames are all zero");
  result.confidence = median > 0.0 ? peak / median : std::numeric_limits<double>::infinity();

  if (result.b0_index > config.total_taps - config.used_taps - 1)
    throw CalibrationError("B0 at tap " + std::to_string(result.b0_index) +
                           " leaves no room for B1..B15");
  if (result.confidence < min_confidence) throw LowConfidenceCalibration(result);
  return result;
}

// ---------------------------------------------------------------------------
// Windowing

/// Four overlapping slow-time frames over B1..B15. Frame f covers rows
/// [f * hop, f * hop + n); adjacent frames share n - hop rows.
struct FrameBuffer {
  int n = 0;
  int hop = 0;
  std::vector<RangeRow> rows;
  std::uint64_t first_seq = 0;
  std::int64_t last_timestamp_ms = 0;
  std::int64_t first_frame_index = 0;

  [[nodiscard]] std::span<const RangeRow> frame(int f) const {
    return std::span<const RangeRow>(rows).subspan(static_cast<std::size_t>(f * hop),
                                                   static_cast<std::size_t>(n));
  }
  [[nodiscard]] std::uint64_t last_seq() const { return first_seq + rows.size() - 1; }
};

struct GapEvent {
  std::uint64_t expected_seq = 0;
  std::uint64_t received_seq = 0;
};

/// Streaming accumulator turning an ordered CIR stream into frame buffers. A
/// new buffer is emitted every `hop` CIRs once N + 3 * hop consecutive CIRs
/// have arrived; any break in the sequence numbers restarts accumulation.
class Windower {
 public:
  Windower(CalibrationResult calib, const RadarConfig& config)
      : calib_(calib), config_(config) {
    config_.validate();
  }

  std::optional<FrameBuffer> push(const CirFrame& frame) {
    if (static_cast<int>(frame.taps.size()) != config_.total_taps)
      throw InvalidArgument("windower: frame has wrong tap count");
    if (last_seq_ && frame.seq != *last_seq_ + 1) {
      gaps_.push_back({*last_seq_ + 1, frame.seq});
      restart();
    }
    last_seq_ = frame.seq;

    RangeRow row;
    for (int b = 0; b < kRangeBins; ++b) row[b] = frame.taps[calib_.b0_index + 1 + b];
    rows_.push_back(row);
    if (static_cast<int>(rows_.size()) > config_.buffer_rows()) rows_.pop_front();
    ++since_restart_;

    const int needed = config_.buffer_rows();
    if (since_restart_ < needed || (since_restart_ - needed) % config_.hop_cirs() != 0)
      return std::nullopt;

    FrameBuffer buf;
    buf.n = config_.n_cirs_in_cpi;
    buf.hop = config_.hop_cirs();
    buf.rows.assign(rows_.begin(), rows_.end());
    buf.first_seq = frame.seq + 1 - rows_.size();
    buf.last_timestamp_ms = frame.timestamp_ms;
    buf.first_frame_index = next_frame_index_++;
    return buf;
  }

  void restart() {
    rows_.clear();
    since_restart_ = 0;
    // Keep frame indices of different runs non-adjacent.
    next_frame_index_ += kFramesPerBuffer + 1;
  }

  [[nodiscard]] const std::vector<GapEvent>& gaps() const { return gaps_; }

 private:
  CalibrationResult calib_;
  RadarConfig config_;
  std::deque<RangeRow> rows_;
  std::optional<std::uint64_t> last_seq_;
  int since_restart_ = 0;
  std::int64_t next_frame_index_ = 0;
  std::vector<GapEvent> gaps_;
};

/// Batch form of the windower over a whole stream.
inline std::vector<FrameBuffer> window_frames(std::span<const CirFrame> stream,
                                              CalibrationResult calib,
                                              const RadarConfig& config = {},
                                              std::vector<GapEvent>* gaps = nullptr) {
  Windower w(calib, config);
  std::vector<FrameBuffer> out;
  for (const auto& f : stream)
    if (auto b = w.push(f)) out.push_back(std::move(*b));
  if (gaps) *gaps = w.gaps();
  return out;
}

// ---------------------------------------------------------------------------
// Spectral features

struct SpectralFeature {
  BinArray mean_mag{};
  std::int64_t frame_index = 0;

  friend bool operator==(const SpectralFeature&, const SpectralFeature&) = default;
};

struct DeltaVector {
  BinArray delta{};

  friend bool operator==(const DeltaVector&, const DeltaVector&) = default;
};

/// Mean |X[k]| over k = 1..N-1 of the slow-time FFT of one range bin.
inline double cpi_mean_magnitude(std::span<const Complex> column) {
  const std::size_t n = column.size();
  if (n < 2) throw InvalidArgument("cpi_mean_magnitude: need at least 2 samples");
  std::vector<Complex> work(column.begin(), column.end());
  fft_inplace(work);
  double sum = 0.0;
  for (std::size_t k = 1; k < n; ++k) sum += std::abs(work[k]);
  return sum / static_cast<double>(n - 1);
}

inline SpectralFeature frame_feature(std::span<const RangeRow> frame, std::int64_t frame_index) {
  SpectralFeature out;
  out.frame_index = frame_index;
  std::vector<Complex> column(frame.size());
  for (int b = 0; b < kRangeBins; ++b) {
    for (std::size_t t = 0; t < frame.size(); ++t) column[t] = frame[t][b];
    out.mean_mag[b] = cpi_mean_magnitude(column);
  }
  return out;
}

inline std::array<SpectralFeature, kFramesPerBuffer> spectral_features(const FrameBuffer& buffer) {
  if (buffer.rows.size() !=
      static_cast<std::size_t>(buffer.n + (kFramesPerBuffer - 1) * buffer.hop))
    throw InvalidArgument("spectral_features: incomplete frame buffer");
  std::array<SpectralFeature, kFramesPerBuffer> out;
  for (int f = 0; f < kFramesPerBuffer; ++f)
    out[f] = frame_feature(buffer.frame(f), buffer.first_frame_index + f);
  return out;
}

inline DeltaVector mean_difference(const SpectralFeature& curr, const SpectralFeature& prev) {
  if (curr.frame_index != prev.frame_index + 1)
    throw InvalidArgument("mean_difference: frames " + std::to_string(prev.frame_index) +
                          " and " + std::to_string(curr.frame_index) + " are not consecutive");
  DeltaVector d;
  for (int b = 0; b < kRangeBins; ++b) d.delta[b] = std::abs(curr.mean_mag[b] - prev.mean_mag[b]);
  return d;
}

// ---------------------------------------------------------------------------
// Streaming front end

struct ProcessedBuffer {
  std::array<SpectralFeature, kFramesPerBuffer> features;
  std::array<DeltaVector, kFramesPerBuffer - 1> deltas;
  std::uint64_t last_seq = 0;
  std::int64_t timestamp_ms = 0;

  /// Most recent CPI-mean vector; the classifier's input.
  [[nodiscard]] const SpectralFeature& latest() const { return features.back(); }
};

inline ProcessedBuffer process_buffer(const FrameBuffer& buffer) {
  ProcessedBuffer out;
  out.features = spectral_features(buffer);
  for (int f = 1; f < kFramesPerBuffer; ++f)
    out.deltas[f - 1] = mean_difference(out.features[f], out.features[f - 1]);
  out.last_seq = buffer.last_seq();
  out.timestamp_ms = buffer.last_timestamp_ms;
  return out;
}

/// Calibrates on the first N CIRs of a stream, then windows and featurizes the
/// rest of it (the calibration CIRs are windowed too).
class Preprocessor {
 public:
  explicit Preprocessor(const RadarConfig& config = {}) : config_(config) { config_.validate(); }
  Preprocessor(const RadarConfig& config, CalibrationResult calib)
      : config_(config), calib_(calib), windower_(std::in_place, calib, config) {}

  std::optional<ProcessedBuffer> push(const CirFrame& frame) {
    if (!windower_) {
      pending_.push_back(frame);
      if (static_cast<int>(pending_.size()) < config_.n_cirs_in_cpi) return std::nullopt;
      calib_ = calibrate(pending_, config_);
      windower_.emplace(*calib_, config_);
      std::optional<ProcessedBuffer> last;
      for (const auto& f : pending_)
        if (auto b = windower_->push(f)) last = process_buffer(*b);
      pending_.clear();
      return last;
    }
    if (auto b = windower_->push(frame)) return process_buffer(*b);
    return std::nullopt;
  }

  [[nodiscard]] const std::optional<CalibrationResult>& calibration() const { return calib_; }
  [[nodiscard]] const Windower* windower() const { return windower_ ? &*windower_ : nullptr; }

 private:
  RadarConfig config_;
  std::vector<CirFrame> pending_;
  std::optional<CalibrationResult> calib_;
  std::optional<Windower> windower_;
};

}  // namespace uasw
