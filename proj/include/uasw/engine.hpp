// End-to-end inference (preprocess -> detect -> classify), per-stage latency
// measurement, and full session replay over a recorded CIR log.
#pragma once

#include <algorithm>
#include <chrono>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "uasw/classifier.hpp"
#include "uasw/detector.hpp"
#include "uasw/pipeline.hpp"
#include "uasw/session.hpp"

namespace uasw {

struct InferenceResult {
  ProcessedBuffer buffer;
  DetectionVerdict verdict;
  std::optional<Classification> classification;  // set only when detected
  /// Label reported downstream: the ensemble vote when enabled.
  ObstacleLabel label;
};

/// One pipeline per radar session. The classifier runs only on detections;
/// with `ensemble` set the reported label is the majority of the last three.
class InferenceEngine {
 public:
  InferenceEngine(const RadarConfig& config, const CalibrationResult& calib,
                  const MlpModel* model, GammaTable gammas = {}, bool ensemble = false)
      : config_(config), calib_(calib), model_(model), gammas_(std::move(gammas)),
        ensemble_(ensemble), windower_(calib, config) {}

  std::optional<InferenceResult> push(const CirFrame& frame) {
    auto buf = windower_.push(frame);
    if (!buf) return std::nullopt;
    InferenceResult r;
    r.buffer = process_buffer(*buf);
    r.verdict = detect_buffer(r.buffer, DetectorParams::for_gain(frame.rx_gain_index, gammas_),
                              config_);
    if (r.verdict.detected && model_) {
      r.classification = classify(r.buffer.latest().mean_mag, *model_);
      history_.push_back(*r.classification);
      if (history_.size() > 3) history_.pop_front();
      if (ensemble_) {
        const std::vector<Classification> h(history_.begin(), history_.end());
        r.label = ensemble_classify(h);
      } else {
        r.label = r.classification->label;
      }
    }
    return r;
  }

  /// Drops windowed CIRs and the vote history (a new radar session).
  void reset() {
    windower_ = Windower(calib_, config_);
    history_.clear();
  }

  [[nodiscard]] const std::vector<GapEvent>& gaps() const { return windower_.gaps(); }

 private:
  RadarConfig config_;
  CalibrationResult calib_;
  const MlpModel* model_;
  GammaTable gammas_;
  bool ensemble_;
  Windower windower_;
  std::deque<Classification> history_;
};

// ---------------------------------------------------------------------------
// Latency

struct Percentiles {
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

/// Nearest-rank percentiles.
inline Percentiles percentiles(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(k, 1, v.size()) - 1];
  };
  return {rank(0.50), rank(0.95), v.back()};
}

struct BenchReport {
  Percentiles preprocess;
  Percentiles detection;
  Percentiles classification;
  Percentiles total;
  std::size_t inferences = 0;
};

/// Compute-only latency per emitted buffer over `iterations` passes of the
/// frames. Preprocessing covers windowing the hop's CIRs plus the spectral
/// features and deltas; classification is timed on every buffer regardless of
/// the verdict so the stage is always measured. Calibration happens once up
/// front and is not counted.
inline BenchReport bench_pipeline(std::span<const CirFrame> frames, const RadarConfig& config,
                                  const MlpModel& model, int iterations) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
  if (iterations < 1) throw InvalidArgument("bench: iterations must be >= 1");
  const auto calib = calibrate(frames, config);
  std::vector<double> pre, det, cls, total;
  static volatile int sink = 0;  // keeps the timed work observable
  for (int it = 0; it < iterations; ++it) {
    Windower win(calib, config);
    clock::duration acc{};
    for (const auto& f : frames) {
      const auto t0 = clock::now();
      auto buf = win.push(f);
      const auto t1 = clock::now();
      acc += t1 - t0;
      if (!buf) continue;
      const auto a = clock::now();
      const auto pb = process_buffer(*buf);
      const auto b = clock::now();
      const auto v = detect_buffer(pb, DetectorParams::for_gain(f.rx_gain_index), config);
      const auto c = clock::now();
      const auto k = classify(pb.latest().mean_mag, model);
      const auto d = clock::now();
      sink = sink + static_cast<int>(v.detected) + k.label.combination();
      pre.push_back(ms(acc + (b - a)));
      det.push_back(ms(c - b));
      cls.push_back(ms(d - c));
      total.push_back(pre.back() + det.back() + cls.back());
      acc = {};
    }
  }
  BenchReport r;
  r.inferences = total.size();
  r.preprocess = percentiles(std::move(pre));
  r.detection = percentiles(std::move(det));
  r.classification = percentiles(std::move(cls));
  r.total = percentiles(std::move(total));
  return r;
}

// ---------------------------------------------------------------------------
// Session replay

struct ReplayResult {
  SessionState final_state;
  std::vector<Action> actions;
};

/// Runs a recorded CIR stream and a user-event log through the session state
/// machine. CIRs reach the pipeline only while the radar is on, and a fresh
/// radar session restarts windowing; every CIR timestamp also acts as a clock
/// tick. The first N CIRs of the log calibrate the pipeline.
inline ReplayResult replay_session(std::span<const CirFrame> frames,
                                   std::span<const UserEvent> events, const RadarConfig& config,
                                   const MlpModel* model, bool ensemble = false,
                                   const SessionPolicy& policy = {}) {
  const auto calib = calibrate(frames, config);
  InferenceEngine engine(config, calib, model, {}, ensemble);
  const std::int64_t t0 = std::min(frames.empty() ? 0 : frames.front().timestamp_ms,
                                   events.empty() ? 0 : events.front().timestamp_ms);
  ReplayResult out{SessionState(t0), {}};
  auto feed = [&](const SessionInput& in) {
    auto r = step(std::move(out.final_state), in, policy);
    out.final_state = std::move(r.state);
    out.actions.insert(out.actions.end(), r.actions.begin(), r.actions.end());
    for (const auto& a : r.actions)
      if (a.kind == ActionKind::start_radar) engine.reset();
  };
  std::size_t e = 0;
  for (const auto& f : frames) {
    while (e < events.size() && events[e].timestamp_ms <= f.timestamp_ms) feed(events[e++]);
    if (!out.final_state.radar_active) {
      feed(Tick{f.timestamp_ms});
      continue;
    }
    auto r = engine.push(f);
    if (r)
      feed(DetectionInput{f.timestamp_ms, r->verdict, r->label});
    else
      feed(Tick{f.timestamp_ms});
  }
  while (e < events.size()) feed(events[e++]);
  return out;
}

}  // namespace uasw
