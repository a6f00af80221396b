// Rule-based obstacle presence detection over inter-frame mean differences.
//
// An obstacle is declared when three consecutive far bins (B4..B15) all move by
// more than gamma between frames, unless more than two of the near bins
// (B1..B3) moved by more than gamma as well; that near-bin count is the
// false-positive gate sigma.
#pragma once

#include <map>
#include <optional>

#include "uasw/pipeline.hpp"

namespace uasw {

inline constexpr double kDefaultGamma = 20.0;

/// How a far-bin triple is judged against gamma.
enum class TripleRule {
  all_exceed,   ///< delta[i], delta[i+1], delta[i+2] each > gamma
  mean_exceeds  ///< mean of the triple > gamma (experimental variant)
};

/// Rx gain index -> gamma. Unlisted gains fall back to `fallback`.
struct GammaTable {
  std::map<int, double> by_gain{{0, kDefaultGamma}};
  double fallback = kDefaultGamma;

  [[nodiscard]] double gamma_for(int rx_gain_index) const {
    const auto it = by_gain.find(rx_gain_index);
    return it == by_gain.end() ? fallback : it->second;
  }
};

struct DetectorParams {
  double gamma = kDefaultGamma;
  // Bin numbers are 1-based (B1 is the first bin past B0).
  int near_first = 1;
  int near_last = 3;
  int far_first = 4;
  int far_last = 15;
  int sigma_max = 2;
  TripleRule rule = TripleRule::all_exceed;

  static DetectorParams for_gain(int rx_gain_index, const GammaTable& table = {}) {
    DetectorParams p;
    p.gamma = table.gamma_for(rx_gain_index);
    return p;
  }

  void validate() const {
    if (!(gamma > 0)) throw InvalidArgument("detector: gamma must be positive");
    if (!(1 <= near_first && near_first <= near_last && near_last < far_first &&
          far_first + 2 <= far_last && far_last <= kRangeBins))
      throw InvalidArgument("detector: near/far bin sets must be ordered and disjoint");
  }
};

struct DetectionVerdict {
  bool detected = false;
  std::optional<int> trigger_bin;
  int sigma = 0;
  std::optional<double> range_estimate_cm;

  friend bool operator==(const DetectionVerdict&, const DetectionVerdict&) = default;
};

/// sigma = number of near bins whose delta strictly exceeds gamma.
inline int false_positive_count(const DeltaVector& d, const DetectorParams& params = {}) {
  int sigma = 0;
  for (int b = params.near_first; b <= params.near_last; ++b)
    if (d.delta[b - 1] > params.gamma) ++sigma;
  return sigma;
}

inline DetectionVerdict detect(const DeltaVector& d, const DetectorParams& params = {},
                               const RadarConfig& config = {}) {
  DetectionVerdict v;
  v.sigma = false_positive_count(d, params);
  if (v.sigma > params.sigma_max) return v;
  const double g = params.gamma;
  for (int i = params.far_first; i + 2 <= params.far_last; ++i) {
    const double a = d.delta[i - 1], b = d.delta[i], c = d.delta[i + 1];
    const bool fired = params.rule == TripleRule::all_exceed ? (a > g && b > g && c > g)
                                                             : (a + b + c) / 3.0 > g;
    if (fired) {
      v.detected = true;
      v.trigger_bin = i;
      v.range_estimate_cm = tap_distance(i, config).center_cm;
      return v;
    }
  }
  return v;
}

/// Verdict over a processed buffer: the most recent of its three deltas that
/// fires, otherwise the verdict on the newest delta.
inline DetectionVerdict detect_buffer(const ProcessedBuffer& buf, const DetectorParams& params = {},
                                      const RadarConfig& config = {}) {
  for (int i = kFramesPerBuffer - 2; i >= 0; --i) {
    auto v = detect(buf.deltas[i], params, config);
    if (v.detected) return v;
  }
  return detect(buf.deltas.back(), params, config);
}

}  // namespace uasw
