#include <gtest/gtest.h>

#include <map>
#include <random>

#include "uasw/pipeline.hpp"

using namespace uasw;

namespace {

CirFrame frame_with(std::uint64_t seq, std::vector<Complex> taps) {
  return CirFrame{seq, static_cast<std::int64_t>(seq * 5), 0, std::move(taps)};
}

std::vector<CirFrame> quiet_stream(std::size_t n, std::uint64_t seq0 = 0, double noise = 0.0,
                                   std::uint64_t seed = 1) {
  Scene s;
  s.noise_std = noise;
  std::mt19937_64 rng(seed);
  std::vector<CirFrame> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(frame_with(seq0 + i, generate_taps(s, {}, 0.0, rng)));
  return out;
}

// Mean |X[k]|, k = 1..N-1, via the defining sum.
double dft_mean_oracle(const std::vector<Complex>& x) {
  const std::size_t n = x.size();
  double sum = 0;
  for (std::size_t k = 1; k < n; ++k) {
    Complex acc{};
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::exp(Complex(0, -2 * M_PI * double(k) * double(t) / double(n)));
    sum += std::abs(acc);
  }
  return sum / double(n - 1);
}

FrameBuffer random_buffer(int n, int hop, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 50.0);
  FrameBuffer b;
  b.n = n;
  b.hop = hop;
  b.rows.resize(static_cast<std::size_t>(n + 3 * hop));
  for (auto& row : b.rows)
    for (auto& v : row) v = {g(rng), g(rng)};
  b.first_frame_index = 10;
  return b;
}

}  // namespace

TEST(TapDistance, FifteenCentimetresPerTap) {
  EXPECT_EQ(tap_distance(1).center_cm, 15.0);
  EXPECT_EQ(tap_distance(1).half_width_cm, 7.5);
  EXPECT_EQ(tap_distance(0).center_cm, 0.0);
  EXPECT_EQ(tap_distance(15).center_cm, 225.0);
  EXPECT_THROW(tap_distance(16), InvalidArgument);
  EXPECT_THROW(tap_distance(-1), InvalidArgument);
}

TEST(TapDistance, Linear) {
  for (int a = 0; a <= 15; ++a)
    for (int b = 0; a + b <= 15; ++b)
      EXPECT_EQ(tap_distance(a + b).center_cm, tap_distance(a).center_cm + tap_distance(b).center_cm);
}

TEST(Calibrate, FindsLeakageTap) {
  const auto frames = quiet_stream(64);
  const auto c = calibrate(frames);
  EXPECT_EQ(c.b0_index, 3);
  EXPECT_GT(c.confidence, 100.0);
  EXPECT_EQ(calibrate(frames), c);

  const auto noisy = quiet_stream(64, 0, 10.0);
  const auto cn = calibrate(noisy);
  EXPECT_EQ(cn.b0_index, 3);
  EXPECT_GT(cn.confidence, 3.0);
}

TEST(Calibrate, PureNoiseIsLowConfidence) {
  Scene s;
  s.leakage_amplitude = 0;
  s.noise_std = 10;
  std::mt19937_64 rng(5);
  std::vector<CirFrame> frames;
  for (int i = 0; i < 64; ++i) frames.push_back(frame_with(i, generate_taps(s, {}, 0, rng)));
  try {
    calibrate(frames);
    FAIL() << "expected low-confidence calibration";
  } catch (const LowConfidenceCalibration& e) {
    EXPECT_LT(e.result.confidence, 3.0);
  }
}

TEST(Calibrate, TooFewFrames) {
  EXPECT_THROW(calibrate(quiet_stream(63)), CalibrationError);
}

TEST(Windower, FirstBufferAfter88Frames) {
  const CalibrationResult calib{3, 100};
  EXPECT_TRUE(window_frames(quiet_stream(87), calib).empty());
  const auto bufs = window_frames(quiet_stream(88), calib);
  ASSERT_EQ(bufs.size(), 1u);
  EXPECT_EQ(bufs[0].rows.size(), 88u);
  EXPECT_EQ(bufs[0].first_seq, 0u);
  EXPECT_EQ(bufs[0].last_seq(), 87u);
  EXPECT_EQ(window_frames(quiet_stream(88 + 7), calib).size(), 1u);
  EXPECT_EQ(window_frames(quiet_stream(88 + 8), calib).size(), 2u);
}

TEST(Windower, RowsAreBinsPastB0) {
  std::vector<CirFrame> stream;
  for (int i = 0; i < 88; ++i) {
    std::vector<Complex> taps(56);
    for (int k = 0; k < 56; ++k) taps[k] = Complex(k, i);
    stream.push_back(frame_with(i, taps));
  }
  const auto b = window_frames(stream, CalibrationResult{5, 10}).at(0);
  EXPECT_EQ(b.rows[0][0], Complex(6, 0));
  EXPECT_EQ(b.rows[87][14], Complex(20, 87));
  // Frame f starts hop*f rows in.
  EXPECT_EQ(b.frame(2)[0][0], Complex(6, 16));
  EXPECT_EQ(b.frame(3).size(), 64u);
}

TEST(Windower, GapRestartsAccumulation) {
  auto stream = quiet_stream(40);
  auto tail = quiet_stream(200, 41);  // seq 40 missing
  stream.insert(stream.end(), tail.begin(), tail.end());
  std::vector<GapEvent> gaps;
  const auto bufs = window_frames(stream, CalibrationResult{3, 100}, {}, &gaps);
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_EQ(gaps[0].expected_seq, 40u);
  EXPECT_EQ(gaps[0].received_seq, 41u);
  ASSERT_FALSE(bufs.empty());
  EXPECT_EQ(bufs.front().first_seq, 41u);
  EXPECT_EQ(bufs.front().last_seq(), 41u + 87u);
}

TEST(Windower, EveryCirLandsInBoundedFrames) {
  const auto stream = quiet_stream(300);
  const auto bufs = window_frames(stream, CalibrationResult{3, 100});
  // Frame membership counted once per distinct frame index.
  std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> frames;
  for (const auto& b : bufs)
    for (int f = 0; f < 4; ++f) {
      const auto lo = b.first_seq + static_cast<std::uint64_t>(f * b.hop);
      frames[b.first_frame_index + f] = {lo, lo + 63};
    }
  for (std::uint64_t s = 0; s < 300; ++s) {
    int count = 0;
    for (const auto& [idx, span] : frames) count += span.first <= s && s <= span.second;
    if (s >= 64 && s < 300 - 64) {  // away from the stream edges
      EXPECT_GE(count, 1) << s;
    }
    EXPECT_LE(count, 8) << s;  // ceil(64 / 8)
  }
}

TEST(SpectralFeatures, DcColumnIsZero) {
  FrameBuffer b;
  b.n = 64;
  b.hop = 8;
  b.rows.assign(88, RangeRow{});
  for (auto& r : b.rows) r.fill(Complex(123.0, -4.0));
  for (const auto& f : spectral_features(b))
    for (double v : f.mean_mag) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(SpectralFeatures, ToneAtBinFive) {
  const int n = 64;
  const double amp = 3.0;
  std::vector<Complex> col(n);
  for (int t = 0; t < n; ++t) col[t] = amp * std::exp(Complex(0, 2 * M_PI * 5 * t / n));
  EXPECT_NEAR(cpi_mean_magnitude(col), amp * n / (n - 1), 1e-9);
  EXPECT_NEAR(cpi_mean_magnitude(col), dft_mean_oracle(col), 1e-9);
}

TEST(SpectralFeatures, MatchNaiveDftOracle) {
  for (int n : {8, 16, 64}) {
    const int hop = n / 4;
    const auto b = random_buffer(n, hop, 100 + n);
    const auto feats = spectral_features(b);
    for (int f = 0; f < 4; ++f) {
      EXPECT_EQ(feats[f].frame_index, 10 + f);
      for (int bin = 0; bin < kRangeBins; ++bin) {
        std::vector<Complex> col;
        for (int t = 0; t < n; ++t) col.push_back(b.rows[f * hop + t][bin]);
        const double want = dft_mean_oracle(col);
        EXPECT_NEAR(feats[f].mean_mag[bin], want, 1e-9 * want) << n << ' ' << f << ' ' << bin;
      }
    }
  }
}

TEST(SpectralFeatures, Parseval) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int n : {8, 16, 64}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = {g(rng), g(rng)};
    auto y = x;
    fft_inplace(y);
    double et = 0, ef = 0;
    for (int i = 0; i < n; ++i) et += std::norm(x[i]), ef += std::norm(y[i]);
    EXPECT_NEAR(et, ef / n, 1e-9 * et);
  }
}

TEST(SpectralFeatures, RejectsIncompleteBuffer) {
  auto b = random_buffer(64, 8, 1);
  b.rows.pop_back();
  EXPECT_THROW(spectral_features(b), InvalidArgument);
}

TEST(MeanDifference, Componentwise) {
  SpectralFeature prev, curr;
  prev.frame_index = 4;
  curr.frame_index = 5;
  for (int i = 0; i < kRangeBins; ++i) prev.mean_mag[i] = curr.mean_mag[i] = 7.0 * i;
  EXPECT_EQ(mean_difference(curr, prev).delta, BinArray{});
  curr.mean_mag[7] += 20.0;
  const auto d = mean_difference(curr, prev);
  for (int i = 0; i < kRangeBins; ++i) EXPECT_EQ(d.delta[i], i == 7 ? 20.0 : 0.0);

  // The sign of the change does not matter.
  std::swap(curr.mean_mag, prev.mean_mag);
  EXPECT_EQ(mean_difference(curr, prev).delta, d.delta);
}

TEST(MeanDifference, RequiresConsecutiveFrames) {
  SpectralFeature a, b;
  a.frame_index = 3;
  b.frame_index = 5;
  EXPECT_THROW(mean_difference(b, a), InvalidArgument);
  EXPECT_THROW(mean_difference(a, b), InvalidArgument);
}

TEST(Preprocessor, DeterministicChain) {
  Scene s;
  s.noise_std = 6;
  s.reflectors = {{1.2, 400.0, -0.7}};
  Scenario sc{{{0.0, s}}};
  const auto frames = simulate_session(sc, {}, 1500.0, 11);
  auto run = [&] {
    Preprocessor p;
    std::vector<ProcessedBuffer> out;
    for (const auto& f : frames)
      if (auto b = p.push(f)) out.push_back(*b);
    return out;
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), (frames.size() - 88) / 8 + 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].deltas, b[i].deltas);
    EXPECT_EQ(a[i].last_seq, 87 + 8 * i);
  }
}
