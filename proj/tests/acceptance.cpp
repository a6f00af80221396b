// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Expected values come from independent oracles (literal rule evaluation,
// defining DFT sums, central differences, direct ledger arithmetic).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "uasw/classifier.hpp"
#include "uasw/datastore.hpp"
#include "uasw/detector.hpp"
#include "uasw/engine.hpp"
#include "uasw/model_io.hpp"
#include "uasw/pipeline.hpp"
#include "uasw/session.hpp"

using namespace uasw;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& run) {
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += o.pass ? 0 : 1;
  std::printf("%s  %2d  %-34s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// 1

bool rule_oracle(const BinArray& d, double gamma) {
  int sigma = 0;
  for (int b = 1; b <= 3; ++b) sigma += d[b - 1] > gamma;
  if (sigma > 2) return false;
  for (int i = 4; i <= 13; ++i)
    if (d[i - 1] > gamma && d[i] > gamma && d[i + 1] > gamma) return true;
  return false;
}

Outcome detector_oracle() {
  std::mt19937_64 rng(101);
  // Values straddle the threshold so both outcomes are common.
  std::uniform_real_distribution<double> u(0.0, 45.0);
  const int n = 100'000;
  std::vector<DeltaVector> inputs(n);
  for (auto& v : inputs)
    for (auto& x : v.delta) x = u(rng);
  int mismatches = 0, positives = 0;
  const auto t0 = clock_type::now();
  for (const auto& v : inputs) {
    const bool got = detect(v).detected;
    positives += got;
    mismatches += got != rule_oracle(v.delta, kDefaultGamma);
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 5.0,
          fmt("%.0f mismatches in 1e5 (%.0f detected), %.3f s", mismatches, positives, t)};
}

// ---------------------------------------------------------------------------
// 2

Outcome detection_accuracy() {
  const RadarConfig cfg;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  int tp = 0, fn = 0, fp = 0, tn = 0;
  double min_snr_db = 1e9;
  for (int ep = 0; ep < 2000; ++ep) {
    const bool positive = ep % 2 == 0;
    EpisodeParams p;
    p.noise_std = between(2.0, 20.0);
    if (positive) {
      p.label = ObstacleLabel::from_combination(static_cast<int>(rng() % kLabelCombinations));
      p.amplitude = between(500.0, 700.0);
      // Leading edge anywhere from B4 (60 cm) to B13 (195 cm).
      p.front_m = between(0.60, 1.95);
      p.onset = 56 + static_cast<int>(rng() % 17);
      p.mod_phase = between(0.0, 2 * M_PI);

      // SNR of the echo alone: peak tap magnitude over the noise level.
      Scene clean;
      clean.leakage_amplitude = 0;
      clean.reflectors = obstacle_reflectors(*p.label, p.front_m, p.amplitude, cfg, p.mod_phase);
      std::mt19937_64 quiet(0);
      double peak = 0;
      for (const auto& t : generate_taps(clean, cfg, 0.0, quiet)) peak = std::max(peak, std::abs(t));
      min_snr_db = std::min(min_snr_db, 20 * std::log10(peak / p.noise_std));
    }
    // Calibration prefix of empty scene, then one buffer-length episode.
    EpisodeParams empty = p;
    empty.label.reset();
    std::vector<CirFrame> prefix, episode;
    render_episode(empty, cfg, cfg.n_cirs_in_cpi, 0, rng,
                   [&](CirFrame&& f) { prefix.push_back(std::move(f)); });
    render_episode(p, cfg, cfg.buffer_rows(), cfg.n_cirs_in_cpi, rng,
                   [&](CirFrame&& f) { episode.push_back(std::move(f)); });
    const auto calib = calibrate(prefix, cfg);
    const auto bufs = window_frames(episode, calib, cfg);
    if (bufs.size() != 1) throw Error("expected one buffer per episode");
    const bool detected = detect_buffer(process_buffer(bufs[0]), {}, cfg).detected;
    if (positive)
      detected ? ++tp : ++fn;
    else
      detected ? ++fp : ++tn;
  }
  const double acc = double(tp + tn) / 2000.0;
  const double fpr = double(fp) / double(fp + tn);
  return {acc >= 0.95 && fpr <= 0.02 && min_snr_db >= 10.0,
          fmt("accuracy %.4f, FP rate %.4f, recall %.4f, min SNR %.1f dB", acc, fpr,
              double(tp) / double(tp + fn), min_snr_db)};
}

// ---------------------------------------------------------------------------
// 3

std::optional<MlpModel> trained_model;

Outcome classification() {
  const RadarConfig cfg;
  const auto t0 = clock_type::now();
  // Stream the corpus one label combination at a time to bound memory.
  std::vector<Sample> samples;
  int current = -1;
  CirLog log;
  log.config = cfg;
  std::vector<Annotation> anns;
  auto flush = [&] {
    if (current < 0) return;
    auto s = extract_samples(log, anns);
    samples.insert(samples.end(), s.begin(), s.end());
    log.frames.clear();
    anns.clear();
  };
  generate_corpus(
      CorpusSpec::uniform(1600), 303, cfg,
      [&](int c, CirFrame&& f) {
        if (c != current) flush(), current = c;
        log.frames.push_back(std::move(f));
      },
      [&](int, const Annotation& a) { anns.push_back(a); });
  flush();
  const double gen_s = seconds_since(t0);
  const auto ds = build_dataset(std::move(samples), 304);
  const auto test = ds.gather(ds.test);

  auto t1 = clock_type::now();
  const auto deep = train(ds, Topology{{12, 12}});
  const double deep_s = seconds_since(t1);
  const auto deep_eval = evaluate(deep.model, test);
  trained_model = deep.model;

  const auto shallow = train(ds, Topology{{}});
  const auto shallow_eval = evaluate(shallow.model, test);

  bool pass = deep_s < 300.0;
  for (int h = 0; h < kHeadCount; ++h)
    pass = pass && deep_eval.accuracy[h] >= 0.90 && deep_eval.accuracy[h] > shallow_eval.accuracy[h];
  return {pass, fmt("2x12 %.3f/%.3f/%.3f in ", deep_eval.accuracy[0], deep_eval.accuracy[1],
                    deep_eval.accuracy[2]) +
                    fmt("%.0f s; no-hidden %.3f/%.3f/%.3f; ", deep_s, shallow_eval.accuracy[0],
                        shallow_eval.accuracy[1], shallow_eval.accuracy[2]) +
                    fmt("%.0f test samples, corpus %.0f s", double(test.size()), gen_s)};
}

// ---------------------------------------------------------------------------
// 4

Outcome gradient_check() {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> g(0.0, 1.5);
  double worst = 0;
  long checked = 0;
  for (int batch_no = 0; batch_no < 20; ++batch_no) {
    auto model = MlpModel::initialized({}, 405 + batch_no);
    for (auto& l : model.layers())
      for (auto& b : l.bias) b = 0.3 * g(rng);
    for (int i = 0; i < kRangeBins; ++i) {
      model.scaler.mean[i] = g(rng);
      model.scaler.scale[i] = 1.0 + std::abs(g(rng));
    }
    std::vector<Sample> batch(8);
    for (auto& s : batch) {
      for (auto& x : s.features) x = g(rng);
      s.label = ObstacleLabel::from_combination(static_cast<int>(rng() % kLabelCombinations));
    }
    Gradients grad;
    loss_and_gradient(model, batch, grad);
    const double eps = 1e-5;
    auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + eps;
        const double up = batch_loss(model, batch);
        params[i] = keep - eps;
        const double down = batch_loss(model, batch);
        params[i] = keep;
        const double numeric = (up - down) / (2 * eps);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
        ++checked;
      }
    };
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
      check(model.layers()[l].weights, grad[l].weights);
      check(model.layers()[l].bias, grad[l].bias);
    }
  }
  return {worst <= 1e-4, fmt("worst relative error %.2e over %.0f parameters", worst, checked)};
}

// ---------------------------------------------------------------------------
// 5

Outcome fft_oracle() {
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g(0.0, 40.0);
  double worst_feat = 0, worst_parseval = 0;
  for (int n : {8, 16, 64}) {
    for (int rep = 0; rep < 5; ++rep) {
      FrameBuffer b;
      b.n = n;
      b.hop = n / 4;
      b.rows.resize(static_cast<std::size_t>(n + 3 * b.hop));
      for (auto& row : b.rows)
        for (auto& v : row) v = {g(rng), g(rng)};
      const auto feats = spectral_features(b);
      for (int f = 0; f < kFramesPerBuffer; ++f)
        for (int bin = 0; bin < kRangeBins; ++bin) {
          std::vector<Complex> col(n);
          for (int t = 0; t < n; ++t) col[t] = b.rows[f * b.hop + t][bin];
          double sum = 0;
          for (int k = 1; k < n; ++k) {
            Complex acc{};
            for (int t = 0; t < n; ++t)
              acc += col[t] * std::polar(1.0, -2 * M_PI * double(k) * double(t) / double(n));
            sum += std::abs(acc);
          }
          const double want = sum / (n - 1);
          worst_feat = std::max(worst_feat, std::abs(feats[f].mean_mag[bin] - want) / want);

          auto y = col;
          fft_inplace(y);
          double et = 0, ef = 0;
          for (int i = 0; i < n; ++i) et += std::norm(col[i]), ef += std::norm(y[i]);
          worst_parseval = std::max(worst_parseval, std::abs(et - ef / n) / et);
        }
    }
  }
  return {worst_feat <= 1e-9 && worst_parseval <= 1e-9,
          fmt("worst feature rel. error %.1e, Parseval %.1e", worst_feat, worst_parseval)};
}

// ---------------------------------------------------------------------------
// 6

Outcome latency() {
  const RadarConfig cfg;
  Scene quiet;
  quiet.noise_std = 8;
  Scene walk = quiet;
  walk.reflectors = obstacle_reflectors({Material::human, Surface::wet, Movement::mobile}, 1.8,
                                        550.0, cfg, 0.4);
  const auto frames = simulate_session(Scenario{{{0.0, quiet}, {1200.0, walk}}}, cfg, 2400, 6);
  const MlpModel model = trained_model ? *trained_model : MlpModel::initialized({}, 6);
  const auto r = bench_pipeline(frames, cfg, model, 50);
  return {r.total.p95 <= 4.3,
          fmt("p95 total %.4f ms (pre %.4f, detect %.4f, classify %.4f)", r.total.p95,
              r.preprocess.p95, r.detection.p95, r.classification.p95) +
              fmt(" over %.0f inferences", double(r.inferences))};
}

// ---------------------------------------------------------------------------
// 7

Outcome tap_geometry() {
  const double d1 = tap_distance(1).center_cm, b15 = tap_distance(15).center_cm;
  return {d1 == 15.0 && b15 == 225.0, fmt("D1 = %.1f cm, B15 = %.1f cm", d1, b15)};
}

// ---------------------------------------------------------------------------
// 8

Outcome power_ledger() {
  // Five 10 s walks, radar on for the first 6.2 s of each, ticks every 5 ms.
  std::vector<SessionInput> trace;
  for (int cycle = 0; cycle < 5; ++cycle) {
    const std::int64_t base = cycle * 10'000;
    for (std::int64_t t = base; t < base + 10'000; t += 5) {
      if (t == base) {
        trace.push_back(UserEvent{t, EventKind::walking_started});
        trace.push_back(UserEvent{t, EventKind::screen_on});
      } else if (t == base + 6'200) {
        trace.push_back(UserEvent{t, EventKind::screen_off});
      } else {
        trace.push_back(Tick{t});
      }
    }
  }
  trace.push_back(Tick{50'000});
  const auto end = replay(trace).states.back();
  const double duty = double(end.accumulated_active_ms) / double(end.elapsed_ms());
  const double ma = power_estimate(end, 39.8, 0.0);
  return {std::abs(duty - 0.62) < 1e-12 && std::abs(ma - 24.7) <= 0.1,
          fmt("duty %.3f -> %.3f mA (ledger %.0f/%.0f ms)", duty, ma,
              double(end.accumulated_active_ms), double(end.elapsed_ms()))};
}

// ---------------------------------------------------------------------------
// 9

Outcome session_rule() {
  const SessionPolicy policy;
  std::mt19937_64 rng(909);
  long violations = 0, cutoffs = 0, longest_run = 0;
  for (int run = 0; run < 1000; ++run) {
    const std::int64_t max_gap = 5 + static_cast<std::int64_t>(rng() % 200);
    const double detect_rate = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
    std::vector<SessionInput> inputs;
    std::int64_t t = 0;
    while (t < 120'000) {
      t += 1 + static_cast<std::int64_t>(rng() % max_gap);
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      if (u < 0.01) {
        inputs.push_back(UserEvent{t, static_cast<EventKind>(rng() % 6)});
      } else if (u < 0.01 + detect_rate) {
        DetectionVerdict v;
        v.detected = rng() % 2;
        if (v.detected) v.trigger_bin = 4, v.range_estimate_cm = 60 + double(rng() % 150);
        inputs.push_back(DetectionInput{t, v, ObstacleLabel::from_combination(int(rng() % 16))});
      } else {
        inputs.push_back(Tick{t});
      }
    }
    // Independent bookkeeping from the input and action streams only.
    SessionState s;
    std::optional<std::int64_t> on_since;
    std::int64_t last_hit = -1;  // -1: none since the radar started
    std::int64_t prev_t = 0;
    for (const auto& in : inputs) {
      const std::int64_t now = timestamp_of(in);
      const auto r = step(s, in, policy);
      s = r.state;
      for (const auto& a : r.actions) {
        if (a.kind == ActionKind::start_radar) on_since = a.timestamp_ms, last_hit = -1;
        if (a.kind == ActionKind::stop_radar) {
          on_since.reset();
          ++cutoffs;
        }
      }
      if (on_since) {
        if (const auto* d = std::get_if<DetectionInput>(&in); d && d->verdict.detected)
          last_hit = now;
        longest_run = std::max(longest_run, long(now - *on_since));
        const std::int64_t tick = now - prev_t;
        const bool over = now - *on_since > policy.max_active_ms + tick;
        const bool recent = last_hit >= 0 && now - last_hit <= policy.detection_window_ms + tick;
        violations += over && !recent;
      }
      prev_t = now;
    }
  }
  return {violations == 0, fmt("%.0f violations; %.0f stops; longest active run %.1f s",
                               double(violations), double(cutoffs), longest_run / 1000.0)};
}

// ---------------------------------------------------------------------------
// 10

Outcome roundtrips() {
  std::mt19937_64 rng(1010);
  const RadarConfig cfg;
  long bad_logs = 0, bad_models = 0;
  const double scales[] = {1.0, 4.0, 0.5, 16.0};
  for (int i = 0; i < 100'000; ++i) {
    CirLog log;
    log.scale = scales[rng() % 4];
    const int frames = 1 + static_cast<int>(rng() % 3);
    std::uint64_t seq = rng() >> 24;
    for (int k = 0; k < frames; ++k) {
      CirFrame f;
      f.seq = seq++;
      f.timestamp_ms = static_cast<std::int64_t>(rng() >> 30) - (1LL << 30);
      f.rx_gain_index = static_cast<int>(rng() % 8);
      f.taps.resize(cfg.total_taps);
      // Values on the representable grid: int16 counts over the scale.
      for (auto& t : f.taps)
        t = Complex(static_cast<std::int16_t>(rng()) / log.scale,
                    static_cast<std::int16_t>(rng()) / log.scale);
      log.frames.push_back(std::move(f));
    }
    const auto back = decode_log(encode_log(log));
    bad_logs += !(back.frames == log.frames && back.scale == log.scale);

    Topology topo;
    topo.hidden.clear();
    const int depth = static_cast<int>(rng() % 3);
    for (int d = 0; d < depth; ++d) topo.hidden.push_back(1 + static_cast<int>(rng() % 16));
    MlpModel m(topo);
    std::normal_distribution<float> g(0.0f, 1.0f);
    for (auto& l : m.layers()) {
      for (auto& w : l.weights) w = g(rng);
      for (auto& b : l.bias) b = g(rng);
    }
    for (int k = 0; k < kRangeBins; ++k) {
      m.scaler.mean[k] = g(rng);
      m.scaler.scale[k] = std::abs(g(rng)) + 0.01f;
    }
    bad_models += !(decode_model(encode_model(m)) == m);
  }
  return {bad_logs == 0 && bad_models == 0,
          fmt("1e5 logs: %.0f mismatches; 1e5 models: %.0f mismatches", double(bad_logs),
              double(bad_models))};
}

}  // namespace

int main() {
  report(1, "detector oracle equivalence", detector_oracle);
  report(2, "synthetic detection accuracy", detection_accuracy);
  report(3, "synthetic classification", classification);
  report(4, "gradient check", gradient_check);
  report(5, "FFT/DFT oracle", fft_oracle);
  report(6, "latency budget", latency);
  report(7, "tap geometry", tap_geometry);
  report(8, "power ledger", power_ledger);
  report(9, "session rule", session_rule);
  report(10, "format roundtrips", roundtrips);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
