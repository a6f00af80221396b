// CIR logs (.uaswcir), obstacle annotations, synthetic corpus generation and
// labeled dataset assembly.
//
// Log layout, one line each:
//
//   #UASWCIR v1 prf=<Hz> rfri_ms=<ms> taps=<n> scale=<fixed-point scale>
//   <seq>,<timestamp_ms>,<rx_gain>,<tap0><tap1>...<tap{n-1}>
//
// where every tap is 8 lowercase hex digits: the 16-bit two's-complement real
// part followed by the imaginary part, both in units of 1/scale.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uasw/dataset.hpp"
#include "uasw/pipeline.hpp"
#include "uasw/radar_sim.hpp"

namespace uasw {

inline constexpr std::string_view kLogMagic = "#UASWCIR";
inline constexpr std::string_view kLogVersion = "v1";

struct CirLog {
  RadarConfig config{};
  double scale = 1.0;
  std::vector<CirFrame> frames;
};

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end)
    throw FormatError(std::string("bad ") + what + " '" + std::string(text) + "'");
  return v;
}

inline int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

inline std::int16_t quantize(double v, double scale) {
  const double q = std::nearbyint(v * scale);
  if (!(q >= -32768.0 && q <= 32767.0))
    throw InvalidArgument("tap value " + format_number(v) + " overflows 16 bits at scale " +
                          format_number(scale));
  return static_cast<std::int16_t>(q);
}

inline void put_hex16(std::string& out, std::int16_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  const auto u = static_cast<std::uint16_t>(v);
  for (int shift = 12; shift >= 0; shift -= 4) out.push_back(kDigits[(u >> shift) & 0xf]);
}

inline std::int16_t get_hex16(std::string_view s) {
  std::uint16_t u = 0;
  for (char c : s) {
    const int d = hex_digit(c);
    if (d < 0) throw FormatError("non-hex character in tap field");
    u = static_cast<std::uint16_t>((u << 4) | d);
  }
  return static_cast<std::int16_t>(u);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Records

inline std::string encode_frame(const CirFrame& frame, double scale = 1.0) {
  std::string out = std::to_string(frame.seq) + ',' + std::to_string(frame.timestamp_ms) + ',' +
                    std::to_string(frame.rx_gain_index) + ',';
  out.reserve(out.size() + frame.taps.size() * 8);
  for (const auto& t : frame.taps) {
    detail::put_hex16(out, detail::quantize(t.real(), scale));
    detail::put_hex16(out, detail::quantize(t.imag(), scale));
  }
  return out;
}

inline CirFrame decode_frame(std::string_view record, double scale = 1.0,
                             int expected_taps = RadarConfig{}.total_taps) {
  const auto fields = detail::split(record, ',');
  if (fields.size() != 4) throw FormatError("malformed record: expected 4 comma-separated fields");
  CirFrame f;
  f.seq = detail::parse_number<std::uint64_t>(fields[0], "seq");
  f.timestamp_ms = detail::parse_number<std::int64_t>(fields[1], "timestamp");
  f.rx_gain_index = detail::parse_number<int>(fields[2], "rx gain");
  const auto hex = fields[3];
  if (hex.size() != static_cast<std::size_t>(expected_taps) * 8)
    throw FormatError("malformed record: expected " + std::to_string(expected_taps) +
                      " taps, got " + std::to_string(hex.size() / 8.0));
  f.taps.resize(expected_taps);
  for (int k = 0; k < expected_taps; ++k) {
    const auto re = detail::get_hex16(hex.substr(k * 8, 4));
    const auto im = detail::get_hex16(hex.substr(k * 8 + 4, 4));
    f.taps[k] = Complex(re / scale, im / scale);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Logs

inline std::string log_header(const CirLog& log) {
  return std::string(kLogMagic) + ' ' + std::string(kLogVersion) +
         " prf=" + detail::format_number(log.config.prf_hz) +
         " rfri_ms=" + detail::format_number(log.config.rfri_ms) +
         " taps=" + std::to_string(log.config.total_taps) +
         " scale=" + detail::format_number(log.scale);
}

/// Parses a header line. Fields other than PRF, RFRI and tap count are taken
/// from the defaults, with CPI and frame length rescaled to the logged RFRI.
inline CirLog parse_log_header(std::string_view line) {
  const auto parts = detail::split(line, ' ');
  if (parts.size() != 6 || parts[0] != kLogMagic)
    throw FormatError("not a UASWCIR log header");
  if (parts[1] != kLogVersion)
    throw FormatError("unsupported log version '" + std::string(parts[1]) + "'");
  auto value = [&](int i, std::string_view key) {
    const auto p = parts[i];
    if (p.substr(0, key.size()) != key || p.size() <= key.size() || p[key.size()] != '=')
      throw FormatError("expected header field '" + std::string(key) + "'");
    return p.substr(key.size() + 1);
  };
  CirLog log;
  log.config.prf_hz = detail::parse_number<double>(value(2, "prf"), "prf");
  log.config.rfri_ms = detail::parse_number<double>(value(3, "rfri_ms"), "rfri_ms");
  log.config.total_taps = detail::parse_number<int>(value(4, "taps"), "taps");
  log.scale = detail::parse_number<double>(value(5, "scale"), "scale");
  if (!(log.scale > 0)) throw FormatError("scale must be positive");
  if (log.config.total_taps <= 0) throw FormatError("taps must be positive");
  const RadarConfig defaults;
  const double hop = defaults.frame_len_ms / defaults.rfri_ms;
  log.config.cpi_ms = log.config.n_cirs_in_cpi * log.config.rfri_ms;
  log.config.frame_len_ms = hop * log.config.rfri_ms;
  log.config.ranging_interval_ms = log.config.frame_len_ms;
  return log;
}

inline void write_log(std::ostream& out, const CirLog& log) {
  out << log_header(log) << '\n';
  for (const auto& f : log.frames) out << encode_frame(f, log.scale) << '\n';
}

inline std::string encode_log(const CirLog& log) {
  std::ostringstream os;
  write_log(os, log);
  return os.str();
}

/// Reads a log line by line, handing each decoded frame to `on_frame`.
/// Returns the header (with no frames).
inline CirLog stream_log(std::istream& in, const std::function<void(CirFrame&&)>& on_frame) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty log");
  CirLog log = parse_log_header(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      on_frame(decode_frame(line, log.scale, log.config.total_taps));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

inline CirLog read_log(std::istream& in) {
  std::vector<CirFrame> frames;
  CirLog log = stream_log(in, [&](CirFrame&& f) { frames.push_back(std::move(f)); });
  log.frames = std::move(frames);
  return log;
}

inline CirLog decode_log(std::string_view text) {
  std::istringstream is{std::string(text)};
  return read_log(is);
}

inline void save_log(const std::string& path, const CirLog& log) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_log(f, log);
}

inline CirLog load_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_log(f);
}

// ---------------------------------------------------------------------------
// Annotations: start_seq,end_seq,material,surface,movement

struct Annotation {
  std::uint64_t start_seq = 0;
  std::uint64_t end_seq = 0;
  ObstacleLabel label{};

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline std::string encode_annotation(const Annotation& a) {
  return std::to_string(a.start_seq) + ',' + std::to_string(a.end_seq) + ',' +
         std::string(to_string(a.label.material)) + ',' +
         std::string(to_string(a.label.surface)) + ',' +
         std::string(to_string(a.label.movement));
}

inline Annotation decode_annotation(std::string_view line) {
  const auto f = detail::split(line, ',');
  if (f.size() != 5) throw FormatError("annotation needs 5 fields");
  Annotation a;
  a.start_seq = detail::parse_number<std::uint64_t>(f[0], "start_seq");
  a.end_seq = detail::parse_number<std::uint64_t>(f[1], "end_seq");
  if (a.end_seq < a.start_seq) throw FormatError("annotation ends before it starts");
  a.label = {parse_material(f[2]), parse_surface(f[3]), parse_movement(f[4])};
  return a;
}

inline std::vector<Annotation> read_annotations(std::istream& in) {
  std::vector<Annotation> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(decode_annotation(line));
  return out;
}

inline void write_annotations(std::ostream& out, std::span<const Annotation> anns) {
  for (const auto& a : anns) out << encode_annotation(a) << '\n';
}

// ---------------------------------------------------------------------------
// Sample extraction

/// Streams one log through calibration and windowing and keeps the CPI-mean
/// feature of every frame buffer lying entirely inside an annotation.
class SampleExtractor {
 public:
  SampleExtractor(const RadarConfig& config, std::vector<Annotation> annotations)
      : config_(config), annotations_(std::move(annotations)) {
    std::sort(annotations_.begin(), annotations_.end(),
              [](const Annotation& a, const Annotation& b) { return a.start_seq < b.start_seq; });
  }

  void push(const CirFrame& frame) {
    if (!first_seq_) first_seq_ = frame.seq;
    last_seq_ = frame.seq;
    if (!windower_) {
      pending_.push_back(frame);
      if (static_cast<int>(pending_.size()) < config_.n_cirs_in_cpi) return;
      windower_.emplace(calibrate(pending_, config_), config_);
      auto pending = std::move(pending_);
      pending_.clear();
      for (const auto& f : pending) consume(f);
      return;
    }
    consume(frame);
  }

  /// Checks every annotation fell inside the log and returns the samples.
  std::vector<Sample> finish() {
    for (const auto& a : annotations_)
      if (!first_seq_ || a.start_seq < *first_seq_ || a.end_seq > last_seq_)
        throw InvalidArgument("annotation " + encode_annotation(a) + " lies outside the log");
    return std::move(samples_);
  }

 private:
  void consume(const CirFrame& f) {
    auto buf = windower_->push(f);
    if (!buf) return;
    const auto lo = buf->first_seq, hi = buf->last_seq();
    for (const auto& a : annotations_) {
      if (a.start_seq > lo) break;
      if (hi <= a.end_seq) {
        const auto feat = frame_feature(buf->frame(kFramesPerBuffer - 1), 0);
        samples_.push_back({feat.mean_mag, a.label});
        return;
      }
    }
  }

  RadarConfig config_;
  std::vector<Annotation> annotations_;
  std::vector<CirFrame> pending_;
  std::optional<Windower> windower_;
  std::optional<std::uint64_t> first_seq_;
  std::uint64_t last_seq_ = 0;
  std::vector<Sample> samples_;
};

inline std::vector<Sample> extract_samples(const CirLog& log, std::vector<Annotation> annotations) {
  SampleExtractor ex(log.config, std::move(annotations));
  for (const auto& f : log.frames) ex.push(f);
  return ex.finish();
}

// ---------------------------------------------------------------------------
// Dataset assembly

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
};

/// Stratified split over the 16 label combinations.
inline void stratified_split(LabeledDataset& ds, std::uint64_t seed, SplitRatios ratios = {}) {
  std::array<std::vector<std::size_t>, kLabelCombinations> strata;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    strata[ds.samples[i].label.combination()].push_back(i);
  std::mt19937_64 rng(seed);
  ds.train.clear();
  ds.validation.clear();
  ds.test.clear();
  for (auto& s : strata) {
    std::shuffle(s.begin(), s.end(), rng);
    const auto n = static_cast<double>(s.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * ratios.train));
    const auto n_val = std::min(s.size() - n_train,
                                static_cast<std::size_t>(std::llround(n * ratios.validation)));
    ds.train.insert(ds.train.end(), s.begin(), s.begin() + n_train);
    ds.validation.insert(ds.validation.end(), s.begin() + n_train, s.begin() + n_train + n_val);
    ds.test.insert(ds.test.end(), s.begin() + n_train + n_val, s.end());
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.validation.begin(), ds.validation.end());
  std::sort(ds.test.begin(), ds.test.end());
}

/// Per-feature medians of the finite training values (0 where none are finite).
inline FeatureVector training_medians(const LabeledDataset& ds) {
  FeatureVector med{};
  std::vector<double> col;
  for (int i = 0; i < kRangeBins; ++i) {
    col.clear();
    for (auto idx : ds.train)
      if (std::isfinite(ds.samples[idx].features[i])) col.push_back(ds.samples[idx].features[i]);
    if (col.empty()) continue;
    std::sort(col.begin(), col.end());
    const auto m = col.size();
    med[i] = m % 2 ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
  }
  return med;
}

/// Replaces every non-finite feature by the training-split median.
inline void impute_missing(LabeledDataset& ds) {
  const auto med = training_medians(ds);
  for (auto& s : ds.samples)
    for (int i = 0; i < kRangeBins; ++i)
      if (!std::isfinite(s.features[i])) s.features[i] = med[i];
}

inline LabeledDataset build_dataset(std::vector<Sample> samples, std::uint64_t seed,
                                    SplitRatios ratios = {}) {
  std::array<int, kMaterialCount> mat{};
  std::array<int, kSurfaceCount> surf{};
  std::array<int, kMovementCount> mov{};
  for (const auto& s : samples) {
    ++mat[static_cast<int>(s.label.material)];
    ++surf[static_cast<int>(s.label.surface)];
    ++mov[static_cast<int>(s.label.movement)];
  }
  for (int i = 0; i < kMaterialCount; ++i)
    if (!mat[i]) throw InvalidArgument("material '" + std::string(kMaterialNames[i]) + "' absent from corpus");
  for (int i = 0; i < kSurfaceCount; ++i)
    if (!surf[i]) throw InvalidArgument("surface '" + std::string(kSurfaceNames[i]) + "' absent from corpus");
  for (int i = 0; i < kMovementCount; ++i)
    if (!mov[i]) throw InvalidArgument("movement '" + std::string(kMovementNames[i]) + "' absent from corpus");

  LabeledDataset ds;
  ds.samples = std::move(samples);
  stratified_split(ds, seed, ratios);
  impute_missing(ds);
  return ds;
}

struct AnnotatedLog {
  std::string name;
  CirLog log;
  std::vector<Annotation> annotations;
};

inline LabeledDataset build_dataset(std::span<const AnnotatedLog> logs, std::uint64_t seed,
                                    SplitRatios ratios = {}) {
  std::vector<Sample> all;
  for (const auto& l : logs) {
    auto s = extract_samples(l.log, l.annotations);
    all.insert(all.end(), s.begin(), s.end());
  }
  return build_dataset(std::move(all), seed, ratios);
}

// ---------------------------------------------------------------------------
// Synthetic corpus
//
// One log per label combination. Each log opens with N CIRs of empty scene
// for calibration, followed by one episode per sample: a window of
// N + 3 * hop CIRs in which the obstacle appears partway through. Each episode
// carries an annotation spanning exactly its window.

struct CorpusSpec {
  std::array<int, kLabelCombinations> counts{};
  double amplitude_min = 500.0;
  double amplitude_max = 700.0;
  double noise_min = 2.0;
  double noise_max = 20.0;
  double front_min_m = 0.75;
  double front_max_m = 1.65;
  /// CIR offset within the episode window at which the obstacle appears.
  int onset_min = 56;
  int onset_max = 72;
  int leakage_tap = 3;
  double leakage_amplitude = 1000.0;
  bool noise_free = false;

  static CorpusSpec uniform(int per_combination) {
    CorpusSpec s;
    s.counts.fill(per_combination);
    return s;
  }
  [[nodiscard]] long total() const {
    long n = 0;
    for (int c : counts) n += c;
    return n;
  }
};

struct EpisodeParams {
  std::optional<ObstacleLabel> label;  // empty scene when unset
  double amplitude = 600.0;
  double noise_std = 0.0;
  double front_m = 1.0;
  int onset = 64;
  double mod_phase = 0.0;
  int leakage_tap = 3;
  double leakage_amplitude = 1000.0;
};

inline Scene background_scene(const EpisodeParams& p) {
  Scene s;
  s.noise_std = p.noise_std;
  s.leakage_tap = p.leakage_tap;
  s.leakage_amplitude = p.leakage_amplitude;
  return s;
}

/// Emits `length` CIRs starting at `seq0`; the obstacle (if any) is present
/// from offset `onset` on.
inline void render_episode(const EpisodeParams& p, const RadarConfig& config, int length,
                           std::uint64_t seq0, std::mt19937_64& rng,
                           const std::function<void(CirFrame&&)>& emit) {
  const Scene bg = background_scene(p);
  Scene ob = bg;
  if (p.label) ob.reflectors = obstacle_reflectors(*p.label, p.front_m, p.amplitude, config, p.mod_phase);
  for (int i = 0; i < length; ++i) {
    const bool present = p.label && i >= p.onset;
    const double elapsed = present ? (i - p.onset) * config.rfri_ms : 0.0;
    const std::uint64_t seq = seq0 + static_cast<std::uint64_t>(i);
    emit(CirFrame{seq, static_cast<std::int64_t>(std::llround(seq * config.rfri_ms)), 0,
                  generate_taps(present ? ob : bg, config, elapsed, rng)});
  }
}

inline std::string combination_name(const ObstacleLabel& l) {
  return std::string(to_string(l.material)) + '_' + std::string(to_string(l.surface)) + '_' +
         std::string(to_string(l.movement));
}

/// Drives the simulator across the label grid. `on_frame(combination, frame)`
/// receives every CIR in log order; `on_annotation(combination, annotation)`
/// fires once per episode.
inline void generate_corpus(
    const CorpusSpec& spec, std::uint64_t seed, const RadarConfig& config,
    const std::function<void(int, CirFrame&&)>& on_frame,
    const std::function<void(int, const Annotation&)>& on_annotation) {
  config.validate();
  for (int c : spec.counts)
    if (c < 1) throw InvalidArgument("corpus: every label combination needs at least one sample");
  const int window = config.buffer_rows();
  if (spec.onset_min < 0 || spec.onset_max >= window || spec.onset_min > spec.onset_max)
    throw InvalidArgument("corpus: onset range must lie inside the episode window");

  for (int combo = 0; combo < kLabelCombinations; ++combo) {
    const auto label = ObstacleLabel::from_combination(combo);
    std::mt19937_64 rng(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(combo));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto emit = [&](CirFrame&& f) { on_frame(combo, std::move(f)); };

    EpisodeParams calib;
    calib.noise_std = spec.noise_free ? 0.0 : spec.noise_min;
    calib.leakage_tap = spec.leakage_tap;
    calib.leakage_amplitude = spec.leakage_amplitude;
    std::uint64_t seq = 0;
    render_episode(calib, config, config.n_cirs_in_cpi, seq, rng, emit);
    seq += static_cast<std::uint64_t>(config.n_cirs_in_cpi);

    for (int i = 0; i < spec.counts[combo]; ++i) {
      EpisodeParams ep = calib;
      ep.label = label;
      ep.amplitude = between(spec.amplitude_min, spec.amplitude_max);
      ep.noise_std = spec.noise_free ? 0.0 : between(spec.noise_min, spec.noise_max);
      ep.front_m = between(spec.front_min_m, spec.front_max_m);
      ep.onset = spec.onset_min +
                 static_cast<int>(unit(rng) * (spec.onset_max - spec.onset_min + 1));
      ep.onset = std::min(ep.onset, spec.onset_max);
      ep.mod_phase = between(0.0, 2.0 * std::numbers::pi);
      render_episode(ep, config, window, seq, rng, emit);
      on_annotation(combo, Annotation{seq, seq + static_cast<std::uint64_t>(window) - 1, label});
      seq += static_cast<std::uint64_t>(window);
    }
  }
}

/// In-memory corpus, one annotated log per label combination.
inline std::vector<AnnotatedLog> generate_corpus(const CorpusSpec& spec, std::uint64_t seed,
                                                 const RadarConfig& config = {},
                                                 double scale = 1.0) {
  std::vector<AnnotatedLog> logs(kLabelCombinations);
  for (int c = 0; c < kLabelCombinations; ++c) {
    logs[c].name = combination_name(ObstacleLabel::from_combination(c));
    logs[c].log.config = config;
    logs[c].log.scale = scale;
  }
  generate_corpus(
      spec, seed, config,
      [&](int c, CirFrame&& f) { logs[c].log.frames.push_back(std::move(f)); },
      [&](int c, const Annotation& a) { logs[c].annotations.push_back(a); });
  return logs;
}

/// Streams a corpus to `<dir>/<material>_<surface>_<movement>.uaswcir` plus a
/// matching `.ann` annotation file per combination.
inline void write_corpus(const std::filesystem::path& dir, const CorpusSpec& spec,
                         std::uint64_t seed, const RadarConfig& config = {},
                         double scale = 1.0) {
  std::filesystem::create_directories(dir);
  std::vector<std::ofstream> logs(kLabelCombinations), anns(kLabelCombinations);
  for (int c = 0; c < kLabelCombinations; ++c) {
    const auto stem = dir / combination_name(ObstacleLabel::from_combination(c));
    logs[c].open(stem.string() + ".uaswcir");
    anns[c].open(stem.string() + ".ann");
    if (!logs[c] || !anns[c]) throw Error("cannot write corpus into " + dir.string());
    CirLog header;
    header.config = config;
    header.scale = scale;
    logs[c] << log_header(header) << '\n';
  }
  generate_corpus(
      spec, seed, config, [&](int c, CirFrame&& f) { logs[c] << encode_frame(f, scale) << '\n'; },
      [&](int c, const Annotation& a) { anns[c] << encode_annotation(a) << '\n'; });
}

/// Extracts labeled samples from every `.uaswcir` + `.ann` pair in `dir`
/// (files visited in name order).
inline std::vector<Sample> read_corpus_samples(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".uaswcir") logs.push_back(entry.path());
  std::sort(logs.begin(), logs.end());
  if (logs.empty()) throw Error("no .uaswcir logs in " + dir.string());

  std::vector<Sample> all;
  for (const auto& path : logs) {
    auto ann_path = path;
    ann_path.replace_extension(".ann");
    std::ifstream ann_in(ann_path);
    if (!ann_in) throw Error("missing annotation file " + ann_path.string());
    auto anns = read_annotations(ann_in);

    std::ifstream log_in(path);
    std::string header;
    if (!std::getline(log_in, header)) throw FormatError("empty log " + path.string());
    const auto cfg = parse_log_header(header).config;
    log_in.seekg(0);
    SampleExtractor ex(cfg, std::move(anns));
    stream_log(log_in, [&](CirFrame&& f) { ex.push(f); });
    auto s = ex.finish();
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

}  // namespace uasw
