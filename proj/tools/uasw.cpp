// uasw: simulate, inspect, train, classify, replay and benchmark.
//
// Exit status: 0 ok, 1 usage error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "uasw/classifier.hpp"
#include "uasw/datastore.hpp"
#include "uasw/detector.hpp"
#include "uasw/engine.hpp"
#include "uasw/model_io.hpp"
#include "uasw/scenario.hpp"
#include "uasw/session.hpp"

namespace {

using nlohmann::json;
using namespace uasw;

json label_json(const ObstacleLabel& l) {
  return {{"material", to_string(l.material)},
          {"surface", to_string(l.surface)},
          {"movement", to_string(l.movement)}};
}

json verdict_json(const DetectionVerdict& v) {
  json j{{"detected", v.detected}, {"sigma", v.sigma}};
  j["trigger_bin"] = v.trigger_bin ? json(*v.trigger_bin) : json(nullptr);
  j["range_cm"] = v.range_estimate_cm ? json(*v.range_estimate_cm) : json(nullptr);
  return j;
}

std::vector<int> parse_hidden(const std::string& spec) {
  std::vector<int> out;
  if (spec.empty() || spec == "none") return out;
  for (auto tok : detail::split(spec, ','))
    out.push_back(detail::parse_number<int>(tok, "hidden width"));
  return out;
}

std::string fmt(double v, const char* f = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void print_gaps(const std::vector<GapEvent>& gaps) {
  for (const auto& g : gaps)
    std::cerr << "gap: expected seq " << g.expected_seq << ", got " << g.received_seq << '\n';
}

int cmd_sim(const std::string& scenario_path, const std::string& out, std::uint64_t seed,
            double scale) {
  std::ifstream in(scenario_path);
  if (!in) throw Error("cannot open " + scenario_path);
  const RadarConfig config;
  const auto sf = parse_scenario(in, config);
  CirLog log;
  log.config = config;
  log.scale = scale;
  log.frames = simulate_session(sf.scenario, config, sf.duration_ms, seed);
  save_log(out, log);
  std::cout << "wrote " << log.frames.size() << " CIRs to " << out << '\n';
  return 0;
}

int cmd_calibrate(const std::string& log_path) {
  const auto log = load_log(log_path);
  const auto c = calibrate(log.frames, log.config);
  std::cout << "b0_index " << c.b0_index << "\nconfidence " << fmt(c.confidence, "%.3f") << '\n';
  return 0;
}

int cmd_detect(const std::string& log_path, double gamma, const std::string& rule) {
  const auto log = load_log(log_path);
  const auto calib = calibrate(log.frames, log.config);
  DetectorParams params;
  params.gamma = gamma;
  if (rule == "mean") params.rule = TripleRule::mean_exceeds;
  params.validate();
  Windower win(calib, log.config);
  std::size_t n = 0, hits = 0;
  for (const auto& f : log.frames) {
    auto buf = win.push(f);
    if (!buf) continue;
    const auto v = detect_buffer(process_buffer(*buf), params, log.config);
    json j{{"seq", buf->last_seq()}, {"timestamp_ms", buf->last_timestamp_ms}};
    j.update(verdict_json(v));
    std::cout << j.dump() << '\n';
    ++n;
    hits += v.detected;
  }
  print_gaps(win.gaps());
  std::cerr << hits << " detections in " << n << " buffers\n";
  return 0;
}

int cmd_gen_corpus(const std::string& out, int per, std::uint64_t seed, double scale) {
  write_corpus(out, CorpusSpec::uniform(per), seed, {}, scale);
  std::cout << "wrote " << per * kLabelCombinations << " episodes to " << out << '\n';
  return 0;
}

int cmd_train(const std::string& corpus, const std::string& out, const std::string& hidden,
              std::uint64_t seed, int max_epochs) {
  auto samples = read_corpus_samples(corpus);
  const auto ds = build_dataset(std::move(samples), seed);
  Topology topo;
  topo.hidden = parse_hidden(hidden);
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.max_epochs = max_epochs;
  const auto result = train(ds, topo, cfg);
  save_model(out, result.model);

  const std::string hist_path = out + ".history.csv";
  std::ofstream hist(hist_path);
  hist << "epoch,train_loss,val_loss,val_acc_material,val_acc_surface,val_acc_movement\n";
  for (const auto& e : result.history)
    hist << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_accuracy[0]
         << ',' << e.val_accuracy[1] << ',' << e.val_accuracy[2] << '\n';

  const auto test = evaluate(result.model, ds.gather(ds.test));
  std::cout << "samples " << ds.samples.size() << " (train " << ds.train.size() << ", val "
            << ds.validation.size() << ", test " << ds.test.size() << ")\n"
            << "best_epoch " << result.best_epoch << '\n';
  const char* heads[] = {"material", "surface", "movement"};
  for (int h = 0; h < kHeadCount; ++h)
    std::cout << "test " << heads[h] << " accuracy " << fmt(test.accuracy[h]) << " macro_f1 "
              << fmt(test.macro_f1[h]) << '\n';
  std::cout << "wrote " << out << " and " << hist_path << '\n';
  return 0;
}

int cmd_classify(const std::string& log_path, const std::string& model_path, bool ensemble) {
  const auto log = load_log(log_path);
  const auto model = load_model(model_path);
  InferenceEngine engine(log.config, calibrate(log.frames, log.config), &model, {}, ensemble);
  for (const auto& f : log.frames) {
    auto r = engine.push(f);
    if (!r || !r->verdict.detected) continue;
    json j{{"seq", r->buffer.last_seq}, {"timestamp_ms", r->buffer.timestamp_ms}};
    j["label"] = label_json(r->label);
    j["confidence"] = r->classification->confidence;
    j["range_cm"] = *r->verdict.range_estimate_cm;
    std::cout << j.dump() << '\n';
  }
  print_gaps(engine.gaps());
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& events_path,
               const std::string& model_path, bool ensemble, double active_ma, double idle_ma) {
  const auto log = load_log(log_path);
  std::ifstream ev(events_path);
  if (!ev) throw Error("cannot open " + events_path);
  const auto events = read_events(ev);
  std::optional<MlpModel> model;
  if (!model_path.empty()) model = load_model(model_path);
  const auto r =
      replay_session(log.frames, events, log.config, model ? &*model : nullptr, ensemble);
  for (const auto& a : r.actions) {
    json j{{"timestamp_ms", a.timestamp_ms}};
    switch (a.kind) {
      case ActionKind::start_radar: j["action"] = "start_radar"; break;
      case ActionKind::stop_radar: j["action"] = "stop_radar"; break;
      case ActionKind::alert:
        j["action"] = "alert";
        j["severity"] = to_string(a.alert->severity);
        j["label"] = label_json(a.alert->label);
        j["range_cm"] = a.alert->range_cm;
        j["verdict"] = verdict_json(a.alert->verdict);
        break;
    }
    std::cout << j.dump() << '\n';
  }
  const auto& s = r.final_state;
  std::cerr << "session " << s.elapsed_ms() << " ms, radar active " << s.accumulated_active_ms
            << " ms";
  if (s.elapsed_ms() > 0)
    std::cerr << ", mean current " << fmt(power_estimate(s, active_ma, idle_ma), "%.2f") << " mA";
  std::cerr << '\n';
  return 0;
}

int cmd_bench(const std::string& log_path, const std::string& model_path, int iters) {
  const auto log = load_log(log_path);
  const auto model = load_model(model_path);
  const auto r = bench_pipeline(log.frames, log.config, model, iters);
  std::cout << "stage            p50_ms    p95_ms    max_ms\n";
  auto row = [](const char* name, const Percentiles& p) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-14s %8.4f  %8.4f  %8.4f\n", name, p.p50, p.p95, p.max);
    std::cout << buf;
  };
  row("Pre-processing", r.preprocess);
  row("Detection", r.detection);
  row("Classification", r.classification);
  row("Total", r.total);
  std::cout << "inferences " << r.inferences << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UWB situational-awareness radar toolkit"};
  app.require_subcommand(1);

  std::string scenario, out, log_path, model_path, events_path, corpus, hidden = "12,12";
  std::string rule = "all";
  std::uint64_t seed = 1;
  double scale = 4.0, gamma = kDefaultGamma, active_ma = 39.8, idle_ma = 0.0;
  int iters = 100, per = 200, max_epochs = TrainConfig{}.max_epochs;
  bool ensemble = false;

  auto* sim = app.add_subcommand("sim", "Simulate a scenario file into a CIR log");
  sim->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Output .uaswcir log")->required();
  sim->add_option("--seed", seed, "Noise seed");
  sim->add_option("--scale", scale, "Fixed-point tap scale");

  auto* cal = app.add_subcommand("calibrate", "Report the zero-distance tap of a log");
  cal->add_option("--log", log_path)->required()->check(CLI::ExistingFile);

  auto* det = app.add_subcommand("detect", "Stream detection verdicts for a log");
  det->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
  det->add_option("--gamma", gamma, "Mean-variation threshold");
  det->add_option("--rule", rule, "Far-bin triple rule")->check(CLI::IsMember({"all", "mean"}));

  auto* gen = app.add_subcommand("gen-corpus", "Write a labeled synthetic corpus");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--per", per, "Episodes per label combination")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed);
  gen->add_option("--scale", scale, "Fixed-point tap scale");

  auto* trn = app.add_subcommand("train", "Train the classifier on a corpus directory");
  trn->add_option("--corpus", corpus)->required()->check(CLI::ExistingDirectory);
  trn->add_option("--out", out, "Output model file")->required();
  trn->add_option("--hidden", hidden, "Hidden widths, e.g. 12,12 or none");
  trn->add_option("--seed", seed);
  trn->add_option("--max-epochs", max_epochs)->check(CLI::PositiveNumber);

  auto* cls = app.add_subcommand("classify", "Stream labels for detected obstacles");
  cls->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
  cls->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  cls->add_flag("--ensemble", ensemble, "Majority vote over the last three outputs");

  auto* rep = app.add_subcommand("replay", "Run the full session pipeline and emit alerts");
  rep->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
  rep->add_option("--events", events_path)->required()->check(CLI::ExistingFile);
  rep->add_option("--model", model_path)->check(CLI::ExistingFile);
  rep->add_flag("--ensemble", ensemble);
  rep->add_option("--active-ma", active_ma, "Radar-on current");
  rep->add_option("--idle-ma", idle_ma, "Radar-off current");

  auto* bch = app.add_subcommand("bench", "Per-stage compute latency percentiles");
  bch->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
  bch->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  bch->add_option("--iters", iters)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_sim(scenario, out, seed, scale);
    if (*cal) return cmd_calibrate(log_path);
    if (*det) return cmd_detect(log_path, gamma, rule);
    if (*gen) return cmd_gen_corpus(out, per, seed, scale);
    if (*trn) return cmd_train(corpus, out, hidden, seed, max_epochs);
    if (*cls) return cmd_classify(log_path, model_path, ensemble);
    if (*rep) return cmd_replay(log_path, events_path, model_path, ensemble, active_ma, idle_ma);
    if (*bch) return cmd_bench(log_path, model_path, iters);
  } catch (const std::exception& e) {
    std::cerr << "uasw: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
