// Dense neural obstacle classifier: a ReLU trunk feeding three softmax heads
// (material, surface, movement), trained with Adam on the summed categorical
// cross-entropy of the heads.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uasw/dataset.hpp"
#include "uasw/labels.hpp"

namespace uasw {

inline constexpr int kHeadCount = 3;
inline constexpr std::array<int, kHeadCount> kHeadSizes{kMaterialCount, kSurfaceCount,
                                                        kMovementCount};

inline int head_target(const ObstacleLabel& l, int head) {
  switch (head) {
    case 0: return static_cast<int>(l.material);
    case 1: return static_cast<int>(l.surface);
    default: return static_cast<int>(l.movement);
  }
}

/// Hidden layer widths. Empty means the heads read the input directly.
struct Topology {
  std::vector<int> hidden{12, 12};

  friend bool operator==(const Topology&, const Topology&) = default;
};

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(int in_dim, int out_dim)
      : in(in_dim), out(out_dim), weights(static_cast<std::size_t>(in_dim) * out_dim, 0.0),
        bias(static_cast<std::size_t>(out_dim), 0.0) {}

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;

  void apply(std::span<const double> x, std::span<double> y) const {
    for (int o = 0; o < out; ++o) {
      double acc = bias[o];
      const double* row = &weights[static_cast<std::size_t>(o) * in];
      for (int i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
  }
};

/// Per-feature standardization fitted on the training split.
struct Scaler {
  FeatureVector mean{};
  FeatureVector scale{};

  Scaler() { scale.fill(1.0); }
  friend bool operator==(const Scaler&, const Scaler&) = default;

  [[nodiscard]] FeatureVector apply(const FeatureVector& x) const {
    FeatureVector z;
    for (int i = 0; i < kRangeBins; ++i) z[i] = (x[i] - mean[i]) / scale[i];
    return z;
  }
};

class MlpModel {
 public:
  MlpModel() : MlpModel(Topology{}) {}

  /// All-zero weights and an identity scaler.
  explicit MlpModel(const Topology& topology) {
    int width = kRangeBins;
    for (int h : topology.hidden) {
      if (h < 1) throw InvalidArgument("topology: hidden widths must be positive");
      layers_.emplace_back(width, h);
      width = h;
    }
    for (int size : kHeadSizes) layers_.emplace_back(width, size);
  }

  static MlpModel initialized(const Topology& topology, std::uint64_t seed) {
    MlpModel m(topology);
    std::mt19937_64 rng(seed);
    const auto trunk = m.trunk_size();
    for (std::size_t li = 0; li < m.layers_.size(); ++li) {
      auto& layer = m.layers_[li];
      // He init for ReLU layers, Glorot-style for the softmax heads.
      const double gain = li < trunk ? 2.0 : 1.0;
      std::normal_distribution<double> dist(0.0, std::sqrt(gain / layer.in));
      for (auto& w : layer.weights) w = dist(rng);
    }
    return m;
  }

  [[nodiscard]] std::size_t trunk_size() const { return layers_.size() - kHeadCount; }
  [[nodiscard]] Topology topology() const {
    Topology t;
    t.hidden.clear();
    for (std::size_t i = 0; i < trunk_size(); ++i) t.hidden.push_back(layers_[i].out);
    return t;
  }

  [[nodiscard]] std::vector<DenseLayer>& layers() { return layers_; }
  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
  [[nodiscard]] const DenseLayer& head(int h) const { return layers_[trunk_size() + h]; }

  Scaler scaler;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

struct Probabilities {
  std::array<std::vector<double>, kHeadCount> heads;

  [[nodiscard]] const std::vector<double>& material() const { return heads[0]; }
  [[nodiscard]] const std::vector<double>& surface() const { return heads[1]; }
  [[nodiscard]] const std::vector<double>& movement() const { return heads[2]; }
};

inline void softmax_inplace(std::span<double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (auto& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (auto& x : v) x /= sum;
}

namespace detail {

/// Activations of one forward pass, kept for backpropagation.
struct Trace {
  std::vector<std::vector<double>> acts;  // acts[0] = standardized input
  std::array<std::vector<double>, kHeadCount> probs;
};

inline void forward_trace(const MlpModel& model, const FeatureVector& standardized, Trace& t) {
  const auto& layers = model.layers();
  const auto trunk = model.trunk_size();
  t.acts.resize(trunk + 1);
  t.acts[0].assign(standardized.begin(), standardized.end());
  for (std::size_t l = 0; l < trunk; ++l) {
    t.acts[l + 1].resize(layers[l].out);
    layers[l].apply(t.acts[l], t.acts[l + 1]);
    for (auto& a : t.acts[l + 1]) a = std::max(a, 0.0);
  }
  for (int h = 0; h < kHeadCount; ++h) {
    const auto& layer = layers[trunk + h];
    t.probs[h].resize(layer.out);
    layer.apply(t.acts[trunk], t.probs[h]);
    softmax_inplace(t.probs[h]);
  }
}

}  // namespace detail

/// Head probabilities for raw (unstandardized) features.
inline Probabilities forward(const FeatureVector& features, const MlpModel& model) {
  detail::Trace t;
  detail::forward_trace(model, model.scaler.apply(features), t);
  return Probabilities{std::move(t.probs)};
}

inline Probabilities forward(std::span<const double> features, const MlpModel& model) {
  if (features.size() != static_cast<std::size_t>(kRangeBins))
    throw InvalidArgument("forward: expected " + std::to_string(kRangeBins) + " features, got " +
                          std::to_string(features.size()));
  FeatureVector x;
  std::copy(features.begin(), features.end(), x.begin());
  return forward(x, model);
}

// ---------------------------------------------------------------------------
// Loss and gradients

/// Gradient storage shaped like the model's layers.
using Gradients = std::vector<DenseLayer>;

inline Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  for (const auto& l : model.layers()) g.emplace_back(l.in, l.out);
  return g;
}

/// Mean over the batch of the summed per-head cross-entropy.
inline double batch_loss(const MlpModel& model, std::span<const Sample> batch) {
  if (batch.empty()) return 0.0;
  detail::Trace t;
  double loss = 0.0;
  for (const auto& s : batch) {
    detail::forward_trace(model, model.scaler.apply(s.features), t);
    for (int h = 0; h < kHeadCount; ++h)
      loss -= std::log(std::max(t.probs[h][head_target(s.label, h)], 1e-300));
  }
  return loss / static_cast<double>(batch.size());
}

/// Loss and its gradient with respect to every weight and bias.
inline double loss_and_gradient(const MlpModel& model, std::span<const Sample> batch,
                                Gradients& grad) {
  grad = zero_gradients(model);
  if (batch.empty()) return 0.0;
  const auto& layers = model.layers();
  const auto trunk = model.trunk_size();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  detail::Trace t;
  double loss = 0.0;
  std::vector<double> d_top, d_next;

  for (const auto& s : batch) {
    detail::forward_trace(model, model.scaler.apply(s.features), t);
    const auto& top = t.acts[trunk];
    d_top.assign(top.size(), 0.0);

    for (int h = 0; h < kHeadCount; ++h) {
      const int target = head_target(s.label, h);
      loss -= std::log(std::max(t.probs[h][target], 1e-300));
      const auto& layer = layers[trunk + h];
      auto& g = grad[trunk + h];
      for (int o = 0; o < layer.out; ++o) {
        const double dz = (t.probs[h][o] - (o == target ? 1.0 : 0.0)) * inv_n;
        g.bias[o] += dz;
        const std::size_t row = static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) {
          g.weights[row + i] += dz * top[i];
          d_top[i] += dz * layer.weights[row + i];
        }
      }
    }

    for (std::size_t l = trunk; l-- > 0;) {
      const auto& layer = layers[l];
      auto& g = grad[l];
      const auto& out_act = t.acts[l + 1];
      const auto& in_act = t.acts[l];
      d_next.assign(in_act.size(), 0.0);
      for (int o = 0; o < layer.out; ++o) {
        if (out_act[o] <= 0.0) continue;  // ReLU gate
        const double dz = d_top[o];
        g.bias[o] += dz;
        const std::size_t row = static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) {
          g.weights[row + i] += dz * in_act[i];
          d_next[i] += dz * layer.weights[row + i];
        }
      }
      d_top.swap(d_next);
    }
  }
  return loss * inv_n;
}

// ---------------------------------------------------------------------------
// Adam

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  int max_epochs = 500;
  int patience = 10;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(learning_rate > 0)) throw InvalidArgument("train: learning_rate must be positive");
    if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
    if (max_epochs < 1) throw InvalidArgument("train: max_epochs must be >= 1");
  }
};

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpModel& model, const TrainConfig& cfg)
      : cfg_(cfg), m_(zero_gradients(model)), v_(zero_gradients(model)) {}

  void step(MlpModel& model, const Gradients& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        p[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
      }
    };
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weights, grad[l].weights, m_[l].weights, v_[l].weights);
      update(layers[l].bias, grad[l].bias, m_[l].bias, v_[l].bias);
    }
  }

 private:
  TrainConfig cfg_;
  Gradients m_, v_;
  int t_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
  double loss = 0.0;
  std::array<double, kHeadCount> accuracy{};
  std::array<double, kHeadCount> macro_f1{};

  [[nodiscard]] double mean_accuracy() const {
    return (accuracy[0] + accuracy[1] + accuracy[2]) / kHeadCount;
  }
};

struct Classification {
  ObstacleLabel label;
  std::array<double, kHeadCount> confidence{};
};

inline int argmax(std::span<const double> p) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(p.size()); ++i)
    if (p[i] > p[best]) best = i;  // ties keep the lowest index
  return best;
}

inline Classification classify_probabilities(const Probabilities& p) {
  Classification c;
  std::array<int, kHeadCount> idx{};
  for (int h = 0; h < kHeadCount; ++h) {
    idx[h] = argmax(p.heads[h]);
    c.confidence[h] = p.heads[h][idx[h]];
  }
  c.label = {static_cast<Material>(idx[0]), static_cast<Surface>(idx[1]),
             static_cast<Movement>(idx[2])};
  return c;
}

inline Classification classify(const FeatureVector& features, const MlpModel& model) {
  return classify_probabilities(forward(features, model));
}

inline EvalReport evaluate(const MlpModel& model, std::span<const Sample> samples) {
  EvalReport r;
  if (samples.empty()) return r;
  std::array<std::vector<std::array<int, 3>>, kHeadCount> counts;  // tp, fp, fn
  for (int h = 0; h < kHeadCount; ++h) counts[h].assign(kHeadSizes[h], {0, 0, 0});
  std::array<int, kHeadCount> correct{};
  for (const auto& s : samples) {
    const auto c = classify(s.features, model);
    for (int h = 0; h < kHeadCount; ++h) {
      const int truth = head_target(s.label, h);
      const int pred = head_target(c.label, h);
      if (truth == pred) {
        ++correct[h];
        ++counts[h][truth][0];
      } else {
        ++counts[h][pred][1];
        ++counts[h][truth][2];
      }
    }
  }
  for (int h = 0; h < kHeadCount; ++h) {
    r.accuracy[h] = static_cast<double>(correct[h]) / static_cast<double>(samples.size());
    double f1 = 0.0;
    for (const auto& [tp, fp, fn] : counts[h]) {
      const double denom = 2.0 * tp + fp + fn;
      f1 += denom > 0 ? 2.0 * tp / denom : 0.0;
    }
    r.macro_f1[h] = f1 / kHeadSizes[h];
  }
  r.loss = batch_loss(model, samples);
  return r;
}

// ---------------------------------------------------------------------------
// Training

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::array<double, kHeadCount> val_accuracy{};
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> history;  // history[0] is the untrained model
  int best_epoch = 0;
};

inline Scaler fit_scaler(std::span<const Sample> samples) {
  Scaler s;
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  for (const auto& x : samples)
    for (int i = 0; i < kRangeBins; ++i) s.mean[i] += x.features[i] / n;
  FeatureVector var{};
  for (const auto& x : samples)
    for (int i = 0; i < kRangeBins; ++i) {
      const double d = x.features[i] - s.mean[i];
      var[i] += d * d / n;
    }
  for (int i = 0; i < kRangeBins; ++i) s.scale[i] = var[i] > 0 ? std::sqrt(var[i]) : 1.0;
  return s;
}

/// Rounds every stored parameter to float32, the precision of the model file.
inline void round_to_float(MlpModel& model) {
  auto r = [](double& x) { x = static_cast<double>(static_cast<float>(x)); };
  for (auto& l : model.layers()) {
    for (auto& w : l.weights) r(w);
    for (auto& b : l.bias) r(b);
  }
  for (auto& m : model.scaler.mean) r(m);
  for (auto& s : model.scaler.scale) r(s);
}

inline TrainResult train(const LabeledDataset& data, const Topology& topology,
                         const TrainConfig& cfg = {}) {
  cfg.validate();
  if (data.train.empty()) throw InvalidArgument("train: empty training split");
  const auto train_set = data.gather(data.train);
  const auto val_set = data.gather(data.validation);

  for (int h = 0; h < kHeadCount; ++h) {
    std::vector<int> seen(kHeadSizes[h], 0);
    for (const auto& s : train_set) ++seen[head_target(s.label, h)];
    for (int c = 0; c < kHeadSizes[h]; ++c)
      if (seen[c] == 0)
        throw InvalidArgument("train: class " + std::to_string(c) + " of head " +
                              std::to_string(h) + " absent from training split");
  }
  for (const auto& s : train_set)
    for (double v : s.features)
      if (!std::isfinite(v)) throw InvalidArgument("train: non-finite feature in training split");

  TrainResult result;
  MlpModel model = MlpModel::initialized(topology, cfg.seed);
  model.scaler = fit_scaler(train_set);
  AdamOptimizer adam(model, cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  const auto& monitor = val_set.empty() ? train_set : val_set;
  auto record = [&](int epoch, double train_loss) {
    const auto rep = evaluate(model, monitor);
    result.history.push_back({epoch, train_loss, rep.loss, rep.accuracy});
    return rep.loss;
  };

  double best = record(0, batch_loss(model, train_set));
  result.model = model;
  int since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Sample> batch;
  Gradients grad;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      epoch_loss += loss_and_gradient(model, batch, grad) * static_cast<double>(batch.size());
      adam.step(model, grad);
    }
    const double val_loss = record(epoch, epoch_loss / static_cast<double>(order.size()));
    if (val_loss < best) {
      best = val_loss;
      result.model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  round_to_float(result.model);
  return result;
}

// ---------------------------------------------------------------------------
// Ensemble

/// Per-head majority over up to three recent classifications (oldest first).
/// Ties go to the most recent vote among the tied classes.
inline ObstacleLabel ensemble_classify(std::span<const Classification> history) {
  if (history.empty()) throw InvalidArgument("ensemble_classify: empty history");
  if (history.size() > 3) history = history.last(3);
  std::array<int, kHeadCount> winner{};
  for (int h = 0; h < kHeadCount; ++h) {
    std::vector<int> votes(kHeadSizes[h], 0);
    for (const auto& c : history) ++votes[head_target(c.label, h)];
    const int top = *std::max_element(votes.begin(), votes.end());
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
      const int cls = head_target(it->label, h);
      if (votes[cls] == top) {
        winner[h] = cls;
        break;
      }
    }
  }
  return {static_cast<Material>(winner[0]), static_cast<Surface>(winner[1]),
          static_cast<Movement>(winner[2])};
}

}  // namespace uasw
