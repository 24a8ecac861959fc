#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"
#include "canon_gnn/rng.hpp"

namespace canon_gnn {

enum class Readout { sum, mean, ugc_weighted };

struct MpnnConfig {
  std::size_t num_layers = 3;
  std::size_t hidden_dim = 32;
  /// Per-layer epsilon; missing entries are 0.
  std::vector<double> epsilon;
  Readout readout = Readout::sum;
  std::size_t input_width = 1;
  std::size_t num_classes = 2;
  std::uint64_t seed = 0;
  /// Store each readout matrix W_k as its diagonal only.
  bool readout_diagonal = false;

  double epsilon_at(std::size_t layer) const {
    return layer < epsilon.size() ? epsilon[layer] : 0.0;
  }

  void validate() const {
    if (num_layers < 1) throw Error(ErrorKind::configuration, "num_layers must be >= 1");
    if (hidden_dim < 1) throw Error(ErrorKind::configuration, "hidden_dim must be >= 1");
    if (input_width < 1) throw Error(ErrorKind::configuration, "input_width must be >= 1");
    if (num_classes < 1) throw Error(ErrorKind::configuration, "num_classes must be >= 1");
    if (epsilon.size() > num_layers) {
      throw Error(ErrorKind::configuration, "more epsilon values than layers");
    }
    for (double e : epsilon) {
      if (!std::isfinite(e)) throw Error(ErrorKind::configuration, "epsilon must be finite");
    }
  }
};

/// Update map phi(z) = relu(W2 relu(W1 z + b1) + b2).
struct LayerParams {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Parameters, or gradients with the same shapes.
struct MpnnParams {
  std::vector<LayerParams> layers;
  /// Label rank -> W_k (hidden x hidden, or hidden x 1 when diagonal).
  std::map<std::uint32_t, Eigen::MatrixXd> readout_bank;
  Eigen::MatrixXd classifier_w;
  Eigen::VectorXd classifier_b;

  MpnnParams zeros_like() const {
    MpnnParams z;
    for (const auto& l : layers) {
      z.layers.push_back({Eigen::MatrixXd::Zero(l.w1.rows(), l.w1.cols()),
                          Eigen::VectorXd::Zero(l.b1.size()),
                          Eigen::MatrixXd::Zero(l.w2.rows(), l.w2.cols()),
                          Eigen::VectorXd::Zero(l.b2.size())});
    }
    for (const auto& [k, w] : readout_bank) {
      z.readout_bank.emplace(k, Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    z.classifier_w = Eigen::MatrixXd::Zero(classifier_w.rows(), classifier_w.cols());
    z.classifier_b = Eigen::VectorXd::Zero(classifier_b.size());
    return z;
  }

  /// Visits every parameter block in a fixed order: layers (w1, b1, w2, b2),
  /// readout bank by ascending rank, classifier weight, classifier bias.
  template <typename Fn>
  void for_each_block(Fn&& fn) {
    for (std::size_t t = 0; t < layers.size(); ++t) {
      const std::string p = "layer" + std::to_string(t) + ".";
      fn(p + "w1", layers[t].w1.data(), static_cast<std::size_t>(layers[t].w1.size()));
      fn(p + "b1", layers[t].b1.data(), static_cast<std::size_t>(layers[t].b1.size()));
      fn(p + "w2", layers[t].w2.data(), static_cast<std::size_t>(layers[t].w2.size()));
      fn(p + "b2", layers[t].b2.data(), static_cast<std::size_t>(layers[t].b2.size()));
    }
    for (auto& [k, w] : readout_bank) {
      fn("readout.W" + std::to_string(k), w.data(), static_cast<std::size_t>(w.size()));
    }
    fn("classifier.w", classifier_w.data(), static_cast<std::size_t>(classifier_w.size()));
    fn("classifier.b", classifier_b.data(), static_cast<std::size_t>(classifier_b.size()));
  }

  template <typename Fn>
  void for_each_block(Fn&& fn) const {
    const_cast<MpnnParams*>(this)->for_each_block(
        [&](const std::string& name, double* data, std::size_t size) {
          fn(name, static_cast<const double*>(data), size);
        });
  }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for_each_block([&](const std::string&, const double*, std::size_t s) { total += s; });
    return total;
  }
};

struct ForwardOutput {
  Eigen::VectorXd embedding;
  Eigen::VectorXd logits;
};

namespace detail {

inline Eigen::MatrixXd relu(const Eigen::MatrixXd& x) { return x.cwiseMax(0.0); }

inline Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

/// (1 + eps) h_v + sum of neighbour rows.
inline Eigen::MatrixXd aggregate(const ColoredGraph& g, const Eigen::MatrixXd& h, double eps) {
  Eigen::MatrixXd z = (1.0 + eps) * h;
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (auto u : g.neighbors(v)) {
      z.row(static_cast<Eigen::Index>(v)) += h.row(static_cast<Eigen::Index>(u));
    }
  }
  return z;
}

struct ForwardTrace {
  std::vector<Eigen::MatrixXd> h;  // h[0] input, h[t + 1] output of layer t
  std::vector<Eigen::MatrixXd> z;
  std::vector<Eigen::MatrixXd> pre1;
  std::vector<Eigen::MatrixXd> act1;
  std::vector<Eigen::MatrixXd> pre2;
  Eigen::VectorXd embedding;
  Eigen::VectorXd logits;
};

inline std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Message-passing network with GIN-style layers
///   h'_v = phi((1 + eps) h_v + sum_{u in N(v)} h_u)
/// followed by a sum, mean or label-indexed readout and an affine
/// classifier.
class MpnnModel {
 public:
  explicit MpnnModel(MpnnConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto d = static_cast<Eigen::Index>(config_.hidden_dim);
    std::size_t fan_in = config_.input_width;
    for (std::size_t t = 0; t < config_.num_layers; ++t) {
      const auto in = static_cast<Eigen::Index>(fan_in);
      LayerParams l;
      l.w1 = gaussian(d, in, std::sqrt(2.0 / static_cast<double>(fan_in)), {1, t, 1});
      l.b1 = Eigen::VectorXd::Zero(d);
      l.w2 = gaussian(d, d, std::sqrt(2.0 / static_cast<double>(d)), {1, t, 2});
      l.b2 = Eigen::VectorXd::Zero(d);
      params_.layers.push_back(std::move(l));
      fan_in = config_.hidden_dim;
    }
    params_.classifier_w = gaussian(static_cast<Eigen::Index>(config_.num_classes), d,
                                    std::sqrt(1.0 / static_cast<double>(d)), {2});
    params_.classifier_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config_.num_classes));
  }

  const MpnnConfig& config() const noexcept { return config_; }
  MpnnParams& params() noexcept { return params_; }
  const MpnnParams& params() const noexcept { return params_; }

  /// Allocates W_k for every rank in tau that has none yet. The initial value
  /// of W_k depends only on (seed, k), never on allocation order.
  void ensure_readout_weights(const DiscreteColouring& tau) {
    for (auto k : tau.order()) {
      if (params_.readout_bank.contains(k)) continue;
      const auto d = static_cast<Eigen::Index>(config_.hidden_dim);
      const double scale = std::sqrt(1.0 / static_cast<double>(config_.hidden_dim));
      if (config_.readout_diagonal) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Ones(d, 1) +
                            gaussian(d, 1, 0.1, {3, static_cast<std::uint64_t>(k)});
        params_.readout_bank.emplace(k, std::move(w));
      } else {
        params_.readout_bank.emplace(k, gaussian(d, d, scale, {3, static_cast<std::uint64_t>(k)}));
      }
    }
  }

  ForwardOutput forward(const ColoredGraph& g, const FeatureTensor& features,
                        const DiscreteColouring* tau = nullptr) const {
    auto trace = forward_trace(g, features, tau);
    return {std::move(trace.embedding), std::move(trace.logits)};
  }

  detail::ForwardTrace forward_trace(const ColoredGraph& g, const FeatureTensor& features,
                                     const DiscreteColouring* tau) const {
    check_inputs(g, features, tau);
    detail::ForwardTrace tr;
    tr.h.push_back(features.matrix());
    for (std::size_t t = 0; t < params_.layers.size(); ++t) {
      const auto& l = params_.layers[t];
      tr.z.push_back(detail::aggregate(g, tr.h.back(), config_.epsilon_at(t)));
      tr.pre1.push_back((tr.z.back() * l.w1.transpose()).rowwise() + l.b1.transpose());
      tr.act1.push_back(detail::relu(tr.pre1.back()));
      tr.pre2.push_back((tr.act1.back() * l.w2.transpose()).rowwise() + l.b2.transpose());
      tr.h.push_back(detail::relu(tr.pre2.back()));
    }
    const Eigen::MatrixXd& h = tr.h.back();
    switch (config_.readout) {
      case Readout::sum:
        tr.embedding = h.colwise().sum().transpose();
        break;
      case Readout::mean:
        tr.embedding = h.colwise().sum().transpose() / static_cast<double>(g.size());
        break;
      case Readout::ugc_weighted:
        tr.embedding = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config_.hidden_dim));
        for (std::size_t v = 0; v < g.size(); ++v) {
          const auto& w = params_.readout_bank.at((*tau)[v]);
          const auto hv = h.row(static_cast<Eigen::Index>(v)).transpose();
          if (config_.readout_diagonal) {
            tr.embedding += w.col(0).cwiseProduct(hv);
          } else {
            tr.embedding += w * hv;
          }
        }
        break;
    }
    tr.logits = params_.classifier_w * tr.embedding + params_.classifier_b;
    return tr;
  }

  /// Reverse pass for one graph given dL/dlogits; accumulates into grads,
  /// which must have the shape of params() (see MpnnParams::zeros_like).
  void backward(const detail::ForwardTrace& tr, const ColoredGraph& g,
                const DiscreteColouring* tau, const Eigen::VectorXd& dlogits,
                MpnnParams& grads) const {
    grads.classifier_w += dlogits * tr.embedding.transpose();
    grads.classifier_b += dlogits;
    const Eigen::VectorXd de = params_.classifier_w.transpose() * dlogits;

    const Eigen::MatrixXd& h_last = tr.h.back();
    Eigen::MatrixXd dh(h_last.rows(), h_last.cols());
    switch (config_.readout) {
      case Readout::sum:
        dh.rowwise() = de.transpose();
        break;
      case Readout::mean:
        dh.rowwise() = de.transpose() / static_cast<double>(g.size());
        break;
      case Readout::ugc_weighted:
        for (std::size_t v = 0; v < g.size(); ++v) {
          const auto k = (*tau)[v];
          const auto& w = params_.readout_bank.at(k);
          auto& dw = grads.readout_bank.at(k);
          const auto row = static_cast<Eigen::Index>(v);
          const Eigen::VectorXd hv = h_last.row(row).transpose();
          if (config_.readout_diagonal) {
            dw.col(0) += de.cwiseProduct(hv);
            dh.row(row) = w.col(0).cwiseProduct(de).transpose();
          } else {
            dw += de * hv.transpose();
            dh.row(row) = (w.transpose() * de).transpose();
          }
        }
        break;
    }

    for (std::size_t t = params_.layers.size(); t-- > 0;) {
      const auto& l = params_.layers[t];
      auto& gl = grads.layers[t];
      const Eigen::MatrixXd dpre2 = dh.cwiseProduct(detail::relu_mask(tr.pre2[t]));
      gl.w2 += dpre2.transpose() * tr.act1[t];
      gl.b2 += dpre2.colwise().sum().transpose();
      const Eigen::MatrixXd dpre1 =
          (dpre2 * l.w2).cwiseProduct(detail::relu_mask(tr.pre1[t]));
      gl.w1 += dpre1.transpose() * tr.z[t];
      gl.b1 += dpre1.colwise().sum().transpose();
      const Eigen::MatrixXd dz = dpre1 * l.w1;
      // The aggregation is symmetric in the adjacency, so its transpose is itself.
      dh = detail::aggregate(g, dz, config_.epsilon_at(t));
    }
  }

  /// FNV-1a over the little-endian bytes of every parameter.
  std::string digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    params_.for_each_block([&](const std::string&, const double* data, std::size_t size) {
      for (std::size_t i = 0; i < size; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, data + i, sizeof bits);
        std::uint8_t le[8];
        for (int b = 0; b < 8; ++b) le[b] = static_cast<std::uint8_t>(bits >> (8 * b));
        h = detail::fnv1a(le, 8, h);
      }
    });
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return s;
  }

 private:
  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double scale,
                           std::initializer_list<std::uint64_t> stream) const {
    Rng rng = Rng::stream(config_.seed, stream);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
    }
    return m;
  }

  void check_inputs(const ColoredGraph& g, const FeatureTensor& features,
                    const DiscreteColouring* tau) const {
    if (features.rows() != g.size()) {
      throw Error(ErrorKind::dimension, "features have " + std::to_string(features.rows()) +
                                            " rows for a graph with " + std::to_string(g.size()) +
                                            " nodes");
    }
    if (features.cols() != config_.input_width) {
      throw Error(ErrorKind::dimension, "feature width " + std::to_string(features.cols()) +
                                            " does not match model input width " +
                                            std::to_string(config_.input_width));
    }
    if (config_.readout == Readout::ugc_weighted) {
      if (!tau || tau->mode() != ColouringMode::ugc) {
        throw Error(ErrorKind::configuration,
                    "ugc_weighted readout needs a UGC colouring for graph '" + g.id() + "'");
      }
      if (tau->size() != g.size()) {
        throw Error(ErrorKind::dimension, "colouring size does not match graph");
      }
      for (auto k : tau->order()) {
        if (!params_.readout_bank.contains(k)) {
          throw Error(ErrorKind::configuration,
                      "no readout weight for label rank " + std::to_string(k) +
                          "; call ensure_readout_weights first");
        }
      }
    }
  }

  MpnnConfig config_;
  MpnnParams params_;
};

/// Numerically stable softmax cross-entropy; returns the loss and writes
/// dL/dlogits.
inline double softmax_cross_entropy(const Eigen::VectorXd& logits, std::size_t target,
                                    Eigen::VectorXd& dlogits) {
  if (target >= static_cast<std::size_t>(logits.size())) {
    throw Error(ErrorKind::configuration, "target class " + std::to_string(target) +
                                              " out of range for " +
                                              std::to_string(logits.size()) + " classes");
  }
  const double mx = logits.maxCoeff();
  const Eigen::VectorXd ex = (logits.array() - mx).exp().matrix();
  const double z = ex.sum();
  dlogits = ex / z;
  const auto t = static_cast<Eigen::Index>(target);
  dlogits(t) -= 1.0;
  return -(logits(t) - mx - std::log(z));
}

/// One training or evaluation example.
struct Sample {
  const ColoredGraph* graph = nullptr;
  FeatureTensor features;
  std::optional<DiscreteColouring> tau;
  std::size_t target = 0;
};

struct BatchResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

inline std::size_t argmax(const Eigen::VectorXd& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

/// Mean cross-entropy over the batch and, when grads is given, its gradient.
/// Samples are reduced in ascending graph-id order.
inline BatchResult batch_loss(const MpnnModel& model, const std::vector<Sample>& batch,
                              MpnnParams* grads = nullptr) {
  if (batch.empty()) return {};
  std::vector<std::size_t> order(batch.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return batch[a].graph->id() < batch[b].graph->id();
  });
  const double scale = 1.0 / static_cast<double>(batch.size());
  BatchResult r;
  std::size_t correct = 0;
  Eigen::VectorXd dlogits;
  for (auto i : order) {
    const auto& s = batch[i];
    const DiscreteColouring* tau = s.tau ? &*s.tau : nullptr;
    const auto tr = model.forward_trace(*s.graph, s.features, tau);
    const double loss = softmax_cross_entropy(tr.logits, s.target, dlogits);
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::numeric, "non-finite loss on graph '" + s.graph->id() + "'");
    }
    r.loss += scale * loss;
    if (argmax(tr.logits) == s.target) ++correct;
    if (grads) model.backward(tr, *s.graph, tau, scale * dlogits, *grads);
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(batch.size());
  return r;
}

inline BatchResult evaluate(const MpnnModel& model, const std::vector<Sample>& batch) {
  return batch_loss(model, batch, nullptr);
}

struct TrainOptions {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  std::size_t max_epochs = 300;
  /// Stop once the monitored loss has not improved by min_delta for this
  /// many consecutive epochs.
  std::size_t patience = 10;
  double min_delta = 1e-6;
  /// Global gradient norm cap applied before the momentum update; 0 disables.
  double max_grad_norm = 1.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double final_train_accuracy = 0.0;
  double final_test_accuracy = 0.0;
  std::string parameters_digest;
  double wall_clock_seconds = 0.0;
  bool early_stopped = false;
};

/// Full-batch gradient descent with heavy-ball momentum. The early-stopping
/// monitor is the validation loss when a validation set is given, the
/// training loss otherwise.
inline TrainReport train_model(MpnnModel& model, const std::vector<Sample>& train_set,
                               const std::vector<Sample>& test_set,
                               const std::vector<Sample>& validation_set,
                               const TrainOptions& options) {
  if (train_set.empty()) throw Error(ErrorKind::configuration, "empty training split");
  const auto started = std::chrono::steady_clock::now();
  if (model.config().readout == Readout::ugc_weighted) {
    for (const auto* set : {&train_set, &test_set, &validation_set}) {
      for (const auto& s : *set) {
        if (s.tau) model.ensure_readout_weights(*s.tau);
      }
    }
  }

  TrainReport report;
  MpnnParams velocity = model.params().zeros_like();
  double best = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    MpnnParams grads = model.params().zeros_like();
    const BatchResult tr = batch_loss(model, train_set, &grads);

    // v <- momentum * v + g;  theta <- theta - lr * v
    std::vector<double*> vel_blocks;
    velocity.for_each_block([&](const std::string&, double* d, std::size_t) { vel_blocks.push_back(d); });
    std::vector<const double*> grad_blocks;
    grads.for_each_block([&](const std::string&, double* d, std::size_t) { grad_blocks.push_back(d); });
    double scale = 1.0;
    if (options.max_grad_norm > 0.0) {
      double sq = 0.0;
      grads.for_each_block([&](const std::string&, double* g, std::size_t size) {
        for (std::size_t i = 0; i < size; ++i) sq += g[i] * g[i];
      });
      const double norm = std::sqrt(sq);
      if (norm > options.max_grad_norm) scale = options.max_grad_norm / norm;
    }
    std::size_t b = 0;
    model.params().for_each_block([&](const std::string&, double* p, std::size_t size) {
      double* v = vel_blocks[b];
      const double* g = grad_blocks[b];
      for (std::size_t i = 0; i < size; ++i) {
        v[i] = options.momentum * v[i] + scale * g[i];
        p[i] -= options.learning_rate * v[i];
      }
      ++b;
    });

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = tr.loss;
    rec.train_accuracy = tr.accuracy;
    rec.test_accuracy = test_set.empty() ? 0.0 : evaluate(model, test_set).accuracy;
    report.epochs.push_back(rec);

    const double monitored = validation_set.empty() ? tr.loss : evaluate(model, validation_set).loss;
    if (monitored < best - options.min_delta) {
      best = monitored;
      stall = 0;
    } else if (++stall >= options.patience) {
      report.early_stopped = true;
      break;
    }
  }

  report.final_train_accuracy = evaluate(model, train_set).accuracy;
  report.final_test_accuracy = test_set.empty() ? 0.0 : evaluate(model, test_set).accuracy;
  report.parameters_digest = model.digest();
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

/// Largest singular value of w by power iteration on w^T w.
inline double spectral_norm(const Eigen::MatrixXd& w, std::size_t iterations = 500) {
  if (w.size() == 0) return 0.0;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(w.cols()) / std::sqrt(static_cast<double>(w.cols()));
  double sigma = 0.0;
  for (std::size_t i = 0; i < iterations; ++i) {
    Eigen::VectorXd y = w.transpose() * (w * x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
    sigma = std::sqrt(norm);
  }
  return sigma;
}

/// ||W2|| ||W1|| bounds the Lipschitz constant of phi for layer t, since the
/// rectifier is 1-Lipschitz.
inline double layer_lipschitz_bound(const MpnnModel& model, std::size_t layer) {
  const auto& l = model.params().layers.at(layer);
  return spectral_norm(l.w2) * spectral_norm(l.w1);
}

// Checkpoint layout (all integers and floats little-endian):
//   magic "CGNNMDL\0", u32 version = 1,
//   u32 num_layers, u32 hidden_dim, u32 input_width, u32 num_classes,
//   u32 readout (0 sum, 1 mean, 2 ugc_weighted), u32 readout_diagonal, u64 seed,
//   f64 epsilon[num_layers],
//   per layer: w1, b1, w2, b2 (matrices column-major as f64),
//   classifier w, classifier b,
//   u32 bank size, then per entry: u32 rank, f64 values.

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'C', 'G', 'N', 'N', 'M', 'D', 'L', '\0'};

inline void write_u64(std::ostream& out, std::uint64_t x) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
  out.write(b, 8);
}
inline void write_u32(std::ostream& out, std::uint32_t x) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
  out.write(b, 4);
}
inline void write_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  write_u64(out, bits);
}
inline std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorKind::parse, "truncated checkpoint");
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}
inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorKind::parse, "truncated checkpoint");
  std::uint32_t x = 0;
  for (int i = 3; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}
inline double read_f64(std::istream& in) {
  const std::uint64_t bits = read_u64(in);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace detail

inline void save_checkpoint(const MpnnModel& model, std::ostream& out) {
  const auto& c = model.config();
  out.write(detail::kCheckpointMagic, 8);
  detail::write_u32(out, 1);
  detail::write_u32(out, static_cast<std::uint32_t>(c.num_layers));
  detail::write_u32(out, static_cast<std::uint32_t>(c.hidden_dim));
  detail::write_u32(out, static_cast<std::uint32_t>(c.input_width));
  detail::write_u32(out, static_cast<std::uint32_t>(c.num_classes));
  detail::write_u32(out, static_cast<std::uint32_t>(c.readout));
  detail::write_u32(out, c.readout_diagonal ? 1U : 0U);
  detail::write_u64(out, c.seed);
  for (std::size_t t = 0; t < c.num_layers; ++t) detail::write_f64(out, c.epsilon_at(t));
  const auto& p = model.params();
  auto put = [&](const double* d, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) detail::write_f64(out, d[i]);
  };
  for (const auto& l : p.layers) {
    put(l.w1.data(), l.w1.size());
    put(l.b1.data(), l.b1.size());
    put(l.w2.data(), l.w2.size());
    put(l.b2.data(), l.b2.size());
  }
  put(p.classifier_w.data(), p.classifier_w.size());
  put(p.classifier_b.data(), p.classifier_b.size());
  detail::write_u32(out, static_cast<std::uint32_t>(p.readout_bank.size()));
  for (const auto& [k, w] : p.readout_bank) {
    detail::write_u32(out, k);
    put(w.data(), w.size());
  }
}

inline MpnnModel load_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, detail::kCheckpointMagic, 8) != 0) {
    throw Error(ErrorKind::parse, "not a canon-gnn checkpoint");
  }
  if (const auto version = detail::read_u32(in); version != 1) {
    throw Error(ErrorKind::parse, "unsupported checkpoint version " + std::to_string(version));
  }
  MpnnConfig c;
  c.num_layers = detail::read_u32(in);
  c.hidden_dim = detail::read_u32(in);
  c.input_width = detail::read_u32(in);
  c.num_classes = detail::read_u32(in);
  const auto readout = detail::read_u32(in);
  if (readout > 2) throw Error(ErrorKind::parse, "bad readout code in checkpoint");
  c.readout = static_cast<Readout>(readout);
  c.readout_diagonal = detail::read_u32(in) != 0;
  c.seed = detail::read_u64(in);
  c.epsilon.resize(c.num_layers);
  for (auto& e : c.epsilon) e = detail::read_f64(in);
  MpnnModel model(c);
  auto& p = model.params();
  auto get = [&](double* d, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) d[i] = detail::read_f64(in);
  };
  for (auto& l : p.layers) {
    get(l.w1.data(), l.w1.size());
    get(l.b1.data(), l.b1.size());
    get(l.w2.data(), l.w2.size());
    get(l.b2.data(), l.b2.size());
  }
  get(p.classifier_w.data(), p.classifier_w.size());
  get(p.classifier_b.data(), p.classifier_b.size());
  const auto bank = detail::read_u32(in);
  const auto d = static_cast<Eigen::Index>(c.hidden_dim);
  for (std::uint32_t i = 0; i < bank; ++i) {
    const auto k = detail::read_u32(in);
    Eigen::MatrixXd w(d, c.readout_diagonal ? 1 : d);
    get(w.data(), w.size());
    p.readout_bank.emplace(k, std::move(w));
  }
  return model;
}

}  // namespace canon_gnn
