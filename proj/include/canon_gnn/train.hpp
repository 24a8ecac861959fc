#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "canon_gnn/canonize.hpp"
#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"
#include "canon_gnn/mpnn.hpp"
#include "canon_gnn/rng.hpp"
#include "canon_gnn/ugc.hpp"
#include "canon_gnn/wltest.hpp"

namespace canon_gnn {

/// How node features are built for a dataset: one-hot colors, optionally
/// concatenated with one-hot positional ranks.
struct EncodingPlan {
  PeKind pe = PeKind::none;
  std::size_t color_width = 1;
  std::size_t pe_width = 0;
  std::optional<LabelUniverse> universe;
  CanonOptions canon;

  std::size_t input_width() const { return color_width + pe_width; }
};

/// Widths are fixed over the whole dataset: colors by the largest color, GC
/// ranks by the largest graph, UGC ranks by the universe size. A universe is
/// attached whenever the dataset is labeled or one is needed.
inline EncodingPlan plan_encoding(const GraphDataset& d, PeKind pe, bool need_universe = false) {
  EncodingPlan plan;
  plan.pe = pe;
  std::size_t max_n = 0;
  Color max_color = 0;
  bool all_labeled = !d.graphs.empty();
  for (const auto& g : d.graphs) {
    max_n = std::max(max_n, g.size());
    max_color = std::max(max_color, g.max_color());
    all_labeled = all_labeled && g.has_labels();
  }
  plan.color_width = static_cast<std::size_t>(max_color) + 1;
  if (all_labeled || pe == PeKind::ugc || need_universe) plan.universe = universe_of(d);
  switch (pe) {
    case PeKind::none: plan.pe_width = 0; break;
    case PeKind::gc: plan.pe_width = max_n; break;
    case PeKind::ugc: plan.pe_width = plan.universe->size(); break;
  }
  return plan;
}

inline FeatureTensor encode_graph(const ColoredGraph& g, const EncodingPlan& plan) {
  FeatureTensor x = one_hot_colors(g, plan.color_width);
  switch (plan.pe) {
    case PeKind::none:
      return x;
    case PeKind::gc:
      return concat_features(x, one_hot_ranks(canonical_form(g, plan.canon).colouring, plan.pe_width));
    case PeKind::ugc:
      return concat_features(x, ugc_encoding(g, *plan.universe, plan.pe_width));
  }
  return x;
}

inline std::size_t class_of(const ColoredGraph& g) {
  const auto& t = g.target();
  if (!t || *t < 0 || std::floor(*t) != *t) {
    throw Error(ErrorKind::configuration,
                "graph '" + g.id() + "' needs a non-negative integer class target");
  }
  return static_cast<std::size_t>(*t);
}

inline std::size_t num_classes(const GraphDataset& d) {
  std::size_t k = 0;
  for (const auto& g : d.graphs) k = std::max(k, class_of(g) + 1);
  return k;
}

inline std::vector<Sample> make_samples(const GraphDataset& d, const std::vector<std::string>& ids,
                                        const EncodingPlan& plan, bool with_tau) {
  std::vector<Sample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto& g = d.at(id);
    Sample s;
    s.graph = &g;
    s.features = encode_graph(g, plan);
    if (with_tau) {
      if (!plan.universe) {
        throw Error(ErrorKind::configuration, "ugc readout needs labeled graphs");
      }
      s.tau = ugc_colouring(g, *plan.universe);
    }
    s.target = class_of(g);
    out.push_back(std::move(s));
  }
  return out;
}

struct TrainSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> validation_ids;
};

/// k folds stratified by class: each class's graphs are shuffled with the
/// stream (seed, class) and dealt round-robin.
inline std::vector<TrainSplit> stratified_folds(const GraphDataset& d, std::size_t k,
                                                std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::configuration, "need at least 2 folds");
  std::map<std::size_t, std::vector<std::string>> by_class;
  for (const auto& g : d.graphs) by_class[class_of(g)].push_back(g.id());
  std::vector<std::vector<std::string>> fold_ids(k);
  std::size_t dealt = 0;
  for (auto& [cls, ids] : by_class) {
    Rng rng = Rng::stream(seed, {cls});
    rng.shuffle(std::span<std::string>(ids));
    for (const auto& id : ids) fold_ids[dealt++ % k].push_back(id);
  }
  std::vector<TrainSplit> splits(k);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t o = 0; o < k; ++o) {
      auto& dst = o == f ? splits[f].test_ids : splits[f].train_ids;
      dst.insert(dst.end(), fold_ids[o].begin(), fold_ids[o].end());
    }
  }
  return splits;
}

/// Builds the features for pe, fits a fresh model and reports accuracies.
/// config.input_width and config.num_classes are derived from the data.
inline TrainReport train(MpnnConfig config, const GraphDataset& d, const TrainSplit& split,
                         PeKind pe, const TrainOptions& options = {},
                         MpnnModel* fitted = nullptr) {
  if (split.train_ids.empty()) throw Error(ErrorKind::configuration, "empty training split");
  const bool with_tau = config.readout == Readout::ugc_weighted;
  const EncodingPlan plan = plan_encoding(d, pe, with_tau);
  config.input_width = plan.input_width();
  config.num_classes = std::max<std::size_t>(num_classes(d), 1);
  MpnnModel model(config);
  const auto train_set = make_samples(d, split.train_ids, plan, with_tau);
  const auto test_set = make_samples(d, split.test_ids, plan, with_tau);
  const auto val_set = make_samples(d, split.validation_ids, plan, with_tau);
  TrainReport report = train_model(model, train_set, test_set, val_set, options);
  if (fitted) *fitted = std::move(model);
  return report;
}

}  // namespace canon_gnn
