#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "canon_gnn/canonize.hpp"
#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"

namespace canon_gnn {

/// Sorted distinct labels of a dataset; label i (0-based) has rank i + 1.
class LabelUniverse {
 public:
  LabelUniverse() = default;

  /// Sorts and deduplicates.
  explicit LabelUniverse(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      index_.emplace(labels_[i], static_cast<std::uint32_t>(i + 1));
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label_of(std::uint32_t rank) const { return labels_.at(rank - 1); }
  bool contains(const std::string& label) const { return index_.contains(label); }

  std::uint32_t rank(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) {
      throw Error(ErrorKind::universe, "label '" + label + "' is not in the universe");
    }
    return it->second;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Union of all labels, ranked lexicographically.
inline LabelUniverse build_universe(const GraphDataset& d) {
  std::vector<std::string> all;
  for (const auto& g : d.graphs) {
    if (!g.has_labels()) {
      throw Error(ErrorKind::labeling, "graph '" + g.id() + "' has no node labels");
    }
    all.insert(all.end(), g.labels()->begin(), g.labels()->end());
  }
  return LabelUniverse(std::move(all));
}

/// The dataset's stored universe when present, otherwise the label union.
inline LabelUniverse universe_of(const GraphDataset& d) {
  if (d.label_universe) {
    for (const auto& g : d.graphs) {
      if (!g.has_labels()) {
        throw Error(ErrorKind::labeling, "graph '" + g.id() + "' has no node labels");
      }
    }
    return LabelUniverse(*d.label_universe);
  }
  return build_universe(d);
}

struct UgcWitness {
  enum class Kind { duplicate_label, inconsistent_edge };
  Kind kind = Kind::inconsistent_edge;

  // duplicate_label
  std::string graph_id;
  std::size_t node_a = 0;
  std::size_t node_b = 0;
  std::string shared_label;

  // inconsistent_edge: graph1 is a reference graph holding the majority
  // relation for the pair, graph2 the deviating one.
  std::string graph1_id;
  std::string graph2_id;
  std::string label_u;
  std::string label_v;
  std::string present_in;
  std::string absent_in;

  friend bool operator==(const UgcWitness&, const UgcWitness&) = default;
};

struct UgcValidationReport {
  bool injective_ok = true;
  bool edge_consistent_ok = true;
  std::vector<UgcWitness> witnesses;

  bool valid() const noexcept { return injective_ok && edge_consistent_ok; }
};

/// Checks the label-based sufficient condition for a universal
/// canonization: labels are injective inside every graph, and any two
/// labels that co-occur in several graphs carry the same edge relation in
/// all of them.
///
/// For each co-occurring label pair the side (edge present / absent) held
/// by more graphs is taken as the reference, ties going to the side of the
/// earliest graph; every graph on the other side yields one witness.
inline UgcValidationReport validate_ugc(const GraphDataset& d, const LabelUniverse& u) {
  UgcValidationReport report;
  std::vector<std::vector<std::uint32_t>> ranks(d.graphs.size());

  for (std::size_t gi = 0; gi < d.graphs.size(); ++gi) {
    const auto& g = d.graphs[gi];
    if (!g.has_labels()) {
      throw Error(ErrorKind::labeling, "graph '" + g.id() + "' has no node labels");
    }
    auto& r = ranks[gi];
    r.resize(g.size());
    std::unordered_map<std::uint32_t, std::size_t> first_node;
    for (std::size_t v = 0; v < g.size(); ++v) {
      r[v] = u.rank(g.label(v));
      auto [it, fresh] = first_node.emplace(r[v], v);
      if (!fresh) {
        report.injective_ok = false;
        UgcWitness w;
        w.kind = UgcWitness::Kind::duplicate_label;
        w.graph_id = g.id();
        w.node_a = it->second;
        w.node_b = v;
        w.shared_label = g.label(v);
        report.witnesses.push_back(std::move(w));
      }
    }
  }

  struct PairRecord {
    std::vector<std::size_t> present;
    std::vector<std::size_t> absent;
  };
  std::unordered_map<std::uint64_t, PairRecord> registry;
  for (std::size_t gi = 0; gi < d.graphs.size(); ++gi) {
    const auto& g = d.graphs[gi];
    const auto& r = ranks[gi];
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        if (r[a] == r[b]) continue;
        const auto lo = std::min(r[a], r[b]);
        const auto hi = std::max(r[a], r[b]);
        auto& rec = registry[(std::uint64_t{lo} << 32) | hi];
        (g.has_edge(a, b) ? rec.present : rec.absent).push_back(gi);
      }
    }
  }

  std::vector<std::uint64_t> conflicted;
  for (const auto& [key, rec] : registry) {
    if (!rec.present.empty() && !rec.absent.empty()) conflicted.push_back(key);
  }
  std::sort(conflicted.begin(), conflicted.end());

  for (auto key : conflicted) {
    const auto& rec = registry.at(key);
    const bool present_is_reference =
        rec.present.size() > rec.absent.size() ||
        (rec.present.size() == rec.absent.size() && rec.present.front() < rec.absent.front());
    const auto& reference = present_is_reference ? rec.present : rec.absent;
    const auto& deviating = present_is_reference ? rec.absent : rec.present;
    const auto& ref_id = d.graphs[reference.front()].id();
    for (auto gi : deviating) {
      UgcWitness w;
      w.kind = UgcWitness::Kind::inconsistent_edge;
      w.graph1_id = ref_id;
      w.graph2_id = d.graphs[gi].id();
      w.label_u = u.label_of(static_cast<std::uint32_t>(key >> 32));
      w.label_v = u.label_of(static_cast<std::uint32_t>(key & 0xFFFFFFFFU));
      w.present_in = present_is_reference ? w.graph1_id : w.graph2_id;
      w.absent_in = present_is_reference ? w.graph2_id : w.graph1_id;
      report.witnesses.push_back(std::move(w));
    }
    report.edge_consistent_ok = false;
  }
  return report;
}

/// tau(v) = rank of v's label in the universe.
inline DiscreteColouring ugc_colouring(const ColoredGraph& g, const LabelUniverse& u) {
  if (!g.has_labels()) {
    throw Error(ErrorKind::labeling, "graph '" + g.id() + "' has no node labels");
  }
  std::vector<std::uint32_t> tau(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) tau[v] = u.rank(g.label(v));
  return {std::move(tau), ColouringMode::ugc};
}

/// One-hot of tau; width defaults to the universe size.
inline FeatureTensor ugc_encoding(const ColoredGraph& g, const LabelUniverse& u,
                                  std::size_t width = 0) {
  if (width == 0) width = u.size();
  return one_hot_ranks(ugc_colouring(g, u), width);
}

/// One-hot of the canonical order rho(v|G); width defaults to n.
inline FeatureTensor gc_encoding(const ColoredGraph& g, std::size_t width = 0,
                                 const CanonOptions& options = {}) {
  if (width == 0) width = g.size();
  return one_hot_ranks(canonical_form(g, options).colouring, width);
}

/// Canonical form read off tau: nodes sorted by tau give the certificate.
inline Certificate ugc_certificate(const ColoredGraph& g, const LabelUniverse& u) {
  const auto tau = ugc_colouring(g, u);
  std::vector<std::size_t> nodes(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) nodes[v] = v;
  std::sort(nodes.begin(), nodes.end(), [&](auto a, auto b) { return tau[a] < tau[b]; });
  std::vector<std::uint32_t> order(g.size());
  for (std::size_t p = 0; p < nodes.size(); ++p) order[nodes[p]] = static_cast<std::uint32_t>(p + 1);
  return certificate_of(g, DiscreteColouring(std::move(order), ColouringMode::gc));
}

}  // namespace canon_gnn
