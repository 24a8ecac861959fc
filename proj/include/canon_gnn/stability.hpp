#pragma once

#include <optional>

#include "canon_gnn/distance.hpp"
#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"
#include "canon_gnn/mpnn.hpp"

namespace canon_gnn {

struct StabilityRatio {
  double embedding_gap = 0.0;
  AlignmentResult alignment;
  /// gap / d; empty when d = 0 (isomorphic inputs).
  std::optional<double> ratio;
};

/// Embeddings closer than this count as equal for isomorphic inputs.
inline constexpr double kIsomorphicEmbeddingTolerance = 1e-9;

/// ||g(G1) - g(G2)||_2 / d(G1, G2): an empirical lower bound on any valid
/// stability constant of the model.
inline StabilityRatio stability_ratio(const MpnnModel& model, const ColoredGraph& g1,
                                      const FeatureTensor& x1, const ColoredGraph& g2,
                                      const FeatureTensor& x2,
                                      const DiscreteColouring* tau1 = nullptr,
                                      const DiscreteColouring* tau2 = nullptr,
                                      DistanceMode mode = DistanceMode::exact) {
  StabilityRatio r;
  r.alignment = graph_distance(g1, g2, mode);
  const auto e1 = model.forward(g1, x1, tau1).embedding;
  const auto e2 = model.forward(g2, x2, tau2).embedding;
  r.embedding_gap = (e1 - e2).norm();
  if (r.alignment.distance == 0.0) {
    if (r.embedding_gap > kIsomorphicEmbeddingTolerance * std::max(1.0, e1.norm())) {
      throw Error(ErrorKind::validation,
                  "isomorphism violation: d(G1, G2) = 0 but embeddings differ by " +
                      std::to_string(r.embedding_gap));
    }
    return r;
  }
  r.ratio = r.embedding_gap / r.alignment.distance;
  return r;
}

}  // namespace canon_gnn
