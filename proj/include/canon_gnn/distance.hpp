#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "canon_gnn/canonize.hpp"
#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"

namespace canon_gnn {

enum class DistanceMode { exact, heuristic };

inline constexpr std::size_t kExactDistanceLimit = 10;

/// Alignment of g1 onto g2: node i of g1 is matched with permutation[i] of g2.
struct AlignmentResult {
  Permutation permutation;
  /// ||A1 - P A2 P^T||_F + #{i : c1(i) != c2(pi(i))}.
  double distance = 0.0;
  bool exact = false;
  std::size_t nodes_explored = 0;
  /// Unordered node pairs whose edge relation disagrees under the alignment.
  std::size_t edge_mismatches = 0;
  std::size_t color_mismatches = 0;
};

/// The Frobenius term counts each mismatched unordered pair twice.
inline double alignment_distance(std::size_t edge_mismatches, std::size_t color_mismatches) {
  return std::sqrt(2.0 * static_cast<double>(edge_mismatches)) +
         static_cast<double>(color_mismatches);
}

struct AlignmentCost {
  std::size_t edge_mismatches = 0;
  std::size_t color_mismatches = 0;
  double distance() const { return alignment_distance(edge_mismatches, color_mismatches); }
};

inline AlignmentCost alignment_cost(const ColoredGraph& g1, const ColoredGraph& g2,
                                    const Permutation& p) {
  if (g1.size() != g2.size() || p.size() != g1.size()) {
    throw Error(ErrorKind::dimension, "alignment requires equal sizes");
  }
  AlignmentCost c;
  const std::size_t n = g1.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (g1.color(i) != g2.color(p[i])) ++c.color_mismatches;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (g1.has_edge(i, j) != g2.has_edge(p[i], p[j])) ++c.edge_mismatches;
    }
  }
  return c;
}

namespace detail {

inline void check_same_size(const ColoredGraph& g1, const ColoredGraph& g2) {
  if (g1.size() != g2.size()) {
    throw Error(ErrorKind::dimension, "graph distance needs equal node counts (" +
                                          std::to_string(g1.size()) + " vs " +
                                          std::to_string(g2.size()) + ")");
  }
}

/// Greedy matching guided by joint colour refinement, then first-improvement
/// pairwise swaps until no swap lowers the cost.
inline AlignmentResult heuristic_alignment(const ColoredGraph& g1, const ColoredGraph& g2) {
  const std::size_t n = g1.size();

  ColoredGraph joint(2 * n);
  std::vector<Color> colors(2 * n);
  for (std::size_t v = 0; v < n; ++v) {
    colors[v] = g1.color(v);
    colors[n + v] = g2.color(v);
  }
  joint.set_colors(colors);
  for (auto [u, v] : g1.edges()) joint.add_edge(u, v);
  for (auto [u, v] : g2.edges()) joint.add_edge(n + u, n + v);
  const Colouring refined = refine(joint, Colouring::of(joint));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (refined[a] != refined[b]) return refined[a] < refined[b];
    return g1.degree(a) > g1.degree(b);
  });

  std::vector<std::size_t> image(n, n);
  std::vector<bool> used(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = order[k];
    std::size_t best = n;
    std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
    for (std::size_t b = 0; b < n; ++b) {
      if (used[b]) continue;
      std::int64_t cost = refined[a] == refined[n + b] ? 0 : 4 * static_cast<std::int64_t>(n);
      if (g1.color(a) != g2.color(b)) cost += 2;
      for (std::size_t t = 0; t < k; ++t) {
        const std::size_t prev = order[t];
        if (g1.has_edge(a, prev) != g2.has_edge(b, image[prev])) cost += 1;
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = b;
      }
    }
    image[a] = best;
    used[best] = true;
  }

  AlignmentCost cost = alignment_cost(g1, g2, Permutation(image));
  std::size_t explored = 1;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t a = 0; a < n && !improved; ++a) {
      for (std::size_t b = a + 1; b < n && !improved; ++b) {
        ++explored;
        std::int64_t d_edges = 0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == a || k == b) continue;
          const bool ea = g1.has_edge(a, k);
          const bool eb = g1.has_edge(b, k);
          d_edges += static_cast<int>(ea != g2.has_edge(image[b], image[k])) -
                     static_cast<int>(ea != g2.has_edge(image[a], image[k]));
          d_edges += static_cast<int>(eb != g2.has_edge(image[a], image[k])) -
                     static_cast<int>(eb != g2.has_edge(image[b], image[k]));
        }
        std::int64_t d_colors =
            static_cast<int>(g1.color(a) != g2.color(image[b])) +
            static_cast<int>(g1.color(b) != g2.color(image[a])) -
            static_cast<int>(g1.color(a) != g2.color(image[a])) -
            static_cast<int>(g1.color(b) != g2.color(image[b]));
        const AlignmentCost next{
            static_cast<std::size_t>(static_cast<std::int64_t>(cost.edge_mismatches) + d_edges),
            static_cast<std::size_t>(static_cast<std::int64_t>(cost.color_mismatches) + d_colors)};
        if (next.distance() < cost.distance() - 1e-12) {
          std::swap(image[a], image[b]);
          cost = next;
          improved = true;
        }
      }
    }
  }

  AlignmentResult r;
  r.permutation = Permutation(std::move(image));
  r.edge_mismatches = cost.edge_mismatches;
  r.color_mismatches = cost.color_mismatches;
  r.distance = cost.distance();
  r.exact = false;
  r.nodes_explored = explored;
  return r;
}

/// Depth-first branch and bound over assignments of g1 nodes (highest
/// degree first) to g2 nodes.
///
/// Lower bound at a partial assignment S -> pi(S): mismatches already fixed
/// inside S, plus |r1 - r2| where r counts edges with an endpoint outside S
/// (those pairs are matched among themselves by any completion), plus the
/// color multiset mismatch between the unassigned nodes of both graphs.
class BranchAndBound {
 public:
  BranchAndBound(const ColoredGraph& g1, const ColoredGraph& g2)
      : g1_(g1), g2_(g2), n_(g1.size()) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](auto a, auto b) { return g1_.degree(a) > g1_.degree(b); });

    std::vector<Color> palette(g1.colors());
    palette.insert(palette.end(), g2.colors().begin(), g2.colors().end());
    std::sort(palette.begin(), palette.end());
    palette.erase(std::unique(palette.begin(), palette.end()), palette.end());
    auto index_of = [&](Color c) {
      return static_cast<std::size_t>(std::lower_bound(palette.begin(), palette.end(), c) -
                                      palette.begin());
    };
    cidx1_.resize(n_);
    cidx2_.resize(n_);
    count1_.assign(palette.size(), 0);
    count2_.assign(palette.size(), 0);
    for (std::size_t v = 0; v < n_; ++v) {
      cidx1_[v] = index_of(g1.color(v));
      cidx2_[v] = index_of(g2.color(v));
      ++count1_[cidx1_[v]];
      ++count2_[cidx2_[v]];
    }
    image_.assign(n_, n_);
    used_.assign(n_, false);
  }

  AlignmentResult run(const AlignmentResult& upper) {
    best_value_ = upper.distance;
    best_image_ = upper.permutation.mapping();
    dfs(0, 0, 0, 0, 0);
    AlignmentResult r;
    r.permutation = Permutation(best_image_);
    const auto cost = alignment_cost(g1_, g2_, r.permutation);
    r.edge_mismatches = cost.edge_mismatches;
    r.color_mismatches = cost.color_mismatches;
    r.distance = cost.distance();
    r.exact = true;
    r.nodes_explored = explored_;
    return r;
  }

 private:
  std::size_t color_lower_bound() const {
    std::size_t common = 0;
    std::size_t remaining = 0;
    for (std::size_t c = 0; c < count1_.size(); ++c) {
      common += std::min(count1_[c], count2_[c]);
      remaining += count1_[c];
    }
    return remaining - common;
  }

  void dfs(std::size_t depth, std::size_t edge_mm, std::size_t color_mm, std::size_t inner1,
           std::size_t inner2) {
    ++explored_;
    if (depth == n_) {
      const double value = alignment_distance(edge_mm, color_mm);
      if (value < best_value_ - 1e-12) {
        best_value_ = value;
        best_image_ = image_;
      }
      return;
    }
    const std::size_t a = order_[depth];
    for (std::size_t b = 0; b < n_; ++b) {
      if (used_[b]) continue;
      std::size_t e = edge_mm;
      std::size_t in1 = inner1;
      std::size_t in2 = inner2;
      for (std::size_t t = 0; t < depth; ++t) {
        const std::size_t prev = order_[t];
        const bool e1 = g1_.has_edge(a, prev);
        const bool e2 = g2_.has_edge(b, image_[prev]);
        in1 += e1;
        in2 += e2;
        e += (e1 != e2);
      }
      const std::size_t c = color_mm + (cidx1_[a] != cidx2_[b]);

      --count1_[cidx1_[a]];
      --count2_[cidx2_[b]];
      const std::size_t r1 = g1_.edge_count() - in1;
      const std::size_t r2 = g2_.edge_count() - in2;
      const std::size_t edge_lb = e + (r1 > r2 ? r1 - r2 : r2 - r1);
      const double bound = alignment_distance(edge_lb, c + color_lower_bound());
      if (bound < best_value_ - 1e-12) {
        image_[a] = b;
        used_[b] = true;
        dfs(depth + 1, e, c, in1, in2);
        used_[b] = false;
        image_[a] = n_;
      }
      ++count1_[cidx1_[a]];
      ++count2_[cidx2_[b]];
    }
  }

  const ColoredGraph& g1_;
  const ColoredGraph& g2_;
  std::size_t n_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> cidx1_, cidx2_;
  std::vector<std::size_t> count1_, count2_;
  std::vector<std::size_t> image_;
  std::vector<bool> used_;
  double best_value_ = 0.0;
  std::vector<std::size_t> best_image_;
  std::size_t explored_ = 0;
};

}  // namespace detail

/// d(G1, G2): minimum over alignments of the adjacency Frobenius mismatch
/// plus the node color mismatch count. Exact mode certifies optimality and
/// is limited to kExactDistanceLimit nodes; heuristic mode returns an upper
/// bound.
inline AlignmentResult graph_distance(const ColoredGraph& g1, const ColoredGraph& g2,
                                      DistanceMode mode = DistanceMode::exact) {
  detail::check_same_size(g1, g2);
  if (mode == DistanceMode::exact && g1.size() > kExactDistanceLimit) {
    throw Error(ErrorKind::size, "exact distance is limited to " +
                                     std::to_string(kExactDistanceLimit) + " nodes (got " +
                                     std::to_string(g1.size()) + "); use heuristic mode");
  }
  AlignmentResult upper = detail::heuristic_alignment(g1, g2);
  if (mode == DistanceMode::heuristic) return upper;
  if (upper.distance == 0.0) {
    upper.exact = true;
    return upper;
  }
  return detail::BranchAndBound(g1, g2).run(upper);
}

}  // namespace canon_gnn
