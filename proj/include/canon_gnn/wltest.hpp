#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canon_gnn/canonize.hpp"
#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"
#include "canon_gnn/parallel.hpp"
#include "canon_gnn/rng.hpp"
#include "canon_gnn/ugc.hpp"

namespace canon_gnn {

enum class PeKind { none, gc, ugc };

/// Sorted (final colour, count) pairs.
using ColorHistogram = std::vector<std::pair<std::uint32_t, std::size_t>>;

struct WlVerdict {
  bool distinguishable = false;
  std::size_t rounds = 0;
  std::array<ColorHistogram, 2> final_histograms;
};

/// Colour refinement run jointly on the disjoint union of g1 and g2.
/// Initial colours are the node colour, paired with the positional rank when
/// colourings are supplied. The graphs are distinguished iff their final
/// colour histograms differ.
inline WlVerdict wl_test_with_colourings(const ColoredGraph& g1, const ColoredGraph& g2,
                                         const DiscreteColouring* pe1 = nullptr,
                                         const DiscreteColouring* pe2 = nullptr) {
  if (g1.size() != g2.size()) {
    throw Error(ErrorKind::dimension, "wl_test needs equal node counts (" +
                                          std::to_string(g1.size()) + " vs " +
                                          std::to_string(g2.size()) + ")");
  }
  if ((pe1 == nullptr) != (pe2 == nullptr)) {
    throw Error(ErrorKind::configuration, "positional colourings must be given for both graphs");
  }
  if (pe1 && (pe1->size() != g1.size() || pe2->size() != g2.size())) {
    throw Error(ErrorKind::dimension, "positional colouring size does not match graph");
  }
  const std::size_t n = g1.size();

  ColoredGraph joint(2 * n);
  for (auto [u, v] : g1.edges()) joint.add_edge(u, v);
  for (auto [u, v] : g2.edges()) joint.add_edge(n + u, n + v);

  std::vector<std::pair<Color, std::uint32_t>> keys(2 * n);
  for (std::size_t v = 0; v < n; ++v) {
    keys[v] = {g1.color(v), pe1 ? (*pe1)[v] : 0};
    keys[n + v] = {g2.color(v), pe2 ? (*pe2)[v] : 0};
  }
  auto distinct = keys;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::uint32_t> start(2 * n);
  for (std::size_t v = 0; v < 2 * n; ++v) {
    start[v] = static_cast<std::uint32_t>(
        std::lower_bound(distinct.begin(), distinct.end(), keys[v]) - distinct.begin());
  }

  const auto [colouring, rounds] = refine_with_stats(joint, Colouring(std::move(start)));

  WlVerdict verdict;
  verdict.rounds = rounds;
  for (std::size_t side = 0; side < 2; ++side) {
    std::vector<std::uint32_t> cs(n);
    for (std::size_t v = 0; v < n; ++v) cs[v] = colouring[side * n + v];
    std::sort(cs.begin(), cs.end());
    auto& hist = verdict.final_histograms[side];
    for (auto c : cs) {
      if (hist.empty() || hist.back().first != c) {
        hist.emplace_back(c, 1);
      } else {
        ++hist.back().second;
      }
    }
  }
  verdict.distinguishable = verdict.final_histograms[0] != verdict.final_histograms[1];
  return verdict;
}

/// 1-WL test, optionally with canonical (gc) or universal (ugc) positional
/// ranks folded into the initial colours.
inline WlVerdict wl_test(const ColoredGraph& g1, const ColoredGraph& g2, PeKind pe = PeKind::none,
                         const LabelUniverse* universe = nullptr,
                         const CanonOptions& options = {}) {
  if (g1.size() != g2.size()) {
    throw Error(ErrorKind::dimension, "wl_test needs equal node counts (" +
                                          std::to_string(g1.size()) + " vs " +
                                          std::to_string(g2.size()) + ")");
  }
  switch (pe) {
    case PeKind::none:
      return wl_test_with_colourings(g1, g2);
    case PeKind::gc: {
      const auto c1 = canonical_form(g1, options).colouring;
      const auto c2 = canonical_form(g2, options).colouring;
      return wl_test_with_colourings(g1, g2, &c1, &c2);
    }
    case PeKind::ugc: {
      if (!universe) throw Error(ErrorKind::configuration, "pe=ugc requires a label universe");
      const auto t1 = ugc_colouring(g1, *universe);
      const auto t2 = ugc_colouring(g2, *universe);
      return wl_test_with_colourings(g1, g2, &t1, &t2);
    }
  }
  return {};
}

/// Circulant skip-link graph: edges {i, i+1} and {i, i+skip} modulo n.
/// Any 2 <= skip < n/2 gives a 4-regular graph; no gcd condition is needed
/// because the +1 cycle already connects every node.
inline ColoredGraph gen_csl(std::size_t n, std::size_t skip) {
  if (n < 5) throw Error(ErrorKind::parameter, "CSL needs n >= 5 (got " + std::to_string(n) + ")");
  if (skip < 2 || 2 * skip >= n) {
    throw Error(ErrorKind::parameter, "CSL skip must satisfy 2 <= skip < n/2 (got skip=" +
                                          std::to_string(skip) + ", n=" + std::to_string(n) + ")");
  }
  ColoredGraph g(n, "csl_n" + std::to_string(n) + "_s" + std::to_string(skip));
  for (std::size_t i = 0; i < n; ++i) {
    g.add_edge(i, (i + 1) % n);
    g.add_edge(i, (i + skip) % n);
  }
  return g;
}

inline ColoredGraph cycle_graph(std::size_t n, std::string id = {}) {
  ColoredGraph g(n, std::move(id));
  for (std::size_t i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

/// (C_2m, C_m + C_m): same size, both 2-regular, not isomorphic.
inline std::pair<ColoredGraph, ColoredGraph> gen_wl_hard_pair(std::size_t m) {
  if (m < 3) throw Error(ErrorKind::parameter, "hard pair needs m >= 3 (got " + std::to_string(m) + ")");
  const std::string tag = "hard_m" + std::to_string(m);
  ColoredGraph single = cycle_graph(2 * m, tag + "_a");
  ColoredGraph twin(2 * m, tag + "_b");
  for (std::size_t i = 0; i < m; ++i) {
    twin.add_edge(i, (i + 1) % m);
    twin.add_edge(m + i, m + (i + 1) % m);
  }
  return {std::move(single), std::move(twin)};
}

inline const std::vector<std::size_t>& default_csl_skips() {
  static const std::vector<std::size_t> skips{2, 3, 4, 5, 6, 9, 11, 12, 13, 16};
  return skips;
}

/// Classification dataset of permuted CSL copies, one class per skip.
/// Copies of class c are drawn from the stream (seed, c), so the result does
/// not depend on the worker count.
inline GraphDataset csl_benchmark(std::size_t n = 41,
                                  const std::vector<std::size_t>& skips = default_csl_skips(),
                                  std::size_t copies = 15, std::uint64_t seed = 0,
                                  std::size_t threads = 1) {
  if (skips.empty()) throw Error(ErrorKind::parameter, "no skips given");
  if (copies == 0) throw Error(ErrorKind::parameter, "copies must be positive");
  std::vector<ColoredGraph> bases;
  std::vector<Certificate> certs;
  for (auto s : skips) {
    bases.push_back(gen_csl(n, s));
    certs.push_back(canonical_form(bases.back()).certificate);
  }
  for (std::size_t a = 0; a < skips.size(); ++a) {
    for (std::size_t b = a + 1; b < skips.size(); ++b) {
      if (certs[a] == certs[b]) {
        throw Error(ErrorKind::parameter, "skips " + std::to_string(skips[a]) + " and " +
                                              std::to_string(skips[b]) +
                                              " give isomorphic CSL graphs");
      }
    }
  }

  std::vector<std::vector<ColoredGraph>> per_class(skips.size());
  parallel_for(skips.size(), threads, [&](std::size_t c) {
    Rng rng = Rng::stream(seed, {c});
    for (std::size_t k = 0; k < copies; ++k) {
      ColoredGraph g = apply_permutation(bases[c], Permutation::random(n, rng));
      g.set_id("csl_s" + std::to_string(skips[c]) + "_c" + std::to_string(k));
      g.set_target(static_cast<double>(c));
      per_class[c].push_back(std::move(g));
    }
  });

  GraphDataset d;
  for (auto& cls : per_class) {
    for (auto& g : cls) d.graphs.push_back(std::move(g));
  }
  return d;
}

}  // namespace canon_gnn
