#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canon_gnn/canonize.hpp"
#include "canon_gnn/distance.hpp"
#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"
#include "canon_gnn/mpnn.hpp"
#include "canon_gnn/parallel.hpp"
#include "canon_gnn/rng.hpp"
#include "canon_gnn/ugc.hpp"

namespace canon_gnn {

struct PerturbationSpec {
  enum class Kind { recolor_node, rewire_edge };
  Kind kind = Kind::recolor_node;
  std::size_t node = 0;
  Edge edge{0, 0};
  Color new_color = 0;
  bool edge_present = false;
};

/// Returns g with the perturbation applied; rejects no-ops.
inline ColoredGraph apply_perturbation(const ColoredGraph& g, const PerturbationSpec& p) {
  ColoredGraph out = g;
  switch (p.kind) {
    case PerturbationSpec::Kind::recolor_node:
      if (p.node >= g.size()) throw Error(ErrorKind::parameter, "perturbation target out of range");
      if (g.color(p.node) == p.new_color) {
        throw Error(ErrorKind::parameter, "recolor perturbation does not change the color");
      }
      out.set_color(p.node, p.new_color);
      break;
    case PerturbationSpec::Kind::rewire_edge:
      if (p.edge.first >= g.size() || p.edge.second >= g.size() || p.edge.first == p.edge.second) {
        throw Error(ErrorKind::parameter, "perturbation edge out of range");
      }
      if (g.has_edge(p.edge.first, p.edge.second) == p.edge_present) {
        throw Error(ErrorKind::parameter, "rewire perturbation does not change the edge");
      }
      out.set_edge(p.edge.first, p.edge.second, p.edge_present);
      break;
  }
  return out;
}

struct CounterexampleOptions {
  /// Degree cap of the random base graph.
  std::size_t max_degree = 3;
  std::size_t attempts = 1000;
};

struct CounterexamplePair {
  ColoredGraph g1;
  ColoredGraph g2;
  /// Node whose color is moved from the largest to the smallest value.
  std::size_t perturbed = 0;
  std::size_t attempts_used = 0;
};

namespace detail {

/// Random tree with degree cap, plus about n/4 extra edges under the same
/// cap. Connected, with degrees bounded independently of n.
inline ColoredGraph bounded_degree_graph(std::size_t n, std::size_t max_degree, Rng& rng) {
  ColoredGraph g(n);
  for (std::size_t v = 1; v < n; ++v) {
    std::vector<std::size_t> open;
    for (std::size_t u = 0; u < v; ++u) {
      if (g.degree(u) < max_degree) open.push_back(u);
    }
    if (open.empty()) open.push_back(rng.below(v));
    g.add_edge(v, open[rng.below(open.size())]);
  }
  for (std::size_t k = 0; k < n / 4; ++k) {
    const std::size_t u = rng.below(n);
    const std::size_t v = rng.below(n);
    if (u == v || g.has_edge(u, v) || g.degree(u) >= max_degree || g.degree(v) >= max_degree) {
      continue;
    }
    g.add_edge(u, v);
  }
  return g;
}

}  // namespace detail

/// Pair (G1, G2) on n nodes with distinct colors where the last node holds
/// the strictly largest color in G1 and a strictly smallest fresh color in
/// G2. Both carry identical node labels "v<i>". An instance is accepted only
/// when G1 is certified rigid and the canonical orders satisfy
/// rho(v|G2) = rho(v|G1) + 1 for every other node (and n vs 1 for the
/// perturbed one).
inline CounterexamplePair gen_counterexample(std::size_t n, std::uint64_t seed,
                                             const CounterexampleOptions& options = {}) {
  if (n < 4) throw Error(ErrorKind::parameter, "counterexample needs n >= 4");
  Rng rng(seed);
  for (std::size_t attempt = 1; attempt <= options.attempts; ++attempt) {
    ColoredGraph g1 = detail::bounded_degree_graph(n, options.max_degree, rng);
    std::vector<Color> colors(n - 1);
    for (std::size_t i = 0; i < n - 1; ++i) colors[i] = static_cast<Color>(i + 1);
    rng.shuffle(std::span<Color>(colors));
    colors.push_back(static_cast<Color>(n));
    g1.set_colors(colors);
    std::vector<std::string> labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[v] = "v" + std::to_string(v);
    g1.set_labels(labels);

    if (!is_rigid(g1)) continue;
    ColoredGraph g2 = g1;
    g2.set_color(n - 1, 0);
    g1.set_id("cx_n" + std::to_string(n) + "_a");
    g2.set_id("cx_n" + std::to_string(n) + "_b");

    const auto r1 = canonical_form(g1).colouring;
    const auto r2 = canonical_form(g2).colouring;
    bool shifted = r1[n - 1] == n && r2[n - 1] == 1;
    for (std::size_t v = 0; v + 1 < n && shifted; ++v) shifted = r2[v] == r1[v] + 1;
    if (!shifted) continue;
    return {std::move(g1), std::move(g2), n - 1, attempt};
  }
  throw Error(ErrorKind::generation, "no rigid counterexample on " + std::to_string(n) +
                                         " nodes within " + std::to_string(options.attempts) +
                                         " attempts");
}

struct DivergenceReport {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  AlignmentResult d_graphs;
  /// "exact" when d came from branch and bound, "construction" when it is the
  /// known value 1 of a single recolor of a rigid graph.
  std::string d_source;
  std::size_t pe_divergence_gc = 0;
  std::size_t pe_divergence_ugc = 0;
  double embedding_gap_gc = 0.0;
  double embedding_gap_ugc = 0.0;
  double ratio_gc = 0.0;
  double ratio_ugc = 0.0;
};

struct ProbeAggregate {
  std::size_t n = 0;
  double max_ratio_gc = 0.0;
  double max_ratio_ugc = 0.0;
  std::size_t min_pe_divergence_gc = 0;
  std::size_t max_pe_divergence_ugc = 0;
};

struct ProbeOptions {
  std::size_t num_layers = 2;
  std::size_t hidden_dim = 32;
  std::uint64_t model_seed = 0;
  std::size_t threads = 1;
  CounterexampleOptions generation;
};

struct ProbeResult {
  std::vector<DivergenceReport> reports;
  std::vector<ProbeAggregate> aggregates;
};

/// Feature widths shared by every size so a single fixed model sees all
/// inputs: colors need max_n + 1 columns, positional ranks max_n.
inline MpnnConfig probe_model_config(std::size_t max_n, const ProbeOptions& options) {
  MpnnConfig c;
  c.num_layers = options.num_layers;
  c.hidden_dim = options.hidden_dim;
  c.readout = Readout::sum;
  c.input_width = (max_n + 1) + max_n;
  c.num_classes = 1;
  c.seed = options.model_seed;
  return c;
}

/// Sweeps the counterexample family and measures, under one untrained
/// sum-readout model, how far the embeddings of each pair move under GC
/// versus UGC positional encodings. Trial (n, t) uses seed stream
/// (seed, n, t).
inline ProbeResult run_probe(const std::vector<std::size_t>& sizes, std::size_t trials,
                             std::uint64_t seed, const ProbeOptions& options = {}) {
  if (sizes.empty() || trials == 0) throw Error(ErrorKind::parameter, "empty probe sweep");
  const std::size_t max_n = *std::max_element(sizes.begin(), sizes.end());
  const MpnnModel model(probe_model_config(max_n, options));

  ProbeResult result;
  result.reports.resize(sizes.size() * trials);
  parallel_for(result.reports.size(), options.threads, [&](std::size_t job) {
    const std::size_t n = sizes[job / trials];
    const std::size_t trial = job % trials;
    const std::uint64_t trial_seed = Rng::stream(seed, {n, trial}).next();
    const auto pair = gen_counterexample(n, trial_seed, options.generation);

    DivergenceReport rep;
    rep.n = n;
    rep.trial = trial;
    rep.seed = trial_seed;
    if (n <= kExactDistanceLimit) {
      rep.d_graphs = graph_distance(pair.g1, pair.g2, DistanceMode::exact);
      rep.d_source = "exact";
    } else {
      rep.d_graphs.permutation = Permutation::identity(n);
      rep.d_graphs.distance = 1.0;
      rep.d_graphs.color_mismatches = 1;
      rep.d_graphs.exact = false;
      rep.d_source = "construction";
    }

    const auto rho1 = canonical_form(pair.g1).colouring;
    const auto rho2 = canonical_form(pair.g2).colouring;
    const LabelUniverse universe = build_universe(GraphDataset{{pair.g1, pair.g2}, std::nullopt});
    const auto tau1 = ugc_colouring(pair.g1, universe);
    const auto tau2 = ugc_colouring(pair.g2, universe);
    for (std::size_t v = 0; v < n; ++v) {
      rep.pe_divergence_gc += rho1[v] != rho2[v];
      rep.pe_divergence_ugc += tau1[v] != tau2[v];
    }

    const FeatureTensor x1 = one_hot_colors(pair.g1, max_n + 1);
    const FeatureTensor x2 = one_hot_colors(pair.g2, max_n + 1);
    const auto gap = [&](const DiscreteColouring& c1, const DiscreteColouring& c2) {
      const auto e1 = model.forward(pair.g1, concat_features(x1, one_hot_ranks(c1, max_n))).embedding;
      const auto e2 = model.forward(pair.g2, concat_features(x2, one_hot_ranks(c2, max_n))).embedding;
      return (e1 - e2).norm();
    };
    rep.embedding_gap_gc = gap(rho1, rho2);
    rep.embedding_gap_ugc = gap(tau1, tau2);
    rep.ratio_gc = rep.embedding_gap_gc / rep.d_graphs.distance;
    rep.ratio_ugc = rep.embedding_gap_ugc / rep.d_graphs.distance;
    result.reports[job] = std::move(rep);
  });

  for (auto n : sizes) {
    ProbeAggregate agg;
    agg.n = n;
    agg.min_pe_divergence_gc = n;
    for (const auto& r : result.reports) {
      if (r.n != n) continue;
      agg.max_ratio_gc = std::max(agg.max_ratio_gc, r.ratio_gc);
      agg.max_ratio_ugc = std::max(agg.max_ratio_ugc, r.ratio_ugc);
      agg.min_pe_divergence_gc = std::min(agg.min_pe_divergence_gc, r.pe_divergence_gc);
      agg.max_pe_divergence_ugc = std::max(agg.max_pe_divergence_ugc, r.pe_divergence_ugc);
    }
    result.aggregates.push_back(agg);
  }
  return result;
}

struct SubgraphConsistencyReport {
  std::size_t pairs_checked = 0;
  /// Pairs whose tau values agree on every shared label.
  std::size_t tau_consistent_pairs = 0;
  /// Pairs whose canonical ranks disagree on at least one shared label.
  std::size_t gc_inconsistent_pairs = 0;
  double gc_inconsistency_rate = 0.0;
  bool all_tau_consistent = true;
};

namespace detail {

struct SharedRestriction {
  bool tau_equal = true;
  bool gc_equal = true;
};

inline SharedRestriction compare_shared(const ColoredGraph& a, const ColoredGraph& b,
                                        const LabelUniverse& u) {
  const auto tau_a = ugc_colouring(a, u);
  const auto tau_b = ugc_colouring(b, u);
  const auto rho_a = canonical_form(a).colouring;
  const auto rho_b = canonical_form(b).colouring;
  std::map<std::string, std::size_t> in_b;
  for (std::size_t v = 0; v < b.size(); ++v) in_b.emplace(b.label(v), v);
  SharedRestriction r;
  for (std::size_t v = 0; v < a.size(); ++v) {
    auto it = in_b.find(a.label(v));
    if (it == in_b.end()) continue;
    r.tau_equal = r.tau_equal && tau_a[v] == tau_b[it->second];
    r.gc_equal = r.gc_equal && rho_a[v] == rho_b[it->second];
  }
  return r;
}

}  // namespace detail

/// Samples graph pairs and compares, on the nodes whose labels both graphs
/// share, the UGC ranks and the GC canonical ranks.
inline SubgraphConsistencyReport subgraph_consistency_probe(const GraphDataset& d,
                                                            std::size_t pairs,
                                                            std::uint64_t seed) {
  SubgraphConsistencyReport report;
  if (d.graphs.size() < 2) return report;
  const LabelUniverse u = universe_of(d);
  Rng rng(seed);
  const std::size_t g = d.graphs.size();
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t i = rng.below(g);
    std::size_t j = rng.below(g - 1);
    if (j >= i) ++j;
    const auto r = detail::compare_shared(d.graphs[i], d.graphs[j], u);
    ++report.pairs_checked;
    report.tau_consistent_pairs += r.tau_equal;
    report.gc_inconsistent_pairs += !r.gc_equal;
    report.all_tau_consistent = report.all_tau_consistent && r.tau_equal;
  }
  report.gc_inconsistency_rate =
      static_cast<double>(report.gc_inconsistent_pairs) / static_cast<double>(report.pairs_checked);
  return report;
}

/// Three triangles joined in a ring, colors orange (0) < blue (1) <
/// yellow (2). G2 recolors the top yellow node orange, leaving the left and
/// bottom triangles untouched.
inline std::pair<ColoredGraph, ColoredGraph> three_triangle_pair() {
  // top t0 t1 t2 = 0 1 2, left l0 l1 l2 = 3 4 5, bottom b0 b1 b2 = 6 7 8
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5},
                                {6, 7}, {7, 8}, {6, 8}, {1, 3}, {2, 6}, {4, 7}};
  const std::vector<Color> colors{2, 1, 1, 1, 0, 2, 1, 0, 2};
  ColoredGraph g1(9, edges, colors, "three_triangles_g1");
  g1.set_labels(std::vector<std::string>{"top0", "top1", "top2", "left0", "left1", "left2",
                                         "bottom0", "bottom1", "bottom2"});
  ColoredGraph g2 = g1;
  g2.set_id("three_triangles_g2");
  g2.set_color(0, 0);
  return {std::move(g1), std::move(g2)};
}

}  // namespace canon_gnn
