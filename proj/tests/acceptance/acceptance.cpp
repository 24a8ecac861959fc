// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace canon_gnn;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1: certificates agree across random relabelings.
Outcome canonical_invariance() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  std::size_t checks = 0, failures = 0;
  for (int g_idx = 0; g_idx < 1000; ++g_idx) {
    const auto g = testing_support::random_mixed_graph(1, 12, rng);
    const auto cert = canonical_form(g).certificate;
    for (int k = 0; k < 10; ++k) {
      ++checks;
      failures += canonical_form(apply_permutation(g, Permutation::random(g.size(), rng))).certificate != cert;
    }
  }
  const double t = seconds_since(t0);
  std::ostringstream s;
  s << failures << "/" << checks << " mismatches in " << t << " s";
  return {failures == 0 && t < 60.0, s.str()};
}

// 2: isomorphic() against exhaustive search.
Outcome isomorphism_oracle() {
  Rng rng(1002);
  std::size_t disagreements = 0, positives = 0;
  const int pairs = 600;
  for (int i = 0; i < pairs; ++i) {
    const std::size_t n = 1 + rng.below(7);
    const auto a = testing_support::random_graph(n, 0.2 + 0.6 * rng.uniform(), 1 + rng.below(3), rng);
    ColoredGraph b = rng.bernoulli(0.5) ? apply_permutation(a, Permutation::random(n, rng))
                                        : testing_support::random_graph(n, 0.5, 1 + rng.below(3), rng);
    if (n > 1 && rng.bernoulli(0.25)) {
      const std::size_t u = rng.below(n);
      std::size_t v = rng.below(n - 1);
      if (v >= u) ++v;
      b.set_edge(u, v, !b.has_edge(u, v));
    }
    const bool oracle = testing_support::brute_force_isomorphic(a, b);
    positives += oracle;
    disagreements += isomorphic(a, b) != oracle;
  }
  std::ostringstream s;
  s << disagreements << " disagreements on " << pairs << " pairs (" << positives << " isomorphic)";
  return {disagreements == 0, s.str()};
}

// 3: plain 1-WL versus 1-WL with canonical ranks.
Outcome expressivity() {
  const auto t0 = Clock::now();
  const auto d = csl_benchmark();
  std::vector<DiscreteColouring> rho;
  for (const auto& g : d.graphs) rho.push_back(canonical_form(g).colouring);

  std::size_t cross = 0, plain_split = 0, gc_split = 0, same = 0, same_flagged = 0;
  for (std::size_t i = 0; i < d.graphs.size(); ++i) {
    for (std::size_t j = i + 1; j < d.graphs.size(); ++j) {
      const auto& a = d.graphs[i];
      const auto& b = d.graphs[j];
      const bool gc = wl_test_with_colourings(a, b, &rho[i], &rho[j]).distinguishable;
      if (*a.target() != *b.target()) {
        ++cross;
        plain_split += wl_test(a, b).distinguishable;
        gc_split += gc;
      } else {
        ++same;
        same_flagged += gc;
      }
    }
  }

  Rng rng(1003);
  std::size_t hard = 0, hard_plain = 0, hard_gc = 0, hard_iso_flagged = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t m = 3 + static_cast<std::size_t>(instance) % 8;
    auto [a, b] = gen_wl_hard_pair(m);
    a = apply_permutation(a, Permutation::random(2 * m, rng));
    b = apply_permutation(b, Permutation::random(2 * m, rng));
    ++hard;
    hard_plain += wl_test(a, b).distinguishable;
    hard_gc += wl_test(a, b, PeKind::gc).distinguishable;
    const auto a2 = apply_permutation(a, Permutation::random(2 * m, rng));
    hard_iso_flagged += wl_test(a, a2, PeKind::gc).distinguishable;
  }
  const double t = seconds_since(t0);
  std::ostringstream s;
  s << "CSL cross-class: plain " << plain_split << "/" << cross << ", gc " << gc_split << "/"
    << cross << "; same-class flagged " << same_flagged << "/" << same << "; hard pairs: plain "
    << hard_plain << "/" << hard << ", gc " << hard_gc << "/" << hard << ", isomorphic flagged "
    << hard_iso_flagged << "; " << t << " s";
  const bool ok = plain_split == 0 && gc_split == cross && same_flagged == 0 && hard_plain == 0 &&
                  hard_gc == hard && hard_iso_flagged == 0 && t < 300.0;
  return {ok, s.str()};
}

struct CvResult {
  double lr = 0.0;
  double mean_train = 0.0;
  double mean_test = 0.0;
  double mean_final_loss = 0.0;
  double slowest_fold = 0.0;
};

CvResult cross_validate(const GraphDataset& d, PeKind pe, double lr) {
  MpnnConfig cfg;
  cfg.num_layers = 3;
  cfg.hidden_dim = 32;
  cfg.readout = Readout::mean;
  cfg.seed = 0;
  TrainOptions opts;
  opts.learning_rate = lr;
  const auto folds = stratified_folds(d, 5, 0);
  CvResult r;
  r.lr = lr;
  for (const auto& split : folds) {
    const auto rep = train(cfg, d, split, pe, opts);
    r.mean_train += rep.final_train_accuracy / 5.0;
    r.mean_test += rep.final_test_accuracy / 5.0;
    r.mean_final_loss += rep.epochs.back().loss / 5.0;
    r.slowest_fold = std::max(r.slowest_fold, rep.wall_clock_seconds);
  }
  return r;
}

/// The learning rate is picked by final training loss only.
CvResult best_over_lr(const GraphDataset& d, PeKind pe) {
  const auto a = cross_validate(d, pe, 1e-2);
  const auto b = cross_validate(d, pe, 1e-3);
  CvResult best = a.mean_final_loss <= b.mean_final_loss ? a : b;
  best.slowest_fold = std::max(a.slowest_fold, b.slowest_fold);
  return best;
}

// 4: trained classifier on CSL with and without canonical ranks.
Outcome trainable_csl() {
  const auto d = csl_benchmark();
  const auto gc = best_over_lr(d, PeKind::gc);
  const auto none = best_over_lr(d, PeKind::none);
  std::ostringstream s;
  s << "gc (lr " << gc.lr << "): train " << gc.mean_train << ", test " << gc.mean_test
    << "; none (lr " << none.lr << "): test " << none.mean_test << "; slowest fold "
    << std::max(gc.slowest_fold, none.slowest_fold) << " s";
  const bool ok = gc.mean_train >= 0.95 && gc.mean_test >= 0.90 && none.mean_test <= 0.25 &&
                  gc.slowest_fold < 120.0 && none.slowest_fold < 120.0;
  return {ok, s.str()};
}

// 5: positional-rank divergence and embedding ratios on recolor counterexamples.
Outcome stability_contrast() {
  const auto t0 = Clock::now();
  const auto r = run_probe({6, 8, 10, 12}, 20, 0);
  bool divergence_ok = true;
  for (const auto& rep : r.reports) {
    divergence_ok = divergence_ok && rep.pe_divergence_gc == rep.n && rep.pe_divergence_ugc == 0;
  }
  const auto& at6 = r.aggregates.front();
  const auto& at12 = r.aggregates.back();
  const bool ugc_flat = at12.max_ratio_ugc <= 3.0 * at6.max_ratio_ugc;
  const bool gc_grows = at12.max_ratio_gc > at6.max_ratio_gc;
  const double t = seconds_since(t0);
  std::ostringstream s;
  s << "divergence " << (divergence_ok ? "ok" : "violated") << "; ugc max ratio n=6 "
    << at6.max_ratio_ugc << ", n=12 " << at12.max_ratio_ugc << "; gc max ratio n=6 "
    << at6.max_ratio_gc << ", n=12 " << at12.max_ratio_gc << "; " << t << " s";
  return {divergence_ok && ugc_flat && gc_grows && t < 180.0, s.str()};
}

// 6: backward pass against central differences.
Outcome gradient_check() {
  Rng rng(1006);
  MpnnConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = 8;
  cfg.input_width = 4;
  cfg.num_classes = 3;
  cfg.readout = Readout::ugc_weighted;
  cfg.epsilon = {0.1, 0.3};
  cfg.seed = 6;
  MpnnModel model(cfg);
  for (auto& l : model.params().layers) {
    for (Eigen::Index i = 0; i < l.b1.size(); ++i) l.b1(i) = 0.2 * rng.normal();
    for (Eigen::Index i = 0; i < l.b2.size(); ++i) l.b2(i) = 0.2 * rng.normal() + 0.05;
  }

  std::vector<ColoredGraph> graphs;
  for (int k = 0; k < 4; ++k) {
    graphs.push_back(testing_support::random_graph(5 + k, 0.4, 2, rng, "g" + std::to_string(k)));
  }
  std::vector<Sample> batch;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    Sample s;
    s.graph = &graphs[k];
    s.features = FeatureTensor(graphs[k].size(), 4);
    for (std::size_t r = 0; r < graphs[k].size(); ++r) {
      for (std::size_t c = 0; c < 4; ++c) s.features(r, c) = rng.normal();
    }
    std::vector<std::uint32_t> ranks(graphs[k].size());
    for (std::size_t v = 0; v < ranks.size(); ++v) ranks[v] = static_cast<std::uint32_t>(1 + v + 2 * k);
    s.tau = DiscreteColouring(ranks, ColouringMode::ugc);
    s.target = k % 3;
    model.ensure_readout_weights(*s.tau);
    batch.push_back(std::move(s));
  }

  MpnnParams grads = model.params().zeros_like();
  batch_loss(model, batch, &grads);
  std::vector<std::vector<double>> analytic;
  grads.for_each_block([&](const std::string&, const double* d, std::size_t n) {
    analytic.emplace_back(d, d + n);
  });
  std::vector<std::pair<double*, std::size_t>> blocks;
  model.params().for_each_block([&](const std::string&, double* d, std::size_t n) {
    blocks.emplace_back(d, n);
  });

  // One coordinate from every block first, the rest uniformly over blocks.
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t b = 0; b < blocks.size(); ++b) picks.emplace_back(b, rng.below(blocks[b].second));
  while (picks.size() < 200) {
    const std::size_t b = rng.below(blocks.size());
    picks.emplace_back(b, rng.below(blocks[b].second));
  }

  const double h = 1e-6;
  double worst = 0.0;
  for (auto [b, i] : picks) {
    double* p = blocks[b].first + i;
    const double saved = *p;
    *p = saved + h;
    const double up = batch_loss(model, batch).loss;
    *p = saved - h;
    const double down = batch_loss(model, batch).loss;
    *p = saved;
    const double fd = (up - down) / (2.0 * h);
    const double an = analytic[b][i];
    const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
    worst = std::max(worst, rel);
  }
  std::ostringstream s;
  s << picks.size() << " parameters over " << blocks.size() << " blocks, max relative error "
    << worst;
  return {worst < 1e-4, s.str()};
}

// 7: embeddings of permuted inputs.
Outcome permutation_invariance() {
  Rng rng(1007);
  double worst = 0.0;
  std::size_t triples = 0;
  for (const auto readout : {Readout::sum, Readout::mean, Readout::ugc_weighted}) {
    for (int trial = 0; trial < 100; ++trial) {
      MpnnConfig cfg;
      cfg.num_layers = 1 + rng.below(3);
      cfg.hidden_dim = 4 + rng.below(12);
      cfg.input_width = 3;
      cfg.readout = readout;
      cfg.seed = rng.next();
      MpnnModel model(cfg);
      const std::size_t n = 1 + rng.below(15);
      const auto g = testing_support::random_graph(n, 0.3, 3, rng);
      const auto x = one_hot_colors(g, 3);
      std::vector<std::uint32_t> ranks(n);
      for (std::size_t v = 0; v < n; ++v) ranks[v] = static_cast<std::uint32_t>(v + 1);
      rng.shuffle(std::span<std::uint32_t>(ranks));
      const DiscreteColouring tau(ranks, ColouringMode::ugc);
      model.ensure_readout_weights(tau);

      const auto p = Permutation::random(n, rng);
      const auto pg = apply_permutation(g, p);
      std::vector<std::uint32_t> pranks(n);
      for (std::size_t v = 0; v < n; ++v) pranks[p[v]] = ranks[v];
      const DiscreteColouring ptau(pranks, ColouringMode::ugc);
      const auto e1 = model.forward(g, x, &tau).embedding;
      const auto e2 = model.forward(pg, one_hot_colors(pg, 3), &ptau).embedding;
      worst = std::max(worst, (e1 - e2).norm());
      ++triples;
    }
  }
  std::ostringstream s;
  s << triples << " triples, max embedding difference " << worst;
  return {worst <= 1e-9, s.str()};
}

// 8: label validator on consistent data and after one injected flip.
Outcome ugc_validator() {
  Rng rng(1008);
  auto d = testing_support::gene_network_dataset(50, 200, 30, 60, 0.05, rng);
  const LabelUniverse u = universe_of(d);
  const auto clean = validate_ugc(d, u);
  if (!clean.valid() || !clean.witnesses.empty()) return {false, "clean dataset reported invalid"};

  // A label pair present in graph 0 and in at least two other graphs, so the
  // flipped graph is the minority.
  auto& target = d.graphs[0];
  std::size_t fa = 0, fb = 0;
  bool found = false;
  for (std::size_t a = 0; a < target.size() && !found; ++a) {
    for (std::size_t b = a + 1; b < target.size() && !found; ++b) {
      std::size_t others = 0;
      for (std::size_t k = 1; k < d.graphs.size(); ++k) {
        const auto& g = d.graphs[k];
        others += testing_support::node_with_label(g, target.label(a)) < g.size() &&
                  testing_support::node_with_label(g, target.label(b)) < g.size();
      }
      if (others >= 2) {
        fa = a;
        fb = b;
        found = true;
      }
    }
  }
  if (!found) return {false, "no label pair shared by three graphs"};
  target.set_edge(fa, fb, !target.has_edge(fa, fb));

  const auto flipped = validate_ugc(d, u);
  std::string lu = target.label(fa), lv = target.label(fb);
  if (lv < lu) std::swap(lu, lv);
  bool ok = !flipped.valid() && flipped.injective_ok && flipped.witnesses.size() == 1;
  if (ok) {
    const auto& w = flipped.witnesses.front();
    ok = w.kind == UgcWitness::Kind::inconsistent_edge && w.graph2_id == target.id() &&
         w.label_u == lu && w.label_v == lv;
  }
  std::ostringstream s;
  s << "clean: 0 witnesses; after flipping (" << lu << ", " << lv << ") in " << target.id() << ": "
    << flipped.witnesses.size() << " witness(es)";
  if (!flipped.witnesses.empty()) {
    const auto& w = flipped.witnesses.front();
    s << ", first names " << w.graph2_id << " (" << w.label_u << ", " << w.label_v << ")";
  }
  return {ok, s.str()};
}

// 9: branch and bound against exhaustive search.
Outcome exact_distance() {
  Rng rng(1009);
  std::size_t mismatches = 0, nonzero_self = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const auto g1 = testing_support::random_graph(n, rng.uniform(), 1 + rng.below(3), rng);
    const auto g2 = testing_support::random_graph(n, rng.uniform(), 1 + rng.below(3), rng);
    const double bb = graph_distance(g1, g2, DistanceMode::exact).distance;
    mismatches += std::abs(bb - testing_support::brute_force_distance(g1, g2).distance) > 1e-9;
    const auto pg = apply_permutation(g1, Permutation::random(n, rng));
    nonzero_self += graph_distance(g1, pg, DistanceMode::exact).distance != 0.0;
  }
  std::ostringstream s;
  s << mismatches << "/300 mismatches, " << nonzero_self << " nonzero d(g, pi(g))";
  return {mismatches == 0 && nonzero_self == 0, s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"canonical invariance", canonical_invariance},
      {"isomorphism oracle", isomorphism_oracle},
      {"WL expressivity", expressivity},
      {"trainable CSL", trainable_csl},
      {"stability contrast", stability_contrast},
      {"gradient check", gradient_check},
      {"permutation invariance", permutation_invariance},
      {"UGC validator", ugc_validator},
      {"exact distance", exact_distance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
