#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace canon_gnn;
using testing_support::brute_force_isomorphic;
using testing_support::random_graph;
using testing_support::random_mixed_graph;

namespace {

ColoredGraph path3(std::vector<Color> colors = {0, 0, 0}) {
  const std::vector<Edge> edges{{0, 1}, {1, 2}};
  return ColoredGraph(3, edges, std::move(colors));
}

ColoredGraph two_triangles() {
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  return ColoredGraph(6, edges, std::vector<Color>(6, 0));
}

/// The canonical form as a graph: node v moves to position rho(v) - 1.
ColoredGraph canonical_graph(const ColoredGraph& g) {
  const auto rho = canonical_form(g).colouring;
  std::vector<std::size_t> p(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) p[v] = rho[v] - 1;
  return apply_permutation(g, Permutation(p));
}

}  // namespace

TEST_CASE("refinement examples", "[canonize]") {
  const auto c6 = cycle_graph(6);
  CHECK(refine(c6, Colouring::unit(6)).num_cells() == 1);

  const auto p3 = refine(path3(), Colouring::unit(3));
  CHECK(p3.num_cells() == 2);
  CHECK(p3[0] == p3[2]);
  CHECK(p3[0] != p3[1]);

  const Colouring discrete(std::vector<std::uint32_t>{2, 0, 1});
  CHECK(refine(path3(), discrete).node_color() == discrete.node_color());
}

TEST_CASE("refinement refines, is idempotent, and keeps color order", "[canonize][property]") {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = random_mixed_graph(1, 14, rng);
    const auto start = Colouring::of(g);
    const auto out = refine(g, start);
    CHECK(out.refines(start));
    CHECK(refine(g, out).node_color() == out.node_color());
    for (std::size_t u = 0; u < g.size(); ++u) {
      for (std::size_t v = 0; v < g.size(); ++v) {
        if (start[u] < start[v]) CHECK(out[u] < out[v]);
      }
    }
    // Equitable: nodes of one cell see the same number of neighbors in every cell.
    const auto cells = out.cells();
    for (const auto& cell : cells) {
      for (const auto& other : cells) {
        std::size_t expect = 0;
        for (std::size_t k = 0; k < cell.size(); ++k) {
          std::size_t count = 0;
          for (auto w : other) count += g.has_edge(cell[k], w);
          if (k == 0) expect = count;
          CHECK(count == expect);
        }
      }
    }
  }
}

TEST_CASE("single node and small cases", "[canonize]") {
  const ColoredGraph one(1);
  const auto r = canonical_form(one);
  CHECK(r.colouring.order() == std::vector<std::uint32_t>{1});
  CHECK(r.certificate.bytes.size() == 4 + 1 + 4);

  CHECK_FALSE(is_rigid(cycle_graph(6)));
  CHECK_FALSE(is_rigid(path3()));
  CHECK(is_rigid(path3({0, 1, 2})));
}

TEST_CASE("certificate byte layout", "[canonize]") {
  // P3 with middle colored 1: canonical order puts the endpoints (color 0) first.
  const auto r = canonical_form(path3({0, 1, 0}));
  CHECK(r.colouring[1] == 3);
  // n = 3; rows of the canonical adjacency [[0,0,1],[0,0,1],[1,1,0]]; colors 0,0,1.
  const std::vector<std::uint8_t> expect{0, 0, 0, 3, 0x20, 0x20, 0xC0, 0, 0, 0, 0,
                                         0, 0, 0, 0,    0,    0,    0, 1};
  CHECK(r.certificate.bytes == expect);
  CHECK(r.certificate.hex().substr(0, 8) == "00000003");
  CHECK(certificate_of(path3({0, 1, 0}), r.colouring) == r.certificate);
}

TEST_CASE("C6 is invariant under permutation and differs from two triangles", "[canonize]") {
  const auto c6 = cycle_graph(6);
  const auto cert = canonical_form(c6).certificate;
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    CHECK(canonical_form(apply_permutation(c6, Permutation::random(6, rng))).certificate == cert);
  }
  CHECK(canonical_form(two_triangles()).certificate != cert);
  CHECK_FALSE(brute_force_isomorphic(c6, two_triangles()));
  CHECK_FALSE(isomorphic(c6, two_triangles()));
}

TEST_CASE("K4 minus an edge is not P4", "[canonize]") {
  const std::vector<Edge> k4e{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}};
  const std::vector<Edge> p4{{0, 1}, {1, 2}, {2, 3}};
  const ColoredGraph a(4, k4e, std::vector<Color>(4, 0));
  const ColoredGraph b(4, p4, std::vector<Color>(4, 0));
  CHECK_FALSE(isomorphic(a, b));
  CHECK_FALSE(brute_force_isomorphic(a, b));
}

TEST_CASE("canonical forms of permuted graphs coincide", "[canonize][property]") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_mixed_graph(1, 12, rng);
    const auto r = canonical_form(g);
    CHECK(certificate_of(g, r.colouring) == r.certificate);
    const auto canon = canonical_graph(g);
    for (int k = 0; k < 5; ++k) {
      const auto h = apply_permutation(g, Permutation::random(g.size(), rng));
      CHECK(canonical_form(h).certificate == r.certificate);
      CHECK(canonical_graph(h) == canon);
    }
  }
}

TEST_CASE("isomorphic agrees with brute force on small graphs", "[canonize][property]") {
  Rng rng(77);
  std::size_t positives = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng.below(7);
    const auto a = random_graph(n, 0.5, 1 + rng.below(2), rng);
    ColoredGraph b = rng.bernoulli(0.5) ? apply_permutation(a, Permutation::random(n, rng))
                                        : random_graph(n, 0.5, 1 + rng.below(2), rng);
    if (rng.bernoulli(0.3) && n > 1) {
      // Near miss: toggle one pair.
      const std::size_t u = rng.below(n);
      std::size_t v = rng.below(n - 1);
      if (v >= u) ++v;
      b.set_edge(u, v, !b.has_edge(u, v));
    }
    const bool expect = brute_force_isomorphic(a, b);
    positives += expect;
    CHECK(isomorphic(a, b) == expect);
  }
  CHECK(positives > 50);
}

TEST_CASE("regular graphs exercise the search tree", "[canonize]") {
  // Petersen graph: vertex-transitive, refinement alone gives one cell.
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 5}, {1, 6}, {2, 7},
                                {3, 8}, {4, 9}, {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}};
  const ColoredGraph petersen(10, edges, std::vector<Color>(10, 0));
  const auto r = canonical_form(petersen);
  CHECK(r.search_stats.leaves_visited > 1);
  Rng rng(10);
  for (int i = 0; i < 20; ++i) {
    CHECK(canonical_form(apply_permutation(petersen, Permutation::random(10, rng))).certificate ==
          r.certificate);
  }
  const auto csl = gen_csl(41, 2);
  CHECK(canonical_form(apply_permutation(csl, Permutation::random(41, rng))).certificate ==
        canonical_form(csl).certificate);
}

TEST_CASE("size limit directs large graphs to the universal path", "[canonize]") {
  const ColoredGraph big(65);
  try {
    canonical_form(big);
    FAIL("expected a size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::size);
    CHECK(std::string(e.what()).find("UGC") != std::string::npos);
  }
  CanonOptions opts;
  opts.max_nodes = 100;
  CHECK_NOTHROW(canonical_form(big, opts));
}

TEST_CASE("large automorphism groups stay cheap", "[canonize]") {
  CanonOptions opts;
  opts.max_nodes = 128;
  std::vector<ColoredGraph> graphs;
  graphs.emplace_back(32);
  ColoredGraph complete(32);
  for (std::size_t u = 0; u < 32; ++u) {
    for (std::size_t v = u + 1; v < 32; ++v) complete.add_edge(u, v);
  }
  graphs.push_back(complete);
  ColoredGraph cliques(32);  // 4 x K8
  for (std::size_t u = 0; u < 32; ++u) {
    for (std::size_t v = u + 1; v < 32; ++v) {
      if (u / 8 == v / 8) cliques.add_edge(u, v);
    }
  }
  graphs.push_back(cliques);
  ColoredGraph bipartite(32);  // K16,16
  for (std::size_t u = 0; u < 16; ++u) {
    for (std::size_t v = 16; v < 32; ++v) bipartite.add_edge(u, v);
  }
  graphs.push_back(bipartite);
  ColoredGraph cube(32);  // Q5
  for (std::size_t u = 0; u < 32; ++u) {
    for (std::size_t b = 0; b < 5; ++b) {
      const std::size_t v = u ^ (std::size_t{1} << b);
      if (u < v) cube.add_edge(u, v);
    }
  }
  graphs.push_back(cube);

  Rng rng(12);
  std::vector<Certificate> certs;
  for (const auto& g : graphs) {
    const auto r = canonical_form(g, opts);
    CHECK(r.search_stats.leaves_visited < 200);
    for (int k = 0; k < 3; ++k) {
      CHECK(canonical_form(apply_permutation(g, Permutation::random(32, rng)), opts).certificate ==
            r.certificate);
    }
    certs.push_back(r.certificate);
  }
  for (std::size_t a = 0; a < certs.size(); ++a) {
    for (std::size_t b = a + 1; b < certs.size(); ++b) CHECK(certs[a] != certs[b]);
  }
  CHECK(canonical_form(ColoredGraph(100), opts).search_stats.leaves_visited == 100);
}
