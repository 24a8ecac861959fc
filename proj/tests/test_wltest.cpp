#include <catch_amalgamated.hpp>

#include <numeric>

#include "test_support.hpp"

using namespace canon_gnn;

TEST_CASE("six-cycle against two triangles", "[wltest]") {
  const auto [c6, tt] = gen_wl_hard_pair(3);
  CHECK(c6.size() == 6);
  CHECK(tt.size() == 6);
  CHECK_FALSE(wl_test(c6, tt).distinguishable);
  CHECK(wl_test(c6, tt, PeKind::gc).distinguishable);
  CHECK_FALSE(isomorphic(c6, tt));
  CHECK_FALSE(testing_support::brute_force_isomorphic(c6, tt));
}

TEST_CASE("hard pairs have matching size and edge count", "[wltest]") {
  for (std::size_t m = 3; m <= 12; ++m) {
    const auto [a, b] = gen_wl_hard_pair(m);
    CHECK(a.size() == 2 * m);
    CHECK(b.size() == 2 * m);
    CHECK(a.edge_count() == 2 * m);
    CHECK(b.edge_count() == 2 * m);
    for (std::size_t v = 0; v < 2 * m; ++v) {
      CHECK(a.degree(v) == 2);
      CHECK(b.degree(v) == 2);
    }
  }
  CHECK_THROWS_AS(gen_wl_hard_pair(2), Error);
  const auto [c8, cc] = gen_wl_hard_pair(4);
  CHECK_FALSE(testing_support::brute_force_isomorphic(c8, cc));
}

TEST_CASE("gc ranks separate hard pairs under relabeling", "[wltest][property]") {
  Rng rng(40);
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t m = 3 + static_cast<std::size_t>(instance) % 8;
    auto [a, b] = gen_wl_hard_pair(m);
    a = apply_permutation(a, Permutation::random(2 * m, rng));
    b = apply_permutation(b, Permutation::random(2 * m, rng));
    CHECK_FALSE(wl_test(a, b).distinguishable);
    const bool gc = wl_test(a, b, PeKind::gc).distinguishable;
    CHECK(gc == (canonical_form(a).certificate != canonical_form(b).certificate));
    CHECK(gc);
  }
}

TEST_CASE("larger hard pairs", "[wltest]") {
  CanonOptions opts;
  opts.max_nodes = 64;
  for (std::size_t m : {16, 24, 32}) {
    const auto [a, b] = gen_wl_hard_pair(m);
    CHECK_FALSE(wl_test(a, b).distinguishable);
    CHECK(wl_test(a, b, PeKind::gc, nullptr, opts).distinguishable);
  }
}

TEST_CASE("wl test is sound and gc matches certificates", "[wltest][property]") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing_support::random_mixed_graph(2, 11, rng);
    const auto h = rng.bernoulli(0.5) ? apply_permutation(g, Permutation::random(g.size(), rng))
                                      : testing_support::random_mixed_graph(g.size(), g.size(), rng);
    const bool iso = isomorphic(g, h);
    const auto plain = wl_test(g, h);
    if (iso) CHECK_FALSE(plain.distinguishable);
    if (plain.distinguishable) CHECK(plain.final_histograms[0] != plain.final_histograms[1]);
    CHECK(plain.rounds <= 2 * g.size());
    CHECK(wl_test(g, h, PeKind::gc).distinguishable == !iso);
  }
}

TEST_CASE("ugc ranks in the wl test", "[wltest]") {
  const auto [a, b] = gen_wl_hard_pair(3);
  ColoredGraph la = a, lb = b;
  std::vector<std::string> labels{"a", "b", "c", "d", "e", "f"};
  la.set_labels(labels);
  lb.set_labels(labels);
  const LabelUniverse u(labels);
  CHECK(wl_test(la, lb, PeKind::ugc, &u).distinguishable);
  CHECK_FALSE(wl_test(la, la, PeKind::ugc, &u).distinguishable);
  CHECK_THROWS_AS(wl_test(la, lb, PeKind::ugc), Error);
  CHECK_THROWS_AS(wl_test(la, ColoredGraph(5)), Error);
}

TEST_CASE("circulant skip-link graphs", "[wltest]") {
  const auto g = gen_csl(10, 2);
  for (std::size_t v = 0; v < 10; ++v) CHECK(g.degree(v) == 4);
  CHECK_THROWS_AS(gen_csl(4, 2), Error);
  CHECK_THROWS_AS(gen_csl(10, 5), Error);
  CHECK_THROWS_AS(gen_csl(10, 1), Error);

  const auto s2 = gen_csl(41, 2);
  const auto s3 = gen_csl(41, 3);
  CHECK_FALSE(isomorphic(s2, s3));
  Rng rng(3);
  CHECK(isomorphic(s2, apply_permutation(s2, Permutation::random(41, rng))));
  CHECK_FALSE(wl_test(s2, s3).distinguishable);
  CHECK(wl_test(s2, s3, PeKind::gc).distinguishable);
}

TEST_CASE("csl benchmark layout and class structure", "[wltest]") {
  const auto d = csl_benchmark();
  REQUIRE(d.graphs.size() == 150);
  std::map<std::size_t, std::vector<const ColoredGraph*>> classes;
  for (const auto& g : d.graphs) classes[static_cast<std::size_t>(*g.target())].push_back(&g);
  REQUIRE(classes.size() == 10);
  std::vector<Certificate> reps;
  for (const auto& [c, members] : classes) {
    CHECK(members.size() == 15);
    const auto cert = canonical_form(*members.front()).certificate;
    for (const auto* g : members) CHECK(canonical_form(*g).certificate == cert);
    reps.push_back(cert);
  }
  for (std::size_t a = 0; a < reps.size(); ++a) {
    for (std::size_t b = a + 1; b < reps.size(); ++b) CHECK(reps[a] != reps[b]);
  }
  // Multiplying node indices by 20 maps the jumps {1, 2} to {20, 40 = -1}, so skip 20
  // duplicates skip 2 on 41 nodes.
  CHECK_THROWS_AS(csl_benchmark(41, {2, 20}, 2), Error);
}

TEST_CASE("csl benchmark does not depend on the worker count", "[wltest]") {
  CHECK(csl_benchmark(41, default_csl_skips(), 15, 9, 1) ==
        csl_benchmark(41, default_csl_skips(), 15, 9, 4));
  CHECK_FALSE(csl_benchmark(41, default_csl_skips(), 3, 9) ==
              csl_benchmark(41, default_csl_skips(), 3, 10));
}
