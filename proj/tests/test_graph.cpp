#include <catch_amalgamated.hpp>

#include <set>

#include "test_support.hpp"

using namespace canon_gnn;

TEST_CASE("edges are symmetric and self-loops are rejected", "[graph]") {
  ColoredGraph g(4, "g");
  g.add_edge(0, 2);
  g.add_edge(3, 1);
  CHECK(g.has_edge(2, 0));
  CHECK(g.has_edge(1, 3));
  CHECK(g.edge_count() == 2);
  CHECK(g.degree(0) == 1);
  CHECK_THROWS_AS(g.add_edge(1, 1), Error);
  g.remove_edge(0, 2);
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(g.edge_count() == 1);
  CHECK_THROWS_AS(g.add_edge(0, 4), Error);
}

TEST_CASE("neighbor lists stay sorted", "[graph]") {
  ColoredGraph g(5);
  g.add_edge(2, 4);
  g.add_edge(2, 0);
  g.add_edge(2, 3);
  const auto nb = g.neighbors(2);
  CHECK(std::vector<std::size_t>(nb.begin(), nb.end()) == std::vector<std::size_t>{0, 3, 4});
}

TEST_CASE("labels must be distinct and match the node count", "[graph]") {
  ColoredGraph g(3);
  CHECK_THROWS_AS(g.set_labels(std::vector<std::string>{"a", "b"}), Error);
  CHECK_THROWS_AS(g.set_labels(std::vector<std::string>{"a", "b", "a"}), Error);
  g.set_labels(std::vector<std::string>{"x", "y", "z"});
  CHECK(g.label(1) == "y");
}

TEST_CASE("permutation validation and algebra", "[graph]") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), Error);
  CHECK_THROWS_AS(Permutation({0, 3, 1}), Error);
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = Permutation::random(7, rng);
    const auto q = Permutation::random(7, rng);
    CHECK(compose(p, p.inverse()).is_identity());
    CHECK(compose(p.inverse(), p).is_identity());
    const auto qp = compose(q, p);
    for (std::size_t v = 0; v < 7; ++v) CHECK(qp[v] == q[p[v]]);
  }
}

TEST_CASE("random permutations are uniform enough on three elements", "[graph][rng]") {
  Rng rng(5);
  std::map<std::vector<std::size_t>, int> counts;
  for (int i = 0; i < 6000; ++i) ++counts[Permutation::random(3, rng).mapping()];
  REQUIRE(counts.size() == 6);
  for (const auto& [perm, c] : counts) {
    CHECK(c > 850);
    CHECK(c < 1150);
  }
}

TEST_CASE("apply_permutation relabels edges, colors, labels", "[graph]") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    ColoredGraph g = testing_support::random_graph(8, 0.4, 3, rng);
    std::vector<std::string> labels;
    for (std::size_t v = 0; v < 8; ++v) labels.push_back("n" + std::to_string(v));
    g.set_labels(labels);
    const auto p = Permutation::random(8, rng);
    const auto h = apply_permutation(g, p);
    CHECK(h.edge_count() == g.edge_count());
    for (std::size_t u = 0; u < 8; ++u) {
      CHECK(h.color(p[u]) == g.color(u));
      CHECK(h.label(p[u]) == g.label(u));
      for (std::size_t v = 0; v < 8; ++v) {
        if (u != v) CHECK(h.has_edge(p[u], p[v]) == g.has_edge(u, v));
      }
    }
    CHECK(apply_permutation(h, p.inverse()) == g);
  }
}

TEST_CASE("discrete colourings are validated", "[graph]") {
  CHECK_THROWS_AS(DiscreteColouring({1, 1, 2}, ColouringMode::gc), Error);
  CHECK_THROWS_AS(DiscreteColouring({0, 1, 2}, ColouringMode::gc), Error);
  CHECK_THROWS_AS(DiscreteColouring({1, 2, 5}, ColouringMode::gc), Error);
  CHECK_NOTHROW(DiscreteColouring({1, 2, 5}, ColouringMode::ugc));
}

TEST_CASE("one-hot features", "[graph]") {
  ColoredGraph g(3);
  g.set_colors({2, 0, 1});
  const auto x = one_hot_colors(g, 4);
  CHECK(x.cols() == 4);
  CHECK(x(0, 2) == 1.0);
  CHECK(x(1, 0) == 1.0);
  CHECK(x.matrix().sum() == 3.0);
  CHECK_THROWS_AS(one_hot_colors(g, 2), Error);

  const DiscreteColouring rho({3, 1, 2}, ColouringMode::gc);
  const auto p = one_hot_ranks(rho, 5);
  CHECK(p(0, 2) == 1.0);
  CHECK(p(1, 0) == 1.0);
  CHECK(p.matrix().rightCols(2).sum() == 0.0);

  const auto xp = concat_features(x, p);
  CHECK(xp.cols() == 9);
  CHECK(xp(2, 4 + 1) == 1.0);
  const FeatureTensor short_rows(Eigen::MatrixXd::Zero(2, 3));
  CHECK_THROWS_AS(concat_features(x, short_rows), Error);
}

TEST_CASE("rng streams are reproducible and distinct", "[rng]") {
  Rng a = Rng::stream(42, {1, 2});
  Rng b = Rng::stream(42, {1, 2});
  Rng c = Rng::stream(42, {2, 1});
  std::set<std::uint64_t> seen;
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
    seen.insert(x);
  }
  CHECK(differs);
  CHECK(seen.size() == 100);

  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    CHECK(r.below(7) < 7);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have unit variance", "[rng]") {
  Rng r(1);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("permuting a colored triangle", "[graph]") {
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {0, 2}};
  const ColoredGraph tri(3, edges, {0, 1, 2}, "tri");
  const auto out = apply_permutation(tri, Permutation({1, 2, 0}));
  CHECK(out.colors() == std::vector<Color>{2, 0, 1});
  CHECK(out.edge_count() == 3);
  CHECK(apply_permutation(tri, Permutation::identity(3)) == tri);
  CHECK_THROWS_AS(apply_permutation(tri, Permutation::identity(4)), Error);
}

TEST_CASE("permutation action is closed under composition", "[graph][property]") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = testing_support::random_graph(8, 0.35, 3, rng);
    const auto p = Permutation::random(8, rng);
    const auto q = Permutation::random(8, rng);
    CHECK(apply_permutation(apply_permutation(g, p), q) == apply_permutation(g, compose(q, p)));
  }
}

TEST_CASE("one-hot rows sum to one", "[graph][property]") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = testing_support::random_graph(1 + rng.below(10), 0.3, 1 + rng.below(5), rng);
    const auto x = one_hot_colors(g, g.max_color() + 1 + rng.below(3));
    for (Eigen::Index r = 0; r < x.matrix().rows(); ++r) CHECK(x.matrix().row(r).sum() == 1.0);
  }
  ColoredGraph three(3);
  CHECK(one_hot_colors(three, 1).matrix() == Eigen::MatrixXd::Ones(3, 1));
  ColoredGraph one(1);
  one.set_colors({2});
  Eigen::MatrixXd expect(1, 4);
  expect << 0, 0, 1, 0;
  CHECK(one_hot_colors(one, 4).matrix() == expect);
}
