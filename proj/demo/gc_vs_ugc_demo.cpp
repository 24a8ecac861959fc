// Shows how one recolor moves every canonical rank while label ranks stay put.
#include <iostream>

#include "canon_gnn/canon_gnn.hpp"

using namespace canon_gnn;

int main() {
  const auto pair = gen_counterexample(8, 1);
  const auto rho1 = canonical_form(pair.g1).colouring;
  const auto rho2 = canonical_form(pair.g2).colouring;
  const auto u = build_universe(GraphDataset{{pair.g1, pair.g2}, std::nullopt});
  const auto tau1 = ugc_colouring(pair.g1, u);
  const auto tau2 = ugc_colouring(pair.g2, u);

  std::cout << "node  color1 color2  rho1 rho2  tau1 tau2\n";
  for (std::size_t v = 0; v < pair.g1.size(); ++v) {
    std::cout << pair.g1.label(v) << "\t" << pair.g1.color(v) << "\t" << pair.g2.color(v) << "\t"
              << rho1[v] << "\t" << rho2[v] << "\t" << tau1[v] << "\t" << tau2[v] << '\n';
  }
  std::cout << "d(G1, G2) = " << graph_distance(pair.g1, pair.g2).distance << '\n';

  const auto [a, b] = gen_wl_hard_pair(4);
  std::cout << "C8 vs 2xC4: 1-WL distinguishes " << std::boolalpha
            << wl_test(a, b).distinguishable << ", with GC ranks "
            << wl_test(a, b, PeKind::gc).distinguishable << '\n';
}
