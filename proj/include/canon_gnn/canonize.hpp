#pragma once

#include <algorithm>
#include <compare>
#include <cstring>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"

namespace canon_gnn {

/// Ordered partition of the nodes. Node v sits in cell node_color[v]; the
/// cell index is the color and cell order is color order.
class Colouring {
 public:
  Colouring() = default;

  /// Colors must be surjective onto 0..k-1.
  explicit Colouring(std::vector<std::uint32_t> node_color) : node_color_(std::move(node_color)) {
    std::vector<bool> used;
    for (auto c : node_color_) {
      if (c >= used.size()) used.resize(c + 1, false);
      used[c] = true;
    }
    if (std::find(used.begin(), used.end(), false) != used.end()) {
      throw Error(ErrorKind::validation, "colouring colors must cover 0..k-1");
    }
    num_cells_ = used.size();
  }

  static Colouring unit(std::size_t n) { return Colouring(std::vector<std::uint32_t>(n, 0)); }

  /// Cells ordered by the raw color value.
  static Colouring from_colors(std::span<const Color> colors) {
    std::vector<Color> distinct(colors.begin(), colors.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<std::uint32_t> cell(colors.size());
    for (std::size_t v = 0; v < colors.size(); ++v) {
      cell[v] = static_cast<std::uint32_t>(
          std::lower_bound(distinct.begin(), distinct.end(), colors[v]) - distinct.begin());
    }
    return Colouring(std::move(cell));
  }

  static Colouring of(const ColoredGraph& g) { return from_colors(g.colors()); }

  std::size_t size() const noexcept { return node_color_.size(); }
  std::size_t num_cells() const noexcept { return num_cells_; }
  std::uint32_t operator[](std::size_t v) const { return node_color_[v]; }
  const std::vector<std::uint32_t>& node_color() const noexcept { return node_color_; }
  bool is_discrete() const noexcept { return num_cells_ == node_color_.size(); }

  /// Cells in color order, members ascending.
  std::vector<std::vector<std::size_t>> cells() const {
    std::vector<std::vector<std::size_t>> out(num_cells_);
    for (std::size_t v = 0; v < node_color_.size(); ++v) out[node_color_[v]].push_back(v);
    return out;
  }

  /// True iff every cell of *this lies inside one cell of coarser.
  bool refines(const Colouring& coarser) const {
    if (coarser.size() != size()) return false;
    std::vector<std::int64_t> parent(num_cells_, -1);
    for (std::size_t v = 0; v < size(); ++v) {
      auto& p = parent[node_color_[v]];
      if (p < 0) {
        p = coarser[v];
      } else if (p != static_cast<std::int64_t>(coarser[v])) {
        return false;
      }
    }
    return true;
  }

  /// Ranks 1..n of a discrete colouring.
  DiscreteColouring to_discrete() const {
    if (!is_discrete()) throw Error(ErrorKind::validation, "colouring is not discrete");
    std::vector<std::uint32_t> order(node_color_.size());
    for (std::size_t v = 0; v < order.size(); ++v) order[v] = node_color_[v] + 1;
    return {std::move(order), ColouringMode::gc};
  }

  friend bool operator==(const Colouring&, const Colouring&) = default;

 private:
  std::vector<std::uint32_t> node_color_;
  std::size_t num_cells_ = 0;
};

namespace detail {

/// Reusable buffers for collision-free colour refinement. Each round ranks
/// the distinct signatures (own colour, sorted neighbour colours)
/// lexicographically; the own colour leads the key, so the new order
/// extends the old one.
class RefineWorkspace {
 public:
  explicit RefineWorkspace(const ColoredGraph& g) : g_(g), offset_(g.size() + 1, 0) {
    for (std::size_t v = 0; v < g.size(); ++v) offset_[v + 1] = offset_[v] + g.degree(v);
    sig_.resize(offset_.back());
    order_.resize(g.size());
    next_.resize(g.size());
  }

  /// Refines colors (values 0..k-1) in place to the coarsest equitable
  /// refinement. Returns the number of rounds that split at least one cell.
  std::size_t run(std::vector<std::uint32_t>& colors, std::size_t& k) {
    const std::size_t n = g_.size();
    std::size_t rounds = 0;
    while (k < n) {
      for (std::size_t v = 0; v < n; ++v) {
        auto* out = sig_.data() + offset_[v];
        std::size_t i = 0;
        for (auto u : g_.neighbors(v)) out[i++] = colors[u];
        std::sort(out, out + i);
      }
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      auto sig_cmp = [&](std::size_t a, std::size_t b) {
        if (colors[a] != colors[b]) return colors[a] <=> colors[b];
        return std::lexicographical_compare_three_way(
            sig_.begin() + static_cast<std::ptrdiff_t>(offset_[a]),
            sig_.begin() + static_cast<std::ptrdiff_t>(offset_[a + 1]),
            sig_.begin() + static_cast<std::ptrdiff_t>(offset_[b]),
            sig_.begin() + static_cast<std::ptrdiff_t>(offset_[b + 1]));
      };
      std::sort(order_.begin(), order_.end(),
                [&](std::size_t a, std::size_t b) { return sig_cmp(a, b) < 0; });
      std::uint32_t rank = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && sig_cmp(order_[i - 1], order_[i]) != 0) ++rank;
        next_[order_[i]] = rank;
      }
      const std::size_t new_k = n == 0 ? 0 : rank + 1;
      if (new_k == k) break;
      colors.swap(next_);
      k = new_k;
      ++rounds;
    }
    return rounds;
  }

 private:
  const ColoredGraph& g_;
  std::vector<std::size_t> offset_;
  std::vector<std::uint32_t> sig_;
  std::vector<std::size_t> order_;
  std::vector<std::uint32_t> next_;
};

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  out.push_back(static_cast<std::uint8_t>(x >> 24));
  out.push_back(static_cast<std::uint8_t>(x >> 16));
  out.push_back(static_cast<std::uint8_t>(x >> 8));
  out.push_back(static_cast<std::uint8_t>(x));
}

inline std::size_t row_bytes(std::size_t n) { return (n + 7) / 8; }

}  // namespace detail

struct RefineResult {
  Colouring colouring;
  std::size_t rounds = 0;
};

inline RefineResult refine_with_stats(const ColoredGraph& g, const Colouring& start) {
  if (start.size() != g.size()) {
    throw Error(ErrorKind::dimension, "colouring size does not match graph");
  }
  std::vector<std::uint32_t> colors = start.node_color();
  std::size_t k = start.num_cells();
  detail::RefineWorkspace ws(g);
  const std::size_t rounds = ws.run(colors, k);
  return {Colouring(std::move(colors)), rounds};
}

/// Coarsest equitable refinement of start whose colour order extends the
/// order of start.
inline Colouring refine(const ColoredGraph& g, const Colouring& start) {
  return refine_with_stats(g, start).colouring;
}

/// Canonical byte string of g under a node order.
///
/// Layout: n as 4-byte big-endian; then for each position p = 0..n-1 the
/// adjacency row of the node ranked p+1, packed MSB-first and padded to a
/// whole byte per row; then each node's color as 4-byte big-endian in the
/// same order.
struct Certificate {
  std::vector<std::uint8_t> bytes;

  std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
      s.push_back(digits[b >> 4]);
      s.push_back(digits[b & 0xF]);
    }
    return s;
  }

  friend bool operator==(const Certificate&, const Certificate&) = default;
  friend auto operator<=>(const Certificate&, const Certificate&) = default;
};

inline Certificate certificate_of(const ColoredGraph& g, const DiscreteColouring& order) {
  const std::size_t n = g.size();
  if (order.size() != n) throw Error(ErrorKind::dimension, "colouring size does not match graph");
  std::vector<std::size_t> at(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    if (order[v] == 0 || order[v] > n) {
      throw Error(ErrorKind::validation, "certificate requires ranks 1..n");
    }
    at[order[v] - 1] = v;
  }
  Certificate cert;
  const std::size_t rb = detail::row_bytes(n);
  cert.bytes.reserve(4 + n * rb + 4 * n);
  detail::put_be32(cert.bytes, static_cast<std::uint32_t>(n));
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t base = cert.bytes.size();
    cert.bytes.resize(base + rb, 0);
    for (std::size_t q = 0; q < n; ++q) {
      if (g.has_edge(at[p], at[q])) {
        cert.bytes[base + q / 8] |= static_cast<std::uint8_t>(0x80U >> (q % 8));
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) detail::put_be32(cert.bytes, g.color(at[p]));
  return cert;
}

struct SearchStats {
  std::size_t nodes_expanded = 0;
  std::size_t leaves_visited = 0;
  std::size_t pruned = 0;
};

struct CanonResult {
  /// rho(v|G): the position of v in the canonical form, 1-based.
  DiscreteColouring colouring;
  Certificate certificate;
  SearchStats search_stats;
};

struct CanonOptions {
  std::size_t max_nodes = 64;
};

namespace detail {

class IrSearch {
 public:
  explicit IrSearch(const ColoredGraph& g) : g_(g), ws_(g), n_(g.size()), rb_(row_bytes(n_)) {}

  CanonResult run() {
    const Colouring start = Colouring::of(g_);
    std::vector<std::uint32_t> colors = start.node_color();
    std::size_t k = start.num_cells();
    ws_.run(colors, k);
    descend(colors, k);
    return {DiscreteColouring(best_order_, ColouringMode::gc), Certificate{best_}, stats_};
  }

 private:
  void descend(const std::vector<std::uint32_t>& colors, std::size_t k) {
    ++stats_.nodes_expanded;
    if (k == n_) {
      leaf(colors);
      return;
    }

    std::vector<std::size_t> cell_size(k, 0);
    for (auto c : colors) ++cell_size[c];

    if (!best_.empty() && prefix_exceeds_best(colors, cell_size)) {
      ++stats_.pruned;
      return;
    }

    std::uint32_t target = 0;
    std::size_t target_size = n_ + 1;
    for (std::uint32_t c = 0; c < k; ++c) {
      if (cell_size[c] > 1 && cell_size[c] < target_size) {
        target = c;
        target_size = cell_size[c];
      }
    }

    std::vector<std::uint32_t> child(n_);
    std::vector<std::size_t> explored;
    for (std::size_t v = 0; v < n_; ++v) {
      if (colors[v] != target) continue;
      if (!explored.empty() && same_orbit_as_explored(v, explored)) {
        ++stats_.pruned;
        continue;
      }
      explored.push_back(v);
      path_.push_back(v);
      // v takes colour `target`; the rest of its cell and every later cell
      // move up by one, so v is ordered directly ahead of its former cell.
      for (std::size_t u = 0; u < n_; ++u) {
        child[u] = colors[u] < target ? colors[u] : colors[u] + 1;
      }
      child[v] = target;
      std::size_t child_k = k + 1;
      ws_.run(child, child_k);
      descend(child, child_k);
      path_.pop_back();
      if (backjump_ != kNoJump) {
        if (backjump_ < path_.size()) return;
        backjump_ = kNoJump;
      }
    }
  }

  static std::size_t common_prefix(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b) {
    std::size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
    return i;
  }

  // Children related by an automorphism fixing the current path pointwise
  // root isomorphic subtrees, so only one per orbit needs a visit.
  bool same_orbit_as_explored(std::size_t v, const std::vector<std::size_t>& explored) {
    std::vector<std::size_t> parent(n_);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    bool any = false;
    for (const auto& gamma : generators_) {
      const bool fixes_path =
          std::all_of(path_.begin(), path_.end(), [&](std::size_t p) { return gamma[p] == p; });
      if (!fixes_path) continue;
      any = true;
      for (std::size_t x = 0; x < n_; ++x) parent[find(x)] = find(gamma[x]);
    }
    if (!any) return false;
    const std::size_t root = find(v);
    return std::any_of(explored.begin(), explored.end(),
                       [&](std::size_t w) { return find(w) == root; });
  }

  // Leaves with equal certificates differ by an automorphism:
  // gamma(v) is the node at v's position in the other leaf.
  void record_automorphism(const std::vector<std::uint32_t>& a,
                           const std::vector<std::uint32_t>& b) {
    std::vector<std::size_t> at_b(n_);
    for (std::size_t v = 0; v < n_; ++v) at_b[b[v] - 1] = v;
    std::vector<std::size_t> gamma(n_);
    bool identity = true;
    for (std::size_t v = 0; v < n_; ++v) {
      gamma[v] = at_b[a[v] - 1];
      identity = identity && gamma[v] == v;
    }
    if (!identity) generators_.push_back(std::move(gamma));
  }

  void leaf(const std::vector<std::uint32_t>& colors) {
    ++stats_.leaves_visited;
    std::vector<std::uint32_t> order(n_);
    for (std::size_t v = 0; v < n_; ++v) order[v] = colors[v] + 1;
    Certificate cert = certificate_of(g_, DiscreteColouring(order, ColouringMode::gc));
    // A match maps the earlier leaf's branch at the divergence point onto the
    // current one. That branch is fully explored, so return to the fork.
    if (first_.empty()) {
      first_ = cert.bytes;
      first_order_ = order;
      first_path_ = path_;
    } else if (cert.bytes == first_) {
      record_automorphism(first_order_, order);
      backjump_ = common_prefix(first_path_, path_);
      return;
    } else if (cert.bytes == best_) {
      record_automorphism(best_order_, order);
      backjump_ = common_prefix(best_path_, path_);
      return;
    }
    if (best_.empty() || cert.bytes < best_) {
      best_ = std::move(cert.bytes);
      best_order_ = std::move(order);
      best_path_ = path_;
    }
  }

  // Rows of the leading run of singleton cells are fixed for every leaf
  // below an equitable colouring: a singleton is adjacent to all or none of
  // each cell, and later refinement only splits cells in place.
  bool prefix_exceeds_best(const std::vector<std::uint32_t>& colors,
                           const std::vector<std::size_t>& cell_size) const {
    std::size_t lead = 0;
    while (lead < cell_size.size() && cell_size[lead] == 1) ++lead;
    if (lead == 0) return false;

    const std::size_t k = cell_size.size();
    std::vector<std::size_t> start(k + 1, 0);
    for (std::size_t c = 0; c < k; ++c) start[c + 1] = start[c] + cell_size[c];
    std::vector<std::size_t> rep(k, n_);
    for (std::size_t v = 0; v < n_; ++v) {
      if (rep[colors[v]] == n_) rep[colors[v]] = v;
    }

    std::vector<std::uint8_t> row(rb_);
    for (std::size_t p = 0; p < lead; ++p) {
      const std::size_t node = rep[p];
      std::fill(row.begin(), row.end(), 0);
      for (std::size_t c = 0; c < k; ++c) {
        if (!g_.has_edge(node, rep[c])) continue;
        for (std::size_t q = start[c]; q < start[c + 1]; ++q) {
          row[q / 8] |= static_cast<std::uint8_t>(0x80U >> (q % 8));
        }
      }
      const auto* best_row = best_.data() + 4 + p * rb_;
      const int cmp = std::memcmp(row.data(), best_row, rb_);
      if (cmp < 0) return false;
      if (cmp > 0) return true;
    }
    return false;
  }

  const ColoredGraph& g_;
  RefineWorkspace ws_;
  std::size_t n_;
  std::size_t rb_;
  std::vector<std::uint8_t> best_;
  std::vector<std::uint32_t> best_order_;
  std::vector<std::uint8_t> first_;
  std::vector<std::uint32_t> first_order_;
  std::vector<std::size_t> first_path_;
  std::vector<std::size_t> best_path_;
  std::vector<std::vector<std::size_t>> generators_;
  std::vector<std::size_t> path_;
  static constexpr std::size_t kNoJump = static_cast<std::size_t>(-1);
  std::size_t backjump_ = kNoJump;
  SearchStats stats_;
};

}  // namespace detail

/// Canonical labeling by individualization-refinement. The returned
/// colouring is the leaf whose certificate is lexicographically smallest.
inline CanonResult canonical_form(const ColoredGraph& g, const CanonOptions& options = {}) {
  if (g.size() == 0) throw Error(ErrorKind::validation, "graph has no nodes");
  if (g.size() > options.max_nodes) {
    throw Error(ErrorKind::size, "graph '" + g.id() + "' has " + std::to_string(g.size()) +
                                     " nodes, above the exact canonization limit of " +
                                     std::to_string(options.max_nodes) +
                                     "; use the UGC (label-based) path instead");
  }
  return detail::IrSearch(g).run();
}

/// Sufficient test for a trivial automorphism group: refinement of the
/// initial colours is already discrete. A false result proves nothing.
inline bool is_rigid(const ColoredGraph& g) {
  return refine(g, Colouring::of(g)).is_discrete();
}

inline bool isomorphic(const ColoredGraph& g1, const ColoredGraph& g2,
                       const CanonOptions& options = {}) {
  if (g1.size() != g2.size()) return false;
  return canonical_form(g1, options).certificate == canonical_form(g2, options).certificate;
}

}  // namespace canon_gnn
