#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "canon_gnn/error.hpp"
#include "canon_gnn/rng.hpp"

namespace canon_gnn {

using Color = std::uint32_t;
using Edge = std::pair<std::size_t, std::size_t>;

/// Simple undirected graph with integer node colors and optional per-node
/// global labels. Adjacency is kept both as bitset rows and as sorted
/// neighbor lists.
class ColoredGraph {
 public:
  ColoredGraph() = default;

  explicit ColoredGraph(std::size_t n, std::string id = {})
      : n_(n),
        words_((n + 63) / 64),
        bits_(n * words_, 0),
        neighbors_(n),
        colors_(n, 0),
        id_(std::move(id)) {}

  ColoredGraph(std::size_t n, std::span<const Edge> edges, std::vector<Color> colors,
               std::string id = {})
      : ColoredGraph(n, std::move(id)) {
    if (colors.size() != n) {
      throw Error(ErrorKind::dimension, "graph '" + id_ + "': colors has length " +
                                            std::to_string(colors.size()) + ", expected " +
                                            std::to_string(n));
    }
    colors_ = std::move(colors);
    for (auto [u, v] : edges) add_edge(u, v);
  }

  std::size_t size() const noexcept { return n_; }
  const std::string& id() const noexcept { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  bool has_edge(std::size_t u, std::size_t v) const {
    return (bits_[u * words_ + v / 64] >> (v % 64)) & 1U;
  }

  void add_edge(std::size_t u, std::size_t v) { set_edge(u, v, true); }
  void remove_edge(std::size_t u, std::size_t v) { set_edge(u, v, false); }

  void set_edge(std::size_t u, std::size_t v, bool present) {
    check_node(u);
    check_node(v);
    if (u == v) {
      throw Error(ErrorKind::validation,
                  "graph '" + id_ + "': self-loop on node " + std::to_string(u));
    }
    if (has_edge(u, v) == present) return;
    flip_bit(u, v);
    flip_bit(v, u);
    if (present) {
      insert_sorted(neighbors_[u], v);
      insert_sorted(neighbors_[v], u);
      ++edge_count_;
    } else {
      erase_sorted(neighbors_[u], v);
      erase_sorted(neighbors_[v], u);
      --edge_count_;
    }
  }

  std::span<const std::size_t> neighbors(std::size_t v) const { return neighbors_[v]; }
  std::size_t degree(std::size_t v) const { return neighbors_[v].size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  /// Packed adjacency row of v, 64 nodes per word, bit (w % 64) of word w / 64.
  std::span<const std::uint64_t> row(std::size_t v) const {
    return {bits_.data() + v * words_, words_};
  }

  /// Edges (u, v) with u < v, sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (std::size_t u = 0; u < n_; ++u) {
      for (auto v : neighbors_[u]) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  Color color(std::size_t v) const { return colors_[v]; }
  const std::vector<Color>& colors() const noexcept { return colors_; }
  void set_color(std::size_t v, Color c) {
    check_node(v);
    colors_[v] = c;
  }
  void set_colors(std::vector<Color> colors) {
    if (colors.size() != n_) {
      throw Error(ErrorKind::dimension, "graph '" + id_ + "': colors length mismatch");
    }
    colors_ = std::move(colors);
  }
  Color max_color() const {
    return colors_.empty() ? 0 : *std::max_element(colors_.begin(), colors_.end());
  }

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t v) const { return labels_.value()[v]; }

  void set_labels(std::optional<std::vector<std::string>> labels) {
    if (labels) {
      if (labels->size() != n_) {
        throw Error(ErrorKind::dimension, "graph '" + id_ + "': labels has length " +
                                              std::to_string(labels->size()) + ", expected " +
                                              std::to_string(n_));
      }
      std::unordered_set<std::string> seen;
      for (const auto& l : *labels) {
        if (!seen.insert(l).second) {
          throw Error(ErrorKind::validation,
                      "graph '" + id_ + "': duplicate label '" + l + "'");
        }
      }
    }
    labels_ = std::move(labels);
  }

  const std::optional<double>& target() const noexcept { return target_; }
  void set_target(std::optional<double> t) { target_ = t; }

  /// Reserved; every graph in this library is undirected.
  bool is_directed() const noexcept { return false; }

  friend bool operator==(const ColoredGraph& a, const ColoredGraph& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_ && a.colors_ == b.colors_ &&
           a.labels_ == b.labels_ && a.id_ == b.id_ && a.target_ == b.target_;
  }

 private:
  void check_node(std::size_t v) const {
    if (v >= n_) {
      throw Error(ErrorKind::dimension, "graph '" + id_ + "': node " + std::to_string(v) +
                                            " out of range for n=" + std::to_string(n_));
    }
  }
  void flip_bit(std::size_t u, std::size_t v) {
    bits_[u * words_ + v / 64] ^= std::uint64_t{1} << (v % 64);
  }
  static void insert_sorted(std::vector<std::size_t>& xs, std::size_t v) {
    xs.insert(std::lower_bound(xs.begin(), xs.end(), v), v);
  }
  static void erase_sorted(std::vector<std::size_t>& xs, std::size_t v) {
    xs.erase(std::lower_bound(xs.begin(), xs.end(), v));
  }

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::size_t edge_count_ = 0;
  std::vector<Color> colors_;
  std::optional<std::vector<std::string>> labels_;
  std::string id_;
  std::optional<double> target_;
};

/// Bijection of {0..n-1}; maps node v to mapping[v].
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (auto x : mapping_) {
      if (x >= mapping_.size() || seen[x]) {
        throw Error(ErrorKind::validation, "permutation is not a bijection");
      }
      seen[x] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    Permutation p;
    p.mapping_.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.mapping_[i] = i;
    return p;
  }

  static Permutation random(std::size_t n, Rng& rng) {
    auto p = identity(n);
    rng.shuffle(std::span<std::size_t>(p.mapping_));
    return p;
  }

  std::size_t size() const noexcept { return mapping_.size(); }
  std::size_t operator[](std::size_t v) const { return mapping_[v]; }
  const std::vector<std::size_t>& mapping() const noexcept { return mapping_; }

  Permutation inverse() const {
    Permutation inv;
    inv.mapping_.resize(mapping_.size());
    for (std::size_t i = 0; i < mapping_.size(); ++i) inv.mapping_[mapping_[i]] = i;
    return inv;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < mapping_.size(); ++i) {
      if (mapping_[i] != i) return false;
    }
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> mapping_;
};

/// (q ∘ p)(v) = q(p(v)).
inline Permutation compose(const Permutation& q, const Permutation& p) {
  if (q.size() != p.size()) throw Error(ErrorKind::dimension, "compose: size mismatch");
  std::vector<std::size_t> m(p.size());
  for (std::size_t v = 0; v < p.size(); ++v) m[v] = q[p[v]];
  return Permutation(std::move(m));
}

enum class ColouringMode { gc, ugc };

/// Discrete colouring as 1-based ranks per node. GC ranks are exactly
/// {1..n}; UGC ranks are distinct values from a dataset-wide universe.
class DiscreteColouring {
 public:
  DiscreteColouring() = default;

  DiscreteColouring(std::vector<std::uint32_t> order, ColouringMode mode)
      : order_(std::move(order)), mode_(mode) {
    std::vector<std::uint32_t> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorKind::validation, "discrete colouring has repeated ranks");
    }
    if (!sorted.empty() && sorted.front() == 0) {
      throw Error(ErrorKind::validation, "discrete colouring ranks are 1-based");
    }
    if (mode_ == ColouringMode::gc && !sorted.empty() && sorted.back() != sorted.size()) {
      throw Error(ErrorKind::validation, "GC colouring must use exactly ranks 1..n");
    }
  }

  std::size_t size() const noexcept { return order_.size(); }
  std::uint32_t operator[](std::size_t v) const { return order_[v]; }
  const std::vector<std::uint32_t>& order() const noexcept { return order_; }
  ColouringMode mode() const noexcept { return mode_; }
  std::uint32_t max_rank() const {
    return order_.empty() ? 0 : *std::max_element(order_.begin(), order_.end());
  }

  friend bool operator==(const DiscreteColouring&, const DiscreteColouring&) = default;

 private:
  std::vector<std::uint32_t> order_;
  ColouringMode mode_ = ColouringMode::gc;
};

/// Dense real matrix with one row per node.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(std::size_t rows, std::size_t cols)
      : data_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(cols))) {}
  explicit FeatureTensor(Eigen::MatrixXd data) : data_(std::move(data)) {}

  std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(data_.cols()); }

  double operator()(std::size_t r, std::size_t c) const {
    return data_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  const Eigen::MatrixXd& matrix() const noexcept { return data_; }
  Eigen::MatrixXd& matrix() noexcept { return data_; }

  friend bool operator==(const FeatureTensor& a, const FeatureTensor& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           a.data_ == b.data_;
  }

 private:
  Eigen::MatrixXd data_;
};

struct GraphDataset {
  std::vector<ColoredGraph> graphs;
  /// Sorted distinct labels; rank of labels[i] is i + 1.
  std::optional<std::vector<std::string>> label_universe;

  const ColoredGraph* find(std::string_view id) const {
    for (const auto& g : graphs) {
      if (g.id() == id) return &g;
    }
    return nullptr;
  }

  const ColoredGraph& at(std::string_view id) const {
    if (const auto* g = find(id)) return *g;
    throw Error(ErrorKind::configuration, "no graph with id '" + std::string(id) + "'");
  }

  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

/// Relabels node v as p[v]: edge (p[u], p[v]) exists iff (u, v) does and
/// the color (and label) of p[v] in the result is that of v in g.
inline ColoredGraph apply_permutation(const ColoredGraph& g, const Permutation& p) {
  if (p.size() != g.size()) {
    throw Error(ErrorKind::dimension, "permutation of length " + std::to_string(p.size()) +
                                          " applied to graph with " +
                                          std::to_string(g.size()) + " nodes");
  }
  const std::size_t n = g.size();
  std::vector<Color> colors(n);
  for (std::size_t v = 0; v < n; ++v) colors[p[v]] = g.color(v);
  std::vector<Edge> edges;
  edges.reserve(g.edge_count());
  for (auto [u, v] : g.edges()) edges.emplace_back(p[u], p[v]);
  ColoredGraph out(n, edges, std::move(colors), g.id());
  if (g.has_labels()) {
    std::vector<std::string> labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[p[v]] = g.label(v);
    out.set_labels(std::move(labels));
  }
  out.set_target(g.target());
  return out;
}

/// Row v of a node-indexed array moves to row p[v].
template <typename T>
std::vector<T> permute_rows(std::span<const T> values, const Permutation& p) {
  if (values.size() != p.size()) throw Error(ErrorKind::dimension, "permute_rows: size mismatch");
  std::vector<T> out(values.size());
  for (std::size_t v = 0; v < values.size(); ++v) out[p[v]] = values[v];
  return out;
}

inline FeatureTensor permute_rows(const FeatureTensor& x, const Permutation& p) {
  if (x.rows() != p.size()) throw Error(ErrorKind::dimension, "permute_rows: size mismatch");
  FeatureTensor out(x.rows(), x.cols());
  for (std::size_t v = 0; v < x.rows(); ++v) {
    out.matrix().row(static_cast<Eigen::Index>(p[v])) =
        x.matrix().row(static_cast<Eigen::Index>(v));
  }
  return out;
}

inline DiscreteColouring permute_rows(const DiscreteColouring& c, const Permutation& p) {
  return {permute_rows(std::span<const std::uint32_t>(c.order()), p), c.mode()};
}

inline FeatureTensor one_hot_colors(const ColoredGraph& g, std::size_t width) {
  FeatureTensor x(g.size(), width);
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.color(v) >= width) {
      throw Error(ErrorKind::width, "color " + std::to_string(g.color(v)) + " of node " +
                                        std::to_string(v) + " does not fit width " +
                                        std::to_string(width));
    }
    x(v, g.color(v)) = 1.0;
  }
  return x;
}

/// One-hot of 1-based ranks: row v has its 1 at column rank(v) - 1.
inline FeatureTensor one_hot_ranks(const DiscreteColouring& c, std::size_t width) {
  FeatureTensor x(c.size(), width);
  for (std::size_t v = 0; v < c.size(); ++v) {
    if (c[v] > width) {
      throw Error(ErrorKind::width, "rank " + std::to_string(c[v]) + " does not fit width " +
                                        std::to_string(width));
    }
    x(v, c[v] - 1) = 1.0;
  }
  return x;
}

inline FeatureTensor concat_features(const FeatureTensor& x, const FeatureTensor& p) {
  if (x.rows() != p.rows()) {
    throw Error(ErrorKind::dimension, "concat of " + std::to_string(x.rows()) + " and " +
                                          std::to_string(p.rows()) + " rows");
  }
  Eigen::MatrixXd out(x.matrix().rows(), x.matrix().cols() + p.matrix().cols());
  out.leftCols(x.matrix().cols()) = x.matrix();
  out.rightCols(p.matrix().cols()) = p.matrix();
  return FeatureTensor(std::move(out));
}

}  // namespace canon_gnn
