#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "canon_gnn/error.hpp"
#include "canon_gnn/graph.hpp"

namespace canon_gnn {

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::parse, where + ": missing field '" + key + "'");
  }
  return *it;
}

inline std::size_t as_index(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorKind::parse, where + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline ColoredGraph graph_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::parse, where + ": expected an object");
  const auto& id = require(j, "id", where);
  if (!id.is_string()) throw Error(ErrorKind::parse, where + ".id: expected a string");
  const std::string gw = where + " (id '" + id.get<std::string>() + "')";
  if (auto d = j.find("directed"); d != j.end() && d->is_boolean() && d->get<bool>()) {
    throw Error(ErrorKind::validation, gw + ": directed graphs are not supported");
  }
  const std::size_t n = as_index(require(j, "num_nodes", gw), gw + ".num_nodes");
  if (n == 0) throw Error(ErrorKind::validation, gw + ": num_nodes must be positive");

  const auto& colors_j = require(j, "colors", gw);
  if (!colors_j.is_array() || colors_j.size() != n) {
    throw Error(ErrorKind::parse, gw + ".colors: expected an array of " + std::to_string(n) +
                                      " integers");
  }
  std::vector<Color> colors(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto c = as_index(colors_j[v], gw + ".colors[" + std::to_string(v) + "]");
    if (c > std::numeric_limits<Color>::max()) {
      throw Error(ErrorKind::parse, gw + ".colors[" + std::to_string(v) + "]: too large");
    }
    colors[v] = static_cast<Color>(c);
  }

  ColoredGraph g(n, id.get<std::string>());
  g.set_colors(std::move(colors));

  const auto& edges_j = require(j, "edges", gw);
  if (!edges_j.is_array()) throw Error(ErrorKind::parse, gw + ".edges: expected an array");
  for (std::size_t e = 0; e < edges_j.size(); ++e) {
    const std::string ew = gw + ".edges[" + std::to_string(e) + "]";
    const auto& pair = edges_j[e];
    if (!pair.is_array() || pair.size() != 2) {
      throw Error(ErrorKind::parse, ew + ": expected [u, v]");
    }
    const auto u = as_index(pair[0], ew);
    const auto v = as_index(pair[1], ew);
    if (u >= n || v >= n) throw Error(ErrorKind::parse, ew + ": node index out of range");
    if (u == v) throw Error(ErrorKind::validation, ew + ": self-loops are not allowed");
    g.add_edge(u, v);
  }

  if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorKind::parse, gw + ".labels: expected an array");
    std::vector<std::string> labels;
    labels.reserve(it->size());
    for (std::size_t v = 0; v < it->size(); ++v) {
      if (!(*it)[v].is_string()) {
        throw Error(ErrorKind::parse, gw + ".labels[" + std::to_string(v) + "]: expected a string");
      }
      labels.push_back((*it)[v].get<std::string>());
    }
    g.set_labels(std::move(labels));
  }

  if (auto it = j.find("target"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw Error(ErrorKind::parse, gw + ".target: expected a number");
    g.set_target(it->get<double>());
  }
  return g;
}

}  // namespace detail

inline nlohmann::json to_json(const ColoredGraph& g) {
  nlohmann::json j;
  j["id"] = g.id();
  j["num_nodes"] = g.size();
  auto edges = nlohmann::json::array();
  for (auto [u, v] : g.edges()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  j["colors"] = g.colors();
  if (g.has_labels()) j["labels"] = *g.labels();
  if (const auto& t = g.target()) {
    double ip;
    if (std::modf(*t, &ip) == 0.0 && std::abs(*t) < 9.0e15) {
      j["target"] = static_cast<long long>(*t);
    } else {
      j["target"] = *t;
    }
  } else {
    j["target"] = nullptr;
  }
  return j;
}

inline nlohmann::json to_json(const GraphDataset& d) {
  nlohmann::json j;
  auto graphs = nlohmann::json::array();
  for (const auto& g : d.graphs) graphs.push_back(to_json(g));
  j["graphs"] = std::move(graphs);
  if (d.label_universe) j["label_universe"] = *d.label_universe;
  return j;
}

inline GraphDataset dataset_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "dataset: top level must be an object");
  const auto& graphs = detail::require(j, "graphs", "dataset");
  if (!graphs.is_array()) throw Error(ErrorKind::parse, "dataset.graphs: expected an array");
  GraphDataset d;
  d.graphs.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    d.graphs.push_back(detail::graph_from_json(graphs[i], "graphs[" + std::to_string(i) + "]"));
  }
  if (auto it = j.find("label_universe"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorKind::parse, "dataset.label_universe: expected an array");
    std::vector<std::string> universe;
    for (const auto& l : *it) {
      if (!l.is_string()) throw Error(ErrorKind::parse, "dataset.label_universe: expected strings");
      universe.push_back(l.get<std::string>());
    }
    if (!std::is_sorted(universe.begin(), universe.end()) ||
        std::adjacent_find(universe.begin(), universe.end()) != universe.end()) {
      throw Error(ErrorKind::validation, "label_universe must be sorted and distinct");
    }
    for (const auto& g : d.graphs) {
      if (!g.has_labels()) continue;
      for (const auto& l : *g.labels()) {
        if (!std::binary_search(universe.begin(), universe.end(), l)) {
          throw Error(ErrorKind::validation, "graph '" + g.id() + "': label '" + l +
                                                 "' missing from label_universe");
        }
      }
    }
    d.label_universe = std::move(universe);
  }
  return d;
}

inline GraphDataset parse_dataset_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, "line " + std::to_string(detail::line_of_offset(text, e.byte)) +
                                      ": " + e.what());
  }
  return dataset_from_json(j);
}

/// Whitespace-separated "u v" per line; '#' starts a comment. The node count
/// is one more than the largest index mentioned; all colors are 0.
inline ColoredGraph parse_edge_list(std::istream& in, std::string id) {
  std::vector<Edge> edges;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long u = 0, v = 0;
    if (!(ls >> u)) continue;
    std::string rest;
    if (!(ls >> v) || (ls >> rest) || u < 0 || v < 0) {
      throw Error(ErrorKind::parse, "edge list line " + std::to_string(line_no) +
                                        ": expected two non-negative integers");
    }
    if (u == v) {
      throw Error(ErrorKind::validation,
                  "edge list line " + std::to_string(line_no) + ": self-loop");
    }
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    n = std::max({n, static_cast<std::size_t>(u) + 1, static_cast<std::size_t>(v) + 1});
  }
  if (n == 0) throw Error(ErrorKind::parse, "edge list contains no edges");
  return ColoredGraph(n, edges, std::vector<Color>(n, 0), std::move(id));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads a JSON dataset, or a single-graph edge list when the file does not
/// end in ".json".
inline GraphDataset load_dataset(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".json") {
    try {
      return parse_dataset_json(text);
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": " + e.what());
    }
  }
  std::istringstream in(text);
  GraphDataset d;
  d.graphs.push_back(parse_edge_list(in, path.stem().string()));
  return d;
}

inline void save_dataset(const GraphDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::parse, "cannot write '" + path.string() + "'");
  out << to_json(d).dump(1) << '\n';
}

}  // namespace canon_gnn
