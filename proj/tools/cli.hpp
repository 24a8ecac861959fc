#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "canon_gnn/canon_gnn.hpp"

namespace canon_gnn::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kDomainError = 1, kStrictFailure = 2, kUsageError = 64 };

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::vector<std::string> flag_names(const CLI::App* app) {
  std::vector<std::string> names;
  for (const CLI::App* a = app; a != nullptr; a = a->get_parent()) {
    for (const auto* opt : a->get_options()) {
      for (const auto& l : opt->get_lnames()) names.push_back("--" + l);
    }
  }
  return names;
}

/// "--lr" style suggestion for the first unexpected argument, or empty.
inline std::string suggest(const CLI::App& root, const std::vector<std::string>& args) {
  const CLI::App* scope = &root;
  for (const auto* sub : root.get_subcommands()) scope = sub;
  for (const auto& arg : args) {
    if (arg.rfind("--", 0) != 0) continue;
    const std::string name = arg.substr(0, arg.find('='));
    const auto known = flag_names(scope);
    if (std::find(known.begin(), known.end(), name) != known.end()) continue;
    std::string best;
    std::size_t best_d = 3;
    for (const auto& cand : known) {
      const std::size_t d = edit_distance(name, cand);
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
    if (!best.empty()) return "did you mean '" + best + "'?";
  }
  if (scope == &root) {
    for (const auto& arg : args) {
      for (const auto* sub : root.get_subcommands({})) {
        if (edit_distance(arg, sub->get_name()) <= 2) {
          return "did you mean '" + sub->get_name() + "'?";
        }
      }
    }
  }
  return {};
}

/// Effective option values of one command, as given on the command line, in
/// the config file, or by default. Values are echoed verbatim as strings.
inline json effective_options(const CLI::App* app) {
  json cfg = json::object();
  for (const auto* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "version") continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0 && opt->as<bool>();
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      if (r.size() == 1) {
        cfg[name] = r.front();
      } else {
        cfg[name] = r;
      }
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    } else {
      cfg[name] = nullptr;
    }
  }
  return cfg;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::parse, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::parse, "failed writing '" + path + "'");
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline PeKind parse_pe(const std::string& s) {
  if (s == "none") return PeKind::none;
  if (s == "gc") return PeKind::gc;
  return PeKind::ugc;
}

inline Readout parse_readout(const std::string& s) {
  if (s == "sum") return Readout::sum;
  if (s == "mean") return Readout::mean;
  return Readout::ugc_weighted;
}

inline json alignment_json(const AlignmentResult& a) {
  return {{"distance", a.distance},
          {"exact", a.exact},
          {"edge_mismatches", a.edge_mismatches},
          {"color_mismatches", a.color_mismatches},
          {"nodes_explored", a.nodes_explored},
          {"permutation", a.permutation.mapping()}};
}

inline json witness_json(const UgcWitness& w) {
  if (w.kind == UgcWitness::Kind::duplicate_label) {
    return {{"kind", "duplicate_label"},
            {"graph_id", w.graph_id},
            {"node_a", w.node_a},
            {"node_b", w.node_b},
            {"label", w.shared_label}};
  }
  return {{"kind", "inconsistent_edge"}, {"graph1_id", w.graph1_id}, {"graph2_id", w.graph2_id},
          {"label_u", w.label_u},        {"label_v", w.label_v},     {"present_in", w.present_in},
          {"absent_in", w.absent_in}};
}

inline json ugc_report_json(const UgcValidationReport& r) {
  json ws = json::array();
  for (const auto& w : r.witnesses) ws.push_back(witness_json(w));
  return {{"valid", r.valid()},
          {"injective_ok", r.injective_ok},
          {"edge_consistent_ok", r.edge_consistent_ok},
          {"witnesses", std::move(ws)}};
}

inline json matrix_json(const FeatureTensor& x) {
  json rows = json::array();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double v = x(r, c);
      if (v == std::floor(v) && std::abs(v) < 1e15) {
        row.push_back(static_cast<long long>(v));
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace detail

/// Parsed state shared by the subcommand handlers.
struct Options {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool timing = false;

  std::string input;
  std::string out;
  std::string report;
  std::string graph_id;
  std::size_t max_nodes = CanonOptions{}.max_nodes;

  std::string mode = "gc";
  bool compact = false;
  bool strict = false;

  std::vector<std::string> pair;
  bool exact = false;
  bool heuristic = false;
  std::string pe = "none";

  std::size_t csl_n = 41;
  std::vector<std::size_t> skips = default_csl_skips();
  std::size_t copies = 15;

  std::string pair_kind = "hard";
  std::vector<std::size_t> ms{3, 4, 5, 6, 7, 8, 9, 10};

  std::string readout = "mean";
  std::size_t layers = 3;
  std::size_t dim = 32;
  double lr = 1e-2;
  std::size_t epochs = 300;
  std::size_t patience = 10;
  double clip = 1.0;
  std::size_t folds = 5;
  std::optional<std::size_t> fold;
  std::vector<double> epsilon;
  bool w_diag = false;
  std::string checkpoint;

  std::vector<std::size_t> sizes{6, 8, 10, 12};
  std::size_t trials = 20;
  std::uint64_t model_seed = 0;
  std::string csv;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Graph canonization and universal canonization toolkit", "canon-gnn"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "TOML file with option values; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", o_.seed, "Seed for every randomized step")->capture_default_str();
    app.add_option("--threads", o_.threads, "Worker threads for parallel sections")
        ->envname("CANON_GNN_THREADS")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--timing", o_.timing, "Include wall-clock times in reports");

    add_canonize(app);
    add_encode(app);
    add_validate(app);
    add_distance(app);
    add_isotest(app);
    add_gen_csl(app);
    add_gen_pairs(app);
    add_train(app);
    add_probe(app);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      app.exit(e, out_, err_);
      return kOk;
    } catch (const CLI::CallForAllHelp& e) {
      app.exit(e, out_, err_);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out_ << kVersion << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "usage error: " << e.what() << '\n';
      if (auto s = detail::suggest(app, args); !s.empty()) err_ << s << '\n';
      err_ << "run 'canon-gnn --help' for usage\n";
      return kUsageError;
    }

    CLI::App* sub = app.get_subcommands().front();
    meta_ = json{{"tool", "canon-gnn"},
                 {"version", kVersion},
                 {"command", sub->get_name()},
                 {"seed", o_.seed},
                 {"config", json{{"global", detail::effective_options(&app)},
                                 {sub->get_name(), detail::effective_options(sub)}}}};
    meta_["config"]["global"].erase("threads");
    try {
      return dispatch(sub->get_name());
    } catch (const Error& e) {
      err_ << e.what() << '\n';
      return kDomainError;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kDomainError;
    }
  }

 private:
  void add_input(CLI::App* s) {
    s->add_option("--input", o_.input, "Dataset JSON or edge-list file")->required()->check(CLI::ExistingFile);
  }

  void add_canonize(CLI::App& app) {
    auto* s = app.add_subcommand("canonize", "Canonical node order and certificate of each graph");
    add_input(s);
    s->add_option("--graph-id", o_.graph_id, "Only this graph");
    s->add_option("--out", o_.out, "Output JSON")->required();
    s->add_option("--max-nodes", o_.max_nodes, "Largest graph accepted")->capture_default_str();
  }

  void add_encode(CLI::App& app) {
    auto* s = app.add_subcommand("encode", "Positional encoding matrices (GC or UGC)");
    add_input(s);
    s->add_option("--mode", o_.mode, "gc or ugc")->check(CLI::IsMember({"gc", "ugc"}))->capture_default_str();
    s->add_option("--out", o_.out, "Output JSON")->required();
    s->add_flag("--compact", o_.compact, "Width from the data actually present instead of the full universe");
    s->add_option("--max-nodes", o_.max_nodes, "Largest graph accepted in gc mode")->capture_default_str();
  }

  void add_validate(CLI::App& app) {
    auto* s = app.add_subcommand("validate-ugc", "Check that node labels define a universal canonization");
    add_input(s);
    s->add_option("--report", o_.report, "Write the validation report here");
    s->add_flag("--strict", o_.strict, "Exit with status 2 when witnesses are found");
  }

  void add_distance(CLI::App& app) {
    auto* s = app.add_subcommand("distance", "Alignment distance between two graphs");
    add_input(s);
    s->add_option("--pair", o_.pair, "Two graph ids")->required()->expected(2);
    auto* ex = s->add_flag("--exact", o_.exact, "Branch and bound (n <= 10)");
    s->add_flag("--heuristic", o_.heuristic, "Greedy matching with swap search")->excludes(ex);
  }

  void add_isotest(CLI::App& app) {
    auto* s = app.add_subcommand("isotest", "Isomorphism and 1-WL test of two graphs");
    add_input(s);
    s->add_option("--pair", o_.pair, "Two graph ids")->required()->expected(2);
    s->add_option("--pe", o_.pe, "Positional ranks folded into 1-WL: none, gc or ugc")
        ->check(CLI::IsMember({"none", "gc", "ugc"}))
        ->capture_default_str();
    s->add_option("--max-nodes", o_.max_nodes, "Largest graph canonized")->capture_default_str();
  }

  void add_gen_csl(CLI::App& app) {
    auto* s = app.add_subcommand("gen-csl", "Circulant skip-link classification dataset");
    s->add_option("--n", o_.csl_n, "Nodes per graph")->capture_default_str();
    s->add_option("--skips", o_.skips, "Comma-separated skip lengths, one class each")
        ->delimiter(',')
        ->capture_default_str();
    s->add_option("--copies", o_.copies, "Permuted copies per class")->capture_default_str();
    s->add_option("--out", o_.out, "Output dataset JSON")->required();
  }

  void add_gen_pairs(CLI::App& app) {
    auto* s = app.add_subcommand("gen-pairs", "1-WL-hard pairs or recolor counterexample pairs");
    s->add_option("--kind", o_.pair_kind, "hard or counterexample")
        ->check(CLI::IsMember({"hard", "counterexample"}))
        ->capture_default_str();
    s->add_option("--m", o_.ms, "Cycle lengths m for hard pairs (C_2m vs C_m + C_m)")
        ->delimiter(',')
        ->capture_default_str();
    s->add_option("--sizes", o_.sizes, "Node counts for counterexample pairs")
        ->delimiter(',')
        ->capture_default_str();
    s->add_option("--trials", o_.trials, "Counterexample pairs per size")->capture_default_str();
    s->add_option("--out", o_.out, "Output dataset JSON")->required();
  }

  void add_train(CLI::App& app) {
    auto* s = app.add_subcommand("train", "Train and evaluate the message-passing classifier");
    add_input(s);
    s->add_option("--pe", o_.pe, "none, gc or ugc")->check(CLI::IsMember({"none", "gc", "ugc"}))->capture_default_str();
    s->add_option("--readout", o_.readout, "sum, mean or ugc")
        ->check(CLI::IsMember({"sum", "mean", "ugc"}))
        ->capture_default_str();
    s->add_option("--layers", o_.layers)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--dim", o_.dim)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--lr", o_.lr)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--epochs", o_.epochs)->capture_default_str();
    s->add_option("--patience", o_.patience)->capture_default_str();
    s->add_option("--clip", o_.clip, "Gradient norm cap, 0 disables")->capture_default_str();
    s->add_option("--epsilon", o_.epsilon, "Per-layer epsilon values")->delimiter(',');
    s->add_flag("--w-diag", o_.w_diag, "Diagonal readout matrices for the ugc readout");
    s->add_option("--folds", o_.folds, "Stratified folds")->check(CLI::Range(2, 100))->capture_default_str();
    s->add_option("--fold", o_.fold, "Run only this fold (0-based)");
    s->add_option("--checkpoint", o_.checkpoint, "Write the fitted model here (needs --fold)");
    s->add_option("--report", o_.report, "Write the training report here");
  }

  void add_probe(CLI::App& app) {
    auto* s = app.add_subcommand("probe-stability", "GC versus UGC stability sweep on recolor counterexamples");
    s->add_option("--sizes", o_.sizes)->delimiter(',')->capture_default_str();
    s->add_option("--trials", o_.trials)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--layers", o_.layers, "Probe model depth")->check(CLI::PositiveNumber);
    s->add_option("--dim", o_.dim, "Probe model width")->check(CLI::PositiveNumber);
    s->add_option("--model-seed", o_.model_seed, "Seed of the fixed probe model")->capture_default_str();
    s->add_option("--report", o_.report, "Write the JSON report here");
    s->add_option("--csv", o_.csv, "Write one CSV row per trial here");
    layers_opt_ = s->get_option("--layers");
    dim_opt_ = s->get_option("--dim");
  }

  int dispatch(const std::string& cmd) {
    if (cmd == "canonize") return canonize();
    if (cmd == "encode") return encode();
    if (cmd == "validate-ugc") return validate();
    if (cmd == "distance") return distance();
    if (cmd == "isotest") return isotest();
    if (cmd == "gen-csl") return gen_csl();
    if (cmd == "gen-pairs") return gen_pairs();
    if (cmd == "train") return train_cmd();
    return probe();
  }

  GraphDataset load() const { return load_dataset(o_.input); }

  std::pair<const ColoredGraph*, const ColoredGraph*> pair_of(const GraphDataset& d) const {
    return {&d.at(o_.pair[0]), &d.at(o_.pair[1])};
  }

  int canonize() {
    const GraphDataset d = load();
    CanonOptions opts;
    opts.max_nodes = o_.max_nodes;
    json graphs = json::array();
    for (const auto& g : d.graphs) {
      if (!o_.graph_id.empty() && g.id() != o_.graph_id) continue;
      const auto r = canonical_form(g, opts);
      graphs.push_back({{"id", g.id()},
                        {"order", r.colouring.order()},
                        {"certificate_hex", r.certificate.hex()}});
    }
    if (!o_.graph_id.empty() && graphs.empty()) {
      throw Error(ErrorKind::configuration, "no graph with id '" + o_.graph_id + "'");
    }
    detail::write_json(o_.out, {{"meta", meta_}, {"graphs", graphs}});
    out_ << "canonized " << graphs.size() << " graph(s)\n";
    return kOk;
  }

  int encode() {
    GraphDataset d = load();
    json graphs = json::array();
    std::size_t width = 0;
    if (o_.mode == "gc") {
      CanonOptions opts;
      opts.max_nodes = o_.max_nodes;
      for (const auto& g : d.graphs) width = std::max(width, g.size());
      for (const auto& g : d.graphs) {
        const std::size_t w = o_.compact ? g.size() : width;
        graphs.push_back({{"id", g.id()}, {"width", w}, {"rows", detail::matrix_json(gc_encoding(g, w, opts))}});
      }
    } else {
      if (o_.compact) d.label_universe.reset();
      const LabelUniverse u = universe_of(d);
      width = u.size();
      for (const auto& g : d.graphs) {
        graphs.push_back({{"id", g.id()}, {"width", width}, {"rows", detail::matrix_json(ugc_encoding(g, u))}});
      }
    }
    detail::write_json(o_.out, {{"meta", meta_}, {"mode", o_.mode}, {"graphs", graphs}});
    out_ << "encoded " << graphs.size() << " graph(s) in " << o_.mode << " mode\n";
    return kOk;
  }

  int validate() {
    const GraphDataset d = load();
    const UgcValidationReport r = validate_ugc(d, universe_of(d));
    json report = detail::ugc_report_json(r);
    report["meta"] = meta_;
    if (!o_.report.empty()) detail::write_json(o_.report, report);
    out_ << "valid: " << (r.valid() ? "true" : "false") << '\n';
    if (!r.valid()) {
      out_ << detail::ugc_report_json(r)["witnesses"].dump(2) << '\n';
      if (o_.strict) return kStrictFailure;
    }
    return kOk;
  }

  int distance() {
    const GraphDataset d = load();
    const auto [g1, g2] = pair_of(d);
    DistanceMode mode = g1->size() <= kExactDistanceLimit ? DistanceMode::exact : DistanceMode::heuristic;
    if (o_.exact) mode = DistanceMode::exact;
    if (o_.heuristic) mode = DistanceMode::heuristic;
    out_ << detail::alignment_json(graph_distance(*g1, *g2, mode)).dump(2) << '\n';
    return kOk;
  }

  int isotest() {
    GraphDataset d = load();
    const auto [g1, g2] = pair_of(d);
    CanonOptions opts;
    opts.max_nodes = o_.max_nodes;
    const bool iso = isomorphic(*g1, *g2, opts);
    out_ << "isomorphic: " << (iso ? "true" : "false") << '\n';
    if (g1->size() == g2->size()) {
      const PeKind pe = detail::parse_pe(o_.pe);
      std::optional<LabelUniverse> u;
      if (pe == PeKind::ugc) u = universe_of(d);
      const WlVerdict v = wl_test(*g1, *g2, pe, u ? &*u : nullptr, opts);
      out_ << "wl_distinguishable (pe=" << o_.pe << "): " << (v.distinguishable ? "true" : "false")
           << '\n';
      out_ << "wl_rounds: " << v.rounds << '\n';
    }
    return kOk;
  }

  int gen_csl() {
    GraphDataset d = csl_benchmark(o_.csl_n, o_.skips, o_.copies, o_.seed, o_.threads);
    save_dataset(d, o_.out);
    out_ << "wrote " << d.graphs.size() << " CSL graphs\n";
    return kOk;
  }

  int gen_pairs() {
    GraphDataset d;
    if (o_.pair_kind == "hard") {
      for (auto m : o_.ms) {
        auto [a, b] = gen_wl_hard_pair(m);
        d.graphs.push_back(std::move(a));
        d.graphs.push_back(std::move(b));
      }
    } else {
      for (auto n : o_.sizes) {
        for (std::size_t t = 0; t < o_.trials; ++t) {
          auto pair = gen_counterexample(n, Rng::stream(o_.seed, {n, t}).next());
          const std::string tag = "_t" + std::to_string(t);
          pair.g1.set_id(pair.g1.id() + tag);
          pair.g2.set_id(pair.g2.id() + tag);
          d.graphs.push_back(std::move(pair.g1));
          d.graphs.push_back(std::move(pair.g2));
        }
      }
    }
    save_dataset(d, o_.out);
    out_ << "wrote " << d.graphs.size() / 2 << " pair(s)\n";
    return kOk;
  }

  int train_cmd() {
    const GraphDataset d = load();
    if (!o_.checkpoint.empty() && !o_.fold) {
      throw Error(ErrorKind::configuration, "--checkpoint needs --fold");
    }
    if (o_.fold && *o_.fold >= o_.folds) {
      throw Error(ErrorKind::configuration, "--fold must be below --folds");
    }
    MpnnConfig config;
    config.num_layers = o_.layers;
    config.hidden_dim = o_.dim;
    config.epsilon = o_.epsilon;
    config.readout = detail::parse_readout(o_.readout);
    config.readout_diagonal = o_.w_diag;
    config.seed = o_.seed;
    TrainOptions topts;
    topts.learning_rate = o_.lr;
    topts.max_epochs = o_.epochs;
    topts.patience = o_.patience;
    topts.max_grad_norm = o_.clip;

    const auto splits = stratified_folds(d, o_.folds, o_.seed);
    json folds = json::array();
    std::vector<double> train_acc, test_acc;
    for (std::size_t f = 0; f < splits.size(); ++f) {
      if (o_.fold && *o_.fold != f) continue;
      MpnnModel fitted{MpnnConfig{}};
      const TrainReport r = train(config, d, splits[f], detail::parse_pe(o_.pe), topts, &fitted);
      json epochs = json::array();
      for (const auto& e : r.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"loss", e.loss},
                          {"train_accuracy", e.train_accuracy},
                          {"test_accuracy", e.test_accuracy}});
      }
      json fj{{"fold", f},
              {"train_size", splits[f].train_ids.size()},
              {"test_size", splits[f].test_ids.size()},
              {"epochs", std::move(epochs)},
              {"final_train_accuracy", r.final_train_accuracy},
              {"final_test_accuracy", r.final_test_accuracy},
              {"early_stopped", r.early_stopped},
              {"parameters_digest", r.parameters_digest}};
      if (o_.timing) fj["wall_clock_seconds"] = r.wall_clock_seconds;
      folds.push_back(std::move(fj));
      train_acc.push_back(r.final_train_accuracy);
      test_acc.push_back(r.final_test_accuracy);
      out_ << "fold " << f << ": train " << detail::fixed(r.final_train_accuracy) << ", test "
           << detail::fixed(r.final_test_accuracy) << " after " << r.epochs.size() << " epochs\n";
      if (!o_.checkpoint.empty()) {
        std::ofstream ck(o_.checkpoint, std::ios::binary);
        if (!ck) throw Error(ErrorKind::parse, "cannot write '" + o_.checkpoint + "'");
        save_checkpoint(fitted, ck);
      }
    }
    const auto mean = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    double var = 0.0;
    const double mt = mean(test_acc);
    for (double a : test_acc) var += (a - mt) * (a - mt);
    const double sd = std::sqrt(var / static_cast<double>(test_acc.size()));
    out_ << "mean test accuracy " << detail::fixed(mt) << " +- " << detail::fixed(sd) << '\n';
    if (!o_.report.empty()) {
      detail::write_json(o_.report, {{"meta", meta_},
                                     {"folds", std::move(folds)},
                                     {"summary",
                                      {{"mean_train_accuracy", mean(train_acc)},
                                       {"mean_test_accuracy", mt},
                                       {"std_test_accuracy", sd}}}});
    }
    return kOk;
  }

  int probe() {
    ProbeOptions po;
    po.model_seed = o_.model_seed;
    po.threads = o_.threads;
    if (layers_opt_->count() > 0) po.num_layers = o_.layers;
    if (dim_opt_->count() > 0) po.hidden_dim = o_.dim;
    const ProbeResult r = run_probe(o_.sizes, o_.trials, o_.seed, po);

    json reports = json::array();
    for (const auto& rep : r.reports) {
      reports.push_back({{"n", rep.n},
                         {"trial", rep.trial},
                         {"seed", rep.seed},
                         {"d_graphs", detail::alignment_json(rep.d_graphs)},
                         {"d_source", rep.d_source},
                         {"pe_divergence_gc", rep.pe_divergence_gc},
                         {"pe_divergence_ugc", rep.pe_divergence_ugc},
                         {"embedding_gap_gc", rep.embedding_gap_gc},
                         {"embedding_gap_ugc", rep.embedding_gap_ugc},
                         {"ratio_gc", rep.ratio_gc},
                         {"ratio_ugc", rep.ratio_ugc}});
    }
    json aggs = json::array();
    out_ << "n     max_ratio_gc  max_ratio_ugc  min_div_gc  max_div_ugc\n";
    for (const auto& a : r.aggregates) {
      aggs.push_back({{"n", a.n},
                      {"max_ratio_gc", a.max_ratio_gc},
                      {"max_ratio_ugc", a.max_ratio_ugc},
                      {"min_pe_divergence_gc", a.min_pe_divergence_gc},
                      {"max_pe_divergence_ugc", a.max_pe_divergence_ugc}});
      out_ << std::left << std::setw(6) << a.n << std::setw(14) << detail::fixed(a.max_ratio_gc)
           << std::setw(15) << detail::fixed(a.max_ratio_ugc) << std::setw(12)
           << a.min_pe_divergence_gc << a.max_pe_divergence_ugc << '\n';
    }
    if (!o_.report.empty()) {
      detail::write_json(o_.report, {{"meta", meta_}, {"reports", reports}, {"aggregates", aggs}});
    }
    if (!o_.csv.empty()) {
      std::ostringstream csv;
      csv << std::setprecision(17);
      csv << "n,trial,seed,d,d_source,pe_divergence_gc,pe_divergence_ugc,embedding_gap_gc,"
             "embedding_gap_ugc,ratio_gc,ratio_ugc\n";
      for (const auto& rep : r.reports) {
        csv << rep.n << ',' << rep.trial << ',' << rep.seed << ',' << rep.d_graphs.distance << ','
            << rep.d_source << ',' << rep.pe_divergence_gc << ',' << rep.pe_divergence_ugc << ','
            << rep.embedding_gap_gc << ',' << rep.embedding_gap_ugc << ',' << rep.ratio_gc << ','
            << rep.ratio_ugc << '\n';
      }
      detail::write_text(o_.csv, csv.str());
    }
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  json meta_;
  CLI::Option* layers_opt_ = nullptr;
  CLI::Option* dim_opt_ = nullptr;
};

/// Runs one invocation; args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  return Runner(out, err).run(args);
}

}  // namespace canon_gnn::cli
