#ifndef TAGAD_INGEST_HPP
#define TAGAD_INGEST_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagad/embedding.hpp"
#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/util.hpp"

namespace tagad {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Compact one-line JSON; invalid UTF-8 is replaced rather than rejected.
inline std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

// ---------------------------------------------------------------------------
// Anomaly manifest

enum class AnomalyKind {
  kLlmContextual,
  kGlobalContextual,
  kTextPerturbation,
  kStructural,
};

inline constexpr AnomalyKind kAllKinds[] = {
    AnomalyKind::kLlmContextual, AnomalyKind::kGlobalContextual,
    AnomalyKind::kTextPerturbation, AnomalyKind::kStructural};

inline std::string_view kind_name(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kLlmContextual: return "llm_contextual";
    case AnomalyKind::kGlobalContextual: return "global_contextual";
    case AnomalyKind::kTextPerturbation: return "text_perturbation";
    case AnomalyKind::kStructural: return "structural";
  }
  return "?";
}

inline AnomalyKind parse_kind(std::string_view name) {
  for (AnomalyKind k : kAllKinds) {
    if (kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown anomaly kind '" + std::string(name) + "'");
}

struct AnomalyRecord {
  NodeId node = 0;
  AnomalyKind kind = AnomalyKind::kLlmContextual;
  std::optional<std::string> original_text;
  std::optional<Label> target_label;  // llm_contextual only
  std::optional<int> clique_id;       // structural only

  bool operator==(const AnomalyRecord&) const = default;
};

struct AnomalyManifest {
  std::vector<AnomalyRecord> records;  // sorted by node id
  std::uint64_t seed = 0;
  std::map<std::string, double> rates;  // kind name -> realized fraction

  bool operator==(const AnomalyManifest&) const = default;

  void canonicalize() {
    std::sort(records.begin(), records.end(),
              [](const AnomalyRecord& a, const AnomalyRecord& b) {
                return a.node < b.node;
              });
  }

  std::set<NodeId> anomalous_ids() const {
    std::set<NodeId> ids;
    for (const auto& r : records) ids.insert(r.node);
    return ids;
  }

  std::map<NodeId, AnomalyKind> kinds_by_node() const {
    std::map<NodeId, AnomalyKind> out;
    for (const auto& r : records) out.emplace(r.node, r.kind);
    return out;
  }

  std::size_t count(AnomalyKind kind) const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.kind == kind;
    return n;
  }
};

inline void validate_manifest(const AnomalyManifest& manifest) {
  std::set<NodeId> seen;
  for (const auto& r : manifest.records) {
    const std::string where = "manifest record for node " +
                              std::to_string(r.node);
    if (!seen.insert(r.node).second) {
      throw Error(ErrorCode::kInvalidArgument, where + " is duplicated");
    }
    if (r.target_label.has_value() != (r.kind == AnomalyKind::kLlmContextual)) {
      throw Error(ErrorCode::kInvalidArgument,
                  where + ": target_label must be present iff llm_contextual");
    }
    if (r.clique_id.has_value() != (r.kind == AnomalyKind::kStructural)) {
      throw Error(ErrorCode::kInvalidArgument,
                  where + ": clique_id must be present iff structural");
    }
  }
  for (const auto& [kind, rate] : manifest.rates) {
    parse_kind(kind);
    if (!(rate > 0.0 && rate <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "rate for " + kind + " outside (0,1]");
    }
  }
}

inline json record_to_json(const AnomalyRecord& r) {
  json j{{"node", r.node}, {"kind", kind_name(r.kind)}};
  if (r.original_text) j["original_text"] = *r.original_text;
  if (r.target_label) j["target_label"] = *r.target_label;
  if (r.clique_id) j["clique_id"] = *r.clique_id;
  return j;
}

inline std::string manifest_to_string(AnomalyManifest manifest) {
  manifest.canonicalize();
  json header{{"seed", manifest.seed}, {"rates", manifest.rates}};
  std::string out = dump_line(header) + "\n";
  for (const auto& r : manifest.records) out += dump_line(record_to_json(r)) + "\n";
  return out;
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& file, std::size_t line,
                                    const std::string& reason) {
  throw Error(ErrorCode::kParseError,
              file + " line " + std::to_string(line) + ": " + reason);
}

// Runs fn(json, line_no) for every non-blank line of a one-object-per-line
// file.
template <typename Fn>
void for_each_json_line(std::string_view content, const std::string& file,
                        Fn&& fn) {
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      parse_fail(file, line_no, "not a JSON object");
    }
    try {
      fn(j, line_no);
    } catch (const json::exception& e) {
      parse_fail(file, line_no, e.what());
    }
  }
}

}  // namespace detail

inline AnomalyManifest parse_manifest(std::string_view content,
                                      const std::string& file = "manifest") {
  AnomalyManifest m;
  bool header = false;
  detail::for_each_json_line(content, file, [&](const json& j,
                                                std::size_t line) {
    if (!header) {
      if (!j.contains("seed")) detail::parse_fail(file, line, "missing header");
      m.seed = j.at("seed").get<std::uint64_t>();
      m.rates = j.value("rates", std::map<std::string, double>{});
      header = true;
      return;
    }
    AnomalyRecord r;
    r.node = j.at("node").get<NodeId>();
    r.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("original_text")) {
      r.original_text = j["original_text"].get<std::string>();
    }
    if (j.contains("target_label")) {
      r.target_label = j["target_label"].get<Label>();
    }
    if (j.contains("clique_id")) r.clique_id = j["clique_id"].get<int>();
    m.records.push_back(std::move(r));
  });
  if (!header) detail::parse_fail(file, 1, "empty manifest file");
  validate_manifest(m);
  m.canonicalize();
  return m;
}

inline AnomalyManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), path.string());
}

inline void save_manifest(const AnomalyManifest& manifest,
                          const fs::path& path) {
  validate_manifest(manifest);
  write_file(path, manifest_to_string(manifest));
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetPaths {
  fs::path nodes;
  fs::path edges;
  fs::path labels;

  static DatasetPaths in(const fs::path& dir) {
    return {dir / "nodes.jsonl", dir / "edges.jsonl", dir / "labels.jsonl"};
  }
};

struct LoadReport {
  BuildReport build;
  std::size_t edge_lines = 0;
};

inline TagGraph load_dataset(const DatasetPaths& paths,
                             LoadReport* report = nullptr) {
  std::vector<TagNode> nodes;
  std::set<NodeId> ids;
  const std::string nodes_file = paths.nodes.string();
  detail::for_each_json_line(
      read_file(paths.nodes), nodes_file,
      [&](const json& j, std::size_t line) {
        TagNode n;
        n.id = j.at("id").get<NodeId>();
        n.label = j.at("label").get<Label>();
        n.text = j.at("text").get<std::string>();
        if (n.id < 0) detail::parse_fail(nodes_file, line, "negative id");
        if (!ids.insert(n.id).second) {
          detail::parse_fail(nodes_file, line,
                             "duplicate node id " + std::to_string(n.id));
        }
        nodes.push_back(std::move(n));
      });

  std::vector<std::pair<NodeId, NodeId>> edges;
  const std::string edges_file = paths.edges.string();
  detail::for_each_json_line(
      read_file(paths.edges), edges_file,
      [&](const json& j, std::size_t line) {
        const NodeId u = j.at("src").get<NodeId>();
        const NodeId v = j.at("dst").get<NodeId>();
        if (!ids.count(u) || !ids.count(v)) {
          detail::parse_fail(edges_file, line, "unknown endpoint");
        }
        edges.emplace_back(u, v);
      });

  std::map<Label, std::string> names;
  const std::string labels_file = paths.labels.string();
  detail::for_each_json_line(
      read_file(paths.labels), labels_file,
      [&](const json& j, std::size_t line) {
        const Label label = j.at("label").get<Label>();
        if (!names.emplace(label, j.at("name").get<std::string>()).second) {
          detail::parse_fail(labels_file, line,
                             "duplicate label " + std::to_string(label));
        }
      });
  for (const auto& n : nodes) {
    if (!names.count(n.label)) {
      throw Error(ErrorCode::kMissingLabelName,
                  "label " + std::to_string(n.label) + " of node " +
                      std::to_string(n.id) + " has no name");
    }
  }

  LoadReport local;
  local.edge_lines = edges.size();
  TagGraph g = build_graph(std::move(nodes), edges, &local.build);
  g.set_label_names(std::move(names));
  if (report != nullptr) *report = local;
  return g;
}

inline std::string nodes_to_string(const TagGraph& graph) {
  std::string out;
  for (const auto& n : graph.nodes()) {
    out += dump_line({{"id", n.id}, {"label", n.label}, {"text", n.text}});
    out += '\n';
  }
  return out;
}

inline std::string edges_to_string(const TagGraph& graph) {
  std::string out;
  for (const auto& [u, v] : graph.edges()) {
    out += dump_line({{"src", u}, {"dst", v}});
    out += '\n';
  }
  return out;
}

inline std::string labels_to_string(const TagGraph& graph) {
  std::string out;
  for (const auto& [label, name] : graph.label_names()) {
    out += dump_line({{"label", label}, {"name", name}});
    out += '\n';
  }
  return out;
}

inline void save_dataset(const TagGraph& graph, const fs::path& dir) {
  const DatasetPaths paths = DatasetPaths::in(dir);
  write_file(paths.nodes, nodes_to_string(graph));
  write_file(paths.edges, edges_to_string(graph));
  write_file(paths.labels, labels_to_string(graph));
}

struct SaveSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t records = 0;
  fs::path manifest_path;
};

// Writes nodes/edges/labels plus manifest.jsonl. Everything is validated
// before the first byte is written.
inline SaveSummary save_injected_dataset(const TagGraph& graph,
                                         const AnomalyManifest& manifest,
                                         const fs::path& out_dir) {
  validate_manifest(manifest);
  for (const auto& r : manifest.records) {
    if (!graph.contains(r.node)) {
      throw Error(ErrorCode::kUnknownNode,
                  "manifest references absent node " + std::to_string(r.node));
    }
  }
  const std::string nodes = nodes_to_string(graph);
  const std::string edges = edges_to_string(graph);
  const std::string labels = labels_to_string(graph);
  const std::string man = manifest_to_string(manifest);

  const DatasetPaths paths = DatasetPaths::in(out_dir);
  write_file(paths.nodes, nodes);
  write_file(paths.edges, edges);
  write_file(paths.labels, labels);
  write_file(out_dir / "manifest.jsonl", man);
  return {graph.size(), graph.edge_count(), manifest.records.size(),
          out_dir / "manifest.jsonl"};
}

// ---------------------------------------------------------------------------
// Outlier pools: one document per line, newlines escaped.

struct OutlierPool {
  std::vector<std::string> texts;
  std::string source_name;
};

inline OutlierPool parse_outlier_pool(std::string_view content,
                                      std::string source_name) {
  OutlierPool pool;
  pool.source_name = std::move(source_name);
  auto lines = split_lines(content);
  // A single trailing newline does not start a record.
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) {
      throw Error(ErrorCode::kParseError,
                  pool.source_name + " record " + std::to_string(i + 1) +
                      " is blank");
    }
    pool.texts.push_back(unescape_line(lines[i]));
  }
  if (pool.texts.empty()) {
    throw Error(ErrorCode::kEmptyPool, pool.source_name + " has no records");
  }
  return pool;
}

inline OutlierPool load_outlier_pool(const fs::path& path) {
  return parse_outlier_pool(read_file(path), path.stem().string());
}

inline std::string outlier_pool_to_string(const OutlierPool& pool) {
  std::string out;
  for (const auto& t : pool.texts) out += escape_line(t) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Baseline bridge export:
//   embeddings.txt      dim=<d>, then "<id> v1 ... vd"
//   edges.csv           "<src>,<dst>", each undirected edge once, src < dst
//   anomaly_labels.csv  "<id>,<flag>" with flag 1 for manifest nodes

struct ExportSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t anomalies = 0;
  int dim = 0;
};

inline ExportSummary export_for_baselines(const TagGraph& graph,
                                          const EmbeddingTable& embeddings,
                                          const AnomalyManifest& manifest,
                                          const fs::path& out_dir) {
  for (const auto& n : graph.nodes()) embeddings.at(n.id);
  const auto anomalous = manifest.anomalous_ids();
  for (NodeId id : anomalous) {
    if (!graph.contains(id)) {
      throw Error(ErrorCode::kUnknownNode,
                  "manifest references absent node " + std::to_string(id));
    }
  }

  std::string emb = "dim=" + std::to_string(embeddings.dim) + "\n";
  std::string labels;
  for (const auto& n : graph.nodes()) {
    emb += format_vector_row(std::to_string(n.id), embeddings.at(n.id));
    labels += std::to_string(n.id) + "," + (anomalous.count(n.id) ? "1" : "0") +
              "\n";
  }
  std::string edges;
  for (const auto& [u, v] : graph.edges()) {
    edges += std::to_string(u) + "," + std::to_string(v) + "\n";
  }
  write_file(out_dir / "embeddings.txt", emb);
  write_file(out_dir / "edges.csv", edges);
  write_file(out_dir / "anomaly_labels.csv", labels);
  return {graph.size(), graph.edge_count(), anomalous.size(), embeddings.dim};
}

inline NodeId parse_node_id(std::string_view s, const std::string& file,
                            std::size_t line) {
  NodeId id = 0;
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
  if (ec != std::errc() || ptr != s.data() + s.size() || id < 0) {
    detail::parse_fail(file, line, "bad node id '" + std::string(s) + "'");
  }
  return id;
}

inline EmbeddingTable load_embeddings_export(const fs::path& path) {
  VectorFile file = parse_vector_file(read_file(path));
  EmbeddingTable table;
  table.dim = file.dim;
  table.provider_tag = file.provider.value_or("export");
  std::size_t line = 1;
  for (auto& [key, v] : file.rows) {
    ++line;
    const NodeId id = parse_node_id(key, path.string(), line);
    if (!table.vectors.emplace(id, std::move(v)).second) {
      detail::parse_fail(path.string(), line,
                         "duplicate node id " + std::to_string(id));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Score files. Two shapes are accepted:
//   detector scores: node_id,score,parse_ok,attempts,raw_hash
//   baseline scores: "# method=<m> seed=<s> version=<v>" then node_id,score

struct ScoredNode {
  NodeId id = 0;
  double score = 0.0;
  bool parse_ok = true;
  int attempts = 1;
  std::string raw_hash;
};

struct ScoreFile {
  std::map<std::string, std::string> header;  // key=value pairs after '#'
  std::vector<ScoredNode> rows;
};

inline ScoreFile parse_score_file(std::string_view content,
                                  const std::string& file = "scores") {
  ScoreFile out;
  std::set<NodeId> seen;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      for (const auto& field : tokenize(line.substr(1))) {
        const auto eq = field.find('=');
        if (eq != std::string::npos) {
          out.header[field.substr(0, eq)] = field.substr(eq + 1);
        }
      }
      continue;
    }
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cols.emplace_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols.size() != 2 && cols.size() != 5) {
      detail::parse_fail(file, line_no, "expected 2 or 5 columns");
    }
    ScoredNode row;
    row.id = parse_node_id(cols[0], file, line_no);
    row.score = parse_real(cols[1], line_no);
    if (cols.size() == 5) {
      if (cols[2] != "0" && cols[2] != "1") {
        detail::parse_fail(file, line_no, "parse_ok must be 0 or 1");
      }
      row.parse_ok = cols[2] == "1";
      row.attempts = static_cast<int>(parse_real(cols[3], line_no));
      row.raw_hash = cols[4];
    }
    if (!seen.insert(row.id).second) {
      detail::parse_fail(file, line_no,
                         "duplicate node id " + std::to_string(row.id));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline ScoreFile load_score_file(const fs::path& path) {
  return parse_score_file(read_file(path), path.string());
}

}  // namespace tagad

#endif  // TAGAD_INGEST_HPP
