#ifndef TAGAD_ENCODERS_HPP
#define TAGAD_ENCODERS_HPP

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/rng.hpp"
#include "tagad/util.hpp"

namespace tagad {

enum class PromptMode { kContextual, kStructural, kMixed };

inline std::string_view mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::kContextual: return "contextual";
    case PromptMode::kStructural: return "structural";
    case PromptMode::kMixed: return "mixed";
  }
  return "?";
}

inline PromptMode parse_mode(std::string_view s) {
  if (s == "contextual") return PromptMode::kContextual;
  if (s == "structural") return PromptMode::kStructural;
  if (s == "mixed") return PromptMode::kMixed;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown prompt mode '" + std::string(s) + "'");
}

// Caps applied when verbalizing a node. The factory functions carry the
// published settings for each prompt template.
struct EncoderConfig {
  PromptMode mode = PromptMode::kContextual;
  int m_token = 1000;     // tokens kept per text
  int k_neighbors = 20;   // 1-hop neighbors kept
  int m_node = 100;       // subgraph nodes kept
  int m_incident = 100;   // incident relations listed per node

  static EncoderConfig contextual() {
    return {PromptMode::kContextual, 1000, 20, 100, 100};
  }
  static EncoderConfig structural() {
    return {PromptMode::kStructural, 1000, 20, 100, 100};
  }
  static EncoderConfig mixed() {
    return {PromptMode::kMixed, 1000, 10, 50, 50};
  }
  static EncoderConfig for_mode(PromptMode mode) {
    switch (mode) {
      case PromptMode::kContextual: return contextual();
      case PromptMode::kStructural: return structural();
      case PromptMode::kMixed: return mixed();
    }
    return contextual();
  }

  void validate() const {
    if (m_token < 1 || k_neighbors < 1 || m_node < 1 || m_incident < 1) {
      throw Error(ErrorCode::kInvalidArgument, "encoder caps must be >= 1");
    }
  }
};

struct TruncatedText {
  std::string text;
  bool truncated = false;
};

inline TruncatedText truncate_with_flag(std::string_view text, int m_token) {
  if (m_token < 1) throw Error(ErrorCode::kInvalidArgument, "m_token < 1");
  auto tokens = tokenize(text);
  const bool cut = tokens.size() > static_cast<std::size_t>(m_token);
  if (cut) tokens.resize(static_cast<std::size_t>(m_token));
  return {join(tokens, " "), cut};
}

// First m_token whitespace tokens joined by single spaces.
inline std::string truncate_tokens(std::string_view text, int m_token) {
  return truncate_with_flag(text, m_token).text;
}

struct NeighborText {
  int index = 0;  // 1-based position in the prompt
  NodeId id = 0;
  std::string text;
  bool truncated = false;

  bool operator==(const NeighborText&) const = default;
};

struct ContextBlock {
  NodeId node = 0;
  std::string target_text;
  bool target_truncated = false;
  std::vector<NeighborText> neighbors;

  bool operator==(const ContextBlock&) const = default;
};

inline ContextBlock encode_contextual(const TagGraph& graph, NodeId node,
                                      const EncoderConfig& config, Rng& rng) {
  config.validate();
  ContextBlock block;
  block.node = node;
  auto target = truncate_with_flag(graph.node(node).text, config.m_token);
  block.target_text = std::move(target.text);
  block.target_truncated = target.truncated;

  std::vector<NodeId> chosen = graph.neighbors(node);
  const auto k = static_cast<std::size_t>(config.k_neighbors);
  if (chosen.size() > k) {
    rng.partial_shuffle(chosen, k);
    chosen.resize(k);
  }
  int index = 0;
  for (NodeId id : chosen) {
    auto t = truncate_with_flag(graph.node(id).text, config.m_token);
    block.neighbors.push_back({++index, id, std::move(t.text), t.truncated});
  }
  return block;
}

// Nodes kept for the structural encoding: the BFS prefix of the 2-hop ball,
// target first, at most m_node entries.
inline std::vector<NodeId> structural_node_selection(const TagGraph& graph,
                                                     NodeId node,
                                                     int m_node) {
  std::vector<NodeId> kept;
  for (const auto& [id, d] : bfs_order(graph, node, 2)) {
    if (kept.size() == static_cast<std::size_t>(m_node)) break;
    kept.push_back(id);
  }
  return kept;
}

inline std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(ids[i]);
  }
  return out;
}

// Incident-style verbalization of the target's 2-hop subgraph:
//   The target node is T. The subgraph has N nodes: a, b, c.
//   Node a is connected to nodes b, c. ...
// Roster and sentences are in ascending id order; each incident list holds
// the m_incident smallest neighbor ids inside the retained node set.
inline std::string encode_structural(const TagGraph& graph, NodeId node,
                                     const EncoderConfig& config) {
  config.validate();
  const auto kept = structural_node_selection(graph, node, config.m_node);
  const std::set<NodeId> members(kept.begin(), kept.end());
  const std::vector<NodeId> roster(members.begin(), members.end());

  std::string out = "The target node is " + std::to_string(node) + ". ";
  out += "The subgraph has " + std::to_string(roster.size()) +
         (roster.size() == 1 ? " node: " : " nodes: ") + join_ids(roster) +
         ".";
  for (NodeId id : roster) {
    std::vector<NodeId> incident;
    for (NodeId v : graph.neighbors(id)) {
      if (incident.size() == static_cast<std::size_t>(config.m_incident)) break;
      if (members.count(v)) incident.push_back(v);
    }
    out += " Node " + std::to_string(id);
    if (incident.empty()) {
      out += " is not connected to any other nodes.";
    } else {
      out += " is connected to nodes " + join_ids(incident) + ".";
    }
  }
  return out;
}

struct MixedEncoding {
  ContextBlock context;
  std::string structure;

  bool operator==(const MixedEncoding&) const = default;
};

inline MixedEncoding encode_mixed(const TagGraph& graph, NodeId node,
                                  const EncoderConfig& config, Rng& rng) {
  MixedEncoding out;
  out.context = encode_contextual(graph, node, config, rng);
  out.structure = encode_structural(graph, node, config);
  return out;
}

}  // namespace tagad

#endif  // TAGAD_ENCODERS_HPP
