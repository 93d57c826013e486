#ifndef TAGAD_GRAPH_HPP
#define TAGAD_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tagad/error.hpp"
#include "tagad/util.hpp"

namespace tagad {

using NodeId = std::int64_t;
using Label = int;

struct TagNode {
  NodeId id = 0;
  std::string text;
  Label label = 0;
  // Set for nodes whose text is empty; such nodes are tolerated but flagged.
  bool degenerate = false;

  bool operator==(const TagNode&) const = default;
};

struct BuildReport {
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
};

// Undirected text-attributed graph. Nodes are kept sorted by id and every
// neighbor list is sorted ascending, so iteration order is deterministic.
// Read access is safe from many threads; mutation is single-writer.
class TagGraph {
 public:
  TagGraph() = default;

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<TagNode>& nodes() const { return nodes_; }

  bool contains(NodeId id) const { return index_.count(id) != 0; }

  const TagNode& node(NodeId id) const { return nodes_[index_of(id)]; }

  const std::vector<NodeId>& neighbors(NodeId id) const {
    return adjacency_[index_of(id)];
  }

  std::size_t degree(NodeId id) const { return neighbors(id).size(); }

  bool adjacent(NodeId u, NodeId v) const {
    const auto& nu = neighbors(u);
    return std::binary_search(nu.begin(), nu.end(), v);
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& list : adjacency_) total += list.size();
    return total / 2;
  }

  // Each undirected edge once as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (NodeId v : adjacency_[i]) {
        if (nodes_[i].id < v) out.emplace_back(nodes_[i].id, v);
      }
    }
    return out;
  }

  std::vector<NodeId> ids() const {
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back(n.id);
    return out;
  }

  const std::map<Label, std::string>& label_names() const {
    return label_names_;
  }
  void set_label_names(std::map<Label, std::string> names) {
    label_names_ = std::move(names);
  }

  std::string label_name(Label label) const {
    auto it = label_names_.find(label);
    return it == label_names_.end() ? std::to_string(label) : it->second;
  }

  // Named labels plus any label carried by a node, ascending.
  std::vector<Label> label_set() const {
    std::set<Label> labels;
    for (const auto& [label, name] : label_names_) labels.insert(label);
    for (const auto& n : nodes_) labels.insert(n.label);
    return {labels.begin(), labels.end()};
  }

  void set_text(NodeId id, std::string text) {
    TagNode& n = nodes_[index_of(id)];
    n.degenerate = trim(text).empty();
    n.text = std::move(text);
  }

  // Adds the undirected edge {u, v}. Returns false for self-loops and for
  // edges already present.
  bool add_edge(NodeId u, NodeId v) {
    if (u == v) return false;
    auto& nu = adjacency_[index_of(u)];
    auto& nv = adjacency_[index_of(v)];
    auto it = std::lower_bound(nu.begin(), nu.end(), v);
    if (it != nu.end() && *it == v) return false;
    nu.insert(it, v);
    nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
    return true;
  }

  bool operator==(const TagGraph& other) const {
    return nodes_ == other.nodes_ && adjacency_ == other.adjacency_ &&
           label_names_ == other.label_names_;
  }

 private:
  friend TagGraph build_graph(std::vector<TagNode>,
                              const std::vector<std::pair<NodeId, NodeId>>&,
                              BuildReport*);

  std::size_t index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw Error(ErrorCode::kUnknownNode, "node " + std::to_string(id));
    }
    return it->second;
  }

  std::vector<TagNode> nodes_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::map<Label, std::string> label_names_;
};

// Builds a symmetric graph. Directed duplicates such as (0,1),(1,0) collapse
// into one edge; duplicates and self-loops are dropped and counted.
inline TagGraph build_graph(
    std::vector<TagNode> nodes,
    const std::vector<std::pair<NodeId, NodeId>>& edges,
    BuildReport* report = nullptr) {
  std::sort(nodes.begin(), nodes.end(),
            [](const TagNode& a, const TagNode& b) { return a.id < b.id; });
  TagGraph g;
  g.index_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "negative node id " + std::to_string(nodes[i].id));
    }
    if (!g.index_.emplace(nodes[i].id, i).second) {
      throw Error(ErrorCode::kDuplicateNodeId,
                  "node " + std::to_string(nodes[i].id));
    }
    nodes[i].degenerate = trim(nodes[i].text).empty();
  }
  g.nodes_ = std::move(nodes);
  g.adjacency_.assign(g.nodes_.size(), {});

  BuildReport local;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& [u, v] : edges) {
    for (NodeId end : {u, v}) {
      if (!g.contains(end)) {
        throw Error(ErrorCode::kUnknownEndpoint,
                    "edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ") references node " + std::to_string(end));
      }
    }
    if (u == v) {
      ++local.self_loops;
      continue;
    }
    if (!seen.emplace(std::min(u, v), std::max(u, v)).second) {
      ++local.duplicate_edges;
      continue;
    }
    g.adjacency_[g.index_.at(u)].push_back(v);
    g.adjacency_[g.index_.at(v)].push_back(u);
  }
  for (auto& list : g.adjacency_) std::sort(list.begin(), list.end());
  if (report != nullptr) *report = local;
  return g;
}

// Exact BFS distances (1..k) from a source node; the source is excluded.
struct HopSet {
  std::map<NodeId, int> entries;

  std::size_t size() const { return entries.size(); }
  bool contains(NodeId id) const { return entries.count(id) != 0; }

  // Node ids at exactly `hop`, ascending.
  std::vector<NodeId> at_distance(int hop) const {
    std::vector<NodeId> out;
    for (const auto& [id, d] : entries) {
      if (d == hop) out.push_back(id);
    }
    return out;
  }
};

// BFS visit order (distance, then ascending id within the frontier
// expansion) from `source`, limited to `max_hops`. Includes the source.
inline std::vector<std::pair<NodeId, int>> bfs_order(const TagGraph& graph,
                                                     NodeId source,
                                                     int max_hops) {
  if (!graph.contains(source)) {
    throw Error(ErrorCode::kUnknownNode, "node " + std::to_string(source));
  }
  std::vector<std::pair<NodeId, int>> order{{source, 0}};
  std::unordered_map<NodeId, int> dist{{source, 0}};
  for (std::size_t head = 0; head < order.size(); ++head) {
    const auto [u, du] = order[head];
    if (du == max_hops) continue;
    for (NodeId v : graph.neighbors(u)) {
      if (dist.emplace(v, du + 1).second) order.emplace_back(v, du + 1);
    }
  }
  return order;
}

inline HopSet k_hop_neighbors(const TagGraph& graph, NodeId node, int k) {
  if (k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  }
  HopSet hops;
  for (const auto& [id, d] : bfs_order(graph, node, k)) {
    if (d > 0) hops.entries.emplace(id, d);
  }
  return hops;
}

// Induced subgraph over the given ids; ids and label names are preserved.
inline TagGraph induced_subgraph(const TagGraph& graph,
                                 const std::set<NodeId>& ids) {
  std::vector<TagNode> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId id : ids) {
    nodes.push_back(graph.node(id));
    for (NodeId v : graph.neighbors(id)) {
      if (id < v && ids.count(v)) edges.emplace_back(id, v);
    }
  }
  TagGraph sub = build_graph(std::move(nodes), edges);
  sub.set_label_names(graph.label_names());
  return sub;
}

inline TagGraph extract_two_hop_subgraph(const TagGraph& graph, NodeId node) {
  std::set<NodeId> ids{node};
  for (const auto& [id, d] : k_hop_neighbors(graph, node, 2).entries) {
    ids.insert(id);
  }
  return induced_subgraph(graph, ids);
}

template <typename Ids>
std::map<Label, std::size_t> label_histogram(const TagGraph& graph,
                                             const Ids& ids) {
  std::map<Label, std::size_t> counts;
  for (NodeId id : ids) ++counts[graph.node(id).label];
  return counts;
}

}  // namespace tagad

#endif  // TAGAD_GRAPH_HPP
