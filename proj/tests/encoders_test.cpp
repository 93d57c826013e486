#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "support.hpp"
#include "tagad/encoders.hpp"
#include "tagad/rng.hpp"

using namespace tagad;

namespace {

std::string words(int n, const std::string& stem = "w") {
  std::string out;
  for (int i = 0; i < n; ++i) out += stem + std::to_string(i) + " ";
  return out;
}

// Independent BFS: visit order by (hop, discovery), neighbors ascending.
std::vector<NodeId> bfs_prefix(const TagGraph& g, NodeId src, int max_hop) {
  std::vector<NodeId> order{src};
  std::map<NodeId, int> hop{{src, 0}};
  std::deque<NodeId> q{src};
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    if (hop[u] == max_hop) continue;
    std::vector<NodeId> nbrs = g.neighbors(u);
    std::sort(nbrs.begin(), nbrs.end());
    for (NodeId v : nbrs) {
      if (hop.count(v)) continue;
      hop[v] = hop[u] + 1;
      order.push_back(v);
      q.push_back(v);
    }
  }
  return order;
}

std::size_t count_sentences(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Truncate, Examples) {
  EXPECT_EQ(truncate_tokens("a b c", 2), "a b");
  EXPECT_EQ(truncate_tokens("a  b", 5), "a b");
  EXPECT_EQ(tokenize(truncate_tokens(words(1500), 1000)).size(), 1000u);
  EXPECT_EQ(truncate_tokens(words(1500), 1000), truncate_tokens(words(1000), 5000));
  EXPECT_TRUE(truncate_with_flag("a b c", 2).truncated);
  EXPECT_FALSE(truncate_with_flag("a b", 2).truncated);
}

TEST(Defaults, PerModeCaps) {
  const auto c = EncoderConfig::contextual();
  EXPECT_EQ(c.m_token, 1000);
  EXPECT_EQ(c.k_neighbors, 20);
  const auto s = EncoderConfig::structural();
  EXPECT_EQ(s.m_node, 100);
  EXPECT_EQ(s.m_incident, 100);
  const auto m = EncoderConfig::mixed();
  EXPECT_EQ(m.m_token, 1000);
  EXPECT_EQ(m.k_neighbors, 10);
  EXPECT_EQ(m.m_node, 50);
  EXPECT_EQ(m.m_incident, 50);
  EncoderConfig bad;
  bad.k_neighbors = 0;
  EXPECT_CODE(bad.validate(), kInvalidArgument);
}

TEST(Contextual, FewNeighborsAllKept) {
  auto g = numbered_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  Rng rng(1);
  const auto b = encode_contextual(g, 0, EncoderConfig::contextual(), rng);
  ASSERT_EQ(b.neighbors.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(b.neighbors[i].index, i + 1);
  EXPECT_EQ(b.target_text, "node 0");
}

TEST(Contextual, ManyNeighborsSampledToK) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 1; i <= 25; ++i) e.emplace_back(0, i);
  auto g = numbered_graph(26, e);
  Rng rng(2);
  const auto b = encode_contextual(g, 0, EncoderConfig::contextual(), rng);
  ASSERT_EQ(b.neighbors.size(), 20u);
  std::set<NodeId> ids;
  for (const auto& n : b.neighbors) {
    EXPECT_TRUE(g.adjacent(0, n.id));
    ids.insert(n.id);
  }
  EXPECT_EQ(ids.size(), 20u);
}

TEST(Contextual, IsolatedAndUnknown) {
  auto g = numbered_graph(2, {});
  Rng rng(3);
  EXPECT_TRUE(encode_contextual(g, 1, EncoderConfig::contextual(), rng).neighbors.empty());
  EXPECT_CODE(encode_contextual(g, 7, EncoderConfig::contextual(), rng), kUnknownNode);
  EXPECT_CODE(encode_structural(g, 7, EncoderConfig::structural()), kUnknownNode);
}

TEST(Contextual, TextsTruncated) {
  std::vector<TagNode> nodes{make_node(0, 0, words(50)), make_node(1, 0, words(30, "x"))};
  auto g = build_graph(nodes, {{0, 1}});
  EncoderConfig c = EncoderConfig::contextual();
  c.m_token = 10;
  Rng rng(4);
  const auto b = encode_contextual(g, 0, c, rng);
  EXPECT_EQ(tokenize(b.target_text).size(), 10u);
  EXPECT_TRUE(b.target_truncated);
  EXPECT_EQ(tokenize(b.neighbors[0].text).size(), 10u);
  EXPECT_TRUE(b.neighbors[0].truncated);
}

TEST(Structural, StarTemplate) {
  auto g = numbered_graph(3, {{0, 1}, {0, 2}});
  EXPECT_EQ(encode_structural(g, 0, EncoderConfig::structural()),
            "The target node is 0. The subgraph has 3 nodes: 0, 1, 2. "
            "Node 0 is connected to nodes 1, 2. Node 1 is connected to nodes 0. "
            "Node 2 is connected to nodes 0.");
}

TEST(Structural, IsolatedNodeSingleRoster) {
  auto g = numbered_graph(2, {});
  EXPECT_EQ(encode_structural(g, 1, EncoderConfig::structural()),
            "The target node is 1. The subgraph has 1 node: 1. "
            "Node 1 is not connected to any other nodes.");
}

TEST(Structural, CliqueIncidentCapKeepsSmallestIds) {
  auto g = numbered_graph(10, clique_edges(10));
  EncoderConfig c = EncoderConfig::structural();
  c.m_incident = 5;
  const std::string s = encode_structural(g, 3, c);
  for (int id = 0; id < 10; ++id) {
    // Smallest five ids other than itself.
    std::vector<NodeId> expect;
    for (int v = 0; v < 10 && expect.size() < 5; ++v) {
      if (v != id) expect.push_back(v);
    }
    EXPECT_NE(s.find("Node " + std::to_string(id) + " is connected to nodes " +
                     join_ids(expect) + "."),
              std::string::npos)
        << id;
  }
}

TEST(Structural, NodeCapKeepsBfsPrefix) {
  // Target 0 with 50 neighbors; each neighbor has 3 private leaves.
  std::vector<std::pair<NodeId, NodeId>> e;
  NodeId next = 51;
  for (NodeId i = 1; i <= 50; ++i) {
    e.emplace_back(0, i);
    for (int j = 0; j < 3; ++j) e.emplace_back(i, next++);
  }
  auto g = numbered_graph(static_cast<int>(next), e);
  ASSERT_EQ(next, 201);
  EncoderConfig c = EncoderConfig::structural();
  const auto kept = structural_node_selection(g, 0, c.m_node);
  const auto oracle = bfs_prefix(g, 0, 2);
  ASSERT_EQ(oracle.size(), 201u);
  EXPECT_EQ(kept, std::vector<NodeId>(oracle.begin(), oracle.begin() + 100));

  const std::string s = encode_structural(g, 0, c);
  EXPECT_NE(s.find("The subgraph has 100 nodes"), std::string::npos);
  EXPECT_EQ(count_sentences(s, " Node "), 100u);
}

TEST(Structural, CapsNeverExceededOnRandomGraphs) {
  Rng rng(77);
  for (int t = 0; t < 40; ++t) {
    const int n = 30 + static_cast<int>(rng.uniform_index(40));
    std::vector<std::pair<NodeId, NodeId>> e;
    for (int k = 0; k < n * 3; ++k) {
      e.emplace_back(rng.uniform_index(n), rng.uniform_index(n));
    }
    auto g = numbered_graph(n, e);
    EncoderConfig c = EncoderConfig::mixed();
    c.m_node = 1 + static_cast<int>(rng.uniform_index(20));
    c.m_incident = 1 + static_cast<int>(rng.uniform_index(6));
    const NodeId target = rng.uniform_index(n);
    const auto kept = structural_node_selection(g, target, c.m_node);
    EXPECT_LE(kept.size(), static_cast<std::size_t>(c.m_node));
    EXPECT_EQ(kept.front(), target);
    const std::string s = encode_structural(g, target, c);
    EXPECT_EQ(s.rfind("The target node is " + std::to_string(target) + ".", 0), 0u);
    EXPECT_EQ(s, encode_structural(g, target, c));
    // Each "connected to nodes a, b, c." list holds at most m_incident ids.
    for (auto p = s.find("connected to nodes "); p != std::string::npos;
         p = s.find("connected to nodes ", p + 1)) {
      const auto end = s.find('.', p);
      const std::string list = s.substr(p + 19, end - p - 19);
      const auto ids = std::count(list.begin(), list.end(), ',') + 1;
      EXPECT_LE(ids, c.m_incident);
    }
  }
}

TEST(Mixed, CapsAndDeterminism) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 1; i <= 12; ++i) e.emplace_back(0, i);
  auto g = numbered_graph(13, e);
  Rng a(5), b(5);
  const auto x = encode_mixed(g, 0, EncoderConfig::mixed(), a);
  const auto y = encode_mixed(g, 0, EncoderConfig::mixed(), b);
  EXPECT_EQ(x.context.neighbors.size(), 10u);
  EXPECT_TRUE(x == y);

  auto iso = numbered_graph(1, {});
  Rng c(6);
  const auto z = encode_mixed(iso, 0, EncoderConfig::mixed(), c);
  EXPECT_TRUE(z.context.neighbors.empty());
  EXPECT_NE(z.structure.find("has 1 node: 0."), std::string::npos);
}
