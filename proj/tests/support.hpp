#ifndef TAGAD_TESTS_SUPPORT_HPP
#define TAGAD_TESTS_SUPPORT_HPP

#include <atomic>
#include <unistd.h>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/ingest.hpp"
#include "tagad/util.hpp"

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(TAGAD_FIXTURES) / rel; }
inline fs::path golden(const std::string& rel) { return fs::path(TAGAD_GOLDEN) / rel; }

inline tagad::TagGraph load_fixture(const std::string& name) {
  return tagad::load_dataset(tagad::DatasetPaths::in(fixture(name)));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("tagad-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline tagad::TagNode make_node(tagad::NodeId id, tagad::Label label,
                                std::string text) {
  tagad::TagNode n;
  n.id = id;
  n.label = label;
  n.text = std::move(text);
  return n;
}

// Nodes 0..n-1 with text "node <i>" and label i % labels.
inline tagad::TagGraph numbered_graph(
    int n, const std::vector<std::pair<tagad::NodeId, tagad::NodeId>>& edges,
    int labels = 1) {
  std::vector<tagad::TagNode> nodes;
  std::map<tagad::Label, std::string> names;
  for (int i = 0; i < n; ++i) {
    nodes.push_back(make_node(i, i % labels, "node " + std::to_string(i)));
  }
  for (int l = 0; l < labels; ++l) names[l] = "label" + std::to_string(l);
  auto g = tagad::build_graph(std::move(nodes), edges);
  g.set_label_names(names);
  return g;
}

inline std::vector<std::pair<tagad::NodeId, tagad::NodeId>> path_edges(int n) {
  std::vector<std::pair<tagad::NodeId, tagad::NodeId>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline std::vector<std::pair<tagad::NodeId, tagad::NodeId>> clique_edges(int n) {
  std::vector<std::pair<tagad::NodeId, tagad::NodeId>> e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return e;
}

// Code of the tagad::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<tagad::ErrorCode> thrown_code(F&& f) {
  try {
    f();
  } catch (const tagad::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

#define EXPECT_CODE(stmt, code_) \
  EXPECT_EQ(thrown_code([&] { (void)(stmt); }), std::optional(tagad::ErrorCode::code_))

#endif  // TAGAD_TESTS_SUPPORT_HPP
