#ifndef TAGAD_PROMPTING_HPP
#define TAGAD_PROMPTING_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagad/encoders.hpp"
#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/util.hpp"

namespace tagad {

inline constexpr std::string_view kRubric =
    "The score should be an integer from 0 to 10 (higher = stronger anomaly "
    "evidence)\n"
    "**Score 0**: definitely normal\n"
    "**Score 1-4**: more likely normal (minor issues)\n"
    "**Score 5**: equally likely normal and anomalous\n"
    "**Score 6-9**: more likely anomalous (increasing evidence)\n"
    "**Score 10**: definitely anomalous";

inline constexpr std::string_view kTargetTextMarker = "**Target Node Text**\n";
inline constexpr std::string_view kNeighborsMarker = "\n\n**Description of ";
inline constexpr std::string_view kStructureMarker =
    "**Subgraph Structure Representation**\n";
inline constexpr std::string_view kTaskMarker =
    "\nTask:\nPredict an integer anomaly score";
inline constexpr std::string_view kFrameworkMarker = "\nAnalysis Framework:\n";
inline constexpr std::string_view kRubricMarker = "\n\nRubric:\n";
inline constexpr std::string_view kOutputMarker = "\n\nOutput Format:";

// ---------------------------------------------------------------------------
// Template registry

inline std::filesystem::path default_asset_dir() {
#ifdef TAGAD_ASSET_DIR
  return TAGAD_ASSET_DIR;
#else
  return "assets/templates";
#endif
}

class TemplateRegistry {
 public:
  // Every template the tool ships, by registry name (relative path without
  // the .txt extension).
  static const std::vector<std::string>& required_names() {
    static const std::vector<std::string> names = {
        "detect/system",          "detect/neighbor",
        "detect/user_contextual", "detect/user_structural",
        "detect/user_mixed",      "framework/placeholder",
        "framework/manual_contextual", "framework/manual_structural",
        "generate/system",        "generate/user_cora",
        "generate/user_citeseer", "generate/user_pubmed",
        "generate/user_wikics",   "generate/user_custom",
        "rag/example",            "rag/meta_contextual",
        "rag/meta_structural",    "rag/meta_mixed",
    };
    return names;
  }

  static TemplateRegistry load(
      const std::filesystem::path& dir = default_asset_dir()) {
    TemplateRegistry reg;
    for (const auto& name : required_names()) {
      const auto path = dir / (name + ".txt");
      if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::kIoError,
                    "missing template asset " + path.string());
      }
      reg.templates_[name] = read_file(path);
    }
    return reg;
  }

  const std::string& get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
      throw Error(ErrorCode::kIoError, "unknown template " + name);
    }
    return it->second;
  }

  // Hash over every template in name order; changes whenever an asset does.
  std::string fingerprint() const {
    std::uint64_t h = fnv1a64("");
    for (const auto& [name, text] : templates_) {
      h = fnv1a64(name, h);
      h = fnv1a64(text, h);
    }
    return hex64(h);
  }

 private:
  std::map<std::string, std::string> templates_;
};

using Substitutions = std::map<std::string, std::string>;

inline bool is_placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

// Single pass over the template: "{name}" is replaced with values[name].
// Substituted values are never rescanned, so braces in node text survive.
// Braces that do not enclose an identifier are copied through.
inline std::string substitute(std::string_view tmpl,
                              const Substitutions& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_placeholder_char(tmpl[j])) ++j;
      if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
        const std::string name(tmpl.substr(i + 1, j - i - 1));
        auto it = values.find(name);
        if (it == values.end()) {
          throw Error(ErrorCode::kPlaceholderUnresolved, "{" + name + "}");
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analysis frameworks

enum class FrameworkKind { kPlain, kManual, kRag };

inline std::string_view framework_kind_name(FrameworkKind kind) {
  switch (kind) {
    case FrameworkKind::kPlain: return "plain";
    case FrameworkKind::kManual: return "manual";
    case FrameworkKind::kRag: return "rag";
  }
  return "?";
}

inline FrameworkKind parse_framework_kind(std::string_view s) {
  if (s == "plain") return FrameworkKind::kPlain;
  if (s == "manual") return FrameworkKind::kManual;
  if (s == "rag") return FrameworkKind::kRag;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown framework kind '" + std::string(s) + "'");
}

inline constexpr std::string_view kCorpusProvenancePrefix = "corpus:";

struct AnalysisFramework {
  FrameworkKind kind = FrameworkKind::kPlain;
  PromptMode mode = PromptMode::kContextual;
  std::string text;
  std::string provenance;  // "placeholder", "human", or "corpus:<hash>"

  bool operator==(const AnalysisFramework&) const = default;

  void validate() const {
    if (trim(text).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty framework text");
    }
    if (kind == FrameworkKind::kRag &&
        provenance.rfind(kCorpusProvenancePrefix, 0) != 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "rag framework needs corpus provenance");
    }
  }
};

// Synthesized frameworks, one per mode, persisted as one JSON object per
// line: {"kind","mode","provenance","text"}.
class FrameworkStore {
 public:
  void put(AnalysisFramework framework) {
    framework.validate();
    frameworks_[framework.mode] = std::move(framework);
  }

  const AnalysisFramework* find(PromptMode mode) const {
    auto it = frameworks_.find(mode);
    return it == frameworks_.end() ? nullptr : &it->second;
  }

  bool empty() const { return frameworks_.empty(); }
  std::size_t size() const { return frameworks_.size(); }

  std::string to_string() const {
    std::string out;
    for (const auto& [mode, f] : frameworks_) {
      nlohmann::json j{{"kind", framework_kind_name(f.kind)},
                       {"mode", mode_name(f.mode)},
                       {"provenance", f.provenance},
                       {"text", f.text}};
      out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
      out += '\n';
    }
    return out;
  }

  void save(const std::filesystem::path& path) const {
    write_file(path, to_string());
  }

  static FrameworkStore load(const std::filesystem::path& path) {
    FrameworkStore store;
    std::size_t line_no = 0;
    const std::string content = read_file(path);
    for (std::string_view line : split_lines(content)) {
      ++line_no;
      if (trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::kParseError,
                    path.string() + " line " + std::to_string(line_no));
      }
      AnalysisFramework f;
      f.kind = parse_framework_kind(j.value("kind", "rag"));
      f.mode = parse_mode(j.value("mode", ""));
      f.provenance = j.value("provenance", "");
      f.text = j.value("text", "");
      store.put(std::move(f));
    }
    return store;
  }

 private:
  std::map<PromptMode, AnalysisFramework> frameworks_;
};

// Heading used when the two hand-written frameworks are combined for the
// mixed template.
inline std::string manual_mixed_framework(const TemplateRegistry& registry) {
  return "Contextual anomaly framework:\n" +
         std::string(trim(registry.get("framework/manual_contextual"))) +
         "\n\nStructural anomaly framework:\n" +
         std::string(trim(registry.get("framework/manual_structural")));
}

inline AnalysisFramework get_framework(FrameworkKind kind, PromptMode mode,
                                       const TemplateRegistry& registry,
                                       const FrameworkStore* store) {
  AnalysisFramework f;
  f.kind = kind;
  f.mode = mode;
  switch (kind) {
    case FrameworkKind::kPlain:
      f.text = std::string(trim(registry.get("framework/placeholder")));
      f.provenance = "placeholder";
      break;
    case FrameworkKind::kManual:
      if (mode == PromptMode::kContextual) {
        f.text = std::string(trim(registry.get("framework/manual_contextual")));
      } else if (mode == PromptMode::kStructural) {
        f.text = std::string(trim(registry.get("framework/manual_structural")));
      } else {
        f.text = manual_mixed_framework(registry);
      }
      f.provenance = "human";
      break;
    case FrameworkKind::kRag: {
      const AnalysisFramework* stored =
          store != nullptr ? store->find(mode) : nullptr;
      if (stored == nullptr) {
        throw Error(ErrorCode::kFrameworkMissing,
                    "no synthesized framework for mode " +
                        std::string(mode_name(mode)) + "; run rag-build");
      }
      return *stored;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Detection prompts

using NodeInfo = std::variant<ContextBlock, std::string, MixedEncoding>;

struct PromptParts {
  std::string framework;
  std::string rubric;
  std::string node_info;

  bool operator==(const PromptParts&) const = default;
};

struct PromptBundle {
  std::string system;
  std::string user;
  PromptParts parts;
  NodeId node_id = 0;
};

inline std::size_t count_occurrences(std::string_view haystack,
                                     std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

// Splits an assembled detection prompt back into framework, rubric and node
// information using the template's section headings.
inline PromptParts parse_detection_prompt(std::string_view user) {
  auto between = [&](std::string_view open, std::string_view close,
                     std::size_t from = 0) -> std::pair<std::size_t,
                                                        std::size_t> {
    const auto a = user.find(open, from);
    if (a == std::string_view::npos) {
      throw Error(ErrorCode::kParseError,
                  "prompt lacks section '" + std::string(trim(open)) + "'");
    }
    const auto b = user.find(close, a + open.size());
    if (b == std::string_view::npos) {
      throw Error(ErrorCode::kParseError,
                  "prompt lacks section '" + std::string(trim(close)) + "'");
    }
    return {a + open.size(), b};
  };
  PromptParts parts;
  auto node_start = user.find(kTargetTextMarker);
  if (node_start == std::string_view::npos) {
    node_start = user.find(kStructureMarker);
  }
  if (node_start == std::string_view::npos) {
    throw Error(ErrorCode::kParseError, "prompt lacks node information");
  }
  const auto task = user.find(kTaskMarker, node_start);
  if (task == std::string_view::npos) {
    throw Error(ErrorCode::kParseError, "prompt lacks task section");
  }
  std::string_view node_info = user.substr(node_start, task - node_start);
  while (!node_info.empty() && node_info.back() == '\n') {
    node_info.remove_suffix(1);
  }
  parts.node_info = std::string(node_info);
  auto [fa, fb] = between(kFrameworkMarker, kRubricMarker, task);
  parts.framework = std::string(user.substr(fa, fb - fa));
  auto [ra, rb] = between(kRubricMarker, kOutputMarker, fb);
  parts.rubric = std::string(user.substr(ra, rb - ra));
  return parts;
}

inline std::string neighbors_description(const ContextBlock& block,
                                         const TemplateRegistry& registry) {
  const std::string& tmpl = registry.get("detect/neighbor");
  std::string out;
  for (const auto& n : block.neighbors) {
    out += substitute(tmpl, {{"neighbor_index", std::to_string(n.index)},
                             {"neighbor_text", n.text}});
  }
  return out;
}

inline PromptBundle build_detection_prompt(PromptMode mode,
                                           const AnalysisFramework& framework,
                                           const NodeInfo& info, NodeId node,
                                           int max_word_num,
                                           const TemplateRegistry& registry) {
  if (framework.mode != mode) {
    throw Error(ErrorCode::kModeMismatch,
                "framework is for " + std::string(mode_name(framework.mode)) +
                    ", prompt is " + std::string(mode_name(mode)));
  }
  const std::size_t expected = mode == PromptMode::kContextual   ? 0
                               : mode == PromptMode::kStructural ? 1
                                                                 : 2;
  if (info.index() != expected) {
    throw Error(ErrorCode::kModeMismatch,
                "node information does not match " +
                    std::string(mode_name(mode)) + " mode");
  }
  framework.validate();

  Substitutions values{{"analysis_framework", framework.text},
                       {"idx", std::to_string(node)},
                       {"max_word_num", std::to_string(max_word_num)}};
  auto add_context = [&](const ContextBlock& block) {
    values["raw_text"] = block.target_text;
    values["num_neighbors"] = std::to_string(block.neighbors.size());
    values["neighbors_description"] = neighbors_description(block, registry);
  };
  std::string tmpl_name;
  switch (mode) {
    case PromptMode::kContextual:
      add_context(std::get<ContextBlock>(info));
      tmpl_name = "detect/user_contextual";
      break;
    case PromptMode::kStructural:
      values["graph_structure_representation"] = std::get<std::string>(info);
      tmpl_name = "detect/user_structural";
      break;
    case PromptMode::kMixed: {
      const auto& mixed = std::get<MixedEncoding>(info);
      add_context(mixed.context);
      values["graph_structure_representation"] = mixed.structure;
      tmpl_name = "detect/user_mixed";
      break;
    }
  }

  PromptBundle bundle;
  bundle.node_id = node;
  bundle.system = registry.get("detect/system");
  bundle.user = substitute(registry.get(tmpl_name), values);
  bundle.parts = parse_detection_prompt(bundle.user);
  return bundle;
}

// Match predicate for scripted mocks: true when `needle` occurs in the
// target node's own text section of a detection prompt (neighbor text and
// structure are ignored).
inline std::function<bool(std::string_view)> target_text_contains(
    std::string needle) {
  return [needle = std::move(needle)](std::string_view prompt) {
    const auto a = prompt.find(kTargetTextMarker);
    if (a == std::string_view::npos) return false;
    const auto start = a + kTargetTextMarker.size();
    auto end = prompt.find(kNeighborsMarker, start);
    if (end == std::string_view::npos) end = prompt.size();
    return prompt.substr(start, end - start).find(needle) !=
           std::string_view::npos;
  };
}

// ---------------------------------------------------------------------------
// Generation prompts

struct GenerationPrompt {
  std::string system;
  std::string user;
};

inline bool is_registered_dataset_kind(std::string_view kind) {
  return kind == "cora" || kind == "citeseer" || kind == "pubmed" ||
         kind == "wikics" || kind == "custom";
}

// The label list used by the custom template: "1. name" per line.
inline std::string numbered_topics(const std::map<Label, std::string>& names) {
  std::string out;
  int i = 0;
  for (const auto& [label, name] : names) {
    if (i > 0) out += '\n';
    out += std::to_string(++i) + ". " + name;
  }
  return out;
}

inline GenerationPrompt build_generation_prompt(
    std::string_view dataset_kind, const TagNode& node,
    const std::string& label_name, const std::string& designated_label,
    const TemplateRegistry& registry,
    const std::map<Label, std::string>& label_names = {},
    const std::string& dataset_name = "custom") {
  if (!is_registered_dataset_kind(dataset_kind)) {
    throw Error(ErrorCode::kUnknownDatasetKind, std::string(dataset_kind));
  }
  Substitutions values{{"label_name", label_name},
                       {"designated_label", designated_label},
                       {"raw_text", node.text}};
  if (dataset_kind == "custom") {
    values["dataset_name"] = dataset_name;
    values["num_topics"] = std::to_string(label_names.size());
    values["topic_list"] = numbered_topics(label_names);
  }
  return {registry.get("generate/system"),
          substitute(registry.get("generate/user_" + std::string(dataset_kind)),
                     values)};
}

}  // namespace tagad

#endif  // TAGAD_PROMPTING_HPP
