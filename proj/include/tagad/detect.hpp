#ifndef TAGAD_DETECT_HPP
#define TAGAD_DETECT_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tagad/concurrency.hpp"
#include "tagad/encoders.hpp"
#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/ingest.hpp"
#include "tagad/llm_client.hpp"
#include "tagad/prompting.hpp"
#include "tagad/rng.hpp"
#include "tagad/util.hpp"

namespace tagad {

inline constexpr int kMidpointScore = 5;
inline constexpr double kAbortFailureRate = 0.2;

struct ParsedScore {
  int score = kMidpointScore;
  bool ok = false;

  bool operator==(const ParsedScore&) const = default;
};

namespace detail {

// "RESULT:" + optional single space + optional sign + digits, nothing else
// on the (trimmed) line.
inline std::optional<long long> match_result_line(std::string_view line) {
  constexpr std::string_view kTag = "RESULT:";
  line = trim(line);
  if (line.substr(0, kTag.size()) != kTag) return std::nullopt;
  std::string_view rest = line.substr(kTag.size());
  if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  std::size_t i = 0;
  if (i < rest.size() && (rest[i] == '-' || rest[i] == '+')) ++i;
  if (i == rest.size()) return std::nullopt;
  for (std::size_t j = i; j < rest.size(); ++j) {
    if (rest[j] < '0' || rest[j] > '9') return std::nullopt;
  }
  if (rest.size() - i > 6) return 1000000;  // far out of range either way
  long long v = 0;
  std::from_chars(rest.data() + i, rest.data() + rest.size(), v);
  return rest[0] == '-' ? -v : v;
}

}  // namespace detail

// The last line of the form RESULT:<int> (or RESULT: <int>) decides; it
// must lie in 0..10. Otherwise the midpoint is returned, flagged.
inline ParsedScore parse_score(std::string_view completion) {
  const auto lines = split_lines(completion);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    if (auto v = detail::match_result_line(*it)) {
      if (*v >= 0 && *v <= 10) return {static_cast<int>(*v), true};
      return {};
    }
  }
  return {};
}

struct DetectionResult {
  NodeId node_id = 0;
  int score = kMidpointScore;
  bool parse_ok = false;
  int attempts = 0;
  std::string raw_hash;
  std::string rationale_excerpt;
  std::string raw;
  bool llm_failed = false;

  bool operator==(const DetectionResult&) const = default;
};

struct DetectRunConfig {
  PromptMode mode = PromptMode::kContextual;
  EncoderConfig encoder = EncoderConfig::contextual();
  std::optional<std::vector<NodeId>> nodes;  // all nodes when unset
  std::size_t limit = 4;
  std::uint64_t seed = 0;
  std::string model;
  int max_tokens = 2048;
  double temperature = 0.0;
  std::size_t excerpt_chars = 240;

  void validate() const {
    if (limit < 1) throw Error(ErrorCode::kInvalidArgument, "limit < 1");
    if (encoder.mode != mode) {
      throw Error(ErrorCode::kModeMismatch, "encoder config mode differs");
    }
    encoder.validate();
  }
};

inline NodeInfo encode_node(const TagGraph& graph, NodeId node,
                            const EncoderConfig& config, Rng& rng) {
  switch (config.mode) {
    case PromptMode::kContextual:
      return encode_contextual(graph, node, config, rng);
    case PromptMode::kStructural:
      return encode_structural(graph, node, config);
    case PromptMode::kMixed:
      return encode_mixed(graph, node, config, rng);
  }
  throw Error(ErrorCode::kInvalidArgument, "bad prompt mode");
}

inline PromptBundle detection_bundle(const TagGraph& graph, NodeId node,
                                     const DetectRunConfig& config,
                                     const AnalysisFramework& framework,
                                     const TemplateRegistry& registry) {
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(node)));
  const NodeInfo info = encode_node(graph, node, config.encoder, rng);
  return build_detection_prompt(config.mode, framework, info, node,
                                config.encoder.m_token, registry);
}

// Text before the decisive RESULT line, flattened and cut to `limit` chars.
inline std::string rationale_excerpt(std::string_view raw, std::size_t limit) {
  const auto pos = raw.rfind("RESULT:");
  std::string_view body = pos == std::string_view::npos ? raw : raw.substr(0, pos);
  std::string flat = join(tokenize(body), " ");
  if (flat.size() > limit) flat.resize(limit);
  return flat;
}

// One node: encode, prompt, complete. A parse failure earns one re-ask with
// the same prompt before the midpoint policy applies.
inline DetectionResult score_node(const TagGraph& graph, NodeId node,
                                  const DetectRunConfig& config,
                                  const AnalysisFramework& framework,
                                  LlmClient& llm,
                                  const TemplateRegistry& registry) {
  const PromptBundle bundle =
      detection_bundle(graph, node, config, framework, registry);
  ChatRequest request;
  request.system = bundle.system;
  request.user = bundle.user;
  request.model = config.model;
  request.max_tokens = config.max_tokens;
  request.temperature = config.temperature;
  request.request_tag = "detect/" + std::to_string(node);

  DetectionResult r;
  r.node_id = node;
  for (int ask = 0; ask < 2; ++ask) {
    r.raw = llm.complete(request).text;
    ++r.attempts;
    const ParsedScore parsed = parse_score(r.raw);
    r.score = parsed.score;
    r.parse_ok = parsed.ok;
    if (parsed.ok) break;
  }
  r.raw_hash = content_hash(r.raw);
  r.rationale_excerpt = rationale_excerpt(r.raw, config.excerpt_chars);
  return r;
}

struct DetectionSummary {
  std::size_t nodes = 0;
  std::size_t parse_failures = 0;
  std::size_t llm_failures = 0;
  std::size_t reasks = 0;
  std::string mode;
  std::string framework_kind;
  std::string framework_provenance;
};

struct DetectionRun {
  std::vector<DetectionResult> results;  // ascending node id
  DetectionSummary summary;
};

// Scores the selected nodes with at most `limit` calls in flight. Each node
// draws from its own generator seeded by (seed, id), so the outcome does not
// depend on scheduling. Nodes whose calls fail outright are recorded at the
// midpoint; more than 20% such failures abort the run.
inline DetectionRun run_detection(const TagGraph& graph,
                                  const DetectRunConfig& config,
                                  const AnalysisFramework& framework,
                                  LlmClient& llm,
                                  const TemplateRegistry& registry) {
  config.validate();
  std::vector<NodeId> ids = config.nodes ? *config.nodes : graph.ids();
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::kInvalidArgument, "node subset has duplicates");
  }
  if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "no nodes to score");
  for (NodeId id : ids) graph.node(id);

  std::vector<DetectionResult> results(ids.size());
  std::atomic<std::size_t> failures{0};
  const auto max_failures = static_cast<std::size_t>(
      kAbortFailureRate * static_cast<double>(ids.size()));
  parallel_for(ids.size(), config.limit, [&](std::size_t i) {
    try {
      results[i] = score_node(graph, ids[i], config, framework, llm, registry);
    } catch (const LlmFailure& e) {
      const std::size_t failed = ++failures;
      if (failed > max_failures) {
        throw Error(ErrorCode::kDetectionAborted,
                    std::to_string(failed) + " of " +
                        std::to_string(ids.size()) +
                        " LLM calls failed (limit 20%); last: " + e.what());
      }
      DetectionResult r;
      r.node_id = ids[i];
      r.attempts = e.attempts();
      r.raw_hash = "-";
      r.llm_failed = true;
      results[i] = std::move(r);
    }
  });

  DetectionRun run;
  run.summary.nodes = ids.size();
  run.summary.mode = std::string(mode_name(config.mode));
  run.summary.framework_kind = std::string(framework_kind_name(framework.kind));
  run.summary.framework_provenance = framework.provenance;
  for (const auto& r : results) {
    if (r.llm_failed) {
      ++run.summary.llm_failures;
    } else if (!r.parse_ok) {
      ++run.summary.parse_failures;
    }
    if (!r.llm_failed && r.attempts > 1) ++run.summary.reasks;
  }
  run.results = std::move(results);
  return run;
}

inline std::string scores_to_string(
    const std::vector<DetectionResult>& results,
    const std::map<std::string, std::string>& header = {}) {
  std::string out;
  if (!header.empty()) {
    out += "#";
    for (const auto& [k, v] : header) out += " " + k + "=" + v;
    out += "\n";
  }
  for (const auto& r : results) {
    out += std::to_string(r.node_id) + "," + std::to_string(r.score) + "," +
           (r.parse_ok ? "1" : "0") + "," + std::to_string(r.attempts) + "," +
           r.raw_hash + "\n";
  }
  return out;
}

// Raw completions as raw/<id>_<hash>.txt under `dir`.
inline void archive_raw(const std::vector<DetectionResult>& results,
                        const std::filesystem::path& dir) {
  for (const auto& r : results) {
    if (r.llm_failed) continue;
    write_file(dir / "raw" /
                   (std::to_string(r.node_id) + "_" + r.raw_hash + ".txt"),
               r.raw);
  }
}

}  // namespace tagad

#endif  // TAGAD_DETECT_HPP
