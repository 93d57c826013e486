#ifndef TAGAD_ANOMALY_INJECT_HPP
#define TAGAD_ANOMALY_INJECT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tagad/concurrency.hpp"
#include "tagad/embedding.hpp"
#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/ingest.hpp"
#include "tagad/llm_client.hpp"
#include "tagad/prompting.hpp"
#include "tagad/rng.hpp"
#include "tagad/util.hpp"

namespace tagad {

struct PerturbationParams {
  int k_candidate = 50;
  double a_low = 0.25;
  double a_high = 0.5;

  void validate() const {
    if (k_candidate < 1) {
      throw Error(ErrorCode::kInvalidArgument, "K_candidate must be >= 1");
    }
    if (!(0.0 < a_low && a_low < a_high && a_high <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "need 0 < a_low < a_high <= 1");
    }
  }
};

struct StructuralParams {
  int m = 10;  // clique size
  int n = 0;   // clique count, derived from the budget
};

struct KindShare {
  AnomalyKind kind;
  double share;
};

struct InjectionPlan {
  std::uint64_t seed = 0;
  double rate = 0.05;
  int k_hops = 2;
  PerturbationParams perturbation;
  StructuralParams structural;
  std::string pool_name;
  // Nodes per kind, in sampled order. Structural nodes are grouped into
  // cliques in this order.
  std::map<AnomalyKind, std::vector<NodeId>> nodes_by_kind;

  std::map<NodeId, AnomalyKind> assignments() const {
    std::map<NodeId, AnomalyKind> out;
    for (const auto& [kind, ids] : nodes_by_kind) {
      for (NodeId id : ids) out.emplace(id, kind);
    }
    return out;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [kind, ids] : nodes_by_kind) n += ids.size();
    return n;
  }

  const std::vector<NodeId>& nodes(AnomalyKind kind) const {
    static const std::vector<NodeId> kEmpty;
    auto it = nodes_by_kind.find(kind);
    return it == nodes_by_kind.end() ? kEmpty : it->second;
  }
};

// Draws round(rate * |V|) distinct nodes and splits them across kinds by
// share. The structural share is floored to a multiple of the clique size.
inline InjectionPlan sample_candidates(const TagGraph& graph, double rate,
                                       const std::vector<KindShare>& kinds,
                                       std::uint64_t seed,
                                       int clique_size = 10) {
  if (kinds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no anomaly kinds requested");
  }
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rate must be in (0, 1]");
  }
  if (clique_size < 2) {
    throw Error(ErrorCode::kInvalidArgument, "clique size must be >= 2");
  }
  double share_sum = 0.0;
  std::set<AnomalyKind> distinct;
  for (const auto& k : kinds) {
    if (!(k.share > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "shares must be positive");
    }
    if (!distinct.insert(k.kind).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "kind listed twice: " + std::string(kind_name(k.kind)));
    }
    share_sum += k.share;
  }
  if (std::abs(share_sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "shares must sum to 1");
  }

  const std::int64_t total =
      round_half_away(rate * static_cast<double>(graph.size()));
  if (total < 1) {
    throw Error(ErrorCode::kBudgetTooSmall,
                "round(" + std::to_string(rate) + " * " +
                    std::to_string(graph.size()) + ") < 1");
  }

  std::vector<std::int64_t> counts(kinds.size(), 0);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i + 1 < kinds.size(); ++i) {
    counts[i] = round_half_away(static_cast<double>(total) * kinds[i].share);
    assigned += counts[i];
  }
  counts.back() = std::max<std::int64_t>(0, total - assigned);

  InjectionPlan plan;
  plan.seed = seed;
  plan.rate = rate;
  plan.structural.m = clique_size;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i].kind != AnomalyKind::kStructural) continue;
    if (static_cast<std::size_t>(clique_size) > graph.size()) {
      throw Error(ErrorCode::kGraphTooSmall,
                  "clique size exceeds node count");
    }
    counts[i] -= counts[i] % clique_size;
    if (counts[i] == 0) {
      throw Error(ErrorCode::kBudgetTooSmall,
                  "structural budget is below one clique of " +
                      std::to_string(clique_size));
    }
    plan.structural.n = static_cast<int>(counts[i] / clique_size);
  }

  std::vector<NodeId> ids = graph.ids();
  std::int64_t needed = 0;
  for (auto c : counts) needed += c;
  if (needed > static_cast<std::int64_t>(ids.size())) {
    throw Error(ErrorCode::kGraphTooSmall, "budget exceeds node count");
  }
  Rng rng(seed);
  rng.partial_shuffle(ids, static_cast<std::size_t>(needed));
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    auto& bucket = plan.nodes_by_kind[kinds[i].kind];
    for (std::int64_t j = 0; j < counts[i]; ++j) bucket.push_back(ids[cursor++]);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// LLM-generated contextual anomalies

// Label elimination. Start from every label except the node's own; then for
// hop h = 1..k_hops, walk that hop's labels by descending count (ties by
// ascending id) and eliminate each in turn, stopping as soon as one
// candidate remains. Leftover ties go to the least frequent label globally.
inline Label select_target_label(const TagGraph& graph, NodeId node,
                                 int k_hops = 2) {
  const Label original = graph.node(node).label;
  std::set<Label> candidates;
  for (Label l : graph.label_set()) {
    if (l != original) candidates.insert(l);
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kSingleLabelGraph,
                "graph has a single label; no target available");
  }
  if (candidates.size() > 1 && k_hops >= 1) {
    const HopSet hops = k_hop_neighbors(graph, node, k_hops);
    for (int h = 1; h <= k_hops && candidates.size() > 1; ++h) {
      const auto hist = label_histogram(graph, hops.at_distance(h));
      std::vector<std::pair<Label, std::size_t>> order(hist.begin(),
                                                       hist.end());
      std::stable_sort(order.begin(), order.end(),
                       [](const auto& a, const auto& b) {
                         return a.second > b.second;
                       });
      for (const auto& [label, count] : order) {
        if (candidates.size() == 1) break;
        candidates.erase(label);
      }
    }
  }
  if (candidates.size() == 1) return *candidates.begin();

  const auto global = label_histogram(graph, graph.ids());
  Label best = *candidates.begin();
  std::size_t best_count = SIZE_MAX;
  for (Label l : candidates) {
    auto it = global.find(l);
    const std::size_t c = it == global.end() ? 0 : it->second;
    if (c < best_count) {
      best = l;
      best_count = c;
    }
  }
  return best;
}

struct GenerationSettings {
  std::string dataset_kind = "custom";
  std::string dataset_name = "custom";
  std::string model;
  double temperature = 0.7;
  int max_tokens = 2048;
};

// Asks the LLM to rewrite the node's text toward `target_label`. The
// completion is returned verbatim.
inline std::string inject_llm_contextual(const TagGraph& graph, NodeId node,
                                         Label target_label, LlmClient& llm,
                                         const TemplateRegistry& registry,
                                         const GenerationSettings& settings) {
  const TagNode& n = graph.node(node);
  if (target_label == n.label) {
    throw Error(ErrorCode::kInvalidArgument,
                "target label equals the original label");
  }
  const GenerationPrompt prompt = build_generation_prompt(
      settings.dataset_kind, n, graph.label_name(n.label),
      graph.label_name(target_label), registry, graph.label_names(),
      settings.dataset_name);
  ChatRequest request;
  request.system = prompt.system;
  request.user = prompt.user;
  request.model = settings.model;
  request.temperature = settings.temperature;
  request.max_tokens = settings.max_tokens;
  request.request_tag = "generate/" + std::to_string(node);
  ChatOutcome outcome = llm.complete(request);
  if (trim(outcome.text).empty()) {
    throw Error(ErrorCode::kEmptyCompletion,
                "empty rewrite for node " + std::to_string(node));
  }
  return outcome.text;
}

// ---------------------------------------------------------------------------
// Global contextual anomalies

// Uniform draws without replacement from an outlier pool within one run.
class PoolSampler {
 public:
  explicit PoolSampler(const OutlierPool& pool) : pool_(&pool) {
    if (pool.texts.empty()) {
      throw Error(ErrorCode::kEmptyPool, pool.source_name);
    }
    remaining_.resize(pool.texts.size());
    for (std::size_t i = 0; i < remaining_.size(); ++i) remaining_[i] = i;
  }

  std::size_t remaining() const { return remaining_.size(); }

  const std::string& draw(Rng& rng) {
    if (remaining_.empty()) {
      throw Error(ErrorCode::kPoolExhausted,
                  pool_->source_name + " has no unused texts left");
    }
    const std::size_t pick = rng.uniform_index(remaining_.size());
    const std::size_t index = remaining_[pick];
    remaining_.erase(remaining_.begin() + static_cast<std::ptrdiff_t>(pick));
    return pool_->texts[index];
  }

 private:
  const OutlierPool* pool_;
  std::vector<std::size_t> remaining_;
};

inline std::string inject_global(const TagGraph& graph, NodeId node,
                                 PoolSampler& pool, Rng& rng) {
  graph.node(node);
  return pool.draw(rng);
}

// ---------------------------------------------------------------------------
// Text-perturbation anomalies

// l = max(1, min(round(l_s * a), l_t)).
inline std::size_t splice_length(std::size_t source_tokens,
                                 std::size_t target_tokens, double a) {
  const auto scaled = static_cast<std::size_t>(
      std::max<std::int64_t>(0, round_half_away(
                                    static_cast<double>(source_tokens) * a)));
  return std::max<std::size_t>(1, std::min(scaled, target_tokens));
}

struct PerturbationOutcome {
  std::string text;
  NodeId source = 0;
  std::vector<NodeId> candidates;     // the K sampled candidates
  std::vector<double> similarities;   // cosine to the target, same order
  double a = 0.0;
  std::size_t length = 0;             // l
  std::size_t source_tokens = 0;      // l_s
  std::size_t target_tokens = 0;      // l_t
  std::size_t target_start = 0;
  std::size_t source_start = 0;
};

// Splices an l-token span of the least similar of K random candidates into
// the target. `excluded` holds nodes that may not serve as sources (the
// run's anomalies); the target is always excluded.
inline PerturbationOutcome inject_text_perturbation(
    const TagGraph& graph, NodeId node, const EmbeddingTable& table,
    const PerturbationParams& params, Rng& rng,
    const std::set<NodeId>& excluded = {}) {
  params.validate();
  const auto target_tokens = tokenize(graph.node(node).text);
  if (target_tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "node " + std::to_string(node) + " has empty text");
  }
  std::vector<NodeId> pool;
  for (const auto& n : graph.nodes()) {
    if (n.id != node && !excluded.count(n.id)) pool.push_back(n.id);
  }
  const auto k = static_cast<std::size_t>(params.k_candidate);
  if (pool.size() < k) {
    throw Error(ErrorCode::kTooFewCandidates,
                std::to_string(pool.size()) + " eligible nodes, K = " +
                    std::to_string(k));
  }
  const Vector& target_vec = table.at(node);

  PerturbationOutcome out;
  std::vector<std::string> source_tokens;
  for (int attempt = 0; attempt < 2; ++attempt) {
    rng.partial_shuffle(pool, k);
    out.candidates.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    out.similarities.clear();
    std::size_t best = 0;
    for (std::size_t i = 0; i < k; ++i) {
      out.similarities.push_back(
          cosine_similarity(target_vec, table.at(out.candidates[i])));
      if (out.similarities[i] < out.similarities[best]) best = i;
    }
    out.source = out.candidates[best];
    source_tokens = tokenize(graph.node(out.source).text);
    if (!source_tokens.empty()) break;
  }
  if (source_tokens.empty()) {
    throw Error(ErrorCode::kEmptySource,
                "least similar candidate has empty text twice for node " +
                    std::to_string(node));
  }

  out.source_tokens = source_tokens.size();
  out.target_tokens = target_tokens.size();
  out.a = rng.uniform_real(params.a_low, params.a_high);
  out.length = splice_length(out.source_tokens, out.target_tokens, out.a);
  out.target_start = rng.uniform_index(out.target_tokens - out.length + 1);
  out.source_start = rng.uniform_index(out.source_tokens - out.length + 1);

  std::vector<std::string> spliced = target_tokens;
  for (std::size_t i = 0; i < out.length; ++i) {
    spliced[out.target_start + i] = source_tokens[out.source_start + i];
  }
  out.text = join(spliced, " ");
  return out;
}

// ---------------------------------------------------------------------------
// Structural anomalies

struct StructuralOutcome {
  std::size_t edges_added = 0;
  std::vector<AnomalyRecord> records;
};

// Splits plan_nodes (in order) into n groups of m and fully connects each
// group. Existing edges are kept; every member is recorded with its clique.
inline StructuralOutcome inject_structural(TagGraph& graph,
                                           const StructuralParams& params,
                                           const std::vector<NodeId>& nodes) {
  if (params.m < 2 || params.n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need m >= 2 and n >= 1");
  }
  const auto expected =
      static_cast<std::size_t>(params.m) * static_cast<std::size_t>(params.n);
  if (nodes.size() != expected) {
    throw Error(ErrorCode::kWrongCount,
                "got " + std::to_string(nodes.size()) + " nodes for " +
                    std::to_string(params.n) + " cliques of " +
                    std::to_string(params.m));
  }
  if (std::set<NodeId>(nodes.begin(), nodes.end()).size() != nodes.size()) {
    throw Error(ErrorCode::kWrongCount, "clique nodes are not distinct");
  }
  for (NodeId id : nodes) graph.node(id);

  StructuralOutcome out;
  const auto m = static_cast<std::size_t>(params.m);
  for (std::size_t c = 0; c < static_cast<std::size_t>(params.n); ++c) {
    for (std::size_t i = c * m; i < (c + 1) * m; ++i) {
      for (std::size_t j = i + 1; j < (c + 1) * m; ++j) {
        out.edges_added += graph.add_edge(nodes[i], nodes[j]) ? 1 : 0;
      }
      AnomalyRecord r;
      r.node = nodes[i];
      r.kind = AnomalyKind::kStructural;
      r.clique_id = static_cast<int>(c);
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Orchestration

struct InjectionDeps {
  LlmClient* llm = nullptr;
  const TemplateRegistry* templates = nullptr;
  GenerationSettings generation;
  std::size_t llm_concurrency = 4;
  const OutlierPool* pool = nullptr;
  const EmbeddingTable* table = nullptr;
};

struct InjectionResult {
  TagGraph graph;
  AnomalyManifest manifest;
  std::size_t edges_added = 0;
};

// Applies every injector of the plan to a copy of the graph, in the order
// structural, global, perturbation, llm. Each kind draws from its own
// sub-seeded generator. Any failure propagates and nothing is returned.
inline InjectionResult run_injection(const TagGraph& graph,
                                     const InjectionPlan& plan,
                                     const InjectionDeps& deps) {
  InjectionResult result{graph, {}, 0};
  TagGraph& g = result.graph;
  AnomalyManifest& manifest = result.manifest;
  manifest.seed = plan.seed;
  const auto all_anomalies = plan.assignments();
  std::set<NodeId> anomalous;
  for (const auto& [id, kind] : all_anomalies) anomalous.insert(id);

  if (const auto& ids = plan.nodes(AnomalyKind::kStructural); !ids.empty()) {
    StructuralParams params = plan.structural;
    params.n = static_cast<int>(ids.size() / static_cast<std::size_t>(params.m));
    StructuralOutcome s = inject_structural(g, params, ids);
    result.edges_added = s.edges_added;
    for (auto& r : s.records) manifest.records.push_back(std::move(r));
  }

  if (const auto& ids = plan.nodes(AnomalyKind::kGlobalContextual);
      !ids.empty()) {
    if (deps.pool == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "global anomalies need an outlier pool");
    }
    Rng rng(derive_seed(plan.seed, 2));
    PoolSampler sampler(*deps.pool);
    for (NodeId id : ids) {
      AnomalyRecord r{id, AnomalyKind::kGlobalContextual, g.node(id).text,
                      std::nullopt, std::nullopt};
      g.set_text(id, inject_global(g, id, sampler, rng));
      manifest.records.push_back(std::move(r));
    }
  }

  if (const auto& ids = plan.nodes(AnomalyKind::kTextPerturbation);
      !ids.empty()) {
    if (deps.table == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "text perturbation needs an embedding table");
    }
    Rng rng(derive_seed(plan.seed, 3));
    for (NodeId id : ids) {
      AnomalyRecord r{id, AnomalyKind::kTextPerturbation, g.node(id).text,
                      std::nullopt, std::nullopt};
      auto out = inject_text_perturbation(g, id, *deps.table,
                                          plan.perturbation, rng, anomalous);
      g.set_text(id, std::move(out.text));
      manifest.records.push_back(std::move(r));
    }
  }

  if (const auto& ids = plan.nodes(AnomalyKind::kLlmContextual); !ids.empty()) {
    if (deps.llm == nullptr || deps.templates == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "llm_contextual anomalies need an LLM and templates");
    }
    std::vector<Label> targets;
    targets.reserve(ids.size());
    for (NodeId id : ids) targets.push_back(select_target_label(g, id, plan.k_hops));
    std::vector<std::string> rewrites(ids.size());
    const TagGraph& snapshot = g;
    parallel_for(ids.size(), deps.llm_concurrency, [&](std::size_t i) {
      rewrites[i] = inject_llm_contextual(snapshot, ids[i], targets[i],
                                          *deps.llm, *deps.templates,
                                          deps.generation);
    });
    for (std::size_t i = 0; i < ids.size(); ++i) {
      AnomalyRecord r{ids[i], AnomalyKind::kLlmContextual, g.node(ids[i]).text,
                      targets[i], std::nullopt};
      g.set_text(ids[i], std::move(rewrites[i]));
      manifest.records.push_back(std::move(r));
    }
  }

  for (AnomalyKind kind : kAllKinds) {
    const std::size_t c = manifest.count(kind);
    if (c > 0) {
      manifest.rates[std::string(kind_name(kind))] =
          static_cast<double>(c) / static_cast<double>(g.size());
    }
  }
  manifest.canonicalize();
  validate_manifest(manifest);
  return result;
}

}  // namespace tagad

#endif  // TAGAD_ANOMALY_INJECT_HPP
