#ifndef TAGAD_CLI_HPP
#define TAGAD_CLI_HPP

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagad/anomaly_inject.hpp"
#include "tagad/config.hpp"
#include "tagad/detect.hpp"
#include "tagad/embedding.hpp"
#include "tagad/error.hpp"
#include "tagad/http_transport.hpp"
#include "tagad/ingest.hpp"
#include "tagad/llm_client.hpp"
#include "tagad/metrics.hpp"
#include "tagad/prompting.hpp"
#include "tagad/rag.hpp"

namespace tagad::cli {

namespace fs = std::filesystem;

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "inject", "rag-build", "detect", "eval",
      "export-baselines", "import-scores", "demo"};
  return names;
}

// Hooks for tests: replace the network transports or the retry sleeper.
struct Context {
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
  CompletionFn chat_transport;
  EmbedTransport embed_transport;
  LlmClient::Sleeper sleeper;
  fs::path asset_dir = default_asset_dir();
};

inline constexpr std::string_view kMockFramework =
    "1. Read the target text and identify its main topic.\n"
    "2. Compare that topic with the topics of the neighbor texts.\n"
    "3. Raise the score when the target's topic is unrelated to every "
    "neighbor or to the field of the graph.\n"
    "4. Keep the score low when the target shares vocabulary and subject "
    "with most neighbors.";

// Offline stand-in for a chat model. Rewrite requests get a deterministic
// paragraph, framework requests a fixed framework, and detection requests
// RESULT:9 when the target text contains `marker`, else RESULT:1.
inline CompletionFn mock_completion(std::string marker) {
  auto marked = target_text_contains(marker);
  return [marked](const ChatRequest& r) -> TransportReply {
    if (r.request_tag.rfind("generate/", 0) == 0) {
      return {"This rewritten abstract " + content_hash(r.user) +
                  " moves the work toward an unrelated field while keeping "
                  "the original length and academic tone.",
              std::nullopt};
    }
    if (r.request_tag.rfind("rag/", 0) == 0) {
      return {std::string(kMockFramework), std::nullopt};
    }
    if (marked(r.user)) {
      return {"The target text contains an out-of-place term.\nRESULT:9",
              std::nullopt};
    }
    return {"The target text is consistent with its neighbors.\nRESULT:1",
            std::nullopt};
  };
}

inline std::unique_ptr<LlmClient> make_llm(const Config& config,
                                           const Context& ctx) {
  ClientConfig cc;
  cc.max_attempts = static_cast<int>(config.integer("llm.max_attempts"));
  cc.base_delay = std::chrono::milliseconds(config.integer("llm.base_delay_ms"));
  cc.max_in_flight = static_cast<std::size_t>(config.integer("llm.max_in_flight"));
  cc.min_spacing =
      std::chrono::milliseconds(config.integer("llm.min_spacing_ms"));
  CompletionFn transport;
  const std::string provider = config.str("llm.provider");
  if (ctx.chat_transport) {
    transport = ctx.chat_transport;
  } else if (provider == "mock") {
    transport = mock_completion(config.str("llm.mock_marker"));
  } else if (provider == "remote") {
    RemoteChatConfig rc;
    rc.endpoint = config.require("llm.endpoint", "llm.provider=remote");
    rc.credential_env = config.str("llm.credential_env");
    transport = http_chat_transport(rc);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "llm.provider must be mock or remote, got " + provider);
  }
  auto client = std::make_unique<LlmClient>(cc, std::move(transport));
  if (ctx.sleeper) client->set_sleeper(ctx.sleeper);
  return client;
}

inline EmbeddingProvider make_embedder(const Config& config,
                                       const Context& ctx) {
  ProviderConfig pc;
  pc.mode = parse_provider_mode(config.str("embedding.mode"));
  pc.endpoint = config.get("embedding.endpoint").value_or("");
  pc.model = config.str("embedding.model");
  pc.credential_env = config.str("embedding.credential_env");
  pc.cache_path = config.get("embedding.cache").value_or("");
  pc.dim = static_cast<int>(config.integer("embedding.dim"));
  pc.batch_size = static_cast<std::size_t>(config.integer("embedding.batch_size"));
  pc.max_in_flight =
      static_cast<std::size_t>(config.integer("embedding.max_in_flight"));
  EmbedTransport transport = ctx.embed_transport;
  if (!transport && pc.mode == ProviderMode::kRemote && !pc.endpoint.empty()) {
    transport = http_embed_transport(pc);
  }
  return EmbeddingProvider(pc, transport);
}

// Allocates runs/run-NNNN (next free number) or the explicit run.id, which
// must not exist yet.
inline fs::path allocate_run_dir(const Config& config) {
  const fs::path root = config.str("run.root");
  fs::create_directories(root);
  if (auto id = config.get("run.id"); id && !id->empty()) {
    const fs::path dir = root / *id;
    if (!fs::create_directory(dir)) {
      throw Error(ErrorCode::kIoError,
                  "run directory already exists: " + dir.string());
    }
    return dir;
  }
  int highest = 0;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (name.size() == 8 && name.rfind("run-", 0) == 0) {
      try {
        highest = std::max(highest, std::stoi(name.substr(4)));
      } catch (const std::exception&) {
      }
    }
  }
  for (int n = highest + 1;; ++n) {
    char name[16];
    std::snprintf(name, sizeof(name), "run-%04d", n);
    if (fs::create_directory(root / name)) return root / name;
  }
}

inline void write_config_snapshot(const Config& config, const fs::path& dir,
                                  const std::string& command) {
  std::string text = "# " + command + "\n";
  for (const auto& [k, v] : config.values()) text += k + " = " + v + "\n";
  write_file(dir / (command + ".config"), text);
}

inline std::vector<KindShare> parse_kind_shares(const std::string& spec) {
  std::vector<KindShare> out;
  bool any_share = false;
  for (const auto& item : split_list(spec)) {
    const auto colon = item.find(':');
    KindShare ks{parse_kind(item.substr(0, colon)), 0.0};
    if (colon != std::string::npos) {
      ks.share = parse_real(item.substr(colon + 1), 0);
      any_share = true;
    }
    out.push_back(ks);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "inject.kinds is empty");
  if (!any_share) {
    for (auto& ks : out) ks.share = 1.0 / static_cast<double>(out.size());
  } else {
    for (const auto& ks : out) {
      if (ks.share <= 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "give a share for every kind in inject.kinds");
      }
    }
  }
  return out;
}

inline EncoderConfig encoder_from(const Config& config, PromptMode mode) {
  EncoderConfig ec = EncoderConfig::for_mode(mode);
  auto maybe = [&](const char* key, int& field) {
    if (config.explicitly_set(key)) field = static_cast<int>(config.integer(key));
  };
  maybe("encoder.m_token", ec.m_token);
  maybe("encoder.k_neighbors", ec.k_neighbors);
  maybe("encoder.m_node", ec.m_node);
  maybe("encoder.m_incident", ec.m_incident);
  ec.validate();
  return ec;
}

inline TagGraph load_graph(const Config& config, std::string_view command) {
  return load_dataset(DatasetPaths::in(config.require("dataset.dir", command)));
}

inline std::optional<fs::path> manifest_path(const Config& config) {
  if (auto m = config.get("eval.manifest"); m && !m->empty()) return fs::path(*m);
  if (auto d = config.get("dataset.dir"); d && !d->empty()) {
    const fs::path p = fs::path(*d) / "manifest.jsonl";
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Subcommands. Each writes only inside `run_dir`.

inline int run_inject(const Config& config, const fs::path& run_dir,
                      Context& ctx) {
  const TagGraph graph = load_graph(config, "inject");
  const std::uint64_t seed = config.seed("inject");
  const auto kinds = parse_kind_shares(config.str("inject.kinds"));
  InjectionPlan plan =
      sample_candidates(graph, config.real("inject.rate"), kinds, seed,
                        static_cast<int>(config.integer("inject.clique_size")));
  plan.k_hops = static_cast<int>(config.integer("inject.k_hops"));
  plan.perturbation.k_candidate =
      static_cast<int>(config.integer("inject.k_candidate"));
  plan.perturbation.a_low = config.real("inject.a_low");
  plan.perturbation.a_high = config.real("inject.a_high");

  InjectionDeps deps;
  std::unique_ptr<LlmClient> llm;
  std::optional<TemplateRegistry> registry;
  std::optional<OutlierPool> pool;
  std::optional<EmbeddingTable> table;
  if (!plan.nodes(AnomalyKind::kLlmContextual).empty()) {
    llm = make_llm(config, ctx);
    registry = TemplateRegistry::load(ctx.asset_dir);
    deps.llm = llm.get();
    deps.templates = &*registry;
    deps.llm_concurrency = llm->config().max_in_flight;
    deps.generation.dataset_kind = config.str("dataset.kind");
    deps.generation.dataset_name =
        config.get("dataset.name").value_or(deps.generation.dataset_kind);
    deps.generation.model = config.str("llm.model");
    deps.generation.temperature = config.real("inject.gen_temperature");
  }
  if (!plan.nodes(AnomalyKind::kGlobalContextual).empty()) {
    pool = load_outlier_pool(config.require("inject.pool", "global_contextual"));
    deps.pool = &*pool;
  }
  if (!plan.nodes(AnomalyKind::kTextPerturbation).empty()) {
    auto provider = make_embedder(config, ctx);
    table = provider.embed_graph(graph);
    deps.table = &*table;
  }

  const InjectionResult result = run_injection(graph, plan, deps);
  const SaveSummary saved =
      save_injected_dataset(result.graph, result.manifest, run_dir / "dataset");
  auto& out = *ctx.out;
  out << "injected " << saved.records << " anomalies into " << saved.nodes
      << " nodes";
  if (result.edges_added > 0) out << " (+" << result.edges_added << " edges)";
  out << "\n";
  for (AnomalyKind kind : kAllKinds) {
    if (const auto c = result.manifest.count(kind); c > 0) {
      out << "  " << kind_name(kind) << ": " << c << "\n";
    }
  }
  out << "dataset: " << (run_dir / "dataset").string() << "\n";
  return 0;
}

inline RetrievalConfig retrieval_from(const Config& config) {
  RetrievalConfig rc;
  rc.chunk_size = static_cast<int>(config.integer("rag.chunk_size"));
  rc.overlap = static_cast<int>(config.integer("rag.overlap"));
  rc.top_k = static_cast<int>(config.integer("rag.top_k"));
  for (PromptMode m : {PromptMode::kContextual, PromptMode::kStructural,
                       PromptMode::kMixed}) {
    const std::string key = "rag.query_" + std::string(mode_name(m));
    if (auto q = config.get(key); q && !q->empty()) rc.queries[m] = *q;
  }
  rc.validate();
  return rc;
}

inline int run_rag_build(const Config& config, const fs::path& run_dir,
                         Context& ctx) {
  const auto docs = load_corpus_dir(config.require("rag.corpus", "rag-build"));
  std::vector<PromptMode> modes;
  for (const auto& m : split_list(config.str("rag.modes"))) {
    modes.push_back(parse_mode(m));
  }
  auto provider = make_embedder(config, ctx);
  auto llm = make_llm(config, ctx);
  const auto registry = TemplateRegistry::load(ctx.asset_dir);
  const FrameworkStore store =
      build_frameworks(docs, modes, retrieval_from(config), provider, *llm,
                       registry, {}, config.str("llm.model"));
  store.save(run_dir / "frameworks.jsonl");
  *ctx.out << "synthesized " << store.size() << " framework(s) from "
           << docs.size() << " document(s), corpus " << corpus_hash(docs)
           << "\nframeworks: " << (run_dir / "frameworks.jsonl").string()
           << "\n";
  return 0;
}

inline std::vector<NodeId> select_nodes(const Config& config,
                                        const TagGraph& graph) {
  const std::string sel = config.str("detect.nodes");
  if (sel == "all") return graph.ids();
  if (sel == "manifest") {
    const auto path = manifest_path(config);
    if (!path) {
      throw Error(ErrorCode::kMissingGroundTruth,
                  "detect.nodes=manifest but no manifest was found");
    }
    const auto ids = load_manifest(*path).anomalous_ids();
    return {ids.begin(), ids.end()};
  }
  std::vector<NodeId> ids;
  for (const auto& item : split_list(sel)) {
    ids.push_back(parse_node_id(item, "detect.nodes", 0));
  }
  return ids;
}

inline int run_detect(const Config& config, const fs::path& run_dir,
                      Context& ctx) {
  const TagGraph graph = load_graph(config, "detect");
  DetectRunConfig dc;
  dc.seed = config.seed("detect");
  dc.mode = parse_mode(config.str("encoder.mode"));
  dc.encoder = encoder_from(config, dc.mode);
  dc.limit = static_cast<std::size_t>(config.integer("detect.limit"));
  dc.model = config.str("llm.model");
  dc.max_tokens = static_cast<int>(config.integer("detect.max_tokens"));
  dc.nodes = select_nodes(config, graph);

  const auto registry = TemplateRegistry::load(ctx.asset_dir);
  const FrameworkKind kind = parse_framework_kind(config.str("detect.framework"));
  std::optional<FrameworkStore> store;
  if (auto path = config.get("detect.frameworks"); path && !path->empty()) {
    store = FrameworkStore::load(*path);
  }
  const AnalysisFramework framework =
      get_framework(kind, dc.mode, registry, store ? &*store : nullptr);

  auto llm = make_llm(config, ctx);
  const DetectionRun run = run_detection(graph, dc, framework, *llm, registry);
  const std::map<std::string, std::string> header{
      {"mode", run.summary.mode},
      {"framework", run.summary.framework_kind},
      {"provenance", run.summary.framework_provenance},
      {"model", dc.model.empty() ? config.str("llm.provider") : dc.model},
      {"seed", std::to_string(dc.seed)}};
  write_file(run_dir / "scores.csv", scores_to_string(run.results, header));
  archive_raw(run.results, run_dir);
  nlohmann::json summary{{"nodes", run.summary.nodes},
                         {"parse_failures", run.summary.parse_failures},
                         {"llm_failures", run.summary.llm_failures},
                         {"reasks", run.summary.reasks},
                         {"mode", run.summary.mode},
                         {"framework", run.summary.framework_kind},
                         {"provenance", run.summary.framework_provenance},
                         {"midpoint_policy", "unparseable completions score 5"}};
  write_file(run_dir / "detect_summary.json", summary.dump(2) + "\n");
  *ctx.out << "scored " << run.summary.nodes << " nodes ("
           << run.summary.mode << ", " << run.summary.framework_kind
           << " framework); parse failures: " << run.summary.parse_failures
           << ", LLM failures: " << run.summary.llm_failures
           << "\nscores: " << (run_dir / "scores.csv").string() << "\n";
  return 0;
}

inline int run_eval(const Config& config, const fs::path& run_dir,
                    Context& ctx) {
  const ScoreFile scores = load_score_file(config.require("eval.scores", "eval"));
  const auto mpath = manifest_path(config);
  if (!mpath) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "no manifest: set eval.manifest or dataset.dir");
  }
  const AnomalyManifest manifest = load_manifest(*mpath);
  std::optional<std::set<NodeId>> universe;
  if (auto d = config.get("dataset.dir"); d && !d->empty()) {
    const auto ids = load_dataset(DatasetPaths::in(*d)).ids();
    universe = std::set<NodeId>(ids.begin(), ids.end());
  }
  const MetricsReport report =
      evaluate(rows_from_score_file(scores), manifest, universe);

  auto header_or = [&](const char* key, const std::string& fallback) {
    auto it = scores.header.find(key);
    return it == scores.header.end() ? fallback : it->second;
  };
  SummaryContext sc;
  sc.run_id = run_dir.filename().string();
  sc.dataset = config.get("dataset.name").value_or(
      config.get("dataset.dir").value_or(mpath->parent_path().string()));
  sc.framework_kind = config.get("eval.framework").value_or(
      header_or("framework", header_or("method", "unknown")));
  sc.model_tag = config.get("eval.model_tag").value_or(
      header_or("model", header_or("method", "unknown")));
  const std::string table = render_table(report, sc.dataset);
  write_file(run_dir / "metrics.txt", table);
  write_file(run_dir / "metrics.json", summary_json(report, sc).dump(2) + "\n");
  *ctx.out << table;
  return 0;
}

inline int run_export(const Config& config, const fs::path& run_dir,
                      Context& ctx) {
  const TagGraph graph = load_graph(config, "export-baselines");
  AnomalyManifest manifest;
  if (auto m = manifest_path(config)) manifest = load_manifest(*m);
  auto provider = make_embedder(config, ctx);
  const EmbeddingTable table = provider.embed_graph(graph);
  const ExportSummary s =
      export_for_baselines(graph, table, manifest, run_dir / "export");
  *ctx.out << "exported " << s.nodes << " nodes, " << s.edges << " edges, "
           << s.anomalies << " anomalies, dim " << s.dim << "\nexport: "
           << (run_dir / "export").string() << "\n";
  return 0;
}

inline int run_import_scores(const Config& config, const fs::path& run_dir,
                             Context& ctx) {
  const ScoreFile scores =
      load_score_file(config.require("eval.scores", "import-scores"));
  const TagGraph graph = load_graph(config, "import-scores");
  std::set<NodeId> covered;
  for (const auto& r : scores.rows) {
    if (!graph.contains(r.id)) {
      throw Error(ErrorCode::kUnknownNode,
                  "score for node " + std::to_string(r.id) +
                      " which is not in the dataset");
    }
    covered.insert(r.id);
  }
  if (covered.size() != graph.size()) {
    for (NodeId id : graph.ids()) {
      if (!covered.count(id)) {
        throw Error(ErrorCode::kMissingRequired,
                    std::to_string(graph.size() - covered.size()) +
                        " dataset nodes have no score (first: " +
                        std::to_string(id) + ")");
      }
    }
  }
  std::string text;
  if (!scores.header.empty()) {
    text += "#";
    for (const auto& [k, v] : scores.header) text += " " + k + "=" + v;
    text += "\n";
  }
  for (const auto& r : scores.rows) {
    text += std::to_string(r.id) + "," + format_real(r.score) + "\n";
  }
  write_file(run_dir / "scores.csv", text);
  auto method = scores.header.find("method");
  *ctx.out << "imported " << scores.rows.size() << " scores"
           << (method == scores.header.end() ? "" : " (" + method->second + ")")
           << "\nscores: " << (run_dir / "scores.csv").string() << "\n";
  return 0;
}

inline fs::path demo_dir(const Context& ctx) {
  return ctx.asset_dir.parent_path() / "demo";
}

// inject (global anomalies with marked pool texts) -> rag-build -> detect
// (contextual, RAG framework) -> eval, all in one run directory and offline.
inline int run_demo(const Config& base, const fs::path& run_dir, Context& ctx) {
  const fs::path demo = demo_dir(ctx);
  Config config = base;
  auto set_default = [&](const std::string& k, const std::string& v) {
    if (!config.explicitly_set(k)) config.set(k, v);
  };
  set_default("dataset.dir", (demo / "dataset").string());
  set_default("dataset.name", "demo");
  set_default("run.seed", "7");
  set_default("inject.kinds", "global_contextual");
  set_default("inject.pool", (demo / "outliers.txt").string());
  set_default("rag.corpus", (demo / "corpus").string());
  set_default("rag.modes", "contextual");
  set_default("rag.chunk_size", "64");
  set_default("rag.overlap", "8");
  set_default("rag.top_k", "4");
  set_default("detect.framework", "rag");
  config.set("llm.provider", "mock");
  config.set("embedding.mode", "hash_fallback");

  auto& out = *ctx.out;
  out << "== inject\n";
  run_inject(config, run_dir, ctx);
  out << "== rag-build\n";
  run_rag_build(config, run_dir, ctx);
  config.set("dataset.dir", (run_dir / "dataset").string());
  config.set("detect.frameworks", (run_dir / "frameworks.jsonl").string());
  out << "== detect\n";
  run_detect(config, run_dir, ctx);
  config.set("eval.scores", (run_dir / "scores.csv").string());
  out << "== eval\n";
  return run_eval(config, run_dir, ctx);
}

// Runs one subcommand in a fresh run directory. Module errors map to their
// exit status; anything else exits 1.
inline int dispatch(const std::string& command, const Config& config,
                    Context& ctx) {
  try {
    using Runner = int (*)(const Config&, const fs::path&, Context&);
    static const std::map<std::string, Runner> kRunners = {
        {"inject", &run_inject},
        {"rag-build", &run_rag_build},
        {"detect", &run_detect},
        {"eval", &run_eval},
        {"export-baselines", &run_export},
        {"import-scores", &run_import_scores},
        {"demo", &run_demo}};
    auto it = kRunners.find(command);
    if (it == kRunners.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown subcommand " + command);
    }
    const fs::path run_dir = allocate_run_dir(config);
    write_config_snapshot(config, run_dir, command);
    *ctx.out << "run: " << run_dir.string() << "\n";
    return it->second(config, run_dir, ctx);
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what()
             << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tagad::cli

#endif  // TAGAD_CLI_HPP
