#ifndef TAGAD_RAG_HPP
#define TAGAD_RAG_HPP

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tagad/embedding.hpp"
#include "tagad/encoders.hpp"
#include "tagad/error.hpp"
#include "tagad/llm_client.hpp"
#include "tagad/prompting.hpp"
#include "tagad/util.hpp"

namespace tagad {

struct CorpusDoc {
  std::string id;
  std::string text;
};

struct CorpusChunk {
  std::string doc_id;
  int ordinal = 0;
  std::string text;
  std::optional<Vector> embedding;
};

struct RetrievalConfig {
  int chunk_size = 512;
  int overlap = 64;
  int top_k = 8;
  std::map<PromptMode, std::string> queries{
      {PromptMode::kContextual,
       "contextual anomaly definition indicators text-attributed graph"},
      {PromptMode::kStructural,
       "structural anomaly definition indicators graph connectivity "
       "dense subgraph"},
      {PromptMode::kMixed,
       "contextual and structural anomaly indicators text-attributed graph "
       "neighborhood"}};

  void validate() const {
    if (overlap < 0 || overlap >= chunk_size) {
      throw Error(ErrorCode::kInvalidArgument,
                  "need 0 <= overlap < chunk_size");
    }
    if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k < 1");
  }

  const std::string& query(PromptMode mode) const {
    auto it = queries.find(mode);
    if (it == queries.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no retrieval query for " + std::string(mode_name(mode)));
    }
    return it->second;
  }
};

// Work done by the retrieval stage; detection must never move these.
struct RagCounters {
  static std::atomic<std::size_t>& retrievals() {
    static std::atomic<std::size_t> n{0};
    return n;
  }
  static std::atomic<std::size_t>& syntheses() {
    static std::atomic<std::size_t> n{0};
    return n;
  }
};

inline std::vector<CorpusChunk> chunk_corpus(const std::vector<CorpusDoc>& docs,
                                             const RetrievalConfig& config) {
  config.validate();
  std::vector<CorpusChunk> chunks;
  const auto size = static_cast<std::size_t>(config.chunk_size);
  const auto stride = size - static_cast<std::size_t>(config.overlap);
  for (const auto& doc : docs) {
    const auto tokens = tokenize(doc.text);
    int ordinal = 0;
    for (std::size_t start = 0; start < tokens.size(); start += stride) {
      const std::size_t end = std::min(tokens.size(), start + size);
      std::vector<std::string> window(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(end));
      chunks.push_back({doc.id, ordinal++, join(window, " "), std::nullopt});
      if (end == tokens.size()) break;
    }
  }
  if (chunks.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no text");
  }
  return chunks;
}

// Embeds any chunk missing a vector, then ranks by cosine similarity to the
// query (descending), ties by (doc_id, ordinal).
inline std::vector<CorpusChunk> retrieve(std::vector<CorpusChunk> chunks,
                                         const std::string& query, int top_k,
                                         EmbeddingProvider& provider) {
  if (chunks.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "nothing to retrieve from");
  }
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k < 1");
  RagCounters::retrievals()++;

  std::vector<std::string> pending;
  for (const auto& c : chunks) {
    if (!c.embedding) pending.push_back(c.text);
  }
  pending.push_back(query);
  auto vectors = provider.embed_strings(pending);
  const Vector q = std::move(vectors.back());
  std::size_t next = 0;
  for (auto& c : chunks) {
    if (!c.embedding) c.embedding = std::move(vectors[next++]);
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    ranked.emplace_back(cosine_similarity(q, *chunks[i].embedding), i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    const auto& ca = chunks[a.second];
    const auto& cb = chunks[b.second];
    if (ca.doc_id != cb.doc_id) return ca.doc_id < cb.doc_id;
    return ca.ordinal < cb.ordinal;
  });
  const std::size_t keep =
      std::min(ranked.size(), static_cast<std::size_t>(top_k));
  std::vector<CorpusChunk> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back(std::move(chunks[ranked[i].second]));
  }
  return out;
}

inline std::string corpus_hash(const std::vector<CorpusDoc>& docs) {
  std::vector<const CorpusDoc*> sorted;
  for (const auto& d : docs) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(),
            [](const CorpusDoc* a, const CorpusDoc* b) { return a->id < b->id; });
  std::uint64_t h = fnv1a64("");
  for (const CorpusDoc* d : sorted) {
    h = fnv1a64(d->id, h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(d->text, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return hex64(h);
}

inline std::string meta_prompt_name(PromptMode mode) {
  return "rag/meta_" + std::string(mode_name(mode));
}

inline constexpr std::string_view kContextHeading =
    "\n\n----- Retrieved context -----\n";
inline constexpr std::string_view kContextFooter =
    "----- End of retrieved context -----\n";

inline std::string synthesis_prompt(PromptMode mode,
                                    const std::vector<CorpusChunk>& retrieved,
                                    const TemplateRegistry& registry) {
  std::string out = substitute(registry.get(meta_prompt_name(mode)),
                               {{"example", registry.get("rag/example")}});
  while (!out.empty() && out.back() == '\n') out.pop_back();
  out += kContextHeading;
  for (std::size_t i = 0; i < retrieved.size(); ++i) {
    const auto& c = retrieved[i];
    out += "[" + std::to_string(i + 1) + "] " + c.doc_id + " #" +
           std::to_string(c.ordinal) + "\n" + c.text + "\n";
  }
  out += kContextFooter;
  return out;
}

inline AnalysisFramework synthesize_framework(
    PromptMode mode, const std::vector<CorpusChunk>& retrieved, LlmClient& llm,
    const TemplateRegistry& registry, const std::string& corpus_digest,
    const std::string& model = "") {
  if (retrieved.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no retrieved chunks");
  }
  RagCounters::syntheses()++;
  ChatRequest request;
  request.user = synthesis_prompt(mode, retrieved, registry);
  request.model = model;
  request.request_tag = "rag/" + std::string(mode_name(mode));
  const ChatOutcome outcome = llm.complete(request);
  const std::string text(trim(outcome.text));
  if (text.empty()) {
    throw Error(ErrorCode::kEmptyCompletion,
                "framework synthesis returned nothing for " +
                    std::string(mode_name(mode)));
  }
  AnalysisFramework fw{FrameworkKind::kRag, mode, text,
                       std::string(kCorpusProvenancePrefix) + corpus_digest};
  fw.validate();
  return fw;
}

// Every regular file in the directory, sorted by name; doc id = file name.
inline std::vector<CorpusDoc> load_corpus_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "corpus directory not found: " + dir.string());
  }
  std::vector<CorpusDoc> docs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    docs.push_back({entry.path().filename().string(), read_file(entry.path())});
  }
  std::sort(docs.begin(), docs.end(),
            [](const CorpusDoc& a, const CorpusDoc& b) { return a.id < b.id; });
  return docs;
}

// Chunks once, then retrieves and synthesizes one framework per mode.
inline FrameworkStore build_frameworks(const std::vector<CorpusDoc>& docs,
                                       const std::vector<PromptMode>& modes,
                                       const RetrievalConfig& config,
                                       EmbeddingProvider& provider,
                                       LlmClient& llm,
                                       const TemplateRegistry& registry,
                                       FrameworkStore store = {},
                                       const std::string& model = "") {
  auto chunks = chunk_corpus(docs, config);
  const std::string digest = corpus_hash(docs);
  auto vectors = [&] {
    std::vector<std::string> texts;
    for (const auto& c : chunks) texts.push_back(c.text);
    return provider.embed_strings(texts);
  }();
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    chunks[i].embedding = std::move(vectors[i]);
  }
  for (PromptMode mode : modes) {
    auto top = retrieve(chunks, config.query(mode), config.top_k, provider);
    store.put(synthesize_framework(mode, top, llm, registry, digest, model));
  }
  return store;
}

}  // namespace tagad

#endif  // TAGAD_RAG_HPP
