#ifndef TAGAD_EMBEDDING_HPP
#define TAGAD_EMBEDDING_HPP

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tagad/concurrency.hpp"
#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/util.hpp"

namespace tagad {

using Vector = std::vector<double>;

struct EmbeddingTable {
  int dim = 0;
  std::map<NodeId, Vector> vectors;
  std::string provider_tag;

  bool contains(NodeId id) const { return vectors.count(id) != 0; }

  const Vector& at(NodeId id) const {
    auto it = vectors.find(id);
    if (it == vectors.end()) {
      throw Error(ErrorCode::kMissingEmbedding, "node " + std::to_string(id));
    }
    return it->second;
  }
};

inline double dot(const Vector& u, const Vector& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double l2_norm(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double cosine_similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

// Offline stand-in for a sentence encoder: signed feature hashing over
// whitespace tokens, L2-normalized. Empty (or fully cancelling) input maps
// to e_0.
inline Vector hash_embedding(std::string_view text, int dim) {
  if (dim < 2) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 2");
  Vector v(static_cast<std::size_t>(dim), 0.0);
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = fnv1a64(token);
    const std::size_t bucket = h % static_cast<std::uint64_t>(dim);
    v[bucket] += ((h >> 63) & 1) ? -1.0 : 1.0;
  }
  const double norm = l2_norm(v);
  if (norm == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

// --- Text format shared by the embedding cache and baseline export. ---
//
//   [provider=<tag>]
//   dim=<d>
//   <key> v1 ... vd
//
// Values are written with 9 significant digits.

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

inline std::string format_vector_row(std::string_view key, const Vector& v) {
  std::string line(key);
  for (double x : v) {
    line += ' ';
    line += format_real(x);
  }
  line += '\n';
  return line;
}

struct VectorFile {
  std::optional<std::string> provider;
  int dim = 0;
  std::vector<std::pair<std::string, Vector>> rows;
};

inline double parse_real(std::string_view s, std::size_t line_no) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(x)) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) +
                                            ": bad number '" +
                                            std::string(s) + "'");
  }
  return x;
}

inline VectorFile parse_vector_file(std::string_view content) {
  VectorFile out;
  bool have_dim = false;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (!have_dim && line.rfind("provider=", 0) == 0) {
      out.provider = std::string(line.substr(9));
      continue;
    }
    if (!have_dim) {
      if (line.rfind("dim=", 0) != 0) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no) + ": expected dim=");
      }
      out.dim = static_cast<int>(parse_real(line.substr(4), line_no));
      if (out.dim < 1) {
        throw Error(ErrorCode::kParseError, "dim must be positive");
      }
      have_dim = true;
      continue;
    }
    auto fields = tokenize(line);
    if (fields.size() != static_cast<std::size_t>(out.dim) + 1) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(out.dim) + " values, got " +
                      std::to_string(fields.size() - 1));
    }
    Vector v;
    v.reserve(static_cast<std::size_t>(out.dim));
    for (std::size_t i = 1; i < fields.size(); ++i) {
      v.push_back(parse_real(fields[i], line_no));
    }
    out.rows.emplace_back(std::move(fields[0]), std::move(v));
  }
  if (!have_dim) throw Error(ErrorCode::kParseError, "missing dim= header");
  return out;
}

// --- Providers ---

enum class ProviderMode { kRemote, kFile, kHashFallback };

inline std::string_view provider_mode_name(ProviderMode mode) {
  switch (mode) {
    case ProviderMode::kRemote: return "remote";
    case ProviderMode::kFile: return "file";
    case ProviderMode::kHashFallback: return "hash_fallback";
  }
  return "?";
}

inline ProviderMode parse_provider_mode(std::string_view s) {
  if (s == "remote") return ProviderMode::kRemote;
  if (s == "file") return ProviderMode::kFile;
  if (s == "hash_fallback") return ProviderMode::kHashFallback;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown embedding mode '" + std::string(s) + "'");
}

struct ProviderConfig {
  ProviderMode mode = ProviderMode::kHashFallback;
  std::string endpoint;
  std::string model;
  std::string credential_env = "TAGAD_EMBED_KEY";
  std::filesystem::path cache_path;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  int dim = 64;

  std::string tag() const {
    switch (mode) {
      case ProviderMode::kHashFallback:
        return "hash_fallback/d" + std::to_string(dim);
      case ProviderMode::kRemote:
        return "remote/" + model;
      case ProviderMode::kFile:
        return "file";
    }
    return "?";
  }
};

// Sends one batch of strings to an embedding service and returns one vector
// per input, in order.
using EmbedTransport =
    std::function<std::vector<Vector>(const std::vector<std::string>&)>;

// Vectors keyed by content hash of the text, for a single provider tag.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  EmbeddingCache(std::string provider_tag, int dim)
      : provider_tag_(std::move(provider_tag)), dim_(dim) {}

  static EmbeddingCache load(const std::filesystem::path& path) {
    VectorFile file = parse_vector_file(read_file(path));
    if (!file.provider) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ": missing provider= header");
    }
    EmbeddingCache cache(*file.provider, file.dim);
    for (auto& [key, v] : file.rows) cache.entries_[key] = std::move(v);
    return cache;
  }

  void save(const std::filesystem::path& path) const {
    std::shared_lock lock(*mu_);
    std::string out = "provider=" + provider_tag_ + "\n";
    out += "dim=" + std::to_string(dim_) + "\n";
    for (const auto& [key, v] : entries_) out += format_vector_row(key, v);
    write_file(path, out);
  }

  const std::string& provider_tag() const { return provider_tag_; }
  int dim() const { return dim_; }

  std::optional<Vector> find(const std::string& text) const {
    std::shared_lock lock(*mu_);
    auto it = entries_.find(content_hash(text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& text, Vector v) {
    std::unique_lock lock(*mu_);
    entries_[content_hash(text)] = std::move(v);
  }

  std::size_t size() const {
    std::shared_lock lock(*mu_);
    return entries_.size();
  }

 private:
  std::string provider_tag_;
  int dim_ = 0;
  std::map<std::string, Vector> entries_;
  // Heap-allocated so the cache stays movable.
  std::unique_ptr<std::shared_mutex> mu_ = std::make_unique<std::shared_mutex>();
};

inline void validate_vector(const Vector& v, int dim, std::string_view what) {
  if (v.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": got " + std::to_string(v.size()) +
                    " values, expected " + std::to_string(dim));
  }
  bool nonzero = false;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + ": non-finite entry");
    }
    nonzero = nonzero || x != 0.0;
  }
  if (!nonzero) {
    throw Error(ErrorCode::kZeroVector, std::string(what));
  }
}

class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(ProviderConfig config,
                             EmbedTransport transport = {})
      : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.batch_size < 1 || config_.max_in_flight < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "batch size and in-flight limit must be >= 1");
    }
    switch (config_.mode) {
      case ProviderMode::kHashFallback:
        cache_ = EmbeddingCache(config_.tag(), config_.dim);
        break;
      case ProviderMode::kFile:
        if (config_.cache_path.empty() ||
            !std::filesystem::exists(config_.cache_path)) {
          throw Error(ErrorCode::kProviderUnavailable,
                      "file mode needs an existing cache file");
        }
        cache_ = EmbeddingCache::load(config_.cache_path);
        config_.dim = cache_.dim();
        break;
      case ProviderMode::kRemote:
        if (config_.endpoint.empty() && !transport_) {
          throw Error(ErrorCode::kProviderUnavailable,
                      "remote mode needs an endpoint");
        }
        if (!config_.cache_path.empty() &&
            std::filesystem::exists(config_.cache_path)) {
          cache_ = EmbeddingCache::load(config_.cache_path);
          if (cache_.provider_tag() != config_.tag()) {
            // Never reuse vectors produced by a different provider.
            cache_ = EmbeddingCache(config_.tag(), config_.dim);
          } else if (cache_.dim() != config_.dim) {
            throw Error(ErrorCode::kDimensionMismatch,
                        "cache dim " + std::to_string(cache_.dim()) +
                            " vs provider dim " +
                            std::to_string(config_.dim));
          }
        } else {
          cache_ = EmbeddingCache(config_.tag(), config_.dim);
        }
        break;
    }
  }

  const ProviderConfig& config() const { return config_; }
  std::string tag() const { return cache_.provider_tag(); }
  int dim() const { return config_.dim; }

  // Number of batches sent to the remote transport so far.
  std::size_t remote_calls() const { return remote_calls_.load(); }

  std::vector<Vector> embed_strings(const std::vector<std::string>& texts) {
    if (config_.mode == ProviderMode::kHashFallback) {
      std::vector<Vector> out;
      out.reserve(texts.size());
      for (const auto& t : texts) out.push_back(hash_embedding(t, config_.dim));
      return out;
    }
    if (config_.mode == ProviderMode::kRemote) fetch_missing(texts);
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto v = cache_.find(texts[i]);
      if (!v) {
        throw Error(ErrorCode::kProviderUnavailable,
                    "no cached vector for item " + std::to_string(i));
      }
      out.push_back(std::move(*v));
    }
    return out;
  }

  EmbeddingTable embed_texts(
      const std::vector<std::pair<NodeId, std::string>>& items) {
    std::set<NodeId> seen;
    std::vector<std::string> texts;
    texts.reserve(items.size());
    for (const auto& [id, text] : items) {
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kDuplicateNodeId, "node " + std::to_string(id));
      }
      texts.push_back(text);
    }
    if (config_.mode == ProviderMode::kRemote) fetch_missing(texts);

    EmbeddingTable table;
    table.dim = config_.dim;
    table.provider_tag = tag();
    for (const auto& [id, text] : items) {
      Vector v;
      if (config_.mode == ProviderMode::kHashFallback) {
        v = hash_embedding(text, config_.dim);
      } else {
        auto cached = cache_.find(text);
        if (!cached) {
          throw Error(ErrorCode::kProviderUnavailable,
                      "no cached vector for node " + std::to_string(id));
        }
        v = std::move(*cached);
      }
      validate_vector(v, config_.dim, "node " + std::to_string(id));
      table.vectors.emplace(id, std::move(v));
    }
    return table;
  }

  // Table over every node's current text.
  EmbeddingTable embed_graph(const TagGraph& graph) {
    std::vector<std::pair<NodeId, std::string>> items;
    items.reserve(graph.size());
    for (const auto& n : graph.nodes()) items.emplace_back(n.id, n.text);
    return embed_texts(items);
  }

 private:
  void fetch_missing(const std::vector<std::string>& texts) {
    std::vector<std::string> missing;
    std::set<std::string> queued;
    for (const auto& t : texts) {
      if (!cache_.find(t) && queued.insert(t).second) missing.push_back(t);
    }
    if (missing.empty()) return;
    if (!transport_) {
      throw Error(ErrorCode::kProviderUnavailable,
                  "remote transport not configured");
    }
    const std::size_t batches =
        (missing.size() + config_.batch_size - 1) / config_.batch_size;
    parallel_for(batches, config_.max_in_flight, [&](std::size_t b) {
      const std::size_t lo = b * config_.batch_size;
      const std::size_t hi = std::min(missing.size(), lo + config_.batch_size);
      std::vector<std::string> batch(missing.begin() + lo,
                                     missing.begin() + hi);
      ++remote_calls_;
      std::vector<Vector> vectors = transport_(batch);
      if (vectors.size() != batch.size()) {
        throw Error(ErrorCode::kProviderUnavailable,
                    "embedding service returned " +
                        std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(batch.size()) + " inputs");
      }
      for (std::size_t i = 0; i < batch.size(); ++i) {
        validate_vector(vectors[i], config_.dim, "remote vector");
        cache_.put(batch[i], std::move(vectors[i]));
      }
    });
    if (!config_.cache_path.empty()) cache_.save(config_.cache_path);
  }

  ProviderConfig config_;
  EmbedTransport transport_;
  EmbeddingCache cache_;
  std::atomic<std::size_t> remote_calls_{0};
};

}  // namespace tagad

#endif  // TAGAD_EMBEDDING_HPP
