#ifndef TAGAD_CONFIG_HPP
#define TAGAD_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tagad/embedding.hpp"
#include "tagad/error.hpp"
#include "tagad/util.hpp"

namespace tagad {

struct KeySpec {
  std::string key;
  std::optional<std::string> fallback;
  std::string help;
};

// Every recognised key. Anything else in a file, env override or --set is
// rejected.
inline const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> kSchema = {
      {"dataset.dir", std::nullopt, "directory with nodes/edges/labels.jsonl"},
      {"dataset.kind", "custom", "cora, citeseer, pubmed, wikics or custom"},
      {"dataset.name", std::nullopt, "display name (defaults to the kind)"},
      {"run.root", "runs", "parent directory for run directories"},
      {"run.id", std::nullopt, "explicit run directory name"},
      {"run.seed", std::nullopt, "seed for sampling"},
      {"inject.rate", "0.05", "anomaly budget as a fraction of |V|"},
      {"inject.kinds", "llm_contextual", "kind[:share] list, comma separated"},
      {"inject.clique_size", "10", "structural clique size m"},
      {"inject.k_hops", "2", "hops used by label elimination"},
      {"inject.k_candidate", "50", "perturbation candidates K"},
      {"inject.a_low", "0.25", "lower bound of the splice ratio"},
      {"inject.a_high", "0.5", "upper bound of the splice ratio"},
      {"inject.pool", std::nullopt, "outlier pool file"},
      {"inject.gen_temperature", "0.7", "temperature for rewrite calls"},
      {"encoder.mode", "contextual", "contextual, structural or mixed"},
      {"encoder.m_token", std::nullopt, "tokens kept per text"},
      {"encoder.k_neighbors", std::nullopt, "neighbors kept"},
      {"encoder.m_node", std::nullopt, "subgraph nodes kept"},
      {"encoder.m_incident", std::nullopt, "incident ids listed per node"},
      {"detect.framework", "plain", "plain, manual or rag"},
      {"detect.frameworks", std::nullopt, "stored frameworks file"},
      {"detect.limit", "4", "concurrent detection calls"},
      {"detect.nodes", "all", "all, manifest, or a comma separated id list"},
      {"detect.max_tokens", "2048", "completion budget per call"},
      {"llm.provider", "mock", "mock or remote"},
      {"llm.endpoint", std::nullopt, "chat completions URL"},
      {"llm.model", "", "model name sent to the endpoint"},
      {"llm.credential_env", "TAGAD_API_KEY", "env var holding the key"},
      {"llm.max_attempts", "3", "attempts per call"},
      {"llm.base_delay_ms", "1000", "first retry delay"},
      {"llm.max_in_flight", "4", "shared in-flight cap"},
      {"llm.min_spacing_ms", "0", "minimum gap between call starts"},
      {"llm.mock_marker", "ZXQ_MARKER", "token the mock scores as anomalous"},
      {"embedding.mode", "hash_fallback", "hash_fallback, file or remote"},
      {"embedding.endpoint", std::nullopt, "embeddings URL"},
      {"embedding.model", "", "embedding model name"},
      {"embedding.credential_env", "TAGAD_EMBED_KEY", "env var holding the key"},
      {"embedding.cache", std::nullopt, "vector cache file"},
      {"embedding.dim", "64", "vector dimension"},
      {"embedding.batch_size", "32", "texts per request"},
      {"embedding.max_in_flight", "4", "concurrent requests"},
      {"rag.corpus", std::nullopt, "directory of plain-text documents"},
      {"rag.modes", "contextual,structural,mixed", "modes to synthesize"},
      {"rag.chunk_size", "512", "tokens per chunk"},
      {"rag.overlap", "64", "tokens shared by consecutive chunks"},
      {"rag.top_k", "8", "chunks retrieved per mode"},
      {"rag.query_contextual", std::nullopt, "retrieval query override"},
      {"rag.query_structural", std::nullopt, "retrieval query override"},
      {"rag.query_mixed", std::nullopt, "retrieval query override"},
      {"eval.scores", std::nullopt, "score file"},
      {"eval.manifest", std::nullopt, "manifest (defaults to the dataset's)"},
      {"eval.framework", std::nullopt, "framework label for the summary"},
      {"eval.model_tag", std::nullopt, "model label for the summary"},
  };
  return kSchema;
}

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& spec : config_schema()) {
    if (spec.key == key) return &spec;
  }
  return nullptr;
}

// "encoder.m_token" -> "TAGAD_ENCODER_M_TOKEN".
inline std::string env_name(std::string_view key) {
  std::string out = "TAGAD_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

class Config {
 public:
  void set(const std::string& key, std::string value) {
    if (!find_key(key)) throw Error(ErrorCode::kUnknownKey, key);
    values_[key] = std::move(value);
  }

  bool has(const std::string& key) const {
    if (values_.count(key)) return true;
    const KeySpec* spec = find_key(key);
    return spec && spec->fallback;
  }

  bool explicitly_set(const std::string& key) const {
    return values_.count(key) != 0;
  }

  std::optional<std::string> get(const std::string& key) const {
    if (!find_key(key)) throw Error(ErrorCode::kUnknownKey, key);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    return find_key(key)->fallback;
  }

  std::string str(const std::string& key) const {
    auto v = get(key);
    if (!v) throw Error(ErrorCode::kMissingRequired, key);
    return *v;
  }

  std::string require(const std::string& key, std::string_view command) const {
    auto v = get(key);
    if (!v || v->empty()) {
      throw Error(ErrorCode::kMissingRequired,
                  key + " is required for " + std::string(command));
    }
    return *v;
  }

  std::int64_t integer(const std::string& key) const {
    const std::string s = str(key);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::kInvalidArgument, key + ": not an integer: " + s);
    }
    return v;
  }

  std::uint64_t seed(std::string_view command) const {
    const std::string s = require("run.seed", command);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::kInvalidArgument, "run.seed: not an integer: " + s);
    }
    return v;
  }

  double real(const std::string& key) const {
    const std::string s = str(key);
    try {
      return parse_real(s, 0);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidArgument, key + ": not a number: " + s);
    }
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// INI-style: "[section]" headers, "key = value" lines, '#' or ';' comments.
// Keys before any header must already be dotted.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(
    std::string_view text, const std::string& file = "config") {
  std::vector<std::pair<std::string, std::string>> out;
  std::string section;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::kParseError,
                    file + ":" + std::to_string(line_no) + ": bad section");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParseError,
                  file + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    out.emplace_back(key, std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

// flags > env > file > defaults. Only schema keys are looked up in the
// environment.
inline Config parse_config(
    const std::optional<std::filesystem::path>& file, const EnvLookup& env,
    const std::vector<std::pair<std::string, std::string>>& flags) {
  Config config;
  if (file) {
    for (auto& [k, v] : parse_config_text(read_file(*file), file->string())) {
      config.set(k, v);
    }
  }
  if (env) {
    for (const auto& spec : config_schema()) {
      if (auto v = env(env_name(spec.key))) config.set(spec.key, *v);
    }
  }
  for (const auto& [k, v] : flags) config.set(k, v);
  return config;
}

// "a=b" -> {a, b}.
inline std::pair<std::string, std::string> split_assignment(std::string_view s) {
  const auto eq = s.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected key=value, got '" + std::string(s) + "'");
  }
  return {std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1)))};
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

}  // namespace tagad

#endif  // TAGAD_CONFIG_HPP
